//! Device calibration loaded from `key = value` files.
//!
//! ```text
//! # SI units throughout
//! vdd = 1.2
//! nmos.vth0 = 0.35
//! nmos.kprime = 200e-6
//! pmos.vth0 = -0.35
//! corner.fast.vth_scale = 0.9
//! pfd.load_cap = 1e-15
//! ```
//!
//! Unlisted keys keep their compiled-in defaults. Gate capacitances are
//! given at the reference width (`nmos.w` / `pmos.w`) and scale linearly
//! with the width the circuit is built at.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::devices::{CornerName, CornerScales, CornerSet, MosfetParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub vdd: f64,
    pub nmos: MosfetParams,
    pub pmos: MosfetParams,
    pub fast: CornerScales,
    pub slow: CornerScales,
    /// Storage capacitance on each dynamic internal node (F).
    pub internal_cap: f64,
    /// Default load on each output (F).
    pub load_cap: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            vdd: 1.2,
            nmos: MosfetParams::default_nmos(),
            pmos: MosfetParams::default_pmos(),
            fast: CornerScales::default_fast(),
            slow: CornerScales::default_slow(),
            internal_cap: 0.5e-15,
            load_cap: 1e-15,
        }
    }
}

const KEYS: &[&str] = &[
    "vdd",
    "nmos.vth0",
    "nmos.kprime",
    "nmos.lambda",
    "nmos.w",
    "nmos.l",
    "nmos.cgs",
    "nmos.cgd",
    "pmos.vth0",
    "pmos.kprime",
    "pmos.lambda",
    "pmos.w",
    "pmos.l",
    "pmos.cgs",
    "pmos.cgd",
    "corner.fast.vth_scale",
    "corner.fast.k_scale",
    "corner.slow.vth_scale",
    "corner.slow.k_scale",
    "pfd.internal_cap",
    "pfd.load_cap",
];

impl Calibration {
    pub fn corner(&self, name: CornerName) -> CornerSet {
        CornerSet::from_scales(name, self.fast, self.slow)
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        let (dev, field) = match key.split_once('.') {
            Some(("nmos", f)) => (Some(&mut self.nmos), f),
            Some(("pmos", f)) => (Some(&mut self.pmos), f),
            _ => (None, key),
        };
        if let Some(d) = dev {
            return match field {
                "vth0" => Some(&mut d.vth0),
                "kprime" => Some(&mut d.kprime),
                "lambda" => Some(&mut d.lambda),
                "w" => Some(&mut d.w),
                "l" => Some(&mut d.l),
                "cgs" => Some(&mut d.cgs),
                "cgd" => Some(&mut d.cgd),
                _ => None,
            };
        }
        match key {
            "vdd" => Some(&mut self.vdd),
            "corner.fast.vth_scale" => Some(&mut self.fast.vth_scale),
            "corner.fast.k_scale" => Some(&mut self.fast.k_scale),
            "corner.slow.vth_scale" => Some(&mut self.slow.vth_scale),
            "corner.slow.k_scale" => Some(&mut self.slow.k_scale),
            "pfd.internal_cap" => Some(&mut self.internal_cap),
            "pfd.load_cap" => Some(&mut self.load_cap),
            _ => None,
        }
    }

    /// Parses a calibration file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cal = Calibration::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ParseLine {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
            let slot = cal
                .slot(key)
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            *slot = value;
        }
        cal.validate()?;
        Ok(cal)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Renders every key, round-trippable through [`Calibration::parse`].
    pub fn to_config_string(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        for key in KEYS {
            let v = *copy.slot(key).expect("known key");
            let _ = writeln!(out, "{key} = {v:e}");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.vdd.is_finite() && self.vdd > 0.0) {
            v.push(format!("vdd must be > 0 (got {})", self.vdd));
        }
        v.extend(
            self.nmos
                .violations()
                .into_iter()
                .map(|m| format!("nmos: {m}")),
        );
        v.extend(
            self.pmos
                .violations()
                .into_iter()
                .map(|m| format!("pmos: {m}")),
        );
        if self.nmos.polarity != crate::devices::Polarity::Nmos
            || self.pmos.polarity != crate::devices::Polarity::Pmos
        {
            v.push("device templates have swapped polarity".into());
        }
        for name in CornerName::ALL {
            v.extend(self.corner(name).violations());
        }
        if !(self.internal_cap > 0.0) || !(self.load_cap > 0.0) {
            v.push("pfd capacitances must be > 0".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}
