//! Level-1 (Shichman-Hodges) MOSFET model and process corners.
//!
//! Drain current follows the square law with channel-length modulation:
//!
//! - cutoff (`vov <= 0`): `I = 0`
//! - triode (`0 < vds < vov`): `I = k'(W/L)(vov*vds - vds^2/2)(1 + lambda*vds)`
//! - saturation (`vds >= vov`): `I = k'(W/L)/2 * vov^2 * (1 + lambda*vds)`
//!
//! The device is treated as symmetric: for `vds < 0` the drain and source
//! terminals swap roles. PMOS devices are evaluated by sign reflection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Nmos,
    Pmos,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Nmos => "nmos",
            Polarity::Pmos => "pmos",
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nmos" | "n" => Ok(Polarity::Nmos),
            "pmos" | "p" => Ok(Polarity::Pmos),
            other => Err(Error::Parse(format!("unknown polarity `{other}`"))),
        }
    }
}

/// Level-1 model card for one transistor instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosfetParams {
    pub polarity: Polarity,
    /// Zero-bias threshold voltage (V). Positive for NMOS, negative for PMOS.
    pub vth0: f64,
    /// Process transconductance `mu * Cox` (A/V^2).
    pub kprime: f64,
    /// Channel-length modulation (1/V).
    pub lambda: f64,
    /// Gate width (m).
    pub w: f64,
    /// Gate length (m).
    pub l: f64,
    /// Lumped gate-source capacitance (F).
    pub cgs: f64,
    /// Lumped gate-drain capacitance (F).
    pub cgd: f64,
}

impl MosfetParams {
    /// Default 90 nm-class NMOS at W = 260 nm, L = 100 nm.
    pub fn default_nmos() -> Self {
        MosfetParams {
            polarity: Polarity::Nmos,
            vth0: 0.35,
            kprime: 200e-6,
            lambda: 0.1,
            w: 260e-9,
            l: 100e-9,
            cgs: 0.1e-15,
            cgd: 0.1e-15,
        }
    }

    /// Default 90 nm-class PMOS at W = 260 nm, L = 100 nm.
    pub fn default_pmos() -> Self {
        MosfetParams {
            polarity: Polarity::Pmos,
            vth0: -0.35,
            kprime: 80e-6,
            ..Self::default_nmos()
        }
    }

    /// `kprime * W / L`.
    pub fn beta(&self) -> f64 {
        self.kprime * self.w / self.l
    }

    /// Returns every violated invariant as a human-readable message.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite = [
            self.vth0,
            self.kprime,
            self.lambda,
            self.w,
            self.l,
            self.cgs,
            self.cgd,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            out.push("non-finite parameter".to_string());
        }
        if !(self.w > 0.0) {
            out.push(format!("w must be > 0 (got {:e})", self.w));
        }
        if !(self.l > 0.0) {
            out.push(format!("l must be > 0 (got {:e})", self.l));
        }
        if !(self.kprime > 0.0) {
            out.push(format!("kprime must be > 0 (got {:e})", self.kprime));
        }
        if !(self.lambda >= 0.0) {
            out.push(format!("lambda must be >= 0 (got {:e})", self.lambda));
        }
        if !(self.cgs >= 0.0) || !(self.cgd >= 0.0) {
            out.push("gate capacitances must be >= 0".to_string());
        }
        match self.polarity {
            Polarity::Nmos if !(self.vth0 > 0.0) => {
                out.push(format!("NMOS vth0 must be > 0 (got {})", self.vth0))
            }
            Polarity::Pmos if !(self.vth0 < 0.0) => {
                out.push(format!("PMOS vth0 must be < 0 (got {})", self.vth0))
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

/// Current and its partial derivatives for an n-type device with
/// `vds >= 0` and a positive threshold.
fn forward(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> (f64, f64, f64) {
    let vov = vgs - vth;
    if vov <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        let core = vov * vds - 0.5 * vds * vds;
        let id = beta * core * clm;
        let gm = beta * vds * clm;
        let gds = beta * ((vov - vds) * clm + lambda * core);
        (id, gm, gds)
    } else {
        let id = 0.5 * beta * vov * vov * clm;
        let gm = beta * vov * clm;
        let gds = 0.5 * beta * vov * vov * lambda;
        (id, gm, gds)
    }
}

/// n-type evaluation including drain/source swap for negative `vds`.
fn symmetric(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> (f64, f64, f64) {
    if vds >= 0.0 {
        forward(beta, vth, lambda, vgs, vds)
    } else {
        // Roles swap: the gate now sees vgd and the "drain" sits at -vds.
        let (id, fg, fd) = forward(beta, vth, lambda, vgs - vds, -vds);
        (-id, -fg, fg + fd)
    }
}

/// Drain current, gm and gds at the given terminal voltages.
///
/// Current is positive flowing into the drain terminal.
pub fn mosfet_eval(p: &MosfetParams, vgs: f64, vds: f64) -> (f64, f64, f64) {
    let beta = p.beta();
    match p.polarity {
        Polarity::Nmos => symmetric(beta, p.vth0, p.lambda, vgs, vds),
        Polarity::Pmos => {
            let (id, gm, gds) = symmetric(beta, p.vth0.abs(), p.lambda, -vgs, -vds);
            // I_p(vgs, vds) = -I_n(-vgs, -vds); the chain rule cancels both sign flips.
            (-id, gm, gds)
        }
    }
}

/// Drain current in amperes (positive into the drain).
pub fn mosfet_current(p: &MosfetParams, vgs: f64, vds: f64) -> f64 {
    mosfet_eval(p, vgs, vds).0
}

/// Analytic `(gm, gds)`: partial derivatives of [`mosfet_current`]
/// with respect to `vgs` and `vds`.
pub fn mosfet_conductances(p: &MosfetParams, vgs: f64, vds: f64) -> (f64, f64) {
    let (_, gm, gds) = mosfet_eval(p, vgs, vds);
    (gm, gds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CornerName {
    Tt,
    Ff,
    Ss,
    Fs,
    Sf,
}

impl CornerName {
    pub const ALL: [CornerName; 5] = [
        CornerName::Tt,
        CornerName::Ff,
        CornerName::Fs,
        CornerName::Sf,
        CornerName::Ss,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CornerName::Tt => "TT",
            CornerName::Ff => "FF",
            CornerName::Ss => "SS",
            CornerName::Fs => "FS",
            CornerName::Sf => "SF",
        }
    }

    /// Speed of the (NMOS, PMOS) devices; `None` is typical.
    fn speeds(self) -> (Option<Speed>, Option<Speed>) {
        use Speed::*;
        match self {
            CornerName::Tt => (None, None),
            CornerName::Ff => (Some(Fast), Some(Fast)),
            CornerName::Ss => (Some(Slow), Some(Slow)),
            CornerName::Fs => (Some(Fast), Some(Slow)),
            CornerName::Sf => (Some(Slow), Some(Fast)),
        }
    }
}

impl fmt::Display for CornerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CornerName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TT" => Ok(CornerName::Tt),
            "FF" => Ok(CornerName::Ff),
            "SS" => Ok(CornerName::Ss),
            "FS" => Ok(CornerName::Fs),
            "SF" => Ok(CornerName::Sf),
            other => Err(Error::Parse(format!("unknown corner `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Speed {
    Fast,
    Slow,
}

/// Multipliers applied to `|vth0|` and `kprime` of one device speed grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerScales {
    pub vth_scale: f64,
    pub k_scale: f64,
}

impl CornerScales {
    pub const IDENTITY: CornerScales = CornerScales {
        vth_scale: 1.0,
        k_scale: 1.0,
    };

    pub fn default_fast() -> Self {
        CornerScales {
            vth_scale: 0.9,
            k_scale: 1.15,
        }
    }

    pub fn default_slow() -> Self {
        CornerScales {
            vth_scale: 1.1,
            k_scale: 0.85,
        }
    }
}

/// A named process corner with per-polarity scale factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub name: CornerName,
    pub vth_scale_n: f64,
    pub vth_scale_p: f64,
    pub k_scale_n: f64,
    pub k_scale_p: f64,
}

impl CornerSet {
    pub fn typical() -> Self {
        Self::from_scales(
            CornerName::Tt,
            CornerScales::default_fast(),
            CornerScales::default_slow(),
        )
    }

    /// Builds `name` from the given fast and slow scale tables.
    pub fn from_scales(name: CornerName, fast: CornerScales, slow: CornerScales) -> Self {
        let pick = |s: Option<Speed>| match s {
            None => CornerScales::IDENTITY,
            Some(Speed::Fast) => fast,
            Some(Speed::Slow) => slow,
        };
        let (n, p) = name.speeds();
        let (n, p) = (pick(n), pick(p));
        CornerSet {
            name,
            vth_scale_n: n.vth_scale,
            vth_scale_p: p.vth_scale,
            k_scale_n: n.k_scale,
            k_scale_p: p.k_scale,
        }
    }

    /// Corner built from the compiled-in default scale tables.
    pub fn standard(name: CornerName) -> Self {
        Self::from_scales(
            name,
            CornerScales::default_fast(),
            CornerScales::default_slow(),
        )
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let scales = [
            self.vth_scale_n,
            self.vth_scale_p,
            self.k_scale_n,
            self.k_scale_p,
        ];
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            out.push(format!("corner {}: all scales must be > 0", self.name));
        }
        let (n, p) = self.name.speeds();
        for (label, speed, vth, k) in [
            ("n", n, self.vth_scale_n, self.k_scale_n),
            ("p", p, self.vth_scale_p, self.k_scale_p),
        ] {
            let ok = match speed {
                None => vth == 1.0 && k == 1.0,
                Some(Speed::Fast) => vth < 1.0 && k > 1.0,
                Some(Speed::Slow) => vth > 1.0 && k < 1.0,
            };
            if !ok {
                out.push(format!(
                    "corner {}: {label}-device scales (vth x{vth}, k x{k}) inconsistent with corner letter",
                    self.name
                ));
            }
        }
        out
    }
}

/// Returns `p` with `|vth0|` and `kprime` scaled by the polarity-matching
/// corner factors. All other fields are copied unchanged.
pub fn apply_corner(p: &MosfetParams, c: &CornerSet) -> MosfetParams {
    let (vs, ks) = match p.polarity {
        Polarity::Nmos => (c.vth_scale_n, c.k_scale_n),
        Polarity::Pmos => (c.vth_scale_p, c.k_scale_p),
    };
    MosfetParams {
        vth0: p.vth0 * vs,
        kprime: p.kprime * ks,
        ..*p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nmos_no_clm() -> MosfetParams {
        MosfetParams {
            lambda: 0.0,
            ..MosfetParams::default_nmos()
        }
    }

    #[test]
    fn cutoff_is_zero() {
        let p = nmos_no_clm();
        for vds in [0.0, 0.3, 1.2] {
            assert_eq!(mosfet_current(&p, 0.2, vds), 0.0);
            assert_eq!(mosfet_conductances(&p, 0.2, vds), (0.0, 0.0));
        }
    }

    #[test]
    fn saturation_hand_value() {
        // 0.5 * 200u * 2.6 * 0.85^2
        let id = mosfet_current(&nmos_no_clm(), 1.2, 1.2);
        assert!((id - 187.85e-6).abs() < 1e-12, "{id}");
        let (gm, gds) = mosfet_conductances(&nmos_no_clm(), 1.2, 1.2);
        assert!((gm - 442e-6).abs() < 1e-12, "{gm}");
        assert_eq!(gds, 0.0);
    }

    #[test]
    fn triode_hand_value() {
        // 200u * 2.6 * (0.085 - 0.005)
        let id = mosfet_current(&nmos_no_clm(), 1.2, 0.1);
        assert!((id - 41.6e-6).abs() < 1e-12, "{id}");
    }

    #[test]
    fn negative_vds_swaps_terminals() {
        let p = MosfetParams::default_nmos();
        // Source at 0.1 V above drain: gate-to-"source" is vgs - vds.
        let id = mosfet_current(&p, 1.0, -0.1);
        let mirrored = mosfet_current(&p, 1.1, 0.1);
        assert!((id + mirrored).abs() < 1e-18);
    }

    #[test]
    fn pmos_conducts_with_negative_bias() {
        let p = MosfetParams::default_pmos();
        assert!(mosfet_current(&p, -1.2, -1.2) < 0.0);
        assert_eq!(mosfet_current(&p, -0.2, -1.2), 0.0);
    }

    #[test]
    fn corner_examples() {
        let n = MosfetParams::default_nmos();
        let tt = CornerSet::standard(CornerName::Tt);
        assert_eq!(apply_corner(&n, &tt), n);

        let ff = CornerSet::standard(CornerName::Ff);
        assert!((apply_corner(&n, &ff).vth0 - 0.315).abs() < 1e-15);

        let p = MosfetParams::default_pmos();
        let ss = CornerSet::standard(CornerName::Ss);
        let q = apply_corner(&p, &ss);
        assert!((q.vth0 + 0.385).abs() < 1e-15);
        assert_eq!(q.w, p.w);
        assert_eq!(q.cgs, p.cgs);
    }

    #[test]
    fn standard_corners_satisfy_invariants() {
        for name in CornerName::ALL {
            let c = CornerSet::standard(name);
            assert!(c.violations().is_empty(), "{:?}", c.violations());
        }
        let mut bad = CornerSet::standard(CornerName::Ff);
        bad.k_scale_p = 0.9;
        assert_eq!(bad.violations().len(), 1);
    }

    #[test]
    fn param_validation() {
        assert!(MosfetParams::default_nmos().violations().is_empty());
        assert!(MosfetParams::default_pmos().violations().is_empty());
        let bad = MosfetParams {
            vth0: -0.3,
            w: 0.0,
            ..MosfetParams::default_nmos()
        };
        assert_eq!(bad.violations().len(), 2);
    }
}
