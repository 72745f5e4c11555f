//! Reference 16-transistor symmetric PFD.
//!
//! Detection core (8 FETs). `X` and `Y` are active-low dynamic nodes:
//!
//! ```text
//!   X: MN1(A) -- MN2(Y) to ground,  MP1(A) -- MP2(B) from VDD
//!   Y: MN3(B) -- MN4(X) to ground,  MP3(B) -- MP4(A) from VDD
//! ```
//!
//! Both nodes precharge while A = B = 0. The first rising input discharges
//! its node; the cross-gated foot transistor then blocks the other node from
//! discharging until both inputs have returned low.
//!
//! Output stage (8 FETs): two static NOR2 gates restore full-swing outputs.
//! The default [`OutputStage::InputGated`] wiring is `UP = NOR(X, B)`,
//! `DN = NOR(Y, A)`, so UP is high from the rising edge of A until the rising
//! edge of B. [`OutputStage::CrossCoupled`] (`UP = NOR(X, DN)`,
//! `DN = NOR(Y, UP)`) is kept for comparison; it latches until the next
//! precharge and is metastable for coincident edges.

use serde::{Deserialize, Serialize};

use super::{Element, Netlist, PulseSpec};
use crate::config::Calibration;
use crate::devices::{apply_corner, CornerName, CornerSet, MosfetParams};

/// Probe aliases attached to every PFD netlist.
pub const PFD_PROBES: [&str; 7] = ["A", "B", "X", "Y", "UP", "DN", "VDD"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputStage {
    #[default]
    InputGated,
    CrossCoupled,
}

impl std::str::FromStr for OutputStage {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "input-gated" => Ok(OutputStage::InputGated),
            "cross-coupled" => Ok(OutputStage::CrossCoupled),
            other => Err(crate::Error::Parse(format!(
                "unknown output stage `{other}`"
            ))),
        }
    }
}

/// Input waveforms on A (reference) and B (feedback).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub a: PulseSpec,
    pub b: PulseSpec,
}

impl Stimulus {
    /// Edge time as a fraction of the period (10 ps at 1 GHz).
    pub const EDGE_FRACTION: f64 = 0.01;
    /// First rising edge of the leading input, as a fraction of the period.
    pub const START_FRACTION: f64 = 0.25;

    /// Equal-frequency clocks; positive `offset` delays B (A leads).
    pub fn clocks(vdd: f64, frequency: f64, offset: f64) -> Self {
        let period = 1.0 / frequency;
        let edge = Self::EDGE_FRACTION * period;
        let t0 = Self::START_FRACTION * period;
        Stimulus {
            a: PulseSpec::clock(vdd, period, edge, t0 + (-offset).max(0.0)),
            b: PulseSpec::clock(vdd, period, edge, t0 + offset.max(0.0)),
        }
    }

    /// Clocks at different frequencies, both starting at a quarter of the
    /// slower period.
    pub fn mismatched(vdd: f64, f_a: f64, f_b: f64) -> Self {
        let t0 = Self::START_FRACTION / f_a.min(f_b);
        let clock = |f: f64| PulseSpec::clock(vdd, 1.0 / f, Self::EDGE_FRACTION / f, t0);
        Stimulus {
            a: clock(f_a),
            b: clock(f_b),
        }
    }

    pub fn swapped(self) -> Self {
        Stimulus {
            a: self.b,
            b: self.a,
        }
    }

    /// Shortest input period.
    pub fn min_period(&self) -> f64 {
        self.a.period.min(self.b.period)
    }
}

/// Geometry, corner and loading of one PFD instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfdConfig {
    pub width: f64,
    pub length: f64,
    pub corner: CornerSet,
    pub load_cap: f64,
    pub output_stage: OutputStage,
}

impl PfdConfig {
    pub const DEFAULT_WIDTH: f64 = 260e-9;
    pub const DEFAULT_LENGTH: f64 = 100e-9;

    pub fn new(cal: &Calibration) -> Self {
        PfdConfig {
            width: Self::DEFAULT_WIDTH,
            length: Self::DEFAULT_LENGTH,
            corner: cal.corner(CornerName::Tt),
            load_cap: cal.load_cap,
            output_stage: OutputStage::default(),
        }
    }
}

/// Sizes a calibration template; gate capacitance scales with width.
fn sized(template: &MosfetParams, width: f64, length: f64, corner: &CornerSet) -> MosfetParams {
    let scale = width / template.w;
    let p = MosfetParams {
        w: width,
        l: length,
        cgs: template.cgs * scale,
        cgd: template.cgd * scale,
        ..*template
    };
    apply_corner(&p, corner)
}

/// Builds the reference PFD with supply, input sources and output loads.
///
/// Device and node order is fixed, so equal arguments give equal netlists.
pub fn build_pfd(cal: &Calibration, cfg: &PfdConfig, stim: &Stimulus) -> Netlist {
    let n = sized(&cal.nmos, cfg.width, cfg.length, &cfg.corner);
    let p = sized(&cal.pmos, cfg.width, cfg.length, &cfg.corner);
    let mut net = Netlist::new();
    build_into(&mut net, cal, cfg, stim, n, p).expect("reference PFD construction is infallible");
    net
}

fn build_into(
    net: &mut Netlist,
    cal: &Calibration,
    cfg: &PfdConfig,
    stim: &Stimulus,
    n: MosfetParams,
    p: MosfetParams,
) -> crate::Result<()> {
    net.add_ground("0")?;
    for node in [
        "vdd", "a", "b", "x", "y", "up", "dn", "x_n", "y_n", "x_p", "y_p",
    ] {
        net.add_node(node)?;
    }

    net.add_device(
        "VDD",
        Element::DcSource {
            plus: "vdd",
            minus: "0",
            volts: cal.vdd,
        },
    )?;
    net.add_device(
        "VA",
        Element::PulseSource {
            plus: "a",
            minus: "0",
            pulse: stim.a,
        },
    )?;
    net.add_device(
        "VB",
        Element::PulseSource {
            plus: "b",
            minus: "0",
            pulse: stim.b,
        },
    )?;

    let fet = |drain, gate, source, params| Element::Mosfet {
        drain,
        gate,
        source,
        params,
    };
    // X side
    net.add_device("MN1", fet("x", "a", "x_n", n))?;
    net.add_device("MN2", fet("x_n", "y", "0", n))?;
    net.add_device("MP1", fet("x_p", "a", "vdd", p))?;
    net.add_device("MP2", fet("x", "b", "x_p", p))?;
    // Y side, mirror image
    net.add_device("MN3", fet("y", "b", "y_n", n))?;
    net.add_device("MN4", fet("y_n", "x", "0", n))?;
    net.add_device("MP3", fet("y_p", "b", "vdd", p))?;
    net.add_device("MP4", fet("y", "a", "y_p", p))?;

    let (up_second, dn_second) = match cfg.output_stage {
        OutputStage::InputGated => ("b", "a"),
        OutputStage::CrossCoupled => ("dn", "up"),
    };
    net.add_nor2("UPG", "up", "x", up_second, "vdd", "0", p, n)?;
    net.add_nor2("DNG", "dn", "y", dn_second, "vdd", "0", p, n)?;

    for (name, node, farads) in [
        ("CX", "x", cal.internal_cap),
        ("CY", "y", cal.internal_cap),
        ("CUP", "up", cfg.load_cap),
        ("CDN", "dn", cfg.load_cap),
    ] {
        net.add_device(
            name,
            Element::Capacitor {
                a: node,
                b: "0",
                farads,
            },
        )?;
    }

    for (alias, node) in PFD_PROBES
        .iter()
        .zip(["a", "b", "x", "y", "up", "dn", "vdd"])
    {
        net.add_probe(alias, node)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_net(corner: CornerName) -> Netlist {
        let cal = Calibration::default();
        let mut cfg = PfdConfig::new(&cal);
        cfg.corner = cal.corner(corner);
        build_pfd(&cal, &cfg, &Stimulus::clocks(cal.vdd, 1e9, 100e-12))
    }

    #[test]
    fn sixteen_fets_and_sources() {
        let net = default_net(CornerName::Tt);
        assert_eq!(net.mosfet_count(), 16);
        assert_eq!(net.count(|e| matches!(e, Element::PulseSource { .. })), 2);
        assert_eq!(net.count(|e| matches!(e, Element::DcSource { .. })), 1);
        let loads = ["CUP", "CDN"]
            .iter()
            .filter(|n| net.device(n).is_some())
            .count();
        assert_eq!(loads, 2);
        assert!(net.validate().is_empty(), "{:?}", net.validate());
    }

    #[test]
    fn corner_changes_only_device_parameters() {
        let tt = default_net(CornerName::Tt);
        let ff = default_net(CornerName::Ff);
        assert_eq!(tt.nodes(), ff.nodes());
        assert_eq!(tt.devices().len(), ff.devices().len());
        for (a, b) in tt.devices().iter().zip(ff.devices()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.element.terminals(), b.element.terminals());
            if let (Element::Mosfet { params: pa, .. }, Element::Mosfet { params: pb, .. }) =
                (&a.element, &b.element)
            {
                assert_ne!(pa.vth0, pb.vth0);
                assert_ne!(pa.kprime, pb.kprime);
                assert_eq!((pa.w, pa.l, pa.cgs, pa.cgd), (pb.w, pb.l, pb.cgs, pb.cgd));
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn stimulus_differs_only_in_delay() {
        let s = Stimulus::clocks(1.2, 1e9, 100e-12);
        let a = PulseSpec { delay: 0.0, ..s.a };
        let b = PulseSpec { delay: 0.0, ..s.b };
        assert_eq!(a, b);
        assert!((s.b.delay - s.a.delay - 100e-12).abs() < 1e-24);
        let m = Stimulus::clocks(1.2, 1e9, -100e-12);
        assert!((m.a.delay - m.b.delay - 100e-12).abs() < 1e-24);
    }

    #[test]
    fn cross_coupled_variant_also_valid() {
        let cal = Calibration::default();
        let cfg = PfdConfig {
            output_stage: OutputStage::CrossCoupled,
            ..PfdConfig::new(&cal)
        };
        let net = build_pfd(&cal, &cfg, &Stimulus::clocks(cal.vdd, 1e9, 0.0));
        assert_eq!(net.mosfet_count(), 16);
        assert!(net.validate().is_empty());
    }
}
