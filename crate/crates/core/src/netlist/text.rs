//! Line-oriented netlist text format.
//!
//! ```text
//! ground <node>
//! node <node>
//! probe <alias> <node>
//! tie <node>
//! M <name> <nmos|pmos> <drain> <gate> <source> vth0=.. kprime=.. lambda=.. w=.. l=.. cgs=.. cgd=..
//! R <name> <a> <b> <ohms>
//! C <name> <a> <b> <farads>
//! V <name> <plus> <minus> dc <volts>
//! V <name> <plus> <minus> pulse v_low=.. v_high=.. delay=.. rise=.. fall=.. width=.. period=..
//! ```
//!
//! `#` starts a comment. Nodes must be declared before use. Numbers are
//! written in shortest round-trip exponent form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Element, Netlist, PulseSpec};
use crate::devices::{MosfetParams, Polarity};
use crate::error::{Error, Result};

impl Netlist {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# pfdsim netlist v1\n");
        let ground = self.ground();
        for (i, name) in self.nodes().iter().enumerate() {
            let kw = if Some(super::NodeId(i)) == ground {
                "ground"
            } else {
                "node"
            };
            let _ = writeln!(out, "{kw} {name}");
        }
        for id in self.tied() {
            let _ = writeln!(out, "tie {}", self.node_name(id));
        }
        for (alias, id) in self.probes() {
            let _ = writeln!(out, "probe {alias} {}", self.node_name(*id));
        }
        for d in self.devices() {
            let n = |id| self.node_name(id);
            let line = match &d.element {
                Element::Mosfet {
                    drain,
                    gate,
                    source,
                    params: p,
                } => format!(
                    "M {} {} {} {} {} vth0={:e} kprime={:e} lambda={:e} w={:e} l={:e} cgs={:e} cgd={:e}",
                    d.name,
                    p.polarity.as_str(),
                    n(*drain),
                    n(*gate),
                    n(*source),
                    p.vth0,
                    p.kprime,
                    p.lambda,
                    p.w,
                    p.l,
                    p.cgs,
                    p.cgd
                ),
                Element::Resistor { a, b, ohms } => {
                    format!("R {} {} {} {:e}", d.name, n(*a), n(*b), ohms)
                }
                Element::Capacitor { a, b, farads } => {
                    format!("C {} {} {} {:e}", d.name, n(*a), n(*b), farads)
                }
                Element::DcSource { plus, minus, volts } => {
                    format!("V {} {} {} dc {:e}", d.name, n(*plus), n(*minus), volts)
                }
                Element::PulseSource { plus, minus, pulse: p } => format!(
                    "V {} {} {} pulse v_low={:e} v_high={:e} delay={:e} rise={:e} fall={:e} width={:e} period={:e}",
                    d.name,
                    n(*plus),
                    n(*minus),
                    p.v_low,
                    p.v_high,
                    p.delay,
                    p.rise,
                    p.fall,
                    p.width,
                    p.period
                ),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Netlist> {
        let mut net = Netlist::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            parse_line(&mut net, line).map_err(|e| Error::ParseLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(net)
    }
}

fn number(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

/// Parses `key=value` fields, requiring exactly `keys`.
fn fields<const K: usize>(tokens: &[&str], keys: [&str; K]) -> Result<[f64; K]> {
    let mut map = BTreeMap::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{t}`")))?;
        if map.insert(k, number(v)?).is_some() {
            return Err(Error::Parse(format!("repeated field `{k}`")));
        }
    }
    let mut out = [0.0; K];
    for (slot, key) in out.iter_mut().zip(keys) {
        *slot = map
            .remove(key)
            .ok_or_else(|| Error::Parse(format!("missing field `{key}`")))?;
    }
    if let Some(k) = map.keys().next() {
        return Err(Error::Parse(format!("unexpected field `{k}`")));
    }
    Ok(out)
}

fn arity(tokens: &[&str], n: usize) -> Result<()> {
    if tokens.len() == n {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "`{}` expects {} fields, got {}",
            tokens[0],
            n - 1,
            tokens.len() - 1
        )))
    }
}

fn parse_line(net: &mut Netlist, line: &str) -> Result<()> {
    let t: Vec<&str> = line.split_whitespace().collect();
    match t[0] {
        "ground" => {
            arity(&t, 2)?;
            net.add_ground(t[1])?;
        }
        "node" => {
            arity(&t, 2)?;
            net.add_node(t[1])?;
        }
        "tie" => {
            arity(&t, 2)?;
            net.tie(t[1])?;
        }
        "probe" => {
            arity(&t, 3)?;
            net.add_probe(t[1], t[2])?;
        }
        "M" => {
            arity(&t, 13)?;
            let polarity: Polarity = t[2].parse()?;
            let [vth0, kprime, lambda, w, l, cgs, cgd] = fields(
                &t[6..],
                ["vth0", "kprime", "lambda", "w", "l", "cgs", "cgd"],
            )?;
            let params = MosfetParams {
                polarity,
                vth0,
                kprime,
                lambda,
                w,
                l,
                cgs,
                cgd,
            };
            net.add_device(
                t[1],
                Element::Mosfet {
                    drain: t[3],
                    gate: t[4],
                    source: t[5],
                    params,
                },
            )?;
        }
        "R" => {
            arity(&t, 5)?;
            let ohms = number(t[4])?;
            net.add_device(
                t[1],
                Element::Resistor {
                    a: t[2],
                    b: t[3],
                    ohms,
                },
            )?;
        }
        "C" => {
            arity(&t, 5)?;
            let farads = number(t[4])?;
            net.add_device(
                t[1],
                Element::Capacitor {
                    a: t[2],
                    b: t[3],
                    farads,
                },
            )?;
        }
        "V" => {
            if t.len() < 5 {
                return Err(Error::Parse("source line too short".into()));
            }
            let element = match t[4] {
                "dc" => {
                    arity(&t, 6)?;
                    Element::DcSource {
                        plus: t[2],
                        minus: t[3],
                        volts: number(t[5])?,
                    }
                }
                "pulse" => {
                    arity(&t, 12)?;
                    let [v_low, v_high, delay, rise, fall, width, period] = fields(
                        &t[5..],
                        [
                            "v_low", "v_high", "delay", "rise", "fall", "width", "period",
                        ],
                    )?;
                    Element::PulseSource {
                        plus: t[2],
                        minus: t[3],
                        pulse: PulseSpec {
                            v_low,
                            v_high,
                            delay,
                            rise,
                            fall,
                            width,
                            period,
                        },
                    }
                }
                other => return Err(Error::Parse(format!("unknown source kind `{other}`"))),
            };
            net.add_device(t[1], element)?;
        }
        other => return Err(Error::Parse(format!("unknown line kind `{other}`"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Calibration;
    use crate::netlist::{build_pfd, PfdConfig, Stimulus};

    #[test]
    fn pfd_round_trips() {
        let cal = Calibration::default();
        let net = build_pfd(
            &cal,
            &PfdConfig::new(&cal),
            &Stimulus::clocks(cal.vdd, 1e9, 100e-12),
        );
        let text = net.to_text();
        let back = Netlist::from_text(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Netlist::from_text("ground 0\nR R1 0 a 1e3\n").unwrap_err();
        assert!(matches!(err, Error::ParseLine { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("unknown node"));

        let err = Netlist::from_text("ground 0\nnode a\nC C1 a 0 x\n").unwrap_err();
        assert!(err.to_string().contains("not a number"));

        let err = Netlist::from_text("ground 0\nnode a\nV V1 a 0 pulse v_low=0\n").unwrap_err();
        assert!(err.to_string().contains("expects"));

        let err = Netlist::from_text("bogus\n").unwrap_err();
        assert!(err.to_string().contains("unknown line kind"));
    }

    #[test]
    fn comments_and_tie() {
        let net = Netlist::from_text("# hdr\nground 0 # ref\nnode g\ntie g\n").unwrap();
        assert_eq!(net.tied().count(), 1);
        assert_eq!(net.validate().len(), 1, "g is still an island");
    }
}
