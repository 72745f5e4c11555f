//! Circuit graph: named nodes, a single ground, and an ordered device list.

mod pfd;
mod pulse;
mod text;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::devices::MosfetParams;
use crate::error::{Error, Result};

pub use pfd::{build_pfd, OutputStage, PfdConfig, Stimulus, PFD_PROBES};
pub use pulse::PulseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// One circuit element, generic over how terminals are referenced
/// (`&str` names when adding, [`NodeId`] once stored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Element<N> {
    Mosfet {
        drain: N,
        gate: N,
        source: N,
        params: MosfetParams,
    },
    Resistor {
        a: N,
        b: N,
        ohms: f64,
    },
    Capacitor {
        a: N,
        b: N,
        farads: f64,
    },
    DcSource {
        plus: N,
        minus: N,
        volts: f64,
    },
    PulseSource {
        plus: N,
        minus: N,
        pulse: PulseSpec,
    },
}

impl<N: Copy> Element<N> {
    pub fn terminals(&self) -> Vec<N> {
        match *self {
            Element::Mosfet {
                drain,
                gate,
                source,
                ..
            } => vec![drain, gate, source],
            Element::Resistor { a, b, .. } | Element::Capacitor { a, b, .. } => vec![a, b],
            Element::DcSource { plus, minus, .. } | Element::PulseSource { plus, minus, .. } => {
                vec![plus, minus]
            }
        }
    }

    fn map<M>(&self, mut f: impl FnMut(N) -> Result<M>) -> Result<Element<M>> {
        Ok(match self {
            Element::Mosfet {
                drain,
                gate,
                source,
                params,
            } => Element::Mosfet {
                drain: f(*drain)?,
                gate: f(*gate)?,
                source: f(*source)?,
                params: *params,
            },
            Element::Resistor { a, b, ohms } => Element::Resistor {
                a: f(*a)?,
                b: f(*b)?,
                ohms: *ohms,
            },
            Element::Capacitor { a, b, farads } => Element::Capacitor {
                a: f(*a)?,
                b: f(*b)?,
                farads: *farads,
            },
            Element::DcSource { plus, minus, volts } => Element::DcSource {
                plus: f(*plus)?,
                minus: f(*minus)?,
                volts: *volts,
            },
            Element::PulseSource { plus, minus, pulse } => Element::PulseSource {
                plus: f(*plus)?,
                minus: f(*minus)?,
                pulse: *pulse,
            },
        })
    }

    pub fn is_source(&self) -> bool {
        matches!(self, Element::DcSource { .. } | Element::PulseSource { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub name: String,
    pub element: Element<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    nodes: Vec<String>,
    ground: Option<NodeId>,
    devices: Vec<Device>,
    probes: Vec<(String, NodeId)>,
    tied: BTreeSet<NodeId>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares the reference node.
    pub fn add_ground(&mut self, name: &str) -> Result<NodeId> {
        if self.ground.is_some() {
            return Err(Error::DuplicateIdentifier(format!("ground ({name})")));
        }
        let id = self.add_node(name)?;
        self.ground = Some(id);
        Ok(id)
    }

    pub fn add_node(&mut self, name: &str) -> Result<NodeId> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("bad node name `{name}`")));
        }
        if self.node(name).is_some() {
            return Err(Error::DuplicateIdentifier(name.to_string()));
        }
        self.nodes.push(name.to_string());
        Ok(NodeId(self.nodes.len() - 1))
    }

    pub fn add_device(&mut self, name: &str, element: Element<&str>) -> Result<usize> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("bad device name `{name}`")));
        }
        if self.devices.iter().any(|d| d.name == name) {
            return Err(Error::DuplicateIdentifier(name.to_string()));
        }
        let element = element.map(|n| self.node(n).ok_or_else(|| Error::UnknownNode(n.into())))?;
        self.devices.push(Device {
            name: name.to_string(),
            element,
        });
        Ok(self.devices.len() - 1)
    }

    /// Registers `alias` as a readable name for `node`.
    pub fn add_probe(&mut self, alias: &str, node: &str) -> Result<()> {
        let id = self
            .node(node)
            .ok_or_else(|| Error::UnknownNode(node.into()))?;
        if self.probes.iter().any(|(a, _)| a == alias) {
            return Err(Error::DuplicateIdentifier(alias.to_string()));
        }
        self.probes.push((alias.to_string(), id));
        Ok(())
    }

    /// Marks a node as intentionally driven (exempt from floating-gate checks).
    pub fn tie(&mut self, node: &str) -> Result<()> {
        let id = self
            .node(node)
            .ok_or_else(|| Error::UnknownNode(node.into()))?;
        self.tied.insert(id);
        Ok(())
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn ground(&self) -> Option<NodeId> {
        self.ground
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn device(&self, name: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.name == name)
    }

    pub fn probes(&self) -> &[(String, NodeId)] {
        &self.probes
    }

    pub fn tied(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.tied.iter().copied()
    }

    /// Resolves a probe alias, falling back to a plain node name.
    pub fn resolve(&self, name: &str) -> Option<NodeId> {
        self.probes
            .iter()
            .find(|(a, _)| a == name)
            .map(|(_, n)| *n)
            .or_else(|| self.node(name))
    }

    pub fn mosfet_count(&self) -> usize {
        self.count(|e| matches!(e, Element::Mosfet { .. }))
    }

    pub fn count(&self, pred: impl Fn(&Element<NodeId>) -> bool) -> usize {
        self.devices.iter().filter(|d| pred(&d.element)).count()
    }

    /// Every invariant violation; an empty list means the netlist is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(ground) = self.ground else {
            out.push("no ground node".to_string());
            return out;
        };

        for d in &self.devices {
            match &d.element {
                Element::Resistor { ohms, .. } if !(*ohms > 0.0 && ohms.is_finite()) => {
                    out.push(format!("{}: resistance must be > 0", d.name))
                }
                Element::Capacitor { farads, .. } if !(*farads > 0.0 && farads.is_finite()) => {
                    out.push(format!("{}: capacitance must be > 0", d.name))
                }
                Element::Mosfet { params, .. } => out.extend(
                    params
                        .violations()
                        .into_iter()
                        .map(|m| format!("{}: {m}", d.name)),
                ),
                Element::PulseSource { pulse, .. } => out.extend(
                    pulse
                        .violations()
                        .into_iter()
                        .map(|m| format!("{}: {m}", d.name)),
                ),
                Element::DcSource { volts, .. } if !volts.is_finite() => {
                    out.push(format!("{}: non-finite voltage", d.name))
                }
                _ => {}
            }
        }

        // Connectivity through any device terminal.
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for d in &self.devices {
            let t = d.element.terminals();
            for &a in &t {
                for &b in &t {
                    if a != b {
                        adj[a.0].push(b.0);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([ground.0]);
        seen[ground.0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        for (i, name) in self.nodes.iter().enumerate() {
            if !seen[i] {
                out.push(format!("node `{name}` is not connected to ground"));
            }
        }

        let mut driven: BTreeSet<NodeId> = self.tied.clone();
        driven.insert(ground);
        for d in &self.devices {
            match d.element {
                Element::Mosfet { drain, source, .. } => {
                    driven.insert(drain);
                    driven.insert(source);
                }
                Element::Resistor { a, b, .. } => {
                    driven.insert(a);
                    driven.insert(b);
                }
                Element::DcSource { plus, minus, .. }
                | Element::PulseSource { plus, minus, .. } => {
                    driven.insert(plus);
                    driven.insert(minus);
                }
                Element::Capacitor { .. } => {}
            }
        }
        let mut floating = BTreeSet::new();
        for d in &self.devices {
            if let Element::Mosfet { gate, .. } = d.element {
                if !driven.contains(&gate) {
                    floating.insert(gate);
                }
            }
        }
        for g in floating {
            out.push(format!("floating gate node `{}`", self.node_name(g)));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetlist(v))
        }
    }

    /// Appends a static CMOS 2-input NOR: two series PMOS from `vdd` to
    /// `out` and two parallel NMOS from `out` to `gnd`.
    #[allow(clippy::too_many_arguments)]
    pub fn add_nor2(
        &mut self,
        prefix: &str,
        out: &str,
        in1: &str,
        in2: &str,
        vdd: &str,
        gnd: &str,
        p_params: MosfetParams,
        n_params: MosfetParams,
    ) -> Result<()> {
        let mid = format!("{prefix}_p");
        self.add_node(&mid)?;
        self.add_device(
            &format!("{prefix}_MP1"),
            Element::Mosfet {
                drain: &mid,
                gate: in1,
                source: vdd,
                params: p_params,
            },
        )?;
        self.add_device(
            &format!("{prefix}_MP2"),
            Element::Mosfet {
                drain: out,
                gate: in2,
                source: &mid,
                params: p_params,
            },
        )?;
        self.add_device(
            &format!("{prefix}_MN1"),
            Element::Mosfet {
                drain: out,
                gate: in1,
                source: gnd,
                params: n_params,
            },
        )?;
        self.add_device(
            &format!("{prefix}_MN2"),
            Element::Mosfet {
                drain: out,
                gate: in2,
                source: gnd,
                params: n_params,
            },
        )?;
        Ok(())
    }
}
