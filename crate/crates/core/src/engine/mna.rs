//! Modified nodal analysis: residual and Jacobian assembly.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. A source's branch current is the current it delivers
//! out of its `plus` terminal into the circuit.

use nalgebra::{DMatrix, DVector};

use crate::devices::{mosfet_eval, MosfetParams};
use crate::netlist::{Element, Netlist, NodeId, PulseSpec};

/// Unknown index of a node, `None` for ground.
pub(crate) type Slot = Option<usize>;

#[derive(Debug, Clone)]
pub(crate) struct Mosfet {
    pub d: Slot,
    pub g: Slot,
    pub s: Slot,
    pub params: MosfetParams,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch {
    pub a: Slot,
    pub b: Slot,
    pub value: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Waveshape {
    Dc(f64),
    Pulse(PulseSpec),
}

impl Waveshape {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Waveshape::Dc(v) => *v,
            Waveshape::Pulse(p) => p.value_at(t),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Source {
    pub name: String,
    pub plus: Slot,
    pub minus: Slot,
    pub shape: Waveshape,
}

/// Linearized capacitor: `i = geq * (va - vb) - ieq` flowing a -> b.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Companion {
    pub geq: f64,
    pub ieq: f64,
}

/// Netlist flattened into solver form. Gate capacitances of every MOSFET
/// become ordinary capacitors.
#[derive(Debug, Clone)]
pub(crate) struct Circuit {
    pub slots: Vec<Slot>,
    pub node_names: Vec<String>,
    pub n_nodes: usize,
    pub mosfets: Vec<Mosfet>,
    pub resistors: Vec<Branch>,
    pub capacitors: Vec<Branch>,
    pub sources: Vec<Source>,
}

/// Residual, Jacobian and per-node current scale at one solution point.
pub(crate) struct Assembly {
    pub jac: DMatrix<f64>,
    pub res: DVector<f64>,
    /// Largest single branch-current magnitude entering each node row.
    pub scale: Vec<f64>,
}

impl Circuit {
    pub fn compile(net: &Netlist) -> Circuit {
        let ground = net.ground();
        let mut slots = Vec::with_capacity(net.nodes().len());
        let mut node_names = Vec::new();
        for (i, name) in net.nodes().iter().enumerate() {
            if Some(NodeId(i)) == ground {
                slots.push(None);
            } else {
                slots.push(Some(node_names.len()));
                node_names.push(name.clone());
            }
        }
        let slot = |id: NodeId| slots[id.0];
        let mut c = Circuit {
            n_nodes: node_names.len(),
            node_names,
            slots: slots.clone(),
            mosfets: Vec::new(),
            resistors: Vec::new(),
            capacitors: Vec::new(),
            sources: Vec::new(),
        };
        for dev in net.devices() {
            match &dev.element {
                Element::Mosfet {
                    drain,
                    gate,
                    source,
                    params,
                } => {
                    let (d, g, s) = (slot(*drain), slot(*gate), slot(*source));
                    c.mosfets.push(Mosfet {
                        d,
                        g,
                        s,
                        params: *params,
                    });
                    if params.cgs > 0.0 {
                        c.capacitors.push(Branch {
                            a: g,
                            b: s,
                            value: params.cgs,
                        });
                    }
                    if params.cgd > 0.0 {
                        c.capacitors.push(Branch {
                            a: g,
                            b: d,
                            value: params.cgd,
                        });
                    }
                }
                Element::Resistor { a, b, ohms } => c.resistors.push(Branch {
                    a: slot(*a),
                    b: slot(*b),
                    value: 1.0 / ohms,
                }),
                Element::Capacitor { a, b, farads } => c.capacitors.push(Branch {
                    a: slot(*a),
                    b: slot(*b),
                    value: *farads,
                }),
                Element::DcSource { plus, minus, volts } => c.sources.push(Source {
                    name: dev.name.clone(),
                    plus: slot(*plus),
                    minus: slot(*minus),
                    shape: Waveshape::Dc(*volts),
                }),
                Element::PulseSource { plus, minus, pulse } => c.sources.push(Source {
                    name: dev.name.clone(),
                    plus: slot(*plus),
                    minus: slot(*minus),
                    shape: Waveshape::Pulse(*pulse),
                }),
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.n_nodes + self.sources.len()
    }

    pub fn breakpoints(&self, t_stop: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .sources
            .iter()
            .filter_map(|s| match s.shape {
                Waveshape::Pulse(p) => Some(p.breakpoints(t_stop)),
                Waveshape::Dc(_) => None,
            })
            .flatten()
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Assembles `F(x)` and `dF/dx` at time `t`.
    ///
    /// `companions` holds one entry per capacitor; pass all-zero companions
    /// for a DC solve (capacitors open).
    pub fn assemble(
        &self,
        x: &DVector<f64>,
        t: f64,
        gmin: f64,
        companions: &[Companion],
    ) -> Assembly {
        let n = self.dim();
        let mut jac = DMatrix::zeros(n, n);
        let mut res = DVector::zeros(n);
        let mut scale = vec![0.0; self.n_nodes];
        let v = |s: Slot| s.map_or(0.0, |i| x[i]);

        for i in 0..self.n_nodes {
            jac[(i, i)] += gmin;
            let cur = gmin * x[i];
            res[i] += cur;
            scale[i] = cur.abs();
        }

        let mut two_terminal = |a: Slot, b: Slot, g: f64, i: f64| {
            if let Some(a) = a {
                res[a] += i;
                jac[(a, a)] += g;
                scale[a] = scale[a].max(i.abs());
            }
            if let Some(b) = b {
                res[b] -= i;
                jac[(b, b)] += g;
                scale[b] = scale[b].max(i.abs());
            }
            if let (Some(a), Some(b)) = (a, b) {
                jac[(a, b)] -= g;
                jac[(b, a)] -= g;
            }
        };
        for r in &self.resistors {
            two_terminal(r.a, r.b, r.value, r.value * (v(r.a) - v(r.b)));
        }
        for (c, comp) in self.capacitors.iter().zip(companions) {
            let i = comp.geq * (v(c.a) - v(c.b)) - comp.ieq;
            two_terminal(c.a, c.b, comp.geq, i);
        }

        for m in &self.mosfets {
            let (vd, vg, vs) = (v(m.d), v(m.g), v(m.s));
            let (id, gm, gds) = mosfet_eval(&m.params, vg - vs, vd - vs);
            // Current id enters the drain and leaves the source.
            // d(id)/dvd = gds, d(id)/dvg = gm, d(id)/dvs = -(gm + gds).
            let partials = [(m.d, gds), (m.g, gm), (m.s, -(gm + gds))];
            if let Some(d) = m.d {
                res[d] += id;
                scale[d] = scale[d].max(id.abs());
                for (col, g) in partials {
                    if let Some(col) = col {
                        jac[(d, col)] += g;
                    }
                }
            }
            if let Some(s) = m.s {
                res[s] -= id;
                scale[s] = scale[s].max(id.abs());
                for (col, g) in partials {
                    if let Some(col) = col {
                        jac[(s, col)] -= g;
                    }
                }
            }
        }

        for (k, src) in self.sources.iter().enumerate() {
            let row = self.n_nodes + k;
            let ik = x[row];
            if let Some(p) = src.plus {
                res[p] -= ik;
                jac[(p, row)] -= 1.0;
                jac[(row, p)] += 1.0;
                scale[p] = scale[p].max(ik.abs());
            }
            if let Some(m) = src.minus {
                res[m] += ik;
                jac[(m, row)] += 1.0;
                jac[(row, m)] -= 1.0;
                scale[m] = scale[m].max(ik.abs());
            }
            res[row] = v(src.plus) - v(src.minus) - src.shape.at(t);
        }

        Assembly { jac, res, scale }
    }

    /// Current through each capacitor (a -> b) given its companion model.
    pub fn capacitor_currents(&self, x: &DVector<f64>, companions: &[Companion]) -> Vec<f64> {
        let v = |s: Slot| s.map_or(0.0, |i| x[i]);
        self.capacitors
            .iter()
            .zip(companions)
            .map(|(c, comp)| comp.geq * (v(c.a) - v(c.b)) - comp.ieq)
            .collect()
    }

    pub fn branch_voltage(&self, x: &DVector<f64>, c: &Branch) -> f64 {
        c.a.map_or(0.0, |i| x[i]) - c.b.map_or(0.0, |i| x[i])
    }
}
