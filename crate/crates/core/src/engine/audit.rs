//! Post-hoc KCL check of a finished transient run.
//!
//! Re-evaluates every node not tied to a voltage source from the recorded
//! voltages alone: device currents from the MOSFET model, capacitor currents
//! from the integrator's companion recursion. Shares no code with assembly.

use super::{Integrator, SimOptions, TransientResult};
use crate::devices::mosfet_current;
use crate::netlist::{Element, Netlist, NodeId};

/// Worst normalized residual `|sum| / (abstol_i + reltol * scale)` over all
/// recorded time points after the first, where `scale` is the largest
/// single current at the node.
pub fn audit_kcl(net: &Netlist, result: &TransientResult, opts: &SimOptions) -> f64 {
    let n_nodes = net.nodes().len();
    let mut skip = vec![false; n_nodes];
    if let Some(g) = net.ground() {
        skip[g.0] = true;
    }
    let mut caps: Vec<(usize, usize, f64)> = Vec::new();
    for d in net.devices() {
        match &d.element {
            Element::DcSource { plus, minus, .. } | Element::PulseSource { plus, minus, .. } => {
                skip[plus.0] = true;
                skip[minus.0] = true;
            }
            Element::Capacitor { a, b, farads } => caps.push((a.0, b.0, *farads)),
            Element::Mosfet {
                drain,
                gate,
                source,
                params,
            } => {
                caps.push((gate.0, source.0, params.cgs));
                caps.push((gate.0, drain.0, params.cgd));
            }
            Element::Resistor { .. } => {}
        }
    }
    let v = |node: usize, k: usize| result.node_voltages(NodeId(node))[k];
    let mut cap_i = vec![0.0; caps.len()];
    let mut sum = vec![0.0; n_nodes];
    let mut scale = vec![0.0f64; n_nodes];
    let mut worst = 0.0f64;
    for k in 1..result.time.len() {
        let h = result.time[k] - result.time[k - 1];
        for (j, (a, b, c)) in caps.iter().enumerate() {
            let (now, before) = (v(*a, k) - v(*b, k), v(*a, k - 1) - v(*b, k - 1));
            cap_i[j] = match opts.integrator {
                Integrator::BackwardEuler => c / h * (now - before),
                Integrator::Trapezoidal => {
                    let geq = 2.0 * c / h;
                    geq * now - (geq * before + cap_i[j])
                }
            };
        }
        sum.iter_mut().for_each(|s| *s = 0.0);
        scale.iter_mut().for_each(|s| *s = 0.0);
        let mut add = |node: usize, i: f64| {
            sum[node] += i;
            scale[node] = scale[node].max(i.abs());
        };
        for node in 0..n_nodes {
            add(node, opts.gmin * v(node, k));
        }
        for (j, (a, b, _)) in caps.iter().enumerate() {
            add(*a, cap_i[j]);
            add(*b, -cap_i[j]);
        }
        for d in net.devices() {
            match &d.element {
                Element::Mosfet {
                    drain,
                    gate,
                    source,
                    params,
                } => {
                    let vs = v(source.0, k);
                    let id = mosfet_current(params, v(gate.0, k) - vs, v(drain.0, k) - vs);
                    add(drain.0, id);
                    add(source.0, -id);
                }
                Element::Resistor { a, b, ohms } => {
                    let i = (v(a.0, k) - v(b.0, k)) / ohms;
                    add(a.0, i);
                    add(b.0, -i);
                }
                _ => {}
            }
        }
        for node in (0..n_nodes).filter(|n| !skip[*n]) {
            worst = worst.max(sum[node].abs() / (opts.abstol_i + opts.reltol * scale[node]));
        }
    }
    worst
}
