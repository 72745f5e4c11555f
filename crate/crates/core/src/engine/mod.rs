//! Numerical core: DC operating point and fixed-step transient analysis.
//!
//! Each time point is solved by damped Newton-Raphson on the MNA residual.
//! Capacitors (including MOSFET gate capacitances) are replaced by the
//! companion model of the selected integrator.

mod audit;
mod mna;

pub use audit::audit_kcl;

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{Netlist, NodeId};
use crate::waveform::Waveform;
use mna::{Circuit, Companion};

/// Name of the supply source whose current is reported as `i_vdd`.
pub const SUPPLY_SOURCE: &str = "VDD";

/// Largest per-node voltage change accepted in one Newton iteration.
const MAX_NEWTON_STEP: f64 = 0.3;
/// Number of times a failing step may be halved.
const MAX_STEP_HALVINGS: u32 = 8;
const GMIN_STEPPING_START: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    BackwardEuler,
    #[default]
    Trapezoidal,
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "be" | "backward_euler" | "backward-euler" => Ok(Integrator::BackwardEuler),
            "trap" | "trapezoidal" => Ok(Integrator::Trapezoidal),
            other => Err(Error::Parse(format!("unknown integrator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub reltol: f64,
    pub abstol_v: f64,
    pub abstol_i: f64,
    /// Base step of the fixed time grid (s).
    pub dt: f64,
    pub t_stop: f64,
    pub integrator: Integrator,
    pub max_newton_iters: usize,
    /// Conductance from every node to ground (S).
    pub gmin: f64,
}

impl SimOptions {
    /// Default base step for a stimulus whose fastest period is `period`.
    pub fn default_dt(period: f64) -> f64 {
        (0.5e-12f64).min(period / 2000.0)
    }

    pub fn new(t_stop: f64, dt: f64) -> Self {
        SimOptions {
            reltol: 1e-3,
            abstol_v: 1e-6,
            abstol_i: 1e-9,
            dt,
            t_stop,
            integrator: Integrator::Trapezoidal,
            max_newton_iters: 50,
            gmin: 1e-12,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(format!("dt must be > 0 (got {:e})", self.dt));
        }
        if !(self.t_stop > self.dt && self.t_stop.is_finite()) {
            v.push(format!("t_stop must exceed dt (got {:e})", self.t_stop));
        }
        if !(self.reltol > 0.0) {
            v.push("reltol must be > 0".into());
        }
        if !(self.abstol_v > 0.0) || !(self.abstol_i > 0.0) {
            v.push("absolute tolerances must be > 0".into());
        }
        if self.max_newton_iters < 1 {
            v.push("max_newton_iters must be >= 1".into());
        }
        if !(self.gmin >= 0.0) {
            v.push("gmin must be >= 0".into());
        }
        v
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

struct NewtonFailure {
    worst: usize,
    residual: f64,
}

struct Converged {
    x: DVector<f64>,
    kcl_ratio: f64,
    iterations: usize,
}

/// Per-row normalized KCL residual; returns (max ratio, argmax, raw residual).
fn kcl_ratio(circ: &Circuit, asm: &mna::Assembly, opts: &SimOptions) -> (f64, usize, f64) {
    let mut worst = (0.0, 0, 0.0);
    for i in 0..circ.n_nodes {
        let r = asm.res[i].abs() / (opts.abstol_i + opts.reltol * asm.scale[i]);
        if r > worst.0 || i == 0 {
            worst = (r, i, asm.res[i].abs());
        }
    }
    worst
}

fn newton(
    circ: &Circuit,
    mut x: DVector<f64>,
    t: f64,
    gmin: f64,
    companions: &[Companion],
    opts: &SimOptions,
) -> std::result::Result<Converged, NewtonFailure> {
    let n_nodes = circ.n_nodes;
    let mut last_step_ok = false;
    for iter in 0..=opts.max_newton_iters {
        let asm = circ.assemble(&x, t, gmin, companions);
        let (ratio, worst, residual) = kcl_ratio(circ, &asm, opts);
        let branches_ok = (n_nodes..circ.dim()).all(|r| asm.res[r].abs() <= opts.abstol_v);
        if last_step_ok && ratio <= 1.0 && branches_ok {
            return Ok(Converged {
                x,
                kcl_ratio: ratio,
                iterations: iter,
            });
        }
        if iter == opts.max_newton_iters {
            return Err(NewtonFailure { worst, residual });
        }
        let Some(delta) = asm.jac.lu().solve(&(-&asm.res)) else {
            return Err(NewtonFailure { worst, residual });
        };
        last_step_ok = true;
        for i in 0..circ.dim() {
            let mut d = delta[i];
            if !d.is_finite() {
                return Err(NewtonFailure { worst, residual });
            }
            if i < n_nodes {
                d = d.clamp(-MAX_NEWTON_STEP, MAX_NEWTON_STEP);
                if d.abs() > opts.abstol_v + opts.reltol * x[i].abs().max((x[i] + d).abs()) {
                    last_step_ok = false;
                }
            }
            x[i] += d;
        }
    }
    unreachable!("loop returns on its final iteration")
}

/// DC solve with plain Newton, then gmin stepping on failure.
fn dc_solve(circ: &Circuit, opts: &SimOptions, t: f64) -> Result<DVector<f64>> {
    let open = vec![Companion::default(); circ.capacitors.len()];
    let x0 = DVector::zeros(circ.dim());
    if let Ok(c) = newton(circ, x0.clone(), t, opts.gmin, &open, opts) {
        return Ok(c.x);
    }
    let mut x = x0;
    let mut g = GMIN_STEPPING_START.max(opts.gmin);
    loop {
        match newton(circ, x.clone(), t, g, &open, opts) {
            Ok(c) => x = c.x,
            Err(f) => {
                return Err(Error::DcNonConvergence {
                    node: circ.node_names[f.worst].clone(),
                    residual: f.residual,
                })
            }
        }
        if g <= opts.gmin {
            return Ok(x);
        }
        g /= 10.0;
        if g < opts.gmin || g < 1e-15 {
            g = opts.gmin;
        }
    }
}

/// Solved DC operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub node_names: Vec<String>,
    /// Voltage of every node, indexed by [`NodeId`] (ground is 0).
    pub voltages: Vec<f64>,
    pub source_names: Vec<String>,
    /// Current delivered by each voltage source out of its `plus` terminal.
    pub source_currents: Vec<f64>,
}

impl OperatingPoint {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        self.node_names
            .iter()
            .position(|n| n == node)
            .map(|i| self.voltages[i])
    }
}

fn unpack(circ: &Circuit, x: &DVector<f64>) -> Vec<f64> {
    circ.slots.iter().map(|s| s.map_or(0.0, |i| x[i])).collect()
}

pub fn dc_operating_point(net: &Netlist, opts: &SimOptions) -> Result<OperatingPoint> {
    net.ensure_valid()?;
    // t_stop and dt are irrelevant to a DC solve.
    SimOptions {
        dt: 1.0,
        t_stop: 2.0,
        ..*opts
    }
    .validate()?;
    let circ = Circuit::compile(net);
    let x = dc_solve(&circ, opts, 0.0)?;
    Ok(OperatingPoint {
        node_names: net.nodes().to_vec(),
        voltages: unpack(&circ, &x),
        source_names: circ.sources.iter().map(|s| s.name.clone()).collect(),
        source_currents: (0..circ.sources.len())
            .map(|k| x[circ.n_nodes + k])
            .collect(),
    })
}

/// Sampled output of a transient run. Every node is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub time: Vec<f64>,
    node_names: Vec<String>,
    voltages: Vec<Vec<f64>>,
    probes: Vec<(String, NodeId)>,
    source_names: Vec<String>,
    source_currents: Vec<Vec<f64>>,
    /// Normalized KCL residual (residual / tolerance) at each time point.
    pub kcl_ratio: Vec<f64>,
    pub newton_iterations: usize,
}

impl TransientResult {
    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn probes(&self) -> &[(String, NodeId)] {
        &self.probes
    }

    /// Voltage waveform by probe alias or node name.
    pub fn waveform(&self, name: &str) -> Result<Waveform<'_>> {
        let id = self
            .probes
            .iter()
            .find(|(a, _)| a == name)
            .map(|(_, n)| n.0)
            .or_else(|| self.node_names.iter().position(|n| n == name))
            .ok_or_else(|| Error::UnknownProbe(name.to_string()))?;
        Ok(Waveform::new(&self.time, &self.voltages[id]))
    }

    pub fn node_voltages(&self, id: NodeId) -> &[f64] {
        &self.voltages[id.0]
    }

    pub fn source_current(&self, name: &str) -> Result<Waveform<'_>> {
        let k = self
            .source_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::NoSupply(name.to_string()))?;
        Ok(Waveform::new(&self.time, &self.source_currents[k]))
    }

    /// Current delivered by the `VDD` source (positive into the circuit).
    pub fn supply_current(&self) -> Result<Waveform<'_>> {
        self.source_current(SUPPLY_SOURCE)
    }

    /// CSV with header `t,<probes...>,i_vdd`. Values use shortest
    /// round-trip formatting, so the text is exact and reproducible.
    pub fn to_csv(&self) -> String {
        let supply = self.source_names.iter().position(|n| n == SUPPLY_SOURCE);
        let mut out = String::from("t");
        for (alias, _) in &self.probes {
            out.push(',');
            out.push_str(alias);
        }
        if supply.is_some() {
            out.push_str(",i_vdd");
        }
        out.push('\n');
        for k in 0..self.time.len() {
            let _ = write!(out, "{:e}", self.time[k]);
            for (_, id) in &self.probes {
                let _ = write!(out, ",{:e}", self.voltages[id.0][k]);
            }
            if let Some(s) = supply {
                let _ = write!(out, ",{:e}", self.source_currents[s][k]);
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed grid of multiples of `dt` merged with source breakpoints.
/// Grid points closer than `dt / 1000` to a breakpoint yield to it.
fn time_grid(dt: f64, t_stop: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut pts: Vec<(f64, bool)> = Vec::new();
    let mut k = 1u64;
    loop {
        let t = k as f64 * dt;
        if t >= t_stop - 1e-6 * dt {
            break;
        }
        pts.push((t, false));
        k += 1;
    }
    pts.push((t_stop, true));
    pts.extend(
        breakpoints
            .iter()
            .filter(|&&b| b > 0.0 && b < t_stop)
            .map(|&b| (b, true)),
    );
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let gap = 1e-3 * dt;
    let mut out: Vec<(f64, bool)> = Vec::with_capacity(pts.len());
    for (t, bp) in pts {
        if t < gap {
            continue;
        }
        match out.last_mut() {
            Some(last) if t - last.0 < gap => {
                if bp && !last.1 {
                    *last = (t, bp);
                }
            }
            _ => out.push((t, bp)),
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}

struct Stepper<'a> {
    circ: &'a Circuit,
    opts: &'a SimOptions,
    x: DVector<f64>,
    cap_v: Vec<f64>,
    cap_i: Vec<f64>,
    result: TransientResult,
}

impl Stepper<'_> {
    fn record(&mut self, t: f64, kcl: f64) {
        let x = &self.x;
        self.result.time.push(t);
        for (slot, series) in self.circ.slots.iter().zip(&mut self.result.voltages) {
            series.push(slot.map_or(0.0, |i| x[i]));
        }
        for (k, series) in self.result.source_currents.iter_mut().enumerate() {
            series.push(x[self.circ.n_nodes + k]);
        }
        self.result.kcl_ratio.push(kcl);
    }

    fn companions(&self, h: f64) -> Vec<Companion> {
        self.circ
            .capacitors
            .iter()
            .enumerate()
            .map(|(k, c)| match self.opts.integrator {
                Integrator::BackwardEuler => {
                    let geq = c.value / h;
                    Companion {
                        geq,
                        ieq: geq * self.cap_v[k],
                    }
                }
                Integrator::Trapezoidal => {
                    let geq = 2.0 * c.value / h;
                    Companion {
                        geq,
                        ieq: geq * self.cap_v[k] + self.cap_i[k],
                    }
                }
            })
            .collect()
    }

    fn try_step(&mut self, t_to: f64, h: f64) -> std::result::Result<(), NewtonFailure> {
        let comps = self.companions(h);
        let conv = newton(
            self.circ,
            self.x.clone(),
            t_to,
            self.opts.gmin,
            &comps,
            self.opts,
        )?;
        self.x = conv.x;
        self.cap_i = self.circ.capacitor_currents(&self.x, &comps);
        for (k, c) in self.circ.capacitors.iter().enumerate() {
            self.cap_v[k] = self.circ.branch_voltage(&self.x, c);
        }
        self.result.newton_iterations += conv.iterations;
        self.record(t_to, conv.kcl_ratio);
        Ok(())
    }

    fn advance(&mut self, t_from: f64, t_to: f64, depth: u32) -> Result<()> {
        match self.try_step(t_to, t_to - t_from) {
            Ok(()) => Ok(()),
            Err(f) if depth >= MAX_STEP_HALVINGS => Err(Error::TransientNonConvergence {
                time: t_to,
                node: self.circ.node_names[f.worst].clone(),
            }),
            Err(_) => {
                let mid = 0.5 * (t_from + t_to);
                self.advance(t_from, mid, depth + 1)?;
                self.advance(mid, t_to, depth + 1)
            }
        }
    }
}

/// Transient analysis starting from the DC operating point at `t = 0`.
pub fn transient(net: &Netlist, opts: &SimOptions) -> Result<TransientResult> {
    run_transient(net, opts, None)
}

/// Transient analysis from explicit initial node voltages (unlisted nodes
/// start at 0 V, capacitor currents at 0 A). No DC solve is performed.
pub fn transient_with_ic(
    net: &Netlist,
    opts: &SimOptions,
    ic: &[(&str, f64)],
) -> Result<TransientResult> {
    run_transient(net, opts, Some(ic))
}

fn run_transient(
    net: &Netlist,
    opts: &SimOptions,
    ic: Option<&[(&str, f64)]>,
) -> Result<TransientResult> {
    net.ensure_valid()?;
    opts.validate()?;
    let circ = Circuit::compile(net);

    let x = match ic {
        None => dc_solve(&circ, opts, 0.0)?,
        Some(ic) => {
            let mut x = DVector::zeros(circ.dim());
            for (name, v) in ic {
                let id = net
                    .resolve(name)
                    .ok_or_else(|| Error::UnknownNode(name.to_string()))?;
                if let Some(i) = circ.slots[id.0] {
                    x[i] = *v;
                }
            }
            x
        }
    };

    let grid = time_grid(opts.dt, opts.t_stop, &circ.breakpoints(opts.t_stop));
    let cap_v = circ
        .capacitors
        .iter()
        .map(|c| circ.branch_voltage(&x, c))
        .collect();
    let n_caps = circ.capacitors.len();
    let result = TransientResult {
        time: Vec::with_capacity(grid.len() + 1),
        node_names: net.nodes().to_vec(),
        voltages: vec![Vec::with_capacity(grid.len() + 1); circ.slots.len()],
        probes: net.probes().to_vec(),
        source_names: circ.sources.iter().map(|s| s.name.clone()).collect(),
        source_currents: vec![Vec::with_capacity(grid.len() + 1); circ.sources.len()],
        kcl_ratio: Vec::with_capacity(grid.len() + 1),
        newton_iterations: 0,
    };
    let mut stepper = Stepper {
        circ: &circ,
        opts,
        x,
        cap_v,
        cap_i: vec![0.0; n_caps],
        result,
    };
    let initial_kcl = {
        let open = vec![Companion::default(); n_caps];
        let asm = circ.assemble(&stepper.x, 0.0, opts.gmin, &open);
        kcl_ratio(&circ, &asm, opts).0
    };
    stepper.record(0.0, initial_kcl);

    let mut t = 0.0;
    for &t_next in &grid {
        stepper.advance(t, t_next, 0)?;
        t = t_next;
    }
    Ok(stepper.result)
}

/// Current delivered by the supply source of a transient result.
pub fn supply_current(result: &TransientResult) -> Result<Waveform<'_>> {
    result.supply_current()
}
