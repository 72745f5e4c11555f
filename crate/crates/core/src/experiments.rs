//! Characterization experiments on the reference PFD: offset runs, dead-zone
//! and f_max searches, width and corner sweeps, the half-period test and the
//! unequal-frequency test.
//!
//! Every simulation uses a fixed time grid, so results are bit-reproducible.
//! Sweeps run in parallel on the current rayon pool and keep input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Calibration;
use crate::devices::{CornerName, CornerSet};
use crate::engine::{transient, Integrator, SimOptions, TransientResult};
use crate::error::{Error, Result};
use crate::measure::{
    average_power, classify_decision, detect_pulses, high_time, mutual_exclusion_overlap,
    rise_time, Decision, Thresholds,
};
use crate::netlist::{build_pfd, Netlist, OutputStage, PfdConfig, Stimulus};

/// Periods simulated for offset metrics.
pub const DEFAULT_PERIODS: usize = 10;
/// Leading periods excluded from every analysis window.
pub const SETTLE_PERIODS: usize = 2;
pub const HALF_PERIOD_PERIODS: usize = 20;
/// Periods whose decisions must agree in the half-period and f_max checks.
pub const STABLE_PERIODS: usize = 10;

pub const DEFAULT_FREQUENCY: f64 = 1e9;
pub const DEFAULT_OFFSET: f64 = 100e-12;
pub const DEAD_ZONE_TOL: f64 = 0.5e-12;
pub const DEAD_ZONE_BRACKET: (f64, f64) = (0.0, 200e-12);
pub const FMAX_OFFSET_FRACTION: f64 = 0.1;
pub const FMAX_TOL_REL: f64 = 0.01;
pub const FMAX_BRACKET: (f64, f64) = (0.5e9, 20e9);
pub const WIDTH_SWEEP: (f64, f64, usize) = (120e-9, 310e-9, 5);

/// Extra points probed inside the "correct" side of a bisection bracket to
/// detect a non-monotone predicate.
const MONOTONE_PROBES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub width: f64,
    pub length: f64,
    pub corner: CornerSet,
    pub frequency: f64,
    /// Signed input offset; positive means A leads B.
    pub offset: f64,
}

impl DesignPoint {
    /// 260 nm / 100 nm at TT, 1 GHz, A leading by 100 ps.
    pub fn default_for(cal: &Calibration) -> Self {
        DesignPoint {
            width: PfdConfig::DEFAULT_WIDTH,
            length: PfdConfig::DEFAULT_LENGTH,
            corner: cal.corner(CornerName::Tt),
            frequency: DEFAULT_FREQUENCY,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn with_offset(self, offset: f64) -> Self {
        DesignPoint { offset, ..self }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.width) {
            v.push(format!("width must be > 0 (got {:e})", self.width));
        }
        if !positive(self.length) {
            v.push(format!("length must be > 0 (got {:e})", self.length));
        }
        if !positive(self.frequency) {
            v.push(format!("frequency must be > 0 (got {:e})", self.frequency));
        } else if !(self.offset.abs() < self.period()) {
            v.push(format!(
                "|offset| must be below the period {:e} (got {:e})",
                self.period(),
                self.offset
            ));
        }
        v.extend(self.corner.violations());
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

/// Calibration and solver settings shared by every run of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Bench {
    pub cal: Calibration,
    pub output_stage: OutputStage,
    pub integrator: Integrator,
    /// Overrides the default base step when set.
    pub dt: Option<f64>,
    /// Overrides the experiment's simulated duration when set.
    pub t_stop: Option<f64>,
}

impl Bench {
    pub fn new(cal: Calibration) -> Self {
        Bench {
            cal,
            output_stage: OutputStage::default(),
            integrator: Integrator::default(),
            dt: None,
            t_stop: None,
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds::for_vdd(self.cal.vdd)
    }

    pub fn pfd_config(&self, point: &DesignPoint) -> PfdConfig {
        PfdConfig {
            width: point.width,
            length: point.length,
            corner: point.corner,
            load_cap: self.cal.load_cap,
            output_stage: self.output_stage,
        }
    }

    pub fn netlist(&self, point: &DesignPoint, stim: &Stimulus) -> Netlist {
        build_pfd(&self.cal, &self.pfd_config(point), stim)
    }

    pub fn options(&self, t_stop: f64, period: f64) -> SimOptions {
        let mut opts = SimOptions::new(
            self.t_stop.unwrap_or(t_stop),
            self.dt.unwrap_or_else(|| SimOptions::default_dt(period)),
        );
        opts.integrator = self.integrator;
        opts
    }

    pub fn validate(&self) -> Result<()> {
        self.cal.validate()?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "dt must be > 0 (got {dt:e})"
                )));
            }
        }
        if let Some(t) = self.t_stop {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "t_stop must be > 0 (got {t:e})"
                )));
            }
        }
        Ok(())
    }

    /// Simulates equal-frequency clocks at `point` for `n_periods`.
    pub fn simulate(&self, point: &DesignPoint, n_periods: usize) -> Result<TransientResult> {
        point.validate()?;
        let stim = Stimulus::clocks(self.cal.vdd, point.frequency, point.offset);
        let net = self.netlist(point, &stim);
        let t = point.period();
        transient(&net, &self.options(n_periods as f64 * t, t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub point: DesignPoint,
    pub decision: Decision,
    pub dead_zone: Option<f64>,
    pub f_max: Option<f64>,
    pub avg_power: f64,
    /// 10-90% rise time of the asserted output (UP for LeadA, DN for LeadB).
    pub up_rise_time: Option<f64>,
    pub mutual_exclusion_overlap: f64,
}

/// Measures decision, power, rise time and overlap on `[t0, t1]`.
pub fn analyze(
    bench: &Bench,
    point: &DesignPoint,
    result: &TransientResult,
    t0: f64,
    t1: f64,
) -> Result<ExperimentReport> {
    let th = bench.thresholds();
    let up = result.waveform("UP")?.window(t0, t1);
    let dn = result.waveform("DN")?.window(t0, t1);
    let decision = classify_decision(&up, &dn, &th);
    let asserted = match decision {
        Decision::LeadB => &dn,
        _ => &up,
    };
    let up_rise_time = rise_time(asserted, 0.0, bench.cal.vdd).ok();
    let avg_power = average_power(&result.supply_current()?, bench.cal.vdd, t0, t1)?;
    Ok(ExperimentReport {
        point: *point,
        decision,
        dead_zone: None,
        f_max: None,
        avg_power,
        up_rise_time,
        mutual_exclusion_overlap: mutual_exclusion_overlap(&up, &dn, th.detect),
    })
}

fn analysis_window(period: f64, n_periods: usize) -> Result<(f64, f64)> {
    if n_periods <= SETTLE_PERIODS {
        return Err(Error::WindowTooShort);
    }
    Ok((SETTLE_PERIODS as f64 * period, n_periods as f64 * period))
}

/// Simulates `point` and measures it over all periods after the settling ones.
pub fn run_offset_experiment_with_waves(
    bench: &Bench,
    point: &DesignPoint,
    n_periods: usize,
) -> Result<(ExperimentReport, TransientResult)> {
    let (t0, t1) = analysis_window(point.period(), n_periods)?;
    let result = bench.simulate(point, n_periods)?;
    let t1 = t1.min(*result.time.last().unwrap_or(&t1));
    if !(t1 > t0) {
        return Err(Error::WindowTooShort);
    }
    let report = analyze(bench, point, &result, t0, t1)?;
    Ok((report, result))
}

pub fn run_offset_experiment(
    bench: &Bench,
    point: &DesignPoint,
    n_periods: usize,
) -> Result<ExperimentReport> {
    run_offset_experiment_with_waves(bench, point, n_periods).map(|(r, _)| r)
}

/// Decision in each whole period `k` in `first..last`, window `[kT, (k+1)T]`.
pub fn period_decisions(
    result: &TransientResult,
    th: &Thresholds,
    period: f64,
    first: usize,
    last: usize,
) -> Result<Vec<Decision>> {
    let up = result.waveform("UP")?;
    let dn = result.waveform("DN")?;
    Ok((first..last)
        .map(|k| {
            let (t0, t1) = (k as f64 * period, (k + 1) as f64 * period);
            classify_decision(&up.window(t0, t1), &dn.window(t0, t1), th)
        })
        .collect())
}

/// Result of a threshold search, with the number of simulations it took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub value: f64,
    pub evaluations: usize,
    /// True when the monotonicity check failed and a linear scan was used.
    pub linear_fallback: bool,
}

/// Smallest `x` in `[lo, hi]` with `ok(x)`, assuming `ok` switches from false
/// to true once. `refine(lo, hi)` is the midpoint rule, `done(lo, hi)` the
/// stopping rule and `scan` the linear-scan step (downward from `hi`).
fn threshold_search(
    lo: f64,
    hi: f64,
    ok: &dyn Fn(f64) -> Result<bool>,
    refine: &dyn Fn(f64, f64) -> f64,
    done: &dyn Fn(f64, f64) -> bool,
    scan_down: &dyn Fn(f64) -> f64,
) -> Result<Option<SearchResult>> {
    let mut evaluations = 1;
    if !ok(hi)? {
        return Ok(None);
    }
    evaluations += 1;
    if ok(lo)? {
        return Ok(Some(SearchResult {
            value: lo,
            evaluations,
            linear_fallback: false,
        }));
    }
    let (mut a, mut b) = (lo, hi);
    while !done(a, b) {
        let mid = refine(a, b);
        evaluations += 1;
        if ok(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    let mut monotone = true;
    for k in 1..=MONOTONE_PROBES {
        let x = b + (hi - b) * k as f64 / (MONOTONE_PROBES + 1) as f64;
        evaluations += 1;
        if !ok(x)? {
            monotone = false;
            break;
        }
    }
    if monotone {
        return Ok(Some(SearchResult {
            value: b,
            evaluations,
            linear_fallback: false,
        }));
    }
    let mut best = hi;
    let mut x = scan_down(hi);
    while x >= lo {
        evaluations += 1;
        if !ok(x)? {
            break;
        }
        best = x;
        x = scan_down(x);
    }
    Ok(Some(SearchResult {
        value: best,
        evaluations,
        linear_fallback: true,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadZone {
    /// Larger of the two polarities.
    pub value: f64,
    pub lead_a: SearchResult,
    pub lead_b: SearchResult,
}

/// Smallest offset magnitude that yields the correct full-swing decision,
/// searched separately for A leading and B leading.
pub fn measure_dead_zone(
    bench: &Bench,
    point: &DesignPoint,
    search_lo: f64,
    search_hi: f64,
    tol: f64,
) -> Result<DeadZone> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0 (got {tol:e})"
        )));
    }
    if !(search_lo >= 0.0 && search_hi > search_lo && search_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "search bracket must satisfy 0 <= lo < hi (got [{search_lo:e}, {search_hi:e}])"
        )));
    }
    point.with_offset(search_hi).validate()?;
    let search = |sign: f64| -> Result<SearchResult> {
        let expected = Decision::expected_for(sign);
        let ok = |delta: f64| -> Result<bool> {
            let r =
                run_offset_experiment(bench, &point.with_offset(sign * delta), DEFAULT_PERIODS)?;
            Ok(r.decision == expected)
        };
        threshold_search(
            search_lo,
            search_hi,
            &ok,
            &|a, b| 0.5 * (a + b),
            &|a, b| b - a <= tol,
            &|x| x - tol,
        )?
        .ok_or_else(|| {
            Error::NoLockWindow(format!(
                "decision incorrect at offset {:e} s",
                sign * search_hi
            ))
        })
    };
    let (lead_a, lead_b) = rayon::join(|| search(1.0), || search(-1.0));
    let (lead_a, lead_b) = (lead_a?, lead_b?);
    Ok(DeadZone {
        value: lead_a.value.max(lead_b.value),
        lead_a,
        lead_b,
    })
}

/// True when both polarities at `frequency` give the correct decision in
/// each of the last `STABLE_PERIODS` periods.
fn correct_at_frequency(
    bench: &Bench,
    point: &DesignPoint,
    frequency: f64,
    offset_fraction: f64,
) -> Result<bool> {
    let n = SETTLE_PERIODS + STABLE_PERIODS;
    let th = bench.thresholds();
    let check = |sign: f64| -> Result<bool> {
        let p = DesignPoint {
            frequency,
            offset: sign * offset_fraction / frequency,
            ..*point
        };
        let result = bench.simulate(&p, n)?;
        let expected = Decision::expected_for(sign);
        Ok(
            period_decisions(&result, &th, p.period(), SETTLE_PERIODS, n)?
                .iter()
                .all(|d| *d == expected),
        )
    };
    let (a, b) = rayon::join(|| check(1.0), || check(-1.0));
    Ok(a? && b?)
}

/// Largest frequency at which a `offset_fraction / f` offset is resolved
/// correctly every period. Bisection is done on `ln f`.
pub fn measure_fmax(
    bench: &Bench,
    point: &DesignPoint,
    offset_fraction: f64,
    f_lo: f64,
    f_hi: f64,
    tol_rel: f64,
) -> Result<SearchResult> {
    if !(offset_fraction > 0.0 && offset_fraction < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "offset fraction must lie in (0, 0.5) (got {offset_fraction})"
        )));
    }
    if !(f_lo > 0.0 && f_hi > f_lo && f_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency bracket must satisfy 0 < lo < hi (got [{f_lo:e}, {f_hi:e}])"
        )));
    }
    if !(tol_rel > 0.0 && tol_rel.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tol_rel must be > 0 (got {tol_rel})"
        )));
    }
    DesignPoint {
        frequency: f_lo,
        offset: 0.0,
        ..*point
    }
    .validate()?;
    // Search on s = -ln f so that "correct" is the upper side, as for offsets.
    let ok = |s: f64| correct_at_frequency(bench, point, (-s).exp(), offset_fraction);
    let step = (1.0 + tol_rel).ln();
    let found = threshold_search(
        -f_hi.ln(),
        -f_lo.ln(),
        &ok,
        &|a, b| 0.5 * (a + b),
        &|a, b| b - a <= step,
        &|x| x - step,
    )?
    .ok_or_else(|| Error::NoLockWindow(format!("decision incorrect at f_lo = {f_lo:e} Hz")))?;
    let value = if found.value == -f_hi.ln() {
        f_hi
    } else {
        (-found.value).exp()
    };
    Ok(SearchResult { value, ..found })
}

/// Caps the worker threads used by sweeps and searches. Only the first call
/// in a process takes effect.
pub fn set_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()));
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
    Ok(())
}

/// `steps` linearly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Optional searches attached to each sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepMetrics {
    pub dead_zone: bool,
    pub f_max: bool,
}

fn full_report(
    bench: &Bench,
    point: &DesignPoint,
    metrics: SweepMetrics,
) -> Result<ExperimentReport> {
    let mut report = run_offset_experiment(bench, point, DEFAULT_PERIODS)?;
    if metrics.dead_zone {
        let (lo, hi) = DEAD_ZONE_BRACKET;
        report.dead_zone = Some(measure_dead_zone(bench, point, lo, hi, DEAD_ZONE_TOL)?.value);
    }
    if metrics.f_max {
        let (lo, hi) = FMAX_BRACKET;
        report.f_max =
            Some(measure_fmax(bench, point, FMAX_OFFSET_FRACTION, lo, hi, FMAX_TOL_REL)?.value);
    }
    Ok(report)
}

/// One report per width on a linear grid, sorted by width.
pub fn width_sweep(
    bench: &Bench,
    w_lo: f64,
    w_hi: f64,
    steps: usize,
    fixed: &DesignPoint,
    metrics: SweepMetrics,
) -> Result<Vec<ExperimentReport>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "steps must be >= 2 (got {steps})"
        )));
    }
    if !(w_lo > 0.0 && w_hi > w_lo && w_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "width range must satisfy 0 < lo < hi (got [{w_lo:e}, {w_hi:e}])"
        )));
    }
    fixed.validate()?;
    linear_grid(w_lo, w_hi, steps)
        .into_par_iter()
        .map(|width| full_report(bench, &DesignPoint { width, ..*fixed }, metrics))
        .collect()
}

/// One report per corner, in input order, without checking decisions.
pub fn corner_reports(
    bench: &Bench,
    corners: &[CornerName],
    fixed: &DesignPoint,
    metrics: SweepMetrics,
) -> Result<Vec<ExperimentReport>> {
    if corners.is_empty() {
        return Err(Error::InvalidParameter("corner list is empty".into()));
    }
    fixed.validate()?;
    corners
        .par_iter()
        .map(|c| {
            let point = DesignPoint {
                corner: bench.cal.corner(*c),
                ..*fixed
            };
            full_report(bench, &point, metrics)
        })
        .collect()
}

/// Assertion error naming the first row whose decision does not match the
/// sign of its offset.
pub fn check_decisions(rows: &[ExperimentReport]) -> Result<()> {
    match rows
        .iter()
        .find(|r| r.decision != Decision::expected_for(r.point.offset))
    {
        Some(bad) => Err(Error::Assertion(format!(
            "corner {} at offset {:e} s gave {} (expected {})",
            bad.point.corner.name,
            bad.point.offset,
            bad.decision.as_str(),
            Decision::expected_for(bad.point.offset).as_str()
        ))),
        None => Ok(()),
    }
}

/// [`corner_reports`] followed by [`check_decisions`].
pub fn corner_sweep(
    bench: &Bench,
    corners: &[CornerName],
    fixed: &DesignPoint,
    metrics: SweepMetrics,
) -> Result<Vec<ExperimentReport>> {
    let rows = corner_reports(bench, corners, fixed, metrics)?;
    check_decisions(&rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriodReport {
    pub report: ExperimentReport,
    /// Decision of every period after the settling ones.
    pub period_decisions: Vec<Decision>,
    /// Number of final periods checked for stability.
    pub checked_periods: usize,
    pub stable: bool,
}

/// Runs with the offset forced to half a period (sign taken from
/// `point.offset`, A leading when zero). The final `STABLE_PERIODS` periods
/// (or the second half of a shorter run) must all agree and be correct.
pub fn half_period_test(
    bench: &Bench,
    point: &DesignPoint,
    n_periods: usize,
) -> Result<(HalfPeriodReport, TransientResult)> {
    if n_periods < 2 {
        return Err(Error::WindowTooShort);
    }
    let sign = if point.offset < 0.0 { -1.0 } else { 1.0 };
    let point = point.with_offset(sign * 0.5 * point.period());
    point.validate()?;
    let result = bench.simulate(&point, n_periods)?;
    let t = point.period();
    let settle = SETTLE_PERIODS.min(n_periods - 1);
    let report = analyze(
        bench,
        &point,
        &result,
        settle as f64 * t,
        n_periods as f64 * t,
    )?;
    let decisions = period_decisions(&result, &bench.thresholds(), t, settle, n_periods)?;
    let checked = STABLE_PERIODS.min(n_periods / 2).max(1);
    let expected = Decision::expected_for(sign);
    let stable = decisions[decisions.len() - checked..]
        .iter()
        .all(|d| *d == expected);
    Ok((
        HalfPeriodReport {
            report,
            period_decisions: decisions,
            checked_periods: checked,
            stable,
        },
        result,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub report: ExperimentReport,
    pub f_ref: f64,
    pub f_fb: f64,
    pub up_high_time: f64,
    pub dn_high_time: f64,
    /// UP dominates when the reference is faster, DN when it is slower.
    pub consistent: bool,
}

/// Drives A at `f_ref` and B at `f_fb` for `n_periods` reference periods and
/// compares cumulative UP and DN high time after the settling periods.
pub fn frequency_mismatch_test(
    bench: &Bench,
    point: &DesignPoint,
    f_ref: f64,
    f_fb: f64,
    n_periods: usize,
) -> Result<(MismatchReport, TransientResult)> {
    for (name, f) in [("f_ref", f_ref), ("f_fb", f_fb)] {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be > 0 (got {f:e})"
            )));
        }
    }
    if f_ref == f_fb {
        return Err(Error::EqualFrequencies);
    }
    let point = DesignPoint {
        frequency: f_ref,
        offset: 0.0,
        ..*point
    };
    point.validate()?;
    let stim = Stimulus::mismatched(bench.cal.vdd, f_ref, f_fb);
    let net = bench.netlist(&point, &stim);
    let t_ref = 1.0 / f_ref;
    let (t0, t1) = analysis_window(t_ref, n_periods)?;
    let result = transient(&net, &bench.options(t1, stim.min_period()))?;
    let t1 = t1.min(*result.time.last().unwrap_or(&t1));
    if !(t1 > t0) {
        return Err(Error::WindowTooShort);
    }
    let report = analyze(bench, &point, &result, t0, t1)?;
    let th = bench.thresholds();
    let up_high_time = high_time(&result.waveform("UP")?.window(t0, t1), th.detect);
    let dn_high_time = high_time(&result.waveform("DN")?.window(t0, t1), th.detect);
    let consistent = if f_fb < f_ref {
        up_high_time > dn_high_time
    } else {
        dn_high_time > up_high_time
    };
    Ok((
        MismatchReport {
            report,
            f_ref,
            f_fb,
            up_high_time,
            dn_high_time,
            consistent,
        },
        result,
    ))
}

/// Number of full-swing pulses on `probe` in `[t0, t1]`.
pub fn full_pulses(
    result: &TransientResult,
    probe: &str,
    th: &Thresholds,
    t0: f64,
    t1: f64,
) -> Result<usize> {
    let w = result.waveform(probe)?.window(t0, t1);
    Ok(detect_pulses(&w, th.detect)
        .iter()
        .filter(|p| p.peak >= th.min_peak)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(120e-9, 310e-9, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 120e-9);
        assert_eq!(g[4], 310e-9);
        assert!((g[1] - 167.5e-9).abs() < 1e-18);
        assert!((g[3] - 262.5e-9).abs() < 1e-18);
    }

    #[test]
    fn point_validation() {
        let cal = Calibration::default();
        let p = DesignPoint::default_for(&cal);
        assert!(p.validate().is_ok());
        assert!(p.with_offset(1e-9).validate().is_err());
        assert!(DesignPoint { width: 0.0, ..p }.validate().is_err());
        assert!(DesignPoint {
            frequency: -1.0,
            ..p
        }
        .validate()
        .is_err());
    }

    #[test]
    fn search_finds_threshold() {
        let ok = |x: f64| Ok(x >= 3.3);
        let r = threshold_search(
            0.0,
            10.0,
            &ok,
            &|a, b| 0.5 * (a + b),
            &|a, b| b - a <= 0.01,
            &|x| x - 0.01,
        )
        .unwrap()
        .unwrap();
        assert!(!r.linear_fallback);
        assert!(r.value >= 3.3 && r.value - 3.3 <= 0.01);
    }

    #[test]
    fn search_falls_back_on_non_monotone() {
        // Bisection lands near 2; the probe at 6 falls in the gap.
        let ok = |x: f64| Ok((2.0..=5.5).contains(&x) || x >= 7.0);
        let r = threshold_search(
            0.0,
            10.0,
            &ok,
            &|a, b| 0.5 * (a + b),
            &|a, b| b - a <= 0.1,
            &|x| x - 0.1,
        )
        .unwrap()
        .unwrap();
        assert!(r.linear_fallback);
        assert!((r.value - 7.0).abs() <= 0.1 + 1e-9, "{}", r.value);
    }

    #[test]
    fn search_reports_missing_window() {
        let ok = |_: f64| Ok(false);
        let r = threshold_search(
            0.0,
            1.0,
            &ok,
            &|a, b| 0.5 * (a + b),
            &|a, b| b - a <= 0.1,
            &|x| x - 0.1,
        )
        .unwrap();
        assert!(r.is_none());
    }
}
