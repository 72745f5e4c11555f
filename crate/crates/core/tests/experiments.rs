use pfdsim::config::Calibration;
use pfdsim::devices::CornerName;
use pfdsim::engine::transient;
use pfdsim::experiments::{
    analyze, corner_reports, frequency_mismatch_test, full_pulses, half_period_test,
    measure_dead_zone, measure_fmax, run_offset_experiment, Bench, DesignPoint, SweepMetrics,
    DEFAULT_PERIODS,
};
use pfdsim::measure::Decision;
use pfdsim::netlist::Stimulus;
use pfdsim::Error;

fn setup() -> (Bench, DesignPoint) {
    let cal = Calibration::default();
    let point = DesignPoint::default_for(&cal);
    (Bench::new(cal), point)
}

#[test]
fn default_offset_leads_a_and_draws_power() {
    let (bench, point) = setup();
    let r = run_offset_experiment(&bench, &point, DEFAULT_PERIODS).unwrap();
    assert_eq!(r.decision, Decision::LeadA);
    assert!(r.avg_power > 0.0 && r.avg_power.is_finite());
    assert!(r.up_rise_time.is_some());
    assert!(r.mutual_exclusion_overlap <= 0.05 * point.period());
}

#[test]
fn up_pulses_repeat_every_period() {
    let (bench, point) = setup();
    let result = bench.simulate(&point, DEFAULT_PERIODS).unwrap();
    let th = bench.thresholds();
    let t = point.period();
    let n = full_pulses(&result, "UP", &th, 2.0 * t, 10.0 * t).unwrap();
    assert!(n >= 8, "{n}");
    assert_eq!(
        full_pulses(&result, "DN", &th, 2.0 * t, 10.0 * t).unwrap(),
        0
    );
    let up = result.waveform("UP").unwrap().window(2.0 * t, 10.0 * t);
    let pulses = pfdsim::measure::detect_pulses(&up, th.detect);
    let dt = bench.options(10.0 * t, t).dt;
    for pair in pulses.windows(2) {
        let spacing = pair[1].start - pair[0].start;
        assert!((spacing - t).abs() <= dt, "{spacing:e}");
    }
}

#[test]
fn negated_offset_mirrors_decision() {
    let (bench, point) = setup();
    for offset in [25e-12, 100e-12, 400e-12] {
        let a = run_offset_experiment(&bench, &point.with_offset(offset), DEFAULT_PERIODS).unwrap();
        let b =
            run_offset_experiment(&bench, &point.with_offset(-offset), DEFAULT_PERIODS).unwrap();
        assert_eq!(b.decision, a.decision.mirrored(), "offset {offset:e}");
    }
}

#[test]
fn swapped_sources_mirror_decision() {
    let (bench, point) = setup();
    let stim = Stimulus::clocks(bench.cal.vdd, point.frequency, point.offset).swapped();
    let net = bench.netlist(&point, &stim);
    let t = point.period();
    let result = transient(&net, &bench.options(10.0 * t, t)).unwrap();
    let r = analyze(&bench, &point, &result, 2.0 * t, 10.0 * t).unwrap();
    assert_eq!(r.decision, Decision::LeadB);
}

#[test]
fn zero_offset_is_undetermined() {
    let (bench, point) = setup();
    let r = run_offset_experiment(&bench, &point.with_offset(0.0), DEFAULT_PERIODS).unwrap();
    assert_eq!(r.decision, Decision::Undetermined);
}

#[test]
fn tt_corner_row_matches_plain_run() {
    let (bench, point) = setup();
    let rows = corner_reports(&bench, &[CornerName::Tt], &point, SweepMetrics::default()).unwrap();
    let plain = run_offset_experiment(&bench, &point, DEFAULT_PERIODS).unwrap();
    assert_eq!(rows, vec![plain]);
}

#[test]
fn short_windows_and_equal_frequencies_are_rejected() {
    let (bench, point) = setup();
    assert!(matches!(
        run_offset_experiment(&bench, &point, 2),
        Err(Error::WindowTooShort)
    ));
    assert!(matches!(
        half_period_test(&bench, &point, 1),
        Err(Error::WindowTooShort)
    ));
    assert!(matches!(
        frequency_mismatch_test(&bench, &point, 1e9, 1e9, 20),
        Err(Error::EqualFrequencies)
    ));
}

#[test]
fn dead_zone_coarse_search_is_bracketed() {
    let (bench, point) = setup();
    let coarse = measure_dead_zone(&bench, &point, 0.0, 200e-12, 10e-12).unwrap();
    assert!(coarse.value > 0.0 && coarse.value < 200e-12);
    assert!(coarse.value >= coarse.lead_a.value && coarse.value >= coarse.lead_b.value);
    // Golden value at tight tolerance is 57.8 ps.
    assert!(
        (coarse.value - 57.8125e-12).abs() <= 10e-12,
        "{:e}",
        coarse.value
    );
}

#[test]
fn dead_zone_without_lock_window_fails() {
    let (bench, point) = setup();
    assert!(matches!(
        measure_dead_zone(&bench, &point, 0.0, 20e-12, 5e-12),
        Err(Error::NoLockWindow(_))
    ));
}

#[test]
fn fmax_above_range_has_no_lock_window() {
    let (bench, point) = setup();
    assert!(matches!(
        measure_fmax(&bench, &point, 0.1, 3e9, 20e9, 0.05),
        Err(Error::NoLockWindow(_))
    ));
}

#[test]
fn narrow_devices_are_not_faster() {
    let (bench, point) = setup();
    let narrow = DesignPoint {
        width: 120e-9,
        ..point
    };
    let f_narrow = measure_fmax(&bench, &narrow, 0.1, 0.5e9, 20e9, 0.05).unwrap();
    let f_wide = measure_fmax(&bench, &point, 0.1, 0.5e9, 20e9, 0.05).unwrap();
    assert!(f_narrow.value <= f_wide.value * 1.05);
    assert!(f_wide.value >= 1e9);
}

#[test]
fn half_period_is_stable_both_ways() {
    let (bench, point) = setup();
    for (sign, expected) in [(1.0, Decision::LeadA), (-1.0, Decision::LeadB)] {
        let (r, _) = half_period_test(&bench, &point.with_offset(sign * 1e-12), 20).unwrap();
        assert!(r.stable, "{:?}", r.period_decisions);
        assert_eq!(r.checked_periods, 10);
        assert_eq!(*r.period_decisions.last().unwrap(), expected);
    }
}

#[test]
fn mismatch_favours_faster_input() {
    let (bench, point) = setup();
    let (fast_ref, _) = frequency_mismatch_test(&bench, &point, 1e9, 0.8e9, 20).unwrap();
    assert!(fast_ref.consistent);
    assert!(fast_ref.up_high_time > fast_ref.dn_high_time);
    let (slow_ref, _) = frequency_mismatch_test(&bench, &point, 0.8e9, 1e9, 16).unwrap();
    assert!(slow_ref.consistent);
    assert!(slow_ref.dn_high_time > slow_ref.up_high_time);
}
