use pfdsim::measure::{
    average_power, classify_decision, detect_pulses, integrate, mutual_exclusion_overlap,
    rise_time, Decision, Thresholds,
};
use pfdsim::waveform::Waveform;
use proptest::prelude::*;

/// Random piecewise-linear signal on an increasing time axis.
fn signal(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((1e-12f64..20e-12, 0.0f64..1.2), 2..max_len).prop_map(|pts| {
        let mut t = 0.0;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (dt, v) in pts {
            times.push(t);
            values.push(v);
            t += dt;
        }
        (times, values)
    })
}

fn rc_step(tau: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let dt = 8.0 * tau / n as f64;
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let v = t.iter().map(|t| 1.0 - (-t / tau).exp()).collect();
    (t, v)
}

#[test]
fn rc_step_rise_time_is_ln9_tau() {
    let tau = 1e-9;
    let (t, v) = rc_step(tau, 8000);
    let r = rise_time(&Waveform::new(&t, &v), 0.0, 1.0).unwrap();
    let expected = 9f64.ln() * tau;
    assert!((r - expected).abs() <= 0.01 * expected, "{r}");
}

#[test]
fn pulse_detection_examples() {
    let t = [0.0, 1.0, 2.0, 3.0];
    assert!(detect_pulses(&Waveform::new(&t, &[0.0; 4]), 0.6).is_empty());
    let v = [0.0, 1.2, 1.2, 0.0];
    let p = detect_pulses(&Waveform::new(&t, &v), 0.6);
    assert_eq!(p.len(), 1);
    assert_eq!((p[0].start, p[0].end, p[0].peak), (0.5, 2.5, 1.2));
}

#[test]
fn classification_examples() {
    let th = Thresholds::for_vdd(1.2);
    let t = [0.0, 1.0, 2.0, 3.0];
    let pulse = [0.0, 1.2, 1.2, 0.0];
    let low = [0.0; 4];
    let weak = [0.0, 0.7, 0.7, 0.0];
    let w = |v| Waveform::new(&t, v);
    assert_eq!(
        classify_decision(&w(&pulse), &w(&low), &th),
        Decision::LeadA
    );
    assert_eq!(
        classify_decision(&w(&low), &w(&pulse), &th),
        Decision::LeadB
    );
    assert_eq!(
        classify_decision(&w(&low), &w(&low), &th),
        Decision::Undetermined
    );
    assert_eq!(
        classify_decision(&w(&pulse), &w(&pulse), &th),
        Decision::Undetermined
    );
    // Crosses the detect level but never reaches full swing.
    assert_eq!(
        classify_decision(&w(&weak), &w(&low), &th),
        Decision::Undetermined
    );
}

#[test]
fn constant_current_power() {
    let t = [0.0, 1e-9, 2e-9];
    let i = [10e-6; 3];
    let p = average_power(&Waveform::new(&t, &i), 1.2, 0.0, 2e-9).unwrap();
    assert!((p - 12e-6).abs() < 1e-18);
    assert!(average_power(&Waveform::new(&t, &i), 1.2, 0.0, 3e-9).is_err());
}

#[test]
fn identical_square_waves_overlap_fully() {
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for k in 0..4 {
        let base = k as f64 * 10.0;
        for (dt, val) in [(0.0, 0.0), (1.0, 1.2), (5.0, 1.2), (6.0, 0.0)] {
            t.push(base + dt);
            v.push(val);
        }
    }
    let w = Waveform::new(&t, &v);
    // High (>= 0.6) from 0.5 to 5.5 in each of 4 periods.
    assert!((mutual_exclusion_overlap(&w, &w, 0.6) - 20.0).abs() < 1e-12);
    let low = vec![0.0; t.len()];
    assert_eq!(
        mutual_exclusion_overlap(&w, &Waveform::new(&t, &low), 0.6),
        0.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rise_time_ignores_time_and_level_shifts(
        (t, v) in signal(40),
        shift in -1e-9f64..1e-9,
        offset in -1.0f64..1.0,
    ) {
        let w = Waveform::new(&t, &v);
        let t2: Vec<f64> = t.iter().map(|x| x + shift).collect();
        let v2: Vec<f64> = v.iter().map(|x| x + offset).collect();
        let shifted = Waveform::new(&t2, &v2);
        match (rise_time(&w, 0.0, 1.2), rise_time(&shifted, offset, 1.2 + offset)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.abs() + 1e-24),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn pulses_sorted_disjoint_and_double_on_repeat((t, v) in signal(40), th in 0.1f64..1.1) {
        // Pin both ends low so repeated copies cannot merge.
        let mut v = v;
        let n = v.len();
        v[0] = 0.0;
        v[n - 1] = 0.0;
        let w = Waveform::new(&t, &v);
        let p = detect_pulses(&w, th);
        for e in &p {
            prop_assert!(e.end > e.start);
            prop_assert!(e.peak >= th);
        }
        for pair in p.windows(2) {
            prop_assert!(pair[0].end < pair[1].start);
        }
        let span = t[n - 1] + 1e-12;
        let t2: Vec<f64> = t.iter().chain(t.iter().map(|x| x + span).collect::<Vec<_>>().iter()).copied().collect();
        let v2: Vec<f64> = v.iter().chain(v.iter()).copied().collect();
        prop_assert_eq!(detect_pulses(&Waveform::new(&t2, &v2), th).len(), 2 * p.len());
    }

    #[test]
    fn classification_is_antisymmetric((t, a) in signal(30), b in prop::collection::vec(0.0f64..1.2, 30)) {
        let b = &b[..a.len().min(b.len())];
        let t = &t[..b.len()];
        let a = &a[..b.len()];
        prop_assume!(t.len() >= 2);
        let th = Thresholds::for_vdd(1.2);
        let (up, dn) = (Waveform::new(t, a), Waveform::new(t, b));
        prop_assert_eq!(classify_decision(&dn, &up, &th), classify_decision(&up, &dn, &th).mirrored());
    }

    #[test]
    fn power_is_additive_over_partitions((t, i) in signal(40), f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let w = Waveform::new(&t, &i);
        let (t0, t1) = (w.start(), w.end());
        let (a, b) = (f1.min(f2), f1.max(f2));
        let m1 = t0 + a * (t1 - t0);
        let m2 = t0 + b * (t1 - t0);
        prop_assume!(m1 > t0 && m2 > m1 && t1 > m2);
        let whole = average_power(&w, 1.2, t0, t1).unwrap();
        let parts = [(t0, m1), (m1, m2), (m2, t1)]
            .iter()
            .map(|(x, y)| average_power(&w, 1.2, *x, *y).unwrap() * (y - x))
            .sum::<f64>() / (t1 - t0);
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1e-6));
        let q = integrate(&w, t0, t1).unwrap();
        prop_assert!((whole - 1.2 * q / (t1 - t0)).abs() <= 1e-12 * whole.abs().max(1e-6));
    }
}
