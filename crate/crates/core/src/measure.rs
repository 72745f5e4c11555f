//! Waveform post-processing: edge timing, pulse detection, lead/lag
//! decisions, UP/DN overlap and average power.
//!
//! Every threshold crossing is linearly interpolated between samples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::Waveform;

/// One maximal interval where a waveform sits at or above a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub start: f64,
    pub end: f64,
    pub peak: f64,
}

impl PulseEvent {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    /// A (reference) leads: UP asserted.
    LeadA,
    /// B (feedback) leads: DN asserted.
    LeadB,
    Undetermined,
}

impl Decision {
    pub fn mirrored(self) -> Decision {
        match self {
            Decision::LeadA => Decision::LeadB,
            Decision::LeadB => Decision::LeadA,
            Decision::Undetermined => Decision::Undetermined,
        }
    }

    /// Decision expected for a signed offset (positive: A leads).
    pub fn expected_for(offset: f64) -> Decision {
        if offset > 0.0 {
            Decision::LeadA
        } else if offset < 0.0 {
            Decision::LeadB
        } else {
            Decision::Undetermined
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::LeadA => "LeadA",
            Decision::LeadB => "LeadB",
            Decision::Undetermined => "Undetermined",
        }
    }
}

/// Detection level and the peak a pulse needs to count as a real output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub detect: f64,
    pub min_peak: f64,
}

impl Thresholds {
    /// 0.5 VDD detection, 0.8 VDD full-swing requirement.
    pub fn for_vdd(vdd: f64) -> Self {
        Thresholds {
            detect: 0.5 * vdd,
            min_peak: 0.8 * vdd,
        }
    }
}

fn crossing(t0: f64, v0: f64, t1: f64, v1: f64, level: f64) -> f64 {
    if v1 == v0 {
        return t0;
    }
    t0 + (level - v0) / (v1 - v0) * (t1 - t0)
}

/// Time from the 10% to the 90% level of a transition from `from` to `to`.
///
/// Pairs the first 90% crossing with the most recent 10% crossing before
/// it, so partial excursions that fall back do not count.
fn transition_time(w: &Waveform<'_>, from: f64, to: f64) -> Result<f64> {
    let span = to - from;
    if span == 0.0 || w.len() < 2 {
        return Err(Error::NoTransition);
    }
    let progress = |v: f64| (v - from) / span;
    let mut armed: Option<f64> = None;
    for i in 0..w.len() - 1 {
        let (t0, t1) = (w.time[i], w.time[i + 1]);
        let (p0, p1) = (progress(w.values[i]), progress(w.values[i + 1]));
        if p0 < 0.1 && p1 >= 0.1 {
            armed = Some(crossing(t0, p0, t1, p1, 0.1));
        } else if p1 < 0.1 {
            armed = None;
        }
        if p0 < 0.9 && p1 >= 0.9 {
            if let Some(start) = armed {
                return Ok(crossing(t0, p0, t1, p1, 0.9) - start);
            }
        }
    }
    Err(Error::NoTransition)
}

/// 10%-90% rise time between `v_low` and `v_high`.
pub fn rise_time(w: &Waveform<'_>, v_low: f64, v_high: f64) -> Result<f64> {
    transition_time(w, v_low, v_high)
}

/// 90%-10% fall time between `v_high` and `v_low`.
pub fn fall_time(w: &Waveform<'_>, v_low: f64, v_high: f64) -> Result<f64> {
    transition_time(w, v_high, v_low)
}

/// Maximal intervals where the waveform is `>= threshold`, sorted and
/// disjoint. Intervals touching the ends of the record are clipped there.
pub fn detect_pulses(w: &Waveform<'_>, threshold: f64) -> Vec<PulseEvent> {
    let mut out = Vec::new();
    if w.is_empty() {
        return out;
    }
    let mut open: Option<(f64, f64)> = (w.values[0] >= threshold).then(|| (w.time[0], w.values[0]));
    for i in 0..w.len() - 1 {
        let (t0, t1) = (w.time[i], w.time[i + 1]);
        let (v0, v1) = (w.values[i], w.values[i + 1]);
        match open.as_mut() {
            None if v1 >= threshold => {
                open = Some((crossing(t0, v0, t1, v1, threshold), v1));
            }
            Some((start, peak)) => {
                if v1 >= threshold {
                    *peak = peak.max(v1);
                } else {
                    let end = crossing(t0, v0, t1, v1, threshold);
                    if end > *start {
                        out.push(PulseEvent {
                            start: *start,
                            end,
                            peak: *peak,
                        });
                    }
                    open = None;
                }
            }
            None => {}
        }
    }
    if let Some((start, peak)) = open {
        if w.end() > start {
            out.push(PulseEvent {
                start,
                end: w.end(),
                peak,
            });
        }
    }
    out
}

fn has_full_pulse(w: &Waveform<'_>, th: &Thresholds) -> bool {
    detect_pulses(w, th.detect)
        .iter()
        .any(|p| p.peak >= th.min_peak)
}

/// LeadA when UP shows a full-swing pulse and DN does not; LeadB for the
/// mirror case; Undetermined otherwise.
pub fn classify_decision(up: &Waveform<'_>, dn: &Waveform<'_>, th: &Thresholds) -> Decision {
    match (has_full_pulse(up, th), has_full_pulse(dn, th)) {
        (true, false) => Decision::LeadA,
        (false, true) => Decision::LeadB,
        _ => Decision::Undetermined,
    }
}

/// Sub-interval of `[0, 1]` (segment parameter) where a linear segment from
/// `v0` to `v1` is `>= level`.
fn above(v0: f64, v1: f64, level: f64) -> Option<(f64, f64)> {
    match (v0 >= level, v1 >= level) {
        (true, true) => Some((0.0, 1.0)),
        (false, false) => None,
        (true, false) => Some((0.0, (level - v0) / (v1 - v0))),
        (false, true) => Some(((level - v0) / (v1 - v0), 1.0)),
    }
}

/// Total time the waveform spends `>= threshold`.
pub fn high_time(w: &Waveform<'_>, threshold: f64) -> f64 {
    (0..w.len().saturating_sub(1))
        .filter_map(|i| {
            above(w.values[i], w.values[i + 1], threshold)
                .map(|(a, b)| (b - a) * (w.time[i + 1] - w.time[i]))
        })
        .fold(0.0, |acc, x| acc + x)
}

/// Total time both waveforms are simultaneously `>= threshold`. The two
/// waveforms must share a time axis.
pub fn mutual_exclusion_overlap(up: &Waveform<'_>, dn: &Waveform<'_>, threshold: f64) -> f64 {
    assert_eq!(up.time, dn.time, "overlap needs a shared time axis");
    (0..up.len().saturating_sub(1))
        .filter_map(|i| {
            let a = above(up.values[i], up.values[i + 1], threshold)?;
            let b = above(dn.values[i], dn.values[i + 1], threshold)?;
            let lo = a.0.max(b.0);
            let hi = a.1.min(b.1);
            (hi > lo).then(|| (hi - lo) * (up.time[i + 1] - up.time[i]))
        })
        .fold(0.0, |acc, x| acc + x)
}

/// Trapezoidal integral of `w` over `[t0, t1]`, interpolating at the ends.
pub fn integrate(w: &Waveform<'_>, t0: f64, t1: f64) -> Result<f64> {
    if w.is_empty() || !(t1 > t0) || t0 < w.start() || t1 > w.end() {
        return Err(Error::WindowOutOfRange { t0, t1 });
    }
    let inner = w.window(t0, t1);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(inner.len() + 2);
    pts.push((t0, w.value_at(t0)));
    pts.extend(
        inner
            .time
            .iter()
            .zip(inner.values)
            .filter(|(t, _)| **t > t0 && **t < t1)
            .map(|(t, v)| (*t, *v)),
    );
    pts.push((t1, w.value_at(t1)));
    Ok(pts
        .windows(2)
        .map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0))
        .fold(0.0, |acc, x| acc + x))
}

/// `vdd` times the mean supply current over `[t0, t1]`.
pub fn average_power(supply_current: &Waveform<'_>, vdd: f64, t0: f64, t1: f64) -> Result<f64> {
    Ok(vdd * integrate(supply_current, t0, t1)? / (t1 - t0))
}

/// Named scalar results, serialized as a flat JSON object in SI units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Measurements(pub BTreeMap<String, f64>);

impl Measurements {
    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flat map serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid() -> (Vec<f64>, Vec<f64>) {
        (vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.2, 1.2, 0.0, 0.0])
    }

    #[test]
    fn linear_ramp_rise_time() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 1e-12).collect();
        let v: Vec<f64> = t.iter().map(|t| t / 100e-12).collect();
        let r = rise_time(&Waveform::new(&t, &v), 0.0, 1.0).unwrap();
        assert!((r - 80e-12).abs() < 1e-24, "{r}");
    }

    #[test]
    fn flat_waveform_has_no_transition() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.3; 3];
        let w = Waveform::new(&t, &v);
        assert!(matches!(rise_time(&w, 0.0, 1.0), Err(Error::NoTransition)));
        assert!(matches!(fall_time(&w, 0.0, 1.0), Err(Error::NoTransition)));
    }

    #[test]
    fn glitch_does_not_pair_with_later_edge() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [0.0, 0.5, 0.0, 0.0, 0.5, 1.0];
        // Real edge: 10% at 3.2, 90% at 4.8.
        let r = rise_time(&Waveform::new(&t, &v), 0.0, 1.0).unwrap();
        assert!((r - 1.6).abs() < 1e-12, "{r}");
    }

    #[test]
    fn fall_time_mirrors_rise() {
        let (t, v) = trapezoid();
        let w = Waveform::new(&t, &v);
        assert!((fall_time(&w, 0.0, 1.2).unwrap() - 0.8).abs() < 1e-12);
        assert!((rise_time(&w, 0.0, 1.2).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_trapezoid_pulse() {
        let (t, v) = trapezoid();
        let ev = detect_pulses(&Waveform::new(&t, &v), 0.6);
        assert_eq!(
            ev,
            vec![PulseEvent {
                start: 0.5,
                end: 2.5,
                peak: 1.2
            }]
        );
        let zeros = [0.0; 5];
        assert!(detect_pulses(&Waveform::new(&t, &zeros), 0.6).is_empty());
    }

    #[test]
    fn pulses_clip_at_record_edges() {
        let t = [0.0, 1.0, 2.0];
        let v = [1.0, 1.0, 1.0];
        let ev = detect_pulses(&Waveform::new(&t, &v), 0.5);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].start, ev[0].end), (0.0, 2.0));
    }

    #[test]
    fn decisions() {
        let (t, v) = trapezoid();
        let flat = [0.0; 5];
        let th = Thresholds::for_vdd(1.2);
        let pulse = Waveform::new(&t, &v);
        let low = Waveform::new(&t, &flat);
        assert_eq!(classify_decision(&pulse, &low, &th), Decision::LeadA);
        assert_eq!(classify_decision(&low, &pulse, &th), Decision::LeadB);
        assert_eq!(classify_decision(&low, &low, &th), Decision::Undetermined);
        assert_eq!(
            classify_decision(&pulse, &pulse, &th),
            Decision::Undetermined
        );

        // Above detection level but short of full swing: not a real pulse.
        let weak = [0.0, 0.9, 0.9, 0.0, 0.0];
        let weak = Waveform::new(&t, &weak);
        assert_eq!(classify_decision(&weak, &low, &th), Decision::Undetermined);
    }

    #[test]
    fn overlap_geometry() {
        let t: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let square: Vec<f64> = t
            .iter()
            .map(|&t| if (t % 2.0) < 1.0 { 1.0 } else { 0.0 })
            .collect();
        let w = Waveform::new(&t, &square);
        let zero = vec![0.0; t.len()];
        assert_eq!(
            mutual_exclusion_overlap(&Waveform::new(&t, &zero), &w, 0.5),
            0.0
        );
        // Identical waveforms overlap for exactly their high time.
        let ov = mutual_exclusion_overlap(&w, &w, 0.5);
        assert!((ov - high_time(&w, 0.5)).abs() < 1e-12);
        // Five periods high for 1.0 each at the 0.5 level, except the first,
        // which starts high and so lacks the half-sample leading ramp.
        assert!((ov - 4.875).abs() < 1e-12, "{ov}");
    }

    #[test]
    fn constant_current_power() {
        let t = [0.0, 1e-9, 2e-9];
        let i = [10e-6; 3];
        let p = average_power(&Waveform::new(&t, &i), 1.2, 0.3e-9, 1.7e-9).unwrap();
        assert!((p - 12e-6).abs() < 1e-18);
        assert!(average_power(&Waveform::new(&t, &i), 1.2, 0.0, 3e-9).is_err());
        assert!(average_power(&Waveform::new(&t, &i), 1.2, 1e-9, 1e-9).is_err());
    }

    #[test]
    fn measurements_json_is_flat() {
        let mut m = Measurements::default();
        m.insert("dead_zone", 2.5e-11);
        m.insert("avg_power", 2.9e-5);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["dead_zone"], 2.5e-11);
        assert!(v.as_object().unwrap().values().all(|x| x.is_number()));
    }
}
