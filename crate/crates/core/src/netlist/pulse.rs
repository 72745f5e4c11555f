use serde::{Deserialize, Serialize};

/// Trapezoidal periodic source with SPICE `PULSE` semantics.
///
/// Before `delay` the output sits at `v_low`. Each period then ramps up over
/// `rise`, holds `v_high` for `width`, ramps down over `fall` and holds
/// `v_low` for the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub v_low: f64,
    pub v_high: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    pub period: f64,
}

impl PulseSpec {
    /// 50% duty clock (high time measured at mid-swing equals `period / 2`).
    pub fn clock(v_high: f64, period: f64, edge: f64, delay: f64) -> Self {
        PulseSpec {
            v_low: 0.0,
            v_high,
            delay,
            rise: edge,
            fall: edge,
            width: 0.5 * period - edge,
            period,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let fields = [
            self.v_low,
            self.v_high,
            self.delay,
            self.rise,
            self.fall,
            self.width,
            self.period,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            out.push("pulse has non-finite field".into());
            return out;
        }
        if !(self.period > 0.0) {
            out.push("pulse period must be > 0".into());
        }
        if !(self.rise > 0.0 && self.fall > 0.0) {
            out.push("pulse rise and fall must be > 0".into());
        }
        if self.width < 0.0 {
            out.push("pulse width must be >= 0".into());
        }
        if self.delay < 0.0 {
            out.push("pulse delay must be >= 0".into());
        }
        if !(self.period > self.rise + self.width + self.fall) {
            out.push("pulse period must exceed rise + width + fall".into());
        }
        out
    }

    /// Source value at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.delay {
            return self.v_low;
        }
        let local = (t - self.delay) % self.period;
        let swing = self.v_high - self.v_low;
        if local < self.rise {
            self.v_low + swing * local / self.rise
        } else if local <= self.rise + self.width {
            self.v_high
        } else if local < self.rise + self.width + self.fall {
            self.v_high - swing * (local - self.rise - self.width) / self.fall
        } else {
            self.v_low
        }
    }

    /// Corner times of the waveform in `[0, t_stop]`, ascending.
    pub fn breakpoints(&self, t_stop: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let offsets = [
            0.0,
            self.rise,
            self.rise + self.width,
            self.rise + self.width + self.fall,
        ];
        let mut k = 0u64;
        loop {
            let start = self.delay + k as f64 * self.period;
            if start > t_stop {
                break;
            }
            for off in offsets {
                let t = start + off;
                if t > 0.0 && t <= t_stop {
                    out.push(t);
                }
            }
            k += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PulseSpec {
        PulseSpec {
            v_low: 0.0,
            v_high: 1.2,
            delay: 1.0,
            rise: 1.0,
            fall: 2.0,
            width: 3.0,
            period: 10.0,
        }
    }

    #[test]
    fn pulse_shape() {
        let p = spec();
        assert_eq!(p.value_at(0.0), 0.0);
        assert_eq!(p.value_at(1.0), 0.0);
        assert!((p.value_at(1.5) - 0.6).abs() < 1e-12);
        assert_eq!(p.value_at(3.0), 1.2);
        assert!((p.value_at(6.0) - 0.6).abs() < 1e-12);
        assert_eq!(p.value_at(8.0), 0.0);
        assert!((p.value_at(11.5) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_cover_corners() {
        let p = spec();
        assert_eq!(p.breakpoints(12.0), vec![1.0, 2.0, 5.0, 7.0, 11.0, 12.0]);
    }

    #[test]
    fn clock_is_half_duty() {
        let c = PulseSpec::clock(1.2, 1e-9, 10e-12, 0.0);
        assert!(c.violations().is_empty());
        let high = c.rise / 2.0 + c.width + c.fall / 2.0;
        assert!((high - 0.5e-9).abs() < 1e-24);
    }

    #[test]
    fn invalid_specs() {
        let mut p = spec();
        p.width = 8.0;
        assert_eq!(p.violations().len(), 1);
        p.width = 3.0;
        p.rise = 0.0;
        assert_eq!(p.violations().len(), 1);
        p.period = -1.0;
        assert!(p.violations().len() >= 2);
    }
}
