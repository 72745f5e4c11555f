/// A sampled signal: borrowed time axis plus one value per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform<'a> {
    pub time: &'a [f64],
    pub values: &'a [f64],
}

impl<'a> Waveform<'a> {
    pub fn new(time: &'a [f64], values: &'a [f64]) -> Self {
        assert_eq!(time.len(), values.len(), "waveform axes differ in length");
        Waveform { time, values }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.time.first().copied().unwrap_or(0.0)
    }

    pub fn end(&self) -> f64 {
        self.time.last().copied().unwrap_or(0.0)
    }

    /// Linear interpolation; clamps outside the sampled range.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.time.len();
        if n == 0 {
            return 0.0;
        }
        if t <= self.time[0] {
            return self.values[0];
        }
        if t >= self.time[n - 1] {
            return self.values[n - 1];
        }
        let k = self.time.partition_point(|&s| s <= t);
        let (t0, t1) = (self.time[k - 1], self.time[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Sub-slice covering the samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Waveform<'a> {
        let lo = self.time.partition_point(|&s| s < t0);
        let hi = self.time.partition_point(|&s| s <= t1);
        let hi = hi.max(lo);
        Waveform {
            time: &self.time[lo..hi],
            values: &self.values[lo..hi],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_windows() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = [0.0, 2.0, 2.0, -1.0];
        let w = Waveform::new(&t, &v);
        assert_eq!(w.value_at(0.5), 1.0);
        assert_eq!(w.value_at(2.5), 0.5);
        assert_eq!(w.value_at(-1.0), 0.0);
        assert_eq!(w.value_at(9.0), -1.0);
        let s = w.window(0.5, 2.0);
        assert_eq!(s.time, &[1.0, 2.0]);
    }
}
