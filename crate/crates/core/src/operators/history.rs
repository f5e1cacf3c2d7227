use super::OperatorError;

/// Time-stamped vector samples with piecewise-linear interpolation.
#[derive(Clone, Debug)]
pub struct SampleHistory {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

// Relative slack for queries that overshoot the last sample by roundoff.
const TIME_SLACK: f64 = 1e-12;

impl SampleHistory {
    pub fn new(dim: usize) -> Self {
        Self { dim, times: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn clear(&mut self) {
        self.times.clear();
        self.values.clear();
    }

    pub fn first_time(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn last_value(&self) -> Option<&[f64]> {
        let n = self.times.len();
        (n > 0).then(|| &self.values[(n - 1) * self.dim..n * self.dim])
    }

    pub fn push(&mut self, t: f64, value: &[f64]) -> Result<(), OperatorError> {
        super::check_time(self.last_time(), t)?;
        super::check_input(value, self.dim)?;
        self.times.push(t);
        self.values.extend_from_slice(&value[..self.dim]);
        Ok(())
    }

    fn sample(&self, i: usize, channel: usize) -> f64 {
        self.values[i * self.dim + channel]
    }

    /// Linear interpolation of one channel at `t`.
    pub fn interpolate(&self, t: f64, channel: usize) -> Result<f64, OperatorError> {
        self.interpolate_with_tail(t, channel, None)
    }

    /// Like [`interpolate`](Self::interpolate), but as if `tail = (t_s, v_s)`
    /// were appended after the last sample.
    pub fn interpolate_with_tail(
        &self,
        t: f64,
        channel: usize,
        tail: Option<(f64, f64)>,
    ) -> Result<f64, OperatorError> {
        let n = self.times.len();
        if n == 0 {
            return Err(OperatorError::NoSamples);
        }
        let start = self.times[0];
        let last = self.times[n - 1];
        let slack = TIME_SLACK * t.abs().max(1.0);
        if t < start - slack {
            let end = tail.map_or(last, |(ts, _)| ts);
            return Err(OperatorError::HistoryGap { t, start, end });
        }
        if t <= start {
            return Ok(self.sample(0, channel));
        }
        if t >= last {
            if let Some((ts, vs)) = tail.filter(|&(ts, _)| ts > last) {
                if t > ts + slack {
                    return Err(OperatorError::HistoryGap { t, start, end: ts });
                }
                let w = ((t - last) / (ts - last)).min(1.0);
                return Ok(self.sample(n - 1, channel) * (1.0 - w) + vs * w);
            }
            if t > last + slack {
                return Err(OperatorError::HistoryGap { t, start, end: last });
            }
            return Ok(self.sample(n - 1, channel));
        }
        // times[i - 1] <= t < times[i]
        let i = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.sample(i - 1, channel), self.sample(i, channel));
        if t == t0 {
            return Ok(v0);
        }
        let w = (t - t0) / (t1 - t0);
        Ok(v0 + (v1 - v0) * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> SampleHistory {
        let mut h = SampleHistory::new(1);
        for k in 0..=10 {
            h.push(k as f64 * 0.1, &[k as f64]).unwrap();
        }
        h
    }

    #[test]
    fn interpolates_linearly() {
        let h = ramp();
        assert!((h.interpolate(0.25, 0).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(h.interpolate(0.0, 0).unwrap(), 0.0);
        assert_eq!(h.interpolate(1.0, 0).unwrap(), 10.0);
    }

    #[test]
    fn gaps_are_errors() {
        let h = ramp();
        assert!(matches!(h.interpolate(-0.5, 0), Err(OperatorError::HistoryGap { .. })));
        assert!(matches!(h.interpolate(1.5, 0), Err(OperatorError::HistoryGap { .. })));
        assert_eq!(SampleHistory::new(1).interpolate(0.0, 0), Err(OperatorError::NoSamples));
    }

    #[test]
    fn tentative_tail() {
        let h = ramp();
        let v = h.interpolate_with_tail(1.05, 0, Some((1.1, 20.0))).unwrap();
        assert!((v - 15.0).abs() < 1e-9);
        assert_eq!(h.interpolate_with_tail(1.1, 0, Some((1.1, 20.0))).unwrap(), 20.0);
        assert!(h.interpolate_with_tail(1.2, 0, Some((1.1, 20.0))).is_err());
    }

    #[test]
    fn rejects_time_going_backwards() {
        let mut h = ramp();
        assert!(matches!(h.push(1.0, &[0.0]), Err(OperatorError::NonIncreasingTime { .. })));
    }
}
