//! `w(t) = (𝔥 ∗ y)(t) = ∫₀ᵗ y(t − s) d𝔥(s)` over a stored input history.

use super::measure::{Measure, DEFAULT_PANELS_PER_UNIT};
use super::{check_input, check_peek, InternalOperator, OperatorError, SampleHistory};

/// Convolution of one input channel with a measure.
///
/// Atoms are applied exactly to the piecewise-linear interpolant of the
/// sampled input; the density part is integrated by composite Simpson. All
/// samples since the first one are retained, since measures with unbounded
/// support see the whole past.
#[derive(Clone, Debug)]
pub struct ConvolutionOperator {
    measure: Measure,
    channel: usize,
    panels_per_unit: usize,
    history: SampleHistory,
}

impl ConvolutionOperator {
    pub fn new(measure: Measure, channel: usize) -> Self {
        Self { measure, channel, panels_per_unit: DEFAULT_PANELS_PER_UNIT, history: SampleHistory::new(1) }
    }

    /// Panels per unit of the integration variable (`σ` for singular densities).
    pub fn with_panels_per_unit(mut self, panels: usize) -> Self {
        self.panels_per_unit = panels.max(1);
        self
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn history(&self) -> &SampleHistory {
        &self.history
    }

    /// `(𝔥 ∗ ŷ)(t)` from the committed samples.
    pub fn convolve(&self, t: f64) -> Result<f64, OperatorError> {
        self.convolve_with_tail(t, None)
    }

    fn convolve_with_tail(&self, t: f64, tail: Option<(f64, f64)>) -> Result<f64, OperatorError> {
        let start = self.history.first_time().ok_or(OperatorError::NoSamples)?;
        // Probing both ends covers every point of [0, t] the integral touches.
        let lo = self.history.interpolate_with_tail(0.0_f64.min(t), 0, tail)?;
        let hi = self.history.interpolate_with_tail(t, 0, tail)?;
        if t < 0.0 {
            return Ok(0.0);
        }
        let y = |tau: f64| {
            if tau <= 0.0 && start <= 0.0 {
                return lo;
            }
            if tau == t {
                return hi;
            }
            // In range by the coverage check above.
            self.history.interpolate_with_tail(tau, 0, tail).unwrap_or(f64::NAN)
        };
        let mut acc = 0.0;
        for atom in self.measure.atoms().iter().take_while(|a| a.location <= t) {
            acc += atom.weight * y(t - atom.location);
        }
        if let Some(density) = self.measure.density() {
            acc += density.integrate(0.0, t, self.panels_per_unit, |s| y(t - s));
        }
        Ok(acc)
    }
}

impl InternalOperator for ConvolutionOperator {
    fn name(&self) -> &'static str {
        "convolution"
    }

    fn min_input_dim(&self) -> usize {
        self.channel + 1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn reset(&mut self) {
        self.history.clear();
    }

    fn advance(&mut self, t: f64, zeta: &[f64]) -> Result<(), OperatorError> {
        check_input(zeta, self.channel + 1)?;
        self.history.push(t, &zeta[self.channel..=self.channel])
    }

    fn output(&self) -> Result<Vec<f64>, OperatorError> {
        let t = self.history.last_time().ok_or(OperatorError::NoSamples)?;
        Ok(vec![self.convolve(t)?])
    }

    fn peek(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_input(zeta, self.channel + 1)?;
        let committed = check_peek(self.history.last_time(), t)?;
        if t == committed {
            return self.output();
        }
        Ok(vec![self.convolve_with_tail(t, Some((t, zeta[self.channel])))?])
    }

    fn committed_time(&self) -> Option<f64> {
        self.history.last_time()
    }

    fn boxed_clone(&self) -> Box<dyn InternalOperator> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Atom, Density, DensityProfile};

    fn feed(op: &mut ConvolutionOperator, dt: f64, steps: usize, y: impl Fn(f64) -> f64) {
        for k in 0..=steps {
            let t = k as f64 * dt;
            op.advance(t, &[y(t)]).unwrap();
        }
    }

    #[test]
    fn dirac_at_zero_is_identity() {
        let mut op = ConvolutionOperator::new(Measure::dirac(0.0).unwrap(), 0);
        feed(&mut op, 0.01, 100, |t| t.sin());
        assert_eq!(op.convolve(1.0).unwrap(), op.history().interpolate(1.0, 0).unwrap());
        assert_eq!(op.output().unwrap()[0], op.history().last_value().unwrap()[0]);
    }

    #[test]
    fn dirac_delay_shifts_input() {
        let mut op = ConvolutionOperator::new(Measure::dirac(0.5).unwrap(), 0);
        feed(&mut op, 0.01, 200, |t| t.cos());
        assert_eq!(op.convolve(0.3).unwrap(), 0.0);
        let got = op.convolve(1.7).unwrap();
        assert!((got - op.history().interpolate(1.2, 0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn singular_density_closed_form() {
        // ∫₀¹ e^{-s}/√s ds = √π erf(1).
        let mut op = ConvolutionOperator::new(Measure::exp_sqrt(), 0);
        feed(&mut op, 0.01, 100, |_| 1.0);
        let want = std::f64::consts::PI.sqrt() * statrs::function::erf::erf(1.0);
        assert!((op.convolve(1.0).unwrap() - want).abs() < 1e-8);
        assert!((want - 1.49365).abs() < 1e-5);
    }

    #[test]
    fn peek_matches_commit() {
        let measure = Measure::new(
            vec![Atom { location: 0.0, weight: 0.5 }, Atom { location: 0.25, weight: -1.0 }],
            Some(Density::regular(DensityProfile::Exp { rate: 2.0 })),
        )
        .unwrap();
        let mut op = ConvolutionOperator::new(measure, 0);
        feed(&mut op, 0.05, 20, |t| 1.0 + t);
        let peeked = op.peek(1.05, &[2.05]).unwrap();
        op.advance(1.05, &[2.05]).unwrap();
        assert!((peeked[0] - op.output().unwrap()[0]).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        let op = ConvolutionOperator::new(Measure::exp_sqrt(), 0);
        assert_eq!(op.convolve(1.0), Err(OperatorError::NoSamples));
        let mut op = ConvolutionOperator::new(Measure::exp_sqrt(), 1);
        assert!(matches!(op.advance(0.0, &[1.0]), Err(OperatorError::InputDimension { .. })));
        op.advance(0.0, &[0.0, 1.0]).unwrap();
        assert!(matches!(op.convolve(2.0), Err(OperatorError::HistoryGap { .. })));
        assert!(matches!(op.peek(-1.0, &[0.0, 1.0]), Err(OperatorError::PeekInPast { .. })));
    }
}
