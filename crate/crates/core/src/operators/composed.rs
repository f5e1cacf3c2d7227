//! `T(ζ)(t) = F(T̃(ζ)(t), S(x)(t), (Cx)(t))`: a memoryless or delayed
//! passthrough of the input combined with observations of inner dynamics.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{check_input, check_peek, check_time, InternalOperator, OperatorError, SampleHistory};

/// Pointwise map `ℝ^ℓ → ℝ^{q1}`.
pub type PointwiseFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Observation map `(z1, z2, z3) ↦ w`.
pub type ObservationFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// The `T̃` branch.
#[derive(Clone)]
pub enum Passthrough {
    /// `T̃(ζ)(t) = ζ(t)`.
    Identity,
    /// `T̃(ζ)(t) = ζ(t − h)`; needs samples back to `−h`.
    Delay { h: f64 },
    /// `T̃(ζ)(t) = f(ζ(t))` with `outputs` components.
    Pointwise { f: PointwiseFn, outputs: usize },
}

impl fmt::Debug for Passthrough {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::Delay { h } => write!(f, "Delay {{ h: {h} }}"),
            Self::Pointwise { outputs, .. } => write!(f, "Pointwise {{ outputs: {outputs} }}"),
        }
    }
}

#[derive(Clone)]
pub enum ObservationMap {
    /// `w = P z1 + M z2 + K z3`.
    Linear { pass: DMatrix<f64>, state: DMatrix<f64>, output: DMatrix<f64> },
    /// A `C¹` callback with `outputs` components.
    General { f: ObservationFn, outputs: usize },
}

impl fmt::Debug for ObservationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { pass, state, output } => write!(
                f,
                "Linear {{ pass: {}x{}, state: {}x{}, output: {}x{} }}",
                pass.nrows(),
                pass.ncols(),
                state.nrows(),
                state.ncols(),
                output.nrows(),
                output.ncols()
            ),
            Self::General { outputs, .. } => write!(f, "General {{ outputs: {outputs} }}"),
        }
    }
}

impl ObservationMap {
    fn outputs(&self) -> usize {
        match self {
            Self::Linear { pass, .. } => pass.nrows(),
            Self::General { outputs, .. } => *outputs,
        }
    }

    fn apply(&self, z1: &[f64], z2: &[f64], z3: &[f64]) -> Vec<f64> {
        match self {
            Self::Linear { pass, state, output } => {
                let w = pass * DVector::from_column_slice(z1)
                    + state * DVector::from_column_slice(z2)
                    + output * DVector::from_column_slice(z3);
                w.as_slice().to_vec()
            }
            Self::General { f, .. } => f(z1, z2, z3),
        }
    }
}

/// Composition of a passthrough, two optional inner operators (state
/// observation `S(x)` and output `Cx`) and an observation map.
#[derive(Clone, Debug)]
pub struct ComposedOperator {
    inputs: usize,
    passthrough: Passthrough,
    state_obs: Option<Box<dyn InternalOperator>>,
    output_obs: Option<Box<dyn InternalOperator>>,
    map: ObservationMap,
    history: SampleHistory,
}

impl ComposedOperator {
    pub fn new(
        inputs: usize,
        passthrough: Passthrough,
        state_obs: Option<Box<dyn InternalOperator>>,
        output_obs: Option<Box<dyn InternalOperator>>,
        map: ObservationMap,
    ) -> Result<Self, OperatorError> {
        let q1 = match &passthrough {
            Passthrough::Identity => inputs,
            Passthrough::Delay { h } => {
                if !(*h >= 0.0 && h.is_finite()) {
                    return Err(OperatorError::InvalidConfig(format!("delay must be >= 0, got {h}")));
                }
                inputs
            }
            Passthrough::Pointwise { outputs, .. } => *outputs,
        };
        for op in state_obs.iter().chain(output_obs.iter()) {
            if op.min_input_dim() > inputs {
                return Err(OperatorError::InvalidConfig(format!(
                    "inner operator '{}' needs {} inputs, composition has {inputs}",
                    op.name(),
                    op.min_input_dim()
                )));
            }
        }
        if let ObservationMap::Linear { pass, state, output } = &map {
            let q2 = state_obs.as_ref().map_or(0, |o| o.output_dim());
            let q3 = output_obs.as_ref().map_or(0, |o| o.output_dim());
            let q = pass.nrows();
            if pass.ncols() != q1 || state.shape() != (q, q2) || output.shape() != (q, q3) {
                return Err(OperatorError::InvalidConfig(format!(
                    "observation map shapes {:?}, {:?}, {:?} do not fit (q1, q2, q3) = ({q1}, {q2}, {q3})",
                    pass.shape(),
                    state.shape(),
                    output.shape()
                )));
            }
        }
        Ok(Self { inputs, passthrough, state_obs, output_obs, map, history: SampleHistory::new(inputs) })
    }

    fn pass(&self, t: f64, zeta: &[f64], tentative: bool) -> Result<Vec<f64>, OperatorError> {
        let zeta = &zeta[..self.inputs];
        match &self.passthrough {
            Passthrough::Identity => Ok(zeta.to_vec()),
            Passthrough::Pointwise { f, .. } => Ok(f(zeta)),
            Passthrough::Delay { h } => (0..self.inputs)
                .map(|ch| {
                    let tail = tentative.then_some((t, zeta[ch]));
                    self.history.interpolate_with_tail(t - h, ch, tail)
                })
                .collect(),
        }
    }

    fn inner(
        op: &Option<Box<dyn InternalOperator>>,
        probe: impl Fn(&dyn InternalOperator) -> Result<Vec<f64>, OperatorError>,
    ) -> Result<Vec<f64>, OperatorError> {
        op.as_deref().map_or(Ok(Vec::new()), probe)
    }
}

impl InternalOperator for ComposedOperator {
    fn name(&self) -> &'static str {
        "composed"
    }

    fn min_input_dim(&self) -> usize {
        self.inputs
    }

    fn output_dim(&self) -> usize {
        self.map.outputs()
    }

    fn reset(&mut self) {
        self.history.clear();
        for op in self.state_obs.iter_mut().chain(self.output_obs.iter_mut()) {
            op.reset();
        }
    }

    fn advance(&mut self, t: f64, zeta: &[f64]) -> Result<(), OperatorError> {
        check_input(zeta, self.inputs)?;
        check_time(self.history.last_time(), t)?;
        for op in self.state_obs.iter_mut().chain(self.output_obs.iter_mut()) {
            op.advance(t, zeta)?;
        }
        self.history.push(t, zeta)
    }

    fn output(&self) -> Result<Vec<f64>, OperatorError> {
        let t = self.history.last_time().ok_or(OperatorError::NoSamples)?;
        let zeta = self.history.last_value().ok_or(OperatorError::NoSamples)?;
        let z1 = self.pass(t, zeta, false)?;
        let z2 = Self::inner(&self.state_obs, |o| o.output())?;
        let z3 = Self::inner(&self.output_obs, |o| o.output())?;
        Ok(self.map.apply(&z1, &z2, &z3))
    }

    fn peek(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_input(zeta, self.inputs)?;
        let committed = check_peek(self.history.last_time(), t)?;
        if t == committed {
            return self.output();
        }
        let z1 = self.pass(t, zeta, true)?;
        let z2 = Self::inner(&self.state_obs, |o| o.peek(t, zeta))?;
        let z3 = Self::inner(&self.output_obs, |o| o.peek(t, zeta))?;
        Ok(self.map.apply(&z1, &z2, &z3))
    }

    fn committed_time(&self) -> Option<f64> {
        self.history.last_time()
    }

    fn boxed_clone(&self) -> Box<dyn InternalOperator> {
        Box::new(self.clone())
    }

    fn is_linear(&self) -> bool {
        matches!(self.map, ObservationMap::Linear { .. })
            && !matches!(self.passthrough, Passthrough::Pointwise { .. })
            && self.state_obs.iter().chain(self.output_obs.iter()).all(|o| o.is_linear())
    }
}
