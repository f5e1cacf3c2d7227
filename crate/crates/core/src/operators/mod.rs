//! Causal operators realizing the internal dynamics `w = T(y, ẏ, …, y^{(r−1)})`.
//!
//! Every operator consumes the stacked output signal `ζ` as a strictly
//! increasing sequence of samples and exposes its output at the latest
//! committed sample. [`InternalOperator::peek`] evaluates the output at a
//! tentative later sample without committing it, which lets multi-stage
//! integrators query the operator inside a step without rewinding state.

mod composed;
mod convolution;
mod history;
mod lti;
mod measure;
mod normal_form;
pub mod probes;
mod transport;

use thiserror::Error;

pub use composed::{ComposedOperator, ObservationFn, ObservationMap, Passthrough, PointwiseFn};
pub use convolution::ConvolutionOperator;
pub use history::SampleHistory;
pub use lti::LtiInternal;
pub use measure::{Atom, Density, DensityProfile, GridDensity, Measure, DEFAULT_PANELS_PER_UNIT};
pub use normal_form::{bi_transform, ByrnesIsidoriForm, LinearTriple, DEFAULT_GAMMA_TOL};
pub use transport::TransportPde;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("history gap: queried t = {t} but samples cover [{start}, {end}]")]
    HistoryGap { t: f64, start: f64, end: f64 },
    #[error("no input sample has been committed yet")]
    NoSamples,
    #[error("sample times must increase strictly: {next} after {last}")]
    NonIncreasingTime { last: f64, next: f64 },
    #[error("peek at t = {t} is not after the committed time {committed}")]
    PeekInPast { t: f64, committed: f64 },
    #[error("input has {got} channels, operator needs at least {need}")]
    InputDimension { got: usize, need: usize },
    #[error("CFL violation: c dt / dxi = {courant} exceeds 1")]
    Cfl { courant: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid operator configuration: {0}")]
    InvalidConfig(String),
    #[error("no relative degree: <A^j b, c> vanishes below {tol:e} for all j < {n}")]
    NoRelativeDegree { n: usize, tol: f64 },
    #[error("density file: {0}")]
    DensityFile(String),
}

/// A causal operator advanced in time order.
pub trait InternalOperator: Send + Sync {
    /// Short identifier used in reports.
    fn name(&self) -> &'static str;

    /// Smallest accepted length of an input sample.
    fn min_input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Drops all committed samples and restores the initial state.
    fn reset(&mut self);

    /// Commits the input sample `ζ(t)`. Times must increase strictly.
    fn advance(&mut self, t: f64, zeta: &[f64]) -> Result<(), OperatorError>;

    /// Output at the latest committed time.
    fn output(&self) -> Result<Vec<f64>, OperatorError>;

    /// Output at `t >= committed time` if `ζ(t)` were the next sample.
    /// Leaves the operator untouched.
    fn peek(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>, OperatorError>;

    /// Latest committed sample time.
    fn committed_time(&self) -> Option<f64>;

    fn boxed_clone(&self) -> Box<dyn InternalOperator>;

    /// Whether `T(αζ₁ + βζ₂) = αT(ζ₁) + βT(ζ₂)` holds by construction.
    fn is_linear(&self) -> bool {
        true
    }
}

impl Clone for Box<dyn InternalOperator> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

impl std::fmt::Debug for dyn InternalOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InternalOperator({})", self.name())
    }
}

pub(crate) fn check_input(zeta: &[f64], need: usize) -> Result<(), OperatorError> {
    if zeta.len() < need {
        return Err(OperatorError::InputDimension { got: zeta.len(), need });
    }
    Ok(())
}

pub(crate) fn check_time(last: Option<f64>, next: f64) -> Result<(), OperatorError> {
    match last {
        Some(last) if !(next > last) => Err(OperatorError::NonIncreasingTime { last, next }),
        _ => Ok(()),
    }
}

pub(crate) fn check_peek(committed: Option<f64>, t: f64) -> Result<f64, OperatorError> {
    let committed = committed.ok_or(OperatorError::NoSamples)?;
    if t < committed {
        return Err(OperatorError::PeekInPast { t, committed });
    }
    Ok(committed)
}

/// `T ≡ 0` with `q` output channels.
#[derive(Clone, Debug)]
pub struct ZeroOperator {
    outputs: usize,
    last: Option<f64>,
}

impl ZeroOperator {
    pub fn new(outputs: usize) -> Self {
        Self { outputs, last: None }
    }
}

impl InternalOperator for ZeroOperator {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn min_input_dim(&self) -> usize {
        0
    }

    fn output_dim(&self) -> usize {
        self.outputs
    }

    fn reset(&mut self) {
        self.last = None;
    }

    fn advance(&mut self, t: f64, _zeta: &[f64]) -> Result<(), OperatorError> {
        check_time(self.last, t)?;
        self.last = Some(t);
        Ok(())
    }

    fn output(&self) -> Result<Vec<f64>, OperatorError> {
        self.last.ok_or(OperatorError::NoSamples)?;
        Ok(vec![0.0; self.outputs])
    }

    fn peek(&self, t: f64, _zeta: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_peek(self.last, t)?;
        Ok(vec![0.0; self.outputs])
    }

    fn committed_time(&self) -> Option<f64> {
        self.last
    }

    fn boxed_clone(&self) -> Box<dyn InternalOperator> {
        Box::new(self.clone())
    }
}
