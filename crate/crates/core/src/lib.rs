//! Funnel control of systems with known relative degree whose internal
//! dynamics are causal operators: convolutions with measures, transport
//! equations, finite-dimensional linear blocks and compositions thereof.
//!
//! - [`jets`]: truncated time-derivative arithmetic.
//! - [`funnel`]: funnel functions, margins and gains.
//! - [`operators`]: internal-dynamics realizations and empirical probes.
//! - [`controller`]: the controller recursion and reference signals.
//! - [`sim`]: closed-loop integration, traces and run verification.

// `!(x >= lo)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod funnel;
pub mod jets;
pub mod operators;
pub mod sim;

pub use controller::{
    controller_eval, reference_jet, ControllerConfig, ControllerError, ControllerOutput, RefComponent, ReferenceSignal,
};
pub use funnel::{
    funnel_margin, gain, FunnelError, FunnelFunction, FunnelStack, FunnelViolation, GainError, DEFAULT_GAIN_GUARD,
};
pub use jets::{Jet, JetError};
pub use operators::{
    bi_transform, Atom, ByrnesIsidoriForm, ComposedOperator, ConvolutionOperator, Density, DensityProfile, GridDensity,
    InternalOperator, LinearTriple, LtiInternal, Measure, ObservationMap, OperatorError, Passthrough, TransportPde,
    ZeroOperator,
};
pub use sim::{
    simulate, verify_run, Disturbance, Drift, GainMap, Integrator, Plant, RunReport, Scenario, SimError, SimRun,
    TraceRecord, VerificationVerdict, VerifyConfig,
};
