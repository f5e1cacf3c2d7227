//! The funnel controller
//!
//! ```text
//! e_0 = y − y_ref,   e_{i+1} = ė_i + k_i e_i,   k_i = 1/(1 − φ_i²‖e_i‖²),
//! u = −k_{r−1} e_{r−1}.
//! ```
//!
//! The derivatives `ė_i` are resolved on jets: `e_0` enters with `r − 1`
//! derivatives and every stage consumes one.

use std::fmt;

use thiserror::Error;

use crate::funnel::{gain, DerivativeFn, FunnelError, FunnelStack, FunnelViolation, GainError, DEFAULT_GAIN_GUARD};
use crate::jets::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("stage {stage}: {violation}")]
    Violation { stage: usize, violation: FunnelViolation },
    #[error("error jet has order {got}, relative degree {r} needs order {}", r - 1)]
    OrderMismatch { r: usize, got: usize },
    #[error("reference has {got} components, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("reference component supports derivatives up to order {max}, {requested} requested")]
    UnsupportedOrder { requested: usize, max: usize },
    #[error(transparent)]
    Funnel(#[from] FunnelError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Clone, Debug)]
pub struct ControllerConfig {
    pub funnels: FunnelStack,
    /// Gain guard `ε_k`: a stage fails once `1 − φ_i²‖e_i‖² < ε_k`.
    pub guard: f64,
}

impl ControllerConfig {
    pub fn new(funnels: FunnelStack) -> Self {
        Self { funnels, guard: DEFAULT_GAIN_GUARD }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn relative_degree(&self) -> usize {
        self.funnels.relative_degree()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerOutput {
    pub u: Vec<f64>,
    /// Stage errors `e_0, …, e_{r−1}` (values).
    pub e: Vec<Vec<f64>>,
    /// Stage gains `k_0, …, k_{r−1}` (values).
    pub k: Vec<f64>,
}

/// Evaluates the controller at `t` for the error jet `(e, ė, …, e^{(r−1)})`.
pub fn controller_eval(cfg: &ControllerConfig, t: f64, e0: &Jet) -> Result<ControllerOutput, ControllerError> {
    let r = cfg.relative_degree();
    if e0.order() + 1 < r {
        return Err(ControllerError::OrderMismatch { r, got: e0.order() });
    }
    let mut e = e0.truncate(r - 1);
    let mut stages_e = Vec::with_capacity(r);
    let mut stages_k = Vec::with_capacity(r);
    for i in 0..r {
        let order = r - 1 - i;
        let phi = cfg.funnels.get(i).jet(t, order)?;
        let k = gain(&phi, &e, cfg.guard).map_err(|err| match err {
            GainError::Violation(violation) => ControllerError::Violation { stage: i, violation },
            GainError::Jet(j) => ControllerError::Jet(j),
        })?;
        stages_e.push(e.value().to_vec());
        stages_k.push(k.scalar_coeff(0));
        if let Some(de) = e.derivative() {
            e = de.add(&k.scale_vector(&e)?)?;
        }
    }
    let k_last = stages_k[r - 1];
    let u = stages_e[r - 1].iter().map(|x| -k_last * x).collect();
    Ok(ControllerOutput { u, e: stages_e, k: stages_k })
}

/// One component of a reference signal.
#[derive(Clone)]
pub enum RefComponent {
    /// `amp · cos(ω t + phase)`.
    Cos {
        amp: f64,
        omega: f64,
        phase: f64,
    },
    /// `Σ c_i tⁱ`.
    Poly {
        coeffs: Vec<f64>,
    },
    Const {
        value: f64,
    },
    /// Analytic derivatives `(t, j) ↦ y_ref^{(j)}(t)` up to `max_order`.
    General {
        derivs: DerivativeFn,
        max_order: usize,
    },
}

impl fmt::Debug for RefComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cos { amp, omega, phase } => write!(f, "Cos {{ amp: {amp}, omega: {omega}, phase: {phase} }}"),
            Self::Poly { coeffs } => write!(f, "Poly {{ coeffs: {coeffs:?} }}"),
            Self::Const { value } => write!(f, "Const {{ value: {value} }}"),
            Self::General { max_order, .. } => write!(f, "General {{ max_order: {max_order} }}"),
        }
    }
}

impl RefComponent {
    fn derivative(&self, t: f64, j: usize) -> Result<f64, ControllerError> {
        Ok(match self {
            Self::Cos { amp, omega, phase } => {
                amp * omega.powi(j as i32) * (omega * t + phase + j as f64 * std::f64::consts::FRAC_PI_2).cos()
            }
            Self::Poly { coeffs } => {
                coeffs.iter().enumerate().skip(j).map(|(i, c)| c * falling(i, j) * t.powi((i - j) as i32)).sum()
            }
            Self::Const { value } => {
                if j == 0 {
                    *value
                } else {
                    0.0
                }
            }
            Self::General { derivs, max_order } => {
                if j > *max_order {
                    return Err(ControllerError::UnsupportedOrder { requested: j, max: *max_order });
                }
                derivs(t, j)
            }
        })
    }
}

// i (i−1) … (i−j+1)
fn falling(i: usize, j: usize) -> f64 {
    (0..j).map(|s| (i - s) as f64).product()
}

/// `y_ref: ℝ≥0 → ℝ^m`, one component per output.
#[derive(Clone, Debug)]
pub struct ReferenceSignal {
    pub components: Vec<RefComponent>,
}

impl ReferenceSignal {
    pub fn new(components: Vec<RefComponent>) -> Self {
        Self { components }
    }

    pub fn scalar(component: RefComponent) -> Self {
        Self { components: vec![component] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.derivative(t, 0).unwrap_or(f64::NAN)).collect()
    }
}

/// `(y_ref(t), ẏ_ref(t), …, y_ref^{(k)}(t))`.
pub fn reference_jet(reference: &ReferenceSignal, t: f64, k: usize) -> Result<Jet, ControllerError> {
    let coeffs = (0..=k)
        .map(|j| reference.components.iter().map(|c| c.derivative(t, j)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Jet::new(coeffs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funnel::FunnelFunction;

    fn constant_funnels(r: usize) -> ControllerConfig {
        ControllerConfig::new(FunnelStack::uniform(FunnelFunction::constant(1.0).unwrap(), r).unwrap())
    }

    #[test]
    fn relative_degree_one() {
        let out = controller_eval(&constant_funnels(1), 0.0, &Jet::new(vec![vec![0.5]]).unwrap()).unwrap();
        assert!((out.u[0] + 2.0 / 3.0).abs() < 1e-15);
        assert!((out.k[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_error_fixed_point() {
        for r in 1..=4 {
            let out = controller_eval(&constant_funnels(r), 1.0, &Jet::zeros(2, r - 1)).unwrap();
            assert!(out.k.iter().all(|&k| k == 1.0));
            assert!(out.e.iter().flatten().all(|&e| e == 0.0));
            assert_eq!(out.u, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn relative_degree_two_by_hand() {
        let out = controller_eval(&constant_funnels(2), 0.0, &Jet::scalar(&[0.1, 0.0]).unwrap()).unwrap();
        let e1 = 0.1 / 0.99;
        assert!((out.e[1][0] - e1).abs() < 1e-15);
        let u = -e1 / (1.0 - e1 * e1);
        assert!((out.u[0] - u).abs() < 1e-15);
        assert!((out.u[0] + 0.102051).abs() < 1e-6);
    }

    #[test]
    fn violation_names_the_stage() {
        let cfg = constant_funnels(2);
        match controller_eval(&cfg, 0.0, &Jet::scalar(&[1.0, 0.0]).unwrap()) {
            Err(ControllerError::Violation { stage: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        // e_0 inside, e_1 = ė_0 + k_0 e_0 outside.
        match controller_eval(&cfg, 0.0, &Jet::scalar(&[0.1, 2.0]).unwrap()) {
            Err(ControllerError::Violation { stage: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_jet_rejected() {
        let e = controller_eval(&constant_funnels(3), 0.0, &Jet::scalar(&[0.1, 0.0]).unwrap());
        assert!(matches!(e, Err(ControllerError::OrderMismatch { r: 3, got: 1 })));
    }

    #[test]
    fn reference_jets() {
        let cos = ReferenceSignal::scalar(RefComponent::Cos { amp: 1.0, omega: 1.0, phase: 0.0 });
        let j = reference_jet(&cos, 0.0, 2).unwrap();
        assert!((j.scalar_coeff(0) - 1.0).abs() < 1e-15);
        assert!(j.scalar_coeff(1).abs() < 1e-15);
        assert!((j.scalar_coeff(2) + 1.0).abs() < 1e-15);

        let poly = ReferenceSignal::scalar(RefComponent::Poly { coeffs: vec![0.0, 0.0, 1.0] });
        assert_eq!(reference_jet(&poly, 3.0, 2).unwrap().scalar_coeffs(), &[9.0, 6.0, 2.0]);

        let c = ReferenceSignal::scalar(RefComponent::Const { value: 2.5 });
        assert_eq!(reference_jet(&c, 7.0, 3).unwrap().scalar_coeffs(), &[2.5, 0.0, 0.0, 0.0]);

        let g = ReferenceSignal::scalar(RefComponent::General { derivs: std::sync::Arc::new(|t, _| t), max_order: 1 });
        assert!(matches!(reference_jet(&g, 1.0, 2), Err(ControllerError::UnsupportedOrder { .. })));
    }
}
