//! Funnel functions `φ`, the performance funnel `{(t, e) : φ(t)‖e‖ < 1}` and
//! the funnel gain `k = 1 / (1 − φ²‖e‖²)`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jets::{Jet, JetError};

/// Default threshold below which the gain denominator counts as a boundary hit.
pub const DEFAULT_GAIN_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunnelError {
    #[error("invalid funnel parameter: {0}")]
    InvalidParameter(String),
    #[error("funnel function supports derivatives up to order {max}, {requested} requested")]
    UnsupportedOrder { requested: usize, max: usize },
    #[error("evaluated at negative time {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// The gain denominator `1 − φ²‖e‖²` fell below the guard.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("funnel violation: 1 - phi^2 |e|^2 = {denominator:e} below guard {guard:e}")]
pub struct FunnelViolation {
    pub denominator: f64,
    pub guard: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error(transparent)]
    Violation(#[from] FunnelViolation),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Derivative callback for the general form: `(t, j) ↦ φ^{(j)}(t)`.
pub type DerivativeFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FunnelFunction {
    /// `φ(t) = (a e^{−bt} + c)^{−1}` with `a ≥ 0`, `b > 0`, `c > 0`.
    ExpShift { a: f64, b: f64, c: f64 },
    /// `φ ≡ 1/λ`: a tube of constant radius `λ`.
    Const { lambda: f64 },
    /// User-provided analytic derivatives up to `max_order`.
    General { derivs: DerivativeFn, max_order: usize },
}

impl fmt::Debug for FunnelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExpShift { a, b, c } => write!(f, "ExpShift {{ a: {a}, b: {b}, c: {c} }}"),
            Self::Const { lambda } => write!(f, "Const {{ lambda: {lambda} }}"),
            Self::General { max_order, .. } => write!(f, "General {{ max_order: {max_order} }}"),
        }
    }
}

impl FunnelFunction {
    pub fn exp_shift(a: f64, b: f64, c: f64) -> Result<Self, FunnelError> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(FunnelError::InvalidParameter(format!("expshift needs finite a >= 0, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(FunnelError::InvalidParameter(format!("expshift needs b > 0, got {b}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(FunnelError::InvalidParameter(format!("expshift needs c > 0, got {c}")));
        }
        Ok(Self::ExpShift { a, b, c })
    }

    pub fn constant(lambda: f64) -> Result<Self, FunnelError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(FunnelError::InvalidParameter(format!("const funnel needs lambda > 0, got {lambda}")));
        }
        Ok(Self::Const { lambda })
    }

    pub fn general(derivs: DerivativeFn, max_order: usize) -> Self {
        Self::General { derivs, max_order }
    }

    /// Highest derivative order available; `None` means unbounded.
    pub fn max_order(&self) -> Option<usize> {
        match self {
            Self::General { max_order, .. } => Some(*max_order),
            _ => None,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::ExpShift { a, b, c } => 1.0 / (a * (-b * t).exp() + c),
            Self::Const { lambda } => 1.0 / lambda,
            Self::General { derivs, .. } => derivs(t, 0),
        }
    }

    /// Funnel radius `1/φ(t)`; infinite where `φ(t) = 0`.
    pub fn radius(&self, t: f64) -> f64 {
        1.0 / self.value(t)
    }

    /// `(φ(t), φ'(t), …, φ^{(k)}(t))` as a scalar jet.
    pub fn jet(&self, t: f64, k: usize) -> Result<Jet, FunnelError> {
        if t < 0.0 {
            return Err(FunnelError::NegativeTime(t));
        }
        match self {
            Self::ExpShift { a, b, c } => {
                // φ = 1/g with g = a e^{-bt} + c, g^{(j)} = a (-b)^j e^{-bt}.
                let decay = a * (-b * t).exp();
                let mut g = Vec::with_capacity(k + 1);
                g.push(decay + c);
                let mut d = decay;
                for _ in 0..k {
                    d *= -b;
                    g.push(d);
                }
                Ok(Jet::scalar(&g)?.reciprocal()?)
            }
            Self::Const { lambda } => Ok(Jet::constant(&[1.0 / lambda], k)),
            Self::General { derivs, max_order } => {
                if k > *max_order {
                    return Err(FunnelError::UnsupportedOrder { requested: k, max: *max_order });
                }
                let c: Vec<f64> = (0..=k).map(|j| derivs(t, j)).collect();
                Ok(Jet::scalar(&c)?)
            }
        }
    }
}

/// `1 − φ(t)‖e‖`; positive iff `(t, e)` lies inside the funnel.
pub fn funnel_margin(phi: &FunnelFunction, t: f64, e: &[f64]) -> f64 {
    1.0 - phi.value(t) * norm(e)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gain jet `k = 1/(1 − φ²‖e‖²)` at the common order of `phi` and `e`.
pub fn gain(phi: &Jet, e: &Jet, guard: f64) -> Result<Jet, GainError> {
    let phi2 = phi.mul(phi)?;
    let denom = Jet::constant(&[1.0], phi2.order()).sub(&phi2.mul(&e.sqnorm())?)?;
    let d0 = denom.scalar_coeff(0);
    // Negated comparison also rejects NaN.
    if !(d0 >= guard) {
        return Err(FunnelViolation { denominator: d0, guard }.into());
    }
    Ok(denom.reciprocal()?)
}

/// The tuple `(φ_0, …, φ_{r−1})`, where `φ_i` must provide `r − i` derivatives.
#[derive(Clone, Debug)]
pub struct FunnelStack {
    functions: Vec<FunnelFunction>,
}

impl FunnelStack {
    pub fn new(functions: Vec<FunnelFunction>) -> Result<Self, FunnelError> {
        if functions.is_empty() {
            return Err(FunnelError::InvalidParameter("funnel stack needs at least one function".into()));
        }
        let r = functions.len();
        for (i, f) in functions.iter().enumerate() {
            if let Some(max) = f.max_order() {
                if max < r - i {
                    return Err(FunnelError::UnsupportedOrder { requested: r - i, max });
                }
            }
        }
        Ok(Self { functions })
    }

    /// The same funnel function on every stage.
    pub fn uniform(phi: FunnelFunction, r: usize) -> Result<Self, FunnelError> {
        Self::new(vec![phi; r])
    }

    pub fn relative_degree(&self) -> usize {
        self.functions.len()
    }

    pub fn get(&self, i: usize) -> &FunnelFunction {
        &self.functions[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunnelFunction> {
        self.functions.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sec4() -> FunnelFunction {
        FunnelFunction::exp_shift(2.0, 2.0, 0.1).unwrap()
    }

    #[test]
    fn exp_shift_value_and_slope() {
        let j = sec4().jet(0.0, 1).unwrap();
        assert!((j.scalar_coeff(0) - 1.0 / 2.1).abs() < 1e-15);
        assert!((j.scalar_coeff(1) - 4.0 / (2.1 * 2.1)).abs() < 1e-15);
        assert!((j.scalar_coeff(1) - 0.907029).abs() < 1e-6);
    }

    #[test]
    fn const_jet() {
        let j = FunnelFunction::constant(5.0).unwrap().jet(3.0, 2).unwrap();
        assert_eq!(j.scalar_coeffs(), &[0.2, 0.0, 0.0]);
    }

    #[test]
    fn parameter_validation() {
        assert!(FunnelFunction::exp_shift(-1.0, 1.0, 1.0).is_err());
        assert!(FunnelFunction::exp_shift(1.0, 0.0, 1.0).is_err());
        assert!(FunnelFunction::exp_shift(1.0, 1.0, 0.0).is_err());
        assert!(FunnelFunction::exp_shift(f64::INFINITY, 1.0, 1.0).is_err());
        assert!(FunnelFunction::constant(0.0).is_err());
    }

    #[test]
    fn general_form_order_limit() {
        let phi = FunnelFunction::general(
            Arc::new(|t, j| {
                if j == 0 {
                    t
                } else if j == 1 {
                    1.0
                } else {
                    0.0
                }
            }),
            1,
        );
        assert_eq!(phi.jet(2.0, 1).unwrap().scalar_coeffs(), &[2.0, 1.0]);
        assert_eq!(phi.jet(2.0, 2), Err(FunnelError::UnsupportedOrder { requested: 2, max: 1 }));
        // phi(0) = 0 is an infinite initial funnel.
        assert_eq!(funnel_margin(&phi, 0.0, &[1e6]), 1.0);
        assert!(FunnelStack::new(vec![phi.clone(), phi.clone()]).is_err());
        assert!(FunnelStack::new(vec![phi]).is_ok());
    }

    #[test]
    fn margins() {
        let half = FunnelFunction::constant(2.0).unwrap();
        assert_eq!(funnel_margin(&half, 1.0, &[0.6, 0.8]), 0.5);
        assert_eq!(funnel_margin(&half, 1.0, &[0.0]), 1.0);
        let m = funnel_margin(&sec4(), 0.0, &[1.0]);
        assert!((m - (1.0 - 1.0 / 2.1)).abs() < 1e-15);
        assert!((m - 0.5238).abs() < 1e-4);
    }

    #[test]
    fn gain_examples() {
        let phi = Jet::constant(&[2.0], 2);
        let k = gain(&phi, &Jet::zeros(1, 2), DEFAULT_GAIN_GUARD).unwrap();
        assert_eq!(k.scalar_coeffs(), &[1.0, 0.0, 0.0]);
        let k = gain(&Jet::scalar(&[2.0]).unwrap(), &Jet::scalar(&[0.25]).unwrap(), DEFAULT_GAIN_GUARD).unwrap();
        assert!((k.scalar_coeff(0) - 4.0 / 3.0).abs() < 1e-15);
        let edge = gain(&Jet::scalar(&[2.0]).unwrap(), &Jet::scalar(&[0.5]).unwrap(), DEFAULT_GAIN_GUARD);
        assert!(matches!(edge, Err(GainError::Violation(_))));
        let outside = gain(&Jet::scalar(&[2.0]).unwrap(), &Jet::scalar(&[0.7]).unwrap(), 0.0);
        assert!(outside.is_err());
    }

    #[test]
    fn gain_derivatives_follow_from_phi_when_error_vanishes() {
        // e ≡ 0 ⇒ k ≡ 1 regardless of how φ moves.
        let phi = sec4().jet(0.3, 2).unwrap();
        let k = gain(&phi, &Jet::zeros(1, 2), DEFAULT_GAIN_GUARD).unwrap();
        assert_eq!(k.scalar_coeffs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_shift_radius_bounded_below_by_c() {
        let f = sec4();
        for i in 0..=400 {
            let t = i as f64 * 0.05;
            assert!(f.radius(t) >= 0.1);
            assert!(f.value(t) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn margin_decreases_in_error_norm(t in 0.0..20.0f64, e1 in 0.0..5.0f64, e2 in 0.0..5.0f64) {
            let f = sec4();
            prop_assert_eq!(funnel_margin(&f, t, &[0.0]), 1.0);
            if e1 < e2 {
                prop_assert!(funnel_margin(&f, t, &[e1]) > funnel_margin(&f, t, &[e2]));
            }
        }

        #[test]
        fn gain_at_least_one(t in 0.0..10.0f64, frac in 0.0..0.999f64) {
            let f = sec4();
            let e = frac * f.radius(t);
            let k = gain(&f.jet(t, 0).unwrap(), &Jet::scalar(&[e]).unwrap(), DEFAULT_GAIN_GUARD).unwrap();
            prop_assert!(k.scalar_coeff(0) >= 1.0);
            if e == 0.0 { prop_assert_eq!(k.scalar_coeff(0), 1.0); } else { prop_assert!(k.scalar_coeff(0) > 1.0); }
        }
    }
}
