//! Truncated time-derivative jets.
//!
//! A [`Jet`] of order `k` carries a signal value in `ℝ^m` together with its
//! first `k` time derivatives. Coefficients are stored as derivatives (not
//! Taylor coefficients), so products follow the Leibniz rule with binomial
//! weights. Mixed-order arithmetic truncates to the smaller order.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operation requires a scalar jet, got dimension {0}")]
    NotScalar(usize),
    #[error("reciprocal of a jet with zero value")]
    ZeroDivisor,
    #[error("jet needs at least one coefficient of dimension >= 1")]
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    dim: usize,
    // (order + 1) * dim entries, derivative j at [j * dim .. (j + 1) * dim].
    coeffs: Vec<f64>,
}

/// `C(n, k)` as a float; `n` stays tiny (jet orders) so the multiplicative form is exact.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

impl Jet {
    /// Builds a jet from derivative vectors `[value, first, second, ...]`.
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self, JetError> {
        let dim = coeffs.first().map(Vec::len).ok_or(JetError::Empty)?;
        if dim == 0 {
            return Err(JetError::Empty);
        }
        let mut flat = Vec::with_capacity(dim * coeffs.len());
        for c in &coeffs {
            if c.len() != dim {
                return Err(JetError::DimensionMismatch { left: dim, right: c.len() });
            }
            flat.extend_from_slice(c);
        }
        Ok(Self { dim, coeffs: flat })
    }

    pub fn scalar(coeffs: &[f64]) -> Result<Self, JetError> {
        if coeffs.is_empty() {
            return Err(JetError::Empty);
        }
        Ok(Self { dim: 1, coeffs: coeffs.to_vec() })
    }

    pub fn zeros(dim: usize, order: usize) -> Self {
        assert!(dim > 0, "jet dimension must be positive");
        Self { dim, coeffs: vec![0.0; dim * (order + 1)] }
    }

    /// A signal that is constant in time: all derivatives vanish.
    pub fn constant(value: &[f64], order: usize) -> Self {
        let mut jet = Self::zeros(value.len(), order);
        jet.coeffs[..value.len()].copy_from_slice(value);
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() / self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    /// The `j`-th derivative.
    pub fn coeff(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn value(&self) -> &[f64] {
        self.coeff(0)
    }

    /// Derivative `j` of a scalar jet. Panics on vector jets.
    pub fn scalar_coeff(&self, j: usize) -> f64 {
        assert!(self.is_scalar(), "scalar_coeff on a vector jet");
        self.coeffs[j]
    }

    /// Scalar derivative stack as a slice. Panics on vector jets.
    pub fn scalar_coeffs(&self) -> &[f64] {
        assert!(self.is_scalar(), "scalar_coeffs on a vector jet");
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        Jet { dim: self.dim, coeffs: self.coeffs[..(order + 1) * self.dim].to_vec() }
    }

    /// Jet of the time derivative: drops the value and shifts every coefficient
    /// down by one. Returns `None` for order-0 jets.
    pub fn derivative(&self) -> Option<Jet> {
        if self.order() == 0 {
            return None;
        }
        Some(Jet { dim: self.dim, coeffs: self.coeffs[self.dim..].to_vec() })
    }

    fn check_dims(&self, other: &Jet) -> Result<(), JetError> {
        if self.dim != other.dim {
            return Err(JetError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet, JetError> {
        self.check_dims(other)?;
        let len = (self.order().min(other.order()) + 1) * self.dim;
        let coeffs = self.coeffs[..len].iter().zip(&other.coeffs[..len]).map(|(&a, &b)| f(a, b)).collect();
        Ok(Jet { dim: self.dim, coeffs })
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    /// Leibniz product of two scalar jets.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        if !self.is_scalar() {
            return Err(JetError::NotScalar(self.dim));
        }
        if !other.is_scalar() {
            return Err(JetError::NotScalar(other.dim));
        }
        self.scale_vector(other)
    }

    /// Leibniz product of this scalar jet with a jet of any dimension.
    pub fn scale_vector(&self, v: &Jet) -> Result<Jet, JetError> {
        if !self.is_scalar() {
            return Err(JetError::NotScalar(self.dim));
        }
        let order = self.order().min(v.order());
        let dim = v.dim;
        let mut coeffs = vec![0.0; (order + 1) * dim];
        for j in 0..=order {
            for i in 0..=j {
                let w = binomial(j, i) * self.coeffs[i];
                let src = v.coeff(j - i);
                for (dst, s) in coeffs[j * dim..(j + 1) * dim].iter_mut().zip(src) {
                    *dst += w * s;
                }
            }
        }
        Ok(Jet { dim, coeffs })
    }

    /// Jet of `1 / a(t)` via the recursive division formula
    /// `r_j = -(1/a_0) Σ_{i=1..j} C(j,i) a_i r_{j-i}`.
    pub fn reciprocal(&self) -> Result<Jet, JetError> {
        if !self.is_scalar() {
            return Err(JetError::NotScalar(self.dim));
        }
        let a = &self.coeffs;
        if a[0] == 0.0 {
            return Err(JetError::ZeroDivisor);
        }
        let inv0 = 1.0 / a[0];
        let mut r = Vec::with_capacity(a.len());
        r.push(inv0);
        for j in 1..a.len() {
            let acc: f64 = (1..=j).map(|i| binomial(j, i) * a[i] * r[j - i]).sum();
            r.push(-inv0 * acc);
        }
        Ok(Jet { dim: 1, coeffs: r })
    }

    /// Scalar jet of `<a(t), a(t)>`.
    pub fn sqnorm(&self) -> Jet {
        let order = self.order();
        let mut out = vec![0.0; order + 1];
        for (j, slot) in out.iter_mut().enumerate() {
            for i in 0..=j {
                let dot: f64 = self.coeff(i).iter().zip(self.coeff(j - i)).map(|(x, y)| x * y).sum();
                *slot += binomial(j, i) * dot;
            }
        }
        Jet { dim: 1, coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[f64]) -> Jet {
        Jet::scalar(c).unwrap()
    }

    #[test]
    fn add_is_componentwise() {
        assert_eq!(s(&[1.0, 2.0]).add(&s(&[3.0, 4.0])).unwrap(), s(&[4.0, 6.0]));
        let a = s(&[1.5, -2.0, 0.25]);
        assert_eq!(a.add(&Jet::zeros(1, 2)).unwrap(), a);
    }

    #[test]
    fn mixed_order_truncates() {
        let sum = s(&[1.0, 2.0, 3.0]).add(&s(&[1.0, 1.0])).unwrap();
        assert_eq!(sum.order(), 1);
        assert_eq!(sum, s(&[2.0, 3.0]));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let v = Jet::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(s(&[1.0]).add(&v), Err(JetError::DimensionMismatch { .. })));
    }

    #[test]
    fn leibniz_product() {
        assert_eq!(s(&[1.0, 2.0, 3.0]).mul(&s(&[4.0, 5.0, 6.0])).unwrap(), s(&[4.0, 13.0, 38.0]));
        let a = s(&[0.3, -1.2, 7.0]);
        assert_eq!(a.mul(&s(&[1.0, 0.0, 0.0])).unwrap(), a);
        assert_eq!(s(&[0.0, 1.0]).mul(&s(&[0.0, 1.0])).unwrap(), s(&[0.0, 0.0]));
    }

    #[test]
    fn mul_rejects_vectors() {
        let v = Jet::new(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(s(&[1.0]).mul(&v), Err(JetError::NotScalar(2)));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(s(&[2.0, 1.0]).reciprocal().unwrap(), s(&[0.5, -0.25]));
        assert_eq!(s(&[1.0, 0.0, 0.0]).reciprocal().unwrap(), s(&[1.0, 0.0, 0.0]));
        // f = 4 + 4t + t^2: (1/f)' = -f'/f^2, (1/f)'' = 2f'^2/f^3 - f''/f^2.
        let r = s(&[4.0, 4.0, 2.0]).reciprocal().unwrap();
        let expected = [0.25, -4.0 / 16.0, 2.0 * 16.0 / 64.0 - 2.0 / 16.0];
        for (got, want) in r.scalar_coeffs().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        assert_eq!(s(&[0.0, 1.0]).reciprocal(), Err(JetError::ZeroDivisor));
    }

    #[test]
    fn sqnorm_examples() {
        let a = Jet::new(vec![vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(a.sqnorm(), s(&[25.0, 0.0]));
        assert_eq!(s(&[1.0, 1.0]).sqnorm(), s(&[1.0, 2.0]));
        let b = Jet::new(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(b.sqnorm(), s(&[1.0, 0.0]));
    }

    #[test]
    fn derivative_shifts() {
        let a = s(&[1.0, 2.0, 3.0]);
        assert_eq!(a.derivative().unwrap(), s(&[2.0, 3.0]));
        assert!(s(&[1.0]).derivative().is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    fn jet3() -> impl Strategy<Value = Jet> {
        prop::collection::vec(-3.0..3.0f64, 4).prop_map(|c| Jet::scalar(&c).unwrap())
    }

    fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
        a.scalar_coeffs()
            .iter()
            .zip(b.scalar_coeffs())
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
    }

    proptest! {
        #[test]
        fn mul_commutes(a in jet3(), b in jet3()) {
            prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 1e-14));
        }

        #[test]
        fn mul_associates(a in jet3(), b in jet3(), c in jet3()) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(close(&left, &right, 1e-12));
        }

        #[test]
        fn reciprocal_is_an_involution(mut c in prop::collection::vec(-1.0..1.0f64, 4), v in 1.0..4.0f64) {
            c[0] = v;
            let a = Jet::scalar(&c).unwrap();
            let back = a.reciprocal().unwrap().reciprocal().unwrap();
            prop_assert!(close(&a, &back, 1e-12));
        }

        #[test]
        fn reciprocal_inverts_mul(mut c in prop::collection::vec(-1.0..1.0f64, 4), v in 0.5..4.0f64) {
            c[0] = v;
            let a = Jet::scalar(&c).unwrap();
            let one = a.mul(&a.reciprocal().unwrap()).unwrap();
            prop_assert!(close(&one, &Jet::constant(&[1.0], 3), 1e-12));
        }
    }
}
