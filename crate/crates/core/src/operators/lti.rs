//! Finite-dimensional internal dynamics `η̇ = Qη + Ry`, `w = Sη`.

use nalgebra::{DMatrix, DVector};

use super::{check_input, check_peek, check_time, InternalOperator, OperatorError};

/// LTI block driven by the first `ℓ = R.ncols()` input channels.
///
/// Each advance is one classical RK4 step over the interval between samples
/// with the input linear in between. Integration starts at `t = 0`; samples
/// at negative times only fix the input value at 0.
#[derive(Clone, Debug)]
pub struct LtiInternal {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    s: DMatrix<f64>,
    eta0: DVector<f64>,
    eta: DVector<f64>,
    last: Option<(f64, DVector<f64>)>,
}

impl LtiInternal {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>, s: DMatrix<f64>, eta0: DVector<f64>) -> Result<Self, OperatorError> {
        let n = q.nrows();
        if q.ncols() != n || r.nrows() != n || s.ncols() != n || eta0.len() != n {
            return Err(OperatorError::InvalidConfig(format!(
                "LTI shapes disagree: Q {}x{}, R {}x{}, S {}x{}, eta0 {}",
                q.nrows(),
                q.ncols(),
                r.nrows(),
                r.ncols(),
                s.nrows(),
                s.ncols(),
                eta0.len()
            )));
        }
        Ok(Self { q, r, s, eta: eta0.clone(), eta0, last: None })
    }

    /// Scalar-input, scalar-output block with zero initial state.
    pub fn siso(q: DMatrix<f64>, r: DVector<f64>, s: DVector<f64>) -> Result<Self, OperatorError> {
        let n = q.nrows();
        Self::new(
            q,
            DMatrix::from_column_slice(r.len(), 1, r.as_slice()),
            DMatrix::from_row_slice(1, s.len(), s.as_slice()),
            DVector::zeros(n),
        )
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.eta
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// One RK4 step of length `dt` with input linear from `y0` to `y1`.
    pub fn lti_step(&mut self, y0: &[f64], y1: &[f64], dt: f64) -> Result<(), OperatorError> {
        let l = self.r.ncols();
        check_input(y0, l)?;
        check_input(y1, l)?;
        let (y0, y1) = (DVector::from_column_slice(&y0[..l]), DVector::from_column_slice(&y1[..l]));
        self.eta = rk4(&self.q, &self.r, &self.eta, &y0, &y1, dt);
        Ok(())
    }

    fn input(&self, zeta: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(&zeta[..self.r.ncols()])
    }

    fn stepped(&self, t: f64, y: &DVector<f64>) -> Option<DVector<f64>> {
        let (tl, yl) = self.last.as_ref()?;
        let t0 = tl.max(0.0);
        if t <= t0 {
            return None;
        }
        let y0 = if *tl < 0.0 { yl + (y - yl) * (-tl / (t - tl)) } else { yl.clone() };
        Some(rk4(&self.q, &self.r, &self.eta, &y0, y, t - t0))
    }
}

fn rk4(
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    eta: &DVector<f64>,
    y0: &DVector<f64>,
    y1: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let ymid = (y0 + y1) * 0.5;
    let f = |x: &DVector<f64>, y: &DVector<f64>| q * x + r * y;
    let k1 = f(eta, y0);
    let k2 = f(&(eta + &k1 * (h / 2.0)), &ymid);
    let k3 = f(&(eta + &k2 * (h / 2.0)), &ymid);
    let k4 = f(&(eta + &k3 * h), y1);
    eta + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

impl InternalOperator for LtiInternal {
    fn name(&self) -> &'static str {
        "lti"
    }

    fn min_input_dim(&self) -> usize {
        self.r.ncols()
    }

    fn output_dim(&self) -> usize {
        self.s.nrows()
    }

    fn reset(&mut self) {
        self.eta.clone_from(&self.eta0);
        self.last = None;
    }

    fn advance(&mut self, t: f64, zeta: &[f64]) -> Result<(), OperatorError> {
        check_input(zeta, self.r.ncols())?;
        check_time(self.last.as_ref().map(|(t, _)| *t), t)?;
        let y = self.input(zeta);
        if let Some(eta) = self.stepped(t, &y) {
            self.eta = eta;
        }
        self.last = Some((t, y));
        Ok(())
    }

    fn output(&self) -> Result<Vec<f64>, OperatorError> {
        self.last.as_ref().ok_or(OperatorError::NoSamples)?;
        Ok((&self.s * &self.eta).as_slice().to_vec())
    }

    fn peek(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_input(zeta, self.r.ncols())?;
        check_peek(self.committed_time(), t)?;
        match self.stepped(t, &self.input(zeta)) {
            Some(eta) => Ok((&self.s * eta).as_slice().to_vec()),
            None => self.output(),
        }
    }

    fn committed_time(&self) -> Option<f64> {
        self.last.as_ref().map(|(t, _)| *t)
    }

    fn boxed_clone(&self) -> Box<dyn InternalOperator> {
        Box::new(self.clone())
    }
}
