//! Relative degree and Byrnes–Isidori coordinates of `ẋ = Ax + bu`, `y = cᵀx`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{ComposedOperator, LtiInternal, ObservationMap, OperatorError, Passthrough};

pub const DEFAULT_GAMMA_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearTriple {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

impl LinearTriple {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self, OperatorError> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.len() != n || c.len() != n {
            return Err(OperatorError::InvalidConfig(format!(
                "triple shapes disagree: A {}x{}, b {}, c {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Whether every eigenvalue of `A` has negative real part.
    pub fn is_hurwitz(&self) -> bool {
        self.a.complex_eigenvalues().iter().all(|l| l.re < 0.0)
    }

    /// Random triple with `A` Hurwitz and relative degree exactly `r`.
    ///
    /// Built in normal coordinates (integrator chain plus stable zero
    /// dynamics), mapped through a random well-conditioned similarity, and
    /// resampled until `A` is Hurwitz.
    pub fn random_stable<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize) -> Self {
        assert!(r >= 1 && r <= n, "need 1 <= r <= n");
        loop {
            let k = n - r;
            let mut a = DMatrix::zeros(n, n);
            for i in 0..r - 1 {
                a[(i, i + 1)] = 1.0;
            }
            // Chain feedback with a stable characteristic polynomial (s + λ)^r.
            let lambda: f64 = rng.random_range(0.5..2.0);
            for i in 0..r {
                let binom = crate::jets::binomial(r, i);
                a[(r - 1, i)] = -binom * lambda.powi((r - i) as i32) + rng.random_range(-0.2..0.2);
            }
            for j in 0..k {
                a[(r - 1, r + j)] = rng.random_range(-1.0..1.0);
                a[(r + j, 0)] = rng.random_range(-1.0..1.0);
                for i in 0..k {
                    a[(r + i, r + j)] = rng.random_range(-0.5..0.5);
                }
                a[(r + j, r + j)] -= rng.random_range(1.0..2.5);
            }
            let gamma = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut b = DVector::zeros(n);
            b[r - 1] = gamma;
            let mut c = DVector::zeros(n);
            c[0] = 1.0;

            let t = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.4..0.4));
            let Some(t_inv) = t.clone().try_inverse() else { continue };
            let candidate = Self { a: &t * a * &t_inv, b: &t * b, c: t_inv.transpose() * c };
            if candidate.is_hurwitz() && t_inv.norm() < 20.0 {
                return candidate;
            }
        }
    }

    /// `y` on the grid `0, dt, …, horizon` under `u`, by RK4 from `x0`.
    pub fn simulate_output(&self, x0: &DVector<f64>, u: impl Fn(f64) -> f64, dt: f64, horizon: f64) -> Vec<f64> {
        let steps = (horizon / dt).round() as usize;
        let f = |t: f64, x: &DVector<f64>| &self.a * x + &self.b * u(t);
        let mut x = x0.clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(self.c.dot(&x));
        for k in 0..steps {
            let t = k as f64 * dt;
            x = rk4(&f, t, &x, dt);
            out.push(self.c.dot(&x));
        }
        out
    }
}

pub(crate) fn rk4(f: &impl Fn(f64, &DVector<f64>) -> DVector<f64>, t: f64, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let k1 = f(t, x);
    let k2 = f(t + h / 2.0, &(x + &k1 * (h / 2.0)));
    let k3 = f(t + h / 2.0, &(x + &k2 * (h / 2.0)));
    let k4 = f(t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// `y^{(r)} = Σ P_i y^{(i)} + Sη + γu`, `η̇ = Qη + Ry`, with
/// `(y, …, y^{(r−1)}, η) = U x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ByrnesIsidoriForm {
    pub r: usize,
    pub gamma: f64,
    pub p: Vec<f64>,
    pub q: DMatrix<f64>,
    pub r_vec: DVector<f64>,
    pub s: DVector<f64>,
    pub to_normal: DMatrix<f64>,
    pub from_normal: DMatrix<f64>,
}

impl ByrnesIsidoriForm {
    /// Splits `U x0` into the output chain and the internal state.
    pub fn initial_state(&self, x0: &DVector<f64>) -> (Vec<f64>, DVector<f64>) {
        let z = &self.to_normal * x0;
        (z.rows(0, self.r).iter().copied().collect(), z.rows(self.r, z.len() - self.r).into_owned())
    }

    pub fn internal_dim(&self) -> usize {
        self.q.nrows()
    }

    /// The internal dynamics as an operator of the stacked output
    /// `ζ = (y, …, y^{(r−1)})`, with output `w = Σ P_i ζ_i + Sη`.
    pub fn internal_operator(&self, eta0: DVector<f64>) -> Result<ComposedOperator, OperatorError> {
        let k = self.internal_dim();
        let lti = LtiInternal::new(
            self.q.clone(),
            DMatrix::from_column_slice(k, 1, self.r_vec.as_slice()),
            DMatrix::from_row_slice(1, k, self.s.as_slice()),
            eta0,
        )?;
        let map = ObservationMap::Linear {
            pass: DMatrix::from_row_slice(1, self.r, &self.p),
            state: DMatrix::from_element(1, 1, 1.0),
            output: DMatrix::zeros(1, 0),
        };
        ComposedOperator::new(self.r, Passthrough::Identity, Some(Box::new(lti)), None, map)
    }

    /// `y` of the normal-form system on the grid `0, dt, …, horizon`, by RK4.
    pub fn simulate_output(&self, x0: &DVector<f64>, u: impl Fn(f64) -> f64, dt: f64, horizon: f64) -> Vec<f64> {
        let r = self.r;
        let k = self.internal_dim();
        let f = |t: f64, z: &DVector<f64>| {
            let mut dz = DVector::zeros(r + k);
            for i in 0..r - 1 {
                dz[i] = z[i + 1];
            }
            let eta = z.rows(r, k);
            let chain: f64 = (0..r).map(|i| self.p[i] * z[i]).sum();
            dz[r - 1] = chain + self.s.dot(&eta) + self.gamma * u(t);
            let deta = &self.q * eta + &self.r_vec * z[0];
            dz.rows_mut(r, k).copy_from(&deta);
            dz
        };
        let steps = (horizon / dt).round() as usize;
        let mut z = &self.to_normal * x0;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(z[0]);
        for s in 0..steps {
            z = rk4(&f, s as f64 * dt, &z, dt);
            out.push(z[0]);
        }
        out
    }
}

/// Relative degree, high-frequency gain and normal-form coordinates.
///
/// The internal coordinates are `η = N x` with `N = Vᵀ(I − B_r M⁻¹ C_r)`,
/// where the columns of `V` are an orthonormal basis of `ker C_r`,
/// `C_r = [cᵀ; cᵀA; …; cᵀA^{r−1}]`, `B_r = [b, Ab, …, A^{r−1}b]` and
/// `M = C_r B_r`.
pub fn bi_transform(sys: &LinearTriple, tol_gamma: f64) -> Result<ByrnesIsidoriForm, OperatorError> {
    let n = sys.dim();
    let (a, b, c) = (&sys.a, &sys.b, &sys.c);
    let mut powers_b = vec![b.clone()];
    let mut r = None;
    for j in 0..n {
        let markov = c.dot(&powers_b[j]);
        if markov.abs() > tol_gamma {
            r = Some((j + 1, markov));
            break;
        }
        powers_b.push(a * &powers_b[j]);
    }
    let (r, gamma) = r.ok_or(OperatorError::NoRelativeDegree { n, tol: tol_gamma })?;
    while powers_b.len() <= r {
        let next = a * powers_b.last().expect("non-empty");
        powers_b.push(next);
    }

    let mut rows = Vec::with_capacity(r + 1);
    rows.push(c.transpose());
    for i in 1..=r {
        rows.push(&rows[i - 1] * a);
    }
    let c_r = DMatrix::from_fn(r, n, |i, j| rows[i][j]);
    let c_ar = rows[r].clone();
    let b_r = DMatrix::from_fn(n, r, |i, j| powers_b[j][i]);
    let m_inv = (&c_r * &b_r).try_inverse().ok_or(OperatorError::NoRelativeDegree { n, tol: tol_gamma })?;

    let v = kernel_basis(&c_r);
    let k = n - r;
    let proj = DMatrix::identity(n, n) - &b_r * &m_inv * &c_r;
    let n_mat = v.transpose() * proj;

    let q = &n_mat * a * &v;
    let r_vec = &n_mat * &powers_b[r] / gamma;
    let s = (&c_ar * &v).transpose();
    let p_row = &c_ar * &b_r * &m_inv;

    let mut to_normal = DMatrix::zeros(n, n);
    to_normal.rows_mut(0, r).copy_from(&c_r);
    to_normal.rows_mut(r, k).copy_from(&n_mat);
    let mut from_normal = DMatrix::zeros(n, n);
    from_normal.columns_mut(0, r).copy_from(&(&b_r * &m_inv));
    from_normal.columns_mut(r, k).copy_from(&v);

    Ok(ByrnesIsidoriForm { r, gamma, p: p_row.iter().copied().collect(), q, r_vec, s, to_normal, from_normal })
}

// Orthonormal basis of the kernel of a full-row-rank `C` (r×n), as the
// eigenvectors of CᵀC for its n−r smallest eigenvalues. Each column is
// signed so that its largest entry is positive.
fn kernel_basis(c: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, n) = c.shape();
    let eig = (c.transpose() * c).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut v = DMatrix::zeros(n, n - r);
    for (col, &i) in order.iter().take(n - r).enumerate() {
        let mut e = eig.eigenvectors.column(i).into_owned();
        let imax = e.iamax();
        if e[imax] < 0.0 {
            e = -e;
        }
        v.set_column(col, &e);
    }
    v
}
