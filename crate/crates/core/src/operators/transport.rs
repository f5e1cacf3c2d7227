//! Shift realization of the convolution: the transport equation
//! `∂z/∂t = c ∂z/∂ξ + 𝔥(ξ) y(t)` on `[0, b]` with `z(t, b) = 0`, output `z(t, 0)`.

use super::measure::{Measure, DEFAULT_PANELS_PER_UNIT};
use super::{check_input, check_peek, check_time, InternalOperator, OperatorError};

// Courant numbers within this of 1 are treated as 1. Step lengths computed as
// differences of grid times carry relative roundoff well above machine epsilon.
const CFL_SLACK: f64 = 1e-9;

/// First-order upwind discretization on `N` cells of width `Δξ = b/N`.
///
/// Loads are cell averages `(1/Δξ)∫ g` of the density (finite even for the
/// singular first cell) plus `a_k/Δξ` at the node nearest each atom. With
/// Courant number exactly 1 the advection is exact and only the source
/// quadrature contributes error. The source uses the mean of the input over
/// each substep, from linear interpolation between committed samples.
#[derive(Clone, Debug)]
pub struct TransportPde {
    speed: f64,
    length: f64,
    dxi: f64,
    loads: Vec<f64>,
    initial: Vec<f64>,
    z: Vec<f64>,
    channel: usize,
    last: Option<(f64, f64)>,
    tail_mass: f64,
}

impl TransportPde {
    pub fn new(
        measure: &Measure,
        speed: f64,
        length: f64,
        cells: usize,
        channel: usize,
    ) -> Result<Self, OperatorError> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(OperatorError::InvalidConfig(format!("transport speed must be > 0, got {speed}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(OperatorError::InvalidConfig(format!("domain length must be > 0, got {length}")));
        }
        if cells == 0 {
            return Err(OperatorError::InvalidConfig("transport grid needs at least one cell".into()));
        }
        let dxi = length / cells as f64;
        let mut loads = vec![0.0; cells];
        if let Some(d) = measure.density() {
            let ppu = DEFAULT_PANELS_PER_UNIT;
            for (i, load) in loads.iter_mut().enumerate() {
                let lo = i as f64 * dxi;
                *load = d.integrate(lo, lo + dxi, ppu, |_| 1.0) / dxi;
            }
        }
        for atom in measure.atoms() {
            let i = (atom.location / dxi).round() as usize;
            if i < cells {
                loads[i] += atom.weight / dxi;
            }
        }
        Ok(Self {
            speed,
            length,
            dxi,
            loads,
            initial: vec![0.0; cells],
            z: vec![0.0; cells],
            channel,
            last: None,
            tail_mass: measure.tail_mass(length),
        })
    }

    /// Grid matched to a time step: `N = ⌊b/(c dt)⌋`, so `c dt/Δξ ≤ 1`,
    /// with equality when `b/(c dt)` is an integer.
    pub fn for_step(
        measure: &Measure,
        speed: f64,
        length: f64,
        dt: f64,
        channel: usize,
    ) -> Result<Self, OperatorError> {
        if !(dt > 0.0) {
            return Err(OperatorError::InvalidConfig(format!("time step must be > 0, got {dt}")));
        }
        let cells = ((length / (speed * dt)) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        Self::new(measure, speed, length, cells, channel)
    }

    /// Replaces the initial profile `z(0, ξ_i)`; resets the operator.
    pub fn with_initial_profile(mut self, profile: Vec<f64>) -> Result<Self, OperatorError> {
        if profile.len() != self.z.len() {
            return Err(OperatorError::InvalidConfig(format!(
                "initial profile has {} values, grid has {} cells",
                profile.len(),
                self.z.len()
            )));
        }
        self.initial = profile;
        self.reset();
        Ok(self)
    }

    pub fn cells(&self) -> usize {
        self.z.len()
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn state(&self) -> &[f64] {
        &self.z
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Mass of `|𝔥|` beyond the truncation point `b`; bounds the truncation
    /// error of the output per unit of `‖y‖∞`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Courant number of a step `dt`.
    pub fn courant(&self, dt: f64) -> f64 {
        self.speed * dt / self.dxi
    }

    /// One upwind step with source value `y`. Fails if the Courant number exceeds 1.
    pub fn pde_step(&mut self, y: f64, dt: f64) -> Result<(), OperatorError> {
        let courant = self.courant(dt);
        if courant > 1.0 + CFL_SLACK {
            return Err(OperatorError::Cfl { courant });
        }
        upwind(&mut self.z, 0.0, snap(courant), dt, &self.loads, y);
        Ok(())
    }

    /// Integrates from `t0` to `t1` with the input linear between `y0` and `y1`,
    /// in as many equal substeps as the CFL bound requires.
    fn integrate(z: &mut [f64], boundary: f64, loads: &[f64], nu_per_dt: f64, seg: Segment) {
        let span = seg.t1 - seg.t0;
        let n = substeps(nu_per_dt * span);
        let h = span / n as f64;
        let nu = snap(nu_per_dt * h);
        for j in 0..n {
            let y = seg.y0 + (seg.y1 - seg.y0) * (j as f64 + 0.5) / n as f64;
            upwind(z, boundary, nu, h, loads, y);
        }
    }

    fn segment(&self, t: f64, y: f64) -> Option<Segment> {
        let (tl, yl) = self.last?;
        // Dynamics start at t = 0; earlier samples only fix the input there.
        let t0 = tl.max(0.0);
        if t <= t0 {
            return None;
        }
        let y0 = if tl < 0.0 { yl + (y - yl) * (-tl) / (t - tl) } else { yl };
        Some(Segment { t0, t1: t, y0, y1: y })
    }
}

#[derive(Clone, Copy)]
struct Segment {
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
}

fn snap(courant: f64) -> f64 {
    if courant > 1.0 - CFL_SLACK {
        1.0
    } else {
        courant
    }
}

fn substeps(courant: f64) -> usize {
    ((courant - CFL_SLACK).ceil() as usize).max(1)
}

// z_i ← z_i + ν(z_{i+1} − z_i) + dt·load_i·y, with z beyond the slice equal to `boundary`.
fn upwind(z: &mut [f64], boundary: f64, nu: f64, dt: f64, loads: &[f64], y: f64) {
    let n = z.len();
    for i in 0..n {
        let next = if i + 1 < n { z[i + 1] } else { boundary };
        let advected = if nu == 1.0 { next } else { z[i] + nu * (next - z[i]) };
        z[i] = advected + dt * loads[i] * y;
    }
}

impl InternalOperator for TransportPde {
    fn name(&self) -> &'static str {
        "transport"
    }

    fn min_input_dim(&self) -> usize {
        self.channel + 1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn reset(&mut self) {
        self.z.clone_from(&self.initial);
        self.last = None;
    }

    fn advance(&mut self, t: f64, zeta: &[f64]) -> Result<(), OperatorError> {
        check_input(zeta, self.channel + 1)?;
        check_time(self.last.map(|(t, _)| t), t)?;
        let y = zeta[self.channel];
        if let Some(seg) = self.segment(t, y) {
            let nu_per_dt = self.speed / self.dxi;
            Self::integrate(&mut self.z, 0.0, &self.loads, nu_per_dt, seg);
        }
        self.last = Some((t, y));
        Ok(())
    }

    fn output(&self) -> Result<Vec<f64>, OperatorError> {
        self.last.ok_or(OperatorError::NoSamples)?;
        Ok(vec![self.z[0]])
    }

    fn peek(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_input(zeta, self.channel + 1)?;
        check_peek(self.last.map(|(t, _)| t), t)?;
        let Some(seg) = self.segment(t, zeta[self.channel]) else {
            return self.output();
        };
        // After n substeps z_0 depends on z_0..=z_n only.
        let nu_per_dt = self.speed / self.dxi;
        let n = substeps(nu_per_dt * (seg.t1 - seg.t0));
        let len = (n + 1).min(self.z.len());
        let boundary = self.z.get(len).copied().unwrap_or(0.0);
        let mut prefix = self.z[..len].to_vec();
        Self::integrate(&mut prefix, boundary, &self.loads[..len], nu_per_dt, seg);
        Ok(vec![prefix[0]])
    }

    fn committed_time(&self) -> Option<f64> {
        self.last.map(|(t, _)| t)
    }

    fn boxed_clone(&self) -> Box<dyn InternalOperator> {
        Box::new(self.clone())
    }
}
