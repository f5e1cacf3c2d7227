//! Closed-loop simulation of
//!
//! ```text
//! y^{(r)}(t) = f(d(t), T(ζ)(t)) + Γ(d(t), T(ζ)(t)) u(t),   ζ = (y, ẏ, …, y^{(r−1)}),
//! ```
//!
//! under the funnel controller, with runtime checks of the funnel invariants.
//!
//! Integration is fixed-step. A step whose stages or endpoint leave a funnel
//! is rejected and retried as two half steps, recursively. Stage evaluations
//! query the internal operator through [`InternalOperator::peek`]; the
//! operator is committed once per accepted step at the step's endpoint.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::controller::{
    controller_eval, reference_jet, ControllerConfig, ControllerError, ControllerOutput, ReferenceSignal,
};
use crate::jets::Jet;
use crate::operators::{InternalOperator, OperatorError};

pub const DEFAULT_MAX_HALVINGS: usize = 20;
pub const DEFAULT_U_CAP: f64 = 1e3;
pub const DEFAULT_K_CAP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("initial condition outside funnel {stage}: 1 - phi^2 |e|^2 = {denominator:e}")]
    InadmissibleInitialCondition { stage: usize, denominator: f64 },
    #[error("step size collapsed at t = {t} after {halvings} halvings (stage {stage} left its funnel)")]
    StepCollapse { t: f64, halvings: usize, stage: usize, run: Box<SimRun> },
    #[error("gain matrix has non-positive-definite symmetric part at t = {t} (min eigenvalue {min_eigenvalue:e})")]
    GainDegenerate { t: f64, min_eigenvalue: f64 },
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Controller(ControllerError),
}

pub type DriftFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type GainFn = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;
/// Stacked history `(y, ẏ, …, y^{(r−1)})(t)` for `t ∈ [−h, 0)`.
pub type HistoryFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// `f(d, w)`.
#[derive(Clone)]
pub enum Drift {
    /// `F₀ + D d + W w`.
    Affine {
        f0: DVector<f64>,
        d: DMatrix<f64>,
        w: DMatrix<f64>,
    },
    General(DriftFn),
}

/// `Γ(d, w)`.
#[derive(Clone)]
pub enum GainMap {
    Constant(DMatrix<f64>),
    General(GainFn),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Disturbance {
    Zero {
        dim: usize,
    },
    /// `amp · sin(ω t + phase)`, componentwise amplitudes.
    Sinusoid {
        amp: Vec<f64>,
        omega: f64,
        phase: f64,
    },
    Step {
        at: f64,
        before: Vec<f64>,
        after: Vec<f64>,
    },
}

impl Disturbance {
    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } => *dim,
            Self::Sinusoid { amp, .. } => amp.len(),
            Self::Step { before, .. } => before.len(),
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        match self {
            Self::Zero { dim } => vec![0.0; *dim],
            Self::Sinusoid { amp, omega, phase } => amp.iter().map(|a| a * (omega * t + phase).sin()).collect(),
            Self::Step { at, before, after } => {
                if t < *at {
                    before.clone()
                } else {
                    after.clone()
                }
            }
        }
    }
}

pub struct Plant {
    pub r: usize,
    pub m: usize,
    pub drift: Drift,
    pub gain: GainMap,
    pub disturbance: Disturbance,
    pub operator: Box<dyn InternalOperator>,
    /// Memory `h ≥ 0`: the operator sees inputs from `−h` on.
    pub memory: f64,
    /// `y(0), ẏ(0), …, y^{(r−1)}(0)`, each of length `m`.
    pub initial: Vec<Vec<f64>>,
    /// History on `[−h, 0)`; defaults to the Taylor polynomial of `initial`.
    pub history: Option<HistoryFn>,
}

impl Clone for Plant {
    fn clone(&self) -> Self {
        Self {
            r: self.r,
            m: self.m,
            drift: self.drift.clone(),
            gain: self.gain.clone(),
            disturbance: self.disturbance.clone(),
            operator: self.operator.boxed_clone(),
            memory: self.memory,
            initial: self.initial.clone(),
            history: self.history.clone(),
        }
    }
}

impl fmt::Debug for Plant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plant")
            .field("r", &self.r)
            .field("m", &self.m)
            .field("operator", &self.operator.name())
            .field("memory", &self.memory)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

fn min_sym_eigenvalue(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 1 {
        return 2.0 * g[(0, 0)];
    }
    (g + g.transpose()).symmetric_eigen().eigenvalues.min()
}

impl Plant {
    /// `y^{(r)} = f(d(t), w) + Γ(d(t), w) u`.
    pub fn rhs(&self, t: f64, w: &[f64], u: &[f64]) -> Result<Vec<f64>, SimError> {
        let d = self.disturbance.value(t);
        let mut out = match &self.drift {
            Drift::Affine { f0, d: dm, w: wm } => {
                (f0 + dm * DVector::from_column_slice(&d) + wm * DVector::from_column_slice(w)).as_slice().to_vec()
            }
            Drift::General(f) => f(&d, w),
        };
        let u = DVector::from_column_slice(u);
        let gu = match &self.gain {
            GainMap::Constant(g) => g * u,
            GainMap::General(f) => {
                let g = f(&d, w);
                let min_eigenvalue = min_sym_eigenvalue(&g);
                if !(min_eigenvalue > 0.0) {
                    return Err(SimError::GainDegenerate { t, min_eigenvalue });
                }
                g * u
            }
        };
        for (o, x) in out.iter_mut().zip(gu.iter()) {
            *o += x;
        }
        Ok(out)
    }

    /// Stacked `ζ(t)` for `t < 0`.
    fn history_at(&self, t: f64) -> Vec<f64> {
        if let Some(h) = &self.history {
            return h(t);
        }
        let (r, m) = (self.r, self.m);
        let mut zeta = vec![0.0; r * m];
        for i in 0..r {
            for j in i..r {
                let w = t.powi((j - i) as i32) / (1..=j - i).map(|s| s as f64).product::<f64>();
                for c in 0..m {
                    zeta[i * m + c] += w * self.initial[j][c];
                }
            }
        }
        zeta
    }

    fn validate(&self) -> Result<(), SimError> {
        let (r, m) = (self.r, self.m);
        let bad = |s: String| Err(SimError::Config(s));
        if r == 0 || m == 0 {
            return bad("relative degree and output dimension must be >= 1".into());
        }
        if self.initial.len() != r || self.initial.iter().any(|v| v.len() != m) {
            return bad(format!("initial state needs {r} vectors of length {m}"));
        }
        if !(self.memory >= 0.0 && self.memory.is_finite()) {
            return bad(format!("memory must be >= 0, got {}", self.memory));
        }
        if self.operator.min_input_dim() > r * m {
            return bad(format!(
                "operator '{}' needs {} input channels, the stacked output has {}",
                self.operator.name(),
                self.operator.min_input_dim(),
                r * m
            ));
        }
        let (p, q) = (self.disturbance.dim(), self.operator.output_dim());
        if let Drift::Affine { f0, d, w } = &self.drift {
            if f0.len() != m || d.shape() != (m, p) || w.shape() != (m, q) {
                return bad(format!(
                    "affine drift shapes F0 {}, D {:?}, W {:?} do not fit m = {m}, p = {p}, q = {q}",
                    f0.len(),
                    d.shape(),
                    w.shape()
                ));
            }
        }
        if let GainMap::Constant(g) = &self.gain {
            if g.shape() != (m, m) {
                return bad(format!("gain matrix must be {m}x{m}, got {:?}", g.shape()));
            }
            let min_eigenvalue = min_sym_eigenvalue(g);
            if !(min_eigenvalue > 0.0) {
                return Err(SimError::GainDegenerate { t: 0.0, min_eigenvalue });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub plant: Plant,
    pub controller: ControllerConfig,
    pub reference: ReferenceSignal,
    pub horizon: f64,
    pub dt: f64,
    pub integrator: Integrator,
    /// Keep every `decimation`-th base step in the trace.
    pub decimation: usize,
    pub max_halvings: usize,
}

impl Scenario {
    pub fn new(plant: Plant, controller: ControllerConfig, reference: ReferenceSignal, horizon: f64, dt: f64) -> Self {
        Self {
            plant,
            controller,
            reference,
            horizon,
            dt,
            integrator: Integrator::Rk4,
            decimation: 1,
            max_halvings: DEFAULT_MAX_HALVINGS,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        self.plant.validate()?;
        let bad = |s: String| Err(SimError::Config(s));
        if self.controller.relative_degree() != self.plant.r {
            return bad(format!(
                "controller has {} funnel stages, plant relative degree is {}",
                self.controller.relative_degree(),
                self.plant.r
            ));
        }
        if self.reference.dim() != self.plant.m {
            return bad(format!(
                "reference has {} components, plant has {} outputs",
                self.reference.dim(),
                self.plant.m
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return bad(format!("step must lie in (0, horizon], got {}", self.dt));
        }
        if self.decimation == 0 {
            return bad("decimation must be >= 1".into());
        }
        Ok(())
    }
}

/// One stored row of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub y: Vec<f64>,
    pub y_ref: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// `‖e_i(t)‖` per stage.
    pub e_norm: Vec<f64>,
    pub k: Vec<f64>,
    /// Funnel radii `1/φ_i(t)`.
    pub radius: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub horizon: f64,
    /// Last accepted time.
    pub t_end: f64,
    pub completed: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub sup_u: f64,
    pub sup_k: Vec<f64>,
    /// `sup ‖y^{(i)}‖` for `i = 0..r−1`.
    pub sup_y: Vec<f64>,
    /// `min_t (1 − φ_i(t)‖e_i(t)‖)`.
    pub min_margin: Vec<f64>,
    /// `min_t (1/φ_i(t) − ‖e_i(t)‖)`.
    pub min_distance: Vec<f64>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRun {
    pub trace: Vec<TraceRecord>,
    pub report: RunReport,
}

struct Point {
    zeta: Vec<f64>,
    w: Vec<f64>,
    ctrl: ControllerOutput,
    y_ref: Vec<f64>,
}

enum StepFailure {
    Violation { stage: usize },
    Fatal(SimError),
}

impl From<SimError> for StepFailure {
    fn from(e: SimError) -> Self {
        Self::Fatal(e)
    }
}

impl From<OperatorError> for StepFailure {
    fn from(e: OperatorError) -> Self {
        Self::Fatal(e.into())
    }
}

struct Runner<'a> {
    sc: &'a Scenario,
    op: Box<dyn InternalOperator>,
    t: f64,
    point: Point,
    trace: Vec<TraceRecord>,
    report: RunReport,
}

impl<'a> Runner<'a> {
    fn evaluate(sc: &Scenario, op: &dyn InternalOperator, t: f64, zeta: &[f64]) -> Result<Point, StepFailure> {
        let (r, m) = (sc.plant.r, sc.plant.m);
        let w = op.peek(t, zeta)?;
        let reference = reference_jet(&sc.reference, t, r - 1).map_err(SimError::Controller)?;
        let coeffs = (0..r).map(|i| (0..m).map(|c| zeta[i * m + c] - reference.coeff(i)[c]).collect()).collect();
        let e0 = Jet::new(coeffs).map_err(|e| SimError::Controller(e.into()))?;
        let ctrl = match controller_eval(&sc.controller, t, &e0) {
            Ok(c) => c,
            Err(ControllerError::Violation { stage, .. }) => return Err(StepFailure::Violation { stage }),
            Err(e) => return Err(SimError::Controller(e).into()),
        };
        if ctrl.u.iter().any(|u| !u.is_finite()) {
            return Err(StepFailure::Violation { stage: r - 1 });
        }
        Ok(Point { zeta: zeta.to_vec(), w, ctrl, y_ref: reference.value().to_vec() })
    }

    fn derivative(&self, t: f64, p: &Point) -> Result<Vec<f64>, SimError> {
        let (r, m) = (self.sc.plant.r, self.sc.plant.m);
        let mut dx = Vec::with_capacity(r * m);
        dx.extend_from_slice(&p.zeta[m..]);
        dx.extend(self.sc.plant.rhs(t, &p.w, &p.ctrl.u)?);
        Ok(dx)
    }

    fn stage(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, StepFailure> {
        let p = Self::evaluate(self.sc, self.op.as_ref(), t, x)?;
        Ok(self.derivative(t, &p)?)
    }

    /// Attempts one step to `t1`; on success returns the endpoint.
    fn try_step(&self, t1: f64) -> Result<Point, StepFailure> {
        let t0 = self.t;
        let h = t1 - t0;
        let x = &self.point.zeta;
        let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
        let k1 = self.derivative(t0, &self.point)?;
        let x1 = match self.sc.integrator {
            Integrator::Euler => axpy(x, h, &k1),
            Integrator::Rk4 => {
                let tm = t0 + h / 2.0;
                let k2 = self.stage(tm, &axpy(x, h / 2.0, &k1))?;
                let k3 = self.stage(tm, &axpy(x, h / 2.0, &k2))?;
                let k4 = self.stage(t1, &axpy(x, h, &k3))?;
                x.iter().enumerate().map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
            }
        };
        if x1.iter().any(|v| !v.is_finite()) {
            return Err(StepFailure::Violation { stage: 0 });
        }
        Self::evaluate(self.sc, self.op.as_ref(), t1, &x1)
    }

    fn accept(&mut self, t1: f64, p: Point) -> Result<(), SimError> {
        self.op.advance(t1, &p.zeta)?;
        self.t = t1;
        self.point = Point { w: self.op.output()?, ..p };
        self.report.accepted_steps += 1;
        self.observe();
        Ok(())
    }

    fn observe(&mut self) {
        let (r, m) = (self.sc.plant.r, self.sc.plant.m);
        let rep = &mut self.report;
        let p = &self.point;
        rep.t_end = self.t;
        rep.sup_u = rep.sup_u.max(p.ctrl.u.iter().fold(0.0, |a, u| a.max(u.abs())));
        for i in 0..r {
            rep.sup_k[i] = rep.sup_k[i].max(p.ctrl.k[i]);
            rep.sup_y[i] = rep.sup_y[i].max(norm(&p.zeta[i * m..(i + 1) * m]));
            let phi = self.sc.controller.funnels.get(i).value(self.t);
            let e = norm(&p.ctrl.e[i]);
            rep.min_margin[i] = rep.min_margin[i].min(1.0 - phi * e);
            rep.min_distance[i] = rep.min_distance[i].min(1.0 / phi - e);
        }
    }

    fn record(&mut self) {
        let m = self.sc.plant.m;
        let p = &self.point;
        self.trace.push(TraceRecord {
            t: self.t,
            y: p.zeta[..m].to_vec(),
            y_ref: p.y_ref.clone(),
            u: p.ctrl.u.clone(),
            w: p.w.clone(),
            e_norm: p.ctrl.e.iter().map(|e| norm(e)).collect(),
            k: p.ctrl.k.clone(),
            radius: self.sc.controller.funnels.iter().map(|f| f.radius(self.t)).collect(),
        });
    }

    /// Advances to `t1`, halving on funnel violations.
    fn advance_to(&mut self, t1: f64, depth: usize) -> Result<(), SimError> {
        match self.try_step(t1) {
            Ok(p) => self.accept(t1, p),
            Err(StepFailure::Fatal(e)) => Err(e),
            Err(StepFailure::Violation { stage }) => {
                self.report.rejected_steps += 1;
                if depth >= self.sc.max_halvings {
                    log::warn!("step collapse at t = {} (stage {stage})", self.t);
                    return Err(SimError::StepCollapse {
                        t: self.t,
                        halvings: depth,
                        stage,
                        run: Box::new(SimRun { trace: Vec::new(), report: self.report.clone() }),
                    });
                }
                log::debug!("rejected step [{}, {t1}] at depth {depth} (stage {stage})", self.t);
                let mid = 0.5 * (self.t + t1);
                self.advance_to(mid, depth + 1)?;
                self.advance_to(t1, depth + 1)
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the closed loop over `[0, horizon]`.
pub fn simulate(sc: &Scenario) -> Result<SimRun, SimError> {
    let started = Instant::now();
    sc.validate()?;
    let plant = &sc.plant;
    let (r, m) = (plant.r, plant.m);
    let mut op = plant.operator.boxed_clone();
    op.reset();
    if plant.memory > 0.0 {
        let n = (plant.memory / sc.dt).ceil().max(1.0) as usize;
        for k in 0..n {
            let t = -plant.memory + k as f64 * plant.memory / n as f64;
            op.advance(t, &plant.history_at(t))?;
        }
    }
    let x0: Vec<f64> = plant.initial.iter().flatten().copied().collect();
    op.advance(0.0, &x0)?;
    let point = match Runner::evaluate(sc, op.as_ref(), 0.0, &x0) {
        Ok(p) => p,
        Err(StepFailure::Violation { stage }) => {
            let reference = reference_jet(&sc.reference, 0.0, r - 1).map_err(SimError::Controller)?;
            let e0 =
                Jet::new((0..r).map(|i| (0..m).map(|c| x0[i * m + c] - reference.coeff(i)[c]).collect()).collect())
                    .map_err(|e| SimError::Controller(e.into()))?;
            let denominator = match controller_eval(&sc.controller.clone().with_guard(f64::NEG_INFINITY), 0.0, &e0) {
                Ok(out) => {
                    let phi = sc.controller.funnels.get(stage).value(0.0);
                    1.0 - phi * phi * norm(&out.e[stage]).powi(2)
                }
                Err(_) => f64::NAN,
            };
            return Err(SimError::InadmissibleInitialCondition { stage, denominator });
        }
        Err(StepFailure::Fatal(e)) => return Err(e),
    };
    let report = RunReport {
        horizon: sc.horizon,
        t_end: 0.0,
        completed: false,
        accepted_steps: 0,
        rejected_steps: 0,
        sup_u: 0.0,
        sup_k: vec![0.0; r],
        sup_y: vec![0.0; r],
        min_margin: vec![f64::INFINITY; r],
        min_distance: vec![f64::INFINITY; r],
        wall_time: 0.0,
    };
    let mut runner = Runner { sc, op, t: 0.0, point, trace: Vec::new(), report };
    runner.observe();
    runner.record();

    let steps = (sc.horizon / sc.dt).round().max(1.0) as usize;
    for k in 1..=steps {
        let t1 = if k == steps { sc.horizon } else { k as f64 * sc.dt };
        if let Err(e) = runner.advance_to(t1, 0) {
            return Err(match e {
                SimError::StepCollapse { t, halvings, stage, mut run } => {
                    run.trace = std::mem::take(&mut runner.trace);
                    run.report = runner.report.clone();
                    run.report.wall_time = started.elapsed().as_secs_f64();
                    SimError::StepCollapse { t, halvings, stage, run }
                }
                other => other,
            });
        }
        if k % sc.decimation == 0 || k == steps {
            runner.record();
        }
    }
    runner.report.completed = true;
    runner.report.wall_time = started.elapsed().as_secs_f64();
    Ok(SimRun { trace: runner.trace, report: runner.report })
}

/// Thresholds for [`verify_run`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub u_cap: f64,
    pub k_cap: f64,
    /// Required lower bound on every stage distance `1/φ_i − ‖e_i‖`.
    pub min_distance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { u_cap: DEFAULT_U_CAP, k_cap: DEFAULT_K_CAP, min_distance: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClauseResult {
    pub pass: bool,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationVerdict {
    /// (a) the horizon was reached.
    pub horizon: ClauseResult,
    /// (b) `sup |u|` and `sup k_i` finite and below the caps.
    pub bounded: ClauseResult,
    /// (c) every stage stays a positive distance inside its funnel.
    pub funnel: ClauseResult,
    /// `ε_i = min_t (1/φ_i(t) − ‖e_i(t)‖)` over trace and report.
    pub epsilon: Vec<f64>,
}

impl VerificationVerdict {
    pub fn passed(&self) -> bool {
        self.horizon.pass && self.bounded.pass && self.funnel.pass
    }
}

/// Checks a run against the boundedness and funnel-invariance conclusions.
pub fn verify_run(trace: &[TraceRecord], report: &RunReport, cfg: &VerifyConfig) -> VerificationVerdict {
    let last_t = trace.last().map_or(f64::NEG_INFINITY, |r| r.t);
    let reached = report.completed && last_t >= report.horizon * (1.0 - 1e-12);
    let horizon = ClauseResult { pass: reached, witness: format!("t_end={last_t} horizon={}", report.horizon) };

    let mut sup_u = report.sup_u;
    let mut sup_k = report.sup_k.iter().copied().fold(0.0, f64::max);
    for row in trace {
        sup_u = row.u.iter().fold(sup_u, |a, u| if u.is_nan() { f64::NAN } else { a.max(u.abs()) });
        sup_k = row.k.iter().fold(sup_k, |a, &k| if k.is_nan() { f64::NAN } else { a.max(k) });
    }
    let bounded = ClauseResult {
        pass: sup_u.is_finite() && sup_k.is_finite() && sup_u <= cfg.u_cap && sup_k <= cfg.k_cap,
        witness: format!("sup_u={sup_u} sup_k={sup_k} caps=({}, {})", cfg.u_cap, cfg.k_cap),
    };

    let stages = trace.first().map_or(report.min_distance.len(), |r| r.e_norm.len());
    let mut epsilon = vec![f64::INFINITY; stages];
    let mut worst = (f64::INFINITY, 0usize, f64::NAN);
    for row in trace {
        for (i, eps) in epsilon.iter_mut().enumerate() {
            let d = row.radius[i] - row.e_norm[i];
            let d = if d.is_nan() { f64::NEG_INFINITY } else { d };
            *eps = eps.min(d);
            if d < worst.0 {
                worst = (d, i, row.t);
            }
        }
    }
    for (e, r) in epsilon.iter_mut().zip(&report.min_distance) {
        *e = e.min(*r);
    }
    let min_eps = epsilon.iter().copied().fold(f64::INFINITY, f64::min);
    let funnel = ClauseResult {
        pass: !trace.is_empty() && min_eps > cfg.min_distance.max(0.0),
        witness: format!("min_distance={min_eps} worst_row=(stage {}, t={})", worst.1, worst.2),
    };
    VerificationVerdict { horizon, bounded, funnel, epsilon }
}
