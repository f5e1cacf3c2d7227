//! Empirical checks of boundedness, causality and local Lipschitz continuity.
//!
//! These are sampling procedures: they can find counterexamples and estimate
//! constants, but they never prove a property. Trials run in parallel on
//! independent operator clones, each with its own seeded generator stream,
//! so reports are reproducible for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{InternalOperator, OperatorError};

/// Input samples `ζ(t_k)` on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Samples {
    /// Samples `f` on `start, start + dt, …` up to `end` (inclusive within roundoff).
    pub fn from_fn(start: f64, end: f64, dt: f64, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let steps = ((end - start) / dt + 1e-9).floor() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| start + k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Feeds `input` to a fresh clone of `op` and returns the output after each
/// sample. Samples at negative times are history only; their outputs are empty.
pub fn run_operator(op: &dyn InternalOperator, input: &Samples) -> Result<Vec<Vec<f64>>, OperatorError> {
    let mut op = op.boxed_clone();
    op.reset();
    input
        .times
        .iter()
        .zip(&input.values)
        .map(|(&t, z)| {
            op.advance(t, z)?;
            if t < 0.0 {
                return Ok(Vec::new());
            }
            op.output()
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random smooth signal bounded by `amp` in absolute value: a normalized sum
/// of three sinusoids.
fn random_wave(rng: &mut impl Rng, amp: f64) -> impl Fn(f64) -> f64 + Clone {
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (rng.random_range(-1.0..1.0), rng.random_range(0.2..4.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let total: f64 = parts.iter().map(|p| p.0.abs()).sum::<f64>().max(1e-12);
    move |t: f64| amp * parts.iter().map(|&(a, w, p)| a * (w * t + p).sin()).sum::<f64>() / total
}

/// Whether the outputs for `a` and `b` agree bitwise at every sample time in `[0, t)`.
///
/// Both inputs must share their time grid.
pub fn causal_on(op: &dyn InternalOperator, a: &Samples, b: &Samples, t: f64) -> Result<bool, OperatorError> {
    if a.times != b.times {
        return Err(OperatorError::InvalidConfig("causality probe inputs must share a time grid".into()));
    }
    let wa = run_operator(op, a)?;
    let wb = run_operator(op, b)?;
    Ok(a.times.iter().zip(wa.iter().zip(&wb)).filter(|(&s, _)| (0.0..t).contains(&s)).all(|(_, (x, y))| x == y))
}

#[derive(Clone, Debug)]
pub struct CausalityConfig {
    pub trials: usize,
    pub seed: u64,
    /// Memory `h`: inputs start at `−h`.
    pub memory: f64,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for CausalityConfig {
    fn default() -> Self {
        Self { trials: 100, seed: 0, memory: 0.0, horizon: 4.0, dt: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalityReport {
    pub trials: usize,
    pub passed: usize,
    /// `(trial, cut time)` of the first failing trial.
    pub counterexample: Option<(usize, f64)>,
}

impl CausalityReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Pairs of inputs that agree before a random cut time `t` and differ from
/// `t` on; counts trials whose outputs agree bitwise on `[0, t)`.
pub fn probe_causality(op: &dyn InternalOperator, cfg: &CausalityConfig) -> Result<CausalityReport, OperatorError> {
    let channels = op.min_input_dim().max(1);
    let results: Vec<(usize, f64, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let base: Vec<_> = (0..channels).map(|_| random_wave(&mut rng, 1.0)).collect();
            let bump: Vec<_> = (0..channels).map(|_| random_wave(&mut rng, 0.5)).collect();
            let a = Samples::from_fn(-cfg.memory, cfg.horizon, cfg.dt, |t| base.iter().map(|f| f(t)).collect());
            // The cut is a sample of the grid, so "before" and "after" are exact.
            let first = a.times.partition_point(|&t| t < 0.0);
            let span = a.len() - first;
            let idx = first + rng.random_range(span / 8..span * 3 / 4);
            let cut = a.times[idx];
            let mut b = a.clone();
            for (t, v) in b.times[idx..].iter().zip(&mut b.values[idx..]) {
                for (x, g) in v.iter_mut().zip(&bump) {
                    *x += 0.5 + g(*t);
                }
            }
            Ok((trial, cut, causal_on(op, &a, &b, cut)?))
        })
        .collect::<Result<_, OperatorError>>()?;
    let passed = results.iter().filter(|r| r.2).count();
    let counterexample = results.iter().find(|r| !r.2).map(|r| (r.0, r.1));
    Ok(CausalityReport { trials: cfg.trials, passed, counterexample })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiboInput {
    Constant,
    Sinusoid,
    Step,
    FilteredNoise,
}

#[derive(Clone, Debug)]
pub struct BiboConfig {
    pub c1: f64,
    pub trials: usize,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for BiboConfig {
    fn default() -> Self {
        Self { c1: 1.0, trials: 32, seed: 0, horizon: 20.0, dt: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiboReport {
    /// Largest observed `‖w(t)‖`: an empirical lower bound for the true `c2`.
    pub c2: f64,
    pub trials: usize,
    pub worst_input: BiboInput,
    pub worst_time: f64,
}

fn bibo_input(kind: BiboInput, rng: &mut ChaCha8Rng, cfg: &BiboConfig, channels: usize) -> Samples {
    let amp = cfg.c1 / (channels as f64).sqrt();
    let n = (cfg.horizon / cfg.dt).round() as usize + 1;
    let per_channel: Vec<Vec<f64>> = (0..channels)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let times = (0..n).map(|k| k as f64 * cfg.dt);
            match kind {
                BiboInput::Constant => vec![sign * amp; n],
                BiboInput::Sinusoid => {
                    let (w, p) = (rng.random_range(0.05..3.0), rng.random_range(0.0..std::f64::consts::TAU));
                    times.map(|t| amp * (w * t + p).sin()).collect()
                }
                BiboInput::Step => {
                    let at = rng.random_range(0.0..cfg.horizon / 2.0);
                    times.map(|t| if t >= at { sign * amp } else { 0.0 }).collect()
                }
                BiboInput::FilteredNoise => {
                    let tau = rng.random_range(0.1..2.0);
                    let mut x = 0.0;
                    let raw: Vec<f64> = (0..n)
                        .map(|_| {
                            x += cfg.dt / tau * (rng.random_range(-1.0..1.0) - x);
                            x
                        })
                        .collect();
                    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                    raw.iter().map(|v| amp * v / peak).collect()
                }
            }
        })
        .collect();
    Samples {
        times: (0..n).map(|k| k as f64 * cfg.dt).collect(),
        values: (0..n).map(|k| per_channel.iter().map(|c| c[k]).collect()).collect(),
    }
}

/// Maximum output norm over random inputs with `‖ζ(t)‖ ≤ c1`.
pub fn probe_bibo(op: &dyn InternalOperator, cfg: &BiboConfig) -> Result<BiboReport, OperatorError> {
    const KINDS: [BiboInput; 4] = [BiboInput::Constant, BiboInput::Sinusoid, BiboInput::Step, BiboInput::FilteredNoise];
    let channels = op.min_input_dim().max(1);
    let trials = cfg.trials.max(1);
    let results: Vec<(f64, BiboInput, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let kind = KINDS[trial % KINDS.len()];
            let input = bibo_input(kind, &mut rng, cfg, channels);
            let out = run_operator(op, &input)?;
            let (peak, at) = out.iter().zip(&input.times).map(|(w, &t)| (norm(w), t)).fold((0.0, 0.0), |acc, x| {
                if x.0 > acc.0 {
                    x
                } else {
                    acc
                }
            });
            Ok((peak, kind, at))
        })
        .collect::<Result<_, OperatorError>>()?;
    let worst =
        results.iter().copied().fold((0.0, BiboInput::Constant, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(BiboReport { c2: worst.0, trials, worst_input: worst.1, worst_time: worst.2 })
}

#[derive(Clone, Debug)]
pub struct LipschitzConfig {
    /// Window length `τ` after the base prefix.
    pub tau: f64,
    /// Perturbation radius `δ` around `ξ(t)`.
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        Self { tau: 1.0, delta: 0.1, trials: 32, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    pub estimate: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// `sup ‖T(ζ1) − T(ζ2)‖ / sup ‖ζ1 − ζ2‖` over the samples after the prefix,
/// or `None` when the inputs coincide there.
pub fn lipschitz_ratio(
    op: &dyn InternalOperator,
    a: &Samples,
    b: &Samples,
    t: f64,
) -> Result<Option<f64>, OperatorError> {
    let wa = run_operator(op, a)?;
    let wb = run_operator(op, b)?;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (k, &s) in a.times.iter().enumerate() {
        if s < t {
            continue;
        }
        num = num.max(diff_norm(&wa[k], &wb[k]));
        den = den.max(diff_norm(&a.values[k], &b.values[k]));
    }
    Ok((den > 0.0).then(|| num / den))
}

/// Extends the prefix `base` (ending at `t`) on `[t, t + τ]` by pairs of
/// continuous perturbations of `ξ(t)` of size below `δ`.
pub fn probe_lipschitz(
    op: &dyn InternalOperator,
    base: &Samples,
    cfg: &LipschitzConfig,
) -> Result<LipschitzReport, OperatorError> {
    let (Some(&t), Some(anchor)) = (base.times.last(), base.values.last()) else {
        return Err(OperatorError::NoSamples);
    };
    let dt = match base.times.len() {
        0 | 1 => cfg.tau / 100.0,
        n => base.times[n - 1] - base.times[n - 2],
    };
    let steps = (cfg.tau / dt).round().max(1.0) as usize;
    let channels = anchor.len();
    let extend = |rng: &mut ChaCha8Rng| {
        let waves: Vec<_> = (0..channels).map(|_| random_wave(rng, 1.0)).collect();
        let mut s = base.clone();
        for k in 1..=steps {
            let tk = t + k as f64 * dt;
            let ramp = 0.99 * cfg.delta * (tk - t) / cfg.tau / (channels as f64).sqrt();
            s.times.push(tk);
            s.values.push(anchor.iter().zip(&waves).map(|(x, w)| x + ramp * w(tk)).collect());
        }
        s
    };
    let ratios: Vec<Option<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let a = extend(&mut rng);
            let b = extend(&mut rng);
            lipschitz_ratio(op, &a, &b, t)
        })
        .collect::<Result<_, OperatorError>>()?;
    let used: Vec<f64> = ratios.iter().flatten().copied().collect();
    Ok(LipschitzReport {
        estimate: used.iter().copied().fold(0.0, f64::max),
        pairs_used: used.len(),
        pairs_skipped: ratios.len() - used.len(),
    })
}
