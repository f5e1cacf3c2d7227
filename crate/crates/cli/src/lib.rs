//! Scenario files, presets and the `run`/`probe` drivers behind the
//! `funnelsim` binary.

// `!(x >= lo)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ini;
pub mod output;
pub mod presets;

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use funnelsim_core::operators::probes::{
    probe_bibo, probe_causality, probe_lipschitz, BiboConfig, CausalityConfig, LipschitzConfig, Samples,
};
use funnelsim_core::{simulate, verify_run, SimError, SimRun, VerificationVerdict};
use thiserror::Error;

pub use config::{Overrides, RunConfig};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Io = 1,
    Config = 2,
    Inadmissible = 3,
    Collapse = 4,
    Verification = 5,
    Causality = 6,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn plain(message: String) -> Self {
        Self { line: None, message }
    }

    pub fn at(line: usize, message: String) -> Self {
        Self { line: Some(line), message }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(SimError),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Config(_) => Exit::Config,
            Self::Io { .. } => Exit::Io,
            Self::Sim(SimError::InadmissibleInitialCondition { .. }) => Exit::Inadmissible,
            Self::Sim(SimError::StepCollapse { .. }) => Exit::Collapse,
            Self::Sim(_) => Exit::Config,
        }
    }
}

/// A preset name or a path to a config file.
pub fn resolve(target: &str) -> Result<RunConfig, ConfigError> {
    if presets::text(target).is_some() {
        return presets::preset(target);
    }
    let path = Path::new(target);
    if path.is_file() {
        return RunConfig::load(path);
    }
    Err(ConfigError::plain(format!(
        "'{target}' is neither a preset ({}) nor a readable file",
        presets::NAMES.join(", ")
    )))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit: Exit,
    pub run: Option<SimRun>,
    pub verdict: Option<VerificationVerdict>,
    pub message: String,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_outputs(
    cfg: &RunConfig,
    run: &SimRun,
    verdict: &VerificationVerdict,
    outcome: &str,
    out: &Path,
    svg: bool,
) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io(out))?;
    let trace = out.join("trace.csv");
    let file = fs::File::create(&trace).map_err(io(&trace))?;
    let mut w = BufWriter::new(file);
    output::write_csv(&mut w, &run.trace).map_err(io(&trace))?;
    std::io::Write::flush(&mut w).map_err(io(&trace))?;
    let report = out.join("report.txt");
    fs::write(&report, output::report_text(&cfg.name, &run.report, verdict, outcome)).map_err(io(&report))?;
    if svg && !run.trace.is_empty() {
        let plot = out.join("plot.svg");
        fs::write(&plot, output::svg_plot(&cfg.name, &run.trace)).map_err(io(&plot))?;
    }
    Ok(())
}

/// Simulates, verifies and writes `trace.csv`, `report.txt` and optionally
/// `plot.svg` into `out`.
pub fn run_config(cfg: &RunConfig, out: &Path, svg: bool) -> Result<RunOutcome, CliError> {
    let sc = cfg.scenario()?;
    let (run, collapse) = match simulate(&sc) {
        Ok(run) => (run, None),
        Err(SimError::StepCollapse { t, halvings, stage, run }) => {
            let message = format!("step size collapsed at t = {t} after {halvings} halvings (stage {stage})");
            (*run, Some(message))
        }
        Err(e) => return Err(CliError::Sim(e)),
    };
    let verdict = verify_run(&run.trace, &run.report, &cfg.sim.verify);
    let (exit, message) = match collapse {
        Some(m) => (Exit::Collapse, m),
        None if verdict.passed() => (Exit::Ok, format!("verified, epsilon = {:?}", verdict.epsilon)),
        None => (Exit::Verification, "verification failed".to_string()),
    };
    let outcome = match exit {
        Exit::Ok => "ok",
        Exit::Collapse => "step_collapse",
        _ => "verification_failed",
    };
    write_outputs(cfg, &run, &verdict, outcome, out, svg)?;
    Ok(RunOutcome { exit, run: Some(run), verdict: Some(verdict), message })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    Causality,
    Bibo,
    Lipschitz,
}

impl std::str::FromStr for ProbeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "causality" => Ok(Self::Causality),
            "bibo" => Ok(Self::Bibo),
            "lipschitz" => Ok(Self::Lipschitz),
            other => Err(format!("unknown probe '{other}' (causality, bibo, lipschitz)")),
        }
    }
}

/// Step used by all probes, and the matching operator grid.
pub const PROBE_DT: f64 = 0.02;

/// Runs a probe on the config's internal operator; returns `key=value`
/// lines and the exit code.
pub fn probe_config(cfg: &RunConfig, kind: ProbeKind, seed: u64) -> Result<(String, Exit), CliError> {
    let fail = |e: funnelsim_core::OperatorError| CliError::Config(ConfigError::plain(e.to_string()));
    let mut lines = vec![format!("scenario={}", cfg.name)];
    let exit = match kind {
        ProbeKind::Causality => {
            let pc = CausalityConfig { seed, memory: cfg.plant.memory, dt: PROBE_DT, ..CausalityConfig::default() };
            let op = cfg.operator(pc.dt, pc.horizon)?;
            let rep = probe_causality(op.as_ref(), &pc).map_err(fail)?;
            lines.push("probe=causality".into());
            lines.push(format!("operator={}", op.name()));
            lines.push(format!("trials={}", rep.trials));
            lines.push(format!("passed={}", rep.passed));
            match rep.counterexample {
                Some((trial, t)) => {
                    lines.push(format!("counterexample_trial={trial}"));
                    lines.push(format!("counterexample_t={t}"));
                    Exit::Causality
                }
                None => Exit::Ok,
            }
        }
        ProbeKind::Bibo => {
            let pc = BiboConfig { seed, dt: PROBE_DT, ..BiboConfig::default() };
            let op = cfg.operator(pc.dt, pc.horizon)?;
            let rep = probe_bibo(op.as_ref(), &pc).map_err(fail)?;
            lines.push("probe=bibo".into());
            lines.push(format!("operator={}", op.name()));
            lines.push(format!("c1={}", pc.c1));
            lines.push(format!("c2={}", rep.c2));
            lines.push(format!("trials={}", rep.trials));
            lines.push(format!("worst_input={:?}", rep.worst_input));
            lines.push(format!("worst_time={}", rep.worst_time));
            Exit::Ok
        }
        ProbeKind::Lipschitz => {
            let pc = LipschitzConfig { seed, ..LipschitzConfig::default() };
            let prefix = 2.0;
            let op = cfg.operator(PROBE_DT, prefix + pc.tau)?;
            let channels = cfg.r * cfg.plant.m;
            let base = Samples::from_fn(-cfg.plant.memory, prefix, PROBE_DT, |t| vec![t.cos(); channels]);
            let rep = probe_lipschitz(op.as_ref(), &base, &pc).map_err(fail)?;
            lines.push("probe=lipschitz".into());
            lines.push(format!("operator={}", op.name()));
            lines.push(format!("t={prefix}"));
            lines.push(format!("tau={}", pc.tau));
            lines.push(format!("delta={}", pc.delta));
            lines.push(format!("estimate={}", rep.estimate));
            lines.push(format!("pairs_used={}", rep.pairs_used));
            lines.push(format!("pairs_skipped={}", rep.pairs_skipped));
            Exit::Ok
        }
    };
    lines.push(format!("seed={seed}"));
    let mut text = lines.join("\n");
    text.push('\n');
    Ok((text, exit))
}
