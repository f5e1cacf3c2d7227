//! Typed scenario configuration and its translation into a [`Scenario`].

use std::path::Path;

use funnelsim_core::operators::{GridDensity, DEFAULT_GAMMA_TOL};
use funnelsim_core::{
    bi_transform, Atom, ByrnesIsidoriForm, ComposedOperator, ControllerConfig, ConvolutionOperator, Density,
    DensityProfile, Disturbance, Drift, FunnelFunction, FunnelStack, GainMap, Integrator, InternalOperator,
    LinearTriple, LtiInternal, Measure, ObservationMap, Passthrough, Plant, RefComponent, ReferenceSignal, Scenario,
    TransportPde, VerifyConfig, ZeroOperator, DEFAULT_GAIN_GUARD,
};
use nalgebra::{DMatrix, DVector};

use crate::ini::Ini;
use crate::ConfigError;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    ExpSqrt,
    Exp { rate: f64, singular: bool },
    File { path: String, singular: bool },
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Zero {
        outputs: usize,
    },
    Convolution {
        atoms: Vec<Atom>,
        density: MeasureSpec,
        channel: usize,
        panels: Option<usize>,
    },
    Transport {
        atoms: Vec<Atom>,
        density: MeasureSpec,
        speed: f64,
        length: f64,
        cells: Option<usize>,
        channel: usize,
    },
    Lti {
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        s: DMatrix<f64>,
        eta0: DVector<f64>,
    },
    /// Identity or delay passthrough plus an optional inner block,
    /// observed linearly as `w = P T̃(ζ) + M inner(ζ)`.
    Composed {
        delay: Option<f64>,
        inner: Option<Box<OperatorSpec>>,
        p: DMatrix<f64>,
        m: DMatrix<f64>,
    },
    /// A linear triple rewritten in normal form; fixes the plant's chain.
    NormalForm {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        x0: DVector<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunnelSpec {
    ExpShift { a: f64, b: f64, c: f64 },
    Const { lambda: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceSpec {
    Cos { amp: f64, omega: f64, phase: f64 },
    Const { value: f64 },
    Poly { coeffs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub m: usize,
    /// Scalars of `f(d, w) = F₀ 𝟙 + D E d + W E w`, `E` the rectangular identity.
    pub f0: f64,
    pub d: f64,
    pub w: f64,
    pub gamma: DMatrix<f64>,
    pub disturbance: Disturbance,
    /// `y^{(i)}(0)`, one row per derivative order.
    pub y0: Vec<Vec<f64>>,
    pub memory: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSpec {
    pub horizon: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub decimation: usize,
    pub max_halvings: usize,
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub plant: PlantSpec,
    pub operator: OperatorSpec,
    pub r: usize,
    pub funnels: Vec<FunnelSpec>,
    pub guard: f64,
    pub reference: ReferenceSpec,
    pub sim: SimSpec,
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub integrator: Option<Integrator>,
}

impl RunConfig {
    pub fn parse(name: &str, text: &str) -> Result<Self, ConfigError> {
        let mut ini = Ini::parse(text)?;
        let cfg = Reader { ini: &mut ini }.read(name)?;
        ini.finish()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::plain(format!("cannot read {}: {e}", path.display())))?;
        let name = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
        Self::parse(&name, &text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dt) = o.dt {
            self.sim.dt = dt;
        }
        if let Some(h) = o.horizon {
            self.sim.horizon = h;
        }
        if let Some(i) = o.integrator {
            self.sim.integrator = i;
        }
    }

    /// The internal operator, with grids matched to step `dt`.
    pub fn operator(&self, dt: f64, horizon: f64) -> Result<Box<dyn InternalOperator>, ConfigError> {
        build_operator(&self.operator, self.r * self.plant.m, dt, horizon)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let (m, r) = (self.plant.m, self.r);
        let stack = self.funnels.iter().map(|f| f.build()).collect::<Result<Vec<_>, _>>()?;
        let funnels = FunnelStack::new(stack).map_err(|e| ConfigError::plain(e.to_string()))?;
        let controller = ControllerConfig::new(funnels).with_guard(self.guard);
        let reference = ReferenceSignal::new(vec![self.reference.build(); m]);

        let p = self.plant.disturbance.dim();
        let (operator, gain, initial): (Box<dyn InternalOperator>, DMatrix<f64>, Vec<Vec<f64>>) = match &self.operator {
            OperatorSpec::NormalForm { x0, .. } => {
                let form = normal_form(&self.operator, r)?;
                if m != 1 {
                    return Err(ConfigError::plain("normal-form plants are single-output (m = 1)".into()));
                }
                let (chain, eta0) = form.initial_state(x0);
                let op = form.internal_operator(eta0).map_err(config)?;
                (Box::new(op), DMatrix::from_element(1, 1, form.gamma), chain.iter().map(|&v| vec![v]).collect())
            }
            _ => (self.operator(self.sim.dt, self.sim.horizon)?, self.plant.gamma.clone(), self.initial()?),
        };
        let q = operator.output_dim();
        let plant = Plant {
            r,
            m,
            drift: Drift::Affine {
                f0: DVector::from_element(m, self.plant.f0),
                d: DMatrix::identity(m, p) * self.plant.d,
                w: DMatrix::identity(m, q) * self.plant.w,
            },
            gain: GainMap::Constant(gain),
            disturbance: self.plant.disturbance.clone(),
            operator,
            memory: self.plant.memory,
            initial,
            history: None,
        };
        let mut sc = Scenario::new(plant, controller, reference, self.sim.horizon, self.sim.dt);
        sc.integrator = self.sim.integrator;
        sc.decimation = self.sim.decimation;
        sc.max_halvings = self.sim.max_halvings;
        Ok(sc)
    }

    fn initial(&self) -> Result<Vec<Vec<f64>>, ConfigError> {
        let (m, r) = (self.plant.m, self.r);
        if self.plant.y0.len() > r {
            return Err(ConfigError::plain(format!("y0 lists {} derivative orders, r = {r}", self.plant.y0.len())));
        }
        let mut rows = self.plant.y0.clone();
        rows.resize(r, vec![0.0; m]);
        for row in &mut rows {
            match row.len() {
                1 if m > 1 => *row = vec![row[0]; m],
                n if n == m => {}
                n => return Err(ConfigError::plain(format!("y0 row has {n} entries, m = {m}"))),
            }
        }
        Ok(rows)
    }
}

fn normal_form(spec: &OperatorSpec, r: usize) -> Result<ByrnesIsidoriForm, ConfigError> {
    let OperatorSpec::NormalForm { a, b, c, .. } = spec else { unreachable!("only called for normal-form specs") };
    let triple = LinearTriple::new(a.clone(), b.clone(), c.clone()).map_err(config)?;
    let form = bi_transform(&triple, DEFAULT_GAMMA_TOL).map_err(config)?;
    if form.r != r {
        return Err(ConfigError::plain(format!("the triple has relative degree {}, [controller] r = {r}", form.r)));
    }
    Ok(form)
}

fn config(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::plain(e.to_string())
}

impl OperatorSpec {
    fn output_dim(&self) -> usize {
        match self {
            Self::Zero { outputs } => *outputs,
            Self::Lti { s, .. } => s.nrows(),
            Self::Composed { p, .. } => p.nrows(),
            Self::Convolution { .. } | Self::Transport { .. } | Self::NormalForm { .. } => 1,
        }
    }
}

impl FunnelSpec {
    fn build(&self) -> Result<FunnelFunction, ConfigError> {
        match *self {
            Self::ExpShift { a, b, c } => FunnelFunction::exp_shift(a, b, c),
            Self::Const { lambda } => FunnelFunction::constant(lambda),
        }
        .map_err(config)
    }
}

impl ReferenceSpec {
    fn build(&self) -> RefComponent {
        match self {
            Self::Cos { amp, omega, phase } => RefComponent::Cos { amp: *amp, omega: *omega, phase: *phase },
            Self::Const { value } => RefComponent::Const { value: *value },
            Self::Poly { coeffs } => RefComponent::Poly { coeffs: coeffs.clone() },
        }
    }
}

pub fn build_measure(atoms: &[Atom], density: &MeasureSpec) -> Result<Measure, ConfigError> {
    let density = match density {
        MeasureSpec::None => None,
        MeasureSpec::ExpSqrt => Some(Density::singular(DensityProfile::Exp { rate: 1.0 })),
        MeasureSpec::Exp { rate, singular } => {
            Some(Density { profile: DensityProfile::Exp { rate: *rate }, singular: *singular })
        }
        MeasureSpec::File { path, singular } => {
            let grid = GridDensity::load(Path::new(path)).map_err(config)?;
            Some(Density { profile: DensityProfile::Grid(grid), singular: *singular })
        }
    };
    Measure::new(atoms.to_vec(), density).map_err(config)
}

fn build_operator(
    spec: &OperatorSpec,
    inputs: usize,
    dt: f64,
    horizon: f64,
) -> Result<Box<dyn InternalOperator>, ConfigError> {
    let check_channel = |channel: usize| {
        if channel >= inputs {
            Err(ConfigError::plain(format!("channel {channel} out of range, the stacked output has {inputs}")))
        } else {
            Ok(())
        }
    };
    Ok(match spec {
        OperatorSpec::Zero { outputs } => Box::new(ZeroOperator::new(*outputs)),
        OperatorSpec::Convolution { atoms, density, channel, panels } => {
            check_channel(*channel)?;
            let mut op = ConvolutionOperator::new(build_measure(atoms, density)?, *channel);
            if let Some(p) = panels {
                op = op.with_panels_per_unit(*p);
            }
            Box::new(op)
        }
        OperatorSpec::Transport { atoms, density, speed, length, cells, channel } => {
            check_channel(*channel)?;
            let measure = build_measure(atoms, density)?;
            let op = match cells {
                Some(n) => TransportPde::new(&measure, *speed, *length, *n, *channel),
                None => TransportPde::for_step(&measure, *speed, *length, dt, *channel),
            }
            .map_err(config)?;
            if op.courant(dt) > 1.0 + 1e-9 {
                return Err(ConfigError::plain(format!(
                    "transport grid violates the CFL bound: c dt / dxi = {} > 1 (N = {}, dt = {dt})",
                    op.courant(dt),
                    op.cells()
                )));
            }
            if *length < speed * horizon {
                log::warn!(
                    "transport domain b = {length} is shorter than c T = {}; truncated tail mass of the measure: {:e}",
                    speed * horizon,
                    op.tail_mass()
                );
            }
            Box::new(op)
        }
        OperatorSpec::Lti { q, r, s, eta0 } => {
            let op = LtiInternal::new(q.clone(), r.clone(), s.clone(), eta0.clone()).map_err(config)?;
            if r.ncols() > inputs {
                return Err(ConfigError::plain(format!(
                    "R has {} columns, the stacked output has {inputs}",
                    r.ncols()
                )));
            }
            Box::new(op)
        }
        OperatorSpec::Composed { delay, inner, p, m } => {
            let passthrough = match delay {
                Some(h) => Passthrough::Delay { h: *h },
                None => Passthrough::Identity,
            };
            let inner = inner.as_ref().map(|s| build_operator(s, inputs, dt, horizon)).transpose()?;
            let map =
                ObservationMap::Linear { pass: p.clone(), state: m.clone(), output: DMatrix::zeros(p.nrows(), 0) };
            Box::new(ComposedOperator::new(inputs, passthrough, inner, None, map).map_err(config)?)
        }
        OperatorSpec::NormalForm { x0, .. } => {
            let form = normal_form(spec, inputs)?;
            let (_, eta0) = form.initial_state(x0);
            Box::new(form.internal_operator(eta0).map_err(config)?)
        }
    })
}

struct Reader<'a> {
    ini: &'a mut Ini,
}

impl Reader<'_> {
    fn raw(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.ini.take(section, key)
    }

    fn parse<T>(
        &mut self,
        section: &str,
        key: &str,
        f: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            Some((v, line)) => f(&v).map(Some).map_err(|m| ConfigError::at(line, format!("[{section}] {key}: {m}"))),
            None => Ok(None),
        }
    }

    fn num(&mut self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.parse(section, key, number)?.unwrap_or(default))
    }

    fn count(&mut self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.parse(section, key, |s| s.trim().parse::<usize>().map_err(|e| e.to_string()))?.unwrap_or(default))
    }

    fn required<T>(
        &mut self,
        section: &str,
        key: &str,
        f: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.parse(section, key, f)?.ok_or_else(|| ConfigError::plain(format!("[{section}] {key} is required")))
    }

    fn read(mut self, name: &str) -> Result<RunConfig, ConfigError> {
        let r = self.count("controller", "r", 1)?;
        if r == 0 {
            return Err(ConfigError::plain("[controller] r must be >= 1".into()));
        }
        let default_phi = self.parse("controller", "phi", funnel)?;
        let mut funnels = Vec::with_capacity(r);
        for i in 0..r {
            let f = self.parse("controller", &format!("phi_{i}"), funnel)?;
            funnels.push(
                f.or_else(|| default_phi.clone())
                    .ok_or_else(|| ConfigError::plain(format!("[controller] needs phi or phi_{i}")))?,
            );
        }
        for i in r..16 {
            if self.ini.has("controller", &format!("phi_{i}")) {
                return Err(ConfigError::plain(format!("[controller] phi_{i} given but r = {r}")));
            }
        }
        let guard = self.num("controller", "guard", DEFAULT_GAIN_GUARD)?;

        let operator = self.operator(r)?;
        let normal_form = matches!(operator, OperatorSpec::NormalForm { .. });
        if normal_form {
            for key in ["f", "gamma", "y0"] {
                if let Some((_, line)) = self.raw("plant", key) {
                    return Err(ConfigError::at(line, format!("[plant] {key} is fixed by kind = normal-form")));
                }
            }
        }
        let m = self.count("plant", "m", 1)?;
        let (f0, d, w) = self.parse("plant", "f", affine)?.unwrap_or((0.0, 0.0, 1.0));
        let gamma = match self.parse("plant", "gamma", matrix)? {
            None => DMatrix::identity(m, m),
            Some(g) if g.shape() == (1, 1) => DMatrix::identity(m, m) * g[(0, 0)],
            Some(g) => g,
        };
        let disturbance = self.parse("plant", "disturbance", disturbance)?.unwrap_or(Disturbance::Zero { dim: 0 });
        let y0 = self.parse("plant", "y0", rows)?.unwrap_or_default();
        let memory = self.num("plant", "memory", 0.0)?;

        let reference = match self.raw("reference", "kind") {
            None => ReferenceSpec::Const { value: 0.0 },
            Some((kind, line)) => match kind.as_str() {
                "cos" => ReferenceSpec::Cos {
                    amp: self.num("reference", "amp", 1.0)?,
                    omega: self.num("reference", "omega", 1.0)?,
                    phase: self.num("reference", "phase", 0.0)?,
                },
                "const" => ReferenceSpec::Const { value: self.num("reference", "value", 0.0)? },
                "poly" => ReferenceSpec::Poly { coeffs: self.required("reference", "coeffs", list)? },
                other => return Err(ConfigError::at(line, format!("unknown reference kind '{other}'"))),
            },
        };

        let sim = SimSpec {
            horizon: self.num("sim", "horizon", 10.0)?,
            dt: self.num("sim", "dt", 1e-3)?,
            integrator: self.parse("sim", "integrator", integrator)?.unwrap_or(Integrator::Rk4),
            decimation: self.count("sim", "decimation", 1)?,
            max_halvings: self.count("sim", "max_halvings", funnelsim_core::sim::DEFAULT_MAX_HALVINGS)?,
            verify: VerifyConfig {
                u_cap: self.num("sim", "u_cap", funnelsim_core::sim::DEFAULT_U_CAP)?,
                k_cap: self.num("sim", "k_cap", funnelsim_core::sim::DEFAULT_K_CAP)?,
                min_distance: self.num("sim", "min_distance", 0.0)?,
            },
        };

        Ok(RunConfig {
            name: name.to_string(),
            plant: PlantSpec { m, f0, d, w, gamma, disturbance, y0, memory },
            operator,
            r,
            funnels,
            guard,
            reference,
            sim,
        })
    }

    fn operator(&mut self, r: usize) -> Result<OperatorSpec, ConfigError> {
        let kind = self.raw("operator", "kind").unwrap_or(("zero".into(), 0));
        self.operator_of(&kind.0, kind.1, r, true)
    }

    fn operator_of(&mut self, kind: &str, line: usize, r: usize, top: bool) -> Result<OperatorSpec, ConfigError> {
        const S: &str = "operator";
        Ok(match kind {
            "zero" => OperatorSpec::Zero { outputs: self.count(S, "outputs", 1)? },
            "convolution" => OperatorSpec::Convolution {
                atoms: self.parse(S, "atoms", atoms)?.unwrap_or_default(),
                density: self.density()?,
                channel: self.count(S, "channel", 0)?,
                panels: self.parse(S, "panels", |s| s.trim().parse::<usize>().map_err(|e| e.to_string()))?,
            },
            "transport" => OperatorSpec::Transport {
                atoms: self.parse(S, "atoms", atoms)?.unwrap_or_default(),
                density: self.density()?,
                speed: self.num(S, "c", 1.0)?,
                length: self.required(S, "b", number)?,
                cells: self.parse(S, "N", |s| s.trim().parse::<usize>().map_err(|e| e.to_string()))?,
                channel: self.count(S, "channel", 0)?,
            },
            "lti" => {
                let q = self.required(S, "Q", matrix)?;
                let n = q.nrows();
                let rm = self.required(S, "R", matrix)?;
                let s = self.required(S, "S", matrix)?;
                let eta0 = self.parse(S, "eta0", list)?.map_or(DVector::zeros(n), DVector::from_vec);
                OperatorSpec::Lti { q, r: rm, s, eta0 }
            }
            "composed" if top => {
                let delay = match self.raw(S, "passthrough") {
                    None => None,
                    Some((v, line)) => match v.split_once(':') {
                        None if v == "identity" => None,
                        Some(("delay", h)) => Some(number(h).map_err(|m| ConfigError::at(line, m))?),
                        _ => return Err(ConfigError::at(line, format!("unknown passthrough '{v}'"))),
                    },
                };
                let inner = match self.raw(S, "inner") {
                    None => None,
                    Some((k, _)) if k == "none" => None,
                    Some((k, line)) => Some(Box::new(self.operator_of(&k, line, r, false)?)),
                };
                let p = self.parse(S, "P", matrix)?.unwrap_or_else(|| DMatrix::zeros(1, r));
                let q2 = inner.as_ref().map_or(0, |spec| spec.output_dim());
                let m = self.parse(S, "M", matrix)?.unwrap_or_else(|| DMatrix::from_element(p.nrows(), q2, 1.0));
                OperatorSpec::Composed { delay, inner, p, m }
            }
            "normal-form" if top => {
                let a = self.required(S, "A", matrix)?;
                let n = a.nrows();
                OperatorSpec::NormalForm {
                    a,
                    b: DVector::from_vec(self.required(S, "B", list)?),
                    c: DVector::from_vec(self.required(S, "C", list)?),
                    x0: self.parse(S, "x0", list)?.map_or(DVector::zeros(n), DVector::from_vec),
                }
            }
            other => return Err(ConfigError::at(line, format!("unknown or misplaced operator kind '{other}'"))),
        })
    }

    fn density(&mut self) -> Result<MeasureSpec, ConfigError> {
        let singular = self.parse("operator", "singular", boolean)?;
        let spec = match self.raw("operator", "density") {
            None => MeasureSpec::None,
            Some((v, line)) => match v.split_once(':') {
                None if v == "none" => MeasureSpec::None,
                None if v == "expsqrt" => MeasureSpec::ExpSqrt,
                Some(("exp", rate)) => MeasureSpec::Exp {
                    rate: number(rate).map_err(|m| ConfigError::at(line, m))?,
                    singular: singular.unwrap_or(false),
                },
                Some(("file", path)) => {
                    MeasureSpec::File { path: path.trim().to_string(), singular: singular.unwrap_or(false) }
                }
                _ => return Err(ConfigError::at(line, format!("unknown density '{v}'"))),
            },
        };
        if singular.is_some() && !matches!(spec, MeasureSpec::Exp { .. } | MeasureSpec::File { .. }) {
            return Err(ConfigError::plain("[operator] singular only applies to exp: and file: densities".into()));
        }
        Ok(spec)
    }
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn boolean(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("'{other}' is not true or false")),
    }
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

/// Rows separated by `;`, entries by `,`.
fn rows(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(list).collect()
}

fn matrix(s: &str) -> Result<DMatrix<f64>, String> {
    let rows = rows(s)?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("matrix rows have different lengths".into());
    }
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

fn atoms(s: &str) -> Result<Vec<Atom>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (t, w) = p.split_once(':').ok_or_else(|| format!("atom '{p}' is not 'location:weight'"))?;
            Ok(Atom { location: number(t)?, weight: number(w)? })
        })
        .collect()
}

fn funnel(s: &str) -> Result<FunnelSpec, String> {
    let (family, args) = s.split_once(':').ok_or_else(|| format!("funnel '{s}' is not 'family:params'"))?;
    let args = list(args)?;
    match (family.trim(), args.as_slice()) {
        ("expshift", &[a, b, c]) => Ok(FunnelSpec::ExpShift { a, b, c }),
        ("const", &[lambda]) => Ok(FunnelSpec::Const { lambda }),
        _ => Err(format!("unknown funnel '{s}' (expected expshift:a,b,c or const:lambda)")),
    }
}

fn affine(s: &str) -> Result<(f64, f64, f64), String> {
    match s.split_once(':') {
        Some(("affine", args)) => match list(args)?.as_slice() {
            &[f0, d, w] => Ok((f0, d, w)),
            _ => Err("affine drift takes three numbers F0,D,W".into()),
        },
        _ => Err(format!("unknown drift '{s}' (expected affine:F0,D,W)")),
    }
}

fn disturbance(s: &str) -> Result<Disturbance, String> {
    if s.trim() == "zero" {
        return Ok(Disturbance::Zero { dim: 0 });
    }
    let (kind, args) = s.split_once(':').ok_or_else(|| format!("unknown disturbance '{s}'"))?;
    match (kind.trim(), list(args)?.as_slice()) {
        ("sin", &[amp, omega, phase]) => Ok(Disturbance::Sinusoid { amp: vec![amp], omega, phase }),
        ("step", &[at, before, after]) => Ok(Disturbance::Step { at, before: vec![before], after: vec![after] }),
        _ => Err(format!("unknown disturbance '{s}' (expected zero, sin:A,w,phase or step:at,before,after)")),
    }
}

fn integrator(s: &str) -> Result<Integrator, String> {
    match s.trim() {
        "rk4" => Ok(Integrator::Rk4),
        "euler" => Ok(Integrator::Euler),
        other => Err(format!("unknown integrator '{other}'")),
    }
}

pub fn parse_integrator(s: &str) -> Result<Integrator, String> {
    integrator(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(matrix("1,2;3,4").unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert!(matrix("1,2;3").is_err());
        assert_eq!(atoms("0.5:1, 2:-0.5").unwrap()[1], Atom { location: 2.0, weight: -0.5 });
        assert_eq!(funnel("expshift:2,2,0.1").unwrap(), FunnelSpec::ExpShift { a: 2.0, b: 2.0, c: 0.1 });
        assert!(funnel("expshift:2,2").is_err());
        assert!(number("nan").is_err());
        assert_eq!(affine("affine:0,0,1").unwrap(), (0.0, 0.0, 1.0));
    }

    #[test]
    fn unused_keys_are_errors() {
        let text = "[operator]\nkind = convolution\natoms = 0:1\nQ = 1\n[controller]\nphi = const:1\n";
        let err = RunConfig::parse("x", text).unwrap_err();
        assert!(err.to_string().contains("'Q'"), "{err}");
    }

    #[test]
    fn phi_beyond_r_is_an_error() {
        let text = "[controller]\nr = 1\nphi_0 = const:1\nphi_1 = const:1\n";
        assert!(RunConfig::parse("x", text).is_err());
    }

    #[test]
    fn initial_rows_padded() {
        let text = "[plant]\ny0 = 0.5\n[controller]\nr = 3\nphi = const:1\n";
        let cfg = RunConfig::parse("x", text).unwrap();
        assert_eq!(cfg.initial().unwrap(), vec![vec![0.5], vec![0.0], vec![0.0]]);
    }
}
