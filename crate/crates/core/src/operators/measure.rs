//! Borel measures on `[0, ∞)` as finite atom sets plus an optional density.
//!
//! A density may carry an inverse-square-root factor at the origin,
//! `g(ξ) = ĝ(ξ)/√ξ`. Integrals against such densities are taken in the
//! variable `σ = √ξ` (`dξ = 2σ dσ`), which cancels the singularity exactly
//! and leaves a smooth integrand for composite Simpson.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::OperatorError;

/// Minimum Simpson panels per unit length of the integration variable.
pub const DEFAULT_PANELS_PER_UNIT: usize = 64;

// Upper integration limit for densities with unbounded support when a
// whole-line quantity (total variation, tail mass) is needed.
const UNBOUNDED_SUPPORT_CUTOFF: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Piecewise-linear density through `(ξ_k, g_k)`, zero outside the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, OperatorError> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(OperatorError::InvalidMeasure("grid density needs >= 2 matching (xi, g) pairs".into()));
        }
        if nodes[0] < 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OperatorError::InvalidMeasure("grid nodes must be >= 0 and strictly increasing".into()));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(OperatorError::InvalidMeasure("grid density has non-finite entries".into()));
        }
        Ok(Self { nodes, values })
    }

    /// Parses two whitespace- or comma-separated numeric columns. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, OperatorError> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(OperatorError::DensityFile(format!("line {}: expected 2 columns", lineno + 1)));
            }
            let parse =
                |s: &str| s.parse::<f64>().map_err(|e| OperatorError::DensityFile(format!("line {}: {e}", lineno + 1)));
            nodes.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        Self::new(nodes, values).map_err(|e| OperatorError::DensityFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, OperatorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OperatorError::DensityFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.nodes.len();
        if xi < self.nodes[0] || xi > self.nodes[n - 1] {
            return 0.0;
        }
        let i = self.nodes.partition_point(|&s| s <= xi).clamp(1, n - 1);
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        let w = (xi - x0) / (x1 - x0);
        self.values[i - 1] + (self.values[i] - self.values[i - 1]) * w
    }

    pub fn support_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

#[derive(Clone)]
pub enum DensityProfile {
    /// `ĝ(ξ) = e^{−rate ξ}`.
    Exp {
        rate: f64,
    },
    Grid(GridDensity),
    Closed(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exp { rate } => write!(f, "Exp {{ rate: {rate} }}"),
            Self::Grid(g) => write!(f, "Grid({} nodes)", g.nodes.len()),
            Self::Closed(_) => write!(f, "Closed(..)"),
        }
    }
}

/// `g(ξ) = ĝ(ξ)` or, when `singular`, `g(ξ) = ĝ(ξ)/√ξ`.
#[derive(Clone, Debug)]
pub struct Density {
    pub profile: DensityProfile,
    pub singular: bool,
}

impl Density {
    pub fn regular(profile: DensityProfile) -> Self {
        Self { profile, singular: false }
    }

    pub fn singular(profile: DensityProfile) -> Self {
        Self { profile, singular: true }
    }

    /// The smooth factor `ĝ`.
    pub fn smooth_part(&self, xi: f64) -> f64 {
        match &self.profile {
            DensityProfile::Exp { rate } => (-rate * xi).exp(),
            DensityProfile::Grid(g) => g.eval(xi),
            DensityProfile::Closed(f) => f(xi),
        }
    }

    /// `g(ξ)`; infinite at the origin for singular densities with `ĝ(0) ≠ 0`.
    pub fn eval(&self, xi: f64) -> f64 {
        let g = self.smooth_part(xi);
        if self.singular {
            g / xi.sqrt()
        } else {
            g
        }
    }

    /// End of the support, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match &self.profile {
            DensityProfile::Grid(g) => Some(g.support_end()),
            _ => None,
        }
    }

    /// `∫_a^b f(ξ) g(ξ) dξ` by composite Simpson, in `σ = √ξ` when singular.
    pub fn integrate(&self, a: f64, b: f64, panels_per_unit: usize, f: impl Fn(f64) -> f64) -> f64 {
        let b = self.support_end().map_or(b, |s| b.min(s));
        if !(b > a) {
            return 0.0;
        }
        if self.singular {
            let (sa, sb) = (a.sqrt(), b.sqrt());
            simpson(sa, sb, panels_per_unit, |s| {
                let xi = s * s;
                2.0 * self.smooth_part(xi) * f(xi)
            })
        } else {
            simpson(a, b, panels_per_unit, |xi| self.smooth_part(xi) * f(xi))
        }
    }

    fn whole_line_end(&self) -> f64 {
        self.support_end().unwrap_or(UNBOUNDED_SUPPORT_CUTOFF)
    }
}

/// Composite Simpson with at least `panels_per_unit` panels per unit length
/// (and at least two panels).
pub(crate) fn simpson(a: f64, b: f64, panels_per_unit: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut n = (((b - a) * panels_per_unit as f64).ceil() as usize).max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Clone, Debug)]
pub struct Measure {
    atoms: Vec<Atom>,
    density: Option<Density>,
}

impl Measure {
    /// Atoms are sorted by location; duplicate or negative locations are rejected.
    pub fn new(mut atoms: Vec<Atom>, density: Option<Density>) -> Result<Self, OperatorError> {
        if atoms.iter().any(|a| !(a.location >= 0.0) || !a.location.is_finite() || !a.weight.is_finite()) {
            return Err(OperatorError::InvalidMeasure("atoms need finite locations >= 0 and finite weights".into()));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(OperatorError::InvalidMeasure("atom locations must be distinct".into()));
        }
        let measure = Self { atoms, density };
        let tv = measure.total_variation();
        if !tv.is_finite() {
            return Err(OperatorError::InvalidMeasure(format!("total variation is not finite ({tv})")));
        }
        Ok(measure)
    }

    pub fn zero() -> Self {
        Self { atoms: Vec::new(), density: None }
    }

    /// `δ_{t0}`.
    pub fn dirac(t0: f64) -> Result<Self, OperatorError> {
        Self::new(vec![Atom { location: t0, weight: 1.0 }], None)
    }

    /// Density `e^{−ξ}/√ξ`: integrable, not square integrable, total mass `√π`.
    pub fn exp_sqrt() -> Self {
        Self { atoms: Vec::new(), density: Some(Density::singular(DensityProfile::Exp { rate: 1.0 })) }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) && self.density.is_none()
    }

    /// `Σ|a_k| + ∫|g|`, the density part over its (truncated) support.
    pub fn total_variation(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight.abs()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| abs_integral(d, 0.0, d.whole_line_end()));
        atoms + dens
    }

    /// Mass of `|𝔥|` beyond `b`.
    pub fn tail_mass(&self, b: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.location > b).map(|a| a.weight.abs()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| abs_integral(d, b, d.whole_line_end()));
        atoms + dens
    }
}

fn abs_integral(d: &Density, a: f64, b: f64) -> f64 {
    let b = d.support_end().map_or(b, |s| b.min(s));
    if !(b > a) {
        return 0.0;
    }
    if d.singular {
        simpson(a.sqrt(), b.sqrt(), DEFAULT_PANELS_PER_UNIT, |s| 2.0 * d.smooth_part(s * s).abs())
    } else {
        simpson(a, b, DEFAULT_PANELS_PER_UNIT, |xi| d.smooth_part(xi).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn exp_sqrt_mass_is_sqrt_pi() {
        let m = Measure::exp_sqrt();
        assert!((m.total_variation() - SQRT_PI).abs() < 1e-9);
        // Tail beyond 10 is about erfc(√10)·√π ≈ 1.4e-5.
        let tail = m.tail_mass(10.0);
        assert!(tail > 1.0e-5 && tail < 2.0e-5, "{tail}");
    }

    #[test]
    fn atoms_sorted_and_validated() {
        let m = Measure::new(vec![Atom { location: 2.0, weight: -1.0 }, Atom { location: 0.5, weight: 3.0 }], None)
            .unwrap();
        assert_eq!(m.atoms()[0].location, 0.5);
        assert_eq!(m.total_variation(), 4.0);
        assert_eq!(m.tail_mass(1.0), 1.0);
        assert!(Measure::new(vec![Atom { location: 1.0, weight: 1.0 }; 2], None).is_err());
        assert!(Measure::dirac(-1.0).is_err());
    }

    #[test]
    fn grid_density_parsing() {
        let g = GridDensity::parse("# xi g\n0 1\n1, 3\n\n2 1\n").unwrap();
        assert_eq!(g.eval(0.5), 2.0);
        assert_eq!(g.eval(2.5), 0.0);
        let m = Measure::new(vec![], Some(Density::regular(DensityProfile::Grid(g)))).unwrap();
        assert!((m.total_variation() - 4.0).abs() < 1e-12);
        assert!(GridDensity::parse("0 1\n0 2\n").is_err());
        assert!(GridDensity::parse("0 1 2\n").is_err());
        assert!(GridDensity::parse("0 x\n1 2\n").is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(0.0, 2.0, 1, |x| x * x * x - x);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
