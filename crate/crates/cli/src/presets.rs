//! Built-in scenarios, written in the same format as config files.

use crate::config::RunConfig;
use crate::ConfigError;

/// Transport-equation loop `ẏ = z(t, 0) + u`, `∂_t z = ∂_ξ z + f(ξ) y` with
/// `f(ξ) = e^{−ξ}/√ξ` on `[0, 10]`, tracking `cos t`.
pub const PAPER_SEC4: &str = r#"# Transport-equation loop, y(0) = 0, tracking cos t on [0, 15].
#
# The reference discretization uses M = 1000 time steps, alpha = 0.4 and
# N = floor(M (b - a) / (alpha T)) cells, i.e. a Courant number
# c dt / dxi = 1 / alpha = 2.5, outside the stability range of explicit
# upwinding. Here the grid is derived from dt instead (N = floor(b / (c dt)),
# Courant number 1), which advects exactly.
[plant]
f = affine:0,0,1
gamma = 1
y0 = 0

[operator]
kind = transport
density = expsqrt
c = 1
b = 10

[controller]
r = 1
phi = expshift:2,2,0.1

[reference]
kind = cos
amp = 1
omega = 1
phase = 0

[sim]
horizon = 15
dt = 0.0025
integrator = rk4
"#;

/// `𝔥 = δ₀`: the loop collapses to `ẏ = y + u`.
pub const DIRAC0: &str = r#"# h = delta_0: y' = y + u.
[plant]
f = affine:0,0,1
gamma = 1
y0 = 0

[operator]
kind = convolution
atoms = 0:1

[controller]
r = 1
phi = expshift:2,2,0.1

[reference]
kind = cos

[sim]
horizon = 10
dt = 0.0025
"#;

/// `𝔥 = δ_{0.5}`: `ẏ(t) = y(t − 0.5) + u(t)`, with `y = 0` before the delay
/// has elapsed.
pub const DELAY: &str = r#"# h = delta_{0.5}: y'(t) = y(t - 0.5) + u(t).
[plant]
f = affine:0,0,1
gamma = 1
y0 = 0

[operator]
kind = convolution
atoms = 0.5:1

[controller]
r = 1
phi = expshift:2,2,0.1

[reference]
kind = cos

[sim]
horizon = 10
dt = 0.0025
"#;

/// `(s + 2)/(s + 1)³` in companion form: relative degree 2, one stable zero.
pub const BI_FORM_DEMO: &str = r#"# Third-order linear plant (s + 2) / (s + 1)^3, relative degree 2, rewritten
# as an output chain plus one-dimensional internal dynamics.
[operator]
kind = normal-form
A = 0,1,0; 0,0,1; -1,-3,-3
B = 0,0,1
C = 2,1,0
x0 = 0,0,0

[controller]
r = 2
phi = expshift:2,2,0.1

[reference]
kind = cos

[sim]
horizon = 10
dt = 0.001
"#;

pub const NAMES: [&str; 4] = ["paper-sec4", "dirac0", "delay", "bi-form-demo"];

pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "paper-sec4" => Some(PAPER_SEC4),
        "dirac0" => Some(DIRAC0),
        "delay" => Some(DELAY),
        "bi-form-demo" => Some(BI_FORM_DEMO),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    let text = text(name).ok_or_else(|| ConfigError::plain(format!("unknown preset '{name}'")))?;
    RunConfig::parse(name, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_build() {
        for name in NAMES {
            let cfg = preset(name).unwrap();
            cfg.scenario().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
