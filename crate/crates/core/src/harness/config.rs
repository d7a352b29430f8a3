use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::conformal::DampingCoefficient;
use crate::error::{Error, Result};
use crate::formulation::{Boundary, Grid1D, NlsParams, Profile};
use crate::newton::NewtonConfig;
use crate::schemes::SchemeKind;
use crate::specialized::IC_NAMES;

/// Equation family a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Damped-driven NLS in the reduced `(p, q)` variables.
    Nls,
    /// The same equation as a four-component multi-symplectic system.
    NlsFull,
    /// Four-component NLS driven through `ψ*`.
    NlsConjugate,
    /// Damped Camassa-Holm in `u`.
    Ch,
    /// `K z_t = -a(t) K z`: no potential, no spatial coupling.
    PureDecay,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nls => "nls",
            ModelKind::NlsFull => "nls_full",
            ModelKind::NlsConjugate => "nls_conjugate",
            ModelKind::Ch => "ch",
            ModelKind::PureDecay => "pure_decay",
        }
    }

    fn allows(self, scheme: SchemeKind) -> bool {
        match self {
            ModelKind::Nls => matches!(scheme, SchemeKind::Embs | SchemeKind::MixedEulerBaseline),
            ModelKind::Ch => matches!(scheme, SchemeKind::Expbox | SchemeKind::MidpointBoxBaseline),
            ModelKind::NlsFull | ModelKind::NlsConjugate | ModelKind::PureDecay => true,
        }
    }
}

/// A time-dependent scalar coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant {
        value: f64,
    },
    /// `offset + amplitude·sin(frequency·t)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl CoefficientSpec {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            CoefficientSpec::Constant { value } => value,
            CoefficientSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * t).sin(),
        }
    }

    pub fn damping(&self) -> DampingCoefficient {
        match *self {
            CoefficientSpec::Constant { value } => DampingCoefficient::constant(value),
            CoefficientSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => DampingCoefficient::sinusoid(offset, amplitude, frequency),
        }
    }

    /// NLS parameters `(γ, c, ω)` with `β = γ + c sin ωt`, `α = c cos ωt`.
    pub fn nls_params(&self) -> NlsParams {
        match *self {
            CoefficientSpec::Constant { value } => NlsParams::new(value, 0.0, 0.0),
            CoefficientSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => NlsParams::new(offset, amplitude, frequency),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            CoefficientSpec::Constant { value } => value.is_finite(),
            CoefficientSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => offset.is_finite() && amplitude.is_finite() && frequency.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(field, "coefficients must be finite"))
        }
    }
}

/// Nonlinearity `V(s)` of the NLS models, `s = |ψ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `V(s) = s²/2`.
    #[default]
    Cubic,
    /// `V(s) = -s²/2`.
    DefocusingCubic,
    /// `V ≡ 0`.
    Linear,
}

impl Nonlinearity {
    pub fn profile(self) -> Profile {
        match self {
            Nonlinearity::Cubic => Profile::cubic(),
            Nonlinearity::DefocusingCubic => Profile::new(|s| -0.5 * s * s, |s| -s, |_| -1.0)
                .expect("defocusing profile is consistent")
                .with_label("defocusing_cubic"),
            Nonlinearity::Linear => Profile::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    /// Damping `β(t)` of the NLS models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<CoefficientSpec>,
    /// Damping `γ(t)` of the Camassa-Holm and pure-decay models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<CoefficientSpec>,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Authoritative; `dx = (x_max - x_min)/n_nodes`.
    pub n_nodes: usize,
    pub boundary: Boundary,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.x_min, self.x_max, self.n_nodes, self.boundary)
            .map_err(|e| Error::validation("grid", e.to_string()))
    }
}

/// Initial data: a library name or per-component expressions in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IcSpec {
    Named(String),
    Expression(IcExpression),
}

/// Expressions such as `"sech(x) * cos(2.0*x)"`. NLS models read `p` and
/// `q` (missing parts are zero), Camassa-Holm reads `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IcExpression {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub snapshot_stride: usize,
    pub diagnostics_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            snapshot_stride: 100,
            diagnostics_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub scheme: SchemeKind,
    pub grid: GridConfig,
    pub dt: f64,
    pub t_end: f64,
    pub ic: IcSpec,
    #[serde(default)]
    pub coefficients: Coefficients,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Number of steps to reach `t_end`; `t_end` must be a whole number of
    /// steps.
    pub fn n_steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if !n.is_finite() || n < 1.0 || (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::validation(
                "t_end",
                format!("{} is not a whole number of steps of dt = {}", self.t_end, self.dt),
            ));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::validation(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        self.n_steps()?;
        if self.output.snapshot_stride == 0 {
            return Err(Error::validation("output.snapshot_stride", "must be at least 1"));
        }
        if self.output.diagnostics_stride == 0 {
            return Err(Error::validation("output.diagnostics_stride", "must be at least 1"));
        }
        self.grid.grid()?;
        self.newton.validate()?;
        if !self.model.allows(self.scheme) {
            return Err(Error::validation(
                "scheme",
                format!("model `{}` cannot be run with `{}`", self.model.name(), self.scheme),
            ));
        }
        if self.model == ModelKind::Ch && self.grid.boundary != Boundary::Periodic {
            return Err(Error::validation(
                "grid.boundary",
                "the ch model requires a periodic grid",
            ));
        }
        let (needed, unused) = match self.model {
            ModelKind::Nls | ModelKind::NlsFull | ModelKind::NlsConjugate => ("beta", self.coefficients.gamma),
            ModelKind::Ch | ModelKind::PureDecay => ("gamma", self.coefficients.beta),
        };
        if unused.is_some() {
            let other = if needed == "beta" { "gamma" } else { "beta" };
            return Err(Error::validation(
                format!("coefficients.{other}"),
                format!("not used by model `{}`", self.model.name()),
            ));
        }
        match needed {
            "beta" => self.coefficients.beta,
            _ => self.coefficients.gamma,
        }
        .map(|c| c.validate(&format!("coefficients.{needed}")))
        .transpose()?;
        self.validate_ic()
    }

    fn validate_ic(&self) -> Result<()> {
        let is_ch = self.model == ModelKind::Ch;
        match &self.ic {
            IcSpec::Named(name) => {
                if !IC_NAMES.contains(&name.as_str()) {
                    return Err(Error::validation(
                        "ic",
                        format!(
                            "unknown initial condition `{name}`; expected one of {}",
                            IC_NAMES.join(", ")
                        ),
                    ));
                }
                if name.starts_with("ch_") != is_ch {
                    return Err(Error::validation(
                        "ic",
                        format!("`{name}` does not apply to model `{}`", self.model.name()),
                    ));
                }
            }
            IcSpec::Expression(e) => {
                let ok = if is_ch {
                    e.u.is_some() && e.p.is_none() && e.q.is_none()
                } else {
                    e.u.is_none() && (e.p.is_some() || e.q.is_some())
                };
                if !ok {
                    let want = if is_ch { "`u`" } else { "`p` and/or `q`" };
                    return Err(Error::validation(
                        "ic",
                        format!("model `{}` expects {want}", self.model.name()),
                    ));
                }
                for s in [&e.p, &e.q, &e.u].into_iter().flatten() {
                    super::expr::ScalarExpr::parse(s).map_err(|err| Error::validation("ic", err.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// Damping of the model: `β` for NLS models, `γ` otherwise; zero when
    /// not configured.
    pub fn damping_spec(&self) -> CoefficientSpec {
        let spec = match self.model {
            ModelKind::Nls | ModelKind::NlsFull | ModelKind::NlsConjugate => self.coefficients.beta,
            ModelKind::Ch | ModelKind::PureDecay => self.coefficients.gamma,
        };
        spec.unwrap_or(CoefficientSpec::Constant { value: 0.0 })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Configuration(format!("cannot serialize config: {e}")))
    }
}

/// Parses and validates a TOML run configuration. Unknown keys are
/// rejected; errors name the offending key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: toml::Value = toml::from_str(text).map_err(|e| Error::Parse {
        path: ".".into(),
        message: e.to_string(),
    })?;
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
