use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conformal::DampingCoefficient;
use crate::diagnostics::{
    ch_casimir_and_energy, ch_energy, momentum_law_residual, norm_law_residual, quadratic_law_residual,
    DiagnosticRecord,
};
use crate::error::{Error, Result};
use crate::formulation::{
    make_nls_conjugate_system, make_nls_system, norm_action, Grid1D, MultiSymplecticSystem, QuadraticInvariantAction,
    QuadraticPotential, StateField,
};
use crate::schemes::{self, SchemeKind};
use crate::specialized::{ic_library, step_ch, step_nls, CHField, ComplexField, InitialField, NlsModel};

use super::config::{IcSpec, ModelKind, RunConfig};
use super::expr::ScalarExpr;

/// The evolving solution of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimState {
    Complex(ComplexField),
    Ch(CHField),
    Generic(StateField),
}

impl SimState {
    pub fn t(&self) -> f64 {
        match self {
            SimState::Complex(f) => f.t,
            SimState::Ch(f) => f.t,
            SimState::Generic(f) => f.t,
        }
    }

    fn set_t(&mut self, t: f64) {
        match self {
            SimState::Complex(f) => f.t = t,
            SimState::Ch(f) => f.t = t,
            SimState::Generic(f) => f.t = t,
        }
    }

    pub fn grid(&self) -> Grid1D {
        match self {
            SimState::Complex(f) => f.grid,
            SimState::Ch(f) => f.grid,
            SimState::Generic(f) => f.grid,
        }
    }

    /// Column names of a snapshot row after `x`.
    pub fn columns(&self, labels: &[String]) -> Vec<String> {
        match self {
            SimState::Complex(_) => vec!["p".into(), "q".into(), "modulus".into()],
            SimState::Ch(_) => vec!["u".into()],
            SimState::Generic(f) => {
                let mut c: Vec<String> = (0..f.dim)
                    .map(|i| labels.get(i).cloned().unwrap_or_else(|| format!("z{i}")))
                    .collect();
                if labels.len() >= 2 && labels[0] == "p" && labels[1] == "q" {
                    c.push("modulus".into());
                }
                c
            }
        }
    }

    /// Values of node `n` in the order of [`SimState::columns`].
    pub fn row(&self, n: usize, labels: &[String]) -> Vec<f64> {
        match self {
            SimState::Complex(f) => vec![f.p[n], f.q[n], f.p[n].hypot(f.q[n])],
            SimState::Ch(f) => vec![f.u[n]],
            SimState::Generic(f) => {
                let mut r = f.node(n).to_vec();
                if labels.len() >= 2 && labels[0] == "p" && labels[1] == "q" {
                    r.push(r[0].hypot(r[1]));
                }
                r
            }
        }
    }

    /// The plotted scalar: `|ψ|` for NLS states, `u` for Camassa-Holm.
    pub fn surface_value(&self, n: usize) -> f64 {
        match self {
            SimState::Complex(f) => f.p[n].hypot(f.q[n]),
            SimState::Ch(f) => f.u[n],
            SimState::Generic(f) => {
                let z = f.node(n);
                if f.dim >= 2 {
                    z[0].hypot(z[1])
                } else {
                    z[0]
                }
            }
        }
    }

    /// Discrete L² distance over the evolved (non-auxiliary) components.
    pub fn distance(&self, other: &SimState, dynamic: &[usize]) -> Result<f64> {
        match (self, other) {
            (SimState::Complex(a), SimState::Complex(b)) if a.grid == b.grid => Ok(a.distance(b)),
            (SimState::Ch(a), SimState::Ch(b)) if a.grid == b.grid => Ok(a.distance(b)),
            (SimState::Generic(a), SimState::Generic(b)) if a.same_shape(b) => {
                let s: f64 = (0..a.n_nodes())
                    .flat_map(|n| dynamic.iter().map(move |&c| (n, c)))
                    .map(|(n, c)| (a.node(n)[c] - b.node(n)[c]).powi(2))
                    .sum();
                Ok((s * a.grid.dx()).sqrt())
            }
            _ => Err(Error::Argument("states of different kinds or grids".into())),
        }
    }

    fn norm_sum(&self) -> Option<f64> {
        match self {
            SimState::Complex(f) => Some(f.norm_sum() * f.grid.dx()),
            SimState::Generic(f) if f.dim >= 2 => Some(
                (0..f.n_nodes())
                    .map(|n| f.node(n)[0].powi(2) + f.node(n)[1].powi(2))
                    .sum::<f64>()
                    * f.grid.dx(),
            ),
            _ => None,
        }
    }
}

/// A state together with the number of steps taken to reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub step: usize,
    pub state: SimState,
}

impl Checkpoint {
    pub fn new(step: usize, state: SimState) -> Self {
        Checkpoint {
            schema_version: 1,
            step,
            state,
        }
    }
}

enum Model {
    Nls(NlsModel),
    Ch(DampingCoefficient),
    Generic {
        sys: Box<MultiSymplecticSystem>,
        action: Option<QuadraticInvariantAction>,
    },
}

/// One converged step with its Newton statistics.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: SimState,
    pub iterations: usize,
    pub residual: f64,
}

/// A validated configuration bound to its model.
pub struct Simulation {
    config: RunConfig,
    grid: Grid1D,
    model: Model,
}

fn pure_decay_system(gamma: DampingCoefficient) -> Result<MultiSymplecticSystem> {
    let k = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let l = DMatrix::zeros(2, 2);
    let potential = Arc::new(QuadraticPotential {
        q: DMatrix::zeros(2, 2),
    });
    Ok(MultiSymplecticSystem::new("pure_decay", k, l, potential, gamma)?.with_labels(&["p", "q"]))
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid.grid()?;
        let spec = config.damping_spec();
        let v = config.coefficients.nonlinearity.profile();
        let model = match config.model {
            ModelKind::Nls => Model::Nls(NlsModel::new(v, spec.nls_params())),
            ModelKind::Ch => Model::Ch(spec.damping()),
            ModelKind::NlsFull => {
                let sys = make_nls_system(v, spec.nls_params())?;
                let action = if config.scheme.is_box() && config.scheme != SchemeKind::Expdg {
                    Some(norm_action(&sys)?)
                } else {
                    None
                };
                Model::Generic {
                    sys: Box::new(sys),
                    action,
                }
            }
            ModelKind::NlsConjugate => Model::Generic {
                sys: Box::new(make_nls_conjugate_system(v, spec.nls_params())?),
                action: None,
            },
            ModelKind::PureDecay => Model::Generic {
                sys: Box::new(pure_decay_system(spec.damping())?),
                action: None,
            },
        };
        Ok(Simulation { config, grid, model })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Component labels of generic states.
    pub fn labels(&self) -> Vec<String> {
        match &self.model {
            Model::Generic { sys, .. } => sys.labels().to_vec(),
            _ => Vec::new(),
        }
    }

    /// Components compared by convergence studies.
    pub fn dynamic_components(&self) -> Vec<usize> {
        match &self.model {
            Model::Generic { sys, .. } => sys.dynamic_components(),
            _ => Vec::new(),
        }
    }

    fn complex_ic(&self) -> Result<ComplexField> {
        match &self.config.ic {
            IcSpec::Named(name) => match ic_library(name, self.grid)? {
                InitialField::Complex(f) => Ok(f),
                InitialField::Ch(_) => Err(Error::validation("ic", format!("`{name}` is not a complex profile"))),
            },
            IcSpec::Expression(e) => {
                let p = e.p.as_deref().map(ScalarExpr::parse).transpose()?;
                let q = e.q.as_deref().map(ScalarExpr::parse).transpose()?;
                let eval = |ex: &Option<ScalarExpr>, x: f64| ex.as_ref().map_or(Ok(0.0), |ex| ex.eval(x));
                let xs: Vec<f64> = self.grid.nodes().collect();
                let pv = xs.iter().map(|&x| eval(&p, x)).collect::<Result<Vec<_>>>()?;
                let qv = xs.iter().map(|&x| eval(&q, x)).collect::<Result<Vec<_>>>()?;
                ComplexField::new(self.grid, pv, qv, 0.0)
            }
        }
    }

    pub fn initial_state(&self) -> Result<SimState> {
        match &self.model {
            Model::Nls(_) => self.complex_ic().map(SimState::Complex),
            Model::Ch(_) => match &self.config.ic {
                IcSpec::Named(name) => match ic_library(name, self.grid)? {
                    InitialField::Ch(f) => Ok(SimState::Ch(f)),
                    InitialField::Complex(_) => Err(Error::validation("ic", format!("`{name}` is not a CH profile"))),
                },
                IcSpec::Expression(e) => {
                    let u = ScalarExpr::parse(e.u.as_deref().unwrap_or("0"))?;
                    let vals = self.grid.nodes().map(|x| u.eval(x)).collect::<Result<Vec<_>>>()?;
                    CHField::new(self.grid, vals, 0.0).map(SimState::Ch)
                }
            },
            Model::Generic { sys, .. } => {
                let c = self.complex_ic()?;
                let g = self.grid;
                let dim = sys.dim();
                let mut f = StateField::zeros(g, dim, 0.0);
                for n in 0..g.n_nodes {
                    let z = f.node_mut(n);
                    z[0] = c.p[n];
                    z[1] = c.q[n];
                }
                if dim == 4 {
                    // Auxiliary derivatives from central differences; the
                    // schemes only use them through their time averages.
                    for n in 0..g.n_nodes {
                        let (l, sl) = g.wrap(n, -1);
                        let (r, sr) = g.wrap(n, 1);
                        let v = (sr * c.p[r] - sl * c.p[l]) / (2.0 * g.dx());
                        let w = (sr * c.q[r] - sl * c.q[l]) / (2.0 * g.dx());
                        f.node_mut(n)[2] = v;
                        f.node_mut(n)[3] = w;
                    }
                }
                Ok(SimState::Generic(f))
            }
        }
    }

    /// Advances `state`, which sits at step `k`, to step `k + 1`. The time
    /// is set to `(k + 1)·dt` rather than accumulated.
    pub fn step(&self, state: &SimState, k: usize) -> Result<StepResult> {
        let (dt, cfg, kind) = (self.config.dt, &self.config.newton, self.config.scheme);
        let mut out = match (&self.model, state) {
            (Model::Nls(m), SimState::Complex(f)) => {
                let o = step_nls(f, m, kind, dt, cfg)?;
                StepResult {
                    state: SimState::Complex(o.field),
                    iterations: o.iterations,
                    residual: o.residual,
                }
            }
            (Model::Ch(gamma), SimState::Ch(f)) => {
                let o = step_ch(f, gamma, kind, dt, cfg)?;
                StepResult {
                    state: SimState::Ch(o.field),
                    iterations: o.iterations,
                    residual: o.residual,
                }
            }
            (Model::Generic { sys, .. }, SimState::Generic(f)) => {
                let o = schemes::step(sys, kind, f, dt, cfg)?;
                StepResult {
                    state: SimState::Generic(o.field),
                    iterations: o.iterations,
                    residual: o.residual,
                }
            }
            _ => return Err(Error::Argument("state does not belong to this model".into())),
        };
        out.state.set_t((k + 1) as f64 * dt);
        Ok(out)
    }

    /// Names of the entries [`Simulation::diagnostics`] produces, in column
    /// order.
    pub fn diagnostic_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = match &self.model {
            Model::Nls(_) => vec![
                "norm_law_residual_max",
                "norm_law_residual_global",
                "paper_norm_error",
                "norm_sum",
            ],
            Model::Ch(_) => vec![
                "casimir_residual",
                "casimir_unweighted",
                "energy_residual",
                "energy_residual_theta_weight",
                "energy",
            ],
            Model::Generic { action, .. } => {
                let mut v = Vec::new();
                if action.is_some() {
                    v.push("quadratic_law_residual");
                }
                if self.config.scheme == SchemeKind::Expdg && self.config.model != ModelKind::PureDecay {
                    v.push("momentum_law_residual_max");
                }
                v.push("norm_sum");
                v
            }
        };
        names.extend(["newton_iterations", "newton_residual"]);
        names
    }

    /// Law residuals of the step `prev -> next.state`.
    pub fn diagnostics(&self, prev: &SimState, next: &StepResult) -> Result<DiagnosticRecord> {
        let dt = self.config.dt;
        let mut rec = DiagnosticRecord::new(next.state.t());
        match (&self.model, prev, &next.state) {
            (Model::Nls(m), SimState::Complex(a), SimState::Complex(b)) => {
                let r = norm_law_residual(a, b, &m.params.damping(), dt)?;
                rec.set("norm_law_residual_max", r.max_node)?;
                rec.set("norm_law_residual_global", r.global)?;
                rec.set("paper_norm_error", r.paper_norm_error)?;
            }
            (Model::Ch(gamma), SimState::Ch(a), SimState::Ch(b)) => {
                let r = ch_casimir_and_energy(a, b, gamma, dt)?;
                rec.set("casimir_residual", r.casimir)?;
                rec.set("casimir_unweighted", r.casimir_unweighted)?;
                rec.set("energy_residual", r.energy)?;
                rec.set("energy_residual_theta_weight", r.energy_theta_weight)?;
                rec.set("energy", ch_energy(b))?;
            }
            (Model::Generic { sys, action }, SimState::Generic(a), SimState::Generic(b)) => {
                if let Some(action) = action {
                    rec.set("quadratic_law_residual", quadratic_law_residual(a, b, sys, action, dt)?)?;
                }
                if self.config.scheme == SchemeKind::Expdg && self.config.model != ModelKind::PureDecay {
                    rec.set("momentum_law_residual_max", momentum_law_residual(a, b, sys, dt)?)?;
                }
            }
            _ => return Err(Error::Argument("states do not belong to this model".into())),
        }
        if let Some(n) = next.state.norm_sum() {
            rec.set("norm_sum", n)?;
        }
        rec.set("newton_iterations", next.iterations as f64)?;
        rec.set("newton_residual", next.residual)?;
        Ok(rec)
    }
}

/// Outcome of [`integrate`]: the last good checkpoint and the error that
/// stopped the run early, if any.
pub struct Integration {
    pub last: Checkpoint,
    pub error: Option<Error>,
}

/// Steps from `start` until step `n_steps`, calling `observe` after each
/// step with the step index, the new state and, when `with_diagnostics`,
/// its diagnostic record.
pub fn integrate(
    sim: &Simulation,
    start: Checkpoint,
    n_steps: usize,
    with_diagnostics: bool,
    mut observe: impl FnMut(usize, &SimState, Option<&DiagnosticRecord>) -> Result<()>,
) -> Integration {
    let mut cur = start;
    while cur.step < n_steps {
        let k = cur.step;
        let step = sim.step(&cur.state, k).and_then(|next| {
            let rec = if with_diagnostics {
                Some(sim.diagnostics(&cur.state, &next)?)
            } else {
                None
            };
            observe(k + 1, &next.state, rec.as_ref())?;
            Ok(next)
        });
        match step {
            Ok(next) => cur = Checkpoint::new(k + 1, next.state),
            Err(e) => {
                let t = cur.state.t();
                return Integration {
                    last: cur,
                    error: Some(Error::Step {
                        step: k,
                        t,
                        source: Box::new(e),
                    }),
                };
            }
        }
    }
    Integration { last: cur, error: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::preset;

    #[test]
    fn time_is_set_from_the_step_index() {
        let mut cfg = preset("ch_cosine").unwrap();
        cfg.t_end = 0.01;
        let sim = Simulation::new(cfg).unwrap();
        let s0 = sim.initial_state().unwrap();
        let out = integrate(&sim, Checkpoint::new(0, s0), 10, false, |_, _, _| Ok(()));
        assert!(out.error.is_none());
        assert_eq!(out.last.step, 10);
        assert_eq!(out.last.state.t(), 10.0 * 1e-3);
    }

    #[test]
    fn checkpoint_round_trips_through_json() {
        let sim = Simulation::new(preset("nls_dark").unwrap()).unwrap();
        let c = Checkpoint::new(3, sim.initial_state().unwrap());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Checkpoint>(&text).unwrap(), c);
    }

    #[test]
    fn generic_nls_state_uses_central_differences() {
        let mut cfg = preset("nls_gaussian").unwrap();
        cfg.model = ModelKind::NlsFull;
        cfg.scheme = SchemeKind::Expbox;
        let sim = Simulation::new(cfg).unwrap();
        let SimState::Generic(f) = sim.initial_state().unwrap() else {
            panic!("expected generic state")
        };
        let g = f.grid;
        let n = 300;
        let want = (f.node(n + 1)[0] - f.node(n - 1)[0]) / (2.0 * g.dx());
        assert_eq!(f.node(n)[2], want);
        assert_eq!(sim.dynamic_components(), vec![0, 1]);
    }
}
