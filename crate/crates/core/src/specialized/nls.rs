use crate::conformal::exp_weights;
use crate::error::{Error, Result};
use crate::formulation::{NlsParams, Profile};
use crate::linalg::{PeriodicBlockLu, PeriodicBlockMatrix};
use crate::newton::{newton_solve, NewtonConfig};
use crate::schemes::{SchemeKind, TimeWeights};

use super::ComplexField;

/// Nonlinearity `V` and coefficients `(γ, c, ω)` of the damped-driven NLS.
#[derive(Debug, Clone)]
pub struct NlsModel {
    pub v: Profile,
    pub params: NlsParams,
}

impl NlsModel {
    pub fn new(v: Profile, params: NlsParams) -> Self {
        NlsModel { v, params }
    }

    /// Cubic nonlinearity `V(s) = s²/2`.
    pub fn cubic(params: NlsParams) -> Self {
        NlsModel {
            v: Profile::cubic(),
            params,
        }
    }

    fn weights(&self, kind: SchemeKind, t: f64, dt: f64) -> Result<TimeWeights> {
        match kind {
            SchemeKind::Embs => {
                let w = exp_weights(&self.params.damping(), t, dt)?;
                Ok(TimeWeights {
                    plus: w.plus,
                    minus: w.minus,
                    explicit_damping: 0.0,
                })
            }
            SchemeKind::MixedEulerBaseline => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::Argument(format!("dt must be positive, got {dt}")));
                }
                Ok(TimeWeights {
                    plus: 1.0,
                    minus: 1.0,
                    explicit_damping: self.params.beta(t + 0.5 * dt),
                })
            }
            other => Err(Error::Configuration(format!(
                "the reduced NLS stepper supports embs and mixed_euler_baseline, not {other}"
            ))),
        }
    }
}

/// Result of one converged reduced NLS step.
#[derive(Debug, Clone)]
pub struct NlsStepOutcome {
    pub field: ComplexField,
    pub iterations: usize,
    pub residual: f64,
}

struct NlsProblem<'a> {
    model: &'a NlsModel,
    field: &'a ComplexField,
    w: TimeWeights,
    dt: f64,
    alpha: f64,
}

impl NlsProblem<'_> {
    /// `A p`, `A q` at every node.
    fn averages(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (wp, wm) = (self.w.plus, self.w.minus);
        let n = self.field.grid.n_nodes;
        let p = (0..n).map(|i| 0.5 * (wp * x[2 * i] + wm * self.field.p[i])).collect();
        let q = (0..n)
            .map(|i| 0.5 * (wp * x[2 * i + 1] + wm * self.field.q[i]))
            .collect();
        (p, q)
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let grid = &self.field.grid;
        let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        let (big_p, big_q) = self.averages(x);
        let (wp, wm, e, dt) = (self.w.plus, self.w.minus, self.w.explicit_damping, self.dt);
        for n in 0..grid.n_nodes {
            let (l, sl) = grid.wrap(n, -1);
            let (r, sr) = grid.wrap(n, 1);
            let (pn, qn) = (big_p[n], big_q[n]);
            let lap_p = (sr * big_p[r] - 2.0 * pn + sl * big_p[l]) * inv_dx2;
            let lap_q = (sr * big_q[r] - 2.0 * qn + sl * big_q[l]) * inv_dx2;
            let g = self.model.v.first(pn * pn + qn * qn) + self.alpha;
            out[2 * n] = (wp * x[2 * n + 1] - wm * self.field.q[n]) - dt * (lap_p + g * pn) + dt * e * qn;
            out[2 * n + 1] = (wp * x[2 * n] - wm * self.field.p[n]) + dt * (lap_q + g * qn) + dt * e * pn;
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Evaluation {
                t: self.field.t,
                what: "non-finite NLS residual".into(),
            })
        }
    }

    fn jacobian(&self, x: &[f64]) -> Result<PeriodicBlockLu> {
        let grid = &self.field.grid;
        let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        let (big_p, big_q) = self.averages(x);
        let (wp, e, dt) = (self.w.plus, self.w.explicit_damping, self.dt);
        let c = 0.5 * wp * dt;
        let mut jac = PeriodicBlockMatrix::new(grid.n_nodes, 2, 1);
        for n in 0..grid.n_nodes {
            let (pn, qn) = (big_p[n], big_q[n]);
            let s = pn * pn + qn * qn;
            let g = self.model.v.first(s) + self.alpha;
            let h = 2.0 * self.model.v.second(s);
            for off in [-1, 1] {
                let (m, sg) = grid.wrap(n, off);
                jac.add(n, 0, m, 0, -c * sg * inv_dx2);
                jac.add(n, 1, m, 1, c * sg * inv_dx2);
            }
            jac.add(n, 0, n, 0, -c * (-2.0 * inv_dx2 + g + h * pn * pn));
            jac.add(n, 0, n, 1, wp - c * h * pn * qn + c * e);
            jac.add(n, 1, n, 0, wp + c * h * pn * qn + c * e);
            jac.add(n, 1, n, 1, c * (-2.0 * inv_dx2 + g + h * qn * qn));
        }
        jac.factor()
    }
}

/// One step of the two-component NLS scheme in `(p, q)`. `kind` selects the
/// exponential scheme (`Embs`) or the midpoint baseline
/// (`MixedEulerBaseline`).
pub fn step_nls(
    field: &ComplexField,
    model: &NlsModel,
    kind: SchemeKind,
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<NlsStepOutcome> {
    let w = model.weights(kind, field.t, dt)?;
    let problem = NlsProblem {
        model,
        field,
        w,
        dt,
        alpha: model.params.alpha(field.t + 0.5 * dt),
    };
    let out = newton_solve(
        |x, r| problem.residual(x, r),
        |x| problem.jacobian(x),
        field.interleaved(),
        cfg,
    )?;
    Ok(NlsStepOutcome {
        field: ComplexField::from_interleaved(field.grid, &out.x, field.t + dt),
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// Exponential two-component NLS step.
pub fn step_nls_embs(field: &ComplexField, model: &NlsModel, dt: f64, cfg: &NewtonConfig) -> Result<ComplexField> {
    step_nls(field, model, SchemeKind::Embs, dt, cfg).map(|o| o.field)
}
