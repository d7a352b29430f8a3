use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearSolve;
use crate::util::max_abs;

/// How the Newton Jacobian is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    /// Stop when the residual infinity norm is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian: JacobianMode,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 50,
            jacobian: JacobianMode::Analytic,
        }
    }
}

impl NewtonConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::validation(
                "newton.tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("newton.max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Converged Newton iterate with its statistics.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

const MAX_HALVINGS: usize = 30;

/// Damped Newton iteration for `residual(x) = 0`.
///
/// Each full step is halved up to 30 times until the residual norm drops.
/// Fails with [`Error::NonConvergence`] carrying the best iterate when
/// `max_iter` is exhausted or no halving reduces the residual.
pub fn newton_solve<R, J, S>(
    mut residual: R,
    mut jacobian: J,
    guess: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64], &mut [f64]) -> Result<()>,
    J: FnMut(&[f64]) -> Result<S>,
    S: LinearSolve,
{
    cfg.validate()?;
    let n = guess.len();
    let mut x = guess;
    let mut r = vec![0.0; n];
    residual(&x, &mut r)?;
    let mut norm = max_abs(&r);
    if !norm.is_finite() {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: norm,
            best: x,
        });
    }
    let mut trial = vec![0.0; n];
    let mut rt = vec![0.0; n];
    for iter in 0..cfg.max_iter {
        if norm <= cfg.tol {
            return Ok(NewtonOutcome {
                x,
                iterations: iter,
                residual: norm,
            });
        }
        let solver = jacobian(&x)?;
        let mut dx: Vec<f64> = r.iter().map(|v| -v).collect();
        solver.solve(&mut dx)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            for i in 0..n {
                trial[i] = x[i] + lambda * dx[i];
            }
            let ok = residual(&trial, &mut rt).is_ok();
            let nt = max_abs(&rt);
            if ok && nt.is_finite() && nt < norm {
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut r, &mut rt);
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // At the rounding floor no step can reduce the residual further.
            return Err(Error::NonConvergence {
                iterations: iter + 1,
                residual: norm,
                best: x,
            });
        }
    }
    if norm <= cfg.tol {
        return Ok(NewtonOutcome {
            x,
            iterations: cfg.max_iter,
            residual: norm,
        });
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual: norm,
        best: x,
    })
}
