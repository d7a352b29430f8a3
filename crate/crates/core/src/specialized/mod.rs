//! Reduced-variable steppers for the two experiment models: the damped-driven
//! NLS in `(p, q)` and the damped Camassa-Holm equation in `u`.

mod ch;
mod nls;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{Boundary, Grid1D, StateField};

pub use ch::{ch_mass, ch_nonlinear, step_ch, step_ch_expbox, ChStepOutcome};
pub use nls::{step_nls, step_nls_embs, NlsModel, NlsStepOutcome};

/// `ψ = p + iq` sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
}

impl ComplexField {
    pub fn new(grid: Grid1D, p: Vec<f64>, q: Vec<f64>, t: f64) -> Result<Self> {
        if p.len() != grid.n_nodes || q.len() != grid.n_nodes {
            return Err(Error::Argument(format!(
                "complex field needs {} values per part, got {} and {}",
                grid.n_nodes,
                p.len(),
                q.len()
            )));
        }
        if p.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::Argument("complex field contains non-finite values".into()));
        }
        Ok(ComplexField { grid, p, q, t })
    }

    pub fn zeros(grid: Grid1D, t: f64) -> Self {
        ComplexField {
            grid,
            p: vec![0.0; grid.n_nodes],
            q: vec![0.0; grid.n_nodes],
            t,
        }
    }

    /// Samples `x ↦ (Re ψ, Im ψ)`.
    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (p, q) = grid.nodes().map(f).unzip();
        Self::new(grid, p, q, t)
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(p, q)| p.hypot(*q)).collect()
    }

    /// `Σ |ψ_n|²`.
    pub fn norm_sum(&self) -> f64 {
        self.p.iter().zip(&self.q).map(|(p, q)| p * p + q * q).sum()
    }

    /// Discrete L² distance `sqrt(dx Σ |ψ - φ|²)`.
    pub fn distance(&self, other: &ComplexField) -> f64 {
        let s: f64 = self
            .p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        (self.grid.dx() * s).sqrt()
    }

    /// Interleaved `[p0, q0, p1, q1, ...]`.
    pub(crate) fn interleaved(&self) -> Vec<f64> {
        self.p.iter().zip(&self.q).flat_map(|(p, q)| [*p, *q]).collect()
    }

    pub(crate) fn from_interleaved(grid: Grid1D, x: &[f64], t: f64) -> Self {
        ComplexField {
            grid,
            p: x.iter().step_by(2).copied().collect(),
            q: x.iter().skip(1).step_by(2).copied().collect(),
            t,
        }
    }

    /// The two-component state field `[p, q]` per node.
    pub fn to_state(&self) -> StateField {
        StateField {
            grid: self.grid,
            dim: 2,
            values: self.interleaved(),
            t: self.t,
        }
    }
}

/// Camassa-Holm velocity `u` on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CHField {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub t: f64,
}

impl CHField {
    pub fn new(grid: Grid1D, u: Vec<f64>, t: f64) -> Result<Self> {
        if grid.boundary != Boundary::Periodic {
            return Err(Error::Configuration(
                "the Camassa-Holm scheme needs a periodic grid".into(),
            ));
        }
        if u.len() != grid.n_nodes {
            return Err(Error::Argument(format!(
                "field has {} values, grid has {} nodes",
                u.len(),
                grid.n_nodes
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("field contains non-finite values".into()));
        }
        Ok(CHField { grid, u, t })
    }

    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect(), t)
    }

    /// Discrete L² distance.
    pub fn distance(&self, other: &CHField) -> f64 {
        let s: f64 = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).powi(2)).sum();
        (self.grid.dx() * s).sqrt()
    }
}

/// Initial condition produced by [`ic_library`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialField {
    Complex(ComplexField),
    Ch(CHField),
}

/// Names accepted by [`ic_library`].
pub const IC_NAMES: [&str; 5] = ["tanh_dark", "gaussian", "soliton_pair", "ch_cosine", "ch_kink"];

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Samples a named initial profile at the grid nodes.
///
/// * `tanh_dark`: `ψ = tanh x`
/// * `gaussian`: `ψ = sqrt(2/(3√π)) exp(-(2x/3)²/2)`
/// * `soliton_pair`: `ψ = e^{8ix} sech(x+5) + 1.5 e^{-7ix} sech(1.5(x-5))`
/// * `ch_cosine`: `u = 0.2 + 0.1 cos 3x`
/// * `ch_kink`: `u = e^{-|x|}`
pub fn ic_library(name: &str, grid: Grid1D) -> Result<InitialField> {
    let complex = |f: &dyn Fn(f64) -> (f64, f64)| ComplexField::from_fn(grid, 0.0, f).map(InitialField::Complex);
    match name {
        "tanh_dark" => complex(&|x| (x.tanh(), 0.0)),
        "gaussian" => {
            let amp = (2.0 / (3.0 * std::f64::consts::PI.sqrt())).sqrt();
            complex(&move |x| (amp * (-(2.0 * x / 3.0).powi(2) / 2.0).exp(), 0.0))
        }
        "soliton_pair" => complex(&|x| {
            let a = sech(x + 5.0);
            let b = 1.5 * sech(1.5 * (x - 5.0));
            (
                a * (8.0 * x).cos() + b * (-7.0 * x).cos(),
                a * (8.0 * x).sin() + b * (-7.0 * x).sin(),
            )
        }),
        "ch_cosine" => CHField::from_fn(grid, 0.0, |x| 0.2 + 0.1 * (3.0 * x).cos()).map(InitialField::Ch),
        "ch_kink" => CHField::from_fn(grid, 0.0, |x| (-x.abs()).exp()).map(InitialField::Ch),
        other => Err(Error::Argument(format!(
            "unknown initial condition `{other}`; expected one of {}",
            IC_NAMES.join(", ")
        ))),
    }
}
