use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// `z_{n+N} = -z_n` for every component.
    AntiPeriodic,
}

impl Boundary {
    pub fn sign(self) -> f64 {
        match self {
            Boundary::Periodic => 1.0,
            Boundary::AntiPeriodic => -1.0,
        }
    }
}

/// Uniform 1D grid with nodes `x_n = x_min + n·dx`, `n = 0..n_nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_nodes: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_nodes: usize, boundary: Boundary) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::Argument(format!("grid needs at least 3 nodes, got {n_nodes}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Argument(format!(
                "grid interval [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        Ok(Grid1D {
            n_nodes,
            x_min,
            x_max,
            boundary,
        })
    }

    pub fn periodic(x_min: f64, x_max: f64, n_nodes: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_nodes, Boundary::Periodic)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_nodes as f64
    }

    pub fn x(&self, n: usize) -> f64 {
        self.x_min + n as f64 * self.dx()
    }

    /// Cell midpoint between node `n` and node `n + 1`.
    pub fn x_half(&self, n: usize) -> f64 {
        self.x_min + (n as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |n| self.x(n))
    }

    /// Index and boundary sign of node `n + offset` after wrapping.
    #[inline]
    pub fn wrap(&self, n: usize, offset: isize) -> (usize, f64) {
        let len = self.n_nodes as isize;
        let m = n as isize + offset;
        let wraps = m.div_euclid(len);
        let idx = m.rem_euclid(len) as usize;
        let sign = if wraps % 2 == 0 { 1.0 } else { self.boundary.sign() };
        (idx, sign)
    }

    /// Cyclic distance between two node indices.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        d.min(self.n_nodes - d)
    }
}

/// The discrete solution: one `dim`-vector per node, node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub grid: Grid1D,
    pub dim: usize,
    pub values: Vec<f64>,
    pub t: f64,
}

impl StateField {
    pub fn zeros(grid: Grid1D, dim: usize, t: f64) -> Self {
        StateField {
            grid,
            dim,
            values: vec![0.0; grid.n_nodes * dim],
            t,
        }
    }

    pub fn from_values(grid: Grid1D, dim: usize, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.n_nodes * dim {
            return Err(Error::Argument(format!(
                "field has {} values, expected {} nodes × {dim}",
                values.len(),
                grid.n_nodes
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("field contains non-finite value {v}")));
        }
        Ok(StateField { grid, dim, values, t })
    }

    pub fn from_fn(grid: Grid1D, dim: usize, t: f64, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_nodes * dim);
        for x in grid.nodes() {
            let z = f(x);
            if z.len() != dim {
                return Err(Error::Argument(format!(
                    "initial profile returned {} components, expected {dim}",
                    z.len()
                )));
            }
            values.extend(z);
        }
        Self::from_values(grid, dim, values, t)
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes
    }

    pub fn node(&self, n: usize) -> &[f64] {
        &self.values[n * self.dim..(n + 1) * self.dim]
    }

    pub fn node_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.dim..(n + 1) * self.dim]
    }

    /// Component `c` at every node.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `sqrt(dx · Σ |z_n|²)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn same_shape(&self, other: &StateField) -> bool {
        self.dim == other.dim && self.grid.n_nodes == other.grid.n_nodes
    }
}
