//! Direct solves for periodic block-banded Jacobians.
//!
//! Nodes are stored in folded order `[0, N-1, 1, N-2, ...]`, which places
//! every pair of cyclic neighbours within two block positions of each other.
//! A periodic stencil of half-width `s` then becomes an ordinary banded
//! matrix with block bandwidth `2s`, factored by Gaussian elimination with
//! partial pivoting.

use crate::error::{Error, Result};

/// Position of node `n` in folded order.
#[inline]
pub fn folded_position(n: usize, n_nodes: usize) -> usize {
    let m = n_nodes - 1 - n;
    if n <= m {
        2 * n
    } else {
        2 * m + 1
    }
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals and room for
/// the fill-in created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` at `(i, j)`. Panics if the entry lies outside the band,
    /// which indicates an assembly bug rather than a data error.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl = {}, ku = {}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > scale * 1e-300) || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.data[ik] / piv;
                self.data[ik] = 0.0;
                lower[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
            }
        }
        Ok(BandLu { u: self, lower, pivots })
    }
}

/// Factors produced by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandLu {
    u: BandMatrix,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.u.n;
        let kl = self.u.kl;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.lower[k * kl + (i - k - 1)] * bk;
                }
            }
        }
        let reach = self.u.ku + kl;
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= self.u.data[self.u.idx(i, j)] * b[j];
            }
            b[i] = s / self.u.data[self.u.idx(i, i)];
        }
    }
}

/// Linear solver interface used by the Newton iteration.
pub trait LinearSolve {
    fn solve(&self, rhs: &mut [f64]) -> Result<()>;
}

impl LinearSolve for BandLu {
    fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        self.solve_in_place(rhs);
        Ok(())
    }
}

/// Dense LU for small systems.
pub struct DenseLu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>);

impl DenseLu {
    pub fn new(m: nalgebra::DMatrix<f64>) -> Self {
        DenseLu(m.lu())
    }
}

impl LinearSolve for DenseLu {
    fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let b = nalgebra::DVector::from_column_slice(rhs);
        let x = self.0.solve(&b).ok_or(Error::Singular { column: 0 })?;
        rhs.copy_from_slice(x.as_slice());
        Ok(())
    }
}

fn to_folded(n_nodes: usize, dim: usize, x: &[f64], out: &mut [f64]) {
    for n in 0..n_nodes {
        let p = folded_position(n, n_nodes);
        out[p * dim..(p + 1) * dim].copy_from_slice(&x[n * dim..(n + 1) * dim]);
    }
}

fn from_folded(n_nodes: usize, dim: usize, x: &[f64], out: &mut [f64]) {
    for n in 0..n_nodes {
        let p = folded_position(n, n_nodes);
        out[n * dim..(n + 1) * dim].copy_from_slice(&x[p * dim..(p + 1) * dim]);
    }
}

/// Jacobian of a periodic lattice system with `dim` unknowns per node, in
/// which the equations at node `n` touch nodes within cyclic distance
/// `half_width`. Indices are natural (node-major); folding is internal.
#[derive(Debug, Clone)]
pub struct PeriodicBlockMatrix {
    n_nodes: usize,
    dim: usize,
    band: BandMatrix,
}

impl PeriodicBlockMatrix {
    pub fn new(n_nodes: usize, dim: usize, half_width: usize) -> Self {
        let b = (2 * half_width + 1) * dim - 1;
        PeriodicBlockMatrix {
            n_nodes,
            dim,
            band: BandMatrix::zeros(n_nodes * dim, b, b),
        }
    }

    #[inline]
    fn row(&self, node: usize, comp: usize) -> usize {
        folded_position(node, self.n_nodes) * self.dim + comp
    }

    /// Adds `v` to the derivative of equation `(eq_node, eq_comp)` with
    /// respect to unknown `(var_node, var_comp)`.
    #[inline]
    pub fn add(&mut self, eq_node: usize, eq_comp: usize, var_node: usize, var_comp: usize, v: f64) {
        if v != 0.0 {
            let i = self.row(eq_node, eq_comp);
            let j = self.row(var_node, var_comp);
            self.band.add(i, j, v);
        }
    }

    /// Product with a natural-order vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut xf = vec![0.0; x.len()];
        to_folded(self.n_nodes, self.dim, x, &mut xf);
        let yf = self.band.mul_vec(&xf);
        let mut y = vec![0.0; x.len()];
        from_folded(self.n_nodes, self.dim, &yf, &mut y);
        y
    }

    pub fn factor(self) -> Result<PeriodicBlockLu> {
        Ok(PeriodicBlockLu {
            n_nodes: self.n_nodes,
            dim: self.dim,
            lu: self.band.factor()?,
        })
    }
}

/// Factored [`PeriodicBlockMatrix`].
#[derive(Debug, Clone)]
pub struct PeriodicBlockLu {
    n_nodes: usize,
    dim: usize,
    lu: BandLu,
}

impl LinearSolve for PeriodicBlockLu {
    fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let mut folded = vec![0.0; rhs.len()];
        to_folded(self.n_nodes, self.dim, rhs, &mut folded);
        self.lu.solve_in_place(&mut folded);
        from_folded(self.n_nodes, self.dim, &folded, rhs);
        if rhs.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Singular { column: 0 })
        }
    }
}

/// Colouring of periodic nodes such that two nodes of the same colour are
/// more than `2 * half_width` apart cyclically. Returns the colour of each
/// node and the number of colours.
pub fn node_coloring(n_nodes: usize, half_width: usize) -> (Vec<usize>, usize) {
    let c = 2 * half_width + 1;
    if n_nodes <= c {
        return ((0..n_nodes).collect(), n_nodes);
    }
    let full = (n_nodes / c) * c;
    let colors = (0..n_nodes)
        .map(|n| if n < full { n % c } else { c + (n - full) })
        .collect();
    (colors, c + (n_nodes - full))
}
