//! Damped/driven multi-symplectic systems
//!
//! ```text
//! K z_t + L z_x = ∇S(z, t) - a(t) K z + F(x, t)
//! ```
//!
//! with skew-symmetric `K`, `L`, and the catalog of model reformulations
//! (damped wave, generalized KdV, damped-driven NLS, parametrically forced
//! NLS, damped Camassa-Holm).

mod grid;
mod models;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::conformal::DampingCoefficient;
use crate::error::{Error, Result};
use crate::util::{mat_vec_add, SplitMix64};

pub use grid::{Boundary, Grid1D, StateField};
pub use models::{
    ch_matrices, make_ch_system, make_kdv_system, make_nls_conjugate_system, make_nls_system, make_wave_system,
    nls_matrices, norm_action, ChPotential, ConjugateNlsPotential, KdvPotential, NlsParams, NlsPotential,
    WavePotential,
};

/// The scalar potential `S(z, t)` with gradient and Hessian in `z`.
pub trait Potential: Send + Sync {
    fn value(&self, z: &[f64], t: f64) -> f64;
    fn gradient(&self, z: &[f64], t: f64, out: &mut [f64]);
    fn hessian(&self, z: &[f64], t: f64, out: &mut DMatrix<f64>);

    /// Reject times at which the potential is undefined.
    fn check_time(&self, _t: f64) -> Result<()> {
        Ok(())
    }
}

/// External forcing `F(x, t)`, written into `out`.
pub type Forcing = Arc<dyn Fn(f64, f64, &mut [f64]) + Send + Sync>;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function with its first two derivatives, checked against
/// finite differences on construction.
#[derive(Clone)]
pub struct Profile {
    value: ProfileFn,
    first: ProfileFn,
    second: ProfileFn,
    label: String,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.label)
    }
}

impl Profile {
    /// Builds the profile after checking `f'` and `f''` against central
    /// differences at sample points in `[-2, 2]`.
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let p = Profile {
            value: Arc::new(value),
            first: Arc::new(first),
            second: Arc::new(second),
            label: "custom".into(),
        };
        let h = 1e-5;
        for i in 0..17 {
            let s = -2.0 + 0.25 * i as f64;
            let fd1 = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
            let fd2 = (p.first(s + h) - p.first(s - h)) / (2.0 * h);
            let tol = |x: f64| 1e-6 * (1.0 + x.abs());
            if (fd1 - p.first(s)).abs() > tol(fd1) {
                return Err(Error::Construction(format!(
                    "first derivative inconsistent with value at s = {s}: {} vs {fd1}",
                    p.first(s)
                )));
            }
            if (fd2 - p.second(s)).abs() > tol(fd2) {
                return Err(Error::Construction(format!(
                    "second derivative inconsistent with first at s = {s}: {} vs {fd2}",
                    p.second(s)
                )));
            }
        }
        Ok(p)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn zero() -> Self {
        Profile {
            value: Arc::new(|_| 0.0),
            first: Arc::new(|_| 0.0),
            second: Arc::new(|_| 0.0),
            label: "zero".into(),
        }
    }

    /// `V(s) = s²/2`, the cubic NLS nonlinearity (`V'(|ψ|²) = |ψ|²`).
    pub fn cubic() -> Self {
        Profile {
            value: Arc::new(|s| 0.5 * s * s),
            first: Arc::new(|s| s),
            second: Arc::new(|_| 1.0),
            label: "s^2/2".into(),
        }
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    #[inline]
    pub fn first(&self, s: f64) -> f64 {
        (self.first)(s)
    }

    #[inline]
    pub fn second(&self, s: f64) -> f64 {
        (self.second)(s)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Potential given by closures; convenient for tests and custom models.
pub struct FnPotential<V, G, H> {
    pub value: V,
    pub gradient: G,
    pub hessian: H,
}

impl<V, G, H> Potential for FnPotential<V, G, H>
where
    V: Fn(&[f64], f64) -> f64 + Send + Sync,
    G: Fn(&[f64], f64, &mut [f64]) + Send + Sync,
    H: Fn(&[f64], f64, &mut DMatrix<f64>) + Send + Sync,
{
    fn value(&self, z: &[f64], t: f64) -> f64 {
        (self.value)(z, t)
    }
    fn gradient(&self, z: &[f64], t: f64, out: &mut [f64]) {
        (self.gradient)(z, t, out)
    }
    fn hessian(&self, z: &[f64], t: f64, out: &mut DMatrix<f64>) {
        (self.hessian)(z, t, out)
    }
}

/// `S(z) = ½ zᵀQz` with `Q` symmetric (a zero matrix gives `S ≡ 0`).
#[derive(Debug, Clone)]
pub struct QuadraticPotential {
    pub q: DMatrix<f64>,
}

impl Potential for QuadraticPotential {
    fn value(&self, z: &[f64], _t: f64) -> f64 {
        0.5 * crate::util::bilinear(z, &self.q, z)
    }
    fn gradient(&self, z: &[f64], _t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        mat_vec_add(&self.q, z, 1.0, out);
    }
    fn hessian(&self, _z: &[f64], _t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.q);
    }
}

/// `K z_t + L z_x = ∇S(z,t) - a(t) K z + F(x,t)`.
#[derive(Clone)]
pub struct MultiSymplecticSystem {
    name: String,
    dim: usize,
    k: DMatrix<f64>,
    l: DMatrix<f64>,
    potential: Arc<dyn Potential>,
    forcing: Option<Forcing>,
    damping: DampingCoefficient,
    labels: Vec<String>,
}

impl fmt::Debug for MultiSymplecticSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiSymplecticSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("labels", &self.labels)
            .field("forced", &self.forcing.is_some())
            .field("damping", &self.damping)
            .finish()
    }
}

fn is_exactly_skew(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| m[(i, j)] == -m[(j, i)]))
}

impl MultiSymplecticSystem {
    pub fn new(
        name: impl Into<String>,
        k: DMatrix<f64>,
        l: DMatrix<f64>,
        potential: Arc<dyn Potential>,
        damping: DampingCoefficient,
    ) -> Result<Self> {
        let dim = k.nrows();
        if dim == 0 || !k.is_square() || l.shape() != k.shape() {
            return Err(Error::Construction(format!(
                "K and L must be square and of equal size, got {:?} and {:?}",
                k.shape(),
                l.shape()
            )));
        }
        if !is_exactly_skew(&k) {
            return Err(Error::Construction("K is not skew-symmetric".into()));
        }
        if !is_exactly_skew(&l) {
            return Err(Error::Construction("L is not skew-symmetric".into()));
        }
        Ok(MultiSymplecticSystem {
            name: name.into(),
            dim,
            k,
            l,
            potential,
            forcing: None,
            damping,
            labels: (0..dim).map(|i| format!("z{i}")).collect(),
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn without_forcing(mut self) -> Self {
        self.forcing = None;
        self
    }

    pub fn with_damping(mut self, damping: DampingCoefficient) -> Self {
        self.damping = damping;
        self
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        assert_eq!(labels.len(), self.dim, "one label per component");
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }
    pub fn damping(&self) -> &DampingCoefficient {
        &self.damping
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn potential(&self) -> &Arc<dyn Potential> {
        &self.potential
    }
    pub fn is_forced(&self) -> bool {
        self.forcing.is_some()
    }

    pub fn s(&self, z: &[f64], t: f64) -> f64 {
        self.potential.value(z, t)
    }

    pub fn grad_s(&self, z: &[f64], t: f64, out: &mut [f64]) {
        self.potential.gradient(z, t, out)
    }

    pub fn hess_s(&self, z: &[f64], t: f64, out: &mut DMatrix<f64>) {
        self.potential.hessian(z, t, out)
    }

    /// Adds `F(x, t)` into `out` (no-op for unforced systems).
    pub fn add_forcing(&self, x: f64, t: f64, scale: f64, out: &mut [f64]) {
        if let Some(f) = &self.forcing {
            let mut buf = vec![0.0; self.dim];
            f(x, t, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += scale * b;
            }
        }
    }

    /// Components with a nonzero row in `K`: the ones that evolve in time.
    /// The rest are auxiliary (constraint) variables.
    pub fn dynamic_components(&self) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| (0..self.dim).any(|j| self.k[(i, j)] != 0.0))
            .collect()
    }

    /// Samples `(z, t)` and checks the Hessian symmetry and both derivative
    /// levels against central finite differences (`h = 1e-5`).
    pub fn check_consistency(&self, samples: usize, seed: u64) -> Result<()> {
        let d = self.dim;
        let mut rng = SplitMix64::new(seed);
        let h = 1e-5;
        let mut grad = vec![0.0; d];
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        let mut hess = DMatrix::zeros(d, d);
        for _ in 0..samples {
            let z: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let t = rng.uniform(0.0, 2.0);
            self.potential.check_time(t)?;
            self.grad_s(&z, t, &mut grad);
            self.hess_s(&z, t, &mut hess);
            for i in 0..d {
                for j in 0..i {
                    let (a, b) = (hess[(i, j)], hess[(j, i)]);
                    if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                        return Err(Error::Construction(format!(
                            "{}: Hessian not symmetric at ({i},{j})",
                            self.name
                        )));
                    }
                }
            }
            let mut zp = z.clone();
            let mut zm = z.clone();
            for j in 0..d {
                zp[j] = z[j] + h;
                zm[j] = z[j] - h;
                let fd = (self.s(&zp, t) - self.s(&zm, t)) / (2.0 * h);
                if (fd - grad[j]).abs() > 1e-6 * (1.0 + grad[j].abs()) {
                    return Err(Error::Construction(format!(
                        "{}: gradient component {j} = {} disagrees with finite difference {fd}",
                        self.name, grad[j]
                    )));
                }
                self.grad_s(&zp, t, &mut gp);
                self.grad_s(&zm, t, &mut gm);
                for i in 0..d {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    if (fd - hess[(i, j)]).abs() > 1e-6 * (1.0 + hess[(i, j)].abs()) {
                        return Err(Error::Construction(format!(
                            "{}: Hessian entry ({i},{j}) = {} disagrees with finite difference {fd}",
                            self.name,
                            hess[(i, j)]
                        )));
                    }
                }
                zp[j] = z[j];
                zm[j] = z[j];
            }
        }
        Ok(())
    }

    /// Residual of the continuous system at `(x, t)` for a smooth field
    /// `z(x, t)`, with `z_t` and `z_x` taken by central differences of width
    /// `h`: `K z_t + L z_x - ∇S + a K z - F`.
    pub fn continuous_residual(&self, field: impl Fn(f64, f64) -> Vec<f64>, x: f64, t: f64, h: f64) -> Vec<f64> {
        let d = self.dim;
        let z = field(x, t);
        let zt: Vec<f64> = field(x, t + h)
            .iter()
            .zip(field(x, t - h))
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let zx: Vec<f64> = field(x + h, t)
            .iter()
            .zip(field(x - h, t))
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let mut out = vec![0.0; d];
        mat_vec_add(&self.k, &zt, 1.0, &mut out);
        mat_vec_add(&self.l, &zx, 1.0, &mut out);
        let mut g = vec![0.0; d];
        self.grad_s(&z, t, &mut g);
        for (o, gi) in out.iter_mut().zip(&g) {
            *o -= gi;
        }
        mat_vec_add(&self.k, &z, self.damping.rate(t), &mut out);
        self.add_forcing(x, t, -1.0, &mut out);
        out
    }
}

/// A linear action `B` under which the undamped system is invariant,
/// `(Bz)ᵀ∇S(z,t) = 0`. Only obtainable through verification against a
/// system, so every instance has passed the checks.
#[derive(Debug, Clone)]
pub struct QuadraticInvariantAction {
    b: DMatrix<f64>,
    kb: DMatrix<f64>,
    lb: DMatrix<f64>,
}

impl QuadraticInvariantAction {
    /// Checks `(Bz)ᵀ∇S = 0` on random samples and that `KB`, `LB` are
    /// symmetric with `KB = -BᵀK`, `LB = -BᵀL` (so the density and flux are
    /// genuine quadratic forms).
    pub fn verified(sys: &MultiSymplecticSystem, b: DMatrix<f64>) -> Result<Self> {
        let d = sys.dim();
        if b.shape() != (d, d) {
            return Err(Error::Construction(format!(
                "action must be {d}×{d}, got {:?}",
                b.shape()
            )));
        }
        let kb = sys.k() * &b;
        let lb = sys.l() * &b;
        let btk = b.transpose() * sys.k();
        let btl = b.transpose() * sys.l();
        let scale = 1.0 + b.amax();
        if (&kb + &btk).amax() > 1e-14 * scale || (&lb + &btl).amax() > 1e-14 * scale {
            return Err(Error::Construction("action does not give symmetric KB and LB".into()));
        }
        let mut rng = SplitMix64::new(0x5eed_b0b0);
        let mut g = vec![0.0; d];
        for _ in 0..100 {
            let z: Vec<f64> = (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let t = rng.uniform(0.0, 10.0);
            sys.grad_s(&z, t, &mut g);
            let mut bz = vec![0.0; d];
            mat_vec_add(&b, &z, 1.0, &mut bz);
            let dotp: f64 = bz.iter().zip(&g).map(|(a, c)| a * c).sum();
            let norm: f64 = bz.iter().map(|v| v.abs()).sum::<f64>() * g.iter().map(|v| v.abs()).sum::<f64>();
            if dotp.abs() > 1e-12 * (1.0 + norm) {
                return Err(Error::Construction(format!(
                    "(Bz)ᵀ∇S = {dotp:e} ≠ 0 at t = {t}; not a symmetry of the potential"
                )));
            }
        }
        Ok(QuadraticInvariantAction { b, kb, lb })
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn kb(&self) -> &DMatrix<f64> {
        &self.kb
    }
    pub fn lb(&self) -> &DMatrix<f64> {
        &self.lb
    }
}
