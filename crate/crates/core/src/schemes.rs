//! Exponential finite-difference steppers for any
//! [`MultiSymplecticSystem`], their non-exponential baselines, and exact
//! tangent propagation.
//!
//! All residuals are multiplied by `dt` so that their entries are of unit
//! size and the Newton tolerance is a relative one.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conformal::exp_weights;
use crate::error::{Error, Result};
use crate::formulation::{Grid1D, MultiSymplecticSystem, Potential, StateField};
use crate::linalg::{node_coloring, PeriodicBlockLu, PeriodicBlockMatrix};
use crate::newton::{newton_solve, JacobianMode, NewtonConfig};
use crate::util::mat_vec_add;

/// The time-advance maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Exponential midpoint in time, symplectic Euler in space.
    Embs,
    /// Exponential box scheme.
    Expbox,
    /// Exponential box scheme with a spatial discrete gradient.
    Expdg,
    /// Preissmann box scheme with damping as an ordinary source term.
    MidpointBoxBaseline,
    /// Midpoint/symplectic-Euler scheme with damping as a source term.
    MixedEulerBaseline,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Embs,
        SchemeKind::Expbox,
        SchemeKind::Expdg,
        SchemeKind::MidpointBoxBaseline,
        SchemeKind::MixedEulerBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Embs => "embs",
            SchemeKind::Expbox => "expbox",
            SchemeKind::Expdg => "expdg",
            SchemeKind::MidpointBoxBaseline => "midpoint_box_baseline",
            SchemeKind::MixedEulerBaseline => "mixed_euler_baseline",
        }
    }

    pub fn is_exponential(self) -> bool {
        matches!(self, SchemeKind::Embs | SchemeKind::Expbox | SchemeKind::Expdg)
    }

    /// Whether the equations sit on cell midpoints (box stencil) rather than
    /// on nodes.
    pub fn is_box(self) -> bool {
        !matches!(self, SchemeKind::Embs | SchemeKind::MixedEulerBaseline)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown scheme `{s}`")))
    }
}

/// `L = L₊ + L₋` with `L₊ = -L₋ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LSplit {
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

/// Splits a skew matrix into its strict upper (`L₊`) and strict lower
/// (`L₋`) triangles.
pub fn split_l(l: &DMatrix<f64>) -> Result<LSplit> {
    let d = l.nrows();
    if !l.is_square() || (0..d).any(|i| (0..d).any(|j| l[(i, j)] != -l[(j, i)])) {
        return Err(Error::Argument("L must be square and skew-symmetric".into()));
    }
    let mut plus = DMatrix::zeros(d, d);
    let mut minus = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if j > i {
                plus[(i, j)] = l[(i, j)];
            } else if j < i {
                minus[(i, j)] = l[(i, j)];
            }
        }
    }
    Ok(LSplit { plus, minus })
}

/// Midpoint discrete gradient: `∇S(m) + c(ẑ - z)` with `m = (ẑ + z)/2` and
/// `c` chosen so that `gᵀ(ẑ - z) = S(ẑ) - S(z)`.
pub fn discrete_gradient(potential: &dyn Potential, z_hat: &[f64], z: &[f64], t: f64) -> Vec<f64> {
    let d = z.len();
    let m: Vec<f64> = z_hat.iter().zip(z).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut g = vec![0.0; d];
    potential.gradient(&m, t, &mut g);
    let diff: Vec<f64> = z_hat.iter().zip(z).map(|(a, b)| a - b).collect();
    let dd: f64 = diff.iter().map(|v| v * v).sum();
    let zn: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dd.sqrt() < 1e-14 * (1.0 + zn) {
        return g;
    }
    let gd: f64 = g.iter().zip(&diff).map(|(a, b)| a * b).sum();
    let c = (potential.value(z_hat, t) - potential.value(z, t) - gd) / dd;
    for (gi, di) in g.iter_mut().zip(&diff) {
        *gi += c * di;
    }
    g
}

/// Time weights of one step. Baselines use unit weights and keep the
/// damping as an explicit `a(t_h)·K·z̄` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWeights {
    pub plus: f64,
    pub minus: f64,
    pub explicit_damping: f64,
}

impl TimeWeights {
    pub fn for_scheme(sys: &MultiSymplecticSystem, kind: SchemeKind, t: f64, dt: f64) -> Result<Self> {
        if kind.is_exponential() {
            let w = exp_weights(sys.damping(), t, dt)?;
            Ok(TimeWeights {
                plus: w.plus,
                minus: w.minus,
                explicit_damping: 0.0,
            })
        } else {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Argument(format!("dt must be positive, got {dt}")));
            }
            Ok(TimeWeights {
                plus: 1.0,
                minus: 1.0,
                explicit_damping: sys.damping().rate(t + 0.5 * dt),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Old,
    New,
}

struct Stencil {
    offsets: Vec<isize>,
    /// Weights of the centred state entering `K·D` and `∇S`.
    kappa: Vec<f64>,
    /// Spatial difference blocks, already divided by `dx`.
    lambda: Vec<DMatrix<f64>>,
    forcing_shift: f64,
}

impl Stencil {
    fn new(sys: &MultiSymplecticSystem, kind: SchemeKind, dx: f64) -> Result<Self> {
        if kind.is_box() {
            let l = sys.l() / dx;
            Ok(Stencil {
                offsets: vec![0, 1],
                kappa: vec![0.5, 0.5],
                lambda: vec![-l.clone(), l],
                forcing_shift: 0.5,
            })
        } else {
            let s = split_l(sys.l())?;
            Ok(Stencil {
                offsets: vec![-1, 0, 1],
                kappa: vec![0.0, 1.0, 0.0],
                lambda: vec![-&s.minus / dx, (&s.minus - &s.plus) / dx, &s.plus / dx],
                forcing_shift: 0.0,
            })
        }
    }
}

/// One step of a scheme, frozen at its time level, exposing the residual
/// and Jacobians in the natural node-major ordering.
struct StepProblem<'a> {
    sys: &'a MultiSymplecticSystem,
    kind: SchemeKind,
    grid: Grid1D,
    dt: f64,
    t_half: f64,
    w: TimeWeights,
    stencil: Stencil,
}

impl<'a> StepProblem<'a> {
    fn new(sys: &'a MultiSymplecticSystem, kind: SchemeKind, grid: Grid1D, t: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        if kind == SchemeKind::Expdg && sys.is_forced() {
            return Err(Error::Configuration(
                "the discrete gradient scheme requires an unforced system".into(),
            ));
        }
        let t_half = t + 0.5 * dt;
        sys.potential().check_time(t_half)?;
        Ok(StepProblem {
            sys,
            kind,
            grid,
            dt,
            t_half,
            w: TimeWeights::for_scheme(sys, kind, t, dt)?,
            stencil: Stencil::new(sys, kind, grid.dx())?,
        })
    }

    fn d(&self) -> usize {
        self.sys.dim()
    }

    /// `½(w₊z¹ + w₋z⁰)` and `w₊z¹ - w₋z⁰` at every node.
    fn averages(&self, old: &[f64], new: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (wp, wm) = (self.w.plus, self.w.minus);
        let avg = old.iter().zip(new).map(|(o, n)| 0.5 * (wp * n + wm * o)).collect();
        let diff = old.iter().zip(new).map(|(o, n)| wp * n - wm * o).collect();
        (avg, diff)
    }

    fn residual(&self, old: &[f64], new: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.d();
        let (avg, diff) = self.averages(old, new);
        let mut kd = vec![0.0; d];
        let mut zc = vec![0.0; d];
        let mut g = vec![0.0; d];
        let e = self.w.explicit_damping;
        for n in 0..self.grid.n_nodes {
            kd.iter_mut().for_each(|v| *v = 0.0);
            zc.iter_mut().for_each(|v| *v = 0.0);
            let r = &mut out[n * d..(n + 1) * d];
            r.iter_mut().for_each(|v| *v = 0.0);
            for (o, &off) in self.stencil.offsets.iter().enumerate() {
                let (m, s) = self.grid.wrap(n, off);
                let zm = &avg[m * d..(m + 1) * d];
                let dm = &diff[m * d..(m + 1) * d];
                let kap = self.stencil.kappa[o];
                for c in 0..d {
                    kd[c] += kap * s * dm[c];
                    zc[c] += kap * s * zm[c];
                }
                mat_vec_add(&self.stencil.lambda[o], zm, s * self.dt, r);
            }
            if self.kind == SchemeKind::Expdg {
                let (m1, s1) = self.grid.wrap(n, 1);
                let z1: Vec<f64> = avg[m1 * d..(m1 + 1) * d].iter().map(|v| s1 * v).collect();
                g = discrete_gradient(&**self.sys.potential(), &z1, &avg[n * d..(n + 1) * d], self.t_half);
            } else {
                self.sys.grad_s(&zc, self.t_half, &mut g);
            }
            mat_vec_add(self.sys.k(), &kd, 1.0, r);
            mat_vec_add(self.sys.k(), &zc, self.dt * e, r);
            for c in 0..d {
                r[c] -= self.dt * g[c];
            }
            let x = self.grid.x_min + (n as f64 + self.stencil.forcing_shift) * self.grid.dx();
            self.sys.add_forcing(x, self.t_half, -self.dt, r);
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Evaluation {
                t: self.t_half,
                what: "non-finite scheme residual".into(),
            })
        }
    }

    fn uses_fd(&self, cfg: &NewtonConfig) -> bool {
        self.kind == SchemeKind::Expdg || cfg.jacobian == JacobianMode::FiniteDifference
    }

    fn jacobian(&self, old: &[f64], new: &[f64], level: Level, cfg: &NewtonConfig) -> Result<PeriodicBlockMatrix> {
        if self.uses_fd(cfg) {
            self.fd_jacobian(old, new, level)
        } else {
            Ok(self.analytic_jacobian(old, new, level))
        }
    }

    /// Derivative of the residual with respect to one time level, using the
    /// Hessian of `S` at the centred state.
    fn analytic_jacobian(&self, old: &[f64], new: &[f64], level: Level) -> PeriodicBlockMatrix {
        let d = self.d();
        let (k_coef, avg_coef) = match level {
            Level::New => (self.w.plus, 0.5 * self.w.plus),
            Level::Old => (-self.w.minus, 0.5 * self.w.minus),
        };
        let (avg, _) = self.averages(old, new);
        let mut jac = PeriodicBlockMatrix::new(self.grid.n_nodes, d, 1);
        let mut zc = vec![0.0; d];
        let mut hess = DMatrix::zeros(d, d);
        let k = self.sys.k();
        let e = self.w.explicit_damping;
        for n in 0..self.grid.n_nodes {
            zc.iter_mut().for_each(|v| *v = 0.0);
            for (o, &off) in self.stencil.offsets.iter().enumerate() {
                let (m, s) = self.grid.wrap(n, off);
                for c in 0..d {
                    zc[c] += self.stencil.kappa[o] * s * avg[m * d + c];
                }
            }
            self.sys.hess_s(&zc, self.t_half, &mut hess);
            for (o, &off) in self.stencil.offsets.iter().enumerate() {
                let (m, s) = self.grid.wrap(n, off);
                let kap = self.stencil.kappa[o];
                let lam = &self.stencil.lambda[o];
                for i in 0..d {
                    for j in 0..d {
                        let v = kap * k_coef * k[(i, j)]
                            + self.dt * avg_coef * (lam[(i, j)] + kap * (e * k[(i, j)] - hess[(i, j)]));
                        jac.add(n, i, m, j, s * v);
                    }
                }
            }
        }
        jac
    }

    /// Coloured central-difference Jacobian.
    fn fd_jacobian(&self, old: &[f64], new: &[f64], level: Level) -> Result<PeriodicBlockMatrix> {
        let d = self.d();
        let nn = self.grid.n_nodes;
        let (colors, count) = node_coloring(nn, 1);
        let mut jac = PeriodicBlockMatrix::new(nn, d, 1);
        let base = match level {
            Level::New => new,
            Level::Old => old,
        };
        let mut xp = base.to_vec();
        let mut xm = base.to_vec();
        let mut rp = vec![0.0; base.len()];
        let mut rm = vec![0.0; base.len()];
        let step = |v: f64| 6e-6 * v.abs().max(1.0);
        let mut touched: Vec<usize> = Vec::with_capacity(3);
        for color in 0..count {
            for j in 0..d {
                for m in (0..nn).filter(|&m| colors[m] == color) {
                    let h = step(base[m * d + j]);
                    xp[m * d + j] += h;
                    xm[m * d + j] -= h;
                }
                match level {
                    Level::New => {
                        self.residual(old, &xp, &mut rp)?;
                        self.residual(old, &xm, &mut rm)?;
                    }
                    Level::Old => {
                        self.residual(&xp, new, &mut rp)?;
                        self.residual(&xm, new, &mut rm)?;
                    }
                }
                for n in 0..nn {
                    touched.clear();
                    for &off in &self.stencil.offsets {
                        let (m, _) = self.grid.wrap(n, off);
                        if colors[m] == color && !touched.contains(&m) {
                            touched.push(m);
                        }
                    }
                    for &m in &touched {
                        let h = xp[m * d + j] - xm[m * d + j];
                        for i in 0..d {
                            jac.add(n, i, m, j, (rp[n * d + i] - rm[n * d + i]) / h);
                        }
                    }
                }
                xp.copy_from_slice(base);
                xm.copy_from_slice(base);
            }
        }
        Ok(jac)
    }

    fn solve(&self, old: &[f64], cfg: &NewtonConfig) -> Result<crate::newton::NewtonOutcome> {
        newton_solve(
            |x, r| self.residual(old, x, r),
            |x| -> Result<PeriodicBlockLu> { self.jacobian(old, x, Level::New, cfg)?.factor() },
            old.to_vec(),
            cfg,
        )
    }
}

fn check_field(sys: &MultiSymplecticSystem, field: &StateField) -> Result<()> {
    if field.dim != sys.dim() {
        return Err(Error::Argument(format!(
            "field has {} components per node, system `{}` has {}",
            field.dim,
            sys.name(),
            sys.dim()
        )));
    }
    if !field.is_finite() {
        return Err(Error::Argument("field contains non-finite values".into()));
    }
    Ok(())
}

/// Result of one converged step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: StateField,
    pub iterations: usize,
    pub residual: f64,
}

/// A time-advance map together with its Newton configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeStep {
    pub kind: SchemeKind,
    pub newton: NewtonConfig,
}

impl SchemeStep {
    pub fn new(kind: SchemeKind, newton: NewtonConfig) -> Self {
        SchemeStep { kind, newton }
    }

    pub fn step(&self, sys: &MultiSymplecticSystem, field: &StateField, dt: f64) -> Result<StepOutcome> {
        step(sys, self.kind, field, dt, &self.newton)
    }

    /// Advances `steps` times, returning every level including the initial
    /// one.
    pub fn trajectory(
        &self,
        sys: &MultiSymplecticSystem,
        field: &StateField,
        dt: f64,
        steps: usize,
    ) -> Result<Vec<StateField>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(field.clone());
        for i in 0..steps {
            let next = self.step(sys, &out[i], dt).map_err(|e| Error::Step {
                step: i,
                t: out[i].t,
                source: Box::new(e),
            })?;
            out.push(next.field);
        }
        Ok(out)
    }
}

/// Advances `field` by `dt` with the given scheme.
pub fn step(
    sys: &MultiSymplecticSystem,
    kind: SchemeKind,
    field: &StateField,
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<StepOutcome> {
    check_field(sys, field)?;
    let problem = StepProblem::new(sys, kind, field.grid, field.t, dt)?;
    let out = problem.solve(&field.values, cfg)?;
    Ok(StepOutcome {
        field: StateField {
            grid: field.grid,
            dim: field.dim,
            values: out.x,
            t: field.t + dt,
        },
        iterations: out.iterations,
        residual: out.residual,
    })
}

pub fn step_embs(sys: &MultiSymplecticSystem, field: &StateField, dt: f64, cfg: &NewtonConfig) -> Result<StateField> {
    step(sys, SchemeKind::Embs, field, dt, cfg).map(|o| o.field)
}

pub fn step_expbox(sys: &MultiSymplecticSystem, field: &StateField, dt: f64, cfg: &NewtonConfig) -> Result<StateField> {
    step(sys, SchemeKind::Expbox, field, dt, cfg).map(|o| o.field)
}

pub fn step_expdg(sys: &MultiSymplecticSystem, field: &StateField, dt: f64, cfg: &NewtonConfig) -> Result<StateField> {
    step(sys, SchemeKind::Expdg, field, dt, cfg).map(|o| o.field)
}

/// The dt-scaled residual of one step, for inspection and testing.
pub fn step_residual(
    sys: &MultiSymplecticSystem,
    kind: SchemeKind,
    old: &StateField,
    new: &StateField,
    dt: f64,
) -> Result<Vec<f64>> {
    check_field(sys, old)?;
    check_field(sys, new)?;
    let problem = StepProblem::new(sys, kind, old.grid, old.t, dt)?;
    let mut r = vec![0.0; old.values.len()];
    problem.residual(&old.values, &new.values, &mut r)?;
    Ok(r)
}

/// Propagates a perturbation through the linearization of one converged
/// step `base.0 -> base.1`: solves `J_new dz¹ = -J_old dz⁰`.
pub fn tangent_step(
    sys: &MultiSymplecticSystem,
    base: (&StateField, &StateField),
    dz: &StateField,
    dt: f64,
    kind: SchemeKind,
    cfg: &NewtonConfig,
) -> Result<StateField> {
    let (z0, z1) = base;
    check_field(sys, z0)?;
    check_field(sys, z1)?;
    if !dz.same_shape(z0) {
        return Err(Error::Argument(
            "perturbation shape does not match the base field".into(),
        ));
    }
    let problem = StepProblem::new(sys, kind, z0.grid, z0.t, dt)?;
    let j_old = problem.jacobian(&z0.values, &z1.values, Level::Old, cfg)?;
    let mut rhs: Vec<f64> = j_old.mul_vec(&dz.values).into_iter().map(|v| -v).collect();
    let j_new = problem.jacobian(&z0.values, &z1.values, Level::New, cfg)?;
    use crate::linalg::LinearSolve;
    j_new.factor()?.solve(&mut rhs)?;
    Ok(StateField {
        grid: dz.grid,
        dim: dz.dim,
        values: rhs,
        t: z1.t,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::conformal::DampingCoefficient;
    use crate::formulation::{
        ch_matrices, make_nls_conjugate_system, make_nls_system, nls_matrices, NlsParams, Profile, QuadraticPotential,
    };
    use crate::util::SplitMix64;

    fn tight() -> NewtonConfig {
        NewtonConfig::default().with_tol(1e-13)
    }

    fn smooth_nls_field(grid: Grid1D, t: f64) -> StateField {
        StateField::from_fn(grid, 4, t, |x| {
            let p = 0.6 * (x).cos() + 0.2;
            let q = 0.4 * (2.0 * x).sin();
            vec![p, q, -0.6 * x.sin(), 0.8 * (2.0 * x).cos()]
        })
        .unwrap()
    }

    fn random_field(grid: Grid1D, dim: usize, seed: u64, scale: f64) -> StateField {
        let mut rng = SplitMix64::new(seed);
        let v = (0..grid.n_nodes * dim)
            .map(|_| scale * rng.uniform(-1.0, 1.0))
            .collect();
        StateField::from_values(grid, dim, v, 0.0).unwrap()
    }

    #[test]
    fn split_l_examples() {
        let (_, l) = nls_matrices();
        let s = split_l(&l).unwrap();
        let mut expect = DMatrix::zeros(4, 4);
        expect[(0, 2)] = -1.0;
        expect[(1, 3)] = -1.0;
        assert_eq!(s.plus, expect);
        assert_eq!(&s.plus + &s.minus, l);
        let z = split_l(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z.plus, DMatrix::zeros(3, 3));
        assert_eq!(z.minus, DMatrix::zeros(3, 3));
        let (_, lch) = ch_matrices();
        let s = split_l(&lch).unwrap();
        assert_eq!(s.plus, -s.minus.transpose());
        let mut bad = DMatrix::zeros(2, 2);
        bad[(0, 1)] = 1.0;
        assert!(split_l(&bad).is_err());
    }

    #[test]
    fn scheme_names_roundtrip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("rk4".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn discrete_gradient_properties() {
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let pot = &**sys.potential();
        let mut rng = SplitMix64::new(9);
        for _ in 0..50 {
            let a: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let t = rng.uniform(0.0, 3.0);
            let g = discrete_gradient(pot, &a, &b, t);
            let inc: f64 = g.iter().zip(a.iter().zip(&b)).map(|(g, (x, y))| g * (x - y)).sum();
            assert!((inc - (pot.value(&a, t) - pot.value(&b, t))).abs() < 1e-13);
        }
        let z = [0.3, -0.2, 0.5, 0.1];
        let mut grad = vec![0.0; 4];
        pot.gradient(&z, 0.5, &mut grad);
        assert_eq!(discrete_gradient(pot, &z, &z, 0.5), grad);
        // Quadratic S: the correction vanishes.
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let quad = QuadraticPotential { q: q.clone() };
        let (a, b) = ([1.0, -2.0], [0.25, 0.75]);
        let g = discrete_gradient(&quad, &a, &b, 0.0);
        let m = q * nalgebra::DVector::from_vec(vec![0.625, -0.625]);
        assert!((g[0] - m[0]).abs() < 1e-15 && (g[1] - m[1]).abs() < 1e-15);
    }

    fn decay_system(a: DampingCoefficient) -> MultiSymplecticSystem {
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let l = DMatrix::zeros(2, 2);
        let pot = Arc::new(QuadraticPotential {
            q: DMatrix::zeros(2, 2),
        });
        MultiSymplecticSystem::new("decay", k, l, pot, a).unwrap()
    }

    #[test]
    fn constant_field_is_a_fixed_point_without_damping() {
        let sys = decay_system(DampingCoefficient::zero());
        let grid = Grid1D::periodic(0.0, 1.0, 7).unwrap();
        let f = StateField::from_fn(grid, 2, 0.0, |_| vec![0.7, -1.2]).unwrap();
        for kind in SchemeKind::ALL {
            let out = step(&sys, kind, &f, 0.1, &tight()).unwrap();
            for (a, b) in out.field.values.iter().zip(&f.values) {
                assert!((a - b).abs() < 1e-14, "{kind}");
            }
        }
    }

    #[test]
    fn pure_decay_is_exact() {
        let a = DampingCoefficient::sinusoid(0.1, -0.2, PI);
        let sys = decay_system(a.clone());
        let grid = Grid1D::periodic(0.0, 1.0, 7).unwrap();
        let mut f = random_field(grid, 2, 4, 1.0);
        let z0 = f.values.clone();
        let dt = 0.01;
        for _ in 0..100 {
            f = step_embs(&sys, &f, dt, &tight()).unwrap();
        }
        let decay = (-a.theta(f.t).unwrap()).exp();
        for (a, b) in f.values.iter().zip(&z0) {
            assert!((a - decay * b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let sys = make_nls_system(Profile::zero(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let grid = Grid1D::periodic(0.0, 2.0 * PI, 12).unwrap();
        let f = StateField::zeros(grid, 4, 0.0);
        for kind in SchemeKind::ALL {
            let out = step(&sys, kind, &f, 0.05, &tight()).unwrap();
            assert!(out.field.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn expdg_equals_expbox_for_quadratic_potential() {
        // With V = 0 the NLS potential is quadratic in z.
        let sys = make_nls_system(Profile::zero(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let grid = Grid1D::periodic(0.0, 2.0 * PI, 16).unwrap();
        let f = smooth_nls_field(grid, 0.2);
        let a = step_expbox(&sys, &f, 0.05, &tight()).unwrap();
        let b = step_expdg(&sys, &f, 0.05, &tight()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn expdg_rejects_forcing() {
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI))
            .unwrap()
            .with_forcing(Arc::new(|_, _, out: &mut [f64]| out[0] = 1.0));
        let grid = Grid1D::periodic(0.0, 2.0 * PI, 8).unwrap();
        let f = smooth_nls_field(grid, 0.0);
        assert!(matches!(
            step_expdg(&sys, &f, 0.01, &tight()),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn invalid_dt_rejected() {
        let sys = decay_system(DampingCoefficient::zero());
        let grid = Grid1D::periodic(0.0, 1.0, 5).unwrap();
        let f = StateField::zeros(grid, 2, 0.0);
        assert!(matches!(step_embs(&sys, &f, 0.0, &tight()), Err(Error::Argument(_))));
        assert!(matches!(
            step(&sys, SchemeKind::MidpointBoxBaseline, &f, -1.0, &tight()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn expbox_reduces_to_preissmann_box() {
        // Independently coded Preissmann box residual for a ≡ 0.
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.0, 0.0, 1.0)).unwrap();
        let grid = Grid1D::periodic(-3.0, 3.0, 9).unwrap();
        let old = random_field(grid, 4, 21, 0.5);
        let mut new = random_field(grid, 4, 22, 0.5);
        new.t = 0.0;
        let dt = 0.03;
        let dx = grid.dx();
        let r = step_residual(&sys, SchemeKind::Expbox, &old, &new, dt).unwrap();
        let (k, l) = nls_matrices();
        let n = grid.n_nodes;
        for c in 0..n {
            let c1 = (c + 1) % n;
            let node = |f: &StateField, m: usize| nalgebra::DVector::from_column_slice(f.node(m));
            let zc_new = (node(&new, c) + node(&new, c1)) * 0.5;
            let zc_old = (node(&old, c) + node(&old, c1)) * 0.5;
            let zbar_c = (&zc_new + &zc_old) * 0.5;
            let zbar_n = (node(&new, c) + node(&old, c)) * 0.5;
            let zbar_n1 = (node(&new, c1) + node(&old, c1)) * 0.5;
            let mut g = vec![0.0; 4];
            sys.grad_s(zbar_c.as_slice(), dt / 2.0, &mut g);
            let expect =
                &k * (&zc_new - &zc_old) / dt + &l * (&zbar_n1 - &zbar_n) / dx - nalgebra::DVector::from_vec(g);
            for i in 0..4 {
                assert!((r[c * 4 + i] / dt - expect[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let sys = make_nls_conjugate_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let grid = Grid1D::new(-2.0, 2.0, 6, crate::formulation::Boundary::AntiPeriodic).unwrap();
        let old = random_field(grid, 4, 1, 0.8);
        let new = random_field(grid, 4, 2, 0.8);
        for kind in [
            SchemeKind::Embs,
            SchemeKind::Expbox,
            SchemeKind::MidpointBoxBaseline,
            SchemeKind::MixedEulerBaseline,
        ] {
            let p = StepProblem::new(&sys, kind, grid, 0.3, 0.02).unwrap();
            for level in [Level::New, Level::Old] {
                let a = p.analytic_jacobian(&old.values, &new.values, level);
                let f = p.fd_jacobian(&old.values, &new.values, level).unwrap();
                let mut rng = SplitMix64::new(77);
                let v: Vec<f64> = (0..old.values.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let (ya, yf) = (a.mul_vec(&v), f.mul_vec(&v));
                for (x, y) in ya.iter().zip(&yf) {
                    assert!((x - y).abs() < 1e-8, "{kind} {level:?}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn tangent_step_matches_directional_derivative() {
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let grid = Grid1D::periodic(-PI, PI, 10).unwrap();
        let z0 = smooth_nls_field(grid, 0.1);
        let dz = random_field(grid, 4, 5, 1.0);
        let cfg = tight();
        for kind in [SchemeKind::Embs, SchemeKind::Expbox, SchemeKind::Expdg] {
            let z1 = step(&sys, kind, &z0, 0.05, &cfg).unwrap().field;
            let tan = tangent_step(&sys, (&z0, &z1), &dz, 0.05, kind, &cfg).unwrap();
            let eps = 1e-6;
            let mut zp = z0.clone();
            for (a, b) in zp.values.iter_mut().zip(&dz.values) {
                *a += eps * b;
            }
            let z1p = step(&sys, kind, &zp, 0.05, &cfg).unwrap().field;
            let fd: Vec<f64> = z1p.values.iter().zip(&z1.values).map(|(a, b)| (a - b) / eps).collect();
            let num: f64 = fd
                .iter()
                .zip(&tan.values)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let den: f64 = tan.values.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num / den < 1e-4, "{kind}: {}", num / den);
        }
    }

    #[test]
    fn tangent_of_zero_is_zero_and_linear_map_is_exact() {
        let sys = make_nls_system(Profile::zero(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let grid = Grid1D::periodic(-PI, PI, 8).unwrap();
        let z0 = smooth_nls_field(grid, 0.0);
        let cfg = tight();
        let z1 = step_expbox(&sys, &z0, 0.05, &cfg).unwrap();
        let zero = StateField::zeros(grid, 4, 0.0);
        let t0 = tangent_step(&sys, (&z0, &z1), &zero, 0.05, SchemeKind::Expbox, &cfg).unwrap();
        assert!(t0.values.iter().all(|v| *v == 0.0));
        // Linear system: the tangent of z0 itself is the step map applied to z0.
        let t1 = tangent_step(&sys, (&z0, &z1), &z0, 0.05, SchemeKind::Expbox, &cfg).unwrap();
        for (a, b) in t1.values.iter().zip(&z1.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_schrodinger_preserves_fourier_moduli() {
        // Plane wave e^{ikx}: the EMBS one-step map has unit amplification
        // for the undamped linear equation.
        let sys = make_nls_system(Profile::zero(), NlsParams::new(0.0, 0.0, 1.0)).unwrap();
        let n = 16;
        let grid = Grid1D::periodic(0.0, 2.0 * PI, n).unwrap();
        let k = 3.0;
        let dx = grid.dx();
        let mut f = StateField::from_fn(grid, 4, 0.0, |x| {
            let (c, s) = ((k * x).cos(), (k * x).sin());
            // v = δ⁻p, w = δ⁻q evaluated exactly for the plane wave.
            let (cm, sm) = ((k * (x - dx)).cos(), (k * (x - dx)).sin());
            vec![c, s, (c - cm) / dx, (s - sm) / dx]
        })
        .unwrap();
        for _ in 0..100 {
            f = step_embs(&sys, &f, 0.01, &tight()).unwrap();
        }
        for m in 0..n {
            let node = f.node(m);
            let modulus = (node[0] * node[0] + node[1] * node[1]).sqrt();
            assert!((modulus - 1.0).abs() < 1e-12, "{modulus}");
        }
    }
}
