//! Residuals of the discrete conservation laws satisfied by the exponential
//! schemes. Node residuals are returned in the natural (unscaled) form
//! `δ_t(density) + δ_x(flux)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conformal::{exp_weights, theta, DampingCoefficient, ExponentialWeights};
use crate::error::{Error, Result};
use crate::formulation::{Boundary, MultiSymplecticSystem, QuadraticInvariantAction, StateField};
use crate::schemes::{split_l, SchemeKind};
use crate::specialized::{CHField, ComplexField};
use crate::util::bilinear;

/// Names a [`DiagnosticRecord`] may carry.
pub const REGISTRY: [&str; 16] = [
    "norm_law_residual_max",
    "norm_law_residual_global",
    "paper_norm_error",
    "norm_sum",
    "casimir_residual",
    "casimir_unweighted",
    "energy_residual",
    "energy_residual_theta_weight",
    "energy",
    "twoform_residual_max",
    "quadratic_law_residual",
    "momentum_law_residual_max",
    "kdv_mass_residual",
    "newton_iterations",
    "newton_residual",
    "wall_seconds",
];

/// Named scalar diagnostics at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub entries: BTreeMap<String, f64>,
}

impl DiagnosticRecord {
    pub fn new(t: f64) -> Self {
        DiagnosticRecord {
            t,
            entries: BTreeMap::new(),
        }
    }

    /// Stores a value under a registered name; the value must be finite.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !REGISTRY.contains(&name) {
            return Err(Error::Argument(format!("`{name}` is not a registered diagnostic")));
        }
        if !value.is_finite() {
            return Err(Error::Evaluation {
                t: self.t,
                what: format!("diagnostic `{name}` is not finite"),
            });
        }
        self.entries.insert(name.to_string(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }
}

/// Two perturbations `du`, `dv` of the same base step, each given at the old
/// and new time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub du: (StateField, StateField),
    pub dv: (StateField, StateField),
}

impl TangentPair {
    fn check(&self, base: &StateField) -> Result<()> {
        let all = [&self.du.0, &self.du.1, &self.dv.0, &self.dv.1];
        if all.iter().all(|f| f.same_shape(base)) {
            Ok(())
        } else {
            Err(Error::Argument("tangent fields do not match the base field".into()))
        }
    }
}

fn same_grid(a: &StateField, b: &StateField) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Argument("fields at consecutive levels differ in shape".into()))
    }
}

/// `½(w₊z¹ + w₋z⁰)` node-major.
fn averaged(w: &ExponentialWeights, old: &[f64], new: &[f64]) -> Vec<f64> {
    old.iter().zip(new).map(|(o, n)| w.avg(*o, *n)).collect()
}

/// `(w₊z¹ - w₋z⁰)/dt` node-major.
fn differenced(w: &ExponentialWeights, old: &[f64], new: &[f64]) -> Vec<f64> {
    old.iter().zip(new).map(|(o, n)| w.diff(*o, *n)).collect()
}

/// Node `m = n + off` of a node-major array, with the boundary sign applied.
fn node(field: &StateField, values: &[f64], n: usize, off: isize) -> Vec<f64> {
    let d = field.dim;
    let (m, s) = field.grid.wrap(n, off);
    values[m * d..(m + 1) * d].iter().map(|v| s * v).collect()
}

fn cell_centre(field: &StateField, values: &[f64], n: usize) -> Vec<f64> {
    let a = node(field, values, n, 0);
    let b = node(field, values, n, 1);
    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// `aᵀMb - bᵀMa`.
fn wedge(a: &[f64], m: &DMatrix<f64>, b: &[f64]) -> f64 {
    bilinear(a, m, b) - bilinear(b, m, a)
}

struct LevelWeights {
    w: ExponentialWeights,
    e0: f64,
    e1: f64,
    eh: f64,
}

fn level_weights(coeff: &DampingCoefficient, t: f64, dt: f64) -> Result<LevelWeights> {
    let w = exp_weights(coeff, t, dt)?;
    let th0 = theta(coeff, t)?;
    let th1 = theta(coeff, t + dt)?;
    let thh = theta(coeff, t + 0.5 * dt)?;
    Ok(LevelWeights {
        w,
        e0: (2.0 * th0).exp(),
        e1: (2.0 * th1).exp(),
        eh: (2.0 * thh).exp(),
    })
}

/// Norm-law residuals of one reduced NLS step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormLawResidual {
    /// Largest node residual of the weighted norm balance.
    pub max_node: f64,
    /// `|log(ΣN¹/ΣN⁰) + 2(θ₁ - θ₀)|`.
    pub global: f64,
    /// `log(ΣN¹/ΣN⁰) - 4(θ₁ - θ₀)`, the quantity plotted in the literature.
    pub paper_norm_error: f64,
}

/// Residual of `δ_t(e^{2θ}|ψ_n|²) + δ_x(e^{2θ_h}·2(P_{n-1}Q_n - P_nQ_{n-1})/dx²)`
/// with `P, Q` the exponential time averages and `θ = ∫β`.
pub fn norm_law_residual(
    prev: &ComplexField,
    next: &ComplexField,
    beta: &DampingCoefficient,
    dt: f64,
) -> Result<NormLawResidual> {
    if prev.grid != next.grid {
        return Err(Error::Argument("fields at consecutive levels differ in grid".into()));
    }
    let lw = level_weights(beta, prev.t, dt)?;
    let grid = prev.grid;
    let dx = grid.dx();
    let n_nodes = grid.n_nodes;
    let pa: Vec<f64> = (0..n_nodes).map(|n| lw.w.avg(prev.p[n], next.p[n])).collect();
    let qa: Vec<f64> = (0..n_nodes).map(|n| lw.w.avg(prev.q[n], next.q[n])).collect();
    let flux = |n: usize| {
        let (l, s) = grid.wrap(n, -1);
        (s * pa[l] * qa[n] - pa[n] * s * qa[l]) / dx
    };
    let mut max_node = 0.0f64;
    for n in 0..n_nodes {
        let n1 = next.p[n].powi(2) + next.q[n].powi(2);
        let n0 = prev.p[n].powi(2) + prev.q[n].powi(2);
        let (r, _) = grid.wrap(n, 1);
        // Wrapping into n+1 keeps the flux value since it is a product of
        // two signed entries.
        let r = (lw.e1 * n1 - lw.e0 * n0) / dt + lw.eh * 2.0 * (flux(r) - flux(n)) / dx;
        max_node = max_node.max(r.abs());
    }
    let ratio = (next.norm_sum() / prev.norm_sum()).ln();
    let dtheta = theta(beta, prev.t + dt)? - theta(beta, prev.t)?;
    Ok(NormLawResidual {
        max_node,
        global: (ratio + 2.0 * dtheta).abs(),
        paper_norm_error: ratio - 4.0 * dtheta,
    })
}

/// Largest node residual of the weighted quadratic-invariant law of the
/// exponential box scheme:
/// `δ_t(e^{2θ} z_cᵀKBz_c) + δ_x(e^{2θ_h}(Az_n)ᵀLB(Az_n)) = 0`.
pub fn quadratic_law_residual(
    prev: &StateField,
    next: &StateField,
    sys: &MultiSymplecticSystem,
    action: &QuadraticInvariantAction,
    dt: f64,
) -> Result<f64> {
    same_grid(prev, next)?;
    if prev.dim != sys.dim() {
        return Err(Error::Argument("field dimension does not match the system".into()));
    }
    let lw = level_weights(sys.damping(), prev.t, dt)?;
    let avg = averaged(&lw.w, &prev.values, &next.values);
    let dx = prev.grid.dx();
    let flux = |n: usize, off: isize| {
        let a = node(prev, &avg, n, off);
        bilinear(&a, action.lb(), &a)
    };
    let mut worst = 0.0f64;
    for n in 0..prev.n_nodes() {
        let c0 = cell_centre(prev, &prev.values, n);
        let c1 = cell_centre(next, &next.values, n);
        let q0 = bilinear(&c0, action.kb(), &c0);
        let q1 = bilinear(&c1, action.kb(), &c1);
        let r = (lw.e1 * q1 - lw.e0 * q0) / dt + lw.eh * (flux(n, 1) - flux(n, 0)) / dx;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Largest cell residual of the weighted momentum law of the exponential
/// discrete-gradient box scheme:
/// `δ_t(e^{2θ}·½z_cᵀKδ_x z) + δ_x(e^{2θ_h}(½(Dz_n)ᵀK(Az_n) + S(Az_n, t_h))) = 0`.
pub fn momentum_law_residual(
    prev: &StateField,
    next: &StateField,
    sys: &MultiSymplecticSystem,
    dt: f64,
) -> Result<f64> {
    same_grid(prev, next)?;
    if prev.dim != sys.dim() {
        return Err(Error::Argument("field dimension does not match the system".into()));
    }
    let lw = level_weights(sys.damping(), prev.t, dt)?;
    let t_h = prev.t + 0.5 * dt;
    let dx = prev.grid.dx();
    let avg = averaged(&lw.w, &prev.values, &next.values);
    let dif = differenced(&lw.w, &prev.values, &next.values);
    let density = |f: &StateField, n: usize| {
        let a = node(f, &f.values, n, 0);
        let b = node(f, &f.values, n, 1);
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let g: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (y - x) / dx).collect();
        0.5 * bilinear(&c, sys.k(), &g)
    };
    let flux = |n: usize, off: isize| {
        let y = node(prev, &avg, n, off);
        let d = node(prev, &dif, n, off);
        0.5 * bilinear(&d, sys.k(), &y) + sys.s(&y, t_h)
    };
    let mut worst = 0.0f64;
    for n in 0..prev.n_nodes() {
        let r = (lw.e1 * density(next, n) - lw.e0 * density(prev, n)) / dt + lw.eh * (flux(n, 1) - flux(n, 0)) / dx;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Largest node residual of the weighted discrete two-form law for the pair
/// `(du, dv)` along the step `base.0 -> base.1`.
///
/// `Expbox` and `MidpointBoxBaseline` are measured with the box form
/// `δ_t(e^{2θ} du_c∧K dv_c) + δ_x(e^{2θ_h} A du_n∧L A dv_n)`; `Embs` and
/// `MixedEulerBaseline` with the node form whose flux pairs neighbouring
/// nodes through the upper part `L₊` of `L`. The baselines thus expose how
/// far they are from the conformal law.
pub fn twoform_residual(
    base: (&StateField, &StateField),
    pair: &TangentPair,
    sys: &MultiSymplecticSystem,
    kind: SchemeKind,
    dt: f64,
) -> Result<f64> {
    let (z0, z1) = base;
    same_grid(z0, z1)?;
    pair.check(z0)?;
    let lw = level_weights(sys.damping(), z0.t, dt)?;
    let f = z0;
    let au = averaged(&lw.w, &pair.du.0.values, &pair.du.1.values);
    let av = averaged(&lw.w, &pair.dv.0.values, &pair.dv.1.values);
    let dx = f.grid.dx();
    let k = sys.k();
    let mut worst = 0.0f64;
    match kind {
        SchemeKind::Expbox | SchemeKind::MidpointBoxBaseline => {
            let flux = |n: usize, off: isize| wedge(&node(f, &au, n, off), sys.l(), &node(f, &av, n, off));
            for n in 0..f.n_nodes() {
                let w0 = wedge(
                    &cell_centre(f, &pair.du.0.values, n),
                    k,
                    &cell_centre(f, &pair.dv.0.values, n),
                );
                let w1 = wedge(
                    &cell_centre(f, &pair.du.1.values, n),
                    k,
                    &cell_centre(f, &pair.dv.1.values, n),
                );
                let r = (lw.e1 * w1 - lw.e0 * w0) / dt + lw.eh * (flux(n, 1) - flux(n, 0)) / dx;
                worst = worst.max(r.abs());
            }
        }
        SchemeKind::Embs | SchemeKind::MixedEulerBaseline => {
            let lp = split_l(sys.l())?.plus;
            // G_n = A du_{n-1}ᵀ L₊ A dv_n - A dv_{n-1}ᵀ L₊ A du_n.
            let flux = |n: usize, off: isize| {
                let ul = node(f, &au, n, off - 1);
                let vl = node(f, &av, n, off - 1);
                let u = node(f, &au, n, off);
                let v = node(f, &av, n, off);
                bilinear(&ul, &lp, &v) - bilinear(&vl, &lp, &u)
            };
            for n in 0..f.n_nodes() {
                let w0 = wedge(&node(f, &pair.du.0.values, n, 0), k, &node(f, &pair.dv.0.values, n, 0));
                let w1 = wedge(&node(f, &pair.du.1.values, n, 0), k, &node(f, &pair.dv.1.values, n, 0));
                let r = (lw.e1 * w1 - lw.e0 * w0) / dt + 2.0 * lw.eh * (flux(n, 1) - flux(n, 0)) / dx;
                worst = worst.max(r.abs());
            }
        }
        SchemeKind::Expdg => {
            return Err(Error::Configuration(
                "the two-form diagnostic supports the box and node stencils, not expdg".into(),
            ))
        }
    }
    Ok(worst)
}

/// Camassa-Holm Casimir and energy balances between two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChLawResiduals {
    /// `|e^{θ₁}Σu¹ - e^{θ₀}Σu⁰|·dx`.
    pub casimir: f64,
    /// `|Σu¹ - Σu⁰|·dx`, for comparison.
    pub casimir_unweighted: f64,
    /// `|e^{2θ₁}E¹ - e^{2θ₀}E⁰|` with `E = ½Σ(u² + (δ⁺u)²)dx`.
    pub energy: f64,
    /// The same increment with weight `e^{θ}`.
    pub energy_theta_weight: f64,
}

/// Discrete `H¹` energy `½Σ(u² + (δ⁺u)²)dx` of a periodic field.
pub fn ch_energy(field: &CHField) -> f64 {
    let dx = field.grid.dx();
    let n = field.u.len();
    let s: f64 = (0..n)
        .map(|i| {
            let du = (field.u[(i + 1) % n] - field.u[i]) / dx;
            field.u[i].powi(2) + du * du
        })
        .sum();
    0.5 * s * dx
}

pub fn ch_casimir_and_energy(
    prev: &CHField,
    next: &CHField,
    gamma: &DampingCoefficient,
    dt: f64,
) -> Result<ChLawResiduals> {
    if prev.grid.boundary != Boundary::Periodic || next.grid != prev.grid {
        return Err(Error::Configuration(
            "Camassa-Holm diagnostics need two fields on the same periodic grid".into(),
        ));
    }
    let th0 = theta(gamma, prev.t)?;
    let th1 = theta(gamma, prev.t + dt)?;
    let dx = prev.grid.dx();
    let s0: f64 = prev.u.iter().sum();
    let s1: f64 = next.u.iter().sum();
    let (e0, e1) = (ch_energy(prev), ch_energy(next));
    Ok(ChLawResiduals {
        casimir: (th1.exp() * s1 - th0.exp() * s0).abs() * dx,
        casimir_unweighted: (s1 - s0).abs() * dx,
        energy: ((2.0 * th1).exp() * e1 - (2.0 * th0).exp() * e0).abs(),
        energy_theta_weight: (th1.exp() * e1 - th0.exp() * e0).abs(),
    })
}

/// `|e^{θ₁}Σu¹ - e^{θ₀}Σu⁰|·dx` for the `u` component of a KdV state.
pub fn kdv_mass_residual(prev: &StateField, next: &StateField, sys: &MultiSymplecticSystem, dt: f64) -> Result<f64> {
    same_grid(prev, next)?;
    let c = sys
        .labels()
        .iter()
        .position(|l| l == "u")
        .ok_or_else(|| Error::Configuration(format!("system `{}` has no `u` component", sys.name())))?;
    if prev.grid.boundary != Boundary::Periodic {
        return Err(Error::Configuration("the mass balance needs a periodic grid".into()));
    }
    let th0 = theta(sys.damping(), prev.t)?;
    let th1 = theta(sys.damping(), prev.t + dt)?;
    let s0: f64 = prev.component(c).iter().sum();
    let s1: f64 = next.component(c).iter().sum();
    Ok((th1.exp() * s1 - th0.exp() * s0).abs() * prev.grid.dx())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::formulation::{
        make_kdv_system, make_nls_conjugate_system, make_nls_system, norm_action, Grid1D, NlsParams, Profile,
    };
    use crate::newton::NewtonConfig;
    use crate::schemes::{step, tangent_step};
    use crate::specialized::{step_nls, NlsModel};
    use crate::util::SplitMix64;

    fn cfg() -> NewtonConfig {
        NewtonConfig::default().with_tol(1e-13)
    }

    fn nls_state(grid: Grid1D, seed: u64) -> StateField {
        let mut rng = SplitMix64::new(seed);
        let (a, b, c) = (rng.uniform(0.5, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
        let p: Vec<f64> = grid
            .nodes()
            .map(|x| a * (x + c).cos() + 0.2 * (2.0 * x).sin())
            .collect();
        let q: Vec<f64> = grid.nodes().map(|x| b * (x - c).sin()).collect();
        let dx = grid.dx();
        let n = grid.n_nodes;
        StateField::from_fn(grid, 4, 0.0, |_| vec![0.0; 4])
            .map(|mut f| {
                for i in 0..n {
                    let v = (p[(i + 1) % n] - p[i]) / dx;
                    let w = (q[(i + 1) % n] - q[i]) / dx;
                    f.node_mut(i).copy_from_slice(&[p[i], q[i], v, w]);
                }
                f
            })
            .unwrap()
    }

    #[test]
    fn registry_rejects_unknown_names_and_non_finite_values() {
        let mut r = DiagnosticRecord::new(0.0);
        assert!(r.set("casimir_residual", 1e-14).is_ok());
        assert!(matches!(r.set("bogus", 1.0), Err(Error::Argument(_))));
        assert!(r.set("energy", f64::NAN).is_err());
        assert_eq!(r.get("casimir_residual"), Some(1e-14));
    }

    #[test]
    fn norm_law_vanishes_along_reduced_steps() {
        let g = Grid1D::new(-30.0, 30.0, 600, Boundary::AntiPeriodic).unwrap();
        let m = NlsModel::cubic(NlsParams::new(0.1, -0.2, PI));
        let beta = m.params.damping();
        let mut f = ComplexField::from_fn(g, 0.0, |x| (x.tanh(), 0.0)).unwrap();
        for _ in 0..20 {
            let next = step_nls(&f, &m, SchemeKind::Embs, 1e-3, &cfg()).unwrap().field;
            let r = norm_law_residual(&f, &next, &beta, 1e-3).unwrap();
            assert!(r.max_node < 1e-10 && r.global < 1e-12, "{r:?}");
            f = next;
        }
    }

    #[test]
    fn norm_law_detects_a_local_perturbation() {
        let g = Grid1D::periodic(-10.0, 10.0, 100).unwrap();
        let m = NlsModel::cubic(NlsParams::new(0.1, -0.2, PI));
        let f = ComplexField::from_fn(g, 0.0, |x| (1.0 / x.cosh(), 0.0)).unwrap();
        let mut next = step_nls(&f, &m, SchemeKind::Embs, 1e-3, &cfg()).unwrap().field;
        let base = norm_law_residual(&f, &next, &m.params.damping(), 1e-3)
            .unwrap()
            .max_node;
        next.p[50] += 1e-6;
        let pert = norm_law_residual(&f, &next, &m.params.damping(), 1e-3)
            .unwrap()
            .max_node;
        assert!(pert - base >= 1e-8);
    }

    #[test]
    fn quadratic_law_on_expbox_nls() {
        let g = Grid1D::periodic(-8.0, 8.0, 64).unwrap();
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let action = norm_action(&sys).unwrap();
        let mut f = nls_state(g, 3);
        for _ in 0..5 {
            let next = step(&sys, SchemeKind::Expbox, &f, 0.01, &cfg()).unwrap().field;
            let r = quadratic_law_residual(&f, &next, &sys, &action, 0.01).unwrap();
            assert!(r < 1e-10, "{r}");
            f = next;
        }
    }

    #[test]
    fn momentum_law_on_expdg_conjugate_nls() {
        let g = Grid1D::periodic(-8.0, 8.0, 64).unwrap();
        let sys = make_nls_conjugate_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let mut f = nls_state(g, 4);
        for _ in 0..5 {
            let next = step(&sys, SchemeKind::Expdg, &f, 0.01, &cfg()).unwrap().field;
            let r = momentum_law_residual(&f, &next, &sys, 0.01).unwrap();
            assert!(r < 1e-9, "{r}");
            f = next;
        }
        let z = StateField::zeros(g, 4, 0.0);
        let mut z1 = z.clone();
        z1.t = 0.01;
        assert_eq!(momentum_law_residual(&z, &z1, &sys, 0.01).unwrap(), 0.0);
    }

    fn random_field(like: &StateField, rng: &mut SplitMix64) -> StateField {
        let mut f = like.clone();
        f.values.iter_mut().for_each(|v| *v = rng.uniform(-1.0, 1.0));
        f
    }

    fn twoform_for(kind: SchemeKind) -> (f64, f64) {
        let g = Grid1D::periodic(-8.0, 8.0, 32).unwrap();
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.1, -0.2, PI)).unwrap();
        let f0 = nls_state(g, 9);
        let dt = 0.01;
        let f1 = step(&sys, kind, &f0, dt, &cfg()).unwrap().field;
        let mut rng = SplitMix64::new(1);
        let u0 = random_field(&f0, &mut rng);
        let v0 = random_field(&f0, &mut rng);
        let u1 = tangent_step(&sys, (&f0, &f1), &u0, dt, kind, &cfg()).unwrap();
        let v1 = tangent_step(&sys, (&f0, &f1), &v0, dt, kind, &cfg()).unwrap();
        let pair = TangentPair {
            du: (u0.clone(), u1.clone()),
            dv: (v0, v1),
        };
        let r = twoform_residual((&f0, &f1), &pair, &sys, kind, dt).unwrap();
        let same = TangentPair {
            du: (u0.clone(), u1.clone()),
            dv: (u0, u1),
        };
        let z = twoform_residual((&f0, &f1), &same, &sys, kind, dt).unwrap();
        (r, z)
    }

    #[test]
    fn twoform_law_holds_for_exponential_schemes() {
        for kind in [SchemeKind::Expbox, SchemeKind::Embs] {
            let (r, z) = twoform_for(kind);
            assert!(r < 1e-10, "{kind}: {r}");
            assert_eq!(z, 0.0);
        }
    }

    #[test]
    fn twoform_law_fails_for_baselines() {
        for kind in [SchemeKind::MidpointBoxBaseline, SchemeKind::MixedEulerBaseline] {
            let (r, _) = twoform_for(kind);
            assert!(r > 1e-4, "{kind}: {r}");
        }
    }

    #[test]
    fn twoform_rejects_expdg() {
        let g = Grid1D::periodic(-1.0, 1.0, 4).unwrap();
        let sys = make_nls_system(Profile::cubic(), NlsParams::new(0.0, 0.0, 1.0)).unwrap();
        let z = StateField::zeros(g, 4, 0.0);
        let pair = TangentPair {
            du: (z.clone(), z.clone()),
            dv: (z.clone(), z.clone()),
        };
        assert!(matches!(
            twoform_residual((&z, &z), &pair, &sys, SchemeKind::Expdg, 0.1),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn ch_constant_state_has_zero_residuals() {
        let g = Grid1D::periodic(-PI, PI, 16).unwrap();
        let a = CHField::from_fn(g, 0.0, |_| 0.3).unwrap();
        let mut b = a.clone();
        b.t = 0.1;
        let r = ch_casimir_and_energy(&a, &b, &DampingCoefficient::zero(), 0.1).unwrap();
        assert_eq!((r.casimir, r.energy), (0.0, 0.0));
    }

    #[test]
    fn kdv_mass_balance() {
        let g = Grid1D::periodic(0.0, 2.0 * PI, 48).unwrap();
        let sys = make_kdv_system(2, DampingCoefficient::constant(0.1), |_| 1.0).unwrap();
        let mut f = StateField::from_fn(g, 4, 0.0, |x| vec![0.0, 0.1 * x.sin(), 0.0, 0.0]).unwrap();
        for _ in 0..10 {
            let next = step(&sys, SchemeKind::Expbox, &f, 0.01, &cfg()).unwrap().field;
            let r = kdv_mass_residual(&f, &next, &sys, 0.01).unwrap();
            assert!(r < 1e-9, "{r}");
            f = next;
        }
        let zero = StateField::zeros(g, 4, 0.0);
        let sys0 = make_kdv_system(2, DampingCoefficient::zero(), |_| 1.0).unwrap();
        assert_eq!(kdv_mass_residual(&zero, &zero, &sys0, 0.01).unwrap(), 0.0);
    }
}
