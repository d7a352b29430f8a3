use std::f64::consts::PI;

use proptest::prelude::*;

use conformal_ms::conformal::{exp_weights, op_a, op_d, product_rule_residual, DampingCoefficient, ExponentialWeights};
use conformal_ms::diagnostics::{ch_casimir_and_energy, norm_law_residual};
use conformal_ms::formulation::{Boundary, Grid1D, NlsParams};
use conformal_ms::harness::{parse_config, preset};
use conformal_ms::newton::NewtonConfig;
use conformal_ms::schemes::SchemeKind;
use conformal_ms::specialized::{step_ch, step_nls, CHField, ComplexField, NlsModel};

fn coefficient() -> impl Strategy<Value = DampingCoefficient> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(DampingCoefficient::constant),
        (-1.0..1.0f64, -1.0..1.0f64, 0.1..5.0f64).prop_map(|(g, c, w)| DampingCoefficient::sinusoid(g, c, w)),
    ]
}

fn vec4() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 4)
}

fn rotate<T: Clone>(v: &[T], k: usize) -> Vec<T> {
    let mut r = v.to_vec();
    r.rotate_left(k);
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_match_theta_differences(a in coefficient(), t in 0.0..10.0f64, dt in 1e-3..0.5f64) {
        let w = exp_weights(&a, t, dt).unwrap();
        let th = |s: f64| a.theta(s).unwrap();
        let h = t + 0.5 * dt;
        prop_assert!((w.plus - (th(t + dt) - th(h)).exp()).abs() <= 1e-12);
        prop_assert!((w.minus - (th(t) - th(h)).exp()).abs() <= 1e-12);
    }

    #[test]
    fn operators_are_linear(
        a in coefficient(), t in 0.0..5.0f64, dt in 1e-3..0.5f64,
        z in vec4(), v in vec4(), u in vec4(), r in vec4(), al in -2.0..2.0f64, be in -2.0..2.0f64,
    ) {
        let w = exp_weights(&a, t, dt).unwrap();
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| al * p + be * q).collect::<Vec<_>>();
        type Op = fn(&ExponentialWeights, &[f64], &[f64]) -> conformal_ms::Result<Vec<f64>>;
        let ops: [(Op, f64); 2] = [(op_a, 1.0), (op_d, 1.0 / dt)];
        for (op, scale) in ops {
            let lhs = op(&w, &mix(&z, &u), &mix(&v, &r)).unwrap();
            let (f, g) = (op(&w, &z, &v).unwrap(), op(&w, &u, &r).unwrap());
            for i in 0..4 {
                prop_assert!((lhs[i] - (al * f[i] + be * g[i])).abs() <= 1e-14 * 8.0 * scale);
            }
        }
    }

    #[test]
    fn product_rule_holds(
        a in coefficient(), t in 0.0..10.0f64, dt in 1e-3..0.5f64,
        z0 in vec4(), z1 in vec4(), y0 in vec4(), y1 in vec4(),
    ) {
        let m = [&z0, &z1, &y0, &y1].iter().flat_map(|x| x.iter()).fold(0.0f64, |s, v| s.max(v.abs()));
        let r = product_rule_residual(&a, t, dt, &z0, &z1, &y0, &y1).unwrap();
        prop_assert!(r * dt <= 1e-13 * (1.0 + m), "{r}");
    }

    #[test]
    fn nls_norm_residual_is_rotation_invariant(k in 1usize..40, amp in 0.1..1.0f64, shift in -3.0..3.0f64) {
        let g = Grid1D::periodic(-10.0, 10.0, 40).unwrap();
        let m = NlsModel::cubic(NlsParams::new(0.1, -0.2, PI));
        let f0 = ComplexField::from_fn(g, 0.3, |x| (amp / (x - shift).cosh(), 0.2 * (PI * x / 10.0).sin())).unwrap();
        let f1 = step_nls(&f0, &m, SchemeKind::Embs, 0.01, &NewtonConfig::default().with_tol(1e-13)).unwrap().field;
        let rot = |f: &ComplexField| ComplexField::new(g, rotate(&f.p, k), rotate(&f.q, k), f.t).unwrap();
        let a = norm_law_residual(&f0, &f1, &m.params.damping(), 0.01).unwrap();
        let b = norm_law_residual(&rot(&f0), &rot(&f1), &m.params.damping(), 0.01).unwrap();
        prop_assert!((a.max_node - b.max_node).abs() <= 1e-14);
        prop_assert!((a.global - b.global).abs() <= 1e-14);
    }

    #[test]
    fn ch_residuals_are_rotation_invariant(k in 1usize..30, c in 0.05..0.3f64) {
        let g = Grid1D::periodic(-PI, PI, 31).unwrap();
        let gamma = DampingCoefficient::sinusoid(0.0, -0.2, PI);
        let u0 = CHField::from_fn(g, 0.0, |x| c + 0.1 * (2.0 * x).cos()).unwrap();
        let u1 = step_ch(&u0, &gamma, SchemeKind::Expbox, 0.01, &NewtonConfig::default().with_tol(1e-13)).unwrap().field;
        let rot = |f: &CHField| CHField::new(g, rotate(&f.u, k), f.t).unwrap();
        let a = ch_casimir_and_energy(&u0, &u1, &gamma, 0.01).unwrap();
        let b = ch_casimir_and_energy(&rot(&u0), &rot(&u1), &gamma, 0.01).unwrap();
        prop_assert!((a.casimir - b.casimir).abs() <= 1e-14);
        prop_assert!((a.energy - b.energy).abs() <= 1e-14);
    }

    #[test]
    fn norm_residual_responds_linearly_to_perturbations(node in 0usize..40) {
        let g = Grid1D::new(-10.0, 10.0, 40, Boundary::Periodic).unwrap();
        let m = NlsModel::cubic(NlsParams::new(0.1, -0.2, PI));
        let f0 = ComplexField::from_fn(g, 0.0, |x| (1.0 / x.cosh(), 0.0)).unwrap();
        let f1 = step_nls(&f0, &m, SchemeKind::Embs, 0.01, &NewtonConfig::default().with_tol(1e-14)).unwrap().field;
        let beta = m.params.damping();
        let base = norm_law_residual(&f0, &f1, &beta, 0.01).unwrap().global;
        let bump = |eps: f64| {
            let mut f = f1.clone();
            f.p[node] += eps;
            norm_law_residual(&f0, &f, &beta, 0.01).unwrap().global - base
        };
        let (r1, r2) = (bump(1e-8), bump(2e-8));
        prop_assume!(r1.abs() > 1e-13);
        prop_assert!((r2 / r1 - 2.0).abs() < 1e-3, "{r1} {r2}");
    }

    #[test]
    fn config_round_trips(n in 8usize..500, steps in 1usize..1000, stride in 1usize..50, name_idx in 0usize..8) {
        let mut cfg = preset(conformal_ms::harness::PRESET_NAMES[name_idx]).unwrap();
        cfg.grid.n_nodes = n;
        cfg.dt = 0.001;
        cfg.t_end = steps as f64 * 0.001;
        cfg.output.snapshot_stride = stride;
        prop_assume!(cfg.validate().is_ok());
        prop_assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}
