use crate::conformal::{exp_weights, DampingCoefficient};
use crate::error::{Error, Result};
use crate::linalg::{node_coloring, PeriodicBlockLu, PeriodicBlockMatrix};
use crate::newton::{newton_solve, NewtonConfig};
use crate::schemes::SchemeKind;

use super::CHField;

/// Stencil offsets of both the mass operator and the nonlinear term.
const OFFSETS: [isize; 4] = [-1, 0, 1, 2];

fn at(v: &[f64], n: usize, off: isize) -> f64 {
    let len = v.len() as isize;
    v[(n as isize + off).rem_euclid(len) as usize]
}

fn mass_coefficients(dx: f64) -> [f64; 4] {
    let outer = 0.125 - 0.5 / (dx * dx);
    let inner = 0.375 + 0.5 / (dx * dx);
    [outer, inner, inner, outer]
}

/// Discrete `u - u_xx` located at the cell midpoints `x_{n+1/2}`.
pub fn ch_mass(u: &[f64], dx: f64) -> Vec<f64> {
    let c = mass_coefficients(dx);
    (0..u.len())
        .map(|n| OFFSETS.iter().zip(&c).map(|(o, c)| c * at(u, n, *o)).sum())
        .collect()
}

/// Discrete `3 u u_x - 2 u_x u_xx - u u_xxx` at the cell midpoints. The sum
/// over a periodic grid vanishes identically.
pub fn ch_nonlinear(a: &[f64], dx: f64) -> Vec<f64> {
    let len = a.len();
    let b: Vec<f64> = (0..len).map(|m| 0.5 * (a[m] + at(a, m, 1))).collect();
    let e: Vec<f64> = (0..len).map(|m| (at(a, m, 1) - a[m]) / dx).collect();
    let g = |n: usize, s: isize| {
        let (bl, br) = (at(&b, n, s - 1), at(&b, n, s));
        (br - bl) / dx * 0.5 * (bl + br)
    };
    let h = |n: usize, s: isize| {
        let (bl, br) = (at(&b, n, s - 1), at(&b, n, s));
        let lap = (at(a, n, s + 1) - 2.0 * at(a, n, s) + at(a, n, s - 1)) / (dx * dx);
        (br - bl) / dx * lap
    };
    (0..len)
        .map(|n| {
            let (bm, b0, bp) = (at(&b, n, -1), b[n], at(&b, n, 1));
            let c0 = 0.5 * (bm + b0);
            let c1 = 0.5 * (b0 + bp);
            let t2 = (c1 - c0) / dx * (bp - 2.0 * b0 + bm) / (dx * dx);
            let e2 = (at(&e, n, 1) - 2.0 * e[n] + at(&e, n, -1)) / (dx * dx);
            1.5 * (g(n, 0) + g(n, 1)) - (3.0 * t2 - 0.5 * (h(n, 0) + h(n, 1)) + 0.25 * (bm + 2.0 * b0 + bp) * e2)
        })
        .collect()
}

/// Result of one converged Camassa-Holm step.
#[derive(Debug, Clone)]
pub struct ChStepOutcome {
    pub field: CHField,
    pub iterations: usize,
    pub residual: f64,
}

struct ChProblem<'a> {
    field: &'a CHField,
    plus: f64,
    minus: f64,
    /// Damping rate applied explicitly to the averaged mass (baseline only).
    explicit: f64,
    dt: f64,
    old_mass: Vec<f64>,
}

impl ChProblem<'_> {
    fn average(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.field.u)
            .map(|(a, b)| 0.5 * (self.plus * a + self.minus * b))
            .collect()
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let dx = self.field.grid.dx();
        let a = self.average(x);
        let m_new = ch_mass(x, dx);
        let nl = ch_nonlinear(&a, dx);
        for n in 0..x.len() {
            let avg_mass = 0.5 * (m_new[n] + self.old_mass[n]);
            out[n] =
                self.plus * m_new[n] - self.minus * self.old_mass[n] + self.dt * (nl[n] + self.explicit * avg_mass);
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Evaluation {
                t: self.field.t,
                what: "non-finite Camassa-Holm residual".into(),
            })
        }
    }

    fn jacobian(&self, x: &[f64]) -> Result<PeriodicBlockLu> {
        let len = x.len();
        let dx = self.field.grid.dx();
        let a = self.average(x);
        let mut jac = PeriodicBlockMatrix::new(len, 1, 2);
        let mc = mass_coefficients(dx);
        let diag = self.plus + 0.5 * self.dt * self.explicit;
        for n in 0..len {
            for (o, c) in OFFSETS.iter().zip(&mc) {
                let col = (n as isize + o).rem_euclid(len as isize) as usize;
                jac.add(n, 0, col, 0, diag * c);
            }
        }
        // N is a homogeneous quadratic, so N'(a)e = (N(a+e) - N(a-e))/2.
        let scale = 0.5 * self.plus * self.dt;
        let (colors, count) = node_coloring(len, 2);
        let mut ap = vec![0.0; len];
        let mut am = vec![0.0; len];
        for color in 0..count {
            for j in 0..len {
                let e = if colors[j] == color { 1.0 } else { 0.0 };
                ap[j] = a[j] + e;
                am[j] = a[j] - e;
            }
            let np = ch_nonlinear(&ap, dx);
            let nm = ch_nonlinear(&am, dx);
            for j in (0..len).filter(|j| colors[*j] == color) {
                // Column j enters rows j-2 ..= j+1.
                for o in OFFSETS {
                    let row = (j as isize - o).rem_euclid(len as isize) as usize;
                    jac.add(row, 0, j, 0, scale * 0.5 * (np[row] - nm[row]));
                }
            }
        }
        jac.factor()
    }
}

/// One step of the Camassa-Holm box scheme. `kind` selects the exponential
/// scheme (`Expbox`) or the Preissmann baseline (`MidpointBoxBaseline`).
pub fn step_ch(
    field: &CHField,
    gamma: &DampingCoefficient,
    kind: SchemeKind,
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<ChStepOutcome> {
    let (plus, minus, explicit) = match kind {
        SchemeKind::Expbox => {
            let w = exp_weights(gamma, field.t, dt)?;
            (w.plus, w.minus, 0.0)
        }
        SchemeKind::MidpointBoxBaseline => {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Argument(format!("dt must be positive, got {dt}")));
            }
            (1.0, 1.0, gamma.rate(field.t + 0.5 * dt))
        }
        other => {
            return Err(Error::Configuration(format!(
                "the Camassa-Holm stepper supports expbox and midpoint_box_baseline, not {other}"
            )))
        }
    };
    let problem = ChProblem {
        field,
        plus,
        minus,
        explicit,
        dt,
        old_mass: ch_mass(&field.u, field.grid.dx()),
    };
    let out = newton_solve(
        |x, r| problem.residual(x, r),
        |x| problem.jacobian(x),
        field.u.clone(),
        cfg,
    )?;
    Ok(ChStepOutcome {
        field: CHField {
            grid: field.grid,
            u: out.x,
            t: field.t + dt,
        },
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// Exponential Camassa-Holm step.
pub fn step_ch_expbox(field: &CHField, gamma: &DampingCoefficient, dt: f64, cfg: &NewtonConfig) -> Result<CHField> {
    step_ch(field, gamma, SchemeKind::Expbox, dt, cfg).map(|o| o.field)
}
