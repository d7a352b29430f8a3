use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::RunConfig;
use super::output::{fmt_f64, SCHEMA_VERSION};
use super::sim::{integrate, Checkpoint, SimState, Simulation};

/// Errors below this fraction of the solution norm count as exact.
pub const EXACT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// L² distance at `t_end` to the solution with `dt/2`.
    pub error: f64,
    /// L² distance at `t_end` to the solution on the extra finest level.
    pub error_to_finest: f64,
    /// `log2` of the ratio of this row's error to the previous one; absent
    /// on the first row and when either error is exact.
    pub observed_order: Option<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Orders of all rows that have one.
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.observed_order).collect()
    }

    pub fn all_exact(&self) -> bool {
        self.rows.iter().all(|r| r.exact)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# schema_version={SCHEMA_VERSION}\ndt,error,error_to_finest,observed_order,exact\n");
        for r in &self.rows {
            let order = match (r.exact, r.observed_order) {
                (true, _) => "exact".to_string(),
                (false, Some(p)) => fmt_f64(p),
                (false, None) => String::new(),
            };
            s.push_str(&format!(
                "{},{},{},{order},{}\n",
                fmt_f64(r.dt),
                fmt_f64(r.error),
                fmt_f64(r.error_to_finest),
                r.exact
            ));
        }
        s
    }
}

fn solve(config: &RunConfig, dt: f64) -> Result<(SimState, Vec<usize>)> {
    let mut cfg = config.clone();
    cfg.dt = dt;
    let sim = Simulation::new(cfg)?;
    let n = sim.config().n_steps()?;
    let out = integrate(&sim, Checkpoint::new(0, sim.initial_state()?), n, false, |_, _, _| {
        Ok(())
    });
    match out.error {
        Some(e) => Err(e),
        None => Ok((out.last.state, sim.dynamic_components())),
    }
}

/// Temporal self-convergence at fixed `dx`: level `l` uses `dt/2^l`, and
/// one extra level `dt/2^levels` serves as the finest reference. The
/// order is taken from successive differences `|u_l - u_{l+1}|`, which
/// are free of the bias a finite reference adds to the last rows.
pub fn convergence_study(config: &RunConfig, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::validation("levels", format!("need at least 3, got {levels}")));
    }
    config.validate()?;
    let mut sols = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let dt = config.dt / 2f64.powi(l as i32);
        let (s, dynamic) = solve(config, dt).map_err(|e| Error::Study {
            level: l,
            source: Box::new(e),
        })?;
        sols.push((dt, s, dynamic));
    }
    let (_, finest, dynamic) = &sols[levels];
    let zero = {
        let mut z = finest.clone();
        match &mut z {
            SimState::Complex(f) => f.p.iter_mut().chain(f.q.iter_mut()).for_each(|v| *v = 0.0),
            SimState::Ch(f) => f.u.iter_mut().for_each(|v| *v = 0.0),
            SimState::Generic(f) => f.values.iter_mut().for_each(|v| *v = 0.0),
        }
        z
    };
    let scale = finest.distance(&zero, dynamic)?.max(f64::MIN_POSITIVE);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for l in 0..levels {
        let error = sols[l].1.distance(&sols[l + 1].1, dynamic)?;
        let exact = error <= EXACT_TOL * scale;
        let observed_order = match rows.last() {
            Some(prev) if !prev.exact && !exact => Some((prev.error / error).log2()),
            _ => None,
        };
        rows.push(ConvergenceRow {
            dt: sols[l].0,
            error,
            error_to_finest: sols[l].1.distance(finest, dynamic)?,
            observed_order,
            exact,
        });
    }
    Ok(ConvergenceTable { rows })
}
