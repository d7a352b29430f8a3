use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::RunConfig;
use super::output::{create_dir, fmt_f64, read_checkpoint, write_json, write_snapshot, CsvSink};
use super::sim::{integrate, Checkpoint, Simulation};

/// Entries of a diagnostic record that are state measurements, not
/// residuals, and so are left out of `max_residuals`.
const NOT_RESIDUALS: [&str; 4] = ["norm_sum", "energy", "newton_iterations", "newton_residual"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

/// What [`run`] returns and writes to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub scheme: String,
    pub steps_completed: usize,
    pub steps_requested: usize,
    pub t_final: f64,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Largest absolute value of each residual over the steps taken.
    pub max_residuals: BTreeMap<String, f64>,
    pub newton_iterations_total: usize,
    pub newton_iterations_max: usize,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn max_residual(&self, name: &str) -> Option<f64> {
        self.max_residuals.get(name).copied()
    }
}

/// Runs `config` from its initial condition and writes, under
/// `config.output.directory`:
///
/// * `config.toml`: the configuration as run
/// * `diagnostics.csv`: `step,t` and the model's diagnostics every
///   `diagnostics_stride` steps
/// * `snapshots/snapshot_{step:06}.csv`: node values every
///   `snapshot_stride` steps and at the last step
/// * `checkpoint.json`: the last state reached
/// * `summary.json`: the returned [`RunSummary`]
///
/// If a step fails the last good state is still checkpointed, an error
/// comment is appended to the diagnostics and the error is returned.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let sim = Simulation::new(config.clone())?;
    let start = Checkpoint::new(0, sim.initial_state()?);
    execute(&sim, start, false)
}

/// Continues a run from a checkpoint written by [`run`], appending to the
/// existing diagnostics.
pub fn run_from(config: &RunConfig, checkpoint: Checkpoint) -> Result<RunSummary> {
    let sim = Simulation::new(config.clone())?;
    let probe = sim.initial_state()?;
    if std::mem::discriminant(&probe) != std::mem::discriminant(&checkpoint.state)
        || probe.grid() != checkpoint.state.grid()
    {
        return Err(Error::validation(
            "checkpoint",
            "state does not match the configured model and grid",
        ));
    }
    execute(&sim, checkpoint, true)
}

/// [`run_from`] with the checkpoint read from a JSON file.
pub fn resume(config: &RunConfig, checkpoint: &Path) -> Result<RunSummary> {
    run_from(config, read_checkpoint(checkpoint)?)
}

fn execute(sim: &Simulation, start: Checkpoint, append: bool) -> Result<RunSummary> {
    let cfg = sim.config();
    let n_steps = cfg.n_steps()?;
    let out = &cfg.output.directory;
    let snap_dir = out.join("snapshots");
    create_dir(&snap_dir)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml()?).map_err(|e| Error::io(out.join("config.toml"), e))?;

    let labels = sim.labels();
    let names = sim.diagnostic_names();
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    let mut diag = CsvSink::open(&out.join("diagnostics.csv"), &header, append)?;
    if start.step == 0 {
        write_snapshot(&snap_dir, 0, &start.state, &labels)?;
    }

    let clock = Instant::now();
    let mut max_residuals = BTreeMap::new();
    let (mut it_total, mut it_max) = (0usize, 0usize);
    let outcome = integrate(sim, start, n_steps, true, |k, state, rec| {
        let rec = rec.expect("diagnostics requested");
        for (name, &v) in &rec.entries {
            if !NOT_RESIDUALS.contains(&name.as_str()) {
                let m = max_residuals.entry(name.clone()).or_insert(0.0f64);
                *m = m.max(v.abs());
            }
        }
        let its = rec.get("newton_iterations").unwrap_or(0.0) as usize;
        it_total += its;
        it_max = it_max.max(its);
        if k % cfg.output.diagnostics_stride == 0 || k == n_steps {
            let row = [k.to_string(), fmt_f64(state.t())]
                .into_iter()
                .chain(names.iter().map(|n| rec.get(n).map(fmt_f64).unwrap_or_default()));
            diag.record(row)?;
        }
        if k % cfg.output.snapshot_stride == 0 || k == n_steps {
            write_snapshot(&snap_dir, k, state, &labels)?;
        }
        Ok(())
    });

    let last = outcome.last;
    write_json(&out.join("checkpoint.json"), &last)?;
    if let Some(e) = &outcome.error {
        diag.comment(&format!("error: {e}"))?;
    }
    diag.finish()?;
    let summary = RunSummary {
        model: cfg.model.name().to_string(),
        scheme: cfg.scheme.name().to_string(),
        steps_completed: last.step,
        steps_requested: n_steps,
        t_final: last.state.t(),
        status: if outcome.error.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Completed
        },
        error: outcome.error.as_ref().map(|e| e.to_string()),
        max_residuals,
        newton_iterations_total: it_total,
        newton_iterations_max: it_max,
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}
