use std::path::{Path, PathBuf};

use crate::error::Result;

use super::output::{create_dir, fmt_f64, CsvSink};
use super::presets::preset;
use super::sim::{integrate, Checkpoint, Simulation};

/// Runs each preset and writes two long-form files into `out`:
///
/// * `{name}_surface.csv`: `x,t,value` with `value` = `|ψ|` (NLS) or `u`
///   (Camassa-Holm), one block per `snapshot_stride` steps
/// * `{name}_residuals.csv`: `step,t` and the model's diagnostics every
///   `diagnostics_stride` steps; NLS files carry both the
///   `norm_law_residual_global` and `paper_norm_error` columns
///
/// `t_end` overrides the preset horizon. Returns the written paths.
pub fn emit_figures_data(names: &[&str], out: &Path, t_end: Option<f64>) -> Result<Vec<PathBuf>> {
    let configs = names
        .iter()
        .map(|&name| {
            let mut cfg = preset(name)?;
            if let Some(t) = t_end {
                cfg.t_end = t;
            }
            cfg.output.directory = out.join(name);
            cfg.validate()?;
            Ok((name, cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(out)?;
    let mut written = Vec::new();
    for (name, cfg) in configs {
        let sim = Simulation::new(cfg)?;
        let cfg = sim.config();
        let n_steps = cfg.n_steps()?;
        let surface_path = out.join(format!("{name}_surface.csv"));
        let residual_path = out.join(format!("{name}_residuals.csv"));
        let header = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mut surface = CsvSink::open(&surface_path, &header(&["x", "t", "value"]), false)?;
        let names = sim.diagnostic_names();
        let mut cols = vec!["step", "t"];
        cols.extend(&names);
        let mut residuals = CsvSink::open(&residual_path, &header(&cols), false)?;

        let grid = sim.grid();
        let s0 = sim.initial_state()?;
        for n in 0..grid.n_nodes {
            surface.record([grid.x(n), 0.0, s0.surface_value(n)].map(fmt_f64))?;
        }
        let outcome = integrate(&sim, Checkpoint::new(0, s0), n_steps, true, |k, state, rec| {
            if k % cfg.output.snapshot_stride == 0 || k == n_steps {
                for n in 0..grid.n_nodes {
                    surface.record([grid.x(n), state.t(), state.surface_value(n)].map(fmt_f64))?;
                }
            }
            if k % cfg.output.diagnostics_stride == 0 || k == n_steps {
                let rec = rec.expect("diagnostics requested");
                let row = [k.to_string(), fmt_f64(state.t())]
                    .into_iter()
                    .chain(names.iter().map(|n| rec.get(n).map(fmt_f64).unwrap_or_default()));
                residuals.record(row)?;
            }
            Ok(())
        });
        if let Some(e) = &outcome.error {
            residuals.comment(&format!("error: {e}"))?;
        }
        surface.finish()?;
        residuals.finish()?;
        if let Some(e) = outcome.error {
            return Err(e);
        }
        written.push(surface_path);
        written.push(residual_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn ch_surface_spans_the_periodic_cell() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_figures_data(&["ch_kink"], dir.path(), Some(0.002)).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(&files[0]).unwrap();
        let xs: Vec<f64> = text
            .lines()
            .skip(2)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        // Initial state plus the final step.
        assert_eq!(xs.len(), 2 * 90);
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, -std::f64::consts::PI);
        assert!(max < std::f64::consts::PI && max > 3.07);
    }

    #[test]
    fn unknown_preset_fails_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("figs");
        assert!(matches!(
            emit_figures_data(&["nope"], &out, None),
            Err(Error::Argument(_))
        ));
        assert!(!out.exists());
    }
}
