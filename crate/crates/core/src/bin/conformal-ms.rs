use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conformal_ms::harness::{
    convergence_study, emit_figures_data, parse_config, preset, resume, run, RunConfig, RunSummary, PRESET_NAMES,
};
use conformal_ms::{Error, Result};

#[derive(Parser)]
#[command(
    version,
    about = "Exponential integrators for damped and driven multi-symplectic PDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; overrides the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Final time; overrides the configured or preset horizon.
    #[arg(long, global = true)]
    t_end: Option<f64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint.json written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a named experiment.
    Preset {
        name: String,
        /// Print the expanded configuration as TOML instead of running.
        #[arg(long)]
        print_config: bool,
    },
    /// Temporal convergence study of a configuration.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Write surface and residual series for presets (all when none given).
    Figures { names: Vec<String> },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

fn apply_overrides(mut cfg: RunConfig, cli: &Cli) -> Result<RunConfig> {
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(t) = cli.t_end {
        cfg.t_end = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(s: &RunSummary, out: &Path) {
    println!(
        "{} / {}: {} of {} steps, t = {}, {:.2} s, Newton iterations {} (max {})",
        s.model,
        s.scheme,
        s.steps_completed,
        s.steps_requested,
        s.t_final,
        s.wall_seconds,
        s.newton_iterations_total,
        s.newton_iterations_max
    );
    for (name, v) in &s.max_residuals {
        println!("  max {name} = {v:e}");
    }
    println!("  output in {}", out.display());
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config, resume: from } => {
            let cfg = apply_overrides(load(config)?, cli)?;
            let summary = match from {
                Some(cp) => resume(&cfg, cp)?,
                None => run(&cfg)?,
            };
            if !cli.quiet {
                report(&summary, &cfg.output.directory);
            }
        }
        Command::Preset { name, print_config } => {
            let cfg = apply_overrides(preset(name)?, cli)?;
            if *print_config {
                print!("{}", cfg.to_toml()?);
                return Ok(());
            }
            let summary = run(&cfg)?;
            if !cli.quiet {
                report(&summary, &cfg.output.directory);
            }
        }
        Command::Converge { config, levels } => {
            let cfg = apply_overrides(load(config)?, cli)?;
            let table = convergence_study(&cfg, *levels)?;
            let csv = table.to_csv();
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out).map_err(|e| Error::Io {
                    path: out.clone(),
                    source: e,
                })?;
                let path = out.join("convergence.csv");
                std::fs::write(&path, &csv).map_err(|e| Error::Io { path, source: e })?;
            }
            if !cli.quiet {
                print!("{csv}");
            }
        }
        Command::Figures { names } => {
            let names: Vec<&str> = if names.is_empty() {
                PRESET_NAMES.to_vec()
            } else {
                names.iter().map(String::as_str).collect()
            };
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let files = emit_figures_data(&names, &out, cli.t_end)?;
            if !cli.quiet {
                for f in files {
                    println!("{}", f.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
