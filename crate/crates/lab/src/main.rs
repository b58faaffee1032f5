use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blowup_lab::{presets, run_config, ExperimentConfig, LabError, LabResult};

/// Runs blow-up experiments and writes a result bundle.
///
/// Exit status: 0 when every assertion passes, 1 when an assertion fails or a
/// run errors, 2 when the configuration is invalid.
#[derive(Parser)]
#[command(name = "blowup-lab", version)]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset (`all` runs every preset).
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List preset names.
    PresetList,
    /// Critical-curve scans and iteration checks.
    Curves(Select),
    /// Eigenfunction checks.
    Eigen(Select),
    /// Weighted integral bounds.
    Lemma22(Select),
    /// Comparison ODE ε-sweeps.
    OdeSweep(Select),
    /// PDE ε-sweeps.
    PdeSweep(Select),
    /// Sampled Kato instances.
    Kato(Select),
    /// Structural checks of a metric profile.
    ValidateMetric(Select),
}

/// Picks the experiments of one kind from a config, a preset, or by default
/// from `all`.
#[derive(Args)]
struct Select {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> LabResult<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::config("--threads", e.to_string()))?;
    }
    let (cfg, out, default_name) = match cli.command {
        Command::PresetList => {
            for n in presets::names() {
                println!("{n}");
            }
            return Ok(0);
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            (cfg, out, "results".to_string())
        }
        Command::Preset { name, out } => (presets::preset(&name)?, out, name),
        Command::Curves(s) => select(s, "curves-scan")?,
        Command::Eigen(s) => select(s, "eigen-verify")?,
        Command::Lemma22(s) => select(s, "lemma22-verify")?,
        Command::OdeSweep(s) => select(s, "ode-sweep")?,
        Command::PdeSweep(s) => select(s, "pde-sweep")?,
        Command::Kato(s) => select(s, "kato-grid")?,
        Command::ValidateMetric(s) => select(s, "validate-metric")?,
    };
    let out = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("out/{default_name}")));
    let summary = run_config(&cfg, &out)?;
    print!("{}", summary.table());
    println!("bundle: {}", out.display());
    Ok(if summary.pass { 0 } else { 1 })
}

fn select(s: Select, kind: &str) -> LabResult<(ExperimentConfig, Option<PathBuf>, String)> {
    let (mut cfg, name) = match (&s.config, &s.preset) {
        (Some(path), _) => (ExperimentConfig::load(path)?, kind.to_string()),
        (None, Some(p)) => (presets::preset(p)?, p.clone()),
        (None, None) => (presets::preset("all")?, kind.to_string()),
    };
    cfg.experiments.retain(|e| e.kind() == kind);
    if cfg.experiments.is_empty() {
        return Err(LabError::config(
            "experiment",
            format!("no `{kind}` experiments selected"),
        ));
    }
    Ok((cfg, s.out, name))
}
