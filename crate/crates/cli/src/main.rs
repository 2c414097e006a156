use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use amplab_cli::{parse_setup, run_experiment, write_outputs, Experiment, ExperimentConfig, Format, Inputs};
use anyhow::{Context, Result};
use clap::{Args, Parser};

#[derive(Parser)]
#[command(name = "amplab", version, about = "Consistent-amplitude lattice experiments")]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Setup document (required by amplitude-eval).
    #[arg(long)]
    setup: Option<PathBuf>,
    /// Results file; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<bool> {
    let c = cli.common;
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    if c.out.is_some() {
        cfg.output = c.out;
    }
    let doc_text = match &c.setup {
        Some(path) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    let setup = match (&doc_text, &c.setup) {
        (Some(text), Some(path)) => Some(parse_setup(text).with_context(|| format!("in {}", path.display()))?),
        _ => None,
    };

    let report = run_experiment(cli.experiment, &cfg, Inputs { setup: setup.as_ref() })?;
    let out = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", cli.experiment.name(), cfg.format.extension())));
    let manifest = write_outputs(&report, &cfg, &out, doc_text.as_deref(), cli.experiment.uses_seed(&cfg))?;
    eprintln!("{}: wrote {} and {}", cli.experiment, out.display(), manifest.display());
    if !report.success {
        eprintln!(
            "{}: a checked property did not hold; see {}",
            cli.experiment,
            manifest.display()
        );
    }
    Ok(report.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
