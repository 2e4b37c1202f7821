use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qlab::experiments::{catalog, ConfigOverrides, ExperimentConfig};

/// Quantum measurement statistics experiments, seed-reproducible, written
/// as CSV with a JSON sidecar.
#[derive(Parser, Debug)]
#[command(name = "qlab", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Experiment tag to run, or `list` for the catalog
    experiment: String,

    /// Flat JSON config file; flags given here override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    /// RNG seed (one seed drives the whole run)
    #[arg(long)]
    seed: Option<u64>,

    /// Number of samples, where the experiment draws any
    #[arg(long)]
    shots: Option<u64>,

    /// Primary CSV output path; the sidecar lands next to it as .json
    #[arg(long)]
    out: Option<PathBuf>,

    /// Experiment-specific key=value parameter, repeatable
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.experiment == "list" {
        let width = catalog().iter().map(|e| e.tag.len()).max().unwrap_or(0);
        for entry in catalog() {
            println!(
                "{:width$}  {:8}  {}",
                entry.tag,
                entry.reference,
                entry.summary
            );
        }
        return ExitCode::SUCCESS;
    }

    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> qlab::Result<()> {
    let mut overrides = ConfigOverrides {
        seed: cli.seed,
        shots: cli.shots,
        output: cli.out.clone(),
        params: Vec::new(),
    };
    for raw in &cli.params {
        let (key, value) = raw.split_once('=').ok_or_else(|| qlab::Error::Config {
            message: format!("--param '{raw}' is not of the form key=value"),
        })?;
        overrides.params.push((key.to_string(), value.to_string()));
    }

    let mut config = ExperimentConfig::new(&cli.experiment);
    config = match &cli.config {
        Some(path) => config.with_file(path, &overrides)?,
        None => {
            overrides.apply(&mut config);
            config
        }
    };

    let summary = qlab::experiments::run(&config)?;
    println!(
        "wrote {} ({} rows) and {}",
        summary.csv_path.display(),
        summary.rows,
        summary.sidecar_path.display()
    );
    Ok(())
}
