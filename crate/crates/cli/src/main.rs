//! `ltd`: runs the local-time decoherence scenarios, regenerates the
//! reference tables and runs the randomized oracle suite.
//!
//! Exit status: 0 success, 2 parameter error, 3 numerical or resolution
//! error, 4 unwritable output, 5 failed reference or oracle check.

mod error;
mod output;
mod scenarios;
mod settings;

use clap::{Args, Parser, Subcommand};
use error::CliError;
use ltd_core::localtime::ExponentForm;
use ltd_core::models::{paper_tables, TableOptions};
use ltd_core::validation::{validate, ValidationConfig};
use settings::{Format, Settings};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ltd", version, about = "Local-time-averaged states and decoherence diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run(RunArgs),
    /// Recompute every published figure and compare.
    PaperTables(TablesArgs),
    /// Compare the closed-form state with direct quadrature on random systems.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any of the run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct TablesArgs {
    /// Directory receiving one file per scenario.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Replace every published precision `λ`.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Largest Hilbert-space dimension drawn.
    #[arg(long, default_value_t = 16)]
    dim_max: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature nodes inside the readout window.
    #[arg(long, default_value_t = 1024)]
    nodes: usize,
    /// Check the closed forms with the unsquared level difference instead.
    #[arg(long)]
    unsquared: bool,
    /// Also write the full per-trial report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("LTD_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Parameter(format!("LTD_THREADS must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Parameter(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let settings = Settings::default().overlaid(&file).overlaid(&args.settings);
    let report = scenarios::run_scenario(&settings)?;
    let text = match settings.format() {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    output::emit(settings.out.as_deref(), &text)
}

fn tables(args: TablesArgs) -> Result<(), CliError> {
    if !args.out.is_dir() {
        return Err(CliError::Unwritable(format!("{} is not a directory", args.out.display())));
    }
    let tables = paper_tables(&TableOptions { lambda: args.lambda })?;
    let mut offenders = Vec::new();
    for t in &tables {
        let text = match args.format {
            Format::Json => t.to_json()?,
            Format::Csv => t.to_csv()?,
        };
        let path = args.out.join(format!("{}.{}", t.scenario, args.format.extension()));
        output::write_atomic(&path, &text)?;
        let failing: Vec<_> = t.failures().collect();
        println!("{}: {} rows, {} failing -> {}", t.scenario, t.rows.len(), failing.len(), path.display());
        for r in failing {
            offenders.push(format!(
                "{}.{} = {} (published {}, deviation {:.3e})",
                t.scenario, r.label, r.value, r.paper_value, r.deviation
            ));
        }
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("rows outside tolerance:\n  {}", offenders.join("\n  "))))
    }
}

fn run_validation(args: ValidateArgs) -> Result<(), CliError> {
    let cfg = ValidationConfig {
        dim_max: args.dim_max,
        trials: args.trials,
        seed: args.seed,
        nodes: args.nodes,
        form: if args.unsquared {
            ExponentForm::LiteralUnsquared
        } else {
            ExponentForm::Squared
        },
        ..Default::default()
    };
    let report = validate(&cfg)?;
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Numerical(format!("serialising report: {e}")))?;
        output::write_atomic(path, &text)?;
    }
    let worst = |f: fn(&ltd_core::validation::TrialOutcome) -> f64| {
        report.outcomes.iter().map(f).fold(0.0, f64::max)
    };
    println!(
        "{} trials (seed {}): max sigma error {:.3e}, purity error {:.3e}, energy error {:.3e}",
        report.outcomes.len(),
        args.seed,
        worst(|o| o.sigma_error),
        worst(|o| o.purity_error),
        worst(|o| o.energy_error)
    );
    let failed: Vec<String> = report
        .failures()
        .map(|o| format!("trial {} (seed {}, dim {})", o.trial, o.seed, o.dim))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{} of {} trials failed; replay with the same seed: {}",
            failed.len(),
            report.outcomes.len(),
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Run(a) => run(a),
        Command::PaperTables(a) => tables(a),
        Command::Validate(a) => run_validation(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ltd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
