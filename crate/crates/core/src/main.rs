use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rsma_sim::mc::TrialPlan;
use rsma_sim::runner::{self, Format, SystemConfig};
use rsma_sim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rsma-sim",
    version,
    about = "Dual-polarized MIMO-RSMA simulator and closed-form analytics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a preset or a config file and write the result table.
    Run(RunArgs),
    /// Check a config (or a preset with overrides) without running it.
    Validate(Source),
    /// List the built-in presets.
    ListPresets,
}

#[derive(Args)]
struct Source {
    /// JSON config file, or inline JSON starting with '{'.
    #[arg(long, conflicts_with = "preset")]
    config: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    /// key=value, value parsed as JSON (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Trials for both outage and ergodic estimates.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to RSMA_SIM_WORKERS or the core count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

fn resolve(src: &Source) -> Result<SystemConfig> {
    let base = match (&src.config, &src.preset) {
        (Some(c), None) => runner::load_config(c)?,
        (None, Some(p)) => runner::preset_config(p)?,
        (None, None) => SystemConfig::default(),
        (Some(_), Some(_)) => return Err(Error::Config("give either --config or --preset".into())),
    };
    let cfg = runner::apply_overrides(&base, &src.overrides)?;
    runner::check(&cfg)?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = resolve(&args.source)?;
    if let Some(t) = args.trials {
        cfg.trials_outage = t;
        cfg.trials_ergodic = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let format: Format = args.format.parse()?;
    let workers = args.workers.unwrap_or_else(TrialPlan::default_workers);
    let rows = runner::run_config(&cfg, workers)?;
    match &args.out {
        Some(path) => runner::emit_results(&rows, &cfg, format, path),
        None => {
            let text = match format {
                Format::Csv => runner::to_csv_string(&rows, &cfg)?,
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
            };
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Validate(s) => resolve(s).map(|_| println!("ok")),
        Cmd::ListPresets => {
            for p in runner::PRESETS {
                println!("{p:<24} {}", runner::describe(p).unwrap_or(""));
            }
            Ok(())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
