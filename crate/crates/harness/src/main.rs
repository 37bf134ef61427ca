use std::path::PathBuf;
use std::process::ExitCode;

use braidsim::config::PathKindName;
use braidsim::sweep::Format;
use braidsim::validate::{Fault, ValidateOptions};
use braidsim::{pflip, readout, sweep, validate, Config, HarnessError, RunContext};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "braidsim", version, about = "Majorana braiding error sweeps, parity-flip protocol and readout")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; all available cores when omitted.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the configured path kind.
    #[arg(long, global = true, value_enum)]
    path: Option<PathArg>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Error norms of the four independent couplings over the sweep range.
    SweepDelta,
    /// Parity-flip probabilities after n braiding cycles.
    Pflip,
    /// Dispersive shifts and measurement error.
    Readout,
    /// Run the invariant suite; nonzero exit on any failure.
    Validate {
        /// Negative control: corrupt an internal identity before checking.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Circular,
    Square,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    U12Sign,
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let mut ctx = RunContext::new(config, cli.config.clone());
    ctx.seed = cli.seed;
    ctx.workers = match cli.workers {
        Some(0) => return Err(HarnessError::Config("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if let Some(p) = cli.path {
        ctx = ctx.with_path_kind(match p {
            PathArg::Circular => PathKindName::Circular,
            PathArg::Square => PathKindName::Square,
        });
    }
    match cli.command {
        Command::SweepDelta => {
            let format = match cli.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let out = sweep::run(&ctx, &cli.out, format)?;
            let failed = out.rows.iter().filter(|r| !r.converged).count();
            eprintln!("wrote {} ({} rows, {} not converged, {:.1} s)", out.path.display(), out.rows.len(), failed, out.wall_seconds);
        }
        Command::Pflip => {
            let (path, report) = pflip::run(&ctx, &cli.out)?;
            eprintln!("wrote {}", path.display());
            if let Err(e) = report.p_flip {
                return Err(HarnessError::Numeric(e));
            }
        }
        Command::Readout => {
            let (path, _) = readout::run(&ctx, &cli.out)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Validate { inject_fault } => {
            let options = ValidateOptions {
                fault: inject_fault.map(|FaultArg::U12Sign| Fault::U12Sign),
                out: Some(cli.out.clone()),
            };
            validate::run(&ctx, &options)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
