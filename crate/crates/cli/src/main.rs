//! `definetti`: certify the exponential de Finetti bound on small symmetric
//! states and check the supporting inequalities.

mod commands;
mod config;
mod error;
mod report;
mod spec;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use definetti::certifier::DEFAULT_FALLBACK_TOL;

use commands::{Format, PropsConfig};
use error::{CliError, EXIT_USAGE};
use spec::{RuleSpec, RunConfig, StateSpec};

#[derive(Parser)]
#[command(name = "definetti", version, about = "Certify the exponential de Finetti bound at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one state for each listed r.
    Verify(RunArgs),
    /// Verify over the grid of listed k and r; rows sorted by (n, k, r).
    Sweep(RunArgs),
    /// Run the supporting inequality checks.
    CheckProps(PropsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local dimension.
    #[arg(long)]
    d: usize,
    /// Number of sites kept.
    #[arg(long)]
    n: usize,
    /// Number of sites traced out (a comma list for sweep).
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Hamming thresholds, comma separated (default 0..=n).
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// product | ghz | dicke:a,b,... | random-sym:SEED
    #[arg(long, default_value = "product")]
    state: StateSpec,
    /// exact:T | mc:N[:SEED] (default exact:16 for d = 2, mc:100000:0 otherwise)
    #[arg(long)]
    rule: Option<RuleSpec>,
    #[arg(long, default_value_t = DEFAULT_FALLBACK_TOL)]
    fallback_tol: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Lift the d^(n+k) <= 2^20 limit.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct PropsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    max_sym_n: usize,
    #[arg(long, default_value_t = 200)]
    gentle_pairs: usize,
    #[arg(long, default_value_t = 16)]
    gentle_max_dim: usize,
    #[arg(long, default_value_t = 50)]
    chernoff_max_n: usize,
    #[arg(long, default_value_t = 50)]
    sandwich_max: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            d: self.d,
            n: self.n,
            k_list: self.k.clone(),
            r_list: self.r.clone(),
            state: self.state.clone(),
            rule: self.rule,
            fallback_tol: self.fallback_tol,
            allow_large: self.allow_large,
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify(args) => {
            if args.k.len() != 1 {
                return Err(CliError::Usage("verify takes a single --k; use sweep for a list".into()));
            }
            let rows = commands::run_rows(&args.config())?;
            commands::emit(&rows, args.output.as_deref(), args.format)?;
            Ok(commands::status_exit_code(&rows))
        }
        Command::Sweep(args) => {
            let rows = commands::run_rows(&args.config())?;
            commands::emit(&rows, args.output.as_deref(), args.format)?;
            Ok(commands::status_exit_code(&rows))
        }
        Command::CheckProps(args) => {
            let cfg = PropsConfig {
                max_sym_n: args.max_sym_n,
                gentle_pairs: args.gentle_pairs,
                gentle_max_dim: args.gentle_max_dim,
                chernoff_max_n: args.chernoff_max_n,
                sandwich_max: args.sandwich_max,
                seed: args.seed,
            };
            commands::check_props(&cfg, &mut std::io::stdout().lock())
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
