use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cliffield::witt::{Normalization, WittScheme};
use cliffield_cli::error::{CliError, EXIT_INPUT};
use cliffield_cli::report::Format;
use cliffield_cli::scenario::WittConfig;
use cliffield_cli::Flags;

#[derive(Parser)]
#[command(name = "cliffield", version, about = "Clifford-algebra quantization kernels: scenarios and conformance checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every randomized check.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run independent scenarios concurrently.
    #[arg(long)]
    parallel: bool,
    /// Multiply every floating tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Output format for stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

impl Common {
    fn flags(&self, out: Option<PathBuf>) -> Flags {
        Flags { out, seed: self.seed, parallel: self.parallel, tolerance_scale: self.tolerance_scale, format: self.format }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files (or bundled scenario names).
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Directory for reports and artifacts.
        #[arg(long, default_value = "cliffield-out")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the registered invariants matching FILTER (module or check name); all when omitted.
    Check {
        filter: Option<String>,
        /// Also write reports to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// List bundled scenarios.
    List,
    /// Describe a bundled scenario.
    Describe { name: Option<String> },
    /// Emit gamma matrices of one minimal left ideal.
    Spinor {
        /// Signature as p,q.
        #[arg(long)]
        sig: String,
        #[arg(long, default_value = "doubled")]
        scheme: WittScheme,
        /// One flag per Witt slot: b/0 barred, u/1 unbarred. All barred by default.
        #[arg(long)]
        vacuum: Option<String>,
        #[arg(long, value_parser = parse_norm, default_value = "unit")]
        normalization: Normalization,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Grassmann-function utilities.
    Grassmann {
        #[command(subcommand)]
        action: GrassmannAction,
    },
    /// Quadratic-Hamiltonian flows.
    Dynamics {
        #[command(subcommand)]
        action: DynamicsAction,
    },
}

#[derive(Subcommand)]
enum GrassmannAction {
    /// Print the 2^n components of a Grassmann function in graded-lex order.
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum DynamicsAction {
    /// Run one dynamics scenario.
    Run {
        config: String,
        /// Report file; artifacts go to its directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_norm(s: &str) -> Result<Normalization, String> {
    match s {
        "unit" => Ok(Normalization::Unit),
        "raw" => Ok(Normalization::Raw),
        other => Err(format!("unknown normalization '{other}' (unit or raw)")),
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Run { configs, out, common } => cliffield_cli::cmd_run(&configs, &common.flags(Some(out)), &mut stdout),
        Command::Check { filter, out, common } => cliffield_cli::cmd_check(filter.as_deref().unwrap_or(""), &common.flags(out), &mut stdout),
        Command::List => cliffield_cli::cmd_list(&mut stdout),
        Command::Describe { name } => cliffield_cli::cmd_describe(name.as_deref(), &mut stdout),
        Command::Spinor { sig, scheme, vacuum, normalization, emit, common } => {
            let cfg = WittConfig { signature: cliffield_cli::parse_signature(&sig)?, scheme, vacuum, normalization, pairs: 0 };
            cliffield_cli::cmd_spinor(cfg, emit.as_deref(), &common.flags(None), &mut stdout)
        }
        Command::Grassmann { action: GrassmannAction::Expand { input, format } } => cliffield_cli::cmd_grassmann_expand(&input, format, &mut stdout),
        Command::Dynamics { action: DynamicsAction::Run { config, out, common } } => {
            cliffield_cli::cmd_dynamics_run(&config, out.as_deref(), &common.flags(None), &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
