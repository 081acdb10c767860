use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ness_cli::commands::{cmd_gradcheck, cmd_oracle, cmd_shadowbench, cmd_solve, cmd_sweep};
use ness_cli::config::ModeKind;
use ness_cli::{CliError, RunConfig};
use ness_core::lindblad::Convention;

#[derive(Parser)]
#[command(name = "ness", version, about = "Variational steady states of Lindblad dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the ansatz once and compare with the exact steady state.
    Solve(Common),
    /// Solve over a grid of one model parameter and write a CSV table.
    Sweep(Common),
    /// Exact steady state from the null space of the generator.
    Oracle(Common),
    /// Check analytic gradients against finite differences.
    Gradcheck(Common),
    /// Bias, variance scaling and distillation of the shadow estimators.
    Shadowbench(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Shadow,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Standard,
    Paper,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Record wall-clock times in the output.
    #[arg(long)]
    timing: bool,
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.clone());
        }
        if let Some(m) = self.mode {
            cfg.cost.mode = match m {
                ModeArg::Exact => ModeKind::Exact,
                ModeArg::Shadow => ModeKind::Shadow,
            };
        }
        if let Some(c) = self.convention {
            cfg.model.convention = match c {
                ConventionArg::Standard => Convention::StandardGksl,
                ConventionArg::Paper => Convention::PaperLiteral,
            };
        }
        cfg.output.timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

type Runner = fn(&RunConfig) -> Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Solve(c) => (c, |cfg| cmd_solve(cfg).map(drop)),
        Command::Sweep(c) => (c, |cfg| cmd_sweep(cfg).map(drop)),
        Command::Oracle(c) => (c, |cfg| cmd_oracle(cfg).map(drop)),
        Command::Gradcheck(c) => (c, |cfg| cmd_gradcheck(cfg).map(drop)),
        Command::Shadowbench(c) => (c, |cfg| cmd_shadowbench(cfg).map(drop)),
    };
    let level = match common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match common.resolve().and_then(|cfg| run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
