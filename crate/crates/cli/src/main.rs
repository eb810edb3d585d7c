use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraqhom_cli::{invoke, Command, Overrides};

#[derive(Parser)]
#[command(name = "fraqhom", version, about = "Riesz-fractional diffusion and homogenisation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random probe (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to FRAQHOM_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Validate the config and stop.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Args)]
struct WithConfig {
    /// TOML config; defaults are used when omitted.
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Sub {
    /// Fractional Dirichlet problem for one coefficient.
    Solve(WithConfig),
    /// Static homogenisation experiment over n.
    Homog(WithConfig),
    /// d_s and weak-* distances of the members to the limit.
    Metric(WithConfig),
    /// Heat homogenisation experiment.
    Heat(WithConfig),
    /// Schur map probes and membership check.
    Schur(WithConfig),
    /// Shifted kernel fields and their Gram matrix.
    Kernel(WithConfig),
    /// Ellipticity margins of the members.
    Validate(WithConfig),
    /// Fractional operator identity suite.
    OpsCheck(WithConfig),
    /// Runs the command named in the config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn threads(arg: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = arg {
        return Ok(Some(n));
    }
    match std::env::var("FRAQHOM_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("FRAQHOM_THREADS = {v:?} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, config, common) = match cli.command {
        Sub::Solve(w) => (Some(Command::Solve), w.config, w.common),
        Sub::Homog(w) => (Some(Command::Homog), w.config, w.common),
        Sub::Metric(w) => (Some(Command::Metric), w.config, w.common),
        Sub::Heat(w) => (Some(Command::Heat), w.config, w.common),
        Sub::Schur(w) => (Some(Command::Schur), w.config, w.common),
        Sub::Kernel(w) => (Some(Command::Kernel), w.config, w.common),
        Sub::Validate(w) => (Some(Command::Validate), w.config, w.common),
        Sub::OpsCheck(w) => (Some(Command::OpsCheck), w.config, w.common),
        Sub::Run { config, common } => (None, Some(config), common),
    };
    match threads(common.threads) {
        Ok(Some(0)) | Err(_) => {
            eprintln!("error: thread count must be a positive integer");
            return ExitCode::from(3);
        }
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
    }
    let ov = Overrides { out: common.out, seed: common.seed, dry_run: common.dry_run };
    match invoke(command, config.as_deref(), &ov) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
