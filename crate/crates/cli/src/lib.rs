//! Config-driven runner for the fraqhom laboratory.

pub mod commands;
pub mod config;
pub mod output;
pub mod plan;

use std::path::{Path, PathBuf};

pub use commands::RunError;
pub use config::{Command, Config};
pub use plan::Plan;

pub const DEFAULT_OUT: &str = "fraqhom-out";

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dry_run: bool,
}

/// Reads and validates a config. `None` means all defaults.
pub fn load_plan(command: Option<Command>, config: Option<&Path>, ov: &Overrides) -> Result<Plan, RunError> {
    let cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| RunError::Parse(format!("{}: {e}", p.display())))?;
            Config::parse(&text).map_err(RunError::Parse)?
        }
        None => Config::default(),
    };
    let mut plan = Plan::build(&cfg, command)?;
    if let Some(s) = ov.seed {
        plan.seed = s;
    }
    Ok(plan)
}

/// Validates, then (unless dry) runs and writes the outputs plus
/// `manifest.csv`. Returns the lines for standard output.
pub fn invoke(command: Option<Command>, config: Option<&Path>, ov: &Overrides) -> Result<Vec<String>, RunError> {
    let plan = load_plan(command, config, ov)?;
    if ov.dry_run {
        return Ok(vec![format!(
            "config valid: {} on a {}D grid with N = {}, {} cells in Ω; nothing solved",
            plan.command.name(),
            plan.grid.dim(),
            plan.grid.n(),
            plan.mask.count()
        )]);
    }
    let dir = ov.out.clone().or_else(|| plan.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut out = output::Output::create(&dir)?;
    let mut lines = commands::execute(&plan, &mut out)?;
    let files = out.finish()?;
    lines.push(format!("wrote {} files to {}", files.len() + 1, dir.display()));
    Ok(lines)
}
