//! One module per subcommand; shared pipeline helpers live here.

use llg_shrinker::constants::{compute_constants, LimitConstants};
use llg_shrinker::frame::Trace;
use llg_shrinker::Params;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Command};

mod constants;
mod figures;
mod integrate;
mod scans;
mod verify;
mod weak;

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Integrate(a) => integrate::run(a),
        Command::Constants(a) => constants::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Figures(a) => figures::run(a),
        Command::ScanAngle(a) => scans::run_angle(a),
        Command::ScanContinuity(a) => scans::run_continuity(a),
        Command::WeakLimit(a) => weak::run(a),
    }
}

/// Integrated profile and its limit constants.
pub(crate) struct Pipeline {
    pub params: Params,
    pub trace: Trace,
    pub lc: LimitConstants,
}

pub(crate) fn pipeline(cfg: &RunConfig) -> Result<Pipeline, CliError> {
    let params = cfg.params()?;
    let (trace, lc) = compute_constants(&params, cfg.tol, cfg.x_max, cfg.budget)?;
    Ok(Pipeline { params, trace, lc })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub(crate) struct TraceSummary {
    pub x_max: f64,
    pub steps: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
    pub max_defect: f64,
    pub samples: usize,
}

impl TraceSummary {
    pub fn of(trace: &Trace) -> Self {
        Self {
            x_max: trace.x_max,
            steps: trace.stats.steps,
            rejected: trace.stats.rejected,
            rhs_evals: trace.stats.rhs_evals,
            max_defect: trace.stats.max_defect,
            samples: trace.samples.len(),
        }
    }
}

/// Reject formats a subcommand does not produce.
pub(crate) fn require_format(
    cfg: &RunConfig,
    allowed: &[crate::config::Format],
) -> Result<(), CliError> {
    if allowed.contains(&cfg.format) {
        Ok(())
    } else {
        let names: Vec<String> = allowed
            .iter()
            .map(|f| format!("{f:?}").to_lowercase())
            .collect();
        Err(CliError::Usage(format!(
            "{} writes {} output",
            cfg.subcommand,
            names.join(" or ")
        )))
    }
}
