use llg_shrinker::frame::{
    auto_x_max, initial_state, integrate_from, write_binary, write_csv, IntegratorOptions,
};

use super::require_format;
use crate::config::{Defaults, Format, RunConfig};
use crate::output::emit;
use crate::{CliError, IntegrateArgs};

pub fn run(args: IntegrateArgs) -> Result<(), CliError> {
    let defaults = Defaults {
        c: 0.5,
        alpha: 0.5,
        format: Format::Csv,
    };
    let cfg = RunConfig::resolve("integrate", &args.common, defaults)?;
    require_format(&cfg, &[Format::Csv, Format::Bin])?;
    if !(args.spacing > 0.0) {
        return Err(CliError::Usage(format!(
            "spacing must be positive, got {}",
            args.spacing
        )));
    }
    let p = cfg.params()?;
    let x_max = match cfg.x_max {
        Some(x) => x,
        None => auto_x_max(&p, cfg.tol, cfg.budget)?.0,
    };
    let opts = IntegratorOptions {
        tol: cfg.tol,
        budget: cfg.budget,
        reorthonormalize: true,
        ..IntegratorOptions::default()
    };
    let trace = integrate_from(&p, &initial_state(), x_max, &opts)?;

    let mut bytes = Vec::new();
    match cfg.format {
        Format::Bin => write_binary(&trace, args.spacing, &mut bytes)?,
        _ => write_csv(&trace, args.spacing, &mut bytes)?,
    }
    emit(cfg.output.as_deref(), &bytes)?;
    let s = &trace.stats;
    eprintln!(
        "x_max = {x_max}  steps = {}  rejected = {}  rhs_evals = {}  max_defect = {:.3e}",
        s.steps, s.rejected, s.rhs_evals, s.max_defect
    );
    Ok(())
}
