use llg_shrinker::constants::{identity_suite, IdentityReport, LimitConstants};
use llg_shrinker::geometry::{build_geometry, CircleGeom};
use llg_shrinker::Params;
use serde::Serialize;

use super::{pipeline, require_format, TraceSummary};
use crate::config::{Defaults, Format, RunConfig};
use crate::output::{csv, emit, json, Cell};
use crate::{CliError, CommonOnly};

#[derive(Serialize)]
struct ConstantsReport<'a> {
    config: &'a RunConfig,
    params: Params,
    trace: TraceSummary,
    constants: &'a LimitConstants,
    geometry: Option<CircleGeom>,
    identities: &'a IdentityReport,
    pass: bool,
}

const CSV_HEADER: &str =
    "c,alpha,x_used,b1,b2,b3,rho1,rho2,rho3,phi1,phi2,phi3,err_est,degraded,angle_normals,angle_circles,identities_pass";

pub fn run(args: CommonOnly) -> Result<(), CliError> {
    let defaults = Defaults {
        c: 0.5,
        alpha: 0.5,
        format: Format::Json,
    };
    let cfg = RunConfig::resolve("constants", &args.common, defaults)?;
    require_format(&cfg, &[Format::Json, Format::Csv])?;
    let run = pipeline(&cfg)?;
    let lc = &run.lc;
    let identities = identity_suite(lc);
    // A norm defect large enough to break the geometry already fails the suite.
    let geometry = build_geometry(lc).ok();

    let bytes = match cfg.format {
        Format::Csv => {
            let mut row: Vec<Cell> = vec![cfg.c.into(), cfg.alpha.into(), lc.x_used.into()];
            row.extend(lc.b.iter().map(|&v| Cell::from(v)));
            row.extend(lc.rho.iter().map(|&v| Cell::from(v)));
            row.extend(lc.phi.iter().map(|&v| Cell::from(v)));
            row.push(lc.err_est.into());
            row.push(lc.degraded.into());
            row.push(geometry.map(|g| g.angle_normals).into());
            row.push(geometry.map(|g| g.angle_circles).into());
            row.push(identities.pass.into());
            csv(CSV_HEADER, [row])
        }
        _ => json(&ConstantsReport {
            config: &cfg,
            params: run.params,
            trace: TraceSummary::of(&run.trace),
            constants: lc,
            geometry,
            identities: &identities,
            pass: identities.pass,
        })?,
    };
    emit(cfg.output.as_deref(), &bytes)?;
    if identities.pass {
        Ok(())
    } else {
        let failing = identities
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        Err(CliError::Verification(failing))
    }
}
