//! Run configuration: command-line flags over an optional TOML file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Little-endian `f64` rows (trace output only).
    Bin,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Target accuracy of the limit constants; also the per-step tolerance for `integrate`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Truncation point of the profile; chosen from the tolerance when absent.
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
    /// Blow-up time.
    #[arg(long = "T")]
    pub t_blow: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on right-hand-side evaluations per integration.
    #[arg(long)]
    pub budget: Option<f64>,
    /// TOML file supplying any of the keys above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a configuration file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub x_max: Option<f64>,
    #[serde(rename = "T")]
    pub t_blow: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub budget: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))
    }
}

/// Per-subcommand defaults.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub c: f64,
    pub alpha: f64,
    pub format: Format,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0;

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub c: f64,
    pub alpha: f64,
    pub tol: f64,
    /// `None` selects the truncation point automatically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(rename = "T")]
    pub t_blow: f64,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub budget: f64,
}

impl RunConfig {
    pub fn resolve(
        subcommand: &str,
        args: &CommonArgs,
        defaults: Defaults,
    ) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let cfg = Self {
            subcommand: subcommand.to_string(),
            c: args.c.or(file.c).unwrap_or(defaults.c),
            alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
            tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            x_max: args.x_max.or(file.x_max),
            t_blow: args.t_blow.or(file.t_blow).unwrap_or(0.0),
            format: args.format.or(file.format).unwrap_or(defaults.format),
            output: args.output.clone().or(file.output),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            budget: args
                .budget
                .or(file.budget)
                .unwrap_or(llg_shrinker::frame::DEFAULT_BUDGET),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CliError::Usage(format!(
                "alpha must be in (0,1], got {}",
                self.alpha
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(CliError::Usage(format!(
                "c must be positive and finite, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Usage(format!(
                "tol must be in (0,1), got {}",
                self.tol
            )));
        }
        if let Some(x) = self.x_max {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::Usage(format!("x-max must be positive, got {x}")));
            }
        }
        if !self.t_blow.is_finite() {
            return Err(CliError::Usage("T must be finite".into()));
        }
        // TOML integers are signed 64-bit.
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Usage(format!(
                "seed must be at most {}, got {}",
                i64::MAX,
                self.seed
            )));
        }
        if !(self.budget > 0.0) {
            return Err(CliError::Usage(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<llg_shrinker::Params, CliError> {
        llg_shrinker::Params::new(self.c, self.alpha).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("RunConfig serializes to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid run config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            c: 0.5,
            alpha: 0.5,
            format: Format::Json,
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "c = 2.0\nalpha = 0.8\nseed = 9\n").unwrap();
        let args = CommonArgs {
            c: Some(3.0),
            config: Some(path),
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve("constants", &args, defaults()).unwrap();
        assert_eq!(cfg.c, 3.0);
        assert_eq!(cfg.alpha, 0.8);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.tol, DEFAULT_TOL);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "gamma = 1\n").unwrap();
        let args = CommonArgs {
            config: Some(path),
            ..CommonArgs::default()
        };
        assert!(matches!(
            RunConfig::resolve("constants", &args, defaults()),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn alpha_outside_unit_interval_is_a_usage_error() {
        let args = CommonArgs {
            alpha: Some(0.0),
            ..CommonArgs::default()
        };
        match RunConfig::resolve("integrate", &args, defaults()) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("alpha must be in (0,1]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn format_strategy() -> impl proptest::strategy::Strategy<Value = Format> {
        proptest::prop_oneof![
            proptest::strategy::Just(Format::Csv),
            proptest::strategy::Just(Format::Json),
            proptest::strategy::Just(Format::Bin),
        ]
    }

    proptest::proptest! {
        #[test]
        fn run_config_round_trips(
            c in 1e-6f64..100.0,
            alpha in 1e-3f64..=1.0,
            tol in 1e-14f64..1e-3,
            x_max in proptest::option::of(0.5f64..12.0),
            t_blow in -1e3f64..1e3,
            format in format_strategy(),
            output in proptest::option::of("[a-z]{1,8}\\.(csv|json)"),
            seed in 0..=i64::MAX as u64,
            budget in 1.0f64..1e12,
        ) {
            let cfg = RunConfig {
                subcommand: "verify".into(),
                c, alpha, tol, x_max, t_blow, format,
                output: output.map(PathBuf::from),
                seed, budget,
            };
            proptest::prop_assert_eq!(&RunConfig::from_toml(&cfg.to_toml()).unwrap(), &cfg);
            let json = serde_json::to_string(&cfg).unwrap();
            proptest::prop_assert_eq!(&serde_json::from_str::<RunConfig>(&json).unwrap(), &cfg);
        }
    }
}
