//! Scenario files: a TOML document with a versioned key schema.
//!
//! ```toml
//! schema_version = 1
//!
//! [params]            # every field of `Params`
//! [initial.state]     # a raw `DynState` ...
//! [initial.exact]     # ... or the constants of an exact solution (not both)
//! [initial.translation]
//! [run]               # t_end, tol, samples, lambdas, tau_points, out_dir
//! [run.grid]          # nx, ny, nt, scale, random_points
//! [irrotational]      # optional start of the irrotational pair
//! [checks]            # one boolean per suite
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::dynsys::{DEFAULT_SAMPLES, TOL_RANGE};
use crate::ermakov::IrrotState;
use crate::exact::{ExactSpec, TranslationInit};
use crate::fields::GridSpec;
use crate::model::{validate_params, DynState, Params};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub params: Params,
    pub initial: InitialConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub irrotational: IrrotationalConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub state: Option<DynState>,
    pub exact: Option<ExactConstants>,
    #[serde(default)]
    pub translation: TranslationInit,
}

/// Constants of an exact solution as written in a scenario file; the
/// translation comes from `[initial.translation]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConstants {
    pub c0: f64,
    pub c_i: f64,
    pub c_ii: f64,
    pub c_iii: f64,
    pub delta: f64,
    pub c_iv_sign: f64,
    pub omega_dot_sign: f64,
    #[serde(default)]
    pub phi0: f64,
}

/// Where the run starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    State(DynState),
    Exact(ExactSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_end: f64,
    pub tol: f64,
    /// Uniform output and drift samples.
    pub samples: usize,
    pub lambdas: Vec<f64>,
    pub tau_points: usize,
    pub out_dir: PathBuf,
    pub grid: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            tol: 1e-10,
            samples: DEFAULT_SAMPLES,
            lambdas: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            tau_points: 1000,
            out_dir: PathBuf::from("out"),
            grid: GridSpec::default(),
        }
    }
}

/// Start and constants of the standalone irrotational pair.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrrotationalConfig {
    pub alpha_axis: f64,
    pub beta_axis: f64,
    pub d_alpha_axis: f64,
    pub d_beta_axis: f64,
    pub c_i: f64,
    pub c_ii: f64,
    pub c_iii: f64,
    pub t_end: f64,
    pub tol: f64,
}

impl Default for IrrotationalConfig {
    fn default() -> Self {
        Self {
            alpha_axis: 1.2,
            beta_axis: 0.8,
            d_alpha_axis: 0.1,
            d_beta_axis: -0.3,
            c_i: -0.4,
            c_ii: -0.9,
            c_iii: 1.0,
            t_end: 10.0,
            tol: 1e-11,
        }
    }
}

impl IrrotationalConfig {
    pub fn start(&self) -> IrrotState {
        IrrotState {
            alpha_axis: self.alpha_axis,
            beta_axis: self.beta_axis,
            d_alpha_axis: self.d_alpha_axis,
            d_beta_axis: self.d_beta_axis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub simulate: bool,
    pub exact: bool,
    pub residuals: bool,
    pub lax: bool,
    pub ermakov: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            simulate: true,
            exact: true,
            residuals: true,
            lax: true,
            ermakov: true,
        }
    }
}

impl ScenarioConfig {
    pub fn initial(&self) -> Initial {
        match (&self.initial.state, &self.initial.exact) {
            (Some(s), _) => Initial::State(*s),
            (None, Some(e)) => Initial::Exact(ExactSpec {
                c0: e.c0,
                c_i: e.c_i,
                c_ii: e.c_ii,
                c_iii: e.c_iii,
                delta: e.delta,
                c_iv_sign: e.c_iv_sign,
                omega_dot_sign: e.omega_dot_sign,
                phi0: e.phi0,
                translation: self.initial.translation,
            }),
            (None, None) => unreachable!("validated"),
        }
    }
}

/// Read, parse and validate a scenario file.
pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    check(&cfg, path)?;
    Ok(cfg)
}

/// Validate a scenario after any overrides.
pub fn check(cfg: &ScenarioConfig, path: &Path) -> Result<(), ConfigError> {
    validate(cfg).map_err(|(field, message)| ConfigError::Invalid {
        path: path.to_path_buf(),
        field,
        message,
    })
}

fn validate(cfg: &ScenarioConfig) -> Result<(), (String, String)> {
    let bad = |field: &str, message: String| Err((field.to_string(), message));
    if cfg.schema_version != SCHEMA_VERSION {
        return bad(
            "schema_version",
            format!("expected {SCHEMA_VERSION}, found {}", cfg.schema_version),
        );
    }
    if let Err(e) = validate_params(&cfg.params) {
        return bad("params", e.to_string());
    }
    match (&cfg.initial.state, &cfg.initial.exact) {
        (Some(_), Some(_)) => {
            return bad(
                "initial",
                "give exactly one of [initial.state] and [initial.exact], not both".into(),
            )
        }
        (None, None) => {
            return bad(
                "initial",
                "missing: give [initial.state] or [initial.exact]".into(),
            )
        }
        _ => {}
    }
    let run = &cfg.run;
    if !(run.t_end.is_finite() && run.t_end > 0.0) {
        return bad("run.t_end", format!("must be positive, got {}", run.t_end));
    }
    for (field, tol) in [
        ("run.tol", run.tol),
        ("irrotational.tol", cfg.irrotational.tol),
    ] {
        if !(tol >= TOL_RANGE.0 && tol <= TOL_RANGE.1) {
            return bad(
                field,
                format!("{tol} outside [{:e}, {:e}]", TOL_RANGE.0, TOL_RANGE.1),
            );
        }
    }
    if run.samples < 2 {
        return bad("run.samples", "need at least 2".into());
    }
    if run.lambdas.is_empty() || run.lambdas.iter().any(|l| !l.is_finite()) {
        return bad(
            "run.lambdas",
            "need a non-empty list of finite values".into(),
        );
    }
    if run.tau_points < 8 {
        return bad("run.tau_points", "need at least 8".into());
    }
    let g = &run.grid;
    if g.nx == 0 || g.ny == 0 || g.nt == 0 {
        return bad("run.grid", "nx, ny and nt must be positive".into());
    }
    if !(g.scale > 0.0 && g.scale < 1.0) {
        return bad(
            "run.grid.scale",
            format!("must lie in (0, 1), got {}", g.scale),
        );
    }
    let ir = &cfg.irrotational;
    if !(ir.alpha_axis > 0.0 && ir.beta_axis > 0.0) {
        return bad("irrotational", "axes must be positive".into());
    }
    if !(ir.t_end.is_finite() && ir.t_end > 0.0) {
        return bad(
            "irrotational.t_end",
            format!("must be positive, got {}", ir.t_end),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[params]
m = 4.0
f = 1.0
mu = 1.0
lambda_t = 0.5
alpha = 1.0
alpha0 = -0.125
alpha1 = 0.0
alpha2 = 0.75
nu = 1.0
branch = "constrained"
[initial.state]
rho0 = 1.0
b = 0.0
b_s = 0.0
b_n = 0.0
g = 0.0
g_n = 0.0
g_s = 0.0
g_r = 0.0
psi = 1.0
omega = 1.0
"#;

    fn p() -> &'static Path {
        Path::new("test.toml")
    }

    #[test]
    fn minimal_parses_with_defaults() {
        let cfg = parse(MINIMAL, p()).unwrap();
        assert_eq!(cfg.run, RunConfig::default());
        assert!(matches!(cfg.initial(), Initial::State(_)));
    }

    #[test]
    fn missing_param_names_the_field() {
        let text = MINIMAL.replace("m = 4.0\n", "");
        let msg = parse(&text, p()).unwrap_err().to_string();
        assert!(msg.contains("missing field `m`"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("[initial.state]", "[initial.state]\nextra = 1.0");
        let msg = parse(&text, p()).unwrap_err().to_string();
        assert!(msg.contains("extra"), "{msg}");
    }

    #[test]
    fn both_initial_blocks_rejected() {
        let text = format!(
            "{MINIMAL}[initial.exact]\nc0 = 0.6\nc_i = 1.0\nc_ii = -0.0125\nc_iii = 1.2\ndelta = -0.5\nc_iv_sign = -1.0\nomega_dot_sign = 1.0\n"
        );
        let err = parse(&text, p()).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "initial"));
    }

    #[test]
    fn bad_schema_and_tolerance() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(
            parse(&text, p()).unwrap_err(),
            ConfigError::Invalid { ref field, .. } if field == "schema_version"
        ));
        let text = format!("{MINIMAL}[run]\ntol = 1e-20\n");
        assert!(matches!(
            parse(&text, p()).unwrap_err(),
            ConfigError::Invalid { ref field, .. } if field == "run.tol"
        ));
    }

    #[test]
    fn invalid_params_reported() {
        let text = MINIMAL.replace("alpha0 = -0.125", "alpha0 = 0.3");
        assert!(matches!(
            parse(&text, p()).unwrap_err(),
            ConfigError::Invalid { ref field, .. } if field == "params"
        ));
    }
}
