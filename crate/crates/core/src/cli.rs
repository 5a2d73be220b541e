//! Command-line runner: parse arguments, load a scenario, run suites and
//! report.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{self, ConfigError};
use crate::report::{CheckRow, SuiteReport};
use crate::suites::{Scenario, Suite, SuiteError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pulsrodon",
    version,
    about = "Elliptic vortex integration and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the reduced dynamics; trajectory CSV and invariant drift.
    Simulate(Common),
    /// Build the exact solution; trajectory, field snapshots and consistency checks.
    Exact(Common),
    /// Residuals of the governing field equations on a space-time grid.
    Residuals(Common),
    /// Lax pair compatibility and isospectrality.
    Lax(Common),
    /// Semi-axis system, its Hamiltonian and the irrotational pair.
    Ermakov(Common),
    /// Every suite enabled in the checks block.
    All(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `run.out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integration tolerance; overrides `run.tol`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Print nothing on success.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn parts(&self) -> (&Common, Option<Suite>) {
        match self {
            Command::Simulate(c) => (c, Some(Suite::Simulate)),
            Command::Exact(c) => (c, Some(Suite::Exact)),
            Command::Residuals(c) => (c, Some(Suite::Residuals)),
            Command::Lax(c) => (c, Some(Suite::Lax)),
            Command::Ermakov(c) => (c, Some(Suite::Ermakov)),
            Command::All(c) => (c, None),
        }
    }
}

fn load(common: &Common) -> Result<config::ScenarioConfig, ConfigError> {
    let mut cfg = config::load(&common.config)?;
    if let Some(tol) = common.tol {
        cfg.run.tol = tol;
        config::check(&cfg, &common.config)?;
    }
    Ok(cfg)
}

/// Run one parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (common, only) = cli.command.parts();
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| cfg.run.out_dir.clone());
    let scenario = match Scenario::prepare(cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let suites: Vec<Suite> = match only {
        Some(s) => vec![s],
        None => Suite::ALL
            .into_iter()
            .filter(|s| s.enabled(&scenario.cfg))
            .collect(),
    };
    run_suites(&scenario, &suites, &out, common.quiet, only.is_none())
}

/// Run suites concurrently, each writing its own files under `out`.
pub fn run_suites(
    scenario: &Scenario,
    suites: &[Suite],
    out: &Path,
    quiet: bool,
    summary: bool,
) -> i32 {
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    let results: Vec<Result<SuiteReport, SuiteError>> =
        suites.par_iter().map(|&s| scenario.run(s, out)).collect();

    let mut code = EXIT_OK;
    let mut rows: Vec<CheckRow> = Vec::new();
    for (suite, res) in suites.iter().zip(results) {
        match res {
            Ok(rep) => rows.extend(rep.rows),
            Err(e) => {
                eprintln!("error: suite {}: {e}", suite.name());
                code = code.max(e.exit_code());
            }
        }
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| r.fails_gate()).collect();
    if !failed.is_empty() {
        code = code.max(EXIT_CHECK_FAILED);
    }
    if summary {
        let mut rep = SuiteReport::new("all");
        rep.rows = rows.clone();
        let path = out.join("summary.json");
        if let Err(e) = rep.write_json(&path) {
            eprintln!("error: writing {}: {e}", path.display());
            code = code.max(EXIT_CONFIG);
        }
    }
    if !quiet {
        for r in &rows {
            println!("{}", r.summary_line());
        }
        let gated = rows.iter().filter(|r| r.gated).count();
        println!(
            "{} of {} gated checks passed, {} reported without gating",
            gated - failed.len(),
            gated,
            rows.len() - gated
        );
    }
    for r in &failed {
        eprintln!("check failed: {}", r.summary_line());
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name)
    }

    fn exit_of(args: &[&str]) -> i32 {
        let argv = std::iter::once("pulsrodon").chain(args.iter().copied());
        match Cli::try_parse_from(argv) {
            Ok(cli) => run(&cli),
            Err(e) => e.exit_code(),
        }
    }

    fn with_config(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
        let mut args = vec![
            sub,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ];
        args.extend_from_slice(extra);
        exit_of(&args)
    }

    fn write_variant(dir: &Path, from: &str, edit: impl Fn(String) -> String) -> PathBuf {
        let text = std::fs::read_to_string(config(from)).unwrap();
        let path = dir.join("variant.toml");
        std::fs::write(&path, edit(text)).unwrap();
        path
    }

    #[test]
    fn fixed_point_gives_constant_columns() {
        let dir = tempfile::tempdir().unwrap();
        let out = with_config("simulate", &config("fixed_point.toml"), dir.path(), &[]);
        assert_eq!(out, EXIT_OK);
        let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,rho0,b,b_s,b_n,g,g_n,g_s,g_r,psi,omega"
        );
        let rows: Vec<&str> = lines.map(|l| l.split_once(',').unwrap().1).collect();
        assert!(rows.len() >= 200);
        assert!(rows.iter().all(|r| *r == rows[0]));
    }

    #[test]
    fn missing_field_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_variant(dir.path(), "fixed_point.toml", |t| {
            t.replace("m = 4.0\n", "")
        });
        let out = with_config("simulate", &cfg, dir.path(), &[]);
        assert_eq!(out, EXIT_CONFIG);
        let msg = config::load(&cfg).unwrap_err().to_string();
        assert!(msg.contains("missing field `m`"), "{msg}");
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_variant(dir.path(), "fixed_point.toml", |t| {
            t.replace("alpha0 = -0.125", "alpha0 = 0.5")
        });
        let out = with_config("simulate", &cfg, dir.path(), &[]);
        assert_eq!(out, EXIT_CONFIG);

        let out = with_config(
            "simulate",
            &config("fixed_point.toml"),
            dir.path(),
            &["--tol", "1e-20"],
        );
        assert_eq!(out, EXIT_CONFIG);

        let out = with_config("exact", &config("fixed_point.toml"), dir.path(), &[]);
        assert_eq!(out, EXIT_CONFIG);

        let out = exit_of(&["simulate"]);
        assert_eq!(out, EXIT_CONFIG);
    }

    #[test]
    fn inconsistent_start_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_variant(dir.path(), "fixed_point.toml", |t| {
            t.replace("b = 0.0", "b = 0.3")
        });
        let out = with_config("simulate", &cfg, dir.path(), &[]);
        assert_eq!(out, EXIT_CONFIG);
    }

    #[test]
    fn loose_tolerance_fails_the_drift_gate() {
        let dir = tempfile::tempdir().unwrap();
        let out = with_config(
            "simulate",
            &config("demo_constrained.toml"),
            dir.path(),
            &["--tol", "1e-4"],
        );
        assert_eq!(out, EXIT_CHECK_FAILED);
        let report: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("simulate.json")).unwrap(),
        )
        .unwrap();
        let failing = report["rows"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["gated"] == true && r["pass"] == false)
            .count();
        assert!(failing > 0);
    }

    #[test]
    fn every_subcommand_writes_its_files() {
        let cfg = config("demo_constrained.toml");
        for (sub, files) in [
            ("simulate", &["trajectory.csv", "simulate.json"][..]),
            (
                "exact",
                &["exact_trajectory.csv", "field_snapshots.csv", "exact.json"][..],
            ),
            ("residuals", &["residuals.json"][..]),
            ("lax", &["lax.json"][..]),
            (
                "ermakov",
                &["semi_axes.csv", "irrotational.csv", "ermakov.json"][..],
            ),
        ] {
            let dir = tempfile::tempdir().unwrap();
            let out = with_config(sub, &cfg, dir.path(), &[]);
            assert_eq!(out, EXIT_OK, "{sub}");
            for f in files {
                assert!(dir.path().join(f).is_file(), "{sub}: {f}");
            }
            assert!(!dir.path().join("summary.json").exists());
        }
    }

    #[test]
    fn report_rows_carry_tags() {
        let dir = tempfile::tempdir().unwrap();
        let out = with_config("all", &config("demo_constrained.toml"), dir.path(), &[]);
        assert_eq!(out, EXIT_OK);
        let report: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        let rows = report["rows"].as_array().unwrap();
        assert!(rows.len() > 40);
        for r in rows {
            assert!(!r["tag"].as_str().unwrap().is_empty());
        }
    }
}
