//! Verification suites run by the command line. Each suite writes its own
//! files and returns its check rows.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::{Initial, ScenarioConfig};
use crate::dynsys::{integrate, monitor_invariants, sample_times, StateHistory, Trajectory};
use crate::ermakov::{
    cstar_constants, embed_irrotational, ermakov_constant, ermakov_residuals, hamiltonian_claimed,
    hamiltonian_value, integrate_irrotational, irrotational_drift, irrotational_hamiltonian,
    power_law_residuals, ray_reid_invariant, semi_axes, IrrotConstants,
};
use crate::error::Error;
use crate::exact::{
    constrained_initial_state, rhs_consistency, solve_omega, ExactForm, ExactSolution, ExactSpec,
    TranslationInit,
};
use crate::fields::{
    grid_points, pde_residuals, reconstruct, seed_from_env, Corrupted, Window, GOVERNING,
};
use crate::lax::{lax_checks, LaxOptions};
use crate::model::{derive_constants, validate_params, Branch, DynState, IntegralSet, Params};
use crate::reduced::{
    integrate_modulated, omega_first_integral_residual, omega_first_integral_scale, to_modulated,
    FirstIntegralForm,
};
use crate::report::{write_csv, SuiteReport};

/// Tolerances of the gated checks.
pub mod tol {
    pub const INTEGRAL_DRIFT: f64 = 1e-7;
    pub const BALANCE_DRIFT: f64 = 1e-6;
    pub const REDUCTION: f64 = 1e-7;
    pub const RATE_CONSISTENCY: f64 = 1e-6;
    pub const PDE_CHAIN: f64 = 1e-6;
    pub const PDE_FD: f64 = 1e-4;
    pub const DIV_H: f64 = 1e-12;
    pub const FIRST_INTEGRAL: f64 = 1e-8;
    pub const CLOSED_FORM: f64 = 1e-7;
    pub const ERMAKOV: f64 = 1e-5;
    pub const HAMILTONIAN: f64 = 1e-7;
    pub const Z_MATCH: f64 = 1e-8;
    /// Limited by how well the integrated amplitude keeps its first integral.
    pub const Z_SQUARED: f64 = 1e-7;
    pub const AXES_MATCH: f64 = 1e-10;
    pub const RAY_REID: f64 = 1e-9;
    pub const EMBEDDING: f64 = 1e-7;
    pub const LAX: f64 = 1e-5;
    pub const DET_DRIFT: f64 = 1e-7;
    pub const SIGMA: f64 = 1e-4;
    pub const GAUGE: f64 = 1e-12;
    pub const CONTROL: f64 = 1e-2;
}

/// Shear shift applied by the negative controls.
pub const CONTROL_SHIFT: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{suite}: {source}")]
    Numerics { suite: &'static str, source: Error },
    #[error("{suite}: writing {path}: {source}")]
    Io {
        suite: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

impl SuiteError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            SuiteError::Numerics { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Simulate,
    Exact,
    Residuals,
    Lax,
    Ermakov,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Simulate,
        Suite::Exact,
        Suite::Residuals,
        Suite::Lax,
        Suite::Ermakov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Simulate => "simulate",
            Suite::Exact => "exact",
            Suite::Residuals => "residuals",
            Suite::Lax => "lax",
            Suite::Ermakov => "ermakov",
        }
    }

    pub fn enabled(self, cfg: &ScenarioConfig) -> bool {
        let c = &cfg.checks;
        match self {
            Suite::Simulate => c.simulate,
            Suite::Exact => c.exact,
            Suite::Residuals => c.residuals,
            Suite::Lax => c.lax,
            Suite::Ermakov => c.ermakov,
        }
    }
}

/// A validated scenario with its start state and constants.
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub params: Params,
    pub initial: Initial,
    pub start: DynState,
    pub ints: IntegralSet,
}

impl Scenario {
    /// Resolve the start state and check it against the branch relations.
    pub fn prepare(cfg: ScenarioConfig) -> Result<Self, SuiteError> {
        let params =
            *validate_params(&cfg.params).map_err(|e| SuiteError::Config(e.to_string()))?;
        let initial = cfg.initial();
        let start = match &initial {
            Initial::State(s) => *s,
            Initial::Exact(spec) => constrained_initial_state(spec, &params)
                .map_err(|e| SuiteError::Config(format!("initial.exact: {e}")))?,
        };
        let ints = derive_constants(&start, &params)
            .map_err(|e| SuiteError::Config(format!("initial state: {e}")))?;
        Ok(Self {
            cfg,
            params,
            initial,
            start,
            ints,
        })
    }

    fn translation(&self) -> TranslationInit {
        self.cfg.initial.translation
    }

    fn exact_spec(&self, suite: &'static str) -> Result<ExactSpec, SuiteError> {
        match self.initial {
            Initial::Exact(spec) => Ok(spec),
            Initial::State(_) => Err(SuiteError::Config(format!(
                "the {suite} suite needs [initial.exact]"
            ))),
        }
    }

    /// The exact solution when the scenario defines one, otherwise the
    /// integrated trajectory.
    fn history(&self, suite: &'static str) -> Result<Box<dyn StateHistory>, SuiteError> {
        let run = &self.cfg.run;
        let num = |source| SuiteError::Numerics { suite, source };
        Ok(match self.initial {
            Initial::Exact(spec) => {
                Box::new(ExactSolution::new(&spec, &self.params, run.t_end, run.tol).map_err(num)?)
            }
            Initial::State(s) => {
                Box::new(integrate(&s, &self.params, run.t_end, run.tol).map_err(num)?)
            }
        })
    }

    pub fn run(&self, suite: Suite, out: &Path) -> Result<SuiteReport, SuiteError> {
        match suite {
            Suite::Simulate => simulate(self, out),
            Suite::Exact => exact(self, out),
            Suite::Residuals => residuals(self, out),
            Suite::Lax => lax(self, out),
            Suite::Ermakov => ermakov(self, out),
        }
    }
}

struct Writer<'a> {
    suite: &'static str,
    dir: &'a Path,
}

impl Writer<'_> {
    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), SuiteError> {
        let path = self.dir.join(name);
        write_csv(&path, header, rows).map_err(|e| SuiteError::Io {
            suite: self.suite,
            path,
            source: e,
        })
    }

    fn report(&self, rep: &SuiteReport) -> Result<(), SuiteError> {
        let path = self.dir.join(format!("{}.json", self.suite));
        rep.write_json(&path).map_err(|source| SuiteError::Io {
            suite: self.suite,
            path,
            source,
        })
    }
}

fn numerics(suite: &'static str) -> impl Fn(Error) -> SuiteError {
    move |source| SuiteError::Numerics { suite, source }
}

fn state_header(first: &[&'static str], last: &[&'static str]) -> Vec<&'static str> {
    first
        .iter()
        .chain(DynState::FIELD_NAMES.iter())
        .chain(last.iter())
        .copied()
        .collect()
}

fn simulate(sc: &Scenario, out: &Path) -> Result<SuiteReport, SuiteError> {
    const SUITE: &str = "simulate";
    let num = numerics(SUITE);
    let w = Writer {
        suite: SUITE,
        dir: out,
    };
    let run = &sc.cfg.run;
    let p = &sc.params;
    let traj: Trajectory = integrate(&sc.start, p, run.t_end, run.tol).map_err(&num)?;
    let times = sample_times(traj.span(), run.samples);
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let s = traj.state(t).map_err(&num)?;
        rows.push(std::iter::once(t).chain(s.to_array()).collect());
    }
    w.csv("trajectory.csv", &state_header(&["t"], &[]), &rows)?;

    let mut rep = SuiteReport::new(SUITE);
    let drift = monitor_invariants(&traj, p, &sc.ints, run.samples).map_err(&num)?;
    for e in &drift.entries {
        let tol = if e.name.ends_with('*') {
            tol::BALANCE_DRIFT
        } else {
            tol::INTEGRAL_DRIFT
        };
        rep.row(&format!("drift_{}", e.name), e.tag, e.max_rel, tol, e.gated);
    }

    let ms0 = to_modulated(&sc.start, p).map_err(&num)?;
    let modulated = integrate_modulated(&ms0, p, &sc.ints, run.t_end, run.tol).map_err(&num)?;
    let mut gap = 0.0_f64;
    for &t in &times {
        let mapped = to_modulated(&traj.state(t).map_err(&num)?, p).map_err(&num)?;
        let direct = modulated.eval(t).ok_or(num(Error::OutOfSpan {
            t,
            t0: modulated.t_start(),
            t1: modulated.t_end(),
        }))?;
        gap = gap.max(mapped.max_abs_diff(&crate::reduced::ModulatedState::from_array(direct)));
    }
    rep.row(
        "reduction_equivalence",
        "full system mapped to amplitude-scaled variables against the modulated system",
        gap,
        tol::REDUCTION,
        true,
    );
    rep.detail("constants", &sc.ints);
    rep.detail("drift", &drift);
    rep.detail("accepted_steps", &traj.times().len());
    w.report(&rep)?;
    Ok(rep)
}

fn exact(sc: &Scenario, out: &Path) -> Result<SuiteReport, SuiteError> {
    const SUITE: &str = "exact";
    let num = numerics(SUITE);
    let w = Writer {
        suite: SUITE,
        dir: out,
    };
    let spec = sc.exact_spec(SUITE)?;
    let run = &sc.cfg.run;
    let p = &sc.params;
    let sol = ExactSolution::new(&spec, p, run.t_end, run.tol).map_err(&num)?;
    let span = sol.span();
    let times = sample_times(span, run.samples);

    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let s = sol.build_state(t).map_err(&num)?;
        let [_, od, phi, theta] = sol.scalars(t).map_err(&num)?;
        let tr = sol.translation(t);
        rows.push(
            std::iter::once(t)
                .chain(s.to_array())
                .chain([od, phi, theta, tr.qbar, tr.pbar])
                .collect(),
        );
    }
    w.csv(
        "exact_trajectory.csv",
        &state_header(&["t"], &["omega_dot", "phi", "theta", "qbar", "pbar"]),
        &rows,
    )?;

    let mut snap = Vec::new();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed_from_env());
    for t in [span.0, 0.5 * (span.0 + span.1), span.1] {
        let s = sol.build_state(t).map_err(&num)?;
        let tr = sol.translation(t);
        for (x, y) in grid_points(&s, &tr, &run.grid, &mut rng) {
            let f = reconstruct(&s, &tr, p, x, y, t).map_err(&num)?;
            snap.push(vec![
                f.t,
                f.x,
                f.y,
                f.u,
                f.v,
                f.rho,
                f.pressure,
                f.temperature,
                f.entropy,
                f.flux,
                f.h,
                f.hx,
                f.hy,
            ]);
        }
    }
    w.csv(
        "field_snapshots.csv",
        &[
            "t",
            "x",
            "y",
            "u",
            "v",
            "rho",
            "pressure",
            "temperature",
            "entropy",
            "flux",
            "h",
            "hx",
            "hy",
        ],
        &snap,
    )?;

    let mut rep = SuiteReport::new(SUITE);
    let h = 1e-3;
    let derived = rhs_consistency(&sol, run.samples, h).map_err(&num)?;
    rep.row(
        "rate_consistency",
        "time derivative of the closed-form state against the reduced dynamics",
        derived.max_abs,
        tol::RATE_CONSISTENCY,
        true,
    );
    let printed =
        rhs_consistency(&sol.with_form(ExactForm::AsPrinted), run.samples, h).map_err(&num)?;
    rep.row(
        "rate_consistency_printed_forms",
        "same, with the closed forms exactly as printed",
        printed.max_abs,
        tol::RATE_CONSISTENCY,
        false,
    );

    rep.row(
        "first_integral",
        "amplitude first integral with the derived constant term, along the solution",
        sol.max_first_integral_residual,
        tol::FIRST_INTEGRAL,
        true,
    );
    let mut printed_along = 0.0_f64;
    for &t in &times {
        let [om, od, _, _] = sol.scalars(t).map_err(&num)?;
        let r = omega_first_integral_residual(om, od, &sol.ints, FirstIntegralForm::AsPrinted);
        printed_along = printed_along.max(r.abs() / omega_first_integral_scale(om, od, &sol.ints));
    }
    rep.row(
        "first_integral_printed_along_solution",
        "amplitude first integral with the printed constant term, along the solution",
        printed_along,
        tol::FIRST_INTEGRAL,
        false,
    );

    let literal = IntegralSet {
        k: sol.ints.k_printed(),
        ..sol.ints
    };
    let om_traj =
        solve_omega(&literal, p, run.t_end, run.tol, spec.omega_dot_sign).map_err(&num)?;
    let literal_res = om_traj
        .states()
        .iter()
        .map(|y| {
            omega_first_integral_residual(y[0], y[1], &literal, FirstIntegralForm::AsPrinted).abs()
                / omega_first_integral_scale(y[0], y[1], &literal)
        })
        .fold(0.0, f64::max);
    rep.row(
        "amplitude_dual_route",
        "amplitude integrated from the printed first-integral constant satisfies the printed first integral",
        literal_res,
        tol::FIRST_INTEGRAL,
        true,
    );

    let full = integrate(&sol.initial_state, p, run.t_end, run.tol).map_err(&num)?;
    let mut gap = 0.0_f64;
    for &t in &times {
        let a = sol.build_state(t).map_err(&num)?;
        let b = full.state(t).map_err(&num)?;
        gap = gap.max(a.max_abs_diff(&b));
    }
    rep.row(
        "closed_form_vs_integration",
        "closed-form solution against direct integration of the reduced dynamics",
        gap,
        tol::CLOSED_FORM,
        true,
    );
    rep.detail("constants", &sol.ints);
    rep.detail("k_derived", &sol.ints.k_from_constants());
    rep.detail("k_printed", &sol.ints.k_printed());
    rep.detail("rate_mismatch", &derived);
    rep.detail("rate_mismatch_printed_forms", &printed);
    w.report(&rep)?;
    Ok(rep)
}

fn residuals(sc: &Scenario, out: &Path) -> Result<SuiteReport, SuiteError> {
    const SUITE: &str = "residuals";
    let num = numerics(SUITE);
    let w = Writer {
        suite: SUITE,
        dir: out,
    };
    let hist = sc.history(SUITE)?;
    let trans = sc.translation();
    let seed = seed_from_env();
    let grid = &sc.cfg.run.grid;
    let res = pde_residuals(hist.as_ref(), &trans, grid, seed).map_err(&num)?;

    let mut rep = SuiteReport::new(SUITE);
    let tag = |eq: &str| match eq {
        "mass" => "mass conservation",
        "momentum_x" | "momentum_y" => "momentum balance with Coriolis and Lorentz forces",
        "flux" => "transport of the magnetic flux function",
        "entropy" => "entropy advection",
        "energy" => "energy equation",
        _ => "",
    };
    for eq in GOVERNING {
        let v = res.chain_rule.get(eq).map_or(f64::NAN, |r| r.value);
        rep.row(eq, tag(eq), v, tol::PDE_CHAIN, true);
    }
    for eq in GOVERNING {
        let v = res.finite_difference.get(eq).map_or(f64::NAN, |r| r.value);
        rep.row(&format!("{eq}_fd"), tag(eq), v, tol::PDE_FD, true);
    }
    for (eq, t) in [
        (
            "reduced_momentum_x",
            "momentum balance in terms of the total pressure",
        ),
        (
            "reduced_momentum_y",
            "momentum balance in terms of the total pressure",
        ),
        ("momentum_form_gap", "agreement of the two momentum forms"),
    ] {
        let v = res.chain_rule.get(eq).map_or(f64::NAN, |r| r.value);
        rep.row(eq, t, v, tol::PDE_CHAIN, true);
    }
    let div = res.chain_rule.get("div_h").map_or(f64::NAN, |r| r.value);
    rep.row("div_h", "solenoidal magnetic field", div, tol::DIV_H, true);

    let (t0, t1) = hist.span();
    let win = Window {
        inner: hist.as_ref(),
        t0,
        t1: (t0 + 0.1).min(t1),
    };
    let bad = Corrupted {
        inner: &win,
        shear_shift: CONTROL_SHIFT,
    };
    let control_grid = crate::fields::GridSpec { nt: 3, ..*grid };
    let ctrl = pde_residuals(&bad, &trans, &control_grid, seed).map_err(&num)?;
    rep.control(
        "negative_control",
        "momentum residual of a state with shifted ellipse shear",
        ctrl.chain_rule.max_of(&["momentum_x", "momentum_y"]),
        tol::CONTROL,
    );
    rep.detail("seed", &seed);
    rep.detail("report", &res);
    w.report(&rep)?;
    Ok(rep)
}

fn lax(sc: &Scenario, out: &Path) -> Result<SuiteReport, SuiteError> {
    const SUITE: &str = "lax";
    let num = numerics(SUITE);
    let w = Writer {
        suite: SUITE,
        dir: out,
    };
    let hist = sc.history(SUITE)?;
    let (t0, t1) = hist.span();
    let opts = LaxOptions {
        lambdas: sc.cfg.run.lambdas.clone(),
        tau_points: sc.cfg.run.tau_points,
        gauge_origin: t0,
    };
    let res = lax_checks(hist.as_ref(), &opts).map_err(&num)?;

    let mut rep = SuiteReport::new(SUITE);
    for r in &res.rows {
        rep.row(
            &format!("compatibility_lambda_{}", r.lambda),
            "zero-curvature condition of the spectral matrix pair",
            r.max_residual,
            tol::LAX,
            true,
        );
        rep.row(
            &format!("det_drift_lambda_{}", r.lambda),
            "isospectral flow: determinant of the spectral matrix",
            r.det_max_rel_drift,
            tol::DET_DRIFT,
            true,
        );
    }
    rep.row(
        "shape_component",
        "lambda-free part of the zero-curvature condition",
        res.shape_component_max,
        tol::LAX,
        true,
    );
    rep.row(
        "rate_component",
        "lambda-linear part of the zero-curvature condition",
        res.rate_component_max,
        tol::LAX,
        true,
    );
    rep.row(
        "sigma_equation",
        "scalar equation for the inverse amplitude in the rescaled time",
        res.sigma_max,
        tol::SIGMA,
        true,
    );
    rep.row(
        "trace_equation",
        "trace of the velocity gradient against the amplitude rate",
        res.trace_equation_max,
        tol::SIGMA,
        true,
    );

    let shifted = lax_checks(
        hist.as_ref(),
        &LaxOptions {
            gauge_origin: t0 + 0.5 * (t1 - t0),
            ..opts.clone()
        },
    )
    .map_err(&num)?;
    rep.row(
        "gauge_origin_invariance",
        "compatibility residual does not depend on the rotation origin",
        (shifted.max_residual - res.max_residual).abs(),
        tol::GAUGE,
        true,
    );

    let win = Window {
        inner: hist.as_ref(),
        t0,
        t1: (t0 + 2.0).min(t1),
    };
    let bad = Corrupted {
        inner: &win,
        shear_shift: CONTROL_SHIFT,
    };
    let ctrl = lax_checks(&bad, &opts).map_err(&num)?;
    rep.control(
        "negative_control",
        "compatibility residual of a state with shifted ellipse shear",
        ctrl.max_residual,
        tol::CONTROL,
    );
    rep.detail("report", &res);
    w.report(&rep)?;
    Ok(rep)
}

fn ermakov(sc: &Scenario, out: &Path) -> Result<SuiteReport, SuiteError> {
    const SUITE: &str = "ermakov";
    let num = numerics(SUITE);
    let w = Writer {
        suite: SUITE,
        dir: out,
    };
    let hist = sc.history(SUITE)?;
    let run = &sc.cfg.run;
    let ints = &sc.ints;
    let f = sc.params.f;
    let k_e = ermakov_constant(ints);

    let mut rows = Vec::new();
    for t in sample_times(hist.span(), run.samples) {
        let s = hist.state(t).map_err(&num)?;
        let (om, od) = (s.omega, 0.5 * s.g * s.omega);
        let sa = semi_axes(om, od, ints).map_err(&num)?;
        let z = sa.wronskian();
        rows.push(vec![
            t,
            sa.axis_a,
            sa.axis_b,
            sa.d_axis_a,
            sa.d_axis_b,
            z,
            hamiltonian_value(&sa, z, k_e, f),
        ]);
    }
    w.csv(
        "semi_axes.csv",
        &[
            "t",
            "axis_a",
            "axis_b",
            "d_axis_a",
            "d_axis_b",
            "z",
            "hamiltonian",
        ],
        &rows,
    )?;

    let mut rep = SuiteReport::new(SUITE);
    let er = ermakov_residuals(hist.as_ref(), ints, k_e, run.samples).map_err(&num)?;
    rep.row(
        "semi_axis_equations",
        "coupled Ermakov equations of the semi-axes",
        er.max_residual(),
        tol::ERMAKOV,
        true,
    );
    let er_fi = ermakov_residuals(hist.as_ref(), ints, ints.k, run.samples).map_err(&num)?;
    rep.row(
        "semi_axis_equations_first_integral_k",
        "same, with the amplitude first-integral constant",
        er_fi.max_residual(),
        tol::ERMAKOV,
        false,
    );
    rep.row(
        "z_squared",
        "angular momentum of the axes against its closed form, squared and relative",
        er.z_squared_mismatch,
        tol::Z_SQUARED,
        true,
    );
    rep.row(
        "z_signed",
        "angular momentum of the axes against its signed form",
        er.z_signed_mismatch,
        tol::Z_MATCH,
        true,
    );
    rep.row(
        "axes_vs_shape_matrix",
        "closed-form semi-axes against eigenvalues of the ellipse matrix",
        er.axes_mismatch,
        tol::AXES_MATCH,
        true,
    );
    rep.row(
        "amplitude_from_axes",
        "amplitude recovered from the axis ratio",
        er.omega_mismatch,
        tol::Z_MATCH,
        true,
    );
    let h0 = er.hamiltonian_initial;
    rep.row(
        "hamiltonian_drift",
        "Hamiltonian of the semi-axis system is constant",
        er.hamiltonian_max_drift / h0.abs().max(f64::MIN_POSITIVE),
        tol::HAMILTONIAN,
        true,
    );
    let claimed = hamiltonian_claimed(ints);
    rep.row(
        "hamiltonian_value",
        "Hamiltonian equals the closed value stated for it",
        (h0 - claimed).abs() / claimed.abs().max(f64::MIN_POSITIVE),
        tol::HAMILTONIAN,
        false,
    );
    rep.detail("k", &k_e);
    rep.detail("hamiltonian_claimed", &claimed);
    rep.detail("report", &er);
    rep.detail("report_first_integral_k", &er_fi);

    irrotational(sc, &w, &mut rep)?;
    w.report(&rep)?;
    Ok(rep)
}

fn irrotational(sc: &Scenario, w: &Writer, rep: &mut SuiteReport) -> Result<(), SuiteError> {
    let num = numerics(w.suite);
    let ir = &sc.cfg.irrotational;
    let k = IrrotConstants {
        c_i: ir.c_i,
        c_ii: ir.c_ii,
        c_iii: ir.c_iii,
    };
    let p = Params {
        f: 0.0,
        nu: 0.0,
        alpha1: 0.0,
        branch: Branch::Transverse,
        ..sc.params
    };
    let (c1, c2) = cstar_constants(k.c_i, k.c_ii, k.c_iii, k.c_iii, p.alpha, p.m).map_err(&num)?;
    let traj = integrate_irrotational(&ir.start(), c1, c2, ir.t_end, ir.tol).map_err(&num)?;
    let drift = irrotational_drift(&traj, &k);
    rep.row(
        "ray_reid_invariant",
        "Ray-Reid invariant of the irrotational pair",
        drift.ray_reid_max_rel,
        tol::RAY_REID,
        true,
    );
    rep.row(
        "irrotational_hamiltonian",
        "energy of the irrotational pair with starred kinetic weights",
        drift.hamiltonian_max_rel,
        tol::RAY_REID,
        true,
    );
    rep.row(
        "irrotational_hamiltonian_printed",
        "energy of the irrotational pair as printed",
        drift.hamiltonian_printed_max_rel,
        tol::RAY_REID,
        false,
    );

    let full = integrate(
        &embed_irrotational(&ir.start(), &k, &p).map_err(&num)?,
        &p,
        ir.t_end,
        ir.tol,
    )
    .map_err(&num)?;
    let (mut gap, mut power) = (0.0_f64, 0.0_f64);
    let mut rows = Vec::new();
    for t in sample_times(traj.span(), sc.cfg.run.samples) {
        let ax = traj.eval(t).ok_or(num(Error::OutOfSpan {
            t,
            t0: 0.0,
            t1: ir.t_end,
        }))?;
        let s = full.state(t).map_err(&num)?;
        gap = gap.max(
            embed_irrotational(&ax, &k, &p)
                .map_err(&num)?
                .max_abs_diff(&s),
        );
        for r in power_law_residuals(&s, &ax, &k, p.m) {
            power = power.max(r.abs());
        }
        rows.push(vec![
            t,
            ax.alpha_axis,
            ax.beta_axis,
            ax.d_alpha_axis,
            ax.d_beta_axis,
            ray_reid_invariant(&ax, c1, c2),
            irrotational_hamiltonian(&ax, c1, c2),
        ]);
    }
    rep.row(
        "irrotational_embedding",
        "irrotational pair against the full reduced dynamics",
        gap,
        tol::EMBEDDING,
        true,
    );
    rep.row(
        "irrotational_power_laws",
        "ellipse entries and density follow powers of the axes",
        power,
        tol::EMBEDDING,
        true,
    );
    rep.detail("irrotational_c_star", &[c1, c2]);
    rep.detail("irrotational_drift", &drift);
    w.csv(
        "irrotational.csv",
        &[
            "t",
            "alpha_axis",
            "beta_axis",
            "d_alpha_axis",
            "d_beta_axis",
            "ray_reid",
            "hamiltonian",
        ],
        &rows,
    )
}
