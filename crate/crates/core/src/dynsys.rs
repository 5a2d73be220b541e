//! The ten-dimensional reduced dynamics: right-hand side, adaptive
//! integration, the two balance laws and invariant drift monitoring.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{pressure_coupling, Branch, DynState, IntegralSet, Params};
use crate::ode::{self, DenseTrajectory, OdeError, StepControl};

/// Time derivative of every state component.
pub fn rhs(s: &DynState, p: &Params) -> Result<DynState> {
    if !(s.omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: s.omega,
        });
    }
    let m = p.m;
    let f = p.f;
    let k2 = 2.0 * pressure_coupling(s.omega, p)?;
    let DynState {
        rho0,
        b,
        b_s,
        b_n,
        g,
        g_n,
        g_s,
        g_r,
        psi,
        omega,
    } = *s;
    Ok(DynState {
        rho0: -(m - 1.0) * rho0 * g,
        b: -(m * b * g + 4.0 * (b_n * g_n + b_s * g_s)),
        b_s: -(m * b_s * g + b * g_s - 2.0 * b_n * g_r),
        b_n: -(m * b_n * g + b * g_n + 2.0 * b_s * g_r),
        g: -(0.5 * g * g + 2.0 * (g_n * g_n + g_s * g_s - g_r * g_r) - 2.0 * f * g_r + k2 * b),
        g_n: -(g * g_n - f * g_s + k2 * b_n),
        g_s: -(g * g_s + f * g_n + k2 * b_s),
        g_r: -(g * g_r + 0.5 * f * g),
        psi: (m - 1.0) * psi * g,
        omega: 0.5 * g * omega,
    })
}

pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-3);

/// Adaptive integration of a fixed-size system with the crate's error
/// mapping. A failure is reported as a collapse when it was caused by a
/// non-positive amplitude (component `omega_index`) or when the amplitude
/// had already shrunk by six orders of magnitude.
pub(crate) fn run_ode<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: f64,
    omega_index: usize,
) -> Result<DenseTrajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(Error::Domain {
            what: "tol",
            value: tol,
        });
    }
    let omega0 = y0[omega_index].abs();
    ode::integrate(rhs, t0, y0, t_end, &StepControl::with_tol(tol)).map_err(|(e, partial)| {
        let last = partial.states().last().expect("trajectory is never empty");
        let shrunk = last[omega_index].abs() <= 1e-6 * omega0;
        match e {
            OdeError::StepUnderflow {
                t,
                last_rhs_error: Some(Error::Domain { what: "Omega", .. }),
            } => Error::OmegaCollapse { t },
            OdeError::StepUnderflow { t, .. }
            | OdeError::MaxSteps { t }
            | OdeError::NonFinite { t } => {
                if shrunk {
                    Error::OmegaCollapse { t }
                } else {
                    Error::StepFailure { t }
                }
            }
        }
    })
}

/// Something that can report the state and its time derivative on a span.
pub trait StateHistory: Sync {
    fn span(&self) -> (f64, f64);
    fn params(&self) -> &Params;
    fn state(&self, t: f64) -> Result<DynState>;
    /// Time derivative at `t`, evaluated from the governing equations.
    fn state_dot(&self, t: f64) -> Result<DynState> {
        rhs(&self.state(t)?, self.params())
    }
}

/// Integrated solution with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dense: DenseTrajectory<10>,
    pub tol: f64,
    pub params: Params,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        self.dense.times()
    }

    pub fn states(&self) -> Vec<DynState> {
        self.dense
            .states()
            .iter()
            .map(|a| DynState::from_array(*a))
            .collect()
    }

    pub fn t_start(&self) -> f64 {
        self.dense.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.dense.t_end()
    }

    /// Interpolated state, `None` outside the span.
    pub fn state_at(&self, t: f64) -> Option<DynState> {
        self.dense.eval(t).map(DynState::from_array)
    }
}

impl StateHistory for Trajectory {
    fn span(&self) -> (f64, f64) {
        (self.t_start(), self.t_end())
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn state(&self, t: f64) -> Result<DynState> {
        self.state_at(t).ok_or(Error::OutOfSpan {
            t,
            t0: self.t_start(),
            t1: self.t_end(),
        })
    }
}

/// Integrate the reduced dynamics from `t = 0` to `t_end`.
pub fn integrate(s0: &DynState, p: &Params, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(s0.omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: s0.omega,
        });
    }
    let dense = run_ode(
        |_t, y: &[f64; 10]| rhs(&DynState::from_array(*y), p).map(|d| d.to_array()),
        0.0,
        s0.to_array(),
        t_end,
        tol,
        9,
    )?;
    Ok(Trajectory {
        dense,
        tol,
        params: *p,
    })
}

/// The two balance laws of the reduced dynamics, both decaying like
/// `Omega^(-2(m+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceLaws {
    /// `2 (B_N G_S - B_S G_N) - B (G_R + f/2)`.
    pub moment_m: f64,
    /// The quadratic moment, with the pressure term in closed form.
    pub moment_q: f64,
    /// `B^2/4 - B_S^2 - B_N^2`, the determinant of the ellipse matrix.
    pub shape_det: f64,
}

/// Evaluate the two balance-law quantities at a state. The pressure term
/// uses the closed form that holds when `epsilon2` follows the amplitude
/// power law.
pub fn balance_laws(s: &DynState, p: &Params) -> Result<BalanceLaws> {
    if !(s.omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: s.omega,
        });
    }
    let shape_det = 0.25 * s.b * s.b - s.b_s * s.b_s - s.b_n * s.b_n;
    let twist = s.b_n * s.g_s - s.b_s * s.g_n;
    let moment_m = 2.0 * twist - s.b * (s.g_r + 0.5 * p.f);
    let moment_q = -s.b * (s.g_s * s.g_s + s.g_n * s.g_n + s.g_r * s.g_r + 0.25 * s.g * s.g)
        + 4.0 * s.g_r * twist
        + 2.0 * s.g * (s.b_s * s.g_s + s.b_n * s.g_n)
        + 4.0 * p.alpha * shape_det * s.omega.powf(2.0 * (p.m - 2.0));
    Ok(BalanceLaws {
        moment_m,
        moment_q,
        shape_det,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEntry {
    pub name: &'static str,
    pub tag: &'static str,
    pub initial: f64,
    pub max_abs: f64,
    /// `max_abs / |initial|`, or `max_abs` when the initial value is zero.
    pub max_rel: f64,
    pub t_at_max: f64,
    /// False for measurements that are reported but never gate a run.
    pub gated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub samples: usize,
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub const DEFAULT_SAMPLES: usize = 201;

/// Uniformly spaced sample times covering the span, endpoints included.
pub fn sample_times(span: (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                span.1
            } else {
                span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

struct Tracker {
    name: &'static str,
    tag: &'static str,
    initial: f64,
    gated: bool,
    max_abs: f64,
    t_at_max: f64,
}

/// Measure how far each conserved combination wanders along a history.
/// At least 200 samples are always taken.
pub fn monitor_invariants(
    traj: &dyn StateHistory,
    p: &Params,
    ints: &IntegralSet,
    samples: usize,
) -> Result<DriftReport> {
    let samples = samples.max(DEFAULT_SAMPLES);
    let scale = |s: &DynState| s.omega.powf(2.0 * (p.m + 1.0));
    let s0 = traj.state(traj.span().0)?;
    let bl0 = balance_laws(&s0, p)?;

    let mut trackers = vec![
        Tracker::new("c0", "spin constant", ints.c0, true),
        Tracker::new("cI", "density constant", ints.c_i, true),
        Tracker::new("nu", "flux amplitude", ints.nu, true),
        Tracker::new("cII", "ellipse shape integral", ints.c_ii, true),
        Tracker::new("cIII", "deformation integral", ints.c_iii, true),
        Tracker::new("cIV", "shape-deformation cross integral", ints.c_iv, true),
        Tracker::new("cV", "fifth integral, conserved form", ints.c_v, true),
        Tracker::new(
            "M*",
            "first balance law times Omega^(2(m+1))",
            bl0.moment_m * scale(&s0),
            true,
        ),
        Tracker::new(
            "Q*",
            "second balance law times Omega^(2(m+1))",
            bl0.moment_q * scale(&s0),
            true,
        ),
    ];
    if p.branch == Branch::Constrained {
        trackers.push(Tracker::new("delta", "trace constant", ints.delta, true));
    }
    if let Some(cv) = ints.c_v_printed {
        trackers.push(Tracker::new(
            "cV_printed",
            "fifth integral, printed form",
            cv,
            false,
        ));
    }

    for t in sample_times(traj.span(), samples) {
        let s = traj.state(t)?;
        let set = IntegralSet::evaluate(&s, p)?;
        let bl = balance_laws(&s, p)?;
        let w = scale(&s);
        for tr in trackers.iter_mut() {
            let v = match tr.name {
                "c0" => set.c0,
                "cI" => set.c_i,
                "nu" => set.nu,
                "cII" => set.c_ii,
                "cIII" => set.c_iii,
                "cIV" => set.c_iv,
                "cV" => set.c_v,
                "M*" => bl.moment_m * w,
                "Q*" => bl.moment_q * w,
                "delta" => set.delta,
                "cV_printed" => set.c_v_printed.unwrap_or(f64::NAN),
                _ => unreachable!(),
            };
            tr.observe(t, v);
        }
    }
    Ok(DriftReport {
        samples,
        entries: trackers.into_iter().map(Tracker::finish).collect(),
    })
}

impl Tracker {
    fn new(name: &'static str, tag: &'static str, initial: f64, gated: bool) -> Self {
        Self {
            name,
            tag,
            initial,
            gated,
            max_abs: 0.0,
            t_at_max: 0.0,
        }
    }

    fn observe(&mut self, t: f64, v: f64) {
        let d = (v - self.initial).abs();
        if d > self.max_abs || (d.is_nan() && !self.max_abs.is_nan()) {
            self.max_abs = d;
            self.t_at_max = t;
        }
    }

    fn finish(self) -> DriftEntry {
        let max_rel = if self.initial != 0.0 {
            self.max_abs / self.initial.abs()
        } else {
            self.max_abs
        };
        DriftEntry {
            name: self.name,
            tag: self.tag,
            initial: self.initial,
            max_abs: self.max_abs,
            max_rel,
            t_at_max: self.t_at_max,
            gated: self.gated,
        }
    }
}
