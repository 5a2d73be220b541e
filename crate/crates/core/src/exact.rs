//! Pulsating-rotating exact solutions on the constrained branch and the
//! closed-form drift of the vortex centre.

use serde::{Deserialize, Serialize};

use crate::dynsys::{rhs, run_ode, sample_times, StateHistory};
use crate::error::{sqrt_checked, Error, Result};
use crate::model::{derive_constants, DynState, IntegralSet, Params};
use crate::ode::DenseTrajectory;
use crate::reduced::{
    angle_rhs, omega_energy_residual, omega_first_integral_residual, omega_first_integral_scale,
    parametrize, to_modulated, FirstIntegralForm,
};

/// Initial position and velocity of the vortex centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TranslationInit {
    pub q0: f64,
    pub p0: f64,
    pub u0: f64,
    pub v0: f64,
}

/// Centre position and velocity at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TranslationState {
    pub qbar: f64,
    pub pbar: f64,
    pub qbar_dot: f64,
    pub pbar_dot: f64,
}

/// Closed-form solution of the centre equations `q'' = f p'`, `p'' = -f q'`:
/// the velocity rotates at rate `f` and the centre moves on a circle.
pub fn translation_solve(f: f64, init: &TranslationInit, t: f64) -> TranslationState {
    let TranslationInit { q0, p0, u0, v0 } = *init;
    if f == 0.0 {
        return TranslationState {
            qbar: q0 + u0 * t,
            pbar: p0 + v0 * t,
            qbar_dot: u0,
            pbar_dot: v0,
        };
    }
    let (s, c) = (f * t).sin_cos();
    TranslationState {
        qbar: q0 + (u0 * s - v0 * c + v0) / f,
        pbar: p0 + (v0 * s + u0 * c - u0) / f,
        qbar_dot: u0 * c + v0 * s,
        pbar_dot: v0 * c - u0 * s,
    }
}

/// Time derivative of [`translation_solve`].
pub fn translation_rate(f: f64, init: &TranslationInit, t: f64) -> TranslationState {
    let x = translation_solve(f, init, t);
    TranslationState {
        qbar: x.qbar_dot,
        pbar: x.pbar_dot,
        qbar_dot: f * x.pbar_dot,
        pbar_dot: -f * x.qbar_dot,
    }
}

/// The free constants that select one exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSpec {
    pub c0: f64,
    pub c_i: f64,
    pub c_ii: f64,
    pub c_iii: f64,
    pub delta: f64,
    /// Sign of the cross integral, which is fixed in magnitude by the others.
    pub c_iv_sign: f64,
    /// Sign of the initial amplitude velocity.
    pub omega_dot_sign: f64,
    /// Initial shape angle.
    pub phi0: f64,
    #[serde(default)]
    pub translation: TranslationInit,
}

/// Which closed forms to use for the velocity gradient and ellipse matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExactForm {
    /// Forms consistent with the reduced dynamics.
    Derived,
    /// Forms exactly as printed: `Omega^-2` in the second diagonal velocity
    /// entry, `+` sign on the off-diagonal ellipse entry, and no factor
    /// one half on the second diagonal ellipse entry.
    AsPrinted,
}

/// Initial state at unit amplitude that realises the constants of `spec`.
pub fn constrained_initial_state(spec: &ExactSpec, p: &Params) -> Result<DynState> {
    let d = spec.delta;
    let f = p.f;
    let c_iv = spec.c_iv_sign.signum()
        * sqrt_checked(
            "4 cII cIII + delta^2 f^2 / 4",
            4.0 * spec.c_ii * spec.c_iii + 0.25 * d * d * f * f,
        )?;
    let rb = sqrt_checked("cII + delta^2/4", spec.c_ii + 0.25 * d * d)?;
    let rg = sqrt_checked("cIII + alpha delta", spec.c_iii + p.alpha * d)?;
    let r = rb * rg;
    if r == 0.0 || d == 0.0 {
        return Err(Error::Domain {
            what: "shape-deformation radius product",
            value: r * d,
        });
    }
    let half = 0.5 * (c_iv + spec.c0 * d);
    let cos_d = half / r;
    let omega_dot = spec.omega_dot_sign.signum() * 2.0 / d.abs()
        * sqrt_checked("R^2 - (cIV + c0 delta)^2/4", r * r - half * half)?;
    let sin_d = d * omega_dot / (2.0 * r);
    let theta0 = spec.phi0 + sin_d.atan2(cos_d);
    Ok(DynState {
        rho0: spec.c_i,
        b: d,
        b_s: -rb * spec.phi0.cos(),
        b_n: -rb * spec.phi0.sin(),
        g: 2.0 * omega_dot,
        g_n: rg * theta0.cos(),
        g_s: -rg * theta0.sin(),
        g_r: spec.c0 - 0.5 * f,
        psi: p.nu,
        omega: 1.0,
    })
}

/// Right-hand side of the generalized Steen–Ermakov amplitude equation.
pub fn omega_accel(omega: f64, ints: &IntegralSet, p: &Params) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: omega,
        });
    }
    let o2 = omega * omega;
    Ok(
        -0.25 * p.f * p.f * omega + (ints.c0 * ints.c0 - ints.c_iii) / (o2 * omega)
            - 2.0 * ints.alpha * ints.delta / (o2 * o2 * omega),
    )
}

/// Scalar amplitude trajectory with its first-integral audit.
#[derive(Debug, Clone)]
pub struct OmegaTrajectory {
    dense: DenseTrajectory<2>,
    /// Largest relative violation of the energy form with the stored `k`,
    /// over accepted steps.
    pub max_energy_residual: f64,
}

impl OmegaTrajectory {
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        self.dense.eval(t).map(|y| (y[0], y[1]))
    }

    pub fn times(&self) -> &[f64] {
        self.dense.times()
    }

    pub fn states(&self) -> &[[f64; 2]] {
        self.dense.states()
    }
}

fn initial_omega_dot(ints: &IntegralSet, sign: f64) -> Result<f64> {
    let pot = 0.25 * ints.f * ints.f + ints.c0 * ints.c0 - ints.c_iii - ints.alpha * ints.delta;
    let v2 = -(pot + ints.k);
    let scale = pot.abs().max(ints.k.abs()).max(1e-300);
    if v2 < -1e-12 * scale {
        return Err(Error::TurningPointStall { deficit: v2 });
    }
    Ok(sign.signum() * v2.max(0.0).sqrt())
}

fn energy_scale(omega: f64, omega_dot: f64, ints: &IntegralSet) -> f64 {
    let o2 = omega * omega;
    [
        omega_dot * omega_dot,
        0.25 * ints.f * ints.f * o2,
        (ints.c0 * ints.c0 - ints.c_iii) / o2,
        ints.alpha * ints.delta / (o2 * o2),
        ints.k,
    ]
    .iter()
    .fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Integrate the amplitude equation from unit amplitude. The initial
/// velocity is fixed by the first integral with constant `ints.k` and the
/// given sign.
pub fn solve_omega(
    ints: &IntegralSet,
    p: &Params,
    t_end: f64,
    tol: f64,
    omega_dot_sign: f64,
) -> Result<OmegaTrajectory> {
    let od0 = initial_omega_dot(ints, omega_dot_sign)?;
    let dense = run_ode(
        |_t, y: &[f64; 2]| Ok([y[1], omega_accel(y[0], ints, p)?]),
        0.0,
        [1.0, od0],
        t_end,
        tol,
        0,
    )?;
    let max_energy_residual = dense
        .states()
        .iter()
        .map(|y| {
            omega_energy_residual(y[0], y[1], ints, ints.k).abs() / energy_scale(y[0], y[1], ints)
        })
        .fold(0.0, f64::max);
    Ok(OmegaTrajectory {
        dense,
        max_energy_residual,
    })
}

/// An exact solution: amplitude and both angles integrated together, the
/// remaining fields in closed form.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub spec: ExactSpec,
    pub ints: IntegralSet,
    pub params: Params,
    pub form: ExactForm,
    pub initial_state: DynState,
    dense: DenseTrajectory<4>,
    /// Largest relative residual of the derived amplitude first integral at
    /// accepted steps.
    pub max_first_integral_residual: f64,
}

impl ExactSolution {
    pub fn new(spec: &ExactSpec, p: &Params, t_end: f64, tol: f64) -> Result<Self> {
        let s0 = constrained_initial_state(spec, p)?;
        let ints = derive_constants(&s0, p)?;
        let ms = to_modulated(&s0, p)?;
        let a0 = parametrize(&ms, &ints, None)?;
        let dense = run_ode(
            |_t, y: &[f64; 4]| {
                let (pd, td) = angle_rhs(y[0], &ints, p)?;
                Ok([y[1], omega_accel(y[0], &ints, p)?, pd, td])
            },
            0.0,
            [s0.omega, ms.omega_dot, a0.phi, a0.theta],
            t_end,
            tol,
            0,
        )?;
        let max_first_integral_residual = dense
            .states()
            .iter()
            .map(|y| {
                omega_first_integral_residual(y[0], y[1], &ints, FirstIntegralForm::Derived).abs()
                    / omega_first_integral_scale(y[0], y[1], &ints)
            })
            .fold(0.0, f64::max);
        Ok(Self {
            spec: *spec,
            ints,
            params: *p,
            form: ExactForm::Derived,
            initial_state: s0,
            dense,
            max_first_integral_residual,
        })
    }

    /// Same solution, evaluated with another set of closed forms.
    pub fn with_form(&self, form: ExactForm) -> Self {
        Self {
            form,
            ..self.clone()
        }
    }

    pub fn times(&self) -> &[f64] {
        self.dense.times()
    }

    /// `(Omega, Omega', phi, theta)` at `t`.
    pub fn scalars(&self, t: f64) -> Result<[f64; 4]> {
        self.dense.eval(t).ok_or(Error::OutOfSpan {
            t,
            t0: self.dense.t_start(),
            t1: self.dense.t_end(),
        })
    }

    pub fn translation(&self, t: f64) -> TranslationState {
        translation_solve(self.params.f, &self.spec.translation, t)
    }

    /// The full state at `t` from the closed forms.
    pub fn build_state(&self, t: f64) -> Result<DynState> {
        let [om, od, phi, theta] = self.scalars(t)?;
        build_state_from(om, od, phi, theta, &self.ints, &self.params, self.form)
    }
}

/// Closed-form state for given amplitude, amplitude velocity and angles.
pub fn build_state_from(
    om: f64,
    od: f64,
    phi: f64,
    theta: f64,
    ints: &IntegralSet,
    p: &Params,
    form: ExactForm,
) -> Result<DynState> {
    if !(om > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: om,
        });
    }
    let o2 = om * om;
    let o3 = o2 * om;
    let d = ints.delta;
    let sq = sqrt_checked(
        "alpha delta + cIII Omega^2",
        ints.alpha * d + ints.c_iii * o2,
    )?;
    let big_s = sqrt_checked("4 cII Omega^4 + delta^2", 4.0 * ints.c_ii * o2 * o2 + d * d)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let half_g = od / om;
    let spin = ints.c0 / o2 - 0.5 * p.f;
    let w = om.powf(2.0 * (p.m + 1.0));
    let u1 = half_g + sq * ct / o3;
    let v1 = spin - sq * st / o3;
    let u2 = -spin - sq * st / o3;
    let (v2, a, b, c) = match form {
        ExactForm::Derived => (
            half_g - sq * ct / o3,
            (d - big_s * sp) / (2.0 * w),
            -big_s * cp / (2.0 * w),
            (d + big_s * sp) / (2.0 * w),
        ),
        ExactForm::AsPrinted => (
            half_g - sq * ct / o2,
            (d - big_s * sp) / (2.0 * w),
            big_s * cp / (2.0 * w),
            (d + big_s * sp) / w,
        ),
    };
    let wm1 = om.powf(2.0 * (p.m - 1.0));
    let l = nalgebra::Matrix2::new(u1, u2, v1, v2);
    let e = nalgebra::Matrix2::new(a, b, b, c);
    Ok(DynState::from_matrices(
        &l,
        &e,
        ints.c_i / wm1,
        ints.nu * wm1,
        om,
    ))
}

impl StateHistory for ExactSolution {
    fn span(&self) -> (f64, f64) {
        (self.dense.t_start(), self.dense.t_end())
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn state(&self, t: f64) -> Result<DynState> {
        self.build_state(t)
    }
}

/// Largest mismatch between the governing right-hand side and a numerical
/// time derivative of the history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateMismatch {
    pub max_abs: f64,
    pub t_at_max: f64,
    pub component: &'static str,
}

/// Compare `rhs(state(t))` with a five-point central difference of
/// `state` at `samples` interior times, step `h`.
pub fn rhs_consistency(hist: &dyn StateHistory, samples: usize, h: f64) -> Result<RateMismatch> {
    let (t0, t1) = hist.span();
    let mut worst = RateMismatch {
        max_abs: 0.0,
        t_at_max: t0,
        component: DynState::FIELD_NAMES[0],
    };
    for t in sample_times((t0 + 2.0 * h, t1 - 2.0 * h), samples) {
        let fd = five_point_derivative(|s| hist.state(s).map(|x| x.to_array()), t, h)?;
        let r = rhs(&hist.state(t)?, hist.params())?.to_array();
        for i in 0..10 {
            let d = (fd[i] - r[i]).abs();
            if d > worst.max_abs || d.is_nan() {
                worst = RateMismatch {
                    max_abs: d,
                    t_at_max: t,
                    component: DynState::FIELD_NAMES[i],
                };
            }
        }
    }
    Ok(worst)
}

/// Fourth-order central first derivative of a vector-valued function.
pub fn five_point_derivative<const N: usize, F>(f: F, t: f64, h: f64) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let ym2 = f(t - 2.0 * h)?;
    let ym1 = f(t - h)?;
    let yp1 = f(t + h)?;
    let yp2 = f(t + 2.0 * h)?;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (ym2[i] - 8.0 * ym1[i] + 8.0 * yp1[i] - yp2[i]) / (12.0 * h);
    }
    Ok(out)
}

/// Fourth-order central second derivative of a vector-valued function.
pub fn five_point_second_derivative<const N: usize, F>(f: F, t: f64, h: f64) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let ym2 = f(t - 2.0 * h)?;
    let ym1 = f(t - h)?;
    let y0 = f(t)?;
    let yp1 = f(t + h)?;
    let yp2 = f(t + 2.0 * h)?;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (-ym2[i] + 16.0 * ym1[i] - 30.0 * y0[i] + 16.0 * yp1[i] - yp2[i]) / (12.0 * h * h);
    }
    Ok(out)
}
