//! Amplitude-modulated form of the reduced dynamics, its integrals, the
//! angle parametrization and the scalar amplitude relations.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynsys::run_ode;
use crate::error::{sqrt_checked, Error, Result};
use crate::model::{pressure_coupling, DynState, IntegralSet, Params};
use crate::ode::DenseTrajectory;

/// Ellipse and deformation components rescaled by powers of the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ModulatedState {
    pub bbar: f64,
    pub bbar_s: f64,
    pub bbar_n: f64,
    pub gbar_s: f64,
    pub gbar_n: f64,
    pub omega: f64,
    pub omega_dot: f64,
}

impl ModulatedState {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.bbar,
            self.bbar_s,
            self.bbar_n,
            self.gbar_s,
            self.gbar_n,
            self.omega,
            self.omega_dot,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            bbar: a[0],
            bbar_s: a[1],
            bbar_n: a[2],
            gbar_s: a[3],
            gbar_n: a[4],
            omega: a[5],
            omega_dot: a[6],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn positive_omega(omega: f64) -> Result<()> {
    if omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "Omega",
            value: omega,
        })
    }
}

pub fn to_modulated(s: &DynState, p: &Params) -> Result<ModulatedState> {
    positive_omega(s.omega)?;
    let w = s.omega.powf(2.0 * p.m);
    let o2 = s.omega * s.omega;
    Ok(ModulatedState {
        bbar: w * s.b,
        bbar_s: w * s.b_s,
        bbar_n: w * s.b_n,
        gbar_s: o2 * s.g_s,
        gbar_n: o2 * s.g_n,
        omega: s.omega,
        omega_dot: 0.5 * s.g * s.omega,
    })
}

/// Inverse of [`to_modulated`]; density, spin and flux come from the
/// constants.
pub fn from_modulated(ms: &ModulatedState, p: &Params, ints: &IntegralSet) -> Result<DynState> {
    positive_omega(ms.omega)?;
    let om = ms.omega;
    let w = om.powf(2.0 * p.m);
    let o2 = om * om;
    let wm1 = om.powf(2.0 * (p.m - 1.0));
    Ok(DynState {
        rho0: ints.c_i / wm1,
        b: ms.bbar / w,
        b_s: ms.bbar_s / w,
        b_n: ms.bbar_n / w,
        g: 2.0 * ms.omega_dot / om,
        g_n: ms.gbar_n / o2,
        g_s: ms.gbar_s / o2,
        g_r: ints.c0 / o2 - 0.5 * p.f,
        psi: ints.nu * wm1,
        omega: om,
    })
}

/// Right-hand side of the modulated system; the last component is the
/// amplitude acceleration.
pub fn modulated_rhs(
    ms: &ModulatedState,
    p: &Params,
    ints: &IntegralSet,
) -> Result<ModulatedState> {
    positive_omega(ms.omega)?;
    let om = ms.omega;
    let o2 = om * om;
    let f = p.f;
    let c0 = ints.c0;
    let kap = pressure_coupling(om, p)?;
    let lift = 2.0 * kap / om.powf(2.0 * (p.m - 1.0));
    let ModulatedState {
        bbar,
        bbar_s,
        bbar_n,
        gbar_s,
        gbar_n,
        ..
    } = *ms;
    let bracket = 0.25 * f * f * o2 * o2 + gbar_n * gbar_n + gbar_s * gbar_s - c0 * c0
        + kap * bbar / om.powf(2.0 * (p.m - 2.0));
    Ok(ModulatedState {
        bbar: -4.0 * (bbar_n * gbar_n + bbar_s * gbar_s) / o2,
        bbar_s: -(f * bbar_n + (bbar * gbar_s - 2.0 * c0 * bbar_n) / o2),
        bbar_n: -(-f * bbar_s + (bbar * gbar_n + 2.0 * c0 * bbar_s) / o2),
        gbar_s: -(f * gbar_n + lift * bbar_s),
        gbar_n: -(-f * gbar_s + lift * bbar_n),
        omega: ms.omega_dot,
        omega_dot: -bracket / (o2 * om),
    })
}

/// Integrate the modulated system directly from `ms0`.
pub fn integrate_modulated(
    ms0: &ModulatedState,
    p: &Params,
    ints: &IntegralSet,
    t_end: f64,
    tol: f64,
) -> Result<DenseTrajectory<7>> {
    run_ode(
        |_t, y: &[f64; 7]| Ok(modulated_rhs(&ModulatedState::from_array(*y), p, ints)?.to_array()),
        0.0,
        ms0.to_array(),
        t_end,
        tol,
        5,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedIntegrals {
    pub c_ii: f64,
    pub c_iii: f64,
    pub c_iv: f64,
    /// The fifth integral evaluated from its printed display.
    pub c_v_printed: f64,
}

/// The four integrals evaluated directly on a modulated state, the fifth in
/// its printed form.
pub fn integrals(ms: &ModulatedState, p: &Params, c0: f64) -> Result<ReducedIntegrals> {
    if p.m == 3.0 {
        return Err(Error::RejectM {
            m: p.m,
            reason: "m-3 denominator in the fifth integral",
        });
    }
    positive_omega(ms.omega)?;
    let om = ms.omega;
    let o2 = om * om;
    let c_ii = ms.bbar_s * ms.bbar_s + ms.bbar_n * ms.bbar_n - 0.25 * ms.bbar * ms.bbar;
    let c_iii = ms.gbar_s * ms.gbar_s + ms.gbar_n * ms.gbar_n - p.alpha * ms.bbar;
    let c_iv = 2.0 * (ms.bbar_n * ms.gbar_s - ms.bbar_s * ms.gbar_n) - c0 * ms.bbar;
    let g = 2.0 * ms.omega_dot / om;
    let gr = c0 / o2 - 0.5 * p.f;
    let c_v_printed = 2.0 * (gr + c0 * ms.bbar)
        + 2.0 * g * (ms.bbar_s * ms.gbar_s + ms.bbar_n * ms.gbar_n)
        + 4.0 * p.alpha * c_ii / o2 * (p.m - 1.0) / (p.m - 3.0)
        - ms.bbar
            * o2
            * ((ms.gbar_s * ms.gbar_s + ms.gbar_n * ms.gbar_n) / (o2 * o2)
                + 0.25 * g * g
                + gr * gr);
    Ok(ReducedIntegrals {
        c_ii,
        c_iii,
        c_iv,
        c_v_printed,
    })
}

/// Continuous angles of the ellipse and deformation parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AngleState {
    pub phi: f64,
    pub theta: f64,
}

/// Ellipse radius `sqrt(cII + Bbar^2/4)`.
pub fn shape_radius(bbar: f64, ints: &IntegralSet) -> Result<f64> {
    sqrt_checked("cII + Bbar^2/4", ints.c_ii + 0.25 * bbar * bbar)
}

/// Deformation radius `sqrt(cIII + alpha Bbar)`.
pub fn deformation_radius(bbar: f64, ints: &IntegralSet) -> Result<f64> {
    sqrt_checked("cIII + alpha Bbar", ints.c_iii + ints.alpha * bbar)
}

fn unwrap_near(angle: f64, reference: f64) -> f64 {
    angle + 2.0 * PI * ((reference - angle) / (2.0 * PI)).round()
}

/// Recover the two angles from a modulated state. When `prev` is given the
/// result is shifted by whole turns to lie closest to it.
pub fn parametrize(
    ms: &ModulatedState,
    ints: &IntegralSet,
    prev: Option<AngleState>,
) -> Result<AngleState> {
    shape_radius(ms.bbar, ints)?;
    deformation_radius(ms.bbar, ints)?;
    let phi = (-ms.bbar_n).atan2(-ms.bbar_s);
    let theta = (-ms.gbar_s).atan2(ms.gbar_n);
    Ok(match prev {
        Some(p) => AngleState {
            phi: unwrap_near(phi, p.phi),
            theta: unwrap_near(theta, p.theta),
        },
        None => AngleState { phi, theta },
    })
}

/// Rebuild `(Bbar_S, Bbar_N, Gbar_S, Gbar_N)` from angles and the trace.
pub fn unparametrize(a: &AngleState, bbar: f64, ints: &IntegralSet) -> Result<[f64; 4]> {
    let rb = shape_radius(bbar, ints)?;
    let rg = deformation_radius(bbar, ints)?;
    Ok([
        -rb * a.phi.cos(),
        -rb * a.phi.sin(),
        -rg * a.theta.sin(),
        rg * a.theta.cos(),
    ])
}

/// Angle rates on the constrained branch.
pub fn angle_rhs(omega: f64, ints: &IntegralSet, p: &Params) -> Result<(f64, f64)> {
    positive_omega(omega)?;
    let o2 = omega * omega;
    let d = ints.delta;
    let num = ints.c0 * d + ints.c_iv * o2;
    let den_phi = d * d + 4.0 * ints.c_ii * o2 * o2;
    if den_phi == 0.0 {
        return Err(Error::DenomZero {
            which: "delta^2 + 4 cII Omega^4",
            omega,
        });
    }
    let den_theta = ints.alpha * d + ints.c_iii * o2;
    if den_theta == 0.0 {
        return Err(Error::DenomZero {
            which: "alpha delta + cIII Omega^2",
            omega,
        });
    }
    let phi_dot = p.f + 2.0 / o2 * (d * num / den_phi - ints.c0);
    let theta_dot = p.f - ints.alpha / o2 * num / den_theta;
    Ok((phi_dot, theta_dot))
}

/// The deformation-angle rate with the printed denominator
/// `alpha delta^2 + cIII Omega^2`.
pub fn theta_rate_printed(omega: f64, ints: &IntegralSet, p: &Params) -> Result<f64> {
    positive_omega(omega)?;
    let o2 = omega * omega;
    let den = ints.alpha * ints.delta * ints.delta + ints.c_iii * o2;
    if den == 0.0 {
        return Err(Error::DenomZero {
            which: "alpha delta^2 + cIII Omega^2",
            omega,
        });
    }
    Ok(p.f - ints.alpha / o2 * (ints.c0 * ints.delta + ints.c_iv * o2) / den)
}

/// Residuals of the four relations obtained by substituting the angle
/// parametrization into the modulated system and the fourth integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleRelations {
    /// Trace rate against `sin(theta - phi)`.
    pub trace_rate: f64,
    /// Shape-angle rate.
    pub shape_angle: f64,
    /// Deformation-angle rate.
    pub deformation_angle: f64,
    /// Fourth integral against `cos(theta - phi)`.
    pub cross_integral: f64,
}

pub fn angle_relations(
    ms: &ModulatedState,
    bbar_dot: f64,
    a: &AngleState,
    phi_dot: f64,
    theta_dot: f64,
    ints: &IntegralSet,
    p: &Params,
) -> Result<AngleRelations> {
    let o2 = ms.omega * ms.omega;
    let rb = shape_radius(ms.bbar, ints)?;
    let rg = deformation_radius(ms.bbar, ints)?;
    let d = a.theta - a.phi;
    Ok(AngleRelations {
        trace_rate: bbar_dot + 4.0 / o2 * rb * rg * d.sin(),
        shape_angle: (phi_dot - p.f + 2.0 * ints.c0 / o2) * rb - ms.bbar / o2 * rg * d.cos(),
        deformation_angle: (theta_dot - p.f) * rg + 2.0 * ints.alpha / o2 * rb * d.cos(),
        cross_integral: ints.c0 * ms.bbar + ints.c_iv - 2.0 * rb * rg * d.cos(),
    })
}

/// Which constant term to use in the amplitude first integral multiplied by
/// `delta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FirstIntegralForm {
    /// Constant term `2 c0 cIV delta - 4 alpha cII delta`, as follows from the
    /// reduced system.
    Derived,
    /// Constant term `2 c0 cIV - 4 alpha cII delta`, as printed.
    AsPrinted,
}

/// `delta^2 Omega'^2 + (c0^2 - cIII) delta^2 / Omega^2
///  + (cIV^2 - 4 cII cIII) Omega^2 - alpha delta^3 / Omega^4 + constant`.
pub fn omega_first_integral_residual(
    omega: f64,
    omega_dot: f64,
    ints: &IntegralSet,
    form: FirstIntegralForm,
) -> f64 {
    let d = ints.delta;
    let o2 = omega * omega;
    let constant = match form {
        FirstIntegralForm::Derived => {
            2.0 * ints.c0 * ints.c_iv * d - 4.0 * ints.alpha * ints.c_ii * d
        }
        FirstIntegralForm::AsPrinted => {
            2.0 * ints.c0 * ints.c_iv - 4.0 * ints.alpha * ints.c_ii * d
        }
    };
    d * d * omega_dot * omega_dot
        + (ints.c0 * ints.c0 - ints.c_iii) * d * d / o2
        + (ints.c_iv * ints.c_iv - 4.0 * ints.c_ii * ints.c_iii) * o2
        - ints.alpha * d * d * d / (o2 * o2)
        + constant
}

/// Magnitude of the largest term in [`omega_first_integral_residual`], used
/// to judge its size.
pub fn omega_first_integral_scale(omega: f64, omega_dot: f64, ints: &IntegralSet) -> f64 {
    let d = ints.delta;
    let o2 = omega * omega;
    [
        d * d * omega_dot * omega_dot,
        (ints.c0 * ints.c0 - ints.c_iii) * d * d / o2,
        ints.c_iv * ints.c_iv * o2,
        4.0 * ints.c_ii * ints.c_iii * o2,
        ints.alpha * d * d * d / (o2 * o2),
        2.0 * ints.c0 * ints.c_iv * d,
        4.0 * ints.alpha * ints.c_ii * d,
    ]
    .iter()
    .fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Energy form of the amplitude equation:
/// `Omega'^2 + f^2 Omega^2/4 + (c0^2 - cIII)/Omega^2 - alpha delta/Omega^4 + k`.
pub fn omega_energy_residual(omega: f64, omega_dot: f64, ints: &IntegralSet, k: f64) -> f64 {
    let o2 = omega * omega;
    omega_dot * omega_dot + 0.25 * ints.f * ints.f * o2 + (ints.c0 * ints.c0 - ints.c_iii) / o2
        - ints.alpha * ints.delta / (o2 * o2)
        + k
}
