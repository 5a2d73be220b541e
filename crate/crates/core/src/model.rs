//! Domain types, parameter validation and the constant algebra of the
//! elliptic vortex reduction.

use std::fmt;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Which family of reductions a scenario lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Nonzero in-plane flux; the ellipse trace obeys `Omega^2 * Bbar = delta`.
    Constrained,
    /// Vanishing flux amplitude; purely transverse magnetic field.
    Transverse,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Constrained => f.write_str("constrained"),
            Branch::Transverse => f.write_str("transverse"),
        }
    }
}

/// Physical and ansatz constants. The second pressure exponent is always
/// `m - 1` and is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Pressure-density exponent.
    pub m: f64,
    /// Coriolis constant.
    pub f: f64,
    /// Magnetic permeability.
    pub mu: f64,
    /// Ratio of transverse field to density.
    pub lambda_t: f64,
    /// Amplitude of the top pressure coefficient.
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Flux amplitude.
    pub nu: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub branch: Branch,
}

fn default_gamma() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RejectM {
        m: f64,
        reason: &'static str,
    },
    RejectGamma {
        gamma: f64,
    },
    RejectMu {
        mu: f64,
    },
    /// `2 alpha0 + mu lambda_t^2` must vanish.
    Alpha0 {
        residual: f64,
    },
    /// `alpha2 nu^((m-2)/(m-1))` must equal `alpha (m-1)/m`.
    Alpha2 {
        residual: f64,
    },
    /// The constrained branch needs a positive flux amplitude.
    FluxAmplitude {
        nu: f64,
        branch: Branch,
    },
    /// With zero flux the middle pressure coefficient must vanish.
    Alpha1OnTransverse {
        alpha1: f64,
    },
    NonFinite {
        field: &'static str,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RejectM { m, reason } => write!(f, "RejectM: m = {m} ({reason})"),
            Violation::RejectGamma { gamma } => {
                write!(
                    f,
                    "RejectGamma: gamma = {gamma}, the reduction forces gamma = 2"
                )
            }
            Violation::RejectMu { mu } => write!(f, "RejectMu: mu = {mu} must be positive"),
            Violation::Alpha0 { residual } => {
                write!(f, "alpha0 != -mu*lambda_t^2/2 (residual {residual:e})")
            }
            Violation::Alpha2 { residual } => write!(
                f,
                "alpha2*nu^((m-2)/(m-1)) != alpha*(m-1)/m (residual {residual:e})"
            ),
            Violation::FluxAmplitude { nu, branch } => {
                write!(f, "nu = {nu} not allowed on the {branch} branch")
            }
            Violation::Alpha1OnTransverse { alpha1 } => {
                write!(f, "alpha1 = {alpha1} must vanish on the transverse branch")
            }
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
        }
    }
}

/// Every constraint that a parameter set failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParamError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid parameters:")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(Params);

impl std::ops::Deref for ValidatedParams {
    type Target = Params;
    fn deref(&self) -> &Params {
        &self.0
    }
}

impl ValidatedParams {
    pub fn into_inner(self) -> Params {
        self.0
    }
}

const RELATION_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATION_TOL * (1.0 + a.abs().max(b.abs()))
}

impl Params {
    /// `alpha2` that matches `alpha` for the stored flux amplitude.
    pub fn matching_alpha2(&self) -> f64 {
        self.alpha * (self.m - 1.0) / self.m * self.nu.powf(-(self.m - 2.0) / (self.m - 1.0))
    }

    /// `alpha1` that matches a given trace constant `delta`.
    pub fn matching_alpha1(&self, delta: f64) -> f64 {
        match self.branch {
            Branch::Constrained => {
                -2.0 * self.mu * delta * self.nu.powf((self.m + 1.0) / (self.m - 1.0))
            }
            Branch::Transverse => 0.0,
        }
    }
}

/// Check the structural constraints of the reduction and collect every
/// violation.
pub fn validate_params(p: &Params) -> std::result::Result<ValidatedParams, ParamError> {
    let mut v = Vec::new();
    let fields = [
        ("m", p.m),
        ("f", p.f),
        ("mu", p.mu),
        ("lambda_t", p.lambda_t),
        ("alpha", p.alpha),
        ("alpha0", p.alpha0),
        ("alpha1", p.alpha1),
        ("alpha2", p.alpha2),
        ("nu", p.nu),
        ("gamma", p.gamma),
    ];
    for (name, x) in fields {
        if !x.is_finite() {
            v.push(Violation::NonFinite { field: name });
        }
    }
    if !v.is_empty() {
        return Err(ParamError { violations: v });
    }

    if p.m == 1.0 {
        v.push(Violation::RejectM {
            m: p.m,
            reason: "density exponent 1/(m-1) is singular",
        });
    }
    if p.m == 3.0 {
        v.push(Violation::RejectM {
            m: p.m,
            reason: "m-3 denominator in the fifth integral",
        });
    }
    if p.m == 2.0 && p.branch == Branch::Constrained {
        v.push(Violation::RejectM {
            m: p.m,
            reason: "n = m-1 = 1 is excluded in the trace relation",
        });
    }
    if p.gamma != 2.0 {
        v.push(Violation::RejectGamma { gamma: p.gamma });
    }
    if p.mu <= 0.0 {
        v.push(Violation::RejectMu { mu: p.mu });
    }
    let r0 = 2.0 * p.alpha0 + p.mu * p.lambda_t * p.lambda_t;
    if !close(2.0 * p.alpha0, -p.mu * p.lambda_t * p.lambda_t) {
        v.push(Violation::Alpha0 { residual: r0 });
    }
    match p.branch {
        Branch::Constrained => {
            if p.nu <= 0.0 {
                v.push(Violation::FluxAmplitude {
                    nu: p.nu,
                    branch: p.branch,
                });
            } else {
                let lhs = p.alpha2 * p.nu.powf((p.m - 2.0) / (p.m - 1.0));
                let rhs = p.alpha * (p.m - 1.0) / p.m;
                if !close(lhs, rhs) {
                    v.push(Violation::Alpha2 {
                        residual: lhs - rhs,
                    });
                }
            }
        }
        Branch::Transverse => {
            if p.nu != 0.0 {
                v.push(Violation::FluxAmplitude {
                    nu: p.nu,
                    branch: p.branch,
                });
            }
            if p.alpha1 != 0.0 {
                v.push(Violation::Alpha1OnTransverse { alpha1: p.alpha1 });
            }
        }
    }
    if v.is_empty() {
        Ok(ValidatedParams(*p))
    } else {
        Err(ParamError { violations: v })
    }
}

/// Top pressure coefficient as a function of the amplitude variable.
pub fn epsilon2(omega: f64, p: &Params) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: omega,
        });
    }
    Ok(p.alpha * (p.m - 1.0) / p.m * omega.powf(2.0 * (p.m - 2.0)))
}

/// `epsilon2 * m / (m-1)`, the coefficient that multiplies the ellipse
/// matrix in the momentum balance.
pub fn pressure_coupling(omega: f64, p: &Params) -> Result<f64> {
    epsilon2(omega, p).map(|e| e * p.m / (p.m - 1.0))
}

/// Lowest pressure coefficient; constant.
pub fn epsilon0(p: &Params) -> f64 {
    p.alpha0
}

/// Middle pressure coefficient as a function of the flux time factor.
pub fn epsilon1(psi: f64, p: &Params) -> f64 {
    if p.alpha1 == 0.0 {
        0.0
    } else {
        p.alpha1 * psi.powf((p.m - 3.0) / (p.m - 1.0))
    }
}

/// The ten-component state evolved by the reduced dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynState {
    /// Density offset.
    pub rho0: f64,
    /// Trace of the ellipse matrix.
    pub b: f64,
    /// Shear component of the ellipse matrix.
    pub b_s: f64,
    /// Normal component of the ellipse matrix.
    pub b_n: f64,
    /// Velocity divergence.
    pub g: f64,
    /// Normal deformation rate.
    pub g_n: f64,
    /// Shear deformation rate.
    pub g_s: f64,
    /// Spin.
    pub g_r: f64,
    /// Flux time factor.
    pub psi: f64,
    /// Amplitude variable, `g = 2 omega'/omega`.
    pub omega: f64,
}

impl DynState {
    pub const FIELD_NAMES: [&'static str; 10] = [
        "rho0", "b", "b_s", "b_n", "g", "g_n", "g_s", "g_r", "psi", "omega",
    ];

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.rho0, self.b, self.b_s, self.b_n, self.g, self.g_n, self.g_s, self.g_r, self.psi,
            self.omega,
        ]
    }

    pub fn from_array(a: [f64; 10]) -> Self {
        Self {
            rho0: a[0],
            b: a[1],
            b_s: a[2],
            b_n: a[3],
            g: a[4],
            g_n: a[5],
            g_s: a[6],
            g_r: a[7],
            psi: a[8],
            omega: a[9],
        }
    }

    /// The constant state with zero velocity gradient and flat density.
    pub fn fixed_point() -> Self {
        Self {
            rho0: 1.0,
            psi: 1.0,
            omega: 1.0,
            ..Self::default()
        }
    }

    /// Velocity gradient `[[u1, u2], [v1, v2]]`.
    pub fn velocity_gradient(&self) -> Matrix2<f64> {
        Matrix2::new(
            0.5 * self.g + self.g_n,
            self.g_s - self.g_r,
            self.g_s + self.g_r,
            0.5 * self.g - self.g_n,
        )
    }

    /// Symmetric ellipse matrix `[[a, b], [b, c]]`.
    pub fn shape_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(
            0.5 * self.b + self.b_n,
            self.b_s,
            self.b_s,
            0.5 * self.b - self.b_n,
        )
    }

    /// Inverse of [`velocity_gradient`](Self::velocity_gradient) and
    /// [`shape_matrix`](Self::shape_matrix).
    pub fn from_matrices(
        l: &Matrix2<f64>,
        e: &Matrix2<f64>,
        rho0: f64,
        psi: f64,
        omega: f64,
    ) -> Self {
        let (u1, u2, v1, v2) = (l[(0, 0)], l[(0, 1)], l[(1, 0)], l[(1, 1)]);
        let (a, b, c) = (e[(0, 0)], 0.5 * (e[(0, 1)] + e[(1, 0)]), e[(1, 1)]);
        Self {
            rho0,
            b: a + c,
            b_s: b,
            b_n: 0.5 * (a - c),
            g: u1 + v2,
            g_n: 0.5 * (u1 - v2),
            g_s: 0.5 * (v1 + u2),
            g_r: 0.5 * (v1 - u2),
            psi,
            omega,
        }
    }

    pub fn max_abs_diff(&self, other: &DynState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Outcome of the consistency checks attached to an [`IntegralSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consistency {
    /// `cIV^2 - 4 cII cIII - delta^2 f^2 / 4`.
    pub quadratic: f64,
    /// `delta + 2 (cV + f cIV) / f^2`; zero when `f = 0`.
    pub trace_balance: f64,
    /// `Bbar_N Gbar_N + Bbar_S Gbar_S - delta Omega' / (2 Omega)`, the rate of
    /// change of `Omega^2 Bbar` up to a factor.
    pub trace_rate: f64,
    /// `k - (2 c0 cIV - 4 alpha cII) / delta`.
    pub k_relation: f64,
    /// `alpha1 + 2 mu delta nu^((m+1)/(m-1))`.
    pub flux_coupling: f64,
    /// `nu - psi / Omega^(2(m-1))`.
    pub flux_amplitude: f64,
    pub ok: bool,
}

/// Constants of motion carried by a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralSet {
    /// Spin constant `Omega^2 (G_R + f/2)`.
    pub c0: f64,
    /// Density constant `rho0 Omega^(2(m-1))`.
    pub c_i: f64,
    pub c_ii: f64,
    pub c_iii: f64,
    pub c_iv: f64,
    /// Fifth integral in its conserved form, `Q Omega^(2(m+1))`.
    pub c_v: f64,
    /// Fifth integral evaluated from the printed display.
    pub c_v_printed: Option<f64>,
    /// Trace constant `Omega^2 Bbar`.
    pub delta: f64,
    /// Constant of the first integral of the amplitude equation, evaluated
    /// from the state.
    pub k: f64,
    /// Flux amplitude `psi / Omega^(2(m-1))`.
    pub nu: f64,
    pub alpha: f64,
    pub f: f64,
    pub consistency: Consistency,
}

impl IntegralSet {
    /// All constants from a state without any consistency gate.
    pub fn evaluate(s: &DynState, p: &Params) -> Result<IntegralSet> {
        let om = s.omega;
        if !(om > 0.0) {
            return Err(Error::Domain {
                what: "Omega",
                value: om,
            });
        }
        let m = p.m;
        let om2 = om * om;
        let w2m = om.powf(2.0 * m);
        let bb = w2m * s.b;
        let bbs = w2m * s.b_s;
        let bbn = w2m * s.b_n;
        let gbs = om2 * s.g_s;
        let gbn = om2 * s.g_n;
        let c0 = om2 * (s.g_r + 0.5 * p.f);
        let c_i = s.rho0 * om.powf(2.0 * (m - 1.0));
        let nu = s.psi / om.powf(2.0 * (m - 1.0));
        let c_ii = bbs * bbs + bbn * bbn - 0.25 * bb * bb;
        let c_iii = gbs * gbs + gbn * gbn - p.alpha * bb;
        let c_iv = 2.0 * (bbn * gbs - bbs * gbn) - c0 * bb;
        let delta = om2 * bb;
        let g = s.g;
        let gr = s.g_r;
        let cross = bbs * gbs + bbn * gbn;
        let bracket = (gbs * gbs + gbn * gbn) / (om2 * om2) + 0.25 * g * g + gr * gr;
        let c_v = 2.0 * gr * (c_iv + c0 * bb) + 2.0 * g * cross
            - 4.0 * p.alpha * c_ii / om2
            - bb * om2 * bracket;
        let c_v_printed = if m == 3.0 {
            None
        } else {
            Some(
                2.0 * (gr + c0 * bb)
                    + 2.0 * g * cross
                    + 4.0 * p.alpha * c_ii / om2 * (m - 1.0) / (m - 3.0)
                    - bb * om2 * bracket,
            )
        };
        let omega_dot = 0.5 * g * om;
        let k = -(omega_dot * omega_dot + 0.25 * p.f * p.f * om2 + (c0 * c0 - c_iii) / om2
            - p.alpha * delta / (om2 * om2));

        let quadratic = c_iv * c_iv - 4.0 * c_ii * c_iii - 0.25 * delta * delta * p.f * p.f;
        let trace_balance = if p.f != 0.0 {
            delta + 2.0 * (c_v + p.f * c_iv) / (p.f * p.f)
        } else {
            0.0
        };
        let trace_rate = cross - delta * omega_dot / (2.0 * om);
        let k_relation = if delta != 0.0 {
            k - (2.0 * c0 * c_iv - 4.0 * p.alpha * c_ii) / delta
        } else {
            0.0
        };
        let flux_coupling = match p.branch {
            Branch::Constrained => p.alpha1 - p.matching_alpha1(delta),
            Branch::Transverse => p.alpha1,
        };
        let flux_amplitude = p.nu - nu;
        let consistency = Consistency {
            quadratic,
            trace_balance,
            trace_rate,
            k_relation,
            flux_coupling,
            flux_amplitude,
            ok: true,
        };
        let mut set = IntegralSet {
            c0,
            c_i,
            c_ii,
            c_iii,
            c_iv,
            c_v,
            c_v_printed,
            delta,
            k,
            nu,
            alpha: p.alpha,
            f: p.f,
            consistency,
        };
        set.consistency.ok = set.check(p).is_ok();
        Ok(set)
    }

    /// Gate the relations that must hold on the selected branch.
    pub fn check(&self, p: &Params) -> Result<()> {
        let c = &self.consistency;
        let scale = |xs: &[f64]| xs.iter().fold(1e-300_f64, |a, x| a.max(x.abs()));
        const TOL: f64 = 1e-9;
        let mut rels: Vec<(&'static str, f64, f64)> = vec![(
            "flux amplitude",
            c.flux_amplitude,
            scale(&[p.nu, self.nu, 1.0]),
        )];
        if p.branch == Branch::Constrained {
            let fd = 0.25 * self.delta * self.delta * p.f * p.f;
            rels.extend([
                (
                    "cIV^2 - 4 cII cIII = delta^2 f^2 / 4",
                    c.quadratic,
                    scale(&[self.c_iv * self.c_iv, 4.0 * self.c_ii * self.c_iii, fd]),
                ),
                (
                    "stationary trace constant",
                    c.trace_rate,
                    scale(&[self.delta, self.c_iv, self.c_ii.abs().sqrt()]),
                ),
                (
                    "trace constant balance",
                    c.trace_balance,
                    scale(&[self.delta, self.c_v / (p.f * p.f), self.c_iv / p.f]),
                ),
                (
                    "flux coupling",
                    c.flux_coupling,
                    scale(&[p.alpha1, p.matching_alpha1(self.delta)]),
                ),
            ]);
        }
        for (relation, residual, s) in rels {
            if !(residual.abs() <= TOL * s) {
                return Err(Error::Inconsistent { relation, residual });
            }
        }
        Ok(())
    }

    /// `(2 c0 cIV - 4 alpha cII) / delta`, the first-integral constant implied
    /// by the reduced system.
    pub fn k_from_constants(&self) -> f64 {
        (2.0 * self.c0 * self.c_iv - 4.0 * self.alpha * self.c_ii) / self.delta
    }

    /// The first-integral constant as printed, `(2 c0 cIV - 4 alpha cII delta) / delta^2`.
    pub fn k_printed(&self) -> f64 {
        (2.0 * self.c0 * self.c_iv - 4.0 * self.alpha * self.c_ii * self.delta)
            / (self.delta * self.delta)
    }
}

/// Constants of motion of an initial state, gated by the branch relations.
pub fn derive_constants(s0: &DynState, p: &Params) -> Result<IntegralSet> {
    let set = IntegralSet::evaluate(s0, p)?;
    set.check(p)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn demo_params() -> Params {
        Params {
            m: 4.0,
            f: 1.0,
            mu: 1.0,
            lambda_t: 0.5,
            alpha: 1.0,
            alpha0: -0.125,
            alpha1: 1.0,
            alpha2: 0.75,
            nu: 1.0,
            gamma: 2.0,
            branch: Branch::Constrained,
        }
    }

    #[test]
    fn demo_params_are_valid() {
        assert!(validate_params(&demo_params()).is_ok());
    }

    #[test]
    fn m_three_is_rejected_with_reason() {
        let p = Params {
            m: 3.0,
            alpha2: 2.0 / 3.0,
            ..demo_params()
        };
        let err = validate_params(&p).unwrap_err();
        assert!(matches!(err.violations[0], Violation::RejectM { .. }));
        assert!(err.to_string().contains("m-3"));
    }

    #[test]
    fn m_two_rejected_only_when_constrained() {
        let p = Params {
            m: 2.0,
            alpha2: 0.5,
            ..demo_params()
        };
        assert!(validate_params(&p).is_err());
        let t = Params {
            branch: Branch::Transverse,
            nu: 0.0,
            alpha1: 0.0,
            ..p
        };
        assert!(validate_params(&t).is_ok());
    }

    #[test]
    fn gamma_and_mu_rejected_together() {
        let p = Params {
            gamma: 1.4,
            mu: -1.0,
            alpha0: 0.125,
            ..demo_params()
        };
        let err = validate_params(&p).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RejectGamma { .. })));
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RejectMu { .. })));
    }

    #[test]
    fn alpha_relations_are_enforced() {
        let p = Params {
            alpha0: 0.0,
            ..demo_params()
        };
        assert!(matches!(
            validate_params(&p).unwrap_err().violations[0],
            Violation::Alpha0 { .. }
        ));
        let p = Params {
            alpha2: 1.0,
            ..demo_params()
        };
        assert!(matches!(
            validate_params(&p).unwrap_err().violations[0],
            Violation::Alpha2 { .. }
        ));
        let p = demo_params();
        assert_relative_eq!(p.matching_alpha2(), p.alpha2);
        assert_eq!(2.0 * epsilon0(&p) + p.mu * p.lambda_t * p.lambda_t, 0.0);
    }

    #[test]
    fn epsilon2_values() {
        let p = demo_params();
        assert_relative_eq!(epsilon2(1.0, &p).unwrap(), 0.75);
        assert_relative_eq!(epsilon2(2.0, &p).unwrap(), 12.0);
        let p0 = Params { alpha: 0.0, ..p };
        assert_eq!(epsilon2(1.0, &p0).unwrap(), 0.0);
        assert!(epsilon2(0.0, &p).is_err());
        assert!(epsilon2(-1.0, &p).is_err());
    }

    #[test]
    fn epsilon2_scaled_is_constant_in_omega() {
        let p = demo_params();
        for om in [0.3, 1.0, 1.7, 4.0] {
            let e = epsilon2(om, &p).unwrap() * om.powf(-2.0 * (p.m - 2.0));
            assert_relative_eq!(e, 0.75, max_relative = 1e-14);
        }
    }

    #[test]
    fn spin_and_density_constants() {
        let p = Params {
            branch: Branch::Transverse,
            nu: 0.0,
            alpha1: 0.0,
            ..demo_params()
        };
        let s = DynState {
            g_r: -0.5,
            rho0: 1.0,
            ..DynState::fixed_point()
        };
        let s = DynState { psi: 0.0, ..s };
        let ints = derive_constants(&s, &p).unwrap();
        assert_eq!(ints.c0, 0.0);
        assert_eq!(ints.c_i, 1.0);
    }

    #[test]
    fn second_integral_hand_value() {
        let p = demo_params();
        let s = DynState {
            b: 2.0,
            b_s: 3.0,
            b_n: 4.0,
            ..DynState::fixed_point()
        };
        let ints = IntegralSet::evaluate(&s, &p).unwrap();
        assert_eq!(ints.c_ii, 24.0);
    }

    #[test]
    fn matrices_round_trip() {
        let s = DynState {
            rho0: 0.7,
            b: -0.3,
            b_s: 0.11,
            b_n: -0.07,
            g: 0.2,
            g_n: 0.05,
            g_s: -0.13,
            g_r: 0.4,
            psi: 1.3,
            omega: 1.1,
        };
        let back = DynState::from_matrices(
            &s.velocity_gradient(),
            &s.shape_matrix(),
            s.rho0,
            s.psi,
            s.omega,
        );
        assert!(back.max_abs_diff(&s) < 1e-15);
        assert_relative_eq!(s.velocity_gradient().trace(), s.g);
    }

    #[test]
    fn inconsistent_constrained_state_is_reported() {
        let p = demo_params();
        let s = DynState {
            b: -0.5,
            g: 0.3,
            ..DynState::fixed_point()
        };
        match derive_constants(&s, &p) {
            Err(Error::Inconsistent { .. }) => {}
            other => panic!("expected Inconsistent, got {other:?}"),
        }
    }
}
