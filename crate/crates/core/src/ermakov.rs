//! Semi-axes of the density ellipse, the coupled oscillator system they
//! obey, and the irrotational reduction with its Ray–Reid invariant.

use serde::Serialize;

use crate::dynsys::{run_ode, sample_times, StateHistory};
use crate::error::{sqrt_checked, Error, Result};
use crate::exact::five_point_derivative;
use crate::model::{DynState, IntegralSet, Params};
use crate::ode::DenseTrajectory;

/// Semi-axes of the ellipse `F = 0` and their rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiAxes {
    pub axis_a: f64,
    pub axis_b: f64,
    pub d_axis_a: f64,
    pub d_axis_b: f64,
}

impl SemiAxes {
    /// `axis_a^2 + axis_b^2`, constant along exact solutions.
    pub fn sum_sq(&self) -> f64 {
        self.axis_a * self.axis_a + self.axis_b * self.axis_b
    }

    /// `axis_b * d_axis_a - d_axis_b * axis_a`.
    pub fn wronskian(&self) -> f64 {
        self.axis_b * self.d_axis_a - self.d_axis_b * self.axis_a
    }

    pub fn swapped(&self) -> Self {
        Self {
            axis_a: self.axis_b,
            axis_b: self.axis_a,
            d_axis_a: self.d_axis_b,
            d_axis_b: self.d_axis_a,
        }
    }
}

fn reality_conditions(ints: &IntegralSet) -> Result<()> {
    if !(ints.c_i > 0.0) {
        return Err(Error::Domain {
            what: "cI (must be > 0 for real semi-axes)",
            value: ints.c_i,
        });
    }
    if !(ints.c_ii < 0.0) {
        return Err(Error::Domain {
            what: "cII (must be < 0 for real semi-axes)",
            value: ints.c_ii,
        });
    }
    if !(ints.delta < 0.0) {
        return Err(Error::Domain {
            what: "delta (must be < 0 for real semi-axes)",
            value: ints.delta,
        });
    }
    Ok(())
}

/// Semi-axes as functions of the amplitude, with rates through `omega_dot`.
pub fn semi_axes(omega: f64, omega_dot: f64, ints: &IntegralSet) -> Result<SemiAxes> {
    reality_conditions(ints)?;
    let d = ints.delta;
    let o2 = omega * omega;
    let s = sqrt_checked("delta^2 + 4 cII Omega^4", d * d + 4.0 * ints.c_ii * o2 * o2)?;
    if s == 0.0 {
        return Err(Error::DenomZero {
            which: "delta^2 + 4 cII Omega^4",
            omega,
        });
    }
    let kk = (-ints.c_i / (2.0 * ints.c_ii)).sqrt();
    let ra = -d - s;
    let rb = -d + s;
    if !(ra > 0.0) {
        return Err(Error::Domain {
            what: "-delta - sqrt(delta^2 + 4 cII Omega^4) (degenerate circle)",
            value: ra,
        });
    }
    let s_dot = 8.0 * ints.c_ii * o2 * omega * omega_dot / s;
    Ok(SemiAxes {
        axis_a: kk * ra.sqrt(),
        axis_b: kk * rb.sqrt(),
        d_axis_a: -kk * s_dot / (2.0 * ra.sqrt()),
        d_axis_b: kk * s_dot / (2.0 * rb.sqrt()),
    })
}

/// Semi-axes read off the eigenvalues of the shape matrix:
/// `axis^2 = -rho0 / eigenvalue`. The smaller eigenvalue gives `axis_a`.
pub fn semi_axes_from_ellipse(s: &DynState) -> Result<(f64, f64)> {
    let root = s.b_s.hypot(s.b_n);
    let hi = 0.5 * s.b + root;
    let lo = 0.5 * s.b - root;
    if !(hi < 0.0) {
        return Err(Error::Domain {
            what: "largest shape eigenvalue (ellipse is unbounded)",
            value: hi,
        });
    }
    Ok(((-s.rho0 / lo).sqrt(), (-s.rho0 / hi).sqrt()))
}

/// The amplitude recovered from the axis ratio.
pub fn omega_from_axes(sa: &SemiAxes, ints: &IntegralSet) -> f64 {
    let r = sa.axis_b / sa.axis_a + sa.axis_a / sa.axis_b;
    (-ints.delta * ints.delta / ints.c_ii).powf(0.25) / r.sqrt()
}

/// Square of the Wronskian `Z` as a function of the amplitude. It is
/// negative beyond the turning points of the amplitude.
pub fn z_squared(omega: f64, ints: &IntegralSet) -> f64 {
    let d = ints.delta;
    let o2 = omega * omega;
    let den = d * d + 4.0 * ints.c_ii * o2 * o2;
    let cross = ints.c0 * d + ints.c_iv * o2;
    let num = den * (ints.alpha * d + ints.c_iii * o2) - o2 * cross * cross;
    4.0 * ints.c_i * ints.c_i * num / (o2 * -ints.c_ii * den)
}

/// `Z` from its closed form in the amplitude: the principal root, so it
/// carries no sign. Tiny negative values from cancellation are clamped.
pub fn z_closed_form(omega: f64, ints: &IntegralSet) -> f64 {
    z_squared(omega, ints).max(0.0).sqrt()
}

/// Signed `Z` obtained by differentiating the semi-axis closed forms:
/// `-2 cI Omega delta Omega' / (S sqrt(-cII))`.
pub fn z_signed(omega: f64, omega_dot: f64, ints: &IntegralSet) -> f64 {
    let d = ints.delta;
    let o2 = omega * omega;
    let s = (d * d + 4.0 * ints.c_ii * o2 * o2).sqrt();
    -2.0 * ints.c_i * omega * d * omega_dot / (s * (-ints.c_ii).sqrt())
}

fn axis_ratio(omega: f64, ints: &IntegralSet) -> Result<f64> {
    let sa = semi_axes(omega, 0.0, ints)?;
    Ok(sa.axis_a / sa.axis_b)
}

/// `Z Z'` where the prime is the derivative with respect to the axis ratio
/// `axis_a / axis_b`, computed as `(dZ^2/dOmega) / (2 dr/dOmega)`.
pub fn z_times_z_prime(omega: f64, ints: &IntegralSet) -> Result<f64> {
    let h = 1e-3 * omega;
    let dz2 = five_point_derivative(|o| Ok([z_squared(o, ints)]), omega, h)?[0];
    let dr = five_point_derivative(|o| Ok([axis_ratio(o, ints)?]), omega, h)?[0];
    Ok(0.5 * dz2 / dr)
}

/// The constant for which the semi-axis oscillator system holds:
/// `-f^2 (axis_a^2 + axis_b^2)^2 = -f^2 (cI delta / cII)^2`.
pub fn ermakov_constant(ints: &IntegralSet) -> f64 {
    let sum = ints.c_i * ints.delta / ints.c_ii;
    -ints.f * ints.f * sum * sum
}

/// Right-hand sides of the coupled oscillator pair with constant `k`,
/// and the left-hand side oscillator terms moved across:
/// returns the two residuals given second derivatives.
pub fn ermakov_equation_residuals(
    sa: &SemiAxes,
    dd_a: f64,
    dd_b: f64,
    z: f64,
    zz_prime: f64,
    k: f64,
    f: f64,
) -> (f64, f64) {
    let (a, b) = (sa.axis_a, sa.axis_b);
    let q = b / a;
    let p = a / b;
    let w = z * z + 0.25 * k;
    let rhs_a = (zz_prime / (1.0 + q * q) - q * w / ((1.0 + q * q) * (1.0 + q * q))) / (a * a * b);
    let rhs_b = (-zz_prime / (1.0 + q * q) - p * w / ((1.0 + p * p) * (1.0 + p * p))) / (a * b * b);
    (
        dd_a + 0.25 * f * f * a - rhs_a,
        dd_b + 0.25 * f * f * b - rhs_b,
    )
}

/// Hamiltonian of the semi-axis system.
pub fn hamiltonian_value(sa: &SemiAxes, z: f64, k: f64, f: f64) -> f64 {
    let sum = sa.sum_sq();
    0.5 * (sa.d_axis_a * sa.d_axis_a + sa.d_axis_b * sa.d_axis_b)
        - (z * z - 0.25 * f * f * sum * sum + 0.25 * k) / (2.0 * sum)
}

/// The value the Hamiltonian is claimed to take: `-f^2 cI cIV / (4 cII)`.
pub fn hamiltonian_claimed(ints: &IntegralSet) -> f64 {
    -0.25 * ints.f * ints.f * ints.c_i * ints.c_iv / ints.c_ii
}

/// Residuals of the semi-axis system along a history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErmakovReport {
    pub k: f64,
    pub samples: usize,
    pub max_residual_a: f64,
    pub max_residual_b: f64,
    pub t_at_max: f64,
    /// Largest mismatch between `Z^2` from the axes and the closed form,
    /// relative to the largest `Z^2` seen. Squares are compared because the
    /// closed form cancels to zero at amplitude turning points, where its
    /// root would lose half the digits.
    pub z_squared_mismatch: f64,
    /// Largest mismatch between `Z` from the axes and its signed form.
    pub z_signed_mismatch: f64,
    /// Largest mismatch between closed-form axes and shape-matrix axes.
    pub axes_mismatch: f64,
    /// Largest mismatch between the state amplitude and the one recovered
    /// from the axis ratio.
    pub omega_mismatch: f64,
    pub hamiltonian_initial: f64,
    pub hamiltonian_max_drift: f64,
}

impl ErmakovReport {
    pub fn max_residual(&self) -> f64 {
        self.max_residual_a.max(self.max_residual_b)
    }
}

fn omega_pair(s: &DynState) -> (f64, f64) {
    (s.omega, 0.5 * s.g * s.omega)
}

/// Evaluate the semi-axis system with constant `k` at `samples` interior
/// times. Second derivatives are five-point differences, step `span / 2000`,
/// of the closed-form axis rates.
pub fn ermakov_residuals(
    hist: &dyn StateHistory,
    ints: &IntegralSet,
    k: f64,
    samples: usize,
) -> Result<ErmakovReport> {
    let (t0, t1) = hist.span();
    let h = (t1 - t0) / 2000.0;
    let f = hist.params().f;
    let rates_at = |t: f64| -> Result<[f64; 2]> {
        let (om, od) = omega_pair(&hist.state(t)?);
        let sa = semi_axes(om, od, ints)?;
        Ok([sa.d_axis_a, sa.d_axis_b])
    };
    let mut rep = ErmakovReport {
        k,
        samples,
        max_residual_a: 0.0,
        max_residual_b: 0.0,
        t_at_max: t0,
        z_squared_mismatch: 0.0,
        z_signed_mismatch: 0.0,
        axes_mismatch: 0.0,
        omega_mismatch: 0.0,
        hamiltonian_initial: f64::NAN,
        hamiltonian_max_drift: 0.0,
    };
    let (mut z2_err, mut z2_max) = (0.0_f64, 0.0_f64);
    for t in sample_times((t0 + 2.0 * h, t1 - 2.0 * h), samples) {
        let s = hist.state(t)?;
        let (om, od) = omega_pair(&s);
        let sa = semi_axes(om, od, ints)?;
        let dd = five_point_derivative(rates_at, t, h)?;
        let z = sa.wronskian();
        let zz = z_times_z_prime(om, ints)?;
        let (ra, rb) = ermakov_equation_residuals(&sa, dd[0], dd[1], z, zz, k, f);
        if ra.abs().max(rb.abs()) > rep.max_residual_a.max(rep.max_residual_b) {
            rep.t_at_max = t;
        }
        rep.max_residual_a = rep.max_residual_a.max(ra.abs());
        rep.max_residual_b = rep.max_residual_b.max(rb.abs());
        z2_err = z2_err.max((z * z - z_squared(om, ints)).abs());
        z2_max = z2_max.max(z * z);
        rep.z_signed_mismatch = rep
            .z_signed_mismatch
            .max((z - z_signed(om, od, ints)).abs());
        let (ea, eb) = semi_axes_from_ellipse(&s)?;
        rep.axes_mismatch = rep
            .axes_mismatch
            .max((ea - sa.axis_a).abs())
            .max((eb - sa.axis_b).abs());
        rep.omega_mismatch = rep
            .omega_mismatch
            .max((omega_from_axes(&sa, ints) - om).abs());
        let hv = hamiltonian_value(&sa, z, k, f);
        if rep.hamiltonian_initial.is_nan() {
            rep.hamiltonian_initial = hv;
        }
        rep.hamiltonian_max_drift = rep
            .hamiltonian_max_drift
            .max((hv - rep.hamiltonian_initial).abs());
    }
    rep.z_squared_mismatch = if z2_max > 0.0 {
        z2_err / z2_max
    } else {
        z2_err
    };
    Ok(rep)
}

/// Axes and rates of the irrotational reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrrotState {
    pub alpha_axis: f64,
    pub beta_axis: f64,
    pub d_alpha_axis: f64,
    pub d_beta_axis: f64,
}

impl IrrotState {
    pub fn to_array(&self) -> [f64; 4] {
        [
            self.alpha_axis,
            self.beta_axis,
            self.d_alpha_axis,
            self.d_beta_axis,
        ]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            alpha_axis: a[0],
            beta_axis: a[1],
            d_alpha_axis: a[2],
            d_beta_axis: a[3],
        }
    }
}

/// `(alpha'', beta'') = (c1 / (alpha^2 beta), c2 / (alpha beta^2))`.
pub fn irrotational_rhs(s: &IrrotState, c_star_i: f64, c_star_ii: f64) -> Result<[f64; 2]> {
    let (a, b) = (s.alpha_axis, s.beta_axis);
    if !(a > 0.0) {
        return Err(Error::Domain {
            what: "alpha axis",
            value: a,
        });
    }
    if !(b > 0.0) {
        return Err(Error::Domain {
            what: "beta axis",
            value: b,
        });
    }
    Ok([c_star_i / (a * a * b), c_star_ii / (a * b * b)])
}

/// Ray–Reid invariant of the irrotational pair.
pub fn ray_reid_invariant(s: &IrrotState, c_star_i: f64, c_star_ii: f64) -> f64 {
    let w = s.d_alpha_axis * s.beta_axis - s.alpha_axis * s.d_beta_axis;
    0.5 * w * w + c_star_i * s.beta_axis / s.alpha_axis + c_star_ii * s.alpha_axis / s.beta_axis
}

/// `(cI beta'^2 + cII alpha'^2)/2 + c1 c2 / (alpha beta)`, with the
/// unstarred constants in the kinetic part as printed. Conserved only when
/// the kinetic weights happen to equal the starred constants.
pub fn irrotational_hamiltonian_printed(
    s: &IrrotState,
    c_i: f64,
    c_ii: f64,
    c_star_i: f64,
    c_star_ii: f64,
) -> f64 {
    0.5 * (c_i * s.d_beta_axis * s.d_beta_axis + c_ii * s.d_alpha_axis * s.d_alpha_axis)
        + c_star_i * c_star_ii / (s.alpha_axis * s.beta_axis)
}

/// `(c2 alpha'^2 + c1 beta'^2)/2 + c1 c2 / (alpha beta)`, which is
/// conserved by the irrotational pair.
pub fn irrotational_hamiltonian(s: &IrrotState, c_star_i: f64, c_star_ii: f64) -> f64 {
    0.5 * (c_star_ii * s.d_alpha_axis * s.d_alpha_axis + c_star_i * s.d_beta_axis * s.d_beta_axis)
        + c_star_i * c_star_ii / (s.alpha_axis * s.beta_axis)
}

/// Starred coupling constants of the irrotational pair.
pub fn cstar_constants(
    c_i: f64,
    c_ii: f64,
    c_iii: f64,
    c_iii_star: f64,
    alpha: f64,
    m: f64,
) -> Result<(f64, f64)> {
    if m == 1.0 {
        return Err(Error::RejectM {
            m,
            reason: "exponent (m-2)/(m-1) is singular",
        });
    }
    if c_iii == 0.0 {
        return Err(Error::Domain {
            what: "cIII",
            value: c_iii,
        });
    }
    let base = c_iii_star / c_iii;
    let expo = (m - 2.0) / (m - 1.0);
    if base < 0.0 && expo.fract() != 0.0 {
        return Err(Error::Domain {
            what: "cIII* / cIII under a fractional power",
            value: base,
        });
    }
    let w = -2.0 * alpha * base.powf(expo);
    Ok((w * c_i, w * c_ii))
}

/// Constants of the irrotational reduction: the two ellipse constants and
/// the density constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrrotConstants {
    pub c_i: f64,
    pub c_ii: f64,
    pub c_iii: f64,
}

/// Full state of the irrotational subclass. It lives on the transverse
/// branch without rotation, and the amplitude is normalised so that
/// `Omega^2 = alpha beta`.
pub fn embed_irrotational(s: &IrrotState, k: &IrrotConstants, p: &Params) -> Result<DynState> {
    if p.f != 0.0 {
        return Err(Error::Domain {
            what: "f (irrotational reduction needs f = 0)",
            value: p.f,
        });
    }
    if p.nu != 0.0 {
        return Err(Error::Domain {
            what: "nu (irrotational reduction needs nu = 0)",
            value: p.nu,
        });
    }
    irrotational_rhs(s, 0.0, 0.0)?;
    let (al, be) = (s.alpha_axis, s.beta_axis);
    let m = p.m;
    let u1 = s.d_alpha_axis / al;
    let v2 = s.d_beta_axis / be;
    let a = k.c_i * al.powf(-(m + 1.0)) * be.powf(1.0 - m);
    let c = k.c_ii * al.powf(1.0 - m) * be.powf(-(m + 1.0));
    Ok(DynState {
        rho0: k.c_iii * (al * be).powf(1.0 - m),
        b: a + c,
        b_s: 0.0,
        b_n: 0.5 * (a - c),
        g: u1 + v2,
        g_n: 0.5 * (u1 - v2),
        g_s: 0.0,
        g_r: 0.0,
        psi: 0.0,
        omega: (al * be).sqrt(),
    })
}

/// Trajectory of the irrotational pair.
#[derive(Debug, Clone)]
pub struct IrrotTrajectory {
    dense: DenseTrajectory<4>,
    pub c_star_i: f64,
    pub c_star_ii: f64,
}

impl IrrotTrajectory {
    pub fn times(&self) -> &[f64] {
        self.dense.times()
    }

    pub fn eval(&self, t: f64) -> Option<IrrotState> {
        self.dense.eval(t).map(IrrotState::from_array)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.dense.t_start(), self.dense.t_end())
    }
}

pub fn integrate_irrotational(
    s0: &IrrotState,
    c_star_i: f64,
    c_star_ii: f64,
    t_end: f64,
    tol: f64,
) -> Result<IrrotTrajectory> {
    let dense = run_ode(
        |_t, y: &[f64; 4]| {
            let [aa, bb] = irrotational_rhs(&IrrotState::from_array(*y), c_star_i, c_star_ii)?;
            Ok([y[2], y[3], aa, bb])
        },
        0.0,
        s0.to_array(),
        t_end,
        tol,
        0,
    )?;
    Ok(IrrotTrajectory {
        dense,
        c_star_i,
        c_star_ii,
    })
}

/// Drift of the irrotational invariants over the accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrrotDrift {
    pub ray_reid_initial: f64,
    pub ray_reid_max_rel: f64,
    pub hamiltonian_max_rel: f64,
    pub hamiltonian_printed_max_rel: f64,
}

pub fn irrotational_drift(traj: &IrrotTrajectory, k: &IrrotConstants) -> IrrotDrift {
    let (c1, c2) = (traj.c_star_i, traj.c_star_ii);
    let states: Vec<IrrotState> = traj
        .dense
        .states()
        .iter()
        .map(|y| IrrotState::from_array(*y))
        .collect();
    let rel = |g: &dyn Fn(&IrrotState) -> f64| {
        let v0 = g(&states[0]);
        let scale = v0.abs().max(f64::MIN_POSITIVE);
        states
            .iter()
            .map(|s| (g(s) - v0).abs() / scale)
            .fold(0.0, f64::max)
    };
    IrrotDrift {
        ray_reid_initial: ray_reid_invariant(&states[0], c1, c2),
        ray_reid_max_rel: rel(&|s| ray_reid_invariant(s, c1, c2)),
        hamiltonian_max_rel: rel(&|s| irrotational_hamiltonian(s, c1, c2)),
        hamiltonian_printed_max_rel: rel(&|s| {
            irrotational_hamiltonian_printed(s, k.c_i, k.c_ii, c1, c2)
        }),
    }
}

/// `(a alpha^(m+1) beta^(m-1) - cI, c alpha^(m-1) beta^(m+1) - cII,
///   rho0 (alpha beta)^(m-1) - cIII)` for a full state against axes.
pub fn power_law_residuals(
    s: &DynState,
    axes: &IrrotState,
    k: &IrrotConstants,
    m: f64,
) -> [f64; 3] {
    let e = s.shape_matrix();
    let (al, be) = (axes.alpha_axis, axes.beta_axis);
    [
        e[(0, 0)] * al.powf(m + 1.0) * be.powf(m - 1.0) - k.c_i,
        e[(1, 1)] * al.powf(m - 1.0) * be.powf(m + 1.0) - k.c_ii,
        s.rho0 * (al * be).powf(m - 1.0) - k.c_iii,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::integrate;
    use crate::exact::tests::{demo_params, demo_spec};
    use crate::exact::ExactSolution;
    use crate::model::Branch;
    use crate::reduced::tests::ints_with;
    use approx::assert_relative_eq;

    #[test]
    fn hand_evaluated_axis() {
        let mut ints = ints_with(0.0, -1.0, 1.0, 0.0, -2.0);
        ints.c_i = 1.0;
        let om = 0.5f64.powf(0.25);
        let sa = semi_axes(om, 0.0, &ints).unwrap();
        assert_relative_eq!(
            sa.axis_a,
            0.5f64.sqrt() * (2.0 - 2f64.sqrt()).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sa.sum_sq(),
            ints.c_i * ints.delta / ints.c_ii,
            max_relative = 1e-14
        );
        assert_relative_eq!(omega_from_axes(&sa, &ints), om, max_relative = 1e-14);
    }

    #[test]
    fn circle_limit_is_rejected() {
        let mut ints = ints_with(0.0, -1e-300, 1.0, 0.0, -2.0);
        ints.c_i = 1.0;
        assert!(semi_axes(1.0, 0.0, &ints).is_err());
        ints.c_ii = 0.0;
        assert!(matches!(
            semi_axes(1.0, 0.0, &ints),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn static_circle_hamiltonian_vanishes() {
        let sa = SemiAxes {
            axis_a: 1.0,
            axis_b: 1.0,
            d_axis_a: 0.0,
            d_axis_b: 0.0,
        };
        assert_eq!(hamiltonian_value(&sa, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn hamiltonian_swap_symmetry() {
        let sa = SemiAxes {
            axis_a: 1.3,
            axis_b: 0.4,
            d_axis_a: -0.2,
            d_axis_b: 0.7,
        };
        let z = sa.wronskian();
        assert_eq!(sa.swapped().wronskian(), -z);
        assert_relative_eq!(
            hamiltonian_value(&sa, z, 0.3, 1.1),
            hamiltonian_value(&sa.swapped(), -z, 0.3, 1.1),
            max_relative = 1e-15
        );
    }

    #[test]
    fn demo_axes_obey_oscillator_pair() {
        let sol = ExactSolution::new(&demo_spec(), &demo_params(), 10.0, 1e-12).unwrap();
        let k_e = ermakov_constant(&sol.ints);
        let rep = ermakov_residuals(&sol, &sol.ints, k_e, 200).unwrap();
        assert!(rep.max_residual() < 1e-5, "{rep:?}");
        assert!(rep.z_squared_mismatch < 1e-8, "{rep:?}");
        assert!(rep.z_signed_mismatch < 1e-8, "{rep:?}");
        assert!(rep.axes_mismatch < 1e-10, "{rep:?}");
        assert!(rep.omega_mismatch < 1e-12, "{rep:?}");
        assert!(rep.hamiltonian_max_drift < 1e-7 * rep.hamiltonian_initial.abs());
        let sum = sol.ints.c_i * sol.ints.delta / sol.ints.c_ii;
        assert_relative_eq!(rep.hamiltonian_initial, 0.25 * sum, max_relative = 1e-7);
        let rep = ermakov_residuals(&sol, &sol.ints, sol.ints.k, 200).unwrap();
        assert!(rep.max_residual() > 1e-3);
    }

    #[test]
    fn irrotational_hand_values() {
        let s = IrrotState {
            alpha_axis: 1.0,
            beta_axis: 1.0,
            d_alpha_axis: 0.0,
            d_beta_axis: 0.0,
        };
        assert_eq!(irrotational_rhs(&s, 2.0, 3.0).unwrap(), [2.0, 3.0]);
        assert_eq!(irrotational_rhs(&s, 0.0, 0.0).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn cstar_examples() {
        assert_eq!(
            cstar_constants(1.0, 2.0, 3.0, 3.0, 1.0, 4.0).unwrap(),
            (-2.0, -4.0)
        );
        assert_eq!(
            cstar_constants(1.0, 2.0, 3.0, 5.0, 0.0, 4.0).unwrap().0,
            0.0
        );
        let (c1, _) = cstar_constants(1.0, 1.0, 1.0, 4.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(c1, -4.0, max_relative = 1e-15);
        assert!(cstar_constants(1.0, 1.0, 1.0, -4.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn ray_reid_conserved_and_printed_hamiltonian_measured() {
        let s0 = IrrotState {
            alpha_axis: 1.2,
            beta_axis: 0.8,
            d_alpha_axis: 0.1,
            d_beta_axis: -0.3,
        };
        let k = IrrotConstants {
            c_i: -0.4,
            c_ii: -0.9,
            c_iii: 1.0,
        };
        let (c1, c2) = cstar_constants(k.c_i, k.c_ii, k.c_iii, k.c_iii, 1.0, 4.0).unwrap();
        let tr = integrate_irrotational(&s0, c1, c2, 10.0, 1e-11).unwrap();
        let d = irrotational_drift(&tr, &k);
        assert!(d.ray_reid_max_rel < 1e-9, "{d:?}");
        assert!(d.hamiltonian_max_rel < 1e-9, "{d:?}");
        assert!(d.hamiltonian_printed_max_rel > 1e-6, "{d:?}");
    }

    #[test]
    fn irrotational_subclass_solves_full_system() {
        let p = Params {
            f: 0.0,
            nu: 0.0,
            alpha1: 0.0,
            branch: Branch::Transverse,
            ..demo_params()
        };
        let s0 = IrrotState {
            alpha_axis: 1.25,
            beta_axis: 0.8,
            d_alpha_axis: 0.1,
            d_beta_axis: -0.2,
        };
        let k = IrrotConstants {
            c_i: -0.4,
            c_ii: -0.9,
            c_iii: 1.3,
        };
        let (c1, c2) = cstar_constants(k.c_i, k.c_ii, k.c_iii, k.c_iii, p.alpha, p.m).unwrap();
        let irr = integrate_irrotational(&s0, c1, c2, 5.0, 1e-12).unwrap();
        let full = integrate(&embed_irrotational(&s0, &k, &p).unwrap(), &p, 5.0, 1e-12).unwrap();
        for t in sample_times((0.0, 5.0), 41) {
            let ax = irr.eval(t).unwrap();
            let built = embed_irrotational(&ax, &k, &p).unwrap();
            let s = full.state_at(t).unwrap();
            assert!(built.max_abs_diff(&s) < 1e-8, "t = {t}");
            for r in power_law_residuals(&s, &ax, &k, p.m) {
                assert!(r.abs() < 1e-8, "t = {t}: {r}");
            }
        }
    }
}
