//! Gauge-transformed matrix form of the dynamics, the reparametrised time,
//! and checks of the Lax pair built from it.

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::Serialize;

use crate::dynsys::StateHistory;
use crate::error::{Error, Result};
use crate::model::{pressure_coupling, DynState};

/// Rotation generator `[[0, -1], [1, 0]]`.
pub fn rotation_generator() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn commutator(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix2<f64> {
    a * b - b * a
}

/// Conjugate by a rotation through `f (t - t_origin) / 2` and shift the
/// velocity gradient by `(f/2) P`.
pub fn gauge_transform(
    l: &Matrix2<f64>,
    e: &Matrix2<f64>,
    f: f64,
    t: f64,
    t_origin: f64,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let d = rotation(0.5 * f * (t - t_origin));
    let dt = d.transpose();
    (d * l * dt + 0.5 * f * rotation_generator(), d * e * dt)
}

/// Scaled, trace-free matrices entering the Lax pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixPair {
    /// Trace-free part of `Omega^2 Ltilde`.
    pub lstar: Matrix2<f64>,
    /// `P Ebar`.
    pub qbar: Matrix2<f64>,
    /// `Omega^(2m) Etilde`.
    pub ebar: Matrix2<f64>,
    /// Trace of `Omega^2 Ltilde`.
    pub trace_lbar: f64,
    pub tau: f64,
}

pub fn scaled_pair(
    lt: &Matrix2<f64>,
    et: &Matrix2<f64>,
    omega: f64,
    m: f64,
    tau: f64,
) -> Result<MatrixPair> {
    if !(omega > 0.0) {
        return Err(Error::Domain {
            what: "Omega",
            value: omega,
        });
    }
    let lbar = lt * (omega * omega);
    let tr = lbar.trace();
    let half_diff = 0.5 * (lbar[(0, 0)] - lbar[(1, 1)]);
    let lstar = Matrix2::new(half_diff, lbar[(0, 1)], lbar[(1, 0)], -half_diff);
    let ebar = et * omega.powf(2.0 * m);
    Ok(MatrixPair {
        lstar,
        qbar: rotation_generator() * ebar,
        ebar,
        trace_lbar: tr,
        tau,
    })
}

/// `(L(lambda), M(lambda)) = (L* + lambda P, Q + lambda L* + lambda^2 P)`.
pub fn lax_matrices(mp: &MatrixPair, lambda_spec: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let p = rotation_generator();
    (
        mp.lstar + p * lambda_spec,
        mp.qbar + mp.lstar * lambda_spec + p * (lambda_spec * lambda_spec),
    )
}

fn simpson<F: Fn(f64) -> Result<f64>>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = g(0.5 * (a + m))?;
    let rm = g(0.5 * (m + b))?;
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(g, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(g, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson quadrature of `g` over `[a, b]` to relative tolerance
/// `rtol`.
pub fn adaptive_simpson<F: Fn(f64) -> Result<f64>>(g: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (g(a)?, g(0.5 * (a + b))?, g(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(
        &g,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rtol * whole.abs().max(f64::MIN_POSITIVE),
        40,
    )
}

/// Monotone map from physical time to `tau = integral of Omega^-2 dt`.
pub struct TauMap<'a> {
    omega: Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    rtol: f64,
}

impl<'a> TauMap<'a> {
    /// Tabulate over `segments` equal pieces of `[t0, t1]`.
    pub fn new<F>(omega: F, t0: f64, t1: f64, segments: usize, rtol: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync + 'a,
    {
        let segments = segments.max(1);
        let knots: Vec<f64> = (0..=segments)
            .map(|i| {
                if i == segments {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / segments as f64
                }
            })
            .collect();
        let map = Self {
            omega: Box::new(omega),
            knots,
            cumulative: Vec::new(),
            rtol,
        };
        let mut cumulative = vec![0.0];
        for w in map.knots.windows(2) {
            let piece = map.integrate(w[0], w[1])?;
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        Ok(Self { cumulative, ..map })
    }

    fn rate(&self, t: f64) -> Result<f64> {
        let om = (self.omega)(t)?;
        if !(om > 0.0) {
            return Err(Error::Domain {
                what: "Omega",
                value: om,
            });
        }
        Ok(1.0 / (om * om))
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        adaptive_simpson(|t| self.rate(t), a, b, self.rtol)
    }

    pub fn t_start(&self) -> f64 {
        self.knots[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn tau_end(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn span_error(&self, t: f64) -> Error {
        Error::OutOfSpan {
            t,
            t0: self.t_start(),
            t1: self.t_end(),
        }
    }

    pub fn tau(&self, t: f64) -> Result<f64> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return Err(self.span_error(t));
        }
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => return Ok(self.cumulative[i]),
            Err(i) => i - 1,
        };
        Ok(self.cumulative[i] + self.integrate(self.knots[i], t)?)
    }

    /// Inverse map by Newton iteration inside the bracketing segment.
    pub fn t_of_tau(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0 && tau <= self.tau_end()) {
            return Err(Error::OutOfSpan {
                t: tau,
                t0: 0.0,
                t1: self.tau_end(),
            });
        }
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&tau)) {
            Ok(i) => return Ok(self.knots[i]),
            Err(i) => i - 1,
        };
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        let (c0, c1) = (self.cumulative[i], self.cumulative[i + 1]);
        let mut t = lo + (hi - lo) * (tau - c0) / (c1 - c0);
        for _ in 0..50 {
            let g = c0 + self.integrate(lo, t)? - tau;
            let step = g / self.rate(t)?;
            t = (t - step).clamp(lo, hi);
            if step.abs() <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        Ok(t)
    }
}

/// Options for the Lax-pair checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaxOptions {
    pub lambdas: Vec<f64>,
    pub tau_points: usize,
    /// Time at which the gauge rotation is the identity.
    pub gauge_origin: f64,
}

impl Default for LaxOptions {
    fn default() -> Self {
        Self {
            lambdas: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            tau_points: 1000,
            gauge_origin: 0.0,
        }
    }
}

/// Results for one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRow {
    pub lambda: f64,
    /// Largest Frobenius norm of `M' + [M, L]`.
    pub max_residual: f64,
    pub det_initial: f64,
    pub det_max_rel_drift: f64,
    pub trace_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaxReport {
    pub tau_points: usize,
    pub tau_end: f64,
    pub rows: Vec<LambdaRow>,
    /// Largest norm of `Q' + [Q, L*]`.
    pub shape_component_max: f64,
    /// Largest norm of `L*' + [Q, P]`.
    pub rate_component_max: f64,
    /// Largest norms of the constant, linear and quadratic coefficients of a
    /// least-squares quadratic fit in the spectral parameter.
    pub fit_coefficient_max: [f64; 3],
    /// Largest residual of the scalar equation for `1/Omega` in `tau`.
    pub sigma_max: f64,
    /// Largest residual of the trace equation in physical time.
    pub trace_equation_max: f64,
    pub max_residual: f64,
}

fn pair_at(
    hist: &dyn StateHistory,
    t: f64,
    tau: f64,
    origin: f64,
) -> Result<(MatrixPair, DynState)> {
    let s = hist.state(t)?;
    let p = hist.params();
    let (lt, et) = gauge_transform(&s.velocity_gradient(), &s.shape_matrix(), p.f, t, origin);
    Ok((scaled_pair(&lt, &et, s.omega, p.m, tau)?, s))
}

fn d1<T>(v: &[T], i: usize, h: f64) -> T
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    ((v[i - 2] - v[i + 2]) * (1.0 / 12.0) + (v[i + 1] - v[i - 1]) * (8.0 / 12.0)) * (1.0 / h)
}

fn d2(v: &[f64], i: usize, h: f64) -> f64 {
    (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h * h)
}

/// Compatibility, isospectrality and scalar-reduction checks on a uniform
/// `tau` grid. The matrix pair assumes unit pressure amplitude.
pub fn lax_checks(hist: &dyn StateHistory, opts: &LaxOptions) -> Result<LaxReport> {
    let p = hist.params();
    if p.alpha != 1.0 {
        return Err(Error::Domain {
            what: "alpha (the matrix pair assumes alpha = 1)",
            value: p.alpha,
        });
    }
    let (t0, t1) = hist.span();
    let n = opts.tau_points.max(5);
    let map = TauMap::new(|t| hist.state(t).map(|s| s.omega), t0, t1, n, 1e-12)?;
    let tau_end = map.tau_end();
    let h = tau_end / (n - 1) as f64;
    let mut pairs = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for i in 0..n {
        let tau = h * i as f64;
        let t = if i == n - 1 { t1 } else { map.t_of_tau(tau)? };
        let (mp, s) = pair_at(hist, t, tau, opts.gauge_origin)?;
        pairs.push(mp);
        states.push(s);
        times.push(t);
    }
    let pm = rotation_generator();
    let lstars: Vec<Matrix2<f64>> = pairs.iter().map(|x| x.lstar).collect();
    let qbars: Vec<Matrix2<f64>> = pairs.iter().map(|x| x.qbar).collect();
    let sigmas: Vec<f64> = states.iter().map(|s| 1.0 / s.omega).collect();
    let traces: Vec<f64> = pairs.iter().map(|x| x.trace_lbar).collect();

    let mut rows: Vec<LambdaRow> = opts
        .lambdas
        .iter()
        .map(|&lambda| {
            let det0 = lax_matrices(&pairs[0], lambda).1.determinant();
            LambdaRow {
                lambda,
                max_residual: 0.0,
                det_initial: det0,
                det_max_rel_drift: 0.0,
                trace_max_abs: 0.0,
            }
        })
        .collect();
    for mp in &pairs {
        for row in rows.iter_mut() {
            let mm = lax_matrices(mp, row.lambda).1;
            let scale = row.det_initial.abs().max(f64::MIN_POSITIVE);
            row.det_max_rel_drift = row
                .det_max_rel_drift
                .max((mm.determinant() - row.det_initial).abs() / scale);
            row.trace_max_abs = row.trace_max_abs.max(mm.trace().abs());
        }
    }

    let mut shape_max = 0.0_f64;
    let mut rate_max = 0.0_f64;
    let mut sigma_max = 0.0_f64;
    let mut trace_eq_max = 0.0_f64;
    let mut fit_max = [0.0_f64; 3];
    let f = p.f;
    let m = p.m;
    for i in 2..n - 2 {
        let mp = &pairs[i];
        let r0 = d1(&qbars, i, h) + commutator(&mp.qbar, &mp.lstar);
        let r1 = d1(&lstars, i, h) + commutator(&mp.qbar, &pm);
        shape_max = shape_max.max(r0.norm());
        rate_max = rate_max.max(r1.norm());
        let mut residuals = Vec::with_capacity(rows.len());
        for row in rows.iter_mut() {
            let (lop, mop) = lax_matrices(mp, row.lambda);
            let dm = d1(&qbars, i, h) + d1(&lstars, i, h) * row.lambda;
            let r = dm + commutator(&mop, &lop);
            row.max_residual = row.max_residual.max(r.norm());
            residuals.push((row.lambda, r));
        }
        if residuals.len() >= 3 {
            let coeffs = quadratic_fit(&residuals);
            for (k, c) in coeffs.iter().enumerate() {
                fit_max[k] = fit_max[k].max(c.norm());
            }
        }

        let om = states[i].omega;
        let sig = sigmas[i];
        let sigma_res = d2(&sigmas, i, h) + (mp.lstar.determinant() - mp.ebar.trace()) * sig
            - f * f / (4.0 * sig * sig * sig);
        sigma_max = sigma_max.max(sigma_res.abs());

        let o2 = om * om;
        let trace_rate = d1(&traces, i, h) / o2;
        let kappa = pressure_coupling(om, p)?;
        let trace_res = trace_rate
            - 2.0 / o2 * mp.lstar.determinant()
            - 0.5 / o2 * mp.trace_lbar * mp.trace_lbar
            + 0.5 * f * f * o2
            + 2.0 * kappa * om.powf(2.0 * (1.0 - m)) * mp.ebar.trace();
        trace_eq_max = trace_eq_max.max(trace_res.abs());
    }
    let max_residual = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    Ok(LaxReport {
        tau_points: n,
        tau_end,
        rows,
        shape_component_max: shape_max,
        rate_component_max: rate_max,
        fit_coefficient_max: fit_max,
        sigma_max,
        trace_equation_max: trace_eq_max,
        max_residual,
    })
}

/// Least-squares fit `R(lambda) ~ C0 + C1 lambda + C2 lambda^2`, entrywise.
fn quadratic_fit(samples: &[(f64, Matrix2<f64>)]) -> [Matrix2<f64>; 3] {
    let mut ata = Matrix3::<f64>::zeros();
    for &(l, _) in samples {
        let v = Vector3::new(1.0, l, l * l);
        ata += v * v.transpose();
    }
    let inv = ata.try_inverse().unwrap_or_else(Matrix3::zeros);
    let mut out = [Matrix2::zeros(); 3];
    for r in 0..2 {
        for c in 0..2 {
            let mut atb = Vector3::zeros();
            for &(l, ref m) in samples {
                atb += Vector3::new(1.0, l, l * l) * m[(r, c)];
            }
            let x = inv * atb;
            for k in 0..3 {
                out[k][(r, c)] = x[k];
            }
        }
    }
    out
}
