//! Physical fields rebuilt from a reduced state, and pointwise residuals of
//! the governing magnetogasdynamic equations.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{sample_times, StateHistory};
use crate::error::{Error, Result};
use crate::exact::{
    five_point_derivative, translation_rate, translation_solve, TranslationInit, TranslationState,
};
use crate::model::{epsilon0, epsilon1, epsilon2, DynState, Params};

/// Seed used for random sample points when `PULSRODON_SEED` is unset.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// All reconstructed fields at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub rho: f64,
    pub pressure: f64,
    pub temperature: f64,
    pub entropy: f64,
    pub flux: f64,
    pub h: f64,
    pub hx: f64,
    pub hy: f64,
}

/// Pressure coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coeffs {
    e0: f64,
    e1: f64,
    e2: f64,
}

impl Coeffs {
    fn of(s: &DynState, p: &Params) -> Result<Self> {
        Ok(Self {
            e0: epsilon0(p),
            e1: epsilon1(s.psi, p),
            e2: epsilon2(s.omega, p)?,
        })
    }

    /// Time derivatives along the state rates.
    fn rates(s: &DynState, ds: &DynState, p: &Params) -> Self {
        let m = p.m;
        let e1 = if p.alpha1 == 0.0 || ds.psi == 0.0 {
            0.0
        } else {
            let ex = (m - 3.0) / (m - 1.0);
            p.alpha1 * ex * s.psi.powf(ex - 1.0) * ds.psi
        };
        let e2 = p.alpha * (m - 1.0) / m * 2.0 * (m - 2.0) * s.omega.powf(2.0 * m - 5.0) * ds.omega;
        Self { e0: 0.0, e1, e2 }
    }

    fn pressure(&self, rho: f64, m: f64) -> f64 {
        self.e0 * rho * rho + self.e1 * rho.powf(m - 1.0) + self.e2 * rho.powf(m)
    }

    fn temperature(&self, rho: f64, m: f64) -> f64 {
        self.e0 * rho + self.e1 * rho.powf(m - 2.0) + self.e2 * rho.powf(m - 1.0)
    }

    /// `dp/drho`.
    fn pressure_slope(&self, rho: f64, m: f64) -> f64 {
        2.0 * self.e0 * rho
            + (m - 1.0) * self.e1 * rho.powf(m - 2.0)
            + m * self.e2 * rho.powf(m - 1.0)
    }

    /// `dT/drho`.
    fn temperature_slope(&self, rho: f64, m: f64) -> f64 {
        self.e0 + (m - 2.0) * self.e1 * rho.powf(m - 3.0) + (m - 1.0) * self.e2 * rho.powf(m - 2.0)
    }
}

/// Quantities shared by reconstruction and residuals at one point.
struct Local {
    xt: Vector2<f64>,
    e: Matrix2<f64>,
    l: Matrix2<f64>,
    quad: f64,
    rho: f64,
    grad_quad: Vector2<f64>,
    q: Vector2<f64>,
}

fn local(s: &DynState, tr: &TranslationState, p: &Params, x: f64, y: f64, t: f64) -> Result<Local> {
    let xt = Vector2::new(x - tr.qbar, y - tr.pbar);
    let e = s.shape_matrix();
    let l = s.velocity_gradient();
    let quad = xt.dot(&(e * xt)) + s.rho0;
    if !(quad > 0.0) {
        return Err(Error::GridOutsideSupport { x, y, t });
    }
    Ok(Local {
        xt,
        e,
        l,
        quad,
        rho: quad.powf(1.0 / (p.m - 1.0)),
        grad_quad: 2.0 * e * xt,
        q: l * xt + Vector2::new(tr.qbar_dot, tr.pbar_dot),
    })
}

/// Rebuild every field at `(x, y, t)` from the state and centre motion.
pub fn reconstruct(
    s: &DynState,
    tr: &TranslationState,
    p: &Params,
    x: f64,
    y: f64,
    t: f64,
) -> Result<FieldSample> {
    let lc = local(s, tr, p, x, y, t)?;
    let c = Coeffs::of(s, p)?;
    let temperature = c.temperature(lc.rho, p.m);
    let grad_flux = s.psi * lc.grad_quad;
    Ok(FieldSample {
        x,
        y,
        t,
        u: lc.q[0],
        v: lc.q[1],
        rho: lc.rho,
        pressure: c.pressure(lc.rho, p.m),
        temperature,
        entropy: -lc.rho.ln() + temperature.ln() / (p.gamma - 1.0),
        flux: lc.quad * s.psi,
        h: p.lambda_t * lc.rho,
        hx: grad_flux[1],
        hy: -grad_flux[0],
    })
}

/// Sampling grid: a uniform `nx` by `ny` lattice on the box inscribed in
/// the support ellipse shrunk by `scale`, at `nt` times, plus optional
/// random points in the same box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub scale: f64,
    pub random_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 20,
            ny: 20,
            nt: 11,
            scale: 0.8,
            random_points: 0,
        }
    }
}

/// Seed from `PULSRODON_SEED`, or [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("PULSRODON_SEED")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Sample points at one time, in the frame of the ellipse axes. A direction
/// with a non-negative eigenvalue is unbounded and gets unit length.
pub fn grid_points(
    s: &DynState,
    tr: &TranslationState,
    grid: &GridSpec,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let root = s.b_s.hypot(s.b_n);
    let lams = [0.5 * s.b - root, 0.5 * s.b + root];
    let angle = 0.5 * (2.0 * s.b_s).atan2(2.0 * s.b_n);
    // eigenvector of the larger eigenvalue is (cos, sin) of `angle`
    let (sn, cs) = angle.sin_cos();
    let dirs = [Vector2::new(-sn, cs), Vector2::new(cs, sn)];
    let half: Vec<f64> = lams
        .iter()
        .map(|&lam| {
            let len = if lam < 0.0 && s.rho0 > 0.0 {
                (-s.rho0 / lam).sqrt()
            } else {
                1.0
            };
            grid.scale * len / std::f64::consts::SQRT_2
        })
        .collect();
    let lattice = |n: usize, k: usize| {
        if n <= 1 {
            0.0
        } else {
            -1.0 + 2.0 * k as f64 / (n - 1) as f64
        }
    };
    let centre = Vector2::new(tr.qbar, tr.pbar);
    let at = |a: f64, b: f64| {
        let r = centre + dirs[0] * (a * half[0]) + dirs[1] * (b * half[1]);
        (r[0], r[1])
    };
    let mut pts = Vec::with_capacity(grid.nx * grid.ny + grid.random_points);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            pts.push(at(lattice(grid.nx, i), lattice(grid.ny, j)));
        }
    }
    for _ in 0..grid.random_points {
        let a = rng.random_range(-1.0..=1.0);
        let b = rng.random_range(-1.0..=1.0);
        pts.push(at(a, b));
    }
    pts
}

/// Largest absolute value of one residual and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualMax {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl ResidualMax {
    fn zero() -> Self {
        Self {
            value: 0.0,
            x: f64::NAN,
            y: f64::NAN,
            t: f64::NAN,
        }
    }

    fn merge(self, other: Self) -> Self {
        let key = |r: &Self| {
            if r.value.is_nan() {
                f64::INFINITY
            } else {
                r.value
            }
        };
        if key(&other) > key(&self) {
            other
        } else {
            self
        }
    }
}

/// Residuals of each governing equation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PointResiduals {
    pub mass: f64,
    pub momentum_x: f64,
    pub momentum_y: f64,
    /// Momentum balance divided by density, after the pressure and field
    /// constraints have been used.
    pub reduced_momentum_x: f64,
    pub reduced_momentum_y: f64,
    pub flux: f64,
    pub entropy: f64,
    pub energy: f64,
    pub div_h: f64,
    /// Difference between the full momentum balance and density times the
    /// reduced one.
    pub momentum_form_gap: f64,
}

impl PointResiduals {
    const NAMES: [&'static str; 10] = [
        "mass",
        "momentum_x",
        "momentum_y",
        "reduced_momentum_x",
        "reduced_momentum_y",
        "flux",
        "entropy",
        "energy",
        "div_h",
        "momentum_form_gap",
    ];

    fn to_array(self) -> [f64; 10] {
        [
            self.mass,
            self.momentum_x,
            self.momentum_y,
            self.reduced_momentum_x,
            self.reduced_momentum_y,
            self.flux,
            self.entropy,
            self.energy,
            self.div_h,
            self.momentum_form_gap,
        ]
    }
}

/// Time derivatives needed by the residuals at one point, in whatever way
/// they were obtained.
struct Rates {
    rho: f64,
    u: f64,
    v: f64,
    flux: f64,
    entropy: f64,
    eps: Coeffs,
}

fn spatial_residuals(
    s: &DynState,
    tr: &TranslationState,
    p: &Params,
    x: f64,
    y: f64,
    t: f64,
    rates: &Rates,
) -> Result<PointResiduals> {
    let m = p.m;
    let lc = local(s, tr, p, x, y, t)?;
    let c = Coeffs::of(s, p)?;
    let rho = lc.rho;
    let drho_dquad = rho / ((m - 1.0) * lc.quad);
    let grad_rho = drho_dquad * lc.grad_quad;
    let q = lc.q;
    let div_q = lc.l.trace();
    let adv = lc.l * q;
    let coriolis = Vector2::new(-q[1], q[0]) * p.f;
    let dq = Vector2::new(rates.u, rates.v);
    let accel = dq + adv + coriolis;

    let grad_flux = s.psi * lc.grad_quad;
    let lap_flux = 2.0 * s.psi * lc.e.trace();
    let h = p.lambda_t * rho;
    let lorentz = p.mu * (lap_flux * grad_flux + h * p.lambda_t * grad_rho);
    let grad_p = c.pressure_slope(rho, m) * grad_rho;
    let full = rho * accel + lorentz + grad_p;

    let kappa = c.e2 * m / (m - 1.0);
    let reduced = accel + kappa * lc.grad_quad;

    let temp = c.temperature(rho, m);
    if !(temp > 0.0) {
        return Err(Error::Domain {
            what: "temperature",
            value: temp,
        });
    }
    let grad_temp = c.temperature_slope(rho, m) * grad_rho;
    let grad_s = -grad_rho / rho + grad_temp / ((p.gamma - 1.0) * temp);

    let n = m - 1.0;
    let g = p.gamma;
    let e = &rates.eps;
    let energy = -div_q
        * ((2.0 - g) * c.e0 * rho
            + (n - g) * c.e1 * rho.powf(n - 1.0)
            + (m - g) * c.e2 * rho.powf(m - 1.0))
        + e.e0 * rho
        + e.e1 * rho.powf(n - 1.0)
        + e.e2 * rho.powf(m - 1.0);

    // H = (A_y, -A_x): dH_x/dx + dH_y/dy = A_yx - A_xy, each 2 psi b.
    let a_yx = 2.0 * s.psi * lc.e[(1, 0)];
    let a_xy = 2.0 * s.psi * lc.e[(0, 1)];

    let gap = full - rho * reduced;
    Ok(PointResiduals {
        mass: rates.rho + q.dot(&grad_rho) + rho * div_q,
        momentum_x: full[0],
        momentum_y: full[1],
        reduced_momentum_x: reduced[0],
        reduced_momentum_y: reduced[1],
        flux: rates.flux + q.dot(&grad_flux),
        entropy: rates.entropy + q.dot(&grad_s),
        energy,
        div_h: a_yx - a_xy,
        momentum_form_gap: gap.norm(),
    })
}

/// Residuals with time derivatives from the chain rule through the state
/// rates reported by the history.
pub fn point_residuals_chain(
    s: &DynState,
    ds: &DynState,
    tr: &TranslationState,
    dtr: &TranslationState,
    p: &Params,
    x: f64,
    y: f64,
    t: f64,
) -> Result<PointResiduals> {
    let m = p.m;
    let lc = local(s, tr, p, x, y, t)?;
    let c = Coeffs::of(s, p)?;
    let de = ds.shape_matrix();
    let dl = ds.velocity_gradient();
    let centre_vel = Vector2::new(tr.qbar_dot, tr.pbar_dot);
    let centre_acc = Vector2::new(dtr.qbar_dot, dtr.pbar_dot);
    let dquad = lc.xt.dot(&(de * lc.xt)) + ds.rho0 - lc.grad_quad.dot(&centre_vel);
    let rho = lc.rho;
    let drho = rho / ((m - 1.0) * lc.quad) * dquad;
    let dq = dl * lc.xt - lc.l * centre_vel + centre_acc;
    let eps = Coeffs::rates(s, ds, p);
    let temp = c.temperature(rho, m);
    let dtemp = c.temperature_slope(rho, m) * drho
        + eps.e0 * rho
        + eps.e1 * rho.powf(m - 2.0)
        + eps.e2 * rho.powf(m - 1.0);
    let rates = Rates {
        rho: drho,
        u: dq[0],
        v: dq[1],
        flux: dquad * s.psi + lc.quad * ds.psi,
        entropy: -drho / rho + dtemp / ((p.gamma - 1.0) * temp),
        eps,
    };
    spatial_residuals(s, tr, p, x, y, t, &rates)
}

/// Residuals with time derivatives from five-point central differences of
/// the reconstructed fields, step `h`.
pub fn point_residuals_fd(
    hist: &dyn StateHistory,
    trans: &TranslationInit,
    x: f64,
    y: f64,
    t: f64,
    h: f64,
) -> Result<PointResiduals> {
    let p = hist.params();
    let fields = |tt: f64| -> Result<[f64; 8]> {
        let s = hist.state(tt)?;
        let tr = translation_solve(p.f, trans, tt);
        let fs = reconstruct(&s, &tr, p, x, y, tt)?;
        let c = Coeffs::of(&s, p)?;
        Ok([fs.rho, fs.u, fs.v, fs.flux, fs.entropy, c.e0, c.e1, c.e2])
    };
    let d = five_point_derivative(fields, t, h)?;
    let rates = Rates {
        rho: d[0],
        u: d[1],
        v: d[2],
        flux: d[3],
        entropy: d[4],
        eps: Coeffs {
            e0: d[5],
            e1: d[6],
            e2: d[7],
        },
    };
    let s = hist.state(t)?;
    let tr = translation_solve(p.f, trans, t);
    spatial_residuals(&s, &tr, p, x, y, t, &rates)
}

/// Per-equation maxima over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationMaxima {
    pub entries: Vec<(String, ResidualMax)>,
}

impl EquationMaxima {
    pub fn get(&self, name: &str) -> Option<ResidualMax> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| *r)
    }

    /// Largest value over the listed equations.
    pub fn max_of(&self, names: &[&str]) -> f64 {
        names
            .iter()
            .filter_map(|n| self.get(n))
            .map(|r| {
                if r.value.is_nan() {
                    f64::INFINITY
                } else {
                    r.value
                }
            })
            .fold(0.0, f64::max)
    }

    fn from_points(rows: Vec<[ResidualMax; 10]>) -> Self {
        let mut best = [ResidualMax::zero(); 10];
        for row in rows {
            for (b, r) in best.iter_mut().zip(row) {
                *b = b.merge(r);
            }
        }
        Self {
            entries: PointResiduals::NAMES
                .iter()
                .zip(best)
                .map(|(n, r)| (n.to_string(), r))
                .collect(),
        }
    }
}

/// Residuals of the governing equations over a space-time grid, by both
/// routes to the time derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub points: usize,
    pub times: usize,
    pub fd_step: f64,
    pub chain_rule: EquationMaxima,
    pub finite_difference: EquationMaxima,
}

/// The equations compared against the main tolerance.
pub const GOVERNING: [&str; 6] = [
    "mass",
    "momentum_x",
    "momentum_y",
    "flux",
    "entropy",
    "energy",
];

fn tag_row(r: PointResiduals, x: f64, y: f64, t: f64) -> [ResidualMax; 10] {
    r.to_array().map(|v| ResidualMax {
        value: v.abs(),
        x,
        y,
        t,
    })
}

/// Evaluate all residuals on the grid. Times are spread over the history
/// span, kept two difference steps clear of its ends.
pub fn pde_residuals(
    hist: &dyn StateHistory,
    trans: &TranslationInit,
    grid: &GridSpec,
    seed: u64,
) -> Result<ResidualReport> {
    let p = hist.params();
    let (t0, t1) = hist.span();
    let h = (1e-3 * (t1 - t0)).min(1e-3);
    let times = sample_times((t0 + 2.0 * h, t1 - 2.0 * h), grid.nt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for &t in &times {
        let s = hist.state(t)?;
        let tr = translation_solve(p.f, trans, t);
        for (x, y) in grid_points(&s, &tr, grid, &mut rng) {
            jobs.push((x, y, t));
        }
    }
    let chain: Vec<[ResidualMax; 10]> = jobs
        .par_iter()
        .map(|&(x, y, t)| {
            let s = hist.state(t)?;
            let ds = hist.state_dot(t)?;
            let tr = translation_solve(p.f, trans, t);
            let dtr = translation_rate(p.f, trans, t);
            point_residuals_chain(&s, &ds, &tr, &dtr, p, x, y, t).map(|r| tag_row(r, x, y, t))
        })
        .collect::<Result<_>>()?;
    let fd: Vec<[ResidualMax; 10]> = jobs
        .par_iter()
        .map(|&(x, y, t)| point_residuals_fd(hist, trans, x, y, t, h).map(|r| tag_row(r, x, y, t)))
        .collect::<Result<_>>()?;
    Ok(ResidualReport {
        points: jobs.len(),
        times: times.len(),
        fd_step: h,
        chain_rule: EquationMaxima::from_points(chain),
        finite_difference: EquationMaxima::from_points(fd),
    })
}

/// A history whose states have the ellipse shear shifted by a constant,
/// while the reported rates are left as they were. Used as a negative
/// control for the residual checks.
pub struct Corrupted<'a> {
    pub inner: &'a dyn StateHistory,
    pub shear_shift: f64,
}

impl StateHistory for Corrupted<'_> {
    fn span(&self) -> (f64, f64) {
        self.inner.span()
    }

    fn params(&self) -> &Params {
        self.inner.params()
    }

    fn state(&self, t: f64) -> Result<DynState> {
        let mut s = self.inner.state(t)?;
        s.b_s += self.shear_shift;
        Ok(s)
    }

    fn state_dot(&self, t: f64) -> Result<DynState> {
        self.inner.state_dot(t)
    }
}

/// A view of a history restricted to a sub-span.
pub struct Window<'a> {
    pub inner: &'a dyn StateHistory,
    pub t0: f64,
    pub t1: f64,
}

impl StateHistory for Window<'_> {
    fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    fn params(&self) -> &Params {
        self.inner.params()
    }

    fn state(&self, t: f64) -> Result<DynState> {
        self.inner.state(t)
    }

    fn state_dot(&self, t: f64) -> Result<DynState> {
        self.inner.state_dot(t)
    }
}
