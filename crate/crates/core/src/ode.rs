//! Dormand–Prince 5(4) integrator with Hairer's continuous extension.
//!
//! The dense output is a quartic in the step fraction and reproduces the
//! step endpoints; between nodes it is fourth-order accurate. The state is
//! a fixed-size array so that callers can map their own domain types onto
//! it without allocation.

use thiserror::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step allowed, relative to the integration span.
    pub min_step_fraction: f64,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 2_000_000,
            min_step_fraction: 1e-14,
        }
    }
}

#[derive(Debug, Error)]
pub enum OdeError<E> {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, last_rhs_error: Option<E> },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Piecewise-quartic dense trajectory produced by [`integrate`].
#[derive(Debug, Clone)]
pub struct DenseTrajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    segments: Vec<[[f64; N]; 5]>,
}

impl<const N: usize> DenseTrajectory<N> {
    /// A trajectory consisting of the initial point only.
    pub fn single(t0: f64, y0: [f64; N]) -> Self {
        Self {
            times: vec![t0],
            states: vec![y0],
            segments: Vec::new(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Interpolated state; `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let (t0, t1) = (self.t_start(), self.t_end());
        if !(t >= t0 && t <= t1) {
            return None;
        }
        let idx = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => return Some(self.states[i]),
            Err(i) => i - 1,
        };
        let h = self.times[idx + 1] - self.times[idx];
        let s = (t - self.times[idx]) / h;
        let s1 = 1.0 - s;
        let r = &self.segments[idx];
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        Some(out)
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn error_norm<const N: usize>(
    y: &[f64; N],
    y1: &[f64; N],
    err: &[f64; N],
    ctl: &StepControl,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sk = ctl.atol + ctl.rtol * y[i].abs().max(y1[i].abs());
        acc += (err[i] / sk).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, E, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    span: f64,
    ctl: &StepControl,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = ctl.atol + ctl.rtol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(span);
    let y1 = axpy(y0, dir * h, &[(1.0, f0)]);
    let der2 = match rhs(t0 + dir * h, &y1) {
        Ok(f1) => {
            let mut acc = 0.0;
            for i in 0..N {
                let sk = ctl.atol + ctl.rtol * y0[i].abs();
                acc += ((f1[i] - f0[i]) / sk).powi(2);
            }
            acc.sqrt() / h
        }
        Err(_) => return h * 1e-3,
    };
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(span)
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end` with local error control.
///
/// A stage evaluation that fails is treated like a rejected step. If the
/// step shrinks below the floor, the failure is reported together with the
/// last rhs error seen, and the partial trajectory is returned alongside.
#[allow(clippy::type_complexity)]
pub fn integrate<const N: usize, E, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
) -> Result<DenseTrajectory<N>, (OdeError<E>, DenseTrajectory<N>)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let mut traj = DenseTrajectory::single(t0, y0);
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = (t_end - t0).signum();
    let h_min = span * ctl.min_step_fraction;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = match rhs(t, &y) {
        Ok(k) => k,
        Err(e) => {
            return Err((
                OdeError::StepUnderflow {
                    t,
                    last_rhs_error: Some(e),
                },
                traj,
            ))
        }
    };
    let mut h = initial_step(&mut rhs, t, &y, &k1, dir, span, ctl);
    let mut last_rejected = false;
    let mut last_err: Option<E> = None;

    for _ in 0..ctl.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok(traj);
        }
        if h >= remaining || (remaining - h) < 1e-12 * span {
            h = remaining;
        }
        if h < h_min {
            return Err((
                OdeError::StepUnderflow {
                    t,
                    last_rhs_error: last_err,
                },
                traj,
            ));
        }
        let hs = dir * h;

        let stages = (|| -> Result<_, E> {
            let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(
                t + C4 * hs,
                &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = rhs(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + hs,
                &axpy(
                    &y,
                    hs,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y1 = axpy(
                &y,
                hs,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = rhs(t + hs, &y1)?;
            Ok((k2, k3, k4, k5, k6, k7, y1))
        })();

        let (_k2, k3, k4, k5, k6, k7, y1) = match stages {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };

        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(&y, &y1, &err_vec, ctl);
        if !err.is_finite() {
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 10.0);
        if err <= 1.0 {
            if y1.iter().any(|v| !v.is_finite()) {
                return Err((OdeError::NonFinite { t: t + hs }, traj));
            }
            let mut seg = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                seg[0][i] = y[i];
                seg[1][i] = ydiff;
                seg[2][i] = bspl;
                seg[3][i] = ydiff - hs * k7[i] - bspl;
                seg[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_new = if h == remaining { t_end } else { t + hs };
            traj.times.push(t_new);
            traj.states.push(y1);
            traj.segments.push(seg);
            t = t_new;
            y = y1;
            k1 = k7;
            last_err = None;
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
        } else {
            h *= fac.min(1.0);
            last_rejected = true;
        }
    }
    Err((OdeError::MaxSteps { t }, traj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64; 2]) -> Result<[f64; 2], ()> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let traj = integrate(
            harmonic,
            0.0,
            [1.0, 0.0],
            10.0,
            &StepControl::with_tol(1e-11),
        )
        .map_err(|(e, _)| e)
        .unwrap();
        assert_eq!(traj.t_end(), 10.0);
        for i in 0..=100 {
            let t = i as f64 * 0.1;
            let y = traj.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn dense_output_reproduces_nodes() {
        let traj = integrate(harmonic, 0.0, [1.0, 0.0], 3.0, &StepControl::with_tol(1e-8))
            .map_err(|(e, _)| e)
            .unwrap();
        for (t, y) in traj.times().iter().zip(traj.states()) {
            assert_eq!(traj.eval(*t).unwrap(), *y);
        }
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dense_output_is_fourth_order_between_nodes() {
        // Exponential growth: every midpoint must be close to the exact value.
        let traj = integrate(
            |_t, y: &[f64; 1]| Ok::<_, ()>([y[0]]),
            0.0,
            [1.0],
            2.0,
            &StepControl::with_tol(1e-10),
        )
        .map_err(|(e, _)| e)
        .unwrap();
        for w in traj.times().windows(2) {
            let tm = 0.5 * (w[0] + w[1]);
            let y = traj.eval(tm).unwrap()[0];
            assert!((y - tm.exp()).abs() < 1e-8 * tm.exp());
        }
    }

    #[test]
    fn backward_integration() {
        let traj = integrate(
            harmonic,
            1.0,
            [1.0_f64.cos(), -1.0_f64.sin()],
            -1.0,
            &StepControl::with_tol(1e-10),
        )
        .map_err(|(e, _)| e)
        .unwrap();
        let y = traj.states().last().unwrap();
        assert!((y[0] - (-1.0_f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn failing_rhs_reports_underflow() {
        // Blows up at t = 1: y' = y^2, y(0) = 1; rhs refuses y > 1e6.
        let res = integrate(
            |_t, y: &[f64; 1]| {
                if y[0] > 1e6 {
                    Err("too large")
                } else {
                    Ok([y[0] * y[0]])
                }
            },
            0.0,
            [1.0],
            2.0,
            &StepControl::with_tol(1e-8),
        );
        match res {
            Err((OdeError::StepUnderflow { t, .. }, partial)) => {
                assert!(t > 0.99 && t < 1.0, "t = {t}");
                assert!(partial.t_end() < 1.0);
            }
            other => panic!(
                "expected underflow, got {:?}",
                other.map(|_| ()).map_err(|(e, _)| e)
            ),
        }
    }
}
