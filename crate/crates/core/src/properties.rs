//! Randomised invariants of the reduction and its helpers.

use nalgebra::Matrix2;
use proptest::prelude::*;

use crate::dynsys::rhs;
use crate::ermakov::{hamiltonian_value, SemiAxes};
use crate::exact::{constrained_initial_state, translation_solve, ExactSpec, TranslationInit};
use crate::lax::gauge_transform;
use crate::model::{
    derive_constants, epsilon0, validate_params, Branch, DynState, IntegralSet, Params,
};
use crate::reduced::{from_modulated, parametrize, to_modulated, unparametrize};

fn demo_params() -> Params {
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

fn state() -> impl Strategy<Value = DynState> {
    (
        prop::array::uniform8(-1.0..1.0_f64),
        0.5..2.0_f64,
        0.5..1.5_f64,
    )
        .prop_map(|(a, rho0, omega)| DynState {
            rho0,
            b: 1.0 + 0.5 * a[0],
            b_s: 0.3 * a[1],
            b_n: 0.3 * a[2],
            g: a[3],
            g_n: a[4],
            g_s: a[5],
            g_r: a[6],
            psi: 1.0 + 0.5 * a[7],
            omega,
        })
}

fn mirrored(s: &DynState) -> DynState {
    DynState {
        b_s: -s.b_s,
        g_s: -s.g_s,
        g_r: -s.g_r,
        ..*s
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mirror_with_reversed_rotation_is_a_symmetry(s in state(), f in -2.0..2.0_f64) {
        let p = Params { f, ..demo_params() };
        let q = Params { f: -f, ..p };
        let a = mirrored(&rhs(&s, &p).unwrap());
        let b = rhs(&mirrored(&s), &q).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12, "{a:?} vs {b:?}");
    }

    #[test]
    fn modulated_round_trip(s in state()) {
        let p = demo_params();
        let ints = IntegralSet::evaluate(&s, &p).unwrap();
        let back = from_modulated(&to_modulated(&s, &p).unwrap(), &p, &ints).unwrap();
        for (x, y) in s.to_array().iter().zip(back.to_array()) {
            prop_assert!(close(*x, y, 1e-12), "{s:?} vs {back:?}");
        }
    }

    #[test]
    fn angle_round_trip(s in state()) {
        let p = demo_params();
        let ints = IntegralSet::evaluate(&s, &p).unwrap();
        let ms = to_modulated(&s, &p).unwrap();
        if let Ok(a) = parametrize(&ms, &ints, None) {
            let [bs, bn, gs, gn] = unparametrize(&a, ms.bbar, &ints).unwrap();
            prop_assert!(close(bs, ms.bbar_s, 1e-9));
            prop_assert!(close(bn, ms.bbar_n, 1e-9));
            prop_assert!(close(gs, ms.gbar_s, 1e-9));
            prop_assert!(close(gn, ms.gbar_n, 1e-9));
        }
    }

    #[test]
    fn hamiltonian_is_symmetric_in_the_axes(
        a in 0.1..3.0_f64, b in 0.1..3.0_f64, da in -2.0..2.0_f64, db in -2.0..2.0_f64,
        k in -5.0..5.0_f64, f in -2.0..2.0_f64,
    ) {
        let sa = SemiAxes { axis_a: a, axis_b: b, d_axis_a: da, d_axis_b: db };
        let sw = sa.swapped();
        prop_assert_eq!(sw.wronskian(), -sa.wronskian());
        let h1 = hamiltonian_value(&sa, sa.wronskian(), k, f);
        let h2 = hamiltonian_value(&sw, sw.wronskian(), k, f);
        prop_assert!(close(h1, h2, 1e-14));
    }

    #[test]
    fn gauge_rotation_keeps_trace_and_determinant(
        l in prop::array::uniform4(-2.0..2.0_f64),
        e in prop::array::uniform3(-2.0..2.0_f64),
        f in -2.0..2.0_f64, t in -5.0..5.0_f64, t0 in -5.0..5.0_f64,
    ) {
        let lm = Matrix2::new(l[0], l[1], l[2], l[3]);
        let em = Matrix2::new(e[0], e[1], e[1], e[2]);
        let (lt, et) = gauge_transform(&lm, &em, f, t, t0);
        prop_assert!(close(lt.trace(), lm.trace(), 1e-13));
        prop_assert!(close(et.trace(), em.trace(), 1e-13));
        prop_assert!(close(et.determinant(), em.determinant(), 1e-12));
        prop_assert!((et - et.transpose()).norm() < 1e-13);
    }

    #[test]
    fn centre_moves_at_constant_speed(
        q0 in -1.0..1.0_f64, p0 in -1.0..1.0_f64, u0 in -1.0..1.0_f64, v0 in -1.0..1.0_f64,
        f in -2.0..2.0_f64, t in 0.0..20.0_f64,
    ) {
        let init = TranslationInit { q0, p0, u0, v0 };
        let s = translation_solve(f, &init, t);
        prop_assert!(close(s.qbar_dot.hypot(s.pbar_dot), u0.hypot(v0), 1e-12));
        let s0 = translation_solve(f, &init, 0.0);
        prop_assert!(close(s0.qbar, q0, 1e-15) && close(s0.pbar, p0, 1e-15));
    }

    #[test]
    fn magnetic_pressure_balance_is_enforced(mu in 0.1..3.0_f64, lt in -2.0..2.0_f64) {
        let p = Params { mu, lambda_t: lt, alpha0: -0.5 * mu * lt * lt, ..demo_params() };
        prop_assert!(validate_params(&p).is_ok());
        prop_assert!((2.0 * epsilon0(&p) + mu * lt * lt).abs() <= 1e-12 * (1.0 + mu * lt * lt));
        let off = Params { alpha0: p.alpha0 + 0.01, ..p };
        prop_assert!(validate_params(&off).is_err());
    }

    #[test]
    fn exact_starts_satisfy_the_quadratic_relation(
        c0 in -1.0..1.0_f64, c_iii in 1.0..2.0_f64, c_ii in -0.05..-0.001_f64,
        delta in -1.0..-0.2_f64, sign in prop::bool::ANY, phi0 in -3.0..3.0_f64,
    ) {
        let p = Params {
            alpha1: -2.0 * delta,
            ..demo_params()
        };
        let spec = ExactSpec {
            c0, c_i: 1.0, c_ii, c_iii, delta,
            c_iv_sign: if sign { 1.0 } else { -1.0 },
            omega_dot_sign: 1.0, phi0,
            translation: TranslationInit::default(),
        };
        if let Ok(s0) = constrained_initial_state(&spec, &p) {
            let ints = derive_constants(&s0, &p).unwrap();
            let q = ints.c_iv * ints.c_iv - 4.0 * ints.c_ii * ints.c_iii;
            prop_assert!(close(q, 0.25 * delta * delta * p.f * p.f, 1e-10));
            prop_assert!(close(ints.delta, delta, 1e-12));
            prop_assert!(close(ints.c0, c0, 1e-12));
        }
    }
}
