//! Property tests over random matrices, orbits and leaves.

use proptest::prelude::*;

use stable_leaf::budget::EpsilonSchedule;
use stable_leaf::cocycle::{build_orbit_cocycle, singular_frame, AngleQuotients};
use stable_leaf::directions::{angle_gap, cauchy_schwarz_step, pushforward_contraction, OneStepDistortion};
use stable_leaf::geometry::{direction_gap, Mat2, Point2};
use stable_leaf::leaf::integrate_leaf_on_grid;
use stable_leaf::map::builtin::{henon, perturbed};
use stable_leaf::report::format_float;

fn matrix() -> impl Strategy<Value = Mat2> {
    (0.0..6.3f64, 0.0..6.3f64, 0.01..5.0f64, -2.0..2.0f64, any::<bool>()).prop_map(|(a, b, lc, ls, flip)| {
        let s = 10f64.powf(ls);
        let m = Mat2::rotation(a) * Mat2::diag(s * 10f64.powf(lc), s) * Mat2::rotation(b);
        if flip {
            Mat2::new(m.a12, m.a11, m.a22, m.a21)
        } else {
            m
        }
    })
}

fn near(center: Point2, r: f64) -> impl Strategy<Value = Point2> {
    (-r..r, -r..r).prop_map(move |(x, y)| center + Point2::new(x, y))
}

proptest! {
    #[test]
    fn singular_values_are_consistent(m in matrix()) {
        let (e, f) = m.singular_values();
        prop_assert!(0.0 < e && e <= f);
        prop_assert!((e * f - m.det().abs()).abs() <= 1e-12 * f * f);
        prop_assert!((e * e + f * f - m.frobenius_sq()).abs() <= 1e-12 * f * f);
    }

    #[test]
    fn frame_is_orthonormal_and_extremal(m in matrix()) {
        let fr = singular_frame(&m).unwrap();
        let (e, f) = (fr.contracted(), fr.expanded());
        prop_assert!(e.dot(f).abs() <= 1e-15);
        prop_assert!((m.apply(e).norm() - fr.e).abs() <= 1e-10 * fr.e);
        prop_assert!((m.apply(f).norm() - fr.f).abs() <= 1e-12 * fr.f);
    }

    #[test]
    fn direction_ignores_sign_and_scale(m in matrix(), s in 0.1..10.0f64) {
        let a = singular_frame(&m).unwrap().theta_contract;
        let b = singular_frame(&m.scale(-s)).unwrap().theta_contract;
        prop_assert!(direction_gap(a, b) <= 1e-9);
    }

    #[test]
    fn quotient_identity(m in matrix()) {
        let q = AngleQuotients::of(&m);
        let (e, f) = m.singular_values();
        let t = (f * f - e * e).powi(2);
        prop_assert!((4.0 * q.a * q.a + q.b * q.b - t).abs() <= 1e-10 * t);
        prop_assert!((4.0 * q.c * q.c + q.d * q.d - t).abs() <= 1e-10 * t);
    }

    #[test]
    fn henon_cocycle_inequalities(x in near(Point2::new(0.63, 0.19), 0.2)) {
        let m = henon(1.4, 0.3);
        let c = build_orbit_cocycle(&m, x, 9).unwrap();
        for k in 0..8 {
            prop_assert!(OneStepDistortion::of(&c, k).unwrap().holds(1e-12));
        }
        for k in 1..8 {
            let (lhs, rhs) = cauchy_schwarz_step(&c, k).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
            prop_assert!(angle_gap(&c, k).unwrap().holds());
            for j in 1..=k {
                prop_assert!(pushforward_contraction(&c, k, j).unwrap().holds(1e-9));
            }
        }
    }

    #[test]
    fn leaves_are_arclength_parametrised(z in near(Point2::ORIGIN, 0.02), k in 2usize..8) {
        let m = perturbed(0.5, 2.0, 0.05);
        let leaf = integrate_leaf_on_grid(&m, z, k, 0.02, 0.02 / 512.0, 65).unwrap();
        prop_assert_eq!(leaf.origin().p, z);
        for w in leaf.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            let dp = w[0].p.dist(w[1].p);
            prop_assert!(dp <= dt + 1e-9 && dp >= dt * (1.0 - 1e-6));
            prop_assert!((w[1].theta - w[0].theta).abs() < std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn floats_reparse_exactly(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn increasing_schedules_are_rejected(a in 0.01..1.0f64, b in 1.01..2.0f64) {
        prop_assert!(EpsilonSchedule::explicit(vec![a, a * b]).is_err());
        prop_assert!(EpsilonSchedule::explicit(vec![a * b, a]).is_ok());
    }
}
