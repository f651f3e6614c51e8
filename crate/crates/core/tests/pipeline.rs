//! Worked examples across budget, leaf and fixed-point stages, each checked
//! against a closed form or a direct re-evaluation.

use stable_leaf::budget::{
    check_condition_double_star, check_condition_star, estimate_budget, exit_index, DoubleStarVerdict,
    EpsilonSchedule, HyperbolicityBudget, StarVerdict, SAMPLED_SLACK,
};
use stable_leaf::error::Error;
use stable_leaf::fixedpoint::{eigen_split, regular_growth_check, verify_fixed_point_theorem, TheoremOptions};
use stable_leaf::geometry::Point2;
use stable_leaf::leaf::{
    cauchy_iterate, choose_epsilon, contraction_check, integrate_leaf, measure_lipschitz, ConvergenceReport,
    LeafOptions,
};
use stable_leaf::map::builtin::{henon, linear, perturbed};
use stable_leaf::map::MapModel;

fn budget(m: &MapModel, z: Point2, sched: &EpsilonSchedule, kmax: usize) -> HyperbolicityBudget {
    estimate_budget(m, z, sched, kmax, 1000, 42).unwrap()
}

fn converge(m: &MapModel, z: Point2, eta: f64, kmax: usize, tol: f64) -> (HyperbolicityBudget, ConvergenceReport) {
    let sched = EpsilonSchedule::constant(eta).unwrap();
    let b = budget(m, z, &sched, kmax);
    let k0 = b.k0().unwrap();
    let gamma = b.gamma_required.unwrap() * SAMPLED_SLACK;
    let lip = measure_lipschitz(m, &[z], &[k0, kmax]).unwrap();
    let eps = choose_epsilon(&b, gamma, lip, &sched, Some((m, z))).unwrap();
    let r = cauchy_iterate(m, z, &b, &sched, eps, kmax, tol, LeafOptions::default()).unwrap();
    (b, r)
}

#[test]
fn linear_budget_closed_forms() {
    let eta = 0.1;
    let sched = EpsilonSchedule::constant(eta).unwrap();
    let b = budget(&linear(0.5, 2.0), Point2::ORIGIN, &sched, 16);
    assert_eq!(b.k0, Some(2));
    for k in 0..=4 {
        let want = 11.0 / 3.0 * 2f64.powi(-(k as i32));
        assert!((b.gamma_tilde[k] - want).abs() <= 1e-6 * want, "k = {k}");
    }
    let g = b.gamma_required.unwrap();
    assert!((g - 23.0 / 12.0 / eta).abs() <= 1e-6 * g, "{g}");
    assert_eq!(check_condition_star(&b).verdict, StarVerdict::SummableHeuristic);
    assert_eq!(check_condition_double_star(&b, &sched).verdict, DoubleStarVerdict::Feasible);
}

#[test]
fn short_budget_is_inconclusive() {
    let sched = EpsilonSchedule::constant(0.1).unwrap();
    let b = budget(&linear(0.5, 2.0), Point2::ORIGIN, &sched, 3);
    assert_eq!(check_condition_star(&b).verdict, StarVerdict::Inconclusive);
}

#[test]
fn fast_shrinking_schedule_breaks_double_star() {
    let sched = EpsilonSchedule::geometric(0.1, 0.25).unwrap();
    let b = budget(&linear(0.5, 2.0), Point2::ORIGIN, &sched, 12);
    let r = check_condition_double_star(&b, &sched);
    assert_eq!(r.verdict, DoubleStarVerdict::Infeasible);
    assert!(r.profile_growth.unwrap() > 1.5);
}

#[test]
fn epsilon_satisfies_both_inequalities() {
    let m = linear(0.5, 2.0);
    let sched = EpsilonSchedule::constant(0.1).unwrap();
    let b = budget(&m, Point2::ORIGIN, &sched, 10);
    let gamma = b.gamma_required.unwrap() * SAMPLED_SLACK;
    let eps = choose_epsilon(&b, gamma, 0.3, &sched, Some((&m, Point2::ORIGIN))).unwrap();
    assert!(eps * gamma < 1.0);
    assert!((eps * 0.3f64).exp() < 2.0);
    // the next rung up fails one of the checks
    assert!(2.0 * eps * gamma >= 1.0 || 2.0 * eps > sched.eps0());
}

#[test]
fn linear_leaves_coincide() {
    let (_, r) = converge(&linear(0.5, 2.0), Point2::ORIGIN, 0.1, 12, 1e-12);
    assert!(r.d_k.iter().all(|&d| d == 0.0));
    assert!(r.converged);
    assert!(r.limit.samples.iter().all(|s| s.theta.abs() <= 1e-10));
}

#[test]
fn perturbed_leaves_follow_gronwall() {
    let (_, r) = converge(&perturbed(0.5, 2.0, 0.05), Point2::ORIGIN, 0.05, 16, 1e-8);
    assert!(r.d_k.windows(2).all(|w| w[1] < w[0]), "{:?}", r.d_k);
    assert!(r.all_gronwall_ok());
    assert!(r.all_tube_ok());
    assert!(r.full_length.iter().all(|&f| f));
    assert!(r.limit_tangent_lipschitz <= 1.1 * r.l_used);
}

#[test]
fn henon_saddle_converges() {
    let m = henon(1.4, 0.3);
    let fp = eigen_split(&m, Point2::new(0.6, 0.2)).unwrap();
    let (_, r) = converge(&m, fp.p, 0.05, 20, 1e-8);
    assert!(r.converged);
    let nonzero: Vec<f64> = r.d_k.iter().copied().take_while(|&d| d > 0.0).collect();
    assert!(nonzero.len() >= 8);
    assert!(nonzero.windows(2).all(|w| w[1] < w[0]));
    assert!(r.all_gronwall_ok());
}

#[test]
fn contraction_ratios() {
    let m = linear(0.5, 2.0);
    let (b, r) = converge(&m, Point2::ORIGIN, 0.1, 16, 1e-12);
    let c = contraction_check(&m, &r.limit, &b, 16, 40, 9).unwrap();
    assert_eq!(c.records[0].max_ratio, 1.0);
    assert_eq!(c.records[0].min_ratio, 1.0);
    for rec in c.records.iter().take(6).skip(2) {
        assert!((rec.ratio_over_bound - 3.0 / 11.0).abs() < 0.01, "{rec:?}");
    }

    let m = perturbed(0.5, 2.0, 0.05);
    let (b, r) = converge(&m, Point2::ORIGIN, 0.05, 16, 1e-8);
    let c = contraction_check(&m, &r.limit, &b, 12, 40, 9).unwrap();
    let pts: Vec<(f64, f64)> = c.records[4..=12].iter().map(|r| (r.n as f64, r.max_ratio.ln())).collect();
    let slope = stable_leaf::budget::least_squares_slope(&pts);
    assert!((slope - 0.5f64.ln()).abs() <= 0.05, "{slope}");
}

#[test]
fn off_leaf_probe_exits_on_henon() {
    let m = henon(1.4, 0.3);
    let fp = eigen_split(&m, Point2::new(0.6, 0.2)).unwrap();
    let (_, r) = converge(&m, fp.p, 0.05, 16, 1e-8);
    let sched = EpsilonSchedule::constant(0.05).unwrap();
    let f = Point2::from_angle(r.limit.origin().theta).perp();
    let exit = exit_index(&m, fp.p, &sched, fp.p + f.scale(1e-3), 16).unwrap();
    assert!(matches!(exit, Some(j) if j <= 16));
    assert_eq!(exit_index(&m, fp.p, &sched, fp.p, 16).unwrap(), None);
}

#[test]
fn theorem_scenarios() {
    let m = linear(0.5, 2.0);
    let fp = eigen_split(&m, Point2::ORIGIN).unwrap();
    let r = verify_fixed_point_theorem(&m, &fp, 0.1, &TheoremOptions::default()).unwrap();
    assert_eq!(r.tangency.angle_error, 0.0);
    assert_eq!((r.leaf_length.reach_neg, r.leaf_length.reach_pos), (r.eps, r.eps));
    assert!((r.contraction_rate.fitted_log_rate.unwrap() - 0.5f64.ln()).abs() <= 1e-14);

    let m = henon(1.4, 0.3);
    let fp = eigen_split(&m, Point2::new(0.6, 0.2)).unwrap();
    let r = verify_fixed_point_theorem(&m, &fp, 0.05, &TheoremOptions::default()).unwrap();
    assert!(r.contraction_rate.deviation.unwrap().abs() <= 0.1);
    assert!(r.checks.gamma_required_finite);
    assert_eq!(r.uniqueness.on_leaf_exits, 0);
}

#[test]
fn regular_growth_examples() {
    let m = perturbed(0.5, 2.0, 0.05);
    let fp = eigen_split(&m, Point2::ORIGIN).unwrap().with_delta(0.02);
    let sched = EpsilonSchedule::constant(0.05).unwrap();
    let g = regular_growth_check(&m, &fp, &sched, 12, 500, 3).unwrap();
    assert!(g.k_combined().is_finite() && g.k_fit >= 1.0);

    let loose = fp.clone().with_delta(0.001);
    let wide = EpsilonSchedule::constant(1.0).unwrap();
    assert!(matches!(
        regular_growth_check(&m, &loose, &wide, 12, 2000, 3),
        Err(Error::SpectralSlack(_))
    ));

    let m = linear(0.5, 2.0);
    let fp = eigen_split(&m, Point2::ORIGIN).unwrap().with_delta(0.0);
    let g = regular_growth_check(&m, &fp, &EpsilonSchedule::constant(0.3).unwrap(), 12, 500, 3).unwrap();
    assert_eq!(g.k_fit, 1.0);
}

#[test]
fn leaf_tangent_matches_direction_at_origin() {
    let m = perturbed(0.5, 2.0, 0.05);
    let z = Point2::new(0.01, -0.004);
    let leaf = integrate_leaf(&m, z, 7, 0.01, 0.01 / 512.0).unwrap();
    let d = stable_leaf::directions::direction_at(&m, z, 7).unwrap();
    assert!((leaf.origin().theta - d.theta).abs() <= 1e-10);
}

#[test]
fn errors_are_typed() {
    assert!(matches!(EpsilonSchedule::geometric(0.1, 1.5), Err(Error::Schedule(_))));
    let m = linear(0.5, 2.0);
    let far = Point2::new(100.0, 0.0);
    assert!(integrate_leaf(&m, far, 3, 0.1, 0.001).is_err());
}
