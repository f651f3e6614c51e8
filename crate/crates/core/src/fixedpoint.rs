//! Hyperbolic fixed points as an end-to-end scenario: locate the saddle,
//! split its eigen-directions, check the regular-growth estimates on its
//! neighbourhood and run the full leaf pipeline against the linearisation.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{
    check_condition_double_star, check_condition_star, draw_disc, estimate_budget, tube_depth,
    DoubleStarReport, EpsilonSchedule, HyperbolicityBudget, StarReport, DEFAULT_SAMPLES, SAMPLED_SLACK,
};
use crate::cocycle::{build_orbit_cocycle, distortion_bounds, orbit};
use crate::directions::OneStepDistortion;
use crate::error::{Error, Result};
use crate::geometry::{direction_gap, Mat2, Point2};
use crate::leaf::{
    cauchy_iterate, choose_epsilon, contraction_check, measure_lipschitz, uniqueness_probe,
    ContractionReport, ConvergenceReport, LeafOptions, UniquenessReport,
};
use crate::map::MapModel;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const FIXED_POINT_RESIDUAL: f64 = 1e-10;
const UNIT_CIRCLE_GAP: f64 = 1e-9;
const K_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointData {
    pub p: Point2,
    pub lambda_s: f64,
    pub lambda_u: f64,
    #[serde(rename = "Es")]
    pub es: Point2,
    #[serde(rename = "Eu")]
    pub eu: Point2,
    pub eta: f64,
    pub delta: f64,
    #[serde(rename = "K_fit")]
    pub k_fit: Option<f64>,
    pub residual: f64,
}

impl FixedPointData {
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Default spectral slack `0.05 (|λu| − 1)`.
    pub fn default_delta(lambda_u: f64) -> f64 {
        0.05 * (lambda_u.abs() - 1.0)
    }
}

/// Unit eigenvector of `m` for the real eigenvalue `lambda`, with a
/// non-negative first component.
fn eigenvector(m: &Mat2, lambda: f64) -> Point2 {
    let a = Point2::new(m.a12, lambda - m.a11);
    let b = Point2::new(lambda - m.a22, m.a21);
    let v = if a.norm() >= b.norm() { a } else { b };
    let v = v.scale(1.0 / v.norm());
    if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
        -v
    } else {
        v
    }
}

/// Damped Newton iteration for `φ(p) = p` from `guess`, followed by the
/// eigen-split of `Dφ(p)`.
pub fn eigen_split(map: &MapModel, guess: Point2) -> Result<FixedPointData> {
    let residual = |p: Point2| -> Result<f64> { Ok((map.evaluate(p)? - p).norm()) };
    let mut p = guess;
    let mut r = residual(p)?;
    for _ in 0..NEWTON_MAX_ITER {
        if r <= NEWTON_TOL {
            break;
        }
        let step = (map.jacobian(p)? - Mat2::IDENTITY)
            .inverse()
            .ok_or(Error::NoFixedPoint(r))?
            .apply(map.evaluate(p)? - p);
        let mut alpha = 1.0;
        loop {
            let cand = p - step.scale(alpha);
            if let Ok(rc) = residual(cand) {
                if rc < r {
                    p = cand;
                    r = rc;
                    break;
                }
            }
            alpha /= 2.0;
            if alpha < 1e-10 {
                return Err(Error::NoFixedPoint(r));
            }
        }
    }
    if !(r <= FIXED_POINT_RESIDUAL) {
        return Err(Error::NoFixedPoint(r));
    }

    let m = map.jacobian(p)?;
    let (tr, det) = (m.trace(), m.det());
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        let modulus = det.abs().sqrt();
        return Err(Error::NotHyperbolic(modulus, modulus));
    }
    let root = disc.sqrt();
    let l1 = tr / 2.0 + if tr >= 0.0 { root } else { -root };
    let l2 = if l1 != 0.0 { det / l1 } else { tr / 2.0 - root };
    let (ls, lu) = if l1.abs() <= l2.abs() { (l1, l2) } else { (l2, l1) };
    let near_unit = |l: f64| (l.abs() - 1.0).abs() <= UNIT_CIRCLE_GAP;
    if near_unit(ls) || near_unit(lu) || !(ls.abs() < 1.0 && lu.abs() > 1.0) || ls == 0.0 {
        return Err(Error::NotHyperbolic(ls.abs(), lu.abs()));
    }
    Ok(FixedPointData {
        p,
        lambda_s: ls,
        lambda_u: lu,
        es: eigenvector(&m, ls),
        eu: eigenvector(&m, lu),
        eta: 0.0,
        delta: FixedPointData::default_delta(lu),
        k_fit: None,
        residual: r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub eta: f64,
    pub delta: f64,
    pub kmax: usize,
    pub points: usize,
    /// Smallest `K ≥ 1` with `F_j ≤ K(|λu|+δ)ʲ` and `E_j ≥ K⁻¹(|λs|−δ)ʲ`.
    #[serde(rename = "K_fit")]
    pub k_fit: f64,
    /// Largest of `Σ_{j<k} F_j / F_k`, `F_j F_{j,k} / F_k`, `Σ_{j≤i≤k} H_i / H_j`.
    #[serde(rename = "K_aggregate")]
    pub k_aggregate: f64,
    /// Largest distortion sum from the second-derivative bounds.
    #[serde(rename = "K_distortion")]
    pub k_distortion: f64,
    /// Count of points with `F_j < (|λu|−δ)ʲ` or `E_j > (|λs|+δ)ʲ`.
    pub strict_violations: usize,
}

impl GrowthReport {
    /// One constant covering all three groups of estimates.
    pub fn k_combined(&self) -> f64 {
        self.k_fit.max(self.k_aggregate).max(self.k_distortion)
    }
}

struct PointGrowth {
    k_fit: f64,
    k_aggregate: f64,
    k_distortion: f64,
    violated: bool,
}

fn point_growth(map: &MapModel, fp: &FixedPointData, x: Point2, depth: usize, kmax: usize) -> Option<PointGrowth> {
    let order = depth.min(kmax);
    if order == 0 {
        return None;
    }
    let c = build_orbit_cocycle(map, x, order).ok()?;
    let (ls, lu, d) = (fp.lambda_s.abs(), fp.lambda_u.abs(), fp.delta);
    let tol = 1e-12;
    let mut out = PointGrowth {
        k_fit: 1.0,
        k_aggregate: 0.0,
        k_distortion: 0.0,
        violated: false,
    };
    for j in 1..=order {
        let (e, f) = (c.e(j), c.f(j));
        let jj = j as i32;
        if f < (lu - d).powi(jj) * (1.0 - tol) || e > (ls + d).powi(jj) * (1.0 + tol) {
            out.violated = true;
        }
        out.k_fit = out.k_fit.max(f / (lu + d).powi(jj));
        if ls > d {
            out.k_fit = out.k_fit.max((ls - d).powi(jj) / e);
        }
    }
    for k in 1..=order {
        let row = c.tail_growth_row(k).ok()?;
        let fk = c.f(k);
        let sum_f: f64 = (0..k).map(|j| c.f(j)).sum();
        out.k_aggregate = out.k_aggregate.max(sum_f / fk);
        for j in 0..k {
            out.k_aggregate = out.k_aggregate.max(c.f(j) * row[j] / fk);
        }
        let (d1, d2) = distortion_bounds(&c, k).ok()?;
        out.k_distortion = out.k_distortion.max(d1 + d2);
    }
    for j in 0..=order {
        let tail: f64 = (j..=order).map(|i| c.h(i)).sum();
        out.k_aggregate = out.k_aggregate.max(tail / c.h(j));
    }
    Some(out)
}

/// Fits the constant of the regular-growth estimates over seeded samples of
/// the neighbourhoods `N^(k)` of the fixed point.
///
/// Fails with `SpectralSlack` when a slack-free inequality is violated or no
/// constant below `10⁶` fits.
pub fn regular_growth_check(
    map: &MapModel,
    fp: &FixedPointData,
    sched: &EpsilonSchedule,
    kmax: usize,
    n: usize,
    seed: u64,
) -> Result<GrowthReport> {
    let reference = orbit(map, fp.p, kmax)?;
    let mut points = vec![fp.p];
    points.extend(draw_disc(fp.p, sched.eps0(), n, seed));
    let rows: Vec<PointGrowth> = points
        .par_iter()
        .filter_map(|&x| {
            let depth = tube_depth(map, &reference, sched, x, kmax);
            point_growth(map, fp, x, depth, kmax)
        })
        .collect();
    let report = GrowthReport {
        eta: sched.eps0(),
        delta: fp.delta,
        kmax,
        points: rows.len(),
        k_fit: rows.iter().map(|r| r.k_fit).fold(1.0, f64::max),
        k_aggregate: rows.iter().map(|r| r.k_aggregate).fold(0.0, f64::max),
        k_distortion: rows.iter().map(|r| r.k_distortion).fold(0.0, f64::max),
        strict_violations: rows.iter().filter(|r| r.violated).count(),
    };
    if report.strict_violations > 0 {
        return Err(Error::SpectralSlack(format!(
            "{} sampled points break the slack-free growth bounds at eta = {}, delta = {}",
            report.strict_violations, report.eta, report.delta
        )));
    }
    if !(report.k_combined() <= K_LIMIT) {
        return Err(Error::SpectralSlack(format!(
            "growth constant {} exceeds {K_LIMIT:e}",
            report.k_combined()
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremOptions {
    pub kmax: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub pairs: usize,
    pub probes: usize,
    pub leaf: LeafOptions,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        TheoremOptions {
            kmax: 16,
            samples: DEFAULT_SAMPLES,
            seed: 42,
            tol: 1e-8,
            pairs: 64,
            probes: 200,
            leaf: LeafOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tangency {
    /// Angle between the limit-leaf tangent at `p` and `Es`, in `[0, π/2]`.
    pub angle_error: f64,
    pub leaf_theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafLength {
    pub eps: f64,
    pub reach_neg: f64,
    pub reach_pos: f64,
    pub full_length: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionRate {
    pub fitted_log_rate: Option<f64>,
    pub ln_lambda_s: f64,
    pub deviation: Option<f64>,
    pub fit_range: (usize, usize),
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessSummary {
    pub probes: usize,
    pub probes_exiting: usize,
    pub on_leaf_checked: usize,
    pub on_leaf_exits: usize,
    pub offset_exits: Vec<Option<usize>>,
    pub survivor_max_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralChecks {
    /// Every one-step ratio at the fixed point lies in its sandwich.
    pub minidistortion_ok: bool,
    /// `k0` is the least index from which `p_k q_k γ_{k+1} < 1/2` holds onward.
    pub k0_definition_ok: bool,
    pub gamma_required_finite: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub fixed_point: FixedPointData,
    pub eta: f64,
    pub k0: usize,
    pub gamma_required: f64,
    pub gamma_used: f64,
    pub eps: f64,
    pub condition_star: StarReport,
    pub condition_double_star: DoubleStarReport,
    pub convergence: ConvergenceReport,
    pub tangency: Tangency,
    pub leaf_length: LeafLength,
    pub contraction_rate: ContractionRate,
    pub uniqueness: UniquenessSummary,
    pub growth: Option<GrowthReport>,
    pub growth_error: Option<String>,
    pub checks: StructuralChecks,
    #[serde(skip)]
    pub budget: HyperbolicityBudget,
    #[serde(skip)]
    pub contraction: ContractionReport,
    #[serde(skip)]
    pub uniqueness_detail: UniquenessReport,
}

/// `k0` re-derived from its definition.
pub fn k0_definition_holds(b: &HyperbolicityBudget) -> bool {
    let Some(k0) = b.k0 else { return false };
    let onward = (k0 - 1..=b.kmax).all(|k| b.contraction_product(k) < 0.5);
    let minimal = k0 == 1 || !(b.contraction_product(k0 - 2) < 0.5);
    onward && minimal
}

/// Budget, conditions, ε, leaves, contraction and uniqueness on the constant
/// schedule `ε_j = eta`, compared with the linearisation at the fixed point.
pub fn verify_fixed_point_theorem(
    map: &MapModel,
    fp: &FixedPointData,
    eta: f64,
    opts: &TheoremOptions,
) -> Result<TheoremReport> {
    let fp = fp.clone().with_eta(eta);
    let p = fp.p;
    let sched = EpsilonSchedule::constant(eta)?;
    let b = estimate_budget(map, p, &sched, opts.kmax, opts.samples, opts.seed).map_err(|e| e.at_stage("budget"))?;
    let k0 = b.k0().map_err(|e| e.at_stage("budget"))?;
    let star = check_condition_star(&b);
    let dstar = check_condition_double_star(&b, &sched);
    let gamma_used = dstar.gamma_required * SAMPLED_SLACK;

    let lip = match opts.leaf.lip {
        Some(l) => l,
        None => measure_lipschitz(map, &[p], &[k0, opts.kmax]).map_err(|e| e.at_stage("lipschitz"))?,
    };
    let eps = choose_epsilon(&b, gamma_used, lip, &sched, Some((map, p))).map_err(|e| e.at_stage("epsilon"))?;
    let mut conv = cauchy_iterate(map, p, &b, &sched, eps, opts.kmax, opts.tol, opts.leaf)
        .map_err(|e| e.at_stage("leaf"))?;
    let contraction = contraction_check(map, &conv.limit, &b, opts.kmax, opts.pairs, opts.seed)
        .map_err(|e| e.at_stage("contraction"))?;
    conv.c_fit = contraction.c_fit;
    let uniq = uniqueness_probe(map, p, &sched, &conv.limit, opts.kmax, opts.probes, opts.seed)
        .map_err(|e| e.at_stage("uniqueness"))?;
    let (growth, growth_error) = match regular_growth_check(map, &fp, &sched, opts.kmax, opts.samples, opts.seed) {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let leaf_theta = conv.limit.origin().theta;
    let tangency = Tangency {
        angle_error: direction_gap(leaf_theta, fp.es.y.atan2(fp.es.x)),
        leaf_theta,
    };
    let (reach_neg, reach_pos) = conv.limit.reach();
    let leaf_length = LeafLength {
        eps,
        reach_neg,
        reach_pos,
        full_length: conv.limit.full_length(),
    };
    let ln_ls = fp.lambda_s.abs().ln();
    let contraction_rate = ContractionRate {
        fitted_log_rate: contraction.rate_fit,
        ln_lambda_s: ln_ls,
        deviation: contraction.rate_fit.map(|r| r - ln_ls),
        fit_range: contraction.fit_range,
        c_fit: contraction.c_fit,
    };
    let uniqueness = UniquenessSummary {
        probes: uniq.probes.len(),
        probes_exiting: uniq.probes.iter().filter(|r| r.exit.is_some()).count(),
        on_leaf_checked: uniq.on_leaf_checked,
        on_leaf_exits: uniq.on_leaf_exits,
        offset_exits: uniq.offset_probes.iter().map(|r| r.exit).collect(),
        survivor_max_distance: uniq.survivor_max_distance,
    };
    let c = build_orbit_cocycle(map, p, opts.kmax).map_err(|e| e.at_stage("cocycle"))?;
    let minidistortion_ok = (0..opts.kmax).all(|k| OneStepDistortion::of(&c, k).is_ok_and(|d| d.holds(1e-12)));
    let checks = StructuralChecks {
        minidistortion_ok,
        k0_definition_ok: k0_definition_holds(&b),
        gamma_required_finite: dstar.gamma_required.is_finite(),
    };
    Ok(TheoremReport {
        eta,
        k0,
        gamma_required: dstar.gamma_required,
        gamma_used,
        eps,
        condition_star: star,
        condition_double_star: dstar,
        convergence: conv,
        tangency,
        leaf_length,
        contraction_rate,
        uniqueness,
        growth,
        growth_error,
        checks,
        fixed_point: fp,
        budget: b,
        contraction,
        uniqueness_detail: uniq,
    })
}
