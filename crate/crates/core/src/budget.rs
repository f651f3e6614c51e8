//! Sampled approximations of the dynamical neighbourhoods
//! `N^(k) = {x : |φʲ(x) − φʲ(z)| ≤ ε_j for all j ≤ k−1}` and the hyperbolicity
//! budget estimated over them.
//!
//! Every supremum over `N^(k)` is replaced by a maximum over seeded sample
//! points (plus the base point itself). Sampled maxima can only understate the
//! true suprema, so all verdicts derived from a budget are heuristic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{build_orbit_cocycle, distortion_bounds, OrbitCocycle};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::map::MapModel;

pub const DEFAULT_SAMPLES: usize = 2000;
/// Multiplicative slack applied to assertions that rest on sampled maxima.
pub const SAMPLED_SLACK: f64 = 1.05;
/// Number of trailing terms used for the ratio fit of condition (*).
const TAIL_FIT_TERMS: usize = 5;
const SUMMABLE_RATIO: f64 = 0.95;
/// Per-step growth of the `(**)` profile above which no uniform constant is
/// considered to exist.
const GAMMA_GROWTH_LIMIT: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `ε_j = eps0 · decayʲ`
    Geometric { eps0: f64, decay: f64 },
    /// Explicit values; indices past the end repeat the last value.
    Explicit { values: Vec<f64> },
}

impl EpsilonSchedule {
    pub fn geometric(eps0: f64, decay: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::Schedule(format!("eps0 = {eps0} must be positive")));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::Schedule(format!("decay = {decay} must lie in (0, 1]")));
        }
        Ok(EpsilonSchedule::Geometric { eps0, decay })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        Self::geometric(eta, 1.0)
    }

    /// Rejects empty, non-positive or increasing lists.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Schedule("empty schedule".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Schedule(format!("value {v} is not positive")));
        }
        if let Some(w) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Schedule(format!(
                "schedule increases at index {}: {} < {}",
                w + 1,
                values[w],
                values[w + 1]
            )));
        }
        Ok(EpsilonSchedule::Explicit { values })
    }

    pub fn eps(&self, j: usize) -> f64 {
        match self {
            EpsilonSchedule::Geometric { eps0, decay } => eps0 * decay.powi(j as i32),
            EpsilonSchedule::Explicit { values } => values[j.min(values.len() - 1)],
        }
    }

    pub fn eps0(&self) -> f64 {
        self.eps(0)
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|j| self.eps(j)).collect()
    }
}

/// Number of leading iterates of `x` that stay in the ε-tubes around the
/// reference orbit: the largest `m ≤ max_j + 1` with
/// `|φʲ(x) − φʲ(z)| ≤ ε_j` for all `j < m`. Leaving the map domain counts as
/// leaving the tube. `x ∈ N^(k)` exactly when `k ≤ m`.
pub fn tube_depth(
    map: &MapModel,
    reference: &[Point2],
    sched: &EpsilonSchedule,
    x: Point2,
    max_j: usize,
) -> usize {
    let mut p = x;
    for j in 0..=max_j.min(reference.len().saturating_sub(1)) {
        if !map.contains(p) || p.dist(reference[j]) > sched.eps(j) {
            return j;
        }
        if j == max_j {
            break;
        }
        match map.evaluate(p) {
            Ok(q) => p = q,
            Err(_) => return j + 1,
        }
    }
    (max_j + 1).min(reference.len())
}

/// First `j ≤ kmax` at which the orbit of `x` leaves the ε_j-tube around the
/// orbit of `z`, or `None` if it stays through `kmax`.
pub fn exit_index(
    map: &MapModel,
    z: Point2,
    sched: &EpsilonSchedule,
    x: Point2,
    kmax: usize,
) -> Result<Option<usize>> {
    let reference = crate::cocycle::orbit(map, z, kmax)?;
    let depth = tube_depth(map, &reference, sched, x, kmax);
    Ok((depth <= kmax).then_some(depth))
}

/// Uniform draws from the disc of radius `radius` around `center`.
pub fn draw_disc(center: Point2, radius: f64, n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let a = std::f64::consts::TAU * rng.gen::<f64>();
            center + Point2::from_angle(a).scale(r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodSample {
    pub k: usize,
    pub points: Vec<Point2>,
    pub seed: u64,
    pub requested: usize,
    pub accepted: usize,
}

/// Seeded rejection sample of `N^(k)`: `n` uniform draws from the ε_0 disc
/// around `z`, keeping those whose first `k−1` iterates stay in the tubes.
/// The draws depend only on `seed` and `n`, so samples for increasing `k`
/// are nested.
pub fn sample_neighborhood(
    map: &MapModel,
    z: Point2,
    sched: &EpsilonSchedule,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<NeighborhoodSample> {
    if k < 1 || n < 1 {
        return Err(Error::BadParams("sample_neighborhood needs k >= 1 and n >= 1".into()));
    }
    let reference = crate::cocycle::orbit(map, z, k - 1)?;
    let points: Vec<Point2> = draw_disc(z, sched.eps0(), n, seed)
        .into_iter()
        .filter(|&x| tube_depth(map, &reference, sched, x, k - 1) >= k)
        .collect();
    if points.is_empty() {
        return Err(Error::EmptySample(k));
    }
    Ok(NeighborhoodSample {
        k,
        accepted: points.len(),
        points,
        seed,
        requested: n,
    })
}

/// The raw per-k maxima a budget is derived from. `p, q, p_tilde` run over
/// `k = 0..=kmax`; the other sequences over `k = 0..=kmax+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSequences {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_star: Vec<f64>,
    pub delta: Vec<f64>,
    pub f_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityBudget {
    pub kmax: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_star: Vec<f64>,
    pub delta: Vec<f64>,
    pub f_max: Vec<f64>,
    /// `ξ_k = p_k q_k γ_{k+1} / (1 − p_k q_k γ_{k+1})`, `+∞` when the
    /// denominator is not positive.
    pub xi: Vec<f64>,
    /// `γ̃_k = γ*_k + 2 Fmax_k Σ_{i=k}^{kmax−1} p_i q_i γ_{i+1}`
    pub gamma_tilde: Vec<f64>,
    /// `p_k q_k γ_{k+1} + p̃_k q_k⁵ p_k³ γ*_{k+1} + p_k⁵ q_k⁵ δ_k + p_k² q_k² δ_{k+1}`
    pub star_terms: Vec<f64>,
    /// `Σ_{i=1}^{k}` of the star terms.
    pub star_partial_sums: Vec<f64>,
    pub k0: Option<usize>,
    /// Minimal Γ for `(**)` against the schedule the budget was built with.
    pub gamma_required: Option<f64>,
    /// Sample points contributing at each `k` (base point included).
    pub accepted: Vec<usize>,
    pub requested: usize,
    pub seed: u64,
}

impl HyperbolicityBudget {
    pub fn from_sequences(s: BudgetSequences) -> Result<Self> {
        let kmax = s.p.len().checked_sub(1).ok_or_else(|| Error::BadParams("empty budget".into()))?;
        if s.q.len() != kmax + 1 || s.p_tilde.len() != kmax + 1 {
            return Err(Error::BadParams("p, q, p_tilde must have equal length".into()));
        }
        for v in [&s.gamma, &s.gamma_star, &s.delta, &s.f_max] {
            if v.len() != kmax + 2 {
                return Err(Error::BadParams(
                    "gamma, gamma_star, delta, f_max must be one longer than p".into(),
                ));
            }
        }
        let pqg: Vec<f64> = (0..=kmax).map(|k| s.p[k] * s.q[k] * s.gamma[k + 1]).collect();
        let xi = pqg
            .iter()
            .map(|&x| if x < 1.0 { x / (1.0 - x) } else { f64::INFINITY })
            .collect();
        let star_terms: Vec<f64> = (0..=kmax)
            .map(|k| {
                let (p, q) = (s.p[k], s.q[k]);
                pqg[k]
                    + s.p_tilde[k] * q.powi(5) * p.powi(3) * s.gamma_star[k + 1]
                    + p.powi(5) * q.powi(5) * s.delta[k]
                    + p.powi(2) * q.powi(2) * s.delta[k + 1]
            })
            .collect();
        let mut star_partial_sums = vec![0.0; kmax + 1];
        for k in 1..=kmax {
            star_partial_sums[k] = star_partial_sums[k - 1] + star_terms[k];
        }
        // k0 = min{ j ≥ 1 : p_k q_k γ_{k+1} < 1/2 for all computed k ≥ j − 1 }
        let k0 = match pqg.iter().rposition(|&x| !(x < 0.5)) {
            None => Some(1),
            Some(last_bad) if last_bad < kmax => Some(last_bad + 2),
            Some(_) => None,
        };
        let gamma_tilde = (0..=kmax)
            .map(|k| {
                let tail: f64 = pqg[k..kmax.max(k)].iter().sum();
                s.gamma_star[k] + 2.0 * s.f_max[k] * tail
            })
            .collect();
        Ok(HyperbolicityBudget {
            kmax,
            p: s.p,
            q: s.q,
            p_tilde: s.p_tilde,
            gamma: s.gamma,
            gamma_star: s.gamma_star,
            delta: s.delta,
            f_max: s.f_max,
            xi,
            gamma_tilde,
            star_terms,
            star_partial_sums,
            k0,
            gamma_required: None,
            accepted: Vec::new(),
            requested: 0,
            seed: 0,
        })
    }

    /// `p_k q_k γ_{k+1}`
    pub fn contraction_product(&self, k: usize) -> f64 {
        self.p[k] * self.q[k] * self.gamma[k + 1]
    }

    pub fn k0(&self) -> Result<usize> {
        self.k0.ok_or(Error::NoK0(self.kmax))
    }

    #[cfg(test)]
    pub(crate) fn synthetic_for_tests(
        kmax: usize,
        f: impl Fn(usize) -> (f64, f64, f64, f64, f64, f64),
    ) -> Self {
        let mut s = BudgetSequences {
            p: vec![],
            q: vec![],
            p_tilde: vec![],
            gamma: vec![],
            gamma_star: vec![],
            delta: vec![],
            f_max: vec![],
        };
        for k in 0..=kmax + 1 {
            let (p, q, pt, g, gs, d) = f(k);
            if k <= kmax {
                s.p.push(p);
                s.q.push(q);
                s.p_tilde.push(pt);
            }
            s.gamma.push(g);
            s.gamma_star.push(gs);
            s.delta.push(d);
            s.f_max.push(1.0);
        }
        Self::from_sequences(s).unwrap()
    }
}

/// One sample point's contribution: its tube depth and the cocycle built as
/// far as the point's membership (and the domain) allows.
struct PointData {
    depth: usize,
    cocycle: Option<OrbitCocycle>,
    /// `δ_k` contributions for `k = 1..=order`.
    delta: Vec<f64>,
}

fn point_data(
    map: &MapModel,
    reference: &[Point2],
    sched: &EpsilonSchedule,
    x: Point2,
    kmax: usize,
) -> PointData {
    let depth = tube_depth(map, reference, sched, x, kmax);
    let mut order = (depth + 1).min(kmax + 1);
    let cocycle = loop {
        if order == 0 {
            break None;
        }
        match build_orbit_cocycle(map, x, order) {
            Ok(c) => break Some(c),
            Err(Error::OrbitEscape(j)) if j >= 1 && j - 1 < order => order = j - 1,
            Err(_) => break None,
        }
    };
    let delta = cocycle
        .as_ref()
        .map(|c| {
            (1..=c.kmax())
                .map(|k| distortion_bounds(c, k).map(|(a, b)| a + b).unwrap_or(f64::NAN))
                .collect()
        })
        .unwrap_or_default();
    PointData {
        depth,
        cocycle,
        delta,
    }
}

/// Estimates every budget sequence up to `kmax` (γ, γ*, δ, Fmax one further)
/// over seeded samples of the neighbourhoods, then derives `ξ`, `γ̃`, the
/// condition (*) terms, `k0` and the `(**)` constant.
///
/// `N^(0)` is taken to be `N^(1)`. The base point always belongs to every
/// sample; sample points whose orbits leave the domain are excluded from the
/// orders they cannot reach.
pub fn estimate_budget(
    map: &MapModel,
    z: Point2,
    sched: &EpsilonSchedule,
    kmax: usize,
    n: usize,
    seed: u64,
) -> Result<HyperbolicityBudget> {
    if kmax < 2 {
        return Err(Error::BadParams(format!("budget needs kmax >= 2, got {kmax}")));
    }
    let reference = crate::cocycle::orbit(map, z, kmax + 1)?;
    // the base point's cocycle must reach kmax + 1
    build_orbit_cocycle(map, z, kmax + 1)?;
    let mut points = vec![z];
    points.extend(draw_disc(z, sched.eps0(), n, seed));

    let data: Vec<PointData> = points
        .par_iter()
        .map(|&x| point_data(map, &reference, sched, x, kmax + 1))
        .collect();

    let len = kmax + 2;
    let mut s = BudgetSequences {
        p: vec![0.0; kmax + 1],
        q: vec![0.0; kmax + 1],
        p_tilde: vec![0.0; kmax + 1],
        gamma: vec![0.0; len],
        gamma_star: vec![0.0; len],
        delta: vec![0.0; len],
        f_max: vec![0.0; len],
    };
    let mut accepted = vec![0usize; len];
    for d in &data {
        let Some(c) = &d.cocycle else { continue };
        for k in 0..len {
            if d.depth < k.max(1) || c.kmax() < k {
                continue;
            }
            accepted[k] += 1;
            s.gamma[k] = s.gamma[k].max(c.h(k));
            s.gamma_star[k] = s.gamma_star[k].max(c.e(k));
            s.f_max[k] = s.f_max[k].max(c.f(k));
            if k >= 1 {
                s.delta[k] = s.delta[k].max(d.delta[k - 1]);
            }
            if k <= kmax && c.kmax() > k {
                s.p[k] = s.p[k].max(c.per_step.p[k]);
                s.q[k] = s.q[k].max(c.per_step.q[k]);
                s.p_tilde[k] = s.p_tilde[k].max(c.per_step.p_tilde[k]);
            }
        }
    }
    if let Some(k) = accepted.iter().position(|&a| a == 0) {
        return Err(Error::EmptySample(k));
    }
    let mut budget = HyperbolicityBudget::from_sequences(s)?;
    budget.accepted = accepted;
    budget.requested = n;
    budget.seed = seed;
    if budget.k0.is_some() {
        let report = check_condition_double_star(&budget, sched);
        budget.gamma_required = Some(report.gamma_required);
    }
    Ok(budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StarVerdict {
    SummableHeuristic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarReport {
    /// Terms for `k = 1..=kmax`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Geometric ratio fitted to the last five terms.
    pub tail_ratio: Option<f64>,
    pub verdict: StarVerdict,
    pub truncation: usize,
    pub heuristic: bool,
}

/// Partial sums of the condition (*) series and a ratio-test verdict on the
/// trailing terms.
pub fn check_condition_star(b: &HyperbolicityBudget) -> StarReport {
    let terms: Vec<f64> = b.star_terms[1..].to_vec();
    let partial_sums = b.star_partial_sums[1..].to_vec();
    let tail_ratio = if terms.len() < TAIL_FIT_TERMS {
        None
    } else {
        let tail = &terms[terms.len() - TAIL_FIT_TERMS..];
        if tail.iter().all(|&t| t == 0.0) {
            Some(0.0)
        } else if tail.iter().all(|&t| t > 0.0 && t.is_finite()) {
            let pts: Vec<(f64, f64)> = tail.iter().enumerate().map(|(i, t)| (i as f64, t.ln())).collect();
            Some(least_squares_slope(&pts).exp())
        } else {
            None
        }
    };
    let verdict = match tail_ratio {
        Some(r) if r < SUMMABLE_RATIO => StarVerdict::SummableHeuristic,
        _ => StarVerdict::Inconclusive,
    };
    StarReport {
        terms,
        partial_sums,
        tail_ratio,
        verdict,
        truncation: b.kmax,
        heuristic: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DoubleStarVerdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleStarReport {
    /// `max (γ̃_j + 4 Fmax_j p_k q_k γ_{k+1}) / ε_j` over `k0 ≤ j ≤ k ≤ kmax`.
    pub gamma_required: f64,
    pub argmax_j: usize,
    pub argmax_k: usize,
    /// Running maximum over `j ≤ k` for each `k = k0..=kmax`.
    pub profile: Vec<f64>,
    /// Geometric growth per step of the profile over its last entries.
    pub profile_growth: Option<f64>,
    pub verdict: DoubleStarVerdict,
    pub truncation: usize,
    pub heuristic: bool,
}

/// The smallest Γ satisfying `(**)` on the computed range.
///
/// `(**)` asks for one Γ that works for every `k`; if the running maximum
/// keeps growing geometrically with `k` the report is marked infeasible.
pub fn check_condition_double_star(b: &HyperbolicityBudget, sched: &EpsilonSchedule) -> DoubleStarReport {
    let Some(k0) = b.k0 else {
        return DoubleStarReport {
            gamma_required: f64::INFINITY,
            argmax_j: 0,
            argmax_k: 0,
            profile: vec![],
            profile_growth: None,
            verdict: DoubleStarVerdict::Infeasible,
            truncation: b.kmax,
            heuristic: true,
        };
    };
    let mut best = (0.0f64, k0, k0);
    let mut profile = Vec::new();
    for k in k0..=b.kmax {
        let pqg = b.contraction_product(k);
        for j in k0..=k {
            let v = (b.gamma_tilde[j] + 4.0 * b.f_max[j] * pqg) / sched.eps(j);
            if v > best.0 {
                best = (v, j, k);
            }
        }
        profile.push(best.0);
    }
    let profile_growth = (profile.len() >= 2).then(|| {
        let n = profile.len().min(TAIL_FIT_TERMS);
        let (first, last) = (profile[profile.len() - n], profile[profile.len() - 1]);
        if first > 0.0 {
            (last / first).powf(1.0 / (n - 1) as f64)
        } else if last > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    });
    let verdict = if !best.0.is_finite() || profile_growth.is_some_and(|g| g > GAMMA_GROWTH_LIMIT) {
        DoubleStarVerdict::Infeasible
    } else {
        DoubleStarVerdict::Feasible
    };
    DoubleStarReport {
        gamma_required: best.0,
        argmax_j: best.1,
        argmax_k: best.2,
        profile,
        profile_growth,
        verdict,
        truncation: b.kmax,
        heuristic: true,
    }
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::builtin::linear;

    fn linear_budget(kmax: usize) -> HyperbolicityBudget {
        let sched = EpsilonSchedule::constant(0.1).unwrap();
        estimate_budget(&linear(0.5, 2.0), Point2::ORIGIN, &sched, kmax, 400, 7).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::geometric(0.1, 1.5).is_err());
        assert!(EpsilonSchedule::geometric(0.1, 0.0).is_err());
        assert!(EpsilonSchedule::geometric(-0.1, 0.5).is_err());
        assert!(EpsilonSchedule::explicit(vec![0.1, 0.2]).is_err());
        assert!(EpsilonSchedule::explicit(vec![0.1, 0.0]).is_err());
        let s = EpsilonSchedule::explicit(vec![0.2, 0.1, 0.1]).unwrap();
        assert_eq!(s.eps(7), 0.1);
        let g = EpsilonSchedule::geometric(0.1, 0.5).unwrap();
        assert_eq!(g.eps(2), 0.025);
    }

    #[test]
    fn first_order_sample_accepts_everything() {
        let sched = EpsilonSchedule::constant(0.1).unwrap();
        let s = sample_neighborhood(&linear(0.5, 2.0), Point2::ORIGIN, &sched, 1, 300, 42).unwrap();
        assert_eq!(s.accepted, 300);
    }

    #[test]
    fn sampling_is_deterministic() {
        let sched = EpsilonSchedule::constant(0.1).unwrap();
        let m = linear(0.5, 2.0);
        let a = sample_neighborhood(&m, Point2::ORIGIN, &sched, 4, 500, 42).unwrap();
        let b = sample_neighborhood(&m, Point2::ORIGIN, &sched, 4, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_budget_matches_closed_form() {
        let b = linear_budget(10);
        for k in 0..=10 {
            assert_eq!(b.p[k], 2.0);
            assert_eq!(b.q[k], 2.0);
            assert_eq!(b.p_tilde[k], 0.0);
            assert_eq!(b.delta[k], 0.0);
            let g = 4f64.powi(-(k as i32));
            assert!((b.gamma[k] - g).abs() <= 1e-12 * g);
            assert!((b.gamma_star[k] - 2f64.powi(-(k as i32))).abs() <= 1e-15);
        }
        assert_eq!(b.k0, Some(2));
        assert!((b.xi[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn star_verdicts() {
        let b = linear_budget(10);
        let r = check_condition_star(&b);
        assert_eq!(r.verdict, StarVerdict::SummableHeuristic);
        assert!((r.tail_ratio.unwrap() - 0.25).abs() < 1e-12);

        let short = linear_budget(3);
        assert_eq!(check_condition_star(&short).verdict, StarVerdict::Inconclusive);

        let flat = HyperbolicityBudget::synthetic_for_tests(10, |_| (1.0, 1.0, 0.0, 1.0, 1.0, 0.0));
        let r = check_condition_star(&flat);
        assert_eq!(r.verdict, StarVerdict::Inconclusive);
        assert_eq!(flat.k0, None);
    }

    #[test]
    fn double_star_zero_numerator() {
        let mut s = BudgetSequences {
            p: vec![1.0; 6],
            q: vec![1.0; 6],
            p_tilde: vec![0.0; 6],
            gamma: vec![0.0; 7],
            gamma_star: vec![0.0; 7],
            delta: vec![0.0; 7],
            f_max: vec![0.0; 7],
        };
        s.gamma[0] = 1.0;
        let b = HyperbolicityBudget::from_sequences(s).unwrap();
        let sched = EpsilonSchedule::constant(0.1).unwrap();
        assert_eq!(check_condition_double_star(&b, &sched).gamma_required, 0.0);
    }

    #[test]
    fn least_squares_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        assert!((least_squares_slope(&pts) + 0.5).abs() < 1e-15);
    }
}
