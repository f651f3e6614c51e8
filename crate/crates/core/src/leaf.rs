//! Finite-time stable leaves `E^(k)(z, ε)`: integral curves of the unit field
//! `e^(k)` through `z`, parametrised by signed arclength on `[−ε, ε]`, and the
//! iteration in `k` towards the limit leaf.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{draw_disc, least_squares_slope, tube_depth, EpsilonSchedule, HyperbolicityBudget};
use crate::cocycle::{build_orbit_cocycle, orbit};
use crate::directions::{direction_at, direction_field_derivative};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::map::MapModel;

pub const DEFAULT_GRID: usize = 257;
/// Default integration step is `ε / STEPS_PER_EPS`.
pub const STEPS_PER_EPS: f64 = 512.0;
pub const GRONWALL_SLACK: f64 = 1.05;
/// Ladder `ε_0 · 2^{−m}` for `m = 0..=LADDER_RUNGS`.
pub const LADDER_RUNGS: i32 = 40;
/// Finite-difference step for measuring the Lipschitz constant of `e^(k)`.
pub const LIPSCHITZ_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafSample {
    pub t: f64,
    pub p: Point2,
    /// Unwrapped angle of the tangent `dp/dt`.
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafCurve {
    /// `None` marks the limit leaf.
    pub k: Option<usize>,
    pub z0: Point2,
    pub eps: f64,
    pub h: f64,
    /// Number of points of the full uniform grid on `[−ε, ε]`.
    pub grid: usize,
    /// Grid index of `samples[0]`.
    pub first_index: usize,
    pub samples: Vec<LeafSample>,
    pub truncated_neg: bool,
    pub truncated_pos: bool,
}

impl LeafCurve {
    pub fn center_index(&self) -> usize {
        (self.grid - 1) / 2
    }

    pub fn grid_t(eps: f64, grid: usize, g: usize) -> f64 {
        -eps + 2.0 * eps * g as f64 / (grid - 1) as f64
    }

    /// Sample at global grid index `g`, if the leaf reaches it.
    pub fn at_index(&self, g: usize) -> Option<&LeafSample> {
        g.checked_sub(self.first_index).and_then(|i| self.samples.get(i))
    }

    pub fn origin(&self) -> &LeafSample {
        self.at_index(self.center_index()).expect("leaf always contains its base point")
    }

    /// Arclength reached on the negative and positive side.
    pub fn reach(&self) -> (f64, f64) {
        let first = self.samples.first().map_or(0.0, |s| s.t);
        let last = self.samples.last().map_or(0.0, |s| s.t);
        (-first, last)
    }

    pub fn full_length(&self) -> bool {
        !self.truncated_neg && !self.truncated_pos
    }

    /// Maximum distance at matched parameter over the common range, and
    /// whether that range is shorter than the full grid.
    pub fn max_distance(&self, other: &LeafCurve) -> (f64, bool) {
        let lo = self.first_index.max(other.first_index);
        let hi = (self.first_index + self.samples.len()).min(other.first_index + other.samples.len());
        let d = (lo..hi)
            .map(|g| self.at_index(g).unwrap().p.dist(other.at_index(g).unwrap().p))
            .fold(0.0, f64::max);
        (d, !(self.full_length() && other.full_length()))
    }

    /// Distance from `x` to the polyline through the samples.
    pub fn distance_to(&self, x: Point2) -> f64 {
        if self.samples.len() == 1 {
            return x.dist(self.samples[0].p);
        }
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].p, w[1].p);
                let ab = b - a;
                let s = ((x - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
                x.dist(a + ab.scale(s))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|Δθ| / Δt` between adjacent samples.
    pub fn tangent_lipschitz(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].theta - w[0].theta).abs() / (w[1].t - w[0].t))
            .fold(0.0, f64::max)
    }
}

/// The unit field `e^(k)` oriented to make a non-negative angle with `along`.
fn oriented(map: &MapModel, x: Point2, k: usize, along: Point2) -> Result<Point2> {
    let e = direction_at(map, x, k)?.e;
    Ok(if e.dot(along) < 0.0 { -e } else { e })
}

fn rk4_step(map: &MapModel, x: Point2, k: usize, u: Point2, s: f64) -> Result<(Point2, Point2)> {
    let k1 = oriented(map, x, k, u)?;
    let k2 = oriented(map, x + k1.scale(s / 2.0), k, u)?;
    let k3 = oriented(map, x + k2.scale(s / 2.0), k, u)?;
    let k4 = oriented(map, x + k3.scale(s), k, u)?;
    let next = x + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(s / 6.0);
    let u_next = oriented(map, next, k, u)?;
    Ok((next, u_next))
}

/// `b − a` folded into `(−π, π]`.
fn signed_turn(a: f64, b: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let d = (b - a + PI).rem_euclid(TAU) - PI;
    if d == -PI {
        PI
    } else {
        d
    }
}

/// Integrates one side of the leaf; returns samples at grid steps `1..` and
/// whether the side was cut short.
fn integrate_side(
    map: &MapModel,
    z: Point2,
    k: usize,
    e0: Point2,
    sign: f64,
    eps: f64,
    h: f64,
    grid: usize,
    theta0: f64,
) -> (Vec<LeafSample>, bool) {
    let c = (grid - 1) / 2;
    let dt = eps / c as f64;
    let substeps = ((dt / h) - 1e-9).ceil().max(1.0) as usize;
    let s = dt / substeps as f64;
    let mut x = z;
    let mut u = e0.scale(sign);
    let mut theta = theta0;
    let mut out = Vec::with_capacity(c);
    for i in 1..=c {
        for _ in 0..substeps {
            match rk4_step(map, x, k, u, s) {
                Ok((nx, nu)) => {
                    x = nx;
                    u = nu;
                }
                Err(_) => return (out, true),
            }
        }
        if !map.contains(x) {
            return (out, true);
        }
        // tangent in increasing t
        let tangent = u.scale(sign);
        theta += signed_turn(theta, tangent.y.atan2(tangent.x));
        let g = if sign > 0.0 { c + i } else { c - i };
        out.push(LeafSample {
            t: LeafCurve::grid_t(eps, grid, g),
            p: x,
            theta,
        });
    }
    (out, false)
}

/// Classical fourth-order integration of `e^(k)` from `z` in both directions
/// up to arclength `eps`, sampled on a uniform grid of `grid` points.
pub fn integrate_leaf_on_grid(
    map: &MapModel,
    z: Point2,
    k: usize,
    eps: f64,
    h: f64,
    grid: usize,
) -> Result<LeafCurve> {
    if !(eps > 0.0 && h > 0.0) {
        return Err(Error::BadParams(format!("leaf needs eps > 0 and h > 0 (eps = {eps}, h = {h})")));
    }
    if grid < 3 || grid % 2 == 0 {
        return Err(Error::BadParams(format!("leaf grid must be odd and >= 3, got {grid}")));
    }
    map.check_domain(z)?;
    let d = direction_at(map, z, k)?;
    let (mut neg, truncated_neg) = integrate_side(map, z, k, d.e, -1.0, eps, h, grid, d.theta);
    let (pos, truncated_pos) = integrate_side(map, z, k, d.e, 1.0, eps, h, grid, d.theta);
    let c = (grid - 1) / 2;
    let first_index = c - neg.len();
    neg.reverse();
    neg.push(LeafSample {
        t: LeafCurve::grid_t(eps, grid, c),
        p: z,
        theta: d.theta,
    });
    neg.extend(pos);
    Ok(LeafCurve {
        k: Some(k),
        z0: z,
        eps,
        h,
        grid,
        first_index,
        samples: neg,
        truncated_neg,
        truncated_pos,
    })
}

/// [`integrate_leaf_on_grid`] with the default grid.
pub fn integrate_leaf(map: &MapModel, z: Point2, k: usize, eps: f64, h: f64) -> Result<LeafCurve> {
    integrate_leaf_on_grid(map, z, k, eps, h, DEFAULT_GRID)
}

/// Largest `ε` on the ladder `ε_0 · 2^{−m}` with `εΓ < 1`, `e^{εL} < 2` and,
/// when `tube` is given, the disc of radius `ε + ω_max` around `z` inside
/// `N^(k0)`.
///
/// The containment test probes a polar grid of that disc against the orbit
/// tubes directly; `ω_max = ε e^{εL} max_{k ≥ k0} ξ_k`.
pub fn choose_epsilon(
    b: &HyperbolicityBudget,
    gamma: f64,
    lip: f64,
    sched: &EpsilonSchedule,
    tube: Option<(&MapModel, Point2)>,
) -> Result<f64> {
    if !(gamma > 0.0) || !(lip >= 0.0) {
        return Err(Error::BadParams(format!(
            "choose_epsilon needs gamma > 0 and L >= 0 (gamma = {gamma}, L = {lip})"
        )));
    }
    let probe = match tube {
        Some((map, z)) => {
            let k0 = b.k0()?;
            let xi_max = b.xi[k0.min(b.kmax)..].iter().copied().fold(0.0, f64::max);
            Some((map, z, k0, xi_max, orbit(map, z, k0)?))
        }
        None => None,
    };
    for m in 0..=LADDER_RUNGS {
        let eps = sched.eps0() * 2f64.powi(-m);
        if !(eps * gamma < 1.0 && (eps * lip).exp() < 2.0) {
            continue;
        }
        let inside = match &probe {
            None => true,
            Some((map, z, k0, xi_max, reference)) => {
                let radius = eps + eps * (eps * lip).exp() * xi_max;
                radius.is_finite() && disc_in_tube(map, *z, reference, sched, radius, *k0)
            }
        };
        if inside {
            return Ok(eps);
        }
    }
    Err(Error::NoFeasibleEpsilon)
}

fn disc_in_tube(
    map: &MapModel,
    z: Point2,
    reference: &[Point2],
    sched: &EpsilonSchedule,
    radius: f64,
    k: usize,
) -> bool {
    const RINGS: usize = 8;
    const SPOKES: usize = 32;
    let inside = |x: Point2| tube_depth(map, reference, sched, x, k - 1) >= k;
    inside(z)
        && (1..=RINGS).all(|r| {
            (0..SPOKES).all(|s| {
                let a = std::f64::consts::TAU * s as f64 / SPOKES as f64;
                inside(z + Point2::from_angle(a).scale(radius * r as f64 / RINGS as f64))
            })
        })
}

/// Largest measured derivative norm of `e^(k)` over the given points and orders.
pub fn measure_lipschitz(map: &MapModel, points: &[Point2], orders: &[usize]) -> Result<f64> {
    let mut l = 0.0f64;
    for &p in points {
        for &k in orders {
            let c = build_orbit_cocycle(map, p, k)?;
            let d = direction_field_derivative(map, &c, k, LIPSCHITZ_FD_STEP, None)?;
            l = l.max(d.l_measured);
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafOptions {
    /// Integration step; `ε / 512` when `None`.
    pub h: Option<f64>,
    pub grid: usize,
    /// Overrides the measured Lipschitz constant of the direction field.
    pub lip: Option<f64>,
}

impl Default for LeafOptions {
    fn default() -> Self {
        LeafOptions {
            h: None,
            grid: DEFAULT_GRID,
            lip: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub k0: usize,
    pub kmax: usize,
    /// Orders `k0..kmax` at which consecutive leaves are compared.
    pub k: Vec<usize>,
    pub d_k: Vec<f64>,
    /// `ε ξ_k e^{Lε}`
    pub gronwall_bound: Vec<f64>,
    /// Tube radius; equal to the Gronwall bound.
    pub omega_k: Vec<f64>,
    pub xi_k: Vec<f64>,
    pub gronwall_ok: Vec<bool>,
    /// Leaf `k` displaced by `±ω_k f^(k)` stays in the sampled `N^(k+1)` tube.
    pub tube_ok: Vec<bool>,
    /// Comparison restricted to a shorter common range.
    pub restricted: Vec<bool>,
    /// Full arclength on both sides, for `k = k0..=kmax`.
    pub full_length: Vec<bool>,
    pub d_partial_sums: Vec<f64>,
    /// `Σ d_k ≤ 2 d_{k0}`
    pub summable_ok: bool,
    pub eps_chosen: f64,
    #[serde(rename = "L_used")]
    pub l_used: f64,
    #[serde(rename = "L_measured")]
    pub l_measured: Option<f64>,
    /// `e^{εL} < 2` re-evaluated with `L_used`.
    pub eps_lipschitz_ok: bool,
    pub h: f64,
    pub grid: usize,
    pub tol: f64,
    pub converged: bool,
    pub limit_reach: (f64, f64),
    pub limit_truncated: (bool, bool),
    pub limit_tangent_lipschitz: f64,
    /// Filled in by [`contraction_check`] in the full pipeline.
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
    #[serde(skip)]
    pub limit: LeafCurve,
    #[serde(skip)]
    pub leaves: Vec<LeafCurve>,
}

impl ConvergenceReport {
    pub fn all_gronwall_ok(&self) -> bool {
        self.gronwall_ok.iter().all(|&b| b)
    }

    pub fn all_tube_ok(&self) -> bool {
        self.tube_ok.iter().all(|&b| b)
    }
}

/// Integrates the leaves of orders `k0..=kmax` on a shared grid and compares
/// consecutive orders against the Gronwall bound.
///
/// The last leaf becomes the limit leaf. Returns `NotConverged` carrying the
/// full report when the last distance is not below `tol`.
pub fn cauchy_iterate(
    map: &MapModel,
    z: Point2,
    b: &HyperbolicityBudget,
    sched: &EpsilonSchedule,
    eps: f64,
    kmax: usize,
    tol: f64,
    opts: LeafOptions,
) -> Result<ConvergenceReport> {
    let k0 = b.k0()?;
    if kmax <= k0 || kmax > b.kmax {
        return Err(Error::BadParams(format!(
            "cauchy_iterate needs k0 < kmax <= budget kmax (k0 = {k0}, kmax = {kmax}, budget {})",
            b.kmax
        )));
    }
    let h = opts.h.unwrap_or(eps / STEPS_PER_EPS);
    let leaves: Vec<LeafCurve> = (k0..=kmax)
        .into_par_iter()
        .map(|k| integrate_leaf_on_grid(map, z, k, eps, h, opts.grid))
        .collect::<Result<_>>()?;

    let (l_used, l_measured) = match opts.lip {
        Some(l) => (l, None),
        None => {
            let first = &leaves[0];
            let c = first.center_index() as f64;
            let mut points = vec![z];
            for frac in [-1.0, -0.5, 0.5, 1.0] {
                let g = (c + frac * c).round() as usize;
                if let Some(s) = first.at_index(g) {
                    points.push(s.p);
                }
            }
            let l = measure_lipschitz(map, &points, &[k0, kmax])?;
            (l, Some(l))
        }
    };
    let growth = (l_used * eps).exp();
    let reference = orbit(map, z, kmax)?;

    let ks: Vec<usize> = (k0..kmax).collect();
    let per_k: Vec<(f64, bool, f64, bool)> = ks
        .par_iter()
        .map(|&k| {
            let (lk, lk1) = (&leaves[k - k0], &leaves[k + 1 - k0]);
            let (d, restricted) = lk.max_distance(lk1);
            let omega = eps * b.xi[k] * growth;
            let tube = omega.is_finite()
                && lk.samples.iter().all(|s| {
                    let f = Point2::from_angle(s.theta).perp();
                    [1.0, -1.0].iter().all(|&sg| {
                        tube_depth(map, &reference, sched, s.p + f.scale(sg * omega), k) > k
                    })
                });
            (d, restricted, omega, tube)
        })
        .collect();

    let d_k: Vec<f64> = per_k.iter().map(|r| r.0).collect();
    let omega_k: Vec<f64> = per_k.iter().map(|r| r.2).collect();
    let mut d_partial_sums = Vec::with_capacity(d_k.len());
    let mut acc = 0.0;
    for d in &d_k {
        acc += d;
        d_partial_sums.push(acc);
    }
    let last = *d_k.last().unwrap();
    let limit_src = leaves.last().unwrap();
    let mut limit = limit_src.clone();
    limit.k = None;
    let report = ConvergenceReport {
        k0,
        kmax,
        k: ks.clone(),
        gronwall_ok: d_k
            .iter()
            .zip(&omega_k)
            .map(|(d, w)| *d <= w * GRONWALL_SLACK)
            .collect(),
        gronwall_bound: omega_k.clone(),
        xi_k: ks.iter().map(|&k| b.xi[k]).collect(),
        tube_ok: per_k.iter().map(|r| r.3).collect(),
        restricted: per_k.iter().map(|r| r.1).collect(),
        full_length: leaves.iter().map(LeafCurve::full_length).collect(),
        summable_ok: acc <= 2.0 * d_k[0],
        d_partial_sums,
        d_k,
        omega_k,
        eps_chosen: eps,
        l_used,
        l_measured,
        eps_lipschitz_ok: growth < 2.0,
        h,
        grid: opts.grid,
        tol,
        converged: last < tol,
        limit_reach: limit.reach(),
        limit_truncated: (limit.truncated_neg, limit.truncated_pos),
        limit_tangent_lipschitz: limit.tangent_lipschitz(),
        c_fit: None,
        limit,
        leaves,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NotConverged {
            kmax,
            last,
            report: Box::new(report),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRecord {
    pub n: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub gamma_tilde: f64,
    pub ratio_over_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub records: Vec<ContractionRecord>,
    pub pairs: usize,
    pub seed: u64,
    /// `max_{n ≥ k0} max_ratio_n / γ̃_n`
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
    /// Least-squares slope of `ln max_ratio_n` over `fit_range`.
    pub rate_fit: Option<f64>,
    pub fit_range: (usize, usize),
}

/// Measures `|φⁿ(z_{t1}) − φⁿ(z_{t2})| / |z_{t1} − z_{t2}|` over seeded pairs
/// of leaf samples (plus the two end points) for `n = 0..=n_max`.
pub fn contraction_check(
    map: &MapModel,
    leaf: &LeafCurve,
    b: &HyperbolicityBudget,
    n_max: usize,
    pairs: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if n_max > b.kmax {
        return Err(Error::BadParams(format!("n = {n_max} exceeds budget kmax = {}", b.kmax)));
    }
    let m = leaf.samples.len();
    if m < 2 {
        return Err(Error::BadParams("leaf has fewer than two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![(0, m - 1)];
    while idx.len() < pairs.max(1) + 1 {
        let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
        if i != j {
            idx.push((i, j));
        }
    }
    let mut pts: Vec<Point2> = leaf.samples.iter().map(|s| s.p).collect();
    let start = pts.clone();
    let mut records = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            for p in pts.iter_mut() {
                *p = map.evaluate(*p).map_err(|_| Error::OrbitEscape(n))?;
                if !map.contains(*p) {
                    return Err(Error::OrbitEscape(n));
                }
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &(i, j) in &idx {
            let r = pts[i].dist(pts[j]) / start[i].dist(start[j]);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let gt = b.gamma_tilde[n];
        records.push(ContractionRecord {
            n,
            max_ratio: hi,
            min_ratio: lo,
            gamma_tilde: gt,
            ratio_over_bound: hi / gt,
        });
    }
    let k0 = b.k0.unwrap_or(1);
    let c_fit = records
        .iter()
        .filter(|r| r.n >= k0)
        .map(|r| r.ratio_over_bound)
        .reduce(f64::max);
    let fit_range = (k0, n_max.min(k0 + 10));
    let fit: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.n >= fit_range.0 && r.n <= fit_range.1 && r.max_ratio > 0.0)
        .map(|r| (r.n as f64, r.max_ratio.ln()))
        .collect();
    let rate_fit = (fit.len() >= 2).then(|| least_squares_slope(&fit));
    Ok(ContractionReport {
        records,
        pairs: idx.len(),
        seed,
        c_fit,
        rate_fit,
        fit_range,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub point: Point2,
    pub distance_to_leaf: f64,
    /// First `j ≤ kmax` at which the probe leaves its tube.
    pub exit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub kmax: usize,
    pub probes: Vec<ProbeRecord>,
    /// Probes at `z ± Δ f`, for `Δ = ε_0 · 10^{−i}`, `i = 1, 2, 3`.
    pub offset_probes: Vec<ProbeRecord>,
    pub on_leaf_checked: usize,
    /// Leaf grid points that exit a tube by `kmax`.
    pub on_leaf_exits: usize,
    /// Largest leaf distance among random probes that never exit.
    pub survivor_max_distance: Option<f64>,
}

/// Tube exit indices for seeded probes in the ε_0 disc, for off-leaf probes
/// at fixed offsets and for the leaf's own grid points.
pub fn uniqueness_probe(
    map: &MapModel,
    z: Point2,
    sched: &EpsilonSchedule,
    leaf: &LeafCurve,
    kmax: usize,
    probes: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let reference = orbit(map, z, kmax)?;
    let exit = |x: Point2| {
        let d = tube_depth(map, &reference, sched, x, kmax);
        (d <= kmax).then_some(d)
    };
    let record = |x: Point2| ProbeRecord {
        point: x,
        distance_to_leaf: leaf.distance_to(x),
        exit: exit(x),
    };
    let probe_records: Vec<ProbeRecord> = draw_disc(z, sched.eps0(), probes, seed)
        .into_par_iter()
        .map(record)
        .collect();
    let f = Point2::from_angle(leaf.origin().theta).perp();
    let offset_probes = (1..=3)
        .flat_map(|i| {
            let d = sched.eps0() * 10f64.powi(-i);
            [record(z + f.scale(d)), record(z - f.scale(d))]
        })
        .collect();
    let on_leaf_exits = leaf.samples.par_iter().filter(|s| exit(s.p).is_some()).count();
    let survivor_max_distance = probe_records
        .iter()
        .filter(|r| r.exit.is_none())
        .map(|r| r.distance_to_leaf)
        .reduce(f64::max);
    Ok(UniquenessReport {
        kmax,
        probes: probe_records,
        offset_probes,
        on_leaf_checked: leaf.samples.len(),
        on_leaf_exits,
        survivor_max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::estimate_budget;
    use crate::map::builtin::{henon, linear};

    #[test]
    fn linear_leaf_is_the_horizontal_segment() {
        let z = Point2::new(0.03, -0.02);
        let leaf = integrate_leaf(&linear(0.5, 2.0), z, 5, 0.25, 0.25 / 512.0).unwrap();
        assert!(leaf.full_length());
        assert_eq!(leaf.samples.len(), DEFAULT_GRID);
        for s in &leaf.samples {
            assert!((s.p.y - z.y).abs() <= 1e-12);
            assert!((s.p.x - z.x - s.t).abs() <= 1e-12);
            assert!(s.theta.abs() <= 1e-12);
        }
        assert_eq!(leaf.reach(), (0.25, 0.25));
    }

    #[test]
    fn leaf_samples_are_arclength_consistent() {
        let m = henon(1.4, 0.3);
        let leaf = integrate_leaf(&m, Point2::new(0.6314, 0.1894), 6, 0.02, 0.02 / 512.0).unwrap();
        assert_eq!(leaf.origin().p, Point2::new(0.6314, 0.1894));
        let d0 = direction_at(&m, leaf.z0, 6).unwrap();
        assert!((leaf.origin().theta - d0.theta).abs() <= 1e-10);
        for w in leaf.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            let dp = w[0].p.dist(w[1].p);
            assert!(dp <= dt + 1e-9 && dp >= dt * (1.0 - 1e-6));
            assert!((w[1].theta - w[0].theta).abs() < std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn choose_epsilon_ladder() {
        let b = HyperbolicityBudget::synthetic_for_tests(4, |_| (1.0, 1.0, 0.0, 0.1, 0.1, 0.0));
        let sched = EpsilonSchedule::constant(1.0).unwrap();
        assert_eq!(choose_epsilon(&b, 2.0, 0.0, &sched, None).unwrap(), 0.25);
        assert_eq!(choose_epsilon(&b, 1e-300, 0.0, &sched, None).unwrap(), 1.0);
        assert_eq!(choose_epsilon(&b, 1e-300, 2.0, &sched, None).unwrap(), 0.25);
        assert!(matches!(
            choose_epsilon(&b, 1e300, 0.0, &sched, None),
            Err(Error::NoFeasibleEpsilon)
        ));
    }

    #[test]
    fn linear_pipeline_converges_immediately() {
        let m = linear(0.5, 2.0);
        let sched = EpsilonSchedule::constant(0.1).unwrap();
        let b = estimate_budget(&m, Point2::ORIGIN, &sched, 8, 200, 3).unwrap();
        let gamma = b.gamma_required.unwrap() * 1.05;
        let eps = choose_epsilon(&b, gamma, 0.0, &sched, Some((&m, Point2::ORIGIN))).unwrap();
        assert!(eps * gamma < 1.0);
        let r = cauchy_iterate(&m, Point2::ORIGIN, &b, &sched, eps, 8, 1e-12, LeafOptions::default()).unwrap();
        assert!(r.d_k.iter().all(|&d| d == 0.0));
        assert!(r.all_tube_ok());
        assert_eq!(r.l_used, 0.0);
        let c = contraction_check(&m, &r.limit, &b, 8, 50, 1).unwrap();
        for rec in &c.records {
            let want = 0.5f64.powi(rec.n as i32);
            assert!((rec.max_ratio - want).abs() <= 1e-12 * want);
        }
        assert!((c.rate_fit.unwrap() - 0.5f64.ln()).abs() < 1e-12);
    }
}
