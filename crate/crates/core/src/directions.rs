//! Finite-time contracted directions `e^(k)` and the checks that relate
//! consecutive orders: the angle gap `φ^(k)` between `e^(k)` and `e^(k+1)`,
//! pushforward contraction of `e^(k)`, and the spatial derivative of the
//! direction field.
//!
//! Directions are identified modulo π throughout: `v` and `−v` are the same
//! direction, angles are stored in `[0, π)`, and gaps are folded into
//! `[0, π/2]`.

use serde::Serialize;

use crate::budget::HyperbolicityBudget;
use crate::cocycle::{singular_frame, OrbitCocycle};
use crate::error::{Error, Result};
use crate::geometry::{direction_diff, direction_gap, Mat2, Point2};
use crate::map::MapModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionSample {
    pub at: Point2,
    pub k: usize,
    /// `θ^(k)` in `[0, π)`.
    pub theta: f64,
    /// Most contracted unit vector `(cos θ, sin θ)`.
    pub e: Point2,
    /// Most expanded unit vector `(−sin θ, cos θ)`.
    pub f: Point2,
}

impl DirectionSample {
    fn from_theta(at: Point2, k: usize, theta: f64) -> Self {
        let e = Point2::from_angle(theta);
        DirectionSample {
            at,
            k,
            theta,
            e,
            f: e.perp(),
        }
    }
}

/// `e^(k)` at the base point of the cocycle.
pub fn contracted_direction(c: &OrbitCocycle, k: usize) -> Result<DirectionSample> {
    let frame = c.frame(k)?;
    Ok(DirectionSample::from_theta(c.z0, k, frame.theta_contract))
}

/// `e^(k)(x)` computed directly from the map, without the per-step scalars.
pub fn direction_at(map: &MapModel, x: Point2, k: usize) -> Result<DirectionSample> {
    let m = crate::cocycle::jacobian_product(map, x, k)?;
    let frame = singular_frame(&m)?;
    Ok(DirectionSample::from_theta(x, k, frame.theta_contract))
}

/// `θ^(1), …, θ^(k)` at `x`, from one pass along the orbit.
pub fn contracted_angles(map: &MapModel, x: Point2, k: usize) -> Result<Vec<f64>> {
    let orbit = crate::cocycle::orbit(map, x, k.saturating_sub(1))?;
    let mut prod = Mat2::IDENTITY;
    let mut out = Vec::with_capacity(k);
    for z in orbit.iter().take(k) {
        prod = map.jacobian(*z)? * prod;
        out.push(singular_frame(&prod)?.theta_contract);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleGapRecord {
    pub k: usize,
    /// `|φ^(k)|`, folded into `[0, π/2]`.
    pub phi: f64,
    /// `|tan φ^(k)|`.
    pub tan_phi: f64,
    /// `P_k Q_k H_{k+1}` at the base point.
    pub contraction_product: f64,
    /// `P_k Q_k H_{k+1} / (1 − P_k Q_k H_{k+1})`, or `+∞` when the product is
    /// at least 1 and the bound does not apply.
    pub bound: f64,
    /// Pointwise `Ξ_k`; equal to `bound` here and at most the sampled `ξ_k`.
    pub xi: f64,
}

impl AngleGapRecord {
    pub fn applicable(&self) -> bool {
        self.contraction_product < 1.0
    }

    pub fn holds(&self) -> bool {
        !self.applicable() || self.tan_phi <= self.bound
    }
}

/// Angle between `e^(k)` and `e^(k+1)` at the base point, with its bound.
pub fn angle_gap(c: &OrbitCocycle, k: usize) -> Result<AngleGapRecord> {
    c.check_order(k, 1)?;
    c.check_order(k + 1, 1)?;
    let a = c.frame(k)?.theta_contract;
    let b = c.frame(k + 1)?.theta_contract;
    let phi = direction_gap(a, b);
    let pqh = c.per_step.p[k] * c.per_step.q[k] * c.h(k + 1);
    let bound = if pqh < 1.0 { pqh / (1.0 - pqh) } else { f64::INFINITY };
    Ok(AngleGapRecord {
        k,
        phi,
        tan_phi: phi.tan().abs(),
        contraction_product: pqh,
        bound,
        xi: bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PushforwardRecord {
    pub k: usize,
    pub j: usize,
    /// `‖Dφʲ · e^(k)‖`
    pub norm: f64,
    /// `E_j + F_j · Σ_{i=j}^{k−1} |φ^(i)|`
    pub bound: f64,
}

impl PushforwardRecord {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.norm <= self.bound * (1.0 + rel_tol)
    }
}

/// Contraction of `e^(k)` under `Dφʲ`, `k ≥ j ≥ 1`.
pub fn pushforward_contraction(c: &OrbitCocycle, k: usize, j: usize) -> Result<PushforwardRecord> {
    c.check_order(k, 1)?;
    if j < 1 || j > k {
        return Err(Error::Index { index: j, lo: 1, hi: k });
    }
    let ek = contracted_direction(c, k)?.e;
    let norm = c.products[j].apply(ek).norm();
    let mut tail = 0.0;
    let mut prev = c.frame(j)?.theta_contract;
    for i in j..k {
        let next = c.frame(i + 1)?.theta_contract;
        tail += direction_gap(prev, next);
        prev = next;
    }
    Ok(PushforwardRecord {
        k,
        j,
        norm,
        bound: c.e(j) + c.f(j) * tail,
    })
}

/// `(‖Dφ^{k+1} · e^(k)‖, E_{k+1} · P_k · Q_k)`; the first never exceeds the second.
pub fn cauchy_schwarz_step(c: &OrbitCocycle, k: usize) -> Result<(f64, f64)> {
    c.check_order(k + 1, 2)?;
    let ek = contracted_direction(c, k)?.e;
    let lhs = c.products[k + 1].apply(ek).norm();
    Ok((lhs, c.e(k + 1) * c.per_step.p[k] * c.per_step.q[k]))
}

/// One-step ratios `E_{k+1}/E_k`, `F_{k+1}/F_k`, `H_{k+1}/H_k` and the
/// intervals they must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneStepDistortion {
    pub k: usize,
    pub e_ratio: f64,
    pub f_ratio: f64,
    pub h_ratio: f64,
    pub p: f64,
    pub q: f64,
}

impl OneStepDistortion {
    pub fn of(c: &OrbitCocycle, k: usize) -> Result<Self> {
        c.check_order(k + 1, 1)?;
        Ok(OneStepDistortion {
            k,
            e_ratio: c.e(k + 1) / c.e(k),
            f_ratio: c.f(k + 1) / c.f(k),
            h_ratio: c.h(k + 1) / c.h(k),
            p: c.per_step.p[k],
            q: c.per_step.q[k],
        })
    }

    /// Each ratio inside its interval, widened by the relative tolerance.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let within = |v: f64, lo: f64, hi: f64| v >= lo * (1.0 - rel_tol) && v <= hi * (1.0 + rel_tol);
        let pq = self.p * self.q;
        within(self.e_ratio, 1.0 / self.q, self.p)
            && within(self.f_ratio, 1.0 / self.q, self.p)
            && within(self.h_ratio, 1.0 / pq, pq)
    }
}

/// Fixed constants of the bounds on `‖Dφ^(k)‖` and its intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBoundCoefficients {
    /// Coefficients of `(p_k q_k)² δ_{k+1}`, `(p_k q_k)⁵ δ_k` and
    /// `(p_k q_k)³ q_k² p̃_k γ*_{k+1}` in the bound on `‖Dφ^(k)‖`.
    pub angle_derivative: [f64; 3],
    /// Coefficients of `δ_{k+1}/H_{k+1}`, `(P_k Q_k)² δ_k / H_k` and
    /// `Q_k² P_k P̃_k F_k` in the bound on `‖Dφ^(k)_{k+1}‖`.
    pub image_angle_derivative: [f64; 3],
    /// Coefficient of `δ_k F_k / H_k` in the bounds on `‖DE_k‖` and `‖DF_k‖`.
    pub singular_value_derivative: f64,
    /// Coefficient of `δ_k` in the bound on `‖DH_k‖`.
    pub ratio_derivative: f64,
}

pub const DERIVATIVE_BOUND: DerivativeBoundCoefficients = DerivativeBoundCoefficients {
    angle_derivative: [1597.0, 40.0, 40.0],
    image_angle_derivative: [2048.0 / 9.0, 8.0, 8.0],
    singular_value_derivative: 2057.0 / 9.0,
    ratio_derivative: 2066.0 / 9.0,
};

/// Budget-level bound on `‖Dφ^(k)‖`:
/// `1597 (p q)² δ_{k+1} + 40 (p q)⁵ δ_k + 40 (p q)³ q² p̃ γ*_{k+1}`, or `None`
/// when the budget does not reach `k + 1`.
pub fn angle_derivative_bound(b: &HyperbolicityBudget, k: usize) -> Option<f64> {
    if k + 1 >= b.delta.len() || k >= b.p.len() {
        return None;
    }
    let [c1, c2, c3] = DERIVATIVE_BOUND.angle_derivative;
    let pq = b.p[k] * b.q[k];
    Some(
        c1 * pq.powi(2) * b.delta[k + 1]
            + c2 * pq.powi(5) * b.delta[k]
            + c3 * pq.powi(3) * b.q[k].powi(2) * b.p_tilde[k] * b.gamma_star[k + 1],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionDerivative {
    pub k: usize,
    pub step: f64,
    /// Finite-difference `‖Dθ^(1)‖` followed by `‖Dφ^(j)‖` for `j = 1..k`.
    pub terms: Vec<f64>,
    /// Sum of `terms`, an estimate of the Lipschitz constant of `e^(k)`.
    pub l_measured: f64,
    /// `Σ_{j<k}` of the budget-level bound on `‖Dφ^(j)‖`, when a budget is given.
    pub l_bound: Option<f64>,
}

/// Central-difference estimate of the spatial derivative of the direction
/// field around `c.z0`, on the stencil `z0 ± h·e_x`, `z0 ± h·e_y`.
///
/// The measurement is reported, never asserted against `l_bound`: maxima
/// over a sampled budget understate the true suprema.
pub fn direction_field_derivative(
    map: &MapModel,
    c: &OrbitCocycle,
    k: usize,
    h: f64,
    budget: Option<&HyperbolicityBudget>,
) -> Result<DirectionDerivative> {
    c.check_order(k, 1)?;
    let z = c.z0;
    let stencil = [
        z + Point2::new(h, 0.0),
        z - Point2::new(h, 0.0),
        z + Point2::new(0.0, h),
        z - Point2::new(0.0, h),
    ];
    let mut angles = Vec::with_capacity(4);
    for p in stencil {
        let a = contracted_angles(map, p, k)
            .map_err(|e| Error::StencilEscape(format!("at ({}, {}): {e}", p.x, p.y)))?;
        angles.push(a);
    }
    let grad = |g: &dyn Fn(&[f64]) -> f64| {
        let gx = (g(&angles[0]) - g(&angles[1])) / (2.0 * h);
        let gy = (g(&angles[2]) - g(&angles[3])) / (2.0 * h);
        gx.hypot(gy)
    };
    let base = angles[1][0];
    let mut terms = vec![grad(&|a: &[f64]| direction_diff(base, a[0]))];
    for j in 1..k {
        terms.push(grad(&|a: &[f64]| direction_diff(a[j - 1], a[j])));
    }
    let l_measured = terms.iter().sum();
    let l_bound = budget.and_then(|b| {
        (1..k).try_fold(0.0, |acc, j| angle_derivative_bound(b, j).map(|v| acc + v))
    });
    Ok(DirectionDerivative {
        k,
        step: h,
        terms,
        l_measured,
        l_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::build_orbit_cocycle;
    use crate::map::builtin::{henon, linear};
    use std::f64::consts::PI;

    #[test]
    fn linear_directions_are_the_x_axis() {
        let c = build_orbit_cocycle(&linear(0.5, 2.0), Point2::new(0.05, 0.02), 6).unwrap();
        for k in 1..=6 {
            let d = contracted_direction(&c, k).unwrap();
            assert_eq!(d.theta, 0.0);
            assert_eq!(d.e, Point2::new(1.0, 0.0));
        }
        for k in 1..6 {
            let g = angle_gap(&c, k).unwrap();
            assert_eq!(g.phi, 0.0);
            let r = 4f64.powi(-(k as i32));
            assert!((g.bound - r / (1.0 - r)).abs() < 1e-15);
            assert!(g.holds());
        }
    }

    #[test]
    fn henon_first_order_direction() {
        let c = build_orbit_cocycle(&henon(1.4, 0.3), Point2::ORIGIN, 3).unwrap();
        let d = contracted_direction(&c, 1).unwrap();
        assert!(d.theta.min(PI - d.theta) < 1e-15, "{}", d.theta);
        assert!((c.e(1) - 0.3).abs() < 1e-15);
        assert!(angle_gap(&c, 1).unwrap().holds());
    }

    #[test]
    fn pushforward_linear_equality_case() {
        let c = build_orbit_cocycle(&linear(0.5, 2.0), Point2::ORIGIN, 8).unwrap();
        for j in 1..=6 {
            for k in [j, j + 2] {
                let r = pushforward_contraction(&c, k, j).unwrap();
                assert_eq!(r.norm, 0.5f64.powi(j as i32));
                assert_eq!(r.bound, c.e(j));
            }
        }
        assert!(pushforward_contraction(&c, 3, 4).is_err());
    }

    #[test]
    fn derivative_bound_vanishes_without_distortion() {
        let b = HyperbolicityBudget::synthetic_for_tests(6, |_| (2.0, 2.0, 0.0, 0.25, 0.5, 0.0));
        for k in 1..5 {
            assert_eq!(angle_derivative_bound(&b, k), Some(0.0));
        }
    }

    #[test]
    fn linear_field_derivative_is_zero() {
        let m = linear(0.5, 2.0);
        let c = build_orbit_cocycle(&m, Point2::new(0.01, 0.0), 6).unwrap();
        let d = direction_field_derivative(&m, &c, 6, 1e-4, None).unwrap();
        assert!(d.l_measured < 1e-8);
        assert_eq!(d.terms.len(), 6);
    }

    #[test]
    fn henon_field_derivative_is_finite() {
        let m = henon(1.4, 0.3);
        let c = build_orbit_cocycle(&m, Point2::ORIGIN, 4).unwrap();
        let d = direction_field_derivative(&m, &c, 4, 1e-4, None).unwrap();
        assert!(d.l_measured.is_finite() && d.l_measured > 0.0);
    }
}
