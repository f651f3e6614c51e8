//! Derivative cocycle along an orbit: step Jacobians, their ordered products,
//! the per-step scalars `P_j, Q_j, P̃_j, 𝔇_j, 𝔇̃_j` and the growth sequences
//! `E_k ≤ F_k`, `H_k = E_k / F_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{wrap_pi, Mat2, Point2};
use crate::map::MapModel;

/// Below this value of `1 − E/F` the contracted direction is treated as undefined.
pub const CONFORMAL_THRESHOLD: f64 = 1e-12;

/// The shorthand quotients of the angle equations for a matrix
/// `[[A, B], [C, D]]`:
/// `𝒜 = AB + CD`, `ℬ = A² + C² − B² − D²` (for `tan 2θ = 2𝒜/ℬ`) and
/// `𝒞 = BD + AC`, `𝒟 = D² + C² − A² − B²` (image directions, `tan 2θ = −2𝒞/𝒟`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleQuotients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AngleQuotients {
    pub fn of(m: &Mat2) -> Self {
        let (a, b, c, d) = (m.a11, m.a12, m.a21, m.a22);
        AngleQuotients {
            a: a * b + c * d,
            b: a * a + c * c - b * b - d * d,
            c: b * d + a * c,
            d: d * d + c * c - a * a - b * b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularFrame {
    /// Smallest singular value.
    pub e: f64,
    /// Largest singular value.
    pub f: f64,
    /// Most contracted direction, in `[0, π)`.
    pub theta_contract: f64,
    /// Most expanded direction, `theta_contract + π/2` modulo π.
    pub theta_expand: f64,
    pub quad: AngleQuotients,
}

impl SingularFrame {
    pub fn contracted(&self) -> Point2 {
        Point2::from_angle(self.theta_contract)
    }

    pub fn expanded(&self) -> Point2 {
        Point2::from_angle(self.theta_contract).perp()
    }

    pub fn ratio(&self) -> f64 {
        self.e / self.f
    }
}

/// Singular values and the most contracted/expanded directions of `m`.
///
/// The critical angles of `θ ↦ ‖m·(cos θ, sin θ)‖` solve `tan 2θ = 2𝒜/ℬ`; of the
/// two solutions `θ₀ = ½·atan2(2𝒜, ℬ)` and `θ₀ + π/2` the one with the smaller
/// image norm is the contracted direction.
pub fn singular_frame(m: &Mat2) -> Result<SingularFrame> {
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    if m.det() == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let (e, f) = m.singular_values();
    let gap = 1.0 - e / f;
    if !(gap >= CONFORMAL_THRESHOLD) {
        return Err(Error::Conformal(gap));
    }
    let quad = AngleQuotients::of(m);
    let t0 = 0.5 * (2.0 * quad.a).atan2(quad.b);
    let t1 = t0 + std::f64::consts::FRAC_PI_2;
    let n0 = m.apply(Point2::from_angle(t0)).norm();
    let n1 = m.apply(Point2::from_angle(t1)).norm();
    let theta_contract = wrap_pi(if n0 <= n1 { t0 } else { t1 });
    Ok(SingularFrame {
        e,
        f,
        theta_contract,
        theta_expand: wrap_pi(theta_contract + std::f64::consts::FRAC_PI_2),
        quad,
    })
}

/// Per-step scalars, each evaluated at the orbit point `z_j`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StepScalars {
    /// `P_j = ‖Dφ(z_j)‖`
    pub p: Vec<f64>,
    /// `Q_j = ‖Dφ(z_j)⁻¹‖`
    pub q: Vec<f64>,
    /// `P̃_j = ‖D²φ(z_j)‖`
    pub p_tilde: Vec<f64>,
    /// `𝔇_j = |det Dφ(z_j)|`
    pub det: Vec<f64>,
    /// `𝔇̃_j = ‖D(det Dφ)(z_j)‖`
    pub det_grad: Vec<f64>,
}

/// Growth sequences indexed by `k = 0..=kmax`, with `E_0 = F_0 = H_0 = 1`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Growth {
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitCocycle {
    pub z0: Point2,
    /// `z_j = φʲ(z0)` for `j = 0..=kmax`.
    pub orbit: Vec<Point2>,
    /// `Dφ(z_j)` for `j = 0..kmax`.
    pub steps: Vec<Mat2>,
    /// `Dφᵏ(z0)` for `k = 0..=kmax`; entry 0 is the identity.
    pub products: Vec<Mat2>,
    pub per_step: StepScalars,
    pub growth: Growth,
}

/// Orbit of `z0` for `k` steps, checking that every point stays in the domain.
pub fn orbit(map: &MapModel, z0: Point2, k: usize) -> Result<Vec<Point2>> {
    if !map.contains(z0) {
        return Err(Error::OrbitEscape(0));
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(z0);
    let mut z = z0;
    for j in 1..=k {
        z = map.evaluate(z)?;
        if !map.contains(z) {
            return Err(Error::OrbitEscape(j));
        }
        out.push(z);
    }
    Ok(out)
}

/// `Dφᵏ(x)` without the per-step scalars; the cheap path used when
/// evaluating direction fields.
pub fn jacobian_product(map: &MapModel, x: Point2, k: usize) -> Result<Mat2> {
    if !map.contains(x) {
        return Err(Error::OrbitEscape(0));
    }
    let mut z = x;
    let mut prod = Mat2::IDENTITY;
    for j in 0..k {
        prod = map.jacobian(z)? * prod;
        if j + 1 < k {
            z = map.evaluate(z)?;
            if !map.contains(z) {
                return Err(Error::OrbitEscape(j + 1));
            }
        }
    }
    Ok(prod)
}

pub fn build_orbit_cocycle(map: &MapModel, z0: Point2, kmax: usize) -> Result<OrbitCocycle> {
    if kmax < 1 {
        return Err(Error::Index { index: kmax, lo: 1, hi: usize::MAX });
    }
    let orbit = orbit(map, z0, kmax)?;
    let mut steps = Vec::with_capacity(kmax);
    let mut per_step = StepScalars::default();
    for (j, &z) in orbit[..kmax].iter().enumerate() {
        let step = map.jacobian(z)?;
        let (second, det_grad) = map.second_derivative_data(z)?;
        let det = step.det().abs();
        if det == 0.0 {
            return Err(Error::SingularStep(j));
        }
        let (e, f) = step.singular_values();
        per_step.p.push(f);
        per_step.q.push(1.0 / e);
        per_step.p_tilde.push(second.norm());
        per_step.det.push(det);
        per_step.det_grad.push(det_grad.norm());
        steps.push(step);
    }

    let mut products = Vec::with_capacity(kmax + 1);
    products.push(Mat2::IDENTITY);
    let mut growth = Growth {
        e: vec![1.0],
        f: vec![1.0],
        h: vec![1.0],
    };
    let mut abs_det = 1.0;
    for (j, step) in steps.iter().enumerate() {
        let next = *step * products[j];
        if !next.is_finite() {
            return Err(Error::NonFinite("cocycle product"));
        }
        abs_det *= per_step.det[j];
        let f = next.norm();
        // |det Dφᵏ| accumulated from the steps keeps E_k accurate when the
        // product matrix is badly conditioned.
        let e = (abs_det / f).min(f);
        growth.e.push(e);
        growth.f.push(f);
        growth.h.push(e / f);
        products.push(next);
    }

    Ok(OrbitCocycle {
        z0,
        orbit,
        steps,
        products,
        per_step,
        growth,
    })
}

impl OrbitCocycle {
    pub fn kmax(&self) -> usize {
        self.steps.len()
    }

    pub(crate) fn check_order(&self, k: usize, lo: usize) -> Result<()> {
        if k < lo || k > self.kmax() {
            return Err(Error::Index { index: k, lo, hi: self.kmax() });
        }
        Ok(())
    }

    pub fn e(&self, k: usize) -> f64 {
        self.growth.e[k]
    }

    pub fn f(&self, k: usize) -> f64 {
        self.growth.f[k]
    }

    pub fn h(&self, k: usize) -> f64 {
        self.growth.h[k]
    }

    /// `F_{j,k} = ‖Dφ^{k−j−1}(z_{j+1})‖`, the norm of `steps[k−1]···steps[j+1]`
    /// (the identity when `j = k − 1`).
    pub fn tail_growth(&self, j: usize, k: usize) -> Result<f64> {
        self.check_order(k, 1)?;
        if j >= k {
            return Err(Error::Index { index: j, lo: 0, hi: k - 1 });
        }
        let mut m = Mat2::IDENTITY;
        for step in &self.steps[j + 1..k] {
            m = *step * m;
        }
        Ok(m.norm())
    }

    /// `[F_{0,k}, …, F_{k−1,k}]`, built right to left in one pass.
    pub fn tail_growth_row(&self, k: usize) -> Result<Vec<f64>> {
        self.check_order(k, 1)?;
        let mut row = vec![0.0; k];
        let mut tail = Mat2::IDENTITY;
        row[k - 1] = 1.0;
        for j in (0..k - 1).rev() {
            tail = tail * self.steps[j + 1];
            row[j] = tail.norm();
        }
        Ok(row)
    }

    /// Singular frame of `Dφᵏ(z0)`.
    pub fn frame(&self, k: usize) -> Result<SingularFrame> {
        self.check_order(k, 1)?;
        singular_frame(&self.products[k])
    }
}

/// Right-hand sides of the two distortion inequalities at order `k`:
///
/// `d1 = (E_k / F_k²) · Σ_{j<k} P̃_j · F_{j,k} · F_j²` bounds `H_k‖D²φᵏ‖ / ‖Dφᵏ‖`,
/// `d2 = (E_k / F_k) · Σ_{j<k} 𝔇̃_j / 𝔇_j · F_j` bounds `‖D det Dφᵏ‖ / ‖Dφᵏ‖²`.
pub fn distortion_bounds(c: &OrbitCocycle, k: usize) -> Result<(f64, f64)> {
    let tails = c.tail_growth_row(k)?;
    let (ek, fk) = (c.e(k), c.f(k));
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (j, tail) in tails.iter().enumerate() {
        let fj = c.f(j);
        s1 += c.per_step.p_tilde[j] * tail * fj * fj;
        s2 += c.per_step.det_grad[j] / c.per_step.det[j] * fj;
    }
    Ok((ek / (fk * fk) * s1, ek / fk * s2))
}
