//! Planar points, 2×2 matrices and second-derivative tensors.
//!
//! Products and determinants use fused multiply-add so that strongly
//! anisotropic cocycle products (condition numbers near 1e6 and beyond) keep
//! their small singular value to full relative precision.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point2 { x: c, y: s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        dot2(self.x, other.x, self.y, other.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Largest absolute coordinate.
    pub fn sup_norm(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// `a·b + c·d` with a single rounding of the cross term.
#[inline]
fn dot2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = c.mul_add(d, -cd);
    a.mul_add(b, cd) + err
}

/// Row-major 2×2 matrix. For a Jacobian, `a11 = ∂xΦ₁`, `a12 = ∂yΦ₁`,
/// `a21 = ∂xΦ₂`, `a22 = ∂yΦ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Determinant via Kahan's fma formulation of `ad − bc`.
    pub fn det(&self) -> f64 {
        let w = self.a12 * self.a21;
        let e = (-self.a12).mul_add(self.a21, w);
        let f = self.a11.mul_add(self.a22, -w);
        f + e
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// `[[a22, −a12], [−a21, a11]]`, so that `M · adj(M) = det(M) · I`.
    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let adj = self.adjugate();
        Some(Mat2::new(adj.a11 / d, adj.a12 / d, adj.a21 / d, adj.a22 / d))
    }

    pub fn apply(&self, v: Point2) -> Point2 {
        Point2::new(
            dot2(self.a11, v.x, self.a12, v.y),
            dot2(self.a21, v.x, self.a22, v.y),
        )
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    /// Singular values `(E, F)` with `E ≤ F`, the square roots of the
    /// eigenvalues of `MᵀM`. The discriminant `F² − E²` is evaluated in the
    /// factored form `|(a+d, c−b)|·|(a−d, b+c)|`, which cannot go negative,
    /// and `E` is recovered as `|det| / F`.
    pub fn singular_values(&self) -> (f64, f64) {
        let r1 = (self.a11 + self.a22).hypot(self.a21 - self.a12);
        let r2 = (self.a11 - self.a22).hypot(self.a12 + self.a21);
        let f = 0.5 * (r1 + r2);
        if f == 0.0 {
            return (0.0, 0.0);
        }
        let d = self.det().abs();
        ((d / f).min(f), f)
    }

    /// Spectral norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.singular_values().1
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            dot2(self.a11, o.a11, self.a12, o.a21),
            dot2(self.a11, o.a12, self.a12, o.a22),
            dot2(self.a21, o.a11, self.a22, o.a21),
            dot2(self.a21, o.a12, self.a22, o.a22),
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }
}

/// All second partials of a planar map: `t[i][j][k] = ∂j∂kΦᵢ` with
/// component index `i` and coordinate indices `j, k ∈ {0 = x, 1 = y}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondDeriv {
    t: [[[f64; 2]; 2]; 2],
}

impl SecondDeriv {
    pub const ZERO: SecondDeriv = SecondDeriv {
        t: [[[0.0; 2]; 2]; 2],
    };

    /// Builds the tensor, symmetrizing each component in its two
    /// coordinate slots.
    pub fn new(mut t: [[[f64; 2]; 2]; 2]) -> Self {
        for comp in t.iter_mut() {
            let m = 0.5 * (comp[0][1] + comp[1][0]);
            comp[0][1] = m;
            comp[1][0] = m;
        }
        SecondDeriv { t }
    }

    /// From the Hessian of each component, `[Φ₁xx, Φ₁xy, Φ₁yy]` and the same for Φ₂.
    pub fn from_hessians(h1: [f64; 3], h2: [f64; 3]) -> Self {
        SecondDeriv::new([
            [[h1[0], h1[1]], [h1[1], h1[2]]],
            [[h2[0], h2[1]], [h2[1], h2[2]]],
        ])
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.t[i][j][k]
    }

    pub fn raw(&self) -> &[[[f64; 2]; 2]; 2] {
        &self.t
    }

    /// The bilinear map `(u, v) ↦ D²Φ(u, v)`.
    pub fn apply(&self, u: Point2, v: Point2) -> Point2 {
        let c = |i: usize| {
            let m = &self.t[i];
            u.x * (m[0][0] * v.x + m[0][1] * v.y) + u.y * (m[1][0] * v.x + m[1][1] * v.y)
        };
        Point2::new(c(0), c(1))
    }

    /// Upper bound for the bilinear operator norm `sup ‖D²Φ(u, v)‖` over unit
    /// `u, v`: the root sum of squares of the component spectral norms. Exact
    /// when one component vanishes.
    pub fn norm(&self) -> f64 {
        let op_norm = |m: &[[f64; 2]; 2]| {
            // symmetric 2×2: largest |eigenvalue|
            let half_tr = 0.5 * (m[0][0] + m[1][1]);
            let r = (0.5 * (m[0][0] - m[1][1])).hypot(m[0][1]);
            half_tr.abs() + r
        };
        op_norm(&self.t[0]).hypot(op_norm(&self.t[1]))
    }

    pub fn is_finite(&self) -> bool {
        self.t.iter().flatten().flatten().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        self.t.iter().all(|m| m[0][1] == m[1][0])
    }
}

/// Representative of `theta` modulo π in `[0, π)`.
pub fn wrap_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Signed difference `b − a` of two directions modulo π, in `(−π/2, π/2]`.
pub fn direction_diff(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(PI);
    if d > FRAC_PI_2 {
        d - PI
    } else {
        d
    }
}

/// Angular distance between two directions identified modulo π, in `[0, π/2]`.
pub fn direction_gap(a: f64, b: f64) -> f64 {
    direction_diff(a, b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal() {
        let (e, f) = Mat2::diag(0.5, 2.0).singular_values();
        assert_eq!((e, f), (0.5, 2.0));
        let (e, f) = Mat2::diag(-3.0, 0.25).singular_values();
        assert_eq!((e, f), (0.25, 3.0));
    }

    #[test]
    fn singular_values_match_characteristic_polynomial() {
        // MᵀM for [[2,1],[0,1]] has characteristic polynomial λ² − 6λ + 4.
        let (e, f) = Mat2::new(2.0, 1.0, 0.0, 1.0).singular_values();
        let lo = 3.0 - 5f64.sqrt();
        let hi = 3.0 + 5f64.sqrt();
        assert!((e * e - lo).abs() < 1e-14);
        assert!((f * f - hi).abs() < 1e-14);
        assert!((e - 0.8740320488976422).abs() < 1e-15);
        assert!((f - 2.288245611270737).abs() < 1e-15);
    }

    #[test]
    fn direction_gap_folds_mod_pi() {
        assert!((direction_gap(0.10, PI - 0.05) - 0.15).abs() < 1e-15);
        assert!((direction_gap(0.0, FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!(direction_gap(0.3, 0.3 + PI).abs() < 1e-15);
        assert!((wrap_pi(-0.1) - (PI - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn rotation_is_isometry() {
        let (e, f) = Mat2::rotation(0.3).singular_values();
        assert!((e - 1.0).abs() < 1e-15 && (f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adjugate_inverts() {
        let m = Mat2::new(1.5, -0.2, 0.7, 3.0);
        let p = m * m.adjugate();
        let d = m.det();
        assert!((p.a11 - d).abs() < 1e-15 && (p.a22 - d).abs() < 1e-15);
        assert!(p.a12.abs() < 1e-15 && p.a21.abs() < 1e-15);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }

    #[test]
    fn second_deriv_is_symmetrized() {
        let t = SecondDeriv::new([[[1.0, 2.0], [4.0, 0.0]], [[0.0, -1.0], [1.0, 3.0]]]);
        assert!(t.is_symmetric());
        assert_eq!(t.get(0, 0, 1), 3.0);
        assert_eq!(t.get(1, 1, 0), 0.0);
    }

    #[test]
    fn second_deriv_norm_single_component_is_exact() {
        let t = SecondDeriv::from_hessians([-2.8, 0.0, 0.0], [0.0; 3]);
        assert!((t.norm() - 2.8).abs() < 1e-15);
        let u = Point2::new(1.0, 0.0);
        assert!((t.apply(u, u).norm() - 2.8).abs() < 1e-15);
    }
}
