//! Planar maps with first and second derivative access.
//!
//! A map is anything implementing [`PlanarMap`]. [`MapModel`] wraps one with a
//! name, its parameters, a domain box and the optional singular-set guard, and
//! fills in finite-difference derivatives for whatever the map does not
//! provide analytically.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2, SecondDeriv};

/// Relative step for central-difference Jacobians.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;
/// Relative step for second derivatives.
pub const SECOND_FD_STEP: f64 = 1e-4;
/// Points closer than this to the singular set are rejected.
pub const DEFAULT_GUARD_MARGIN: f64 = 1e-8;
/// Default half-width of the square domain box centred at the origin.
pub const DEFAULT_DOMAIN_HALF_WIDTH: f64 = 5.0;

/// A planar map. Only [`eval`](PlanarMap::eval) is required; every derivative
/// left as `None` is replaced by finite differences.
pub trait PlanarMap: Send + Sync {
    fn eval(&self, p: Point2) -> Point2;

    fn jacobian(&self, _p: Point2) -> Option<Mat2> {
        None
    }

    fn second_derivative(&self, _p: Point2) -> Option<SecondDeriv> {
        None
    }

    /// Spatial gradient of `det Dφ`.
    fn det_gradient(&self, _p: Point2) -> Option<Point2> {
        None
    }

    /// Distance to the singular set, if the map has one.
    fn singular_distance(&self, _p: Point2) -> Option<f64> {
        None
    }
}

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl DomainBox {
    pub fn square(half_width: f64) -> Self {
        DomainBox {
            xmin: -half_width,
            xmax: half_width,
            ymin: -half_width,
            ymax: half_width,
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox::square(DEFAULT_DOMAIN_HALF_WIDTH)
    }
}

#[derive(Clone)]
pub struct MapModel {
    name: String,
    params: BTreeMap<String, f64>,
    domain: DomainBox,
    guard_margin: f64,
    inner: Arc<dyn PlanarMap>,
}

impl fmt::Debug for MapModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapModel")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .finish()
    }
}

fn fd_scale(p: Point2) -> f64 {
    p.norm().max(1.0)
}

impl MapModel {
    pub fn new<M: PlanarMap + 'static>(name: impl Into<String>, map: M) -> Self {
        MapModel {
            name: name.into(),
            params: BTreeMap::new(),
            domain: DomainBox::default(),
            guard_margin: DEFAULT_GUARD_MARGIN,
            inner: Arc::new(map),
        }
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_guard_margin(mut self, margin: f64) -> Self {
        self.guard_margin = margin;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn domain(&self) -> DomainBox {
        self.domain
    }

    pub fn check_domain(&self, p: Point2) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::Domain {
                point: p,
                reason: "non-finite coordinates".into(),
            });
        }
        if !self.domain.contains(p) {
            return Err(Error::Domain {
                point: p,
                reason: "outside the domain box".into(),
            });
        }
        if let Some(d) = self.inner.singular_distance(p) {
            if !(d > self.guard_margin) {
                return Err(Error::Domain {
                    point: p,
                    reason: format!("within {:e} of the singular set", self.guard_margin),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.check_domain(p).is_ok()
    }

    /// `φ(p)`.
    pub fn evaluate(&self, p: Point2) -> Result<Point2> {
        self.check_domain(p)?;
        let q = self.inner.eval(p);
        if !q.is_finite() {
            return Err(Error::NonFinite("map value"));
        }
        Ok(q)
    }

    /// `Dφ(p)`, analytic when available, else central differences with step
    /// `1e-6 · max(1, |p|)`.
    pub fn jacobian(&self, p: Point2) -> Result<Mat2> {
        self.check_domain(p)?;
        let m = match self.inner.jacobian(p) {
            Some(m) => m,
            None => self.fd_jacobian(p),
        };
        if !m.is_finite() {
            return Err(Error::NonFinite("jacobian"));
        }
        Ok(m)
    }

    /// Central-difference Jacobian, ignoring any analytic derivative.
    pub fn fd_jacobian(&self, p: Point2) -> Mat2 {
        let h = JACOBIAN_FD_STEP * fd_scale(p);
        let f = |q: Point2| self.inner.eval(q);
        let dx = (f(p + Point2::new(h, 0.0)) - f(p - Point2::new(h, 0.0))).scale(0.5 / h);
        let dy = (f(p + Point2::new(0.0, h)) - f(p - Point2::new(0.0, h))).scale(0.5 / h);
        Mat2::new(dx.x, dy.x, dx.y, dy.y)
    }

    fn raw_jacobian(&self, p: Point2) -> Mat2 {
        self.inner.jacobian(p).unwrap_or_else(|| self.fd_jacobian(p))
    }

    /// Second-derivative tensor and the gradient of `det Dφ` at `p`.
    pub fn second_derivative_data(&self, p: Point2) -> Result<(SecondDeriv, Point2)> {
        self.check_domain(p)?;
        let tensor = match self.inner.second_derivative(p) {
            Some(t) => t,
            None => self.fd_second_derivative(p),
        };
        let det_grad = match self.inner.det_gradient(p) {
            Some(g) => g,
            None => self.fd_det_gradient(p),
        };
        if !tensor.is_finite() || !det_grad.is_finite() {
            return Err(Error::NonFinite("second derivative"));
        }
        Ok((tensor, det_grad))
    }

    /// Second derivatives with step `1e-4 · max(1, |p|)`: central differences
    /// of the Jacobian.
    pub fn fd_second_derivative(&self, p: Point2) -> SecondDeriv {
        let h = SECOND_FD_STEP * fd_scale(p);
        let jx = self.raw_jacobian(p + Point2::new(h, 0.0)) - self.raw_jacobian(p - Point2::new(h, 0.0));
        let jy = self.raw_jacobian(p + Point2::new(0.0, h)) - self.raw_jacobian(p - Point2::new(0.0, h));
        let s = 0.5 / h;
        // t[i][j][k] = ∂k (∂j Φi)
        SecondDeriv::new([
            [[jx.a11 * s, jy.a11 * s], [jx.a12 * s, jy.a12 * s]],
            [[jx.a21 * s, jy.a21 * s], [jx.a22 * s, jy.a22 * s]],
        ])
    }

    pub fn fd_det_gradient(&self, p: Point2) -> Point2 {
        let h = SECOND_FD_STEP * fd_scale(p);
        let d = |q: Point2| self.raw_jacobian(q).det();
        Point2::new(
            (d(p + Point2::new(h, 0.0)) - d(p - Point2::new(h, 0.0))) * 0.5 / h,
            (d(p + Point2::new(0.0, h)) - d(p - Point2::new(0.0, h))) * 0.5 / h,
        )
    }
}

/// `(x, y) ↦ (λs·x, λu·y)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearMap {
    pub lambda_s: f64,
    pub lambda_u: f64,
}

impl PlanarMap for LinearMap {
    fn eval(&self, p: Point2) -> Point2 {
        Point2::new(self.lambda_s * p.x, self.lambda_u * p.y)
    }
    fn jacobian(&self, _p: Point2) -> Option<Mat2> {
        Some(Mat2::diag(self.lambda_s, self.lambda_u))
    }
    fn second_derivative(&self, _p: Point2) -> Option<SecondDeriv> {
        Some(SecondDeriv::ZERO)
    }
    fn det_gradient(&self, _p: Point2) -> Option<Point2> {
        Some(Point2::ORIGIN)
    }
}

/// `(x, y) ↦ (λs·x + c·y², λu·y + c·x²)`.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedMap {
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub c: f64,
}

impl PlanarMap for PerturbedMap {
    fn eval(&self, p: Point2) -> Point2 {
        Point2::new(
            self.lambda_s * p.x + self.c * p.y * p.y,
            self.lambda_u * p.y + self.c * p.x * p.x,
        )
    }
    fn jacobian(&self, p: Point2) -> Option<Mat2> {
        Some(Mat2::new(
            self.lambda_s,
            2.0 * self.c * p.y,
            2.0 * self.c * p.x,
            self.lambda_u,
        ))
    }
    fn second_derivative(&self, _p: Point2) -> Option<SecondDeriv> {
        let c2 = 2.0 * self.c;
        Some(SecondDeriv::from_hessians([0.0, 0.0, c2], [c2, 0.0, 0.0]))
    }
    fn det_gradient(&self, p: Point2) -> Option<Point2> {
        // det = λs·λu − 4c²·x·y
        let k = -4.0 * self.c * self.c;
        Some(Point2::new(k * p.y, k * p.x))
    }
}

/// `(x, y) ↦ (1 − a·x² + y, b·x)`.
#[derive(Debug, Clone, Copy)]
pub struct HenonMap {
    pub a: f64,
    pub b: f64,
}

impl PlanarMap for HenonMap {
    fn eval(&self, p: Point2) -> Point2 {
        Point2::new(1.0 - self.a * p.x * p.x + p.y, self.b * p.x)
    }
    fn jacobian(&self, p: Point2) -> Option<Mat2> {
        Some(Mat2::new(-2.0 * self.a * p.x, 1.0, self.b, 0.0))
    }
    fn second_derivative(&self, _p: Point2) -> Option<SecondDeriv> {
        Some(SecondDeriv::from_hessians([-2.0 * self.a, 0.0, 0.0], [0.0; 3]))
    }
    fn det_gradient(&self, _p: Point2) -> Option<Point2> {
        Some(Point2::ORIGIN)
    }
}

fn param(params: &BTreeMap<String, f64>, name: &str, map: &str) -> Result<f64> {
    let v = *params
        .get(name)
        .ok_or_else(|| Error::BadParams(format!("map '{map}' requires parameter '{name}'")))?;
    if !v.is_finite() {
        return Err(Error::BadParams(format!("parameter '{name}' must be finite")));
    }
    Ok(v)
}

fn check_saddle(lambda_s: f64, lambda_u: f64) -> Result<()> {
    if !(lambda_s.abs() < 1.0 && lambda_s != 0.0) {
        return Err(Error::BadParams(format!(
            "lambda_s = {lambda_s} must satisfy 0 < |lambda_s| < 1"
        )));
    }
    if !(lambda_u.abs() > 1.0) {
        return Err(Error::BadParams(format!(
            "lambda_u = {lambda_u} must satisfy |lambda_u| > 1"
        )));
    }
    Ok(())
}

/// Builds one of the built-in maps.
///
/// | name        | params              | map                                   |
/// |-------------|---------------------|---------------------------------------|
/// | `linear`    | `lambda_s, lambda_u`| `(λs·x, λu·y)`                        |
/// | `perturbed` | `lambda_s, lambda_u, c` | `(λs·x + c·y², λu·y + c·x²)`      |
/// | `henon`     | `a, b`              | `(1 − a·x² + y, b·x)`                 |
///
/// With `require_hyperbolic`, `linear` and `perturbed` must have
/// `0 < |λs| < 1 < |λu|`.
pub fn make_map(
    name: &str,
    params: &BTreeMap<String, f64>,
    require_hyperbolic: bool,
) -> Result<MapModel> {
    let model = match name {
        "linear" => {
            let lambda_s = param(params, "lambda_s", name)?;
            let lambda_u = param(params, "lambda_u", name)?;
            if require_hyperbolic {
                check_saddle(lambda_s, lambda_u)?;
            }
            MapModel::new(name, LinearMap { lambda_s, lambda_u })
        }
        "perturbed" => {
            let lambda_s = param(params, "lambda_s", name)?;
            let lambda_u = param(params, "lambda_u", name)?;
            let c = param(params, "c", name)?;
            if require_hyperbolic {
                check_saddle(lambda_s, lambda_u)?;
            }
            MapModel::new(name, PerturbedMap { lambda_s, lambda_u, c })
        }
        "henon" => {
            let a = param(params, "a", name)?;
            let b = param(params, "b", name)?;
            if b == 0.0 {
                return Err(Error::BadParams("henon requires b != 0".into()));
            }
            MapModel::new(name, HenonMap { a, b })
        }
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    let expected: &[&str] = match name {
        "linear" => &["lambda_s", "lambda_u"],
        "perturbed" => &["lambda_s", "lambda_u", "c"],
        _ => &["a", "b"],
    };
    if let Some(extra) = params.keys().find(|k| !expected.contains(&k.as_str())) {
        return Err(Error::BadParams(format!(
            "map '{name}' does not take parameter '{extra}'"
        )));
    }
    Ok(model.with_params(params.clone()))
}

/// Shorthand constructors for the built-in maps.
pub mod builtin {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn linear(lambda_s: f64, lambda_u: f64) -> MapModel {
        MapModel::new("linear", LinearMap { lambda_s, lambda_u })
            .with_params(params(&[("lambda_s", lambda_s), ("lambda_u", lambda_u)]))
    }

    pub fn perturbed(lambda_s: f64, lambda_u: f64, c: f64) -> MapModel {
        MapModel::new("perturbed", PerturbedMap { lambda_s, lambda_u, c }).with_params(params(&[
            ("lambda_s", lambda_s),
            ("lambda_u", lambda_u),
            ("c", c),
        ]))
    }

    pub fn henon(a: f64, b: f64) -> MapModel {
        MapModel::new("henon", HenonMap { a, b }).with_params(params(&[("a", a), ("b", b)]))
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn evaluate_examples() {
        let h = henon(1.4, 0.3);
        assert_eq!(h.evaluate(Point2::ORIGIN).unwrap(), Point2::new(1.0, 0.0));
        let l = linear(0.5, 2.0);
        assert_eq!(l.evaluate(Point2::ORIGIN).unwrap(), Point2::ORIGIN);
        assert_eq!(l.evaluate(Point2::new(1.0, 1.0)).unwrap(), Point2::new(0.5, 2.0));
    }

    #[test]
    fn evaluate_rejects_outside_domain() {
        let l = linear(0.5, 2.0);
        assert!(matches!(
            l.evaluate(Point2::new(6.0, 0.0)),
            Err(Error::Domain { .. })
        ));
        let small = l.clone().with_domain(DomainBox::square(0.5));
        assert!(small.evaluate(Point2::new(0.6, 0.0)).is_err());
    }

    #[test]
    fn henon_jacobian_matches_finite_differences() {
        let h = henon(1.4, 0.3);
        for (p, expect) in [
            (Point2::ORIGIN, Mat2::new(0.0, 1.0, 0.3, 0.0)),
            (Point2::new(1.0, 0.0), Mat2::new(-2.8, 1.0, 0.3, 0.0)),
        ] {
            let j = h.jacobian(p).unwrap();
            assert_eq!(j, expect);
            let fd = h.fd_jacobian(p);
            for (a, b) in [(fd.a11, j.a11), (fd.a12, j.a12), (fd.a21, j.a21), (fd.a22, j.a22)] {
                assert!(close(a, b, 1e-8), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn second_derivative_examples() {
        let (t, g) = linear(0.5, 2.0)
            .second_derivative_data(Point2::new(0.3, -0.2))
            .unwrap();
        assert_eq!(t, SecondDeriv::ZERO);
        assert_eq!(g, Point2::ORIGIN);

        let h = henon(1.4, 0.3);
        let p = Point2::new(0.4, -0.1);
        let (t, g) = h.second_derivative_data(p).unwrap();
        let fd = h.fd_second_derivative(p);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let expect = if (i, j, k) == (0, 0, 0) { -2.8 } else { 0.0 };
                    assert_eq!(t.get(i, j, k), expect);
                    assert!(close(fd.get(i, j, k), expect, 1e-8));
                }
            }
        }
        assert_eq!(g, Point2::ORIGIN);
        assert!(h.fd_det_gradient(p).norm() < 1e-9);

        let pm = perturbed(0.5, 2.0, 0.05);
        let (t, _) = pm.second_derivative_data(Point2::ORIGIN).unwrap();
        let fd = pm.fd_second_derivative(Point2::ORIGIN);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let expect = match (i, j, k) {
                        (0, 1, 1) | (1, 0, 0) => 0.1,
                        _ => 0.0,
                    };
                    assert!(close(t.get(i, j, k), expect, 1e-15));
                    assert!(close(fd.get(i, j, k), expect, 1e-8));
                }
            }
        }
    }

    #[test]
    fn make_map_examples() {
        let mut p = BTreeMap::new();
        p.insert("lambda_s".to_string(), 0.5);
        p.insert("lambda_u".to_string(), 2.0);
        let m = make_map("linear", &p, true).unwrap();
        assert_eq!(m.jacobian(Point2::new(1.0, -2.0)).unwrap(), Mat2::diag(0.5, 2.0));

        p.insert("lambda_s".to_string(), 1.0);
        assert!(matches!(make_map("linear", &p, true), Err(Error::BadParams(_))));
        assert!(make_map("linear", &p, false).is_ok());

        let mut hp = BTreeMap::new();
        hp.insert("a".to_string(), 1.4);
        hp.insert("b".to_string(), 0.3);
        let h = make_map("henon", &hp, false).unwrap();
        let d = h.jacobian(Point2::new(0.7, 0.1)).unwrap().det();
        assert!(close(d, -0.3, 1e-15));

        assert!(matches!(make_map("lorenz", &hp, false), Err(Error::UnknownMap(_))));
        hp.remove("b");
        assert!(matches!(make_map("henon", &hp, false), Err(Error::BadParams(_))));
    }

    struct Guarded;
    impl PlanarMap for Guarded {
        fn eval(&self, p: Point2) -> Point2 {
            Point2::new(1.0 / p.x, p.y)
        }
        fn singular_distance(&self, p: Point2) -> Option<f64> {
            Some(p.x.abs())
        }
    }

    #[test]
    fn singular_guard_rejects_points_near_singular_set() {
        let m = MapModel::new("guarded", Guarded);
        assert!(m.evaluate(Point2::new(1e-9, 0.0)).is_err());
        assert!(m.evaluate(Point2::new(0.5, 0.0)).is_ok());
        // derivatives fall back to finite differences
        let j = m.jacobian(Point2::new(0.5, 0.0)).unwrap();
        assert!(close(j.a11, -4.0, 1e-6));
    }
}
