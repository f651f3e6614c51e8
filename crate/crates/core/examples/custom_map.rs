//! Plugging in a map of your own: implement `PlanarMap::eval` and let finite
//! differences supply the derivatives, or override them when known.
//!
//! cargo run --example custom_map

use stable_leaf::fixedpoint::{eigen_split, verify_fixed_point_theorem, TheoremOptions};
use stable_leaf::geometry::{Mat2, Point2};
use stable_leaf::map::{MapModel, PlanarMap};

/// A saddle with a trigonometric twist: `(0.4x + 0.1 sin y, 2.5y + 0.2x³)`.
struct TwistedSaddle;

impl PlanarMap for TwistedSaddle {
    fn eval(&self, p: Point2) -> Point2 {
        Point2::new(0.4 * p.x + 0.1 * p.y.sin(), 2.5 * p.y + 0.2 * p.x.powi(3))
    }

    fn jacobian(&self, p: Point2) -> Option<Mat2> {
        Some(Mat2::new(0.4, 0.1 * p.y.cos(), 0.6 * p.x * p.x, 2.5))
    }
}

fn main() -> stable_leaf::error::Result<()> {
    let map = MapModel::new("twisted", TwistedSaddle);
    let fp = eigen_split(&map, Point2::new(0.01, 0.01))?;
    println!("fixed point {:?}, eigenvalues {:.4} / {:.4}", fp.p, fp.lambda_s, fp.lambda_u);
    println!("Es = {:?}", fp.es);
    // With an unstable eigenvalue of 2.5, rounding-level offsets from the
    // stable curve leave the default domain box after about 14 steps.
    let opts = TheoremOptions { kmax: 10, ..TheoremOptions::default() };
    let r = verify_fixed_point_theorem(&map, &fp, 0.05, &opts)?;
    println!("eps = {}, k0 = {}, converged = {}", r.eps, r.k0, r.convergence.converged);
    println!("tangency error vs Es = {:.2e} rad", r.tangency.angle_error);
    println!(
        "contraction rate {:.4} vs ln|lambda_s| = {:.4}",
        r.contraction_rate.fitted_log_rate.unwrap_or(f64::NAN),
        r.contraction_rate.ln_lambda_s
    );
    Ok(())
}
