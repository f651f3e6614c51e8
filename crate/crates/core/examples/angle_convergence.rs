//! How fast the finite-time directions e^(k) settle at the Hénon saddle:
//! the gap between consecutive orders against its bound, and the measured
//! derivative of the direction field.
//!
//! cargo run --example angle_convergence

use stable_leaf::cocycle::build_orbit_cocycle;
use stable_leaf::directions::{angle_gap, direction_field_derivative};
use stable_leaf::fixedpoint::eigen_split;
use stable_leaf::geometry::Point2;
use stable_leaf::map::builtin::henon;

fn main() -> stable_leaf::error::Result<()> {
    let map = henon(1.4, 0.3);
    let p = eigen_split(&map, Point2::new(0.6, 0.2))?.p;
    let c = build_orbit_cocycle(&map, p + Point2::new(0.003, -0.002), 13)?;
    println!("{:>3} {:>12} {:>12}", "k", "|tan phi|", "bound");
    for k in 1..=12 {
        let g = angle_gap(&c, k)?;
        println!("{k:>3} {:>12.3e} {:>12.3e}", g.tan_phi, g.bound);
    }
    let d = direction_field_derivative(&map, &c, 8, 1e-6, None)?;
    println!("measured Lipschitz constant of e^(8): {:.4}", d.l_measured);
    Ok(())
}
