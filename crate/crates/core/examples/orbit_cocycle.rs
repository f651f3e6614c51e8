//! Growth of the derivative cocycle along a Hénon orbit, with the
//! second-derivative distortion bounds at each order.
//!
//! cargo run --example orbit_cocycle

use stable_leaf::cocycle::{build_orbit_cocycle, distortion_bounds};
use stable_leaf::geometry::Point2;
use stable_leaf::map::builtin::henon;

fn main() -> stable_leaf::error::Result<()> {
    let map = henon(1.4, 0.3);
    let c = build_orbit_cocycle(&map, Point2::new(0.5, 0.1), 10)?;
    println!("{:>3} {:>14} {:>14} {:>14} {:>12} {:>12}", "k", "E_k", "F_k", "H_k", "D1 rhs", "D2 rhs");
    for k in 1..=c.kmax() {
        let (d1, d2) = distortion_bounds(&c, k)?;
        println!("{k:>3} {:>14.6e} {:>14.6e} {:>14.6e} {d1:>12.4e} {d2:>12.4e}", c.e(k), c.f(k), c.h(k));
    }
    Ok(())
}
