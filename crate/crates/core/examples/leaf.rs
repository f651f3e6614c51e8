//! One finite-time leaf through a point near the Hénon saddle, written as CSV.
//!
//! cargo run --example leaf > leaf.csv

use stable_leaf::geometry::Point2;
use stable_leaf::leaf::integrate_leaf;
use stable_leaf::map::builtin::henon;
use stable_leaf::report::write_leaf_csv;

fn main() -> stable_leaf::error::Result<()> {
    let map = henon(1.4, 0.3);
    let eps = 0.05;
    let leaf = integrate_leaf(&map, Point2::new(0.63, 0.19), 10, eps, eps / 512.0)?;
    eprintln!("reach {:?}, truncated {}/{}", leaf.reach(), leaf.truncated_neg, leaf.truncated_pos);
    write_leaf_csv(&leaf, std::io::stdout().lock())
}
