//! The full fixed-point scenario at the Hénon saddle, printed as JSON.
//!
//! cargo run --release --example henon_saddle

use stable_leaf::fixedpoint::{eigen_split, verify_fixed_point_theorem, TheoremOptions};
use stable_leaf::geometry::Point2;
use stable_leaf::map::builtin::henon;
use stable_leaf::report::to_json;

fn main() -> stable_leaf::error::Result<()> {
    let map = henon(1.4, 0.3);
    let fp = eigen_split(&map, Point2::new(0.6, 0.2))?;
    println!("saddle {:?}, lambda_s = {:.6}, lambda_u = {:.6}", fp.p, fp.lambda_s, fp.lambda_u);
    let report = verify_fixed_point_theorem(&map, &fp, 0.05, &TheoremOptions::default())?;
    print!("{}", to_json(&report)?);
    Ok(())
}
