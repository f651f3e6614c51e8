//! Most contracted and expanded directions of a single 2x2 matrix.
//!
//! cargo run --example singular_directions

use stable_leaf::cocycle::{singular_frame, AngleQuotients};
use stable_leaf::geometry::Mat2;

fn main() -> stable_leaf::error::Result<()> {
    let m = Mat2::new(2.0, 1.0, 0.0, 1.0);
    let frame = singular_frame(&m)?;
    let q = AngleQuotients::of(&m);
    println!("M = {m:?}");
    println!("E = {:.12}  F = {:.12}  H = E/F = {:.12}", frame.e, frame.f, frame.ratio());
    println!("contracted theta = {:.12} rad, e = {:?}", frame.theta_contract, frame.contracted());
    println!("expanded   theta = {:.12} rad, f = {:?}", frame.theta_expand, frame.expanded());
    println!("|M e| = {:.12}  |M f| = {:.12}", m.apply(frame.contracted()).norm(), m.apply(frame.expanded()).norm());
    let lhs = 4.0 * q.a * q.a + q.b * q.b;
    let rhs = (frame.e * frame.e - frame.f * frame.f).powi(2);
    println!("4A^2 + B^2 = {lhs:.12}  (E^2 - F^2)^2 = {rhs:.12}");
    Ok(())
}
