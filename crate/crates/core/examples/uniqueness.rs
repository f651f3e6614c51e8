//! Points off the stable leaf leave the orbit tubes; points on it do not.
//!
//! cargo run --example uniqueness

use stable_leaf::budget::{exit_index, EpsilonSchedule};
use stable_leaf::geometry::Point2;
use stable_leaf::leaf::integrate_leaf;
use stable_leaf::map::builtin::linear;

fn main() -> stable_leaf::error::Result<()> {
    let map = linear(0.5, 2.0);
    let eta = 0.1;
    let sched = EpsilonSchedule::constant(eta)?;
    for delta in [1e-2, 1e-3, 1e-4, 1e-6] {
        let exit = exit_index(&map, Point2::ORIGIN, &sched, Point2::new(0.03, delta), 30)?;
        println!("offset {delta:.0e}: exits at j = {exit:?} (log2(eta/offset) = {:.2})", (eta / delta).log2());
    }
    let leaf = integrate_leaf(&map, Point2::ORIGIN, 8, 0.05, 0.05 / 512.0)?;
    let stay = leaf
        .samples
        .iter()
        .filter(|s| matches!(exit_index(&map, Point2::ORIGIN, &sched, s.p, 30), Ok(None)))
        .count();
    println!("{stay} of {} leaf points never exit through j = 30", leaf.samples.len());
    Ok(())
}
