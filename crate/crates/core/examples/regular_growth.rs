//! Fit the regular-growth constant K around a saddle for a few slack values.
//!
//! cargo run --example regular_growth

use stable_leaf::budget::EpsilonSchedule;
use stable_leaf::fixedpoint::{eigen_split, regular_growth_check};
use stable_leaf::geometry::Point2;
use stable_leaf::map::builtin::perturbed;

fn main() -> stable_leaf::error::Result<()> {
    let map = perturbed(0.5, 2.0, 0.05);
    let fp = eigen_split(&map, Point2::ORIGIN)?;
    for (eta, delta) in [(0.05, 0.02), (0.3, 0.02), (1.0, 0.001)] {
        let sched = EpsilonSchedule::constant(eta)?;
        match regular_growth_check(&map, &fp.clone().with_delta(delta), &sched, 12, 1000, 7) {
            Ok(g) => println!(
                "eta = {eta}, delta = {delta}: K_fit = {:.4}, K_aggregate = {:.4}, K_distortion = {:.4}",
                g.k_fit, g.k_aggregate, g.k_distortion
            ),
            Err(e) => println!("eta = {eta}, delta = {delta}: {e}"),
        }
    }
    Ok(())
}
