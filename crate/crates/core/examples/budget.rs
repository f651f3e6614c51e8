//! Hyperbolicity budget around the origin of a perturbed saddle, and the two
//! summability conditions it feeds.
//!
//! cargo run --example budget

use stable_leaf::budget::{check_condition_double_star, check_condition_star, estimate_budget, EpsilonSchedule};
use stable_leaf::geometry::Point2;
use stable_leaf::map::builtin::perturbed;

fn main() -> stable_leaf::error::Result<()> {
    let map = perturbed(0.5, 2.0, 0.05);
    let sched = EpsilonSchedule::constant(0.05)?;
    let b = estimate_budget(&map, Point2::ORIGIN, &sched, 12, 2000, 42)?;
    println!("{:>3} {:>8} {:>8} {:>12} {:>12} {:>12}", "k", "p", "q", "gamma", "xi", "accepted");
    for k in 0..=b.kmax {
        println!(
            "{k:>3} {:>8.4} {:>8.4} {:>12.4e} {:>12.4e} {:>12}",
            b.p[k], b.q[k], b.gamma[k], b.xi[k], b.accepted[k]
        );
    }
    let star = check_condition_star(&b);
    let dstar = check_condition_double_star(&b, &sched);
    println!("k0 = {:?}", b.k0);
    println!("(*)  {:?}, tail ratio {:?}", star.verdict, star.tail_ratio);
    println!("(**) {:?}, gamma_required = {:.4}", dstar.verdict, dstar.gamma_required);
    Ok(())
}
