//! Iterate leaves in k until consecutive orders agree, then measure how the
//! limit leaf contracts under the map.
//!
//! cargo run --example limit_leaf

use stable_leaf::budget::{estimate_budget, EpsilonSchedule, SAMPLED_SLACK};
use stable_leaf::geometry::Point2;
use stable_leaf::leaf::{cauchy_iterate, choose_epsilon, contraction_check, measure_lipschitz, LeafOptions};
use stable_leaf::map::builtin::perturbed;

fn main() -> stable_leaf::error::Result<()> {
    let map = perturbed(0.5, 2.0, 0.05);
    let z = Point2::ORIGIN;
    let kmax = 16;
    let sched = EpsilonSchedule::constant(0.05)?;
    let b = estimate_budget(&map, z, &sched, kmax, 2000, 42)?;
    let k0 = b.k0()?;
    let gamma = b.gamma_required.unwrap_or(f64::INFINITY) * SAMPLED_SLACK;
    let lip = measure_lipschitz(&map, &[z], &[k0, kmax])?;
    let eps = choose_epsilon(&b, gamma, lip, &sched, Some((&map, z)))?;
    println!("eps = {eps}, L = {lip:.4}");

    let r = cauchy_iterate(&map, z, &b, &sched, eps, kmax, 1e-8, LeafOptions::default())?;
    for (i, k) in r.k.iter().enumerate() {
        println!("k = {k:>2}: d_k = {:.3e}  bound = {:.3e}  tube ok = {}", r.d_k[i], r.gronwall_bound[i], r.tube_ok[i]);
    }
    let c = contraction_check(&map, &r.limit, &b, 12, 64, 1)?;
    println!("fitted log contraction rate = {:.5} (ln 0.5 = {:.5})", c.rate_fit.unwrap_or(f64::NAN), 0.5f64.ln());
    Ok(())
}
