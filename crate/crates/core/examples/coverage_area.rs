//! Single-sensor coverage area: closed form against Monte Carlo.
//!
//! `cargo run --release --example coverage_area`

use collabsense::analytics::{expected_coverage_area, DiscModelParams};
use collabsense::montecarlo::simulate_coverage_area_two_level;
use collabsense::pointprocess::Seed;

fn main() -> collabsense::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>8} {:>7}", "lambda", "exact", "mc", "se", "rel");
    for (i, lambda) in [0.003, 0.01, 0.0175, 0.03].into_iter().enumerate() {
        let p = DiscModelParams::new(lambda, 1.0, 1.67, 100.0)?;
        let exact = expected_coverage_area(&p)?;
        let mc = simulate_coverage_area_two_level(&p, 20, 20, 2, 0.25, 1.0, Seed::new(7, i as u64))?;
        println!(
            "{lambda:>8} {:>10.1} {:>10.1} {:>8.1} {:>+7.3}",
            exact.total,
            mc.mean,
            mc.std_error,
            mc.mean / exact.total - 1.0
        );
    }
    Ok(())
}
