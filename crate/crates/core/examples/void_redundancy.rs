//! How many sensors see a random empty location.

use collabsense::analytics::{expected_void_redundancy, DiscModelParams};
use collabsense::montecarlo::simulate_void_redundancy;
use collabsense::pointprocess::Seed;

fn main() -> collabsense::Result<()> {
    for lambda in [0.0005, 0.002, 0.005, 0.01, 0.02, 0.05] {
        let r = expected_void_redundancy(&DiscModelParams::new(lambda, 1.0, 1.67, 100.0)?)?;
        println!("lambda {lambda:<7} expected redundancy {r:>7.2}");
    }

    let p_s = [0.25, 0.5, 1.0];
    let run = simulate_void_redundancy(0.01, &p_s, 1.67, 100.0, 20, 50, Seed::new(3, 0))?;
    for (i, &p) in p_s.iter().enumerate() {
        let exact = expected_void_redundancy(&DiscModelParams::new(0.01, p, 1.67, 100.0)?)?;
        let s = run.summary(i);
        println!("p_s {p:<4}  mc {:>6.2} ± {:.2}   exact {exact:.2}", s.mean, s.std_error);
    }
    Ok(())
}
