//! γ-coverage of a strip-shaped region of interest: approximation against
//! simulation of the disc model, and the fixed sensor density sweep.

use collabsense::analytics::{coverage_vs_obstruction, gamma_coverage_approx, DiscModelParams, RoiSpec};
use collabsense::montecarlo::simulate_gamma_coverage;
use collabsense::pointprocess::Seed;

fn main() -> collabsense::Result<()> {
    let roi = RoiSpec::DiscStrip {
        r_interest: 100.0,
        strip_half_width: 12.0,
    };
    let p = DiscModelParams::new(0.01, 1.0, 1.67, 100.0)?;
    let p_s = [0.1, 0.3, 0.6];
    let pts = simulate_gamma_coverage(&p, &p_s, &[1, 2, 3], &roi, 8, 0.5, Seed::new(11, 0))?;
    println!("{:>5} {:>5} {:>8} {:>8}", "p_s", "gamma", "approx", "mc");
    for pt in &pts {
        let q = DiscModelParams { p_s: pt.p_s, ..p };
        let a = gamma_coverage_approx(&q, &roi, pt.gamma)?;
        println!(
            "{:>5} {:>5} {:>8.4} {:>8.4}",
            pt.p_s, pt.gamma, a.normalized, pt.summary.mean
        );
    }

    println!("\n1-coverage at fixed sensor density 0.002/m²:");
    let totals: Vec<f64> = (1..=10).map(|k| 0.003 * k as f64).collect();
    for (obstruction, c) in coverage_vs_obstruction(0.002, &totals, 1.67, 100.0, &roi, 1)? {
        println!("  obstruction {obstruction:.3}/m²  coverage {c:.4}");
    }
    Ok(())
}
