//! Object coverage over time with road-side units and opposite traffic.

use collabsense::pointprocess::Seed;
use collabsense::temporal::{run_temporal_experiment, DynamicConfig, RsuConfig};

fn main() -> collabsense::Result<()> {
    let cfg = DynamicConfig::default();
    let recs = run_temporal_experiment(&cfg, &[0.2], &[0.0, 1.0, 2.0], 1, 2, Seed::new(5, 0))?;
    println!("{:<17} {:>4} {:<9} {:>7}", "scheme", "tau", "direction", "mean");
    for r in &recs {
        println!(
            "{:<17} {:>4} {:<9} {:>7.4}",
            r.scheme.name(),
            r.tau,
            format!("{:?}", r.direction),
            r.mean
        );
    }

    // Units mounted above the vehicles see every object in range.
    let high = DynamicConfig {
        rsu: Some(RsuConfig {
            elevated: true,
            ..RsuConfig::default()
        }),
        duration: 0.5,
        ..cfg
    };
    let recs = run_temporal_experiment(&high, &[0.0], &[0.0], 1, 1, Seed::new(5, 0))?;
    let rsu = recs
        .iter()
        .filter(|r| r.scheme.name() == "rsu")
        .map(|r| r.mean)
        .fold(1.0, f64::min);
    println!("\nelevated units, no collaborating vehicles: rsu coverage {rsu}");
    Ok(())
}
