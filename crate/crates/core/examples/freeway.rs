//! Freeway scenario: own-vehicle coverage against the strip-ROI closed
//! form, and the collaborative gains at λ = 0.0175.

use collabsense::analytics::{expected_roi_coverage, DiscModelParams, RoiSpec};
use collabsense::freeway::{run_experiment_multi, FreewayConfig, FreewayMetric, SweepPoint};
use collabsense::pointprocess::Seed;

fn main() -> collabsense::Result<()> {
    let roi = RoiSpec::DiscStrip {
        r_interest: 100.0,
        strip_half_width: 12.0,
    };
    let base = FreewayConfig {
        p_s: 1.0,
        ..FreewayConfig::default()
    };
    let lambdas = [0.0025, 0.005, 0.01, 0.015, 0.0175, 0.02, 0.024];
    let sweep: Vec<SweepPoint> = lambdas
        .iter()
        .map(|&l| SweepPoint {
            lambda: Some(l),
            p_s: None,
        })
        .collect();
    let recs = run_experiment_multi(
        &base,
        &sweep,
        &[FreewayMetric::CoverageAreaNorm],
        6,
        Seed::new(1, 0),
        0.5,
    )?;
    println!("{:>8} {:>9} {:>9} {:>7}", "lambda", "analytic", "freeway", "gap");
    for (l, r) in lambdas.iter().zip(&recs) {
        let a = expected_roi_coverage(&DiscModelParams::new(*l, 1.0, 1.67, 100.0)?, &roi)?;
        println!("{l:>8} {a:>9.4} {:>9.4} {:>+7.3}", r.mean, r.mean - a);
    }

    let cfg = FreewayConfig::default();
    let sweep = [
        SweepPoint {
            lambda: Some(0.0175),
            p_s: Some(0.2),
        },
        SweepPoint {
            lambda: Some(0.0175),
            p_s: Some(0.1),
        },
    ];
    let metrics = [
        FreewayMetric::CoverageAreaNorm,
        FreewayMetric::GammaCoverageNorm { gamma: 1 },
        FreewayMetric::RsuGain { gamma: 2, gamma_rsu: 1 },
    ];
    for r in run_experiment_multi(&cfg, &sweep, &metrics, 4, Seed::new(2, 0), 0.5)? {
        println!("p_s {:<4} {:<24} {:.4} ± {:.4}", r.p_s, r.metric, r.mean, r.std_error);
    }
    Ok(())
}
