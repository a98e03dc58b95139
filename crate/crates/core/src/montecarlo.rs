//! Monte Carlo estimates for the disc Boolean model around a typical
//! sensor at the origin.
//!
//! Each seed samples one environment in a window large enough that nothing
//! outside it can see or shadow the region being measured. Penetration
//! sweeps reuse one environment per seed: every object carries a sensor and
//! membership at penetration `p` is an independent thinning mask, nested in
//! `p`, so only the collaborator set changes between sweep points.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{DiscModelParams, RoiSpec};
use crate::error::{invalid, Result};
use crate::geometry::Point2;
use crate::pointprocess::{
    sample_environment, sample_typical_sensor_environment, thinning_mask, EnvironmentParams, Seed, Window,
};
use crate::sensing::{coverage_area, CoverageGrid, EnvironmentSnapshot, LocationProbe, RegionOfInterest, SensorView};
use crate::stats::{ratio_summary, Summary};
use rand::Rng;

fn region(roi: &RoiSpec) -> Result<RegionOfInterest> {
    match *roi {
        RoiSpec::Disc { r_interest } => RegionOfInterest::disc(Point2::ORIGIN, r_interest),
        RoiSpec::DiscStrip {
            r_interest,
            strip_half_width,
        } => RegionOfInterest::disc_strip(Point2::ORIGIN, r_interest, 0.0, strip_half_width),
    }
}

/// Window holding every object that can see, or block a view into, `roi`.
fn window_around(roi: &RegionOfInterest, p: &DiscModelParams) -> Result<Window> {
    let (x0, x1, y0, y1) = roi.bbox();
    let m = p.r_sense + p.r_obj + 1.0;
    Window::new(x0 - m, x1 + m, y0 - m, y1 + m, 0.0)
}

fn check_runs(seeds: usize, resolution: f64) -> Result<()> {
    if seeds == 0 {
        return Err(invalid("need at least one seed"));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(invalid(format!("resolution must be > 0, got {resolution}")));
    }
    Ok(())
}

fn typical_env(p: &DiscModelParams, all_sensors: bool, w: &Window, seed: Seed) -> Result<EnvironmentSnapshot> {
    let p_s = if all_sensors { 1.0 } else { p.p_s };
    let params = EnvironmentParams::discs(p.lambda, p_s, p.r_obj, p.r_sense)?;
    sample_typical_sensor_environment(&params, w, seed)
}

/// Mean coverage area of a sensor inside its own support.
///
/// With `sensors_per_seed == 1` each seed measures the typical sensor at
/// the origin. Otherwise each seed measures every object centered in a
/// square holding `sensors_per_seed` objects on average; each of them is a
/// typical point of the process, and the per-seed sums are combined as a
/// ratio estimate.
pub fn simulate_coverage_area(
    p: &DiscModelParams,
    seeds: usize,
    sensors_per_seed: usize,
    resolution: f64,
    root: Seed,
) -> Result<Summary> {
    p.validate()?;
    check_runs(seeds, resolution)?;
    if sensors_per_seed == 0 {
        return Err(invalid("need at least one sensor per seed"));
    }
    if sensors_per_seed == 1 || p.lambda == 0.0 {
        let roi = RegionOfInterest::disc(Point2::ORIGIN, p.r_sense)?;
        let w = window_around(&roi, p)?;
        let areas = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let env = typical_env(p, false, &w, root.child(s as u64))?;
                coverage_area(&env, 0, &roi, resolution)
            })
            .collect::<Result<Vec<f64>>>()?;
        return Ok(Summary::of(&areas));
    }
    let (num, den) = box_sensor_sums(p, seeds, sensors_per_seed, root, |v| {
        vec![v.covered_cell_count(resolution) as f64 * resolution * resolution]
    })?;
    Ok(ratio_summary(&num[0], &den))
}

/// Per-seed sums of `f` over every sensor centered in the inner square of a
/// fresh realization, together with the sensor counts.
fn box_sensor_sums(
    p: &DiscModelParams,
    seeds: usize,
    sensors_per_seed: usize,
    root: Seed,
    f: impl Fn(&SensorView<'_>) -> Vec<f64> + Sync,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let half = 0.5 * (sensors_per_seed as f64 / p.lambda).sqrt();
    let m = half + p.r_sense + p.r_obj + 1.0;
    let w = Window::new(-m, m, -m, m, 0.0)?;
    let params = EnvironmentParams::discs(p.lambda, 1.0, p.r_obj, p.r_sense)?;
    let batches = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let env = sample_environment(&params, &w, root.child(s as u64), 0)?;
            let mut sum: Vec<f64> = Vec::new();
            let mut n = 0.0;
            for (k, o) in env.objects().iter().enumerate() {
                let c = o.placed.center;
                if c.x.abs() > half || c.y.abs() > half {
                    continue;
                }
                let v = f(&SensorView::at_index(&env, k));
                if sum.is_empty() {
                    sum = vec![0.0; v.len()];
                }
                sum.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                n += 1.0;
            }
            Ok((sum, n))
        })
        .collect::<Result<Vec<(Vec<f64>, f64)>>>()?;
    let width = batches.iter().map(|b| b.0.len()).max().unwrap_or(0);
    let mut num = vec![Vec::with_capacity(seeds); width];
    let mut den = Vec::with_capacity(seeds);
    for (sum, n) in batches {
        for (j, col) in num.iter_mut().enumerate() {
            col.push(sum.get(j).copied().unwrap_or(0.0));
        }
        den.push(n);
    }
    Ok((num, den))
}

/// Two-level estimate of the mean coverage area at `fine` resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelSummary {
    pub mean: f64,
    pub std_error: f64,
    /// Mean area at the coarse resolution.
    pub coarse: Summary,
    /// Mean of fine minus coarse area over paired rasters of one sensor.
    pub correction: Summary,
}

/// Mean coverage area at resolution `fine`, estimated as the coarse-raster
/// mean over many sensors plus the fine-minus-coarse difference over fewer
/// sensors rastered at both resolutions. The two terms come from
/// independent realizations, so their errors add in quadrature.
pub fn simulate_coverage_area_two_level(
    p: &DiscModelParams,
    seeds: usize,
    coarse_per_seed: usize,
    paired_per_seed: usize,
    fine: f64,
    coarse: f64,
    root: Seed,
) -> Result<TwoLevelSummary> {
    p.validate()?;
    check_runs(seeds, fine)?;
    check_runs(seeds, coarse)?;
    if coarse_per_seed == 0 || paired_per_seed == 0 || p.lambda == 0.0 {
        return Err(invalid("two-level runs need lambda > 0 and sensors in both levels"));
    }
    let c = simulate_coverage_area(p, seeds, coarse_per_seed.max(2), coarse, root.child(0))?;
    let (num, den) = box_sensor_sums(p, seeds, paired_per_seed, root.child(1), |v| {
        let a = v.covered_cell_count(fine) as f64 * fine * fine;
        let b = v.covered_cell_count(coarse) as f64 * coarse * coarse;
        vec![a - b]
    })?;
    let d = ratio_summary(&num[0], &den);
    Ok(TwoLevelSummary {
        mean: c.mean + d.mean,
        std_error: c.std_error.hypot(d.std_error),
        coarse: c,
        correction: d,
    })
}

/// Fraction of `roi` covered by the typical sensor alone.
pub fn simulate_roi_coverage(
    p: &DiscModelParams,
    roi: &RoiSpec,
    seeds: usize,
    resolution: f64,
    root: Seed,
) -> Result<Summary> {
    Ok(simulate_gamma_coverage(p, &[0.0], &[1], roi, seeds, resolution, root)?[0].summary)
}

/// Redundancy of void locations at several penetrations on shared
/// environments. `counts[i][n]` is the count at `p_s[i]` for sample `n`;
/// samples are stored seed by seed, `points_per_seed` at a time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoidRedundancyRun {
    pub p_s: Vec<f64>,
    pub points_per_seed: usize,
    pub counts: Vec<Vec<f64>>,
}

impl VoidRedundancyRun {
    /// Mean count at `p_s[i]`. Points of one seed share an environment, so
    /// the standard error is taken over per-seed means.
    pub fn summary(&self, i: usize) -> Summary {
        self.clustered(&self.counts[i])
    }

    /// Per-sample `count(p_i) - (p_i / p_max) count(p_max)`, which has mean
    /// zero when redundancy is linear in the penetration.
    pub fn linearity_residual(&self, i: usize) -> Summary {
        let (top, p_top) =
            self.p_s.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
            );
        let ratio = self.p_s[i] / p_top;
        let r: Vec<f64> = self.counts[i]
            .iter()
            .zip(&self.counts[top])
            .map(|(a, b)| a - ratio * b)
            .collect();
        self.clustered(&r)
    }

    fn clustered(&self, xs: &[f64]) -> Summary {
        let means: Vec<f64> = xs.chunks(self.points_per_seed.max(1)).map(crate::stats::mean).collect();
        Summary {
            n: xs.len(),
            ..Summary::of(&means)
        }
    }
}

/// Samples `points_per_seed` void locations uniformly in the square
/// `[-half_box, half_box]²` per seed and counts the sensors seeing each.
pub fn simulate_void_redundancy(
    lambda: f64,
    p_s: &[f64],
    r_obj: f64,
    r_sense: f64,
    seeds: usize,
    points_per_seed: usize,
    root: Seed,
) -> Result<VoidRedundancyRun> {
    if p_s.is_empty() || p_s.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("penetrations must be a nonempty list in [0, 1]"));
    }
    if seeds == 0 || points_per_seed == 0 {
        return Err(invalid("need at least one seed and one point per seed"));
    }
    let p = DiscModelParams::new(lambda, 1.0, r_obj, r_sense)?;
    let half_box = 50.0;
    let m = half_box + r_sense + r_obj + 1.0;
    let w = Window::new(-m, m, -m, m, 0.0)?;
    let params = EnvironmentParams::discs(p.lambda, 1.0, p.r_obj, p.r_sense)?;
    let per_seed = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let seed = root.child(s as u64);
            let env = sample_environment(&params, &w, seed.child(0), 0)?;
            let masks = p_s
                .iter()
                .map(|&q| thinning_mask(env.len(), q, seed.child(1)))
                .collect::<Result<Vec<_>>>()?;
            let mut rng = seed.child(2).rng();
            let mut out = vec![Vec::with_capacity(points_per_seed); p_s.len()];
            let mut n = 0;
            while n < points_per_seed {
                let x = Point2::new(
                    rng.random_range(-half_box..half_box),
                    rng.random_range(-half_box..half_box),
                );
                if env.is_occupied(x) {
                    continue;
                }
                let probe = LocationProbe::new(&env, x);
                let seen: Vec<usize> = env
                    .objects_near(x, r_sense)
                    .into_iter()
                    .filter(|&k| masks.iter().any(|m| m[k]) && probe.seen_by(k))
                    .collect();
                for (c, mask) in out.iter_mut().zip(&masks) {
                    c.push(seen.iter().filter(|&&k| mask[k]).count() as f64);
                }
                n += 1;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![Vec::with_capacity(seeds * points_per_seed); p_s.len()];
    for run in per_seed {
        for (c, r) in counts.iter_mut().zip(run) {
            c.extend(r);
        }
    }
    Ok(VoidRedundancyRun {
        p_s: p_s.to_vec(),
        points_per_seed,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPoint {
    pub p_s: f64,
    pub gamma: u32,
    pub summary: Summary,
}

/// Normalized γ-coverage of the typical sensor's region of interest with
/// every sensor collaborating, for each `(p_s, gamma)` pair in
/// penetration-major order. `p.p_s` is ignored.
pub fn simulate_gamma_coverage(
    p: &DiscModelParams,
    p_s: &[f64],
    gammas: &[u32],
    roi: &RoiSpec,
    seeds: usize,
    resolution: f64,
    root: Seed,
) -> Result<Vec<GammaPoint>> {
    p.validate()?;
    check_runs(seeds, resolution)?;
    if p_s.is_empty() || p_s.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(invalid("penetrations must be a nonempty list in [0, 1]"));
    }
    if gammas.is_empty() || gammas.contains(&0) {
        return Err(invalid("gammas must be a nonempty list of values >= 1"));
    }
    let region = region(roi)?;
    let w = window_around(&region, p)?;
    let reach = p.r_sense + roi.r_interest();
    let per_seed = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let seed = root.child(s as u64);
            let env = typical_env(p, true, &w, seed.child(0))?;
            // index 0 is the typical sensor and always collaborates
            let masks = p_s
                .iter()
                .map(|&q| {
                    let mut m = thinning_mask(env.len(), q, seed.child(1))?;
                    m[0] = true;
                    Ok(m)
                })
                .collect::<Result<Vec<_>>>()?;
            let grid = CoverageGrid::new(&env, &region, resolution)?;
            let mut counts = vec![vec![0u32; grid.counts.len()]; p_s.len()];
            for k in env.objects_near(Point2::ORIGIN, reach) {
                if !masks.iter().any(|m| m[k]) {
                    continue;
                }
                let cells = SensorView::at_index(&env, k).covered_cells(&grid);
                for (c, m) in counts.iter_mut().zip(&masks) {
                    if m[k] {
                        cells.iter().for_each(|&i| c[i] += 1);
                    }
                }
            }
            let roi_cells = grid.roi_cell_count().max(1) as f64;
            let mut out = Vec::with_capacity(p_s.len() * gammas.len());
            for c in &counts {
                for &g in gammas {
                    let hit = c.iter().zip(&grid.in_roi).filter(|(n, r)| **r && **n >= g).count();
                    out.push(hit as f64 / roi_cells);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(p_s.len() * gammas.len());
    for (i, &q) in p_s.iter().enumerate() {
        for (j, &g) in gammas.iter().enumerate() {
            let xs: Vec<f64> = per_seed.iter().map(|v| v[i * gammas.len() + j]).collect();
            out.push(GammaPoint {
                p_s: q,
                gamma: g,
                summary: Summary::of(&xs),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::expected_coverage_area;
    use std::f64::consts::PI;

    #[test]
    fn empty_world_covers_the_support() {
        let p = DiscModelParams::new(0.0, 1.0, 1.67, 30.0).unwrap();
        let s = simulate_coverage_area(&p, 3, 1, 0.5, Seed::new(1, 0)).unwrap();
        assert_eq!(s.std_error, 0.0);
        assert!((s.mean / (PI * 900.0) - 1.0).abs() < 0.01);
        let frac = simulate_roi_coverage(&p, &RoiSpec::Disc { r_interest: 30.0 }, 2, 0.5, Seed::new(1, 0)).unwrap();
        assert_eq!(frac.mean, 1.0);
    }

    #[test]
    fn small_coverage_run_is_near_closed_form() {
        let p = DiscModelParams::new(0.02, 1.0, 1.67, 40.0).unwrap();
        let exact = expected_coverage_area(&p).unwrap().total;
        for per_seed in [1, 8] {
            let s = simulate_coverage_area(&p, 60, per_seed, 0.5, Seed::new(9, 0)).unwrap();
            assert!(
                (s.mean - exact).abs() < 4.0 * s.std_error + 0.01 * exact,
                "{s:?} vs {exact}"
            );
        }
    }

    #[test]
    fn penetration_sweeps_are_nested() {
        let p = DiscModelParams::new(0.01, 1.0, 1.67, 40.0).unwrap();
        let roi = RoiSpec::DiscStrip {
            r_interest: 40.0,
            strip_half_width: 12.0,
        };
        let pts = simulate_gamma_coverage(&p, &[0.2, 0.5, 0.9], &[1, 2], &roi, 4, 1.0, Seed::new(2, 0)).unwrap();
        assert_eq!(pts.len(), 6);
        // per (p, gamma): more sensors and lower thresholds never lose coverage
        assert!(pts[0].summary.mean >= pts[1].summary.mean);
        assert!(pts[2].summary.mean >= pts[0].summary.mean);
        assert!(pts[4].summary.mean >= pts[2].summary.mean);
        assert!(pts.iter().all(|q| (0.0..=1.0).contains(&q.summary.mean)));

        let run = simulate_void_redundancy(0.01, &[0.5, 1.0], 1.67, 40.0, 3, 20, Seed::new(4, 0)).unwrap();
        assert_eq!(run.counts[0].len(), 60);
        assert!(run.counts[0].iter().zip(&run.counts[1]).all(|(a, b)| a <= b));
        assert_eq!(run.linearity_residual(1).mean, 0.0);
        let s = run.summary(0);
        assert_eq!(s.n, 60);
        assert!((s.mean - crate::stats::mean(&run.counts[0])).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = DiscModelParams::new(0.01, 1.0, 1.67, 40.0).unwrap();
        let roi = RoiSpec::Disc { r_interest: 40.0 };
        assert!(simulate_coverage_area(&p, 0, 1, 0.5, Seed::new(0, 0)).is_err());
        assert!(simulate_coverage_area(&p, 1, 1, 0.0, Seed::new(0, 0)).is_err());
        assert!(simulate_gamma_coverage(&p, &[0.5], &[0], &roi, 1, 1.0, Seed::new(0, 0)).is_err());
        assert!(simulate_gamma_coverage(&p, &[1.5], &[1], &roi, 1, 1.0, Seed::new(0, 0)).is_err());
        assert!(simulate_void_redundancy(0.01, &[], 1.67, 40.0, 1, 1, Seed::new(0, 0)).is_err());
    }
}
