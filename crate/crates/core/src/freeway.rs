//! Straight multi-lane freeway with rectangular vehicles.
//!
//! Lanes run along `x ∈ [0, road_length]`. The road occupies
//! `|y| <= lanes_per_direction * lane_width`; lanes with `y > 0` carry the
//! nearby direction (toward `+x`) and lanes with `y < 0` the opposite one.
//! Lane 0 and lane `lanes_per_direction` are the two central lanes.
//!
//! `target_density` is a density per square meter of road, so each lane
//! receives `target_density * lane_width` vehicles per meter.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConvexShape, PlacedShape, Point2, RadialSupport};
use crate::pointprocess::{sample_matern_lane, thinning_mask, Seed, Window};
use crate::sensing::{
    CoverageGrid, EnvironmentSnapshot, LocationProbe, MarkedObject, RegionOfInterest, SensorMark, SensorView,
};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreewayConfig {
    pub lanes_per_direction: usize,
    pub lane_width: f64,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    pub min_gap: f64,
    pub lateral_offset_halfwidth: f64,
    pub road_length: f64,
    pub target_density: f64,
    pub p_s: f64,
    pub sensing_radius: f64,
    pub roi_radius: f64,
    pub roi_strip_halfwidth: f64,
    /// Road length trimmed at each end before reference vehicles are
    /// eligible; defaults to the sensing radius.
    pub guard_length: Option<f64>,
}

impl Default for FreewayConfig {
    fn default() -> Self {
        FreewayConfig {
            lanes_per_direction: 3,
            lane_width: 4.0,
            vehicle_length: 4.8,
            vehicle_width: 1.8,
            min_gap: 10.0,
            lateral_offset_halfwidth: 1.0,
            road_length: 1000.0,
            target_density: 0.0175,
            p_s: 0.2,
            sensing_radius: 100.0,
            roi_radius: 100.0,
            roi_strip_halfwidth: 12.0,
            guard_length: None,
        }
    }
}

impl FreewayConfig {
    pub fn lane_density(&self) -> f64 {
        self.target_density * self.lane_width
    }

    pub fn road_half_width(&self) -> f64 {
        self.lanes_per_direction as f64 * self.lane_width
    }

    pub fn guard(&self) -> f64 {
        self.guard_length.unwrap_or(self.sensing_radius)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.lanes_per_direction < 1 {
            return Err(invalid("need at least one lane per direction"));
        }
        if ![
            self.lane_width,
            self.vehicle_length,
            self.vehicle_width,
            self.road_length,
            self.roi_radius,
            self.roi_strip_halfwidth,
        ]
        .into_iter()
        .all(pos)
        {
            return Err(invalid("lane width, vehicle size, road length and roi must be > 0"));
        }
        if !(self.sensing_radius >= 0.0 && self.min_gap >= 0.0 && self.lateral_offset_halfwidth >= 0.0) {
            return Err(invalid("sensing radius, min gap and lateral offset must be >= 0"));
        }
        if self.lateral_offset_halfwidth + self.vehicle_width / 2.0 >= self.lane_width / 2.0 {
            return Err(invalid(format!(
                "lateral offset {} plus half vehicle width {} must stay inside half a lane ({})",
                self.lateral_offset_halfwidth,
                self.vehicle_width / 2.0,
                self.lane_width / 2.0
            )));
        }
        if self.min_gap < self.vehicle_length {
            return Err(invalid("min gap must be at least the vehicle length"));
        }
        if !(0.0..=1.0).contains(&self.p_s) {
            return Err(invalid(format!("p_s must be in [0, 1], got {}", self.p_s)));
        }
        if !(self.target_density.is_finite() && self.target_density >= 0.0) {
            return Err(invalid("target density must be >= 0"));
        }
        if self.lane_density() * self.min_gap >= 1.0 {
            return Err(Error::Infeasible(format!(
                "density {}/m² gives {}/m per lane, above the hard-core bound 1/min_gap = {}/m",
                self.target_density,
                self.lane_density(),
                1.0 / self.min_gap
            )));
        }
        if self.guard() < 0.0 {
            return Err(invalid("guard length must be >= 0"));
        }
        Ok(())
    }

    /// Center line of lane `lane`.
    pub fn lane_center_y(&self, lane: usize) -> f64 {
        let n = self.lanes_per_direction;
        let j = (lane % n) as f64;
        let y = (j + 0.5) * self.lane_width;
        if lane < n {
            y
        } else {
            -y
        }
    }

    pub fn direction_of_lane(&self, lane: usize) -> Direction {
        if lane < self.lanes_per_direction {
            Direction::Nearby
        } else {
            Direction::Opposite
        }
    }

    pub fn is_central_lane(&self, lane: usize) -> bool {
        lane.is_multiple_of(self.lanes_per_direction)
    }

    fn support(&self) -> Result<RadialSupport> {
        RadialSupport::omni(self.sensing_radius)
    }

    /// Region of interest of a vehicle at `center`: the disc of radius
    /// `roi_radius` clipped to the road strip.
    pub fn roi(&self, center: Point2) -> Result<RegionOfInterest> {
        RegionOfInterest::disc_strip(center, self.roi_radius, 0.0, self.roi_strip_halfwidth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Lanes with `y > 0`, travelling toward `+x`.
    Nearby,
    /// Lanes with `y < 0`, travelling toward `-x`.
    Opposite,
}

#[derive(Debug, Clone)]
pub struct FreewayRealization {
    pub cfg: FreewayConfig,
    pub env: EnvironmentSnapshot,
    pub lane: Vec<usize>,
    pub direction: Vec<Direction>,
    /// Per-vehicle uniform deciding sensing: sensor iff `u < p_s`.
    pub sensing_uniform: Vec<f64>,
}

fn sensing_uniforms(n: usize, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Samples vehicles lane by lane, with uniform lateral offsets, and marks
/// sensors by independent thinning.
pub fn generate_freeway(cfg: &FreewayConfig, seed: Seed) -> Result<FreewayRealization> {
    cfg.validate()?;
    let lanes = 2 * cfg.lanes_per_direction;
    let shape = ConvexShape::rect(cfg.vehicle_length, cfg.vehicle_width, 0.0)?;
    let mut placed = Vec::new();
    let mut lane_of = Vec::new();
    for lane in 0..lanes {
        let xs = sample_matern_lane(
            cfg.road_length,
            cfg.min_gap,
            cfg.lane_density(),
            seed.child(lane as u64),
        )?;
        let mut rng = seed.child(1000 + lane as u64).rng();
        let y0 = cfg.lane_center_y(lane);
        for x in xs {
            let off = if cfg.lateral_offset_halfwidth > 0.0 {
                rng.random_range(-cfg.lateral_offset_halfwidth..=cfg.lateral_offset_halfwidth)
            } else {
                0.0
            };
            placed.push(PlacedShape::new(Point2::new(x, y0 + off), shape));
            lane_of.push(lane);
        }
    }
    let uniforms = sensing_uniforms(placed.len(), seed.child(2000));
    build(cfg, placed, lane_of, uniforms)
}

fn build(
    cfg: &FreewayConfig,
    placed: Vec<PlacedShape>,
    lane: Vec<usize>,
    uniforms: Vec<f64>,
) -> Result<FreewayRealization> {
    let support = cfg.support()?;
    let objects = placed
        .into_iter()
        .zip(&uniforms)
        .enumerate()
        .map(|(i, (p, &u))| {
            let sensor = (u < cfg.p_s).then(|| SensorMark::new(Point2::ORIGIN, support.clone()));
            MarkedObject::new(i as u64, p, sensor)
        })
        .collect();
    let half = cfg.road_half_width();
    let window = Window::new(0.0, cfg.road_length, -half, half, cfg.guard())?;
    let env = EnvironmentSnapshot::new(objects, window)?;
    let direction = lane.iter().map(|&l| cfg.direction_of_lane(l)).collect();
    Ok(FreewayRealization {
        cfg: cfg.clone(),
        env,
        lane,
        direction,
        sensing_uniform: uniforms,
    })
}

impl FreewayRealization {
    /// Same vehicles, with sensors re-selected for penetration `p_s` using
    /// the stored uniforms.
    pub fn with_penetration(&self, p_s: f64) -> Result<FreewayRealization> {
        let mut cfg = self.cfg.clone();
        cfg.p_s = p_s;
        cfg.validate()?;
        let placed = self.env.objects().iter().map(|o| o.placed).collect();
        build(&cfg, placed, self.lane.clone(), self.sensing_uniform.clone())
    }

    /// Objects in the central lanes whose region of interest lies inside the
    /// guarded part of the road.
    pub fn reference_indices(&self) -> Vec<usize> {
        let lo = self.cfg.guard() + self.cfg.roi_radius;
        let hi = self.cfg.road_length - lo;
        self.env
            .objects()
            .iter()
            .enumerate()
            .filter(|(k, o)| {
                let x = o.placed.center.x;
                self.cfg.is_central_lane(self.lane[*k]) && x >= lo && x <= hi
            })
            .map(|(k, _)| k)
            .collect()
    }

    fn reference_mark(&self) -> Result<SensorMark> {
        Ok(SensorMark::new(Point2::ORIGIN, self.cfg.support()?))
    }

    /// Redundancy counts over the whole guarded road from every sensor.
    pub fn road_grid(&self, resolution: f64) -> Result<CoverageGrid> {
        let g = self.cfg.guard();
        let half = self.cfg.road_half_width().min(self.cfg.roi_strip_halfwidth);
        let mut grid = CoverageGrid::over_box(&self.env, g, self.cfg.road_length - g, -half, half, resolution)?;
        for (k, o) in self.env.objects().iter().enumerate() {
            if o.is_sensor() {
                grid.accumulate(&SensorView::at_index(&self.env, k));
            }
        }
        Ok(grid)
    }
}

/// Statistic collected per realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case", deny_unknown_fields)]
pub enum FreewayMetric {
    /// Reference vehicle's own coverage of its region of interest, as a
    /// fraction of that region.
    CoverageAreaNorm,
    /// Normalized γ-coverage of the reference's region of interest with all
    /// sensors plus the reference collaborating.
    GammaCoverageNorm { gamma: u32 },
    /// Gain in normalized γ-coverage from infrastructure providing
    /// `gamma_rsu` views everywhere.
    RsuGain { gamma: u32, gamma_rsu: u32 },
    /// Mean redundancy of random void locations in the central lanes.
    VoidRedundancy { samples: usize },
}

impl FreewayMetric {
    pub fn name(&self) -> String {
        match self {
            FreewayMetric::CoverageAreaNorm => "coverage_area_norm".into(),
            FreewayMetric::GammaCoverageNorm { gamma } => format!("gamma_coverage_norm_g{gamma}"),
            FreewayMetric::RsuGain { gamma, gamma_rsu } => format!("rsu_gain_g{gamma}_r{gamma_rsu}"),
            FreewayMetric::VoidRedundancy { .. } => "void_redundancy".into(),
        }
    }
}

/// Average of `metric` over the eligible reference vehicles (or sampled
/// void locations) of one realization.
pub fn central_lane_statistic(
    real: &FreewayRealization,
    metric: &FreewayMetric,
    resolution: f64,
    seed: Seed,
) -> Result<f64> {
    let env = &real.env;
    let cfg = &real.cfg;
    match *metric {
        FreewayMetric::VoidRedundancy { samples } => {
            if samples == 0 {
                return Err(invalid("need at least one void sample"));
            }
            let g = cfg.guard();
            if cfg.road_length <= 2.0 * g {
                return Err(Error::EmptyEligibleSet);
            }
            let sensors: Vec<usize> = (0..env.len()).filter(|&k| env.objects()[k].is_sensor()).collect();
            let mut rng = seed.rng();
            let mut total = 0.0;
            let mut n = 0;
            while n < samples {
                let x = Point2::new(
                    rng.random_range(g..cfg.road_length - g),
                    rng.random_range(-cfg.lane_width..cfg.lane_width),
                );
                if env.is_occupied(x) {
                    continue;
                }
                total += LocationProbe::new(env, x).count(&sensors) as f64;
                n += 1;
            }
            Ok(total / samples as f64)
        }
        FreewayMetric::CoverageAreaNorm => {
            let refs = real.reference_indices();
            if refs.is_empty() {
                return Err(Error::EmptyEligibleSet);
            }
            let mark = real.reference_mark()?;
            let mut sum = 0.0;
            for &k in &refs {
                let roi = cfg.roi(env.objects()[k].placed.center)?;
                let mut grid = CoverageGrid::new(env, &roi, resolution)?;
                grid.accumulate(&SensorView::with_mark(env, k, &mark));
                sum += grid.normalized_at_least(1);
            }
            Ok(sum / refs.len() as f64)
        }
        FreewayMetric::GammaCoverageNorm { .. } | FreewayMetric::RsuGain { .. } => {
            let road = real.road_grid(resolution)?;
            gamma_statistic(real, &road, metric)
        }
    }
}

/// Every metric of `metrics` on one realization. The road-wide redundancy
/// grid is built once and shared by the γ-coverage metrics.
pub fn central_lane_statistics(
    real: &FreewayRealization,
    metrics: &[FreewayMetric],
    resolution: f64,
    seed: Seed,
) -> Vec<Result<f64>> {
    let mut road: Option<Result<CoverageGrid>> = None;
    metrics
        .iter()
        .map(|m| match m {
            FreewayMetric::GammaCoverageNorm { .. } | FreewayMetric::RsuGain { .. } => {
                match road.get_or_insert_with(|| real.road_grid(resolution)) {
                    Ok(g) => gamma_statistic(real, g, m),
                    Err(e) => Err(e.clone()),
                }
            }
            _ => central_lane_statistic(real, m, resolution, seed),
        })
        .collect()
}

fn gamma_statistic(real: &FreewayRealization, road: &CoverageGrid, metric: &FreewayMetric) -> Result<f64> {
    let env = &real.env;
    let cfg = &real.cfg;
    let (gamma, gamma_rsu) = match *metric {
        FreewayMetric::GammaCoverageNorm { gamma } => (gamma, None),
        FreewayMetric::RsuGain { gamma, gamma_rsu } => (gamma, Some(gamma_rsu)),
        _ => return Err(invalid("not a γ-coverage metric")),
    };
    if gamma < 1 {
        return Err(invalid("gamma must be >= 1"));
    }
    if gamma_rsu.is_some_and(|r| r >= gamma) {
        return Err(invalid("gamma_rsu must be smaller than gamma"));
    }
    let refs = real.reference_indices();
    if refs.is_empty() {
        return Err(Error::EmptyEligibleSet);
    }
    let mark = real.reference_mark()?;
    let mut sum = 0.0;
    for &k in &refs {
        let obj = &env.objects()[k];
        let roi = cfg.roi(obj.placed.center)?;
        let own = (!obj.is_sensor()).then(|| SensorView::with_mark(env, k, &mark));
        let cells = road.cells_near(obj.placed.center, cfg.roi_radius);
        let mut in_roi = 0usize;
        let at = |g: u32| {
            let mut hit = 0usize;
            for &c in &cells {
                let x = road.center_of(c);
                if !roi.contains(x) {
                    continue;
                }
                let extra = own.as_ref().map_or(0, |v| v.covers(x) as u32);
                if road.counts[c] + extra >= g {
                    hit += 1;
                }
            }
            hit
        };
        let full = at(gamma);
        let value = match gamma_rsu {
            None => full,
            Some(r) => at(gamma - r) - full,
        };
        for &c in &cells {
            if roi.contains(road.center_of(c)) {
                in_roi += 1;
            }
        }
        sum += value as f64 / in_roi.max(1) as f64;
    }
    Ok(sum / refs.len() as f64)
}

/// One sweep coordinate. Unset fields keep the base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub lambda: Option<f64>,
    pub p_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub lambda: f64,
    pub p_s: f64,
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub n_seeds: usize,
    pub error: Option<String>,
}

/// Runs `metric` on every sweep point over `seeds` realizations each.
///
/// Seed `i` of every sweep point uses the same random streams, so
/// neighboring points differ only through the swept parameter. A point
/// whose configuration is invalid gets a record carrying the error instead
/// of aborting the sweep. Records come back in sweep order.
pub fn run_experiment(
    cfg: &FreewayConfig,
    sweep: &[SweepPoint],
    metric: &FreewayMetric,
    seeds: usize,
    root: Seed,
    resolution: f64,
) -> Result<Vec<ExperimentRecord>> {
    run_experiment_multi(cfg, sweep, std::slice::from_ref(metric), seeds, root, resolution)
}

/// [`run_experiment`] for several metrics on the same realizations.
/// Records are sweep-major, then in `metrics` order.
pub fn run_experiment_multi(
    cfg: &FreewayConfig,
    sweep: &[SweepPoint],
    metrics: &[FreewayMetric],
    seeds: usize,
    root: Seed,
    resolution: f64,
) -> Result<Vec<ExperimentRecord>> {
    if sweep.is_empty() || metrics.is_empty() {
        return Err(invalid("sweep grid and metric list must be nonempty"));
    }
    if seeds == 0 {
        return Err(invalid("need at least one seed"));
    }
    let jobs: Vec<(usize, usize)> = (0..sweep.len()).flat_map(|p| (0..seeds).map(move |s| (p, s))).collect();
    let point_cfg = |p: &SweepPoint| {
        let mut c = cfg.clone();
        if let Some(l) = p.lambda {
            c.target_density = l;
        }
        if let Some(ps) = p.p_s {
            c.p_s = ps;
        }
        c
    };
    let results: Vec<Vec<Result<f64>>> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let c = point_cfg(&sweep[p]);
            let seed = root.child(s as u64);
            match generate_freeway(&c, seed.child(0)) {
                Ok(real) => central_lane_statistics(&real, metrics, resolution, seed.child(1)),
                Err(e) => vec![Err(e); metrics.len()],
            }
        })
        .collect();

    let mut out = Vec::with_capacity(sweep.len() * metrics.len());
    for (p, point) in sweep.iter().enumerate() {
        let c = point_cfg(point);
        for (m, metric) in metrics.iter().enumerate() {
            let mut vals = Vec::new();
            let mut error = None;
            for r in &results[p * seeds..(p + 1) * seeds] {
                match &r[m] {
                    Ok(v) => vals.push(*v),
                    Err(Error::EmptyEligibleSet) => {}
                    Err(e) => {
                        error.get_or_insert_with(|| e.to_string());
                    }
                }
            }
            if error.is_none() && vals.is_empty() {
                error = Some(Error::EmptyEligibleSet.to_string());
            }
            let summary = if error.is_some() {
                Summary {
                    mean: f64::NAN,
                    std_error: f64::NAN,
                    n: 0,
                }
            } else {
                Summary::of(&vals)
            };
            out.push(ExperimentRecord {
                lambda: c.target_density,
                p_s: c.p_s,
                metric: metric.name(),
                mean: summary.mean,
                std_error: summary.std_error,
                n_seeds: summary.n,
                error,
            });
        }
    }
    Ok(out)
}

/// Sensor mask helper for callers that want raw thinning on a realization.
pub fn sensor_mask(n: usize, p_s: f64, seed: Seed) -> Result<Vec<bool>> {
    thinning_mask(n, p_s, seed)
}
