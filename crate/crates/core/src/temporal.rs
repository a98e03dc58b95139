//! Moving traffic, road-side sensors and (γ,τ)-object coverage.
//!
//! Vehicles from a freeway realization drive at constant speed, `+speed`
//! in the nearby direction and `-speed` in the opposite one. Road-side
//! units sit beside the nearby lanes. At every frame each sensor records
//! which objects it senses; an object counts toward a collaborator's
//! redundancy while its last sighting is at most `τ` old.
//!
//! Reference vehicles are the sensing vehicles far enough from both road
//! ends that their region of interest, and everything that can see into
//! it, stays on the simulated stretch for the whole run.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::freeway::{generate_freeway, Direction, FreewayConfig, FreewayRealization};
use crate::geometry::{ConvexShape, PlacedShape, Point2, RadialSupport};
use crate::pointprocess::{displace, Seed, Window};
use crate::sensing::{EnvironmentSnapshot, MarkedObject, SensorMark, SensorView};
use crate::stats::Summary;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsuConfig {
    pub spacing: f64,
    /// Distance from the road edge.
    pub setback: f64,
    /// Elevated units see over vehicles; low ones are blocked like any
    /// ground sensor.
    pub elevated: bool,
    pub sensing_radius: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        RsuConfig {
            spacing: 400.0,
            setback: 2.0,
            elevated: false,
            sensing_radius: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Vehicles in the reference's own direction.
    Base,
    /// Base plus road-side units.
    Rsu,
    /// Base plus vehicles in the other direction.
    Opposite,
    RsuAndOpposite,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Base, Scheme::Rsu, Scheme::Opposite, Scheme::RsuAndOpposite];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Base => "base",
            Scheme::Rsu => "rsu",
            Scheme::Opposite => "opposite",
            Scheme::RsuAndOpposite => "rsu_and_opposite",
        }
    }

    fn admits(&self, class: Collaborator) -> bool {
        match class {
            Collaborator::Same => true,
            Collaborator::Other => matches!(self, Scheme::Opposite | Scheme::RsuAndOpposite),
            Collaborator::Rsu => matches!(self, Scheme::Rsu | Scheme::RsuAndOpposite),
        }
    }
}

/// Relation of a collaborator to a reference vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collaborator {
    Same,
    Other,
    Rsu,
}

/// Parameters of a dynamic run.
///
/// Layout, density and penetration come from `base`; its sensing radius,
/// region of interest and guard are replaced by the fields below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicConfig {
    pub base: FreewayConfig,
    pub speed: f64,
    pub rsu: Option<RsuConfig>,
    pub r_vehicle: f64,
    pub r_communication: f64,
    pub r_interest: f64,
    pub tau: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub duration: f64,
    pub boundary_samples: usize,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        DynamicConfig {
            base: FreewayConfig {
                road_length: 1600.0,
                ..FreewayConfig::default()
            },
            speed: 20.0,
            rsu: Some(RsuConfig::default()),
            r_vehicle: 200.0,
            r_communication: 500.0,
            r_interest: 200.0,
            tau: 0.0,
            scheme: Scheme::Base,
            dt: 0.1,
            duration: 3.0,
            boundary_samples: 16,
        }
    }
}

impl DynamicConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.dt) {
            return Err(invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !(self.duration.is_finite() && self.duration >= self.tau) {
            return Err(invalid(format!(
                "duration {} must cover the tracking window {}",
                self.duration, self.tau
            )));
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(invalid("speed must be >= 0"));
        }
        if ![self.r_vehicle, self.r_communication, self.r_interest]
            .into_iter()
            .all(pos)
        {
            return Err(invalid("sensing, communication and interest radii must be > 0"));
        }
        if self.boundary_samples < 4 {
            return Err(invalid("need at least 4 boundary samples"));
        }
        if let Some(r) = &self.rsu {
            if !(pos(r.spacing) && pos(r.sensing_radius) && r.setback.is_finite() && r.setback >= 0.0) {
                return Err(invalid(format!("bad road-side unit configuration {r:?}")));
            }
        }
        self.layout().validate()?;
        if self.base.road_length <= 2.0 * self.margin() {
            return Err(invalid(format!(
                "road length {} leaves no reference vehicles with margin {}",
                self.base.road_length,
                self.margin()
            )));
        }
        Ok(())
    }

    fn max_sensing_radius(&self) -> f64 {
        let rsu = self.rsu.as_ref().map_or(0.0, |r| r.sensing_radius);
        self.r_vehicle.max(rsu)
    }

    /// Distance from each road end inside which vehicles are not used as
    /// references.
    pub fn margin(&self) -> f64 {
        self.r_interest + self.max_sensing_radius() + self.speed * self.duration
    }

    fn layout(&self) -> FreewayConfig {
        FreewayConfig {
            sensing_radius: self.r_vehicle,
            roi_radius: self.r_interest,
            guard_length: Some(0.0),
            ..self.base.clone()
        }
    }

    fn frames(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize
    }
}

/// Road-side units along the nearby edge at `k * spacing` for every `k`
/// with `k * spacing` in `[x_min, x_max]` rounded outward, with ids from
/// `first_id`.
pub fn place_rsus(cfg: &DynamicConfig, x_min: f64, x_max: f64, first_id: u64) -> Result<Vec<MarkedObject>> {
    let Some(r) = &cfg.rsu else {
        return Ok(Vec::new());
    };
    let y = cfg.base.road_half_width() + r.setback;
    let body = ConvexShape::disc(0.0)?;
    let mark = SensorMark::new(Point2::ORIGIN, RadialSupport::omni(r.sensing_radius)?).elevated(r.elevated);
    let k0 = (x_min / r.spacing).floor() as i64;
    let k1 = (x_max / r.spacing).ceil() as i64;
    Ok((k0..=k1)
        .enumerate()
        .map(|(n, k)| {
            let at = Point2::new(k as f64 * r.spacing, y);
            MarkedObject::new(first_id + n as u64, PlacedShape::new(at, body), Some(mark.clone()))
        })
        .collect())
}

/// Last time each sensor sensed each object.
#[derive(Debug, Clone, Default)]
pub struct TrackTable {
    by_object: Vec<Vec<(usize, f64)>>,
}

impl TrackTable {
    pub fn new(objects: usize) -> Self {
        TrackTable {
            by_object: vec![Vec::new(); objects],
        }
    }

    pub fn record(&mut self, sensor: usize, object: usize, t: f64) {
        if object >= self.by_object.len() {
            self.by_object.resize(object + 1, Vec::new());
        }
        let row = &mut self.by_object[object];
        match row.iter_mut().find(|(s, _)| *s == sensor) {
            Some(e) => e.1 = e.1.max(t),
            None => row.push((sensor, t)),
        }
    }

    pub fn last_sensed(&self, sensor: usize, object: usize) -> Option<f64> {
        self.by_object
            .get(object)?
            .iter()
            .find(|(s, _)| *s == sensor)
            .map(|e| e.1)
    }

    /// `(sensor, last sensed time)` pairs for `object`.
    pub fn sightings(&self, object: usize) -> &[(usize, f64)] {
        self.by_object.get(object).map_or(&[], |v| v.as_slice())
    }
}

fn within_window(last: f64, t: f64, tau: f64) -> bool {
    last <= t + 1e-9 && last >= t - tau - 1e-9
}

/// Number of `collaborators` that sensed `object` during `[t - tau, t]`.
pub fn object_redundancy(track: &TrackTable, collaborators: &[usize], object: usize, t: f64, tau: f64) -> usize {
    collaborators
        .iter()
        .filter(|&&j| track.last_sensed(j, object).is_some_and(|l| within_window(l, t, tau)))
        .count()
}

/// Positions of every object at one instant.
#[derive(Debug, Clone)]
pub struct DynamicFrame {
    pub t: f64,
    pub env: EnvironmentSnapshot,
    /// Number of vehicles; objects from this index on are road-side units.
    pub vehicles: usize,
    pub direction: Vec<Direction>,
    pub r_interest: f64,
}

impl DynamicFrame {
    pub fn is_rsu(&self, k: usize) -> bool {
        k >= self.vehicles
    }

    /// Relation of sensor `j` to reference `i`.
    pub fn classify(&self, i: usize, j: usize) -> Collaborator {
        if self.is_rsu(j) {
            Collaborator::Rsu
        } else if self.direction[j] == self.direction[i] {
            Collaborator::Same
        } else {
            Collaborator::Other
        }
    }
}

/// Vehicles other than `i` that overlap the disc of interest around `i`.
///
/// Vehicles lie inside the road strip, so overlap with the disc equals
/// overlap with the disc clipped to the road.
pub fn objects_of_interest(frame: &DynamicFrame, i: usize) -> Vec<usize> {
    let env = &frame.env;
    let c = env.objects()[i]
        .sensor_position()
        .unwrap_or(env.objects()[i].placed.center);
    env.objects_near(c, frame.r_interest)
        .into_iter()
        .filter(|&j| j != i && !frame.is_rsu(j) && env.objects()[j].placed.overlaps_disc(c, frame.r_interest))
        .collect()
}

/// Whether sensor `sensor` sees any of `samples` boundary points of
/// `object` in `frame`.
pub fn object_sensed(frame: &DynamicFrame, sensor: usize, object: usize, samples: usize) -> Result<bool> {
    let view = SensorView::at_index(&frame.env, sensor);
    view.sees_object(&frame.env, object, samples)
}

/// Time-zero vehicles with their velocities.
#[derive(Debug, Clone)]
pub struct DynamicScene {
    pub cfg: DynamicConfig,
    pub vehicles: FreewayRealization,
    pub velocity: Vec<Point2>,
    pub rsus: Vec<MarkedObject>,
}

impl DynamicScene {
    pub fn generate(cfg: &DynamicConfig, seed: Seed) -> Result<Self> {
        cfg.validate()?;
        let vehicles = generate_freeway(&cfg.layout(), seed)?;
        Self::from_realization(cfg, vehicles)
    }

    pub fn from_realization(cfg: &DynamicConfig, vehicles: FreewayRealization) -> Result<Self> {
        cfg.validate()?;
        let velocity = vehicles
            .direction
            .iter()
            .map(|d| match d {
                Direction::Nearby => Point2::new(cfg.speed, 0.0),
                Direction::Opposite => Point2::new(-cfg.speed, 0.0),
            })
            .collect();
        let drift = cfg.speed * cfg.duration;
        let rsus = place_rsus(cfg, -drift, cfg.base.road_length + drift, vehicles.env.len() as u64)?;
        Ok(DynamicScene {
            cfg: cfg.clone(),
            vehicles,
            velocity,
            rsus,
        })
    }

    /// Same vehicles with sensors re-selected for penetration `p_s`.
    pub fn with_penetration(&self, p_s: f64) -> Result<Self> {
        let mut cfg = self.cfg.clone();
        cfg.base.p_s = p_s;
        Self::from_realization(&cfg, self.vehicles.with_penetration(p_s)?)
    }

    pub fn frame(&self, t: f64) -> Result<DynamicFrame> {
        let start: Vec<Point2> = self.vehicles.env.objects().iter().map(|o| o.placed.center).collect();
        let moved = displace(&start, &self.velocity, t)?;
        let mut objects: Vec<MarkedObject> = self
            .vehicles
            .env
            .objects()
            .iter()
            .zip(moved)
            .map(|(o, c)| MarkedObject::new(o.id, PlacedShape::new(c, o.placed.shape), o.sensor.clone()))
            .collect();
        let vehicles = objects.len();
        objects.extend(self.rsus.iter().cloned());
        let drift = self.cfg.speed * self.cfg.duration;
        let half = self.cfg.base.road_half_width();
        let y_top = self.rsus.first().map_or(half, |r| r.placed.center.y.max(half));
        let window = Window::new(-drift, self.cfg.base.road_length + drift, -half, y_top, 0.0)?;
        Ok(DynamicFrame {
            t,
            env: EnvironmentSnapshot::new(objects, window)?,
            vehicles,
            direction: self.vehicles.direction.clone(),
            r_interest: self.cfg.r_interest,
        })
    }
}

/// Records every object each sensor sees in `frame`.
pub fn update_tracks(frame: &DynamicFrame, track: &mut TrackTable, samples: usize) -> Result<()> {
    let env = &frame.env;
    for s in 0..env.len() {
        if !env.objects()[s].is_sensor() {
            continue;
        }
        let view = SensorView::at_index(env, s);
        for o in env.objects_near(view.position(), view.max_range()) {
            if frame.is_rsu(o) {
                continue;
            }
            if view.sees_object(env, o, samples)? {
                track.record(s, o, frame.t);
            }
        }
    }
    Ok(())
}

/// Mean (γ,τ)-object coverage over the references of one direction at one
/// frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameRecord {
    pub t: f64,
    pub scheme: Scheme,
    pub tau: f64,
    pub direction: Direction,
    pub mean: f64,
    pub n_refs: usize,
}

/// Coverage fractions of reference `i` for every `(scheme, tau)` pair, in
/// scheme-major order. `None` when `i` has no objects of interest.
pub fn reference_coverage(
    frame: &DynamicFrame,
    track: &TrackTable,
    i: usize,
    r_communication: f64,
    gamma: usize,
    taus: &[f64],
) -> Option<Vec<f64>> {
    let interest = objects_of_interest(frame, i);
    if interest.is_empty() {
        return None;
    }
    let env = &frame.env;
    let pos = |k: usize| env.objects()[k].placed.center;
    let pi = pos(i);
    let mut covered = vec![0usize; Scheme::ALL.len() * taus.len()];
    for &o in &interest {
        // sightings per (collaborator class, tau)
        let mut counts = vec![[0usize; 3]; taus.len()];
        for &(j, last) in track.sightings(o) {
            if pos(j).distance(pi) > r_communication {
                continue;
            }
            let c = match frame.classify(i, j) {
                Collaborator::Same => 0,
                Collaborator::Other => 1,
                Collaborator::Rsu => 2,
            };
            for (q, &tau) in taus.iter().enumerate() {
                if within_window(last, frame.t, tau) {
                    counts[q][c] += 1;
                }
            }
        }
        for (si, scheme) in Scheme::ALL.iter().enumerate() {
            for (q, cnt) in counts.iter().enumerate() {
                let n = cnt[0]
                    + if scheme.admits(Collaborator::Other) { cnt[1] } else { 0 }
                    + if scheme.admits(Collaborator::Rsu) { cnt[2] } else { 0 };
                if n >= gamma {
                    covered[si * taus.len() + q] += 1;
                }
            }
        }
    }
    Some(covered.into_iter().map(|c| c as f64 / interest.len() as f64).collect())
}

/// Sensing vehicles eligible as references at `frame`.
pub fn reference_vehicles(scene: &DynamicScene, frame: &DynamicFrame) -> Vec<usize> {
    let m = scene.cfg.margin();
    let hi = scene.cfg.base.road_length - m;
    (0..frame.vehicles)
        .filter(|&k| {
            let o = &frame.env.objects()[k];
            o.is_sensor() && o.placed.center.x >= m && o.placed.center.x <= hi
        })
        .collect()
}

/// Runs the scene from `t = 0` to `duration` and reports every frame at or
/// after the largest `tau`, for all schemes and every tau.
pub fn simulate_scene(scene: &DynamicScene, gamma: usize, taus: &[f64]) -> Result<Vec<FrameRecord>> {
    if gamma < 1 {
        return Err(invalid("gamma must be >= 1"));
    }
    if taus.is_empty() || taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("need a nonempty list of tau >= 0"));
    }
    let cfg = &scene.cfg;
    let warmup = taus.iter().cloned().fold(0.0, f64::max);
    if warmup > cfg.duration + 1e-9 {
        return Err(invalid(format!("duration {} shorter than tau {warmup}", cfg.duration)));
    }
    let mut track = TrackTable::new(scene.vehicles.env.len());
    let mut out = Vec::new();
    for step in 0..=cfg.frames() {
        let t = step as f64 * cfg.dt;
        let frame = scene.frame(t)?;
        update_tracks(&frame, &mut track, cfg.boundary_samples)?;
        if t + 1e-9 < warmup {
            continue;
        }
        let refs = reference_vehicles(scene, &frame);
        for dir in [Direction::Nearby, Direction::Opposite] {
            let mut sums = vec![0.0; Scheme::ALL.len() * taus.len()];
            let mut n = 0;
            for &i in refs.iter().filter(|&&i| frame.direction[i] == dir) {
                if let Some(c) = reference_coverage(&frame, &track, i, cfg.r_communication, gamma, taus) {
                    sums.iter_mut().zip(c).for_each(|(s, v)| *s += v);
                    n += 1;
                }
            }
            if n == 0 {
                continue;
            }
            for (si, scheme) in Scheme::ALL.iter().enumerate() {
                for (q, &tau) in taus.iter().enumerate() {
                    out.push(FrameRecord {
                        t,
                        scheme: *scheme,
                        tau,
                        direction: dir,
                        mean: sums[si * taus.len() + q] / n as f64,
                        n_refs: n,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Time series for the configured scheme and tau.
pub fn simulate(cfg: &DynamicConfig, gamma: usize, seed: Seed) -> Result<Vec<FrameRecord>> {
    let scene = DynamicScene::generate(cfg, seed)?;
    Ok(simulate_scene(&scene, gamma, &[cfg.tau])?
        .into_iter()
        .filter(|r| r.scheme == cfg.scheme)
        .collect())
}

/// `(scheme, tau, direction, mean)`.
pub type SchemeAverage = (Scheme, f64, Direction, f64);

/// Time-averaged coverage of each `(scheme, tau, direction)` over one run.
pub fn time_average(records: &[FrameRecord]) -> Vec<SchemeAverage> {
    let mut keys: Vec<(Scheme, f64, Direction)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.scheme, r.tau, r.direction)) {
            keys.push((r.scheme, r.tau, r.direction));
        }
    }
    keys.into_iter()
        .map(|(s, tau, d)| {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == s && r.tau == tau && r.direction == d)
                .map(|r| r.mean)
                .collect();
            (s, tau, d, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalRecord {
    pub p_s: f64,
    pub scheme: Scheme,
    pub tau: f64,
    pub direction: Direction,
    pub mean: f64,
    pub std_error: f64,
    pub n_seeds: usize,
}

/// Seed-averaged, time-averaged coverage over a penetration sweep. Seed
/// `s` uses the same vehicles at every penetration.
pub fn run_temporal_experiment(
    cfg: &DynamicConfig,
    p_s: &[f64],
    taus: &[f64],
    gamma: usize,
    seeds: usize,
    root: Seed,
) -> Result<Vec<TemporalRecord>> {
    if seeds == 0 || p_s.is_empty() {
        return Err(invalid("need at least one seed and one penetration"));
    }
    cfg.validate()?;
    for &p in p_s {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("p_s must be in [0, 1], got {p}")));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..p_s.len()).flat_map(|p| (0..seeds).map(move |s| (p, s))).collect();
    let runs: Vec<Result<Vec<SchemeAverage>>> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let scene = DynamicScene::generate(cfg, root.child(s as u64))?.with_penetration(p_s[p])?;
            Ok(time_average(&simulate_scene(&scene, gamma, taus)?))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (p, &ps) in p_s.iter().enumerate() {
        for scheme in Scheme::ALL {
            for &tau in taus {
                for dir in [Direction::Nearby, Direction::Opposite] {
                    let xs: Vec<f64> = runs[p * seeds..(p + 1) * seeds]
                        .iter()
                        .flat_map(|r| {
                            r.iter()
                                .filter(|e| e.0 == scheme && e.1 == tau && e.2 == dir)
                                .map(|e| e.3)
                        })
                        .collect();
                    if xs.is_empty() {
                        continue;
                    }
                    let s = Summary::of(&xs);
                    out.push(TemporalRecord {
                        p_s: ps,
                        scheme,
                        tau,
                        direction: dir,
                        mean: s.mean,
                        std_error: s.std_error,
                        n_seeds: s.n,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DynamicConfig {
        DynamicConfig {
            base: FreewayConfig {
                road_length: 1300.0,
                p_s: 0.3,
                ..FreewayConfig::default()
            },
            duration: 1.0,
            dt: 0.25,
            ..DynamicConfig::default()
        }
    }

    fn frame_of(objects: Vec<MarkedObject>, vehicles: usize, direction: Vec<Direction>) -> DynamicFrame {
        let window = Window::new(-500.0, 500.0, -50.0, 50.0, 0.0).unwrap();
        DynamicFrame {
            t: 0.0,
            env: EnvironmentSnapshot::new(objects, window).unwrap(),
            vehicles,
            direction,
            r_interest: 200.0,
        }
    }

    fn car(id: u64, x: f64, y: f64, sensor: bool) -> MarkedObject {
        let mark = SensorMark::new(Point2::ORIGIN, RadialSupport::omni(200.0).unwrap());
        MarkedObject::new(
            id,
            PlacedShape::new(Point2::new(x, y), ConvexShape::rect(4.8, 1.8, 0.0).unwrap()),
            sensor.then_some(mark),
        )
    }

    #[test]
    fn rsu_placement_arithmetic() {
        let cfg = DynamicConfig::default();
        let rsus = place_rsus(&cfg, 0.0, 1600.0, 100).unwrap();
        assert_eq!(rsus.len(), 5);
        for (k, r) in rsus.iter().enumerate() {
            assert_eq!(r.id, 100 + k as u64);
            assert_eq!(r.placed.center, Point2::new(400.0 * k as f64, 14.0));
        }
        // supports of neighbors meet exactly at the midpoint of the road line
        assert_eq!(rsus[0].placed.center.x + 200.0, rsus[1].placed.center.x - 200.0);
        let none = DynamicConfig {
            rsu: None,
            ..DynamicConfig::default()
        };
        assert!(place_rsus(&none, 0.0, 1600.0, 0).unwrap().is_empty());
    }

    #[test]
    fn interest_excludes_self_and_distant_objects() {
        let frame = frame_of(vec![car(0, 0.0, 2.0, true)], 1, vec![Direction::Nearby]);
        assert!(objects_of_interest(&frame, 0).is_empty());
        // nearest point of the far car sits at 200 + 1 m
        let half_diag = 0.5 * (4.8f64.powi(2) + 1.8f64.powi(2)).sqrt();
        let far = 200.0 + half_diag + 1.0;
        let straddle = 200.0 + 1.0; // rear edge at 198.6 m
        let frame = frame_of(
            vec![
                car(0, 0.0, 2.0, true),
                car(1, far, 2.0, false),
                car(2, straddle, 2.0, false),
            ],
            3,
            vec![Direction::Nearby; 3],
        );
        assert_eq!(objects_of_interest(&frame, 0), vec![2]);
    }

    #[test]
    fn straddling_object_matches_closest_point_oracle() {
        // closest point of an axis-aligned rectangle to the origin
        let oracle = |cx: f64, cy: f64| {
            let dx = (cx.abs() - 2.4).max(0.0);
            let dy = (cy.abs() - 0.9).max(0.0);
            (dx * dx + dy * dy).sqrt()
        };
        for (x, y) in [
            (201.0, 6.0),
            (198.0, -10.0),
            (202.5, 2.0),
            (150.0, 130.5),
            (141.0, 141.0),
        ] {
            let frame = frame_of(
                vec![car(0, 0.0, 0.0, true), car(1, x, y, false)],
                2,
                vec![Direction::Nearby; 2],
            );
            let inside = objects_of_interest(&frame, 0) == vec![1];
            assert_eq!(inside, oracle(x, y) <= 200.0, "({x}, {y})");
        }
    }

    #[test]
    fn sensing_of_adjacent_shadowed_and_own_objects() {
        // sensor at the origin, target 20 m ahead, a wide wall in between
        let wall = MarkedObject::new(
            2,
            PlacedShape::new(Point2::new(10.0, 0.0), ConvexShape::rect(1.0, 30.0, 0.0).unwrap()),
            None,
        );
        let frame = frame_of(
            vec![car(0, 0.0, 0.0, true), car(1, 20.0, 0.0, false), wall],
            3,
            vec![Direction::Nearby; 3],
        );
        // shadow cone of the wall at x = 9.5 with half height 15 covers
        // |y| <= 15 * x / 9.5 at the target; the target spans |y| <= 0.9
        assert!(!object_sensed(&frame, 0, 1, 16).unwrap());
        assert!(object_sensed(&frame, 0, 0, 16).unwrap());
        assert!(object_sensed(&frame, 0, 2, 16).unwrap());

        let open = frame_of(
            vec![car(0, 0.0, 0.0, true), car(1, 8.0, 0.0, false)],
            2,
            vec![Direction::Nearby; 2],
        );
        assert!(object_sensed(&open, 0, 1, 16).unwrap());
    }

    #[test]
    fn track_table_windows() {
        let mut t = TrackTable::new(2);
        t.record(5, 0, 0.0);
        t.record(6, 0, 1.0);
        t.record(5, 0, 0.5);
        t.record(7, 1, 1.0);
        assert_eq!(t.last_sensed(5, 0), Some(0.5));
        assert_eq!(t.last_sensed(7, 0), None);
        assert_eq!(object_redundancy(&t, &[5, 6, 7], 0, 1.0, 0.0), 1);
        assert_eq!(object_redundancy(&t, &[5, 6, 7], 0, 1.0, 0.5), 2);
        assert_eq!(object_redundancy(&t, &[5, 6, 7], 0, 1.0, f64::INFINITY), 2);
        assert_eq!(object_redundancy(&t, &[6], 0, 1.0, f64::INFINITY), 1);
        assert_eq!(object_redundancy(&t, &[], 0, 1.0, f64::INFINITY), 0);
    }

    #[test]
    fn static_base_tau_zero_equals_snapshot_count() {
        let cfg = DynamicConfig {
            speed: 0.0,
            rsu: None,
            ..small()
        };
        let scene = DynamicScene::generate(&cfg, Seed::new(3, 0)).unwrap();
        let recs = simulate_scene(&scene, 1, &[0.0]).unwrap();
        let frame = scene.frame(0.0).unwrap();
        let refs = reference_vehicles(&scene, &frame);
        for dir in [Direction::Nearby, Direction::Opposite] {
            let mut sum = 0.0;
            let mut n = 0;
            for &i in refs.iter().filter(|&&i| frame.direction[i] == dir) {
                let interest = objects_of_interest(&frame, i);
                if interest.is_empty() {
                    continue;
                }
                let pi = frame.env.objects()[i].placed.center;
                let collab: Vec<usize> = (0..frame.vehicles)
                    .filter(|&j| {
                        let o = &frame.env.objects()[j];
                        o.is_sensor()
                            && frame.direction[j] == dir
                            && o.placed.center.distance(pi) <= cfg.r_communication
                    })
                    .collect();
                let seen = interest
                    .iter()
                    .filter(|&&o| collab.iter().any(|&j| object_sensed(&frame, j, o, 16).unwrap()))
                    .count();
                sum += seen as f64 / interest.len() as f64;
                n += 1;
            }
            for r in recs.iter().filter(|r| r.scheme == Scheme::Base && r.direction == dir) {
                assert_eq!(r.n_refs, n);
                assert!((r.mean - sum / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coverage_monotone_in_tau_and_scheme() {
        let scene = DynamicScene::generate(&small(), Seed::new(11, 0)).unwrap();
        let taus = [0.0, 0.25, 0.5, 1.0];
        let recs = simulate_scene(&scene, 1, &taus).unwrap();
        assert!(!recs.is_empty());
        let get = |t: f64, s: Scheme, tau: f64, d: Direction| {
            recs.iter()
                .find(|r| r.t == t && r.scheme == s && r.tau == tau && r.direction == d)
                .unwrap()
                .mean
        };
        for r in recs.iter().filter(|r| r.scheme == Scheme::Base && r.tau == 0.0) {
            for d in [r.direction] {
                for s in Scheme::ALL {
                    for w in taus.windows(2) {
                        assert!(get(r.t, s, w[1], d) >= get(r.t, s, w[0], d));
                    }
                }
                for &tau in &taus {
                    let base = get(r.t, Scheme::Base, tau, d);
                    let rsu = get(r.t, Scheme::Rsu, tau, d);
                    let opp = get(r.t, Scheme::Opposite, tau, d);
                    let all = get(r.t, Scheme::RsuAndOpposite, tau, d);
                    assert!(rsu >= base && opp >= base && all >= rsu.max(opp));
                }
            }
        }
    }

    #[test]
    fn elevated_rsus_cover_everything() {
        let cfg = DynamicConfig {
            rsu: Some(RsuConfig {
                elevated: true,
                ..RsuConfig::default()
            }),
            ..small()
        };
        let scene = DynamicScene::generate(&cfg, Seed::new(5, 0)).unwrap();
        let recs = simulate_scene(&scene, 1, &[0.0, 0.5]).unwrap();
        assert!(!recs.is_empty());
        for r in recs
            .iter()
            .filter(|r| matches!(r.scheme, Scheme::Rsu | Scheme::RsuAndOpposite))
        {
            assert_eq!(r.mean, 1.0);
        }
    }

    #[test]
    fn simulate_is_deterministic_and_filters_scheme() {
        let cfg = DynamicConfig {
            scheme: Scheme::Opposite,
            tau: 0.5,
            ..small()
        };
        let a = simulate(&cfg, 1, Seed::new(2, 0)).unwrap();
        let b = simulate(&cfg, 1, Seed::new(2, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|r| r.scheme == Scheme::Opposite && r.tau == 0.5 && r.t >= 0.5));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            DynamicConfig { dt: 0.0, ..small() },
            DynamicConfig { tau: -1.0, ..small() },
            DynamicConfig { tau: 5.0, ..small() },
            DynamicConfig {
                base: FreewayConfig {
                    road_length: 500.0,
                    ..FreewayConfig::default()
                },
                ..small()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(DynamicConfig::default().validate().is_ok());
    }
}
