//! Random spatial structures: Poisson point processes, independent
//! thinning, hard-core lane processes and displacement under motion.
//!
//! Every sampler takes a [`Seed`]. A seed is a `(root, stream)` pair that
//! selects a ChaCha8 key and stream; [`Seed::child`] derives independent
//! sub-seeds so parallel trials never share generator state.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConvexShape, PlacedShape, Point2, RadialSupport};
use crate::sensing::{EnvironmentSnapshot, MarkedObject, SensorMark};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub const fn new(root: u64, stream: u64) -> Self {
        Seed { root, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent sub-seed keyed by `(root, stream, index)`.
    pub fn child(&self, index: u64) -> Seed {
        Seed {
            root: splitmix64(self.root ^ splitmix64(self.stream ^ 0x5EED_0000_0000_0000)),
            stream: index,
        }
    }
}

/// Rectangular simulation window. Statistics are collected only in the
/// inner region, shrunk by `guard_margin` on every side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub guard_margin: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, guard_margin: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max, guard_margin].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min || guard_margin < 0.0 {
            return Err(invalid(format!(
                "bad window [{x_min}, {x_max}] x [{y_min}, {y_max}] guard {guard_margin}"
            )));
        }
        Ok(Window {
            x_min,
            x_max,
            y_min,
            y_max,
            guard_margin,
        })
    }

    /// Square window `[-half, half]²` with the given guard margin.
    pub fn centered(half: f64, guard_margin: f64) -> Result<Self> {
        Window::new(-half, half, -half, half, guard_margin)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn in_inner(&self, p: Point2) -> bool {
        let g = self.guard_margin;
        p.x >= self.x_min + g && p.x <= self.x_max - g && p.y >= self.y_min + g && p.y <= self.y_max - g
    }
}

/// Homogeneous Poisson process of intensity `lambda` on `w`.
pub fn sample_hppp(lambda: f64, w: &Window, seed: Seed) -> Result<Vec<Point2>> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("intensity must be >= 0, got {lambda}")));
    }
    let mean = lambda * w.area();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = seed.rng();
    let count = Poisson::new(mean)
        .map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    Ok((0..count)
        .map(|_| Point2::new(rng.random_range(w.x_min..w.x_max), rng.random_range(w.y_min..w.y_max)))
        .collect())
}

/// Keep/remove mask for independent thinning with retention probability `p`.
///
/// One uniform is drawn per point in order, so for a fixed seed the kept
/// set grows monotonically with `p`.
pub fn thinning_mask(n: usize, p: f64, seed: Seed) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("thinning probability must be in [0, 1], got {p}")));
    }
    let mut rng = seed.rng();
    Ok((0..n).map(|_| rng.random::<f64>() < p).collect())
}

/// Independent thinning: returns `(kept, removed)`.
pub fn thin(points: &[Point2], p: f64, seed: Seed) -> Result<(Vec<Point2>, Vec<Point2>)> {
    let mask = thinning_mask(points.len(), p, seed)?;
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (pt, keep) in points.iter().zip(mask) {
        if keep {
            kept.push(*pt);
        } else {
            removed.push(*pt);
        }
    }
    Ok((kept, removed))
}

/// Stationary hard-core process on `[0, lane_length]` with linear density
/// `target_density` and center gaps of at least `min_gap`.
///
/// Gaps are `min_gap + Exp`, with the exponential mean chosen so the mean
/// gap is `1 / target_density`; the first point is drawn from the exact
/// forward-recurrence law, so the process has no edge transient. Any
/// density below the packing bound `1 / min_gap` is reachable.
pub fn sample_matern_lane(lane_length: f64, min_gap: f64, target_density: f64, seed: Seed) -> Result<Vec<f64>> {
    if !(lane_length.is_finite() && lane_length >= 0.0) {
        return Err(invalid(format!("lane length must be >= 0, got {lane_length}")));
    }
    if !(min_gap.is_finite() && min_gap >= 0.0) {
        return Err(invalid(format!("minimum gap must be >= 0, got {min_gap}")));
    }
    if !(target_density.is_finite() && target_density >= 0.0) {
        return Err(invalid(format!("density must be >= 0, got {target_density}")));
    }
    if target_density * min_gap >= 1.0 {
        return Err(Error::Infeasible(format!(
            "lane density {target_density}/m must stay below the hard-core bound 1/min_gap = {}/m",
            1.0 / min_gap
        )));
    }
    if target_density == 0.0 || lane_length == 0.0 {
        return Ok(Vec::new());
    }
    let mean_gap = 1.0 / target_density;
    let excess = mean_gap - min_gap;
    let exp = Exp::new(1.0 / excess).map_err(|e| invalid(e.to_string()))?;
    let mut rng = seed.rng();

    let mut x = if rng.random::<f64>() < min_gap / mean_gap {
        rng.random::<f64>() * min_gap + exp.sample(&mut rng)
    } else {
        exp.sample(&mut rng)
    };
    let mut out = Vec::with_capacity((lane_length * target_density * 1.2) as usize + 4);
    while x <= lane_length {
        out.push(x);
        x += min_gap + exp.sample(&mut rng);
    }
    Ok(out)
}

/// Translates each point by `velocity * t`.
pub fn displace(points: &[Point2], velocities: &[Point2], t: f64) -> Result<Vec<Point2>> {
    if points.len() != velocities.len() {
        return Err(invalid(format!(
            "{} points but {} velocities",
            points.len(),
            velocities.len()
        )));
    }
    Ok(points.iter().zip(velocities).map(|(p, v)| *p + *v * t).collect())
}

/// Distribution of object shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeLaw {
    Fixed {
        shape: ConvexShape,
    },
    DiscRadiusUniform {
        min: f64,
        max: f64,
    },
    /// Rectangle with a uniformly random heading.
    RectRandomHeading {
        length: f64,
        width: f64,
    },
}

impl ShapeLaw {
    fn sample<R: Rng>(&self, rng: &mut R) -> Result<ConvexShape> {
        match *self {
            ShapeLaw::Fixed { shape } => Ok(shape),
            ShapeLaw::DiscRadiusUniform { min, max } => {
                let r = if max > min { rng.random_range(min..max) } else { min };
                ConvexShape::disc(r)
            }
            ShapeLaw::RectRandomHeading { length, width } => ConvexShape::rect(
                length,
                width,
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            ),
        }
    }
}

/// Where a sensor sits on its object, relative to the object's center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorOffsetLaw {
    #[default]
    Center,
    /// Uniform over the object's shape.
    UniformInShape,
}

/// Parameters of the marked Poisson environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    pub lambda: f64,
    pub p_s: f64,
    pub object_shape_law: ShapeLaw,
    #[serde(default)]
    pub sensor_offset_law: SensorOffsetLaw,
    pub support: RadialSupport,
}

impl EnvironmentParams {
    /// Disc objects of radius `r_obj`, sensors at centers, omni range `r_sense`.
    pub fn discs(lambda: f64, p_s: f64, r_obj: f64, r_sense: f64) -> Result<Self> {
        let p = EnvironmentParams {
            lambda,
            p_s,
            object_shape_law: ShapeLaw::Fixed {
                shape: ConvexShape::disc(r_obj)?,
            },
            sensor_offset_law: SensorOffsetLaw::Center,
            support: RadialSupport::omni(r_sense)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.p_s) {
            return Err(invalid(format!("p_s must be in [0, 1], got {}", self.p_s)));
        }
        Ok(())
    }

    fn sensor_offset<R: Rng>(&self, shape: &ConvexShape, rng: &mut R) -> Point2 {
        match self.sensor_offset_law {
            SensorOffsetLaw::Center => Point2::ORIGIN,
            SensorOffsetLaw::UniformInShape => {
                let body = PlacedShape::new(Point2::ORIGIN, *shape);
                let r = shape.bounding_radius();
                loop {
                    let p = Point2::new(rng.random_range(-r..=r), rng.random_range(-r..=r));
                    if body.contains(p) {
                        return p;
                    }
                }
            }
        }
    }
}

/// Samples the marked environment on `w`. Object ids start at `first_id`.
pub fn sample_environment(
    params: &EnvironmentParams,
    w: &Window,
    seed: Seed,
    first_id: u64,
) -> Result<EnvironmentSnapshot> {
    params.validate()?;
    let centers = sample_hppp(params.lambda, w, seed.child(0))?;
    let sensors = thinning_mask(centers.len(), params.p_s, seed.child(1))?;
    let mut rng = seed.child(2).rng();
    let mut objects = Vec::with_capacity(centers.len());
    for (i, (c, is_sensor)) in centers.into_iter().zip(sensors).enumerate() {
        let shape = params.object_shape_law.sample(&mut rng)?;
        let sensor = if is_sensor {
            Some(SensorMark::new(
                params.sensor_offset(&shape, &mut rng),
                params.support.clone(),
            ))
        } else {
            None
        };
        objects.push(MarkedObject::new(
            first_id + i as u64,
            PlacedShape::new(c, shape),
            sensor,
        ));
    }
    EnvironmentSnapshot::new(objects, *w)
}

/// Environment as seen by a typical sensor: a sensing object with id 0 at
/// the origin, plus an independent marked environment on `w`.
pub fn sample_typical_sensor_environment(
    params: &EnvironmentParams,
    w: &Window,
    seed: Seed,
) -> Result<EnvironmentSnapshot> {
    let mut rng = seed.child(3).rng();
    let shape = params.object_shape_law.sample(&mut rng)?;
    let offset = params.sensor_offset(&shape, &mut rng);
    let typical = MarkedObject::new(
        0,
        PlacedShape::new(Point2::ORIGIN, shape),
        Some(SensorMark::new(offset, params.support.clone())),
    );
    let rest = sample_environment(params, w, seed, 1)?;
    let mut objects = vec![typical];
    objects.extend(rest.objects().iter().cloned());
    EnvironmentSnapshot::new(objects, *w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        let w = Window::new(0.0, 1000.0, 0.0, 24.0, 0.0).unwrap();
        assert!(sample_hppp(0.0, &w, Seed::new(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn hppp_is_deterministic() {
        let w = Window::new(0.0, 1000.0, 0.0, 24.0, 0.0).unwrap();
        let a = sample_hppp(0.01, &w, Seed::new(9, 3)).unwrap();
        let b = sample_hppp(0.01, &w, Seed::new(9, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_hppp(0.01, &w, Seed::new(9, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn hppp_count_matches_poisson_mean_and_variance() {
        let w = Window::new(0.0, 1000.0, 0.0, 24.0, 0.0).unwrap();
        let base = Seed::new(2024, 0);
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|i| sample_hppp(0.01, &w, base.child(i)).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Poisson(240): sd of the mean is sqrt(240/n); the sample variance has
        // sd about 240*sqrt(2/n).
        assert!((mean - 240.0).abs() < 3.0 * (240.0f64 / n as f64).sqrt(), "mean {mean}");
        assert!((var - 240.0).abs() < 3.0 * 240.0 * (2.0 / n as f64).sqrt(), "var {var}");
    }

    #[test]
    fn hppp_points_are_uniform() {
        let w = Window::new(0.0, 100.0, 0.0, 100.0, 0.0).unwrap();
        let pts = sample_hppp(5.0, &w, Seed::new(5, 5)).unwrap();
        assert!(pts.iter().all(|p| w.contains(*p)));
        assert!(chi_square_10x10(&pts, &w) < CHI2_99_DF99);
    }

    /// 99th percentile of chi-square with 99 degrees of freedom.
    const CHI2_99_DF99: f64 = 134.642;

    fn chi_square_10x10(pts: &[Point2], w: &Window) -> f64 {
        let mut bins = [0usize; 100];
        for p in pts {
            let i = (((p.x - w.x_min) / (w.x_max - w.x_min)) * 10.0).floor().clamp(0.0, 9.0) as usize;
            let j = (((p.y - w.y_min) / (w.y_max - w.y_min)) * 10.0).floor().clamp(0.0, 9.0) as usize;
            bins[i * 10 + j] += 1;
        }
        let e = pts.len() as f64 / 100.0;
        bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum()
    }

    #[test]
    fn thinning_extremes_and_rate() {
        let pts: Vec<Point2> = (0..100_000).map(|i| Point2::new(i as f64, 0.0)).collect();
        let (k, r) = thin(&pts, 1.0, Seed::new(1, 1)).unwrap();
        assert_eq!((k.len(), r.len()), (100_000, 0));
        let (k, r) = thin(&pts, 0.0, Seed::new(1, 1)).unwrap();
        assert_eq!((k.len(), r.len()), (0, 100_000));
        let (k, r) = thin(&pts, 0.2, Seed::new(1, 1)).unwrap();
        assert_eq!(k.len() + r.len(), 100_000);
        let frac = k.len() as f64 / 1e5;
        assert!((frac - 0.2).abs() < 0.004, "{frac}");
        assert!(thin(&pts, 1.2, Seed::new(1, 1)).is_err());
    }

    #[test]
    fn thinned_parts_are_each_uniform() {
        let w = Window::new(0.0, 100.0, 0.0, 100.0, 0.0).unwrap();
        let pts = sample_hppp(10.0, &w, Seed::new(11, 0)).unwrap();
        let (kept, removed) = thin(&pts, 0.3, Seed::new(11, 1)).unwrap();
        assert!(chi_square_10x10(&kept, &w) < CHI2_99_DF99);
        assert!(chi_square_10x10(&removed, &w) < CHI2_99_DF99);
    }

    #[test]
    fn hard_core_lane_gap_and_density() {
        assert!(sample_matern_lane(1e4, 10.0, 0.0, Seed::new(1, 1)).unwrap().is_empty());
        let n_seeds = 100;
        let mut total = 0usize;
        for s in 0..n_seeds {
            let pos = sample_matern_lane(1e4, 10.0, 0.05, Seed::new(77, s)).unwrap();
            assert!(pos.windows(2).all(|w| w[1] - w[0] >= 10.0));
            assert!(pos.iter().all(|x| (0.0..=1e4).contains(x)));
            total += pos.len();
        }
        let mean = total as f64 / n_seeds as f64;
        assert!((mean - 500.0).abs() < 25.0, "mean count {mean}");
    }

    #[test]
    fn hard_core_lane_rejects_infeasible_density() {
        match sample_matern_lane(1e4, 10.0, 0.11, Seed::new(1, 1)) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("1/min_gap = 0.1")),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn displacement() {
        let pts = vec![Point2::new(1.0, 2.0), Point2::new(-3.0, 0.5)];
        assert_eq!(displace(&pts, &[Point2::ORIGIN; 2], 5.0).unwrap(), pts);
        let v = vec![Point2::new(20.0, 0.0); 2];
        assert_eq!(displace(&pts, &v, 0.0).unwrap(), pts);
        let moved = displace(&pts, &v, 1.5).unwrap();
        assert_eq!(moved[0], Point2::new(31.0, 2.0));
        assert!(displace(&pts, &v[..1], 1.0).is_err());
    }

    #[test]
    fn displaced_poisson_points_stay_uniform() {
        // Periodic wrap keeps the window fixed; by the displacement theorem
        // the moved pattern is again homogeneous.
        let w = Window::new(0.0, 100.0, 0.0, 100.0, 0.0).unwrap();
        let pts = sample_hppp(5.0, &w, Seed::new(3, 0)).unwrap();
        let mut rng = Seed::new(3, 1).rng();
        let vel: Vec<Point2> = pts
            .iter()
            .map(|_| Point2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)))
            .collect();
        let moved: Vec<Point2> = displace(&pts, &vel, 2.0)
            .unwrap()
            .into_iter()
            .map(|p| Point2::new(p.x.rem_euclid(100.0), p.y.rem_euclid(100.0)))
            .collect();
        assert!(chi_square_10x10(&moved, &w) < CHI2_99_DF99);
    }

    #[test]
    fn seeds_are_reproducible_and_children_differ() {
        let s = Seed::new(42, 7);
        let a: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        let b: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        assert_eq!(a, b);
        assert_ne!(s.child(0), s.child(1));
        assert_ne!(s.child(0).rng().random::<u64>(), s.child(1).rng().random::<u64>());
    }

    #[test]
    fn typical_sensor_sits_at_origin() {
        let p = EnvironmentParams::discs(0.01, 0.5, 1.67, 100.0).unwrap();
        let w = Window::centered(110.0, 0.0).unwrap();
        let env = sample_typical_sensor_environment(&p, &w, Seed::new(1, 0)).unwrap();
        let o = env.object(0).unwrap();
        assert_eq!(o.placed.center, Point2::ORIGIN);
        assert!(o.sensor.is_some());
    }
}
