//! Line-of-sight coverage, redundancy and γ-coverage on sampled environments.
//!
//! A location `x` is in sensor `i`'s coverage set when it lies in the
//! translated support and either lies in `i`'s own body or the segment from
//! the sensor to `x` meets no other object except possibly at `x` itself.
//! The sensor's own body never blocks its view.
//!
//! Coverage sets are rasterized on a lattice aligned to the global origin:
//! cell `(i, j)` has center `((i + 0.5) h, (j + 0.5) h)` for resolution `h`.
//! Visibility queries go through an angular occluder index built once per
//! viewpoint, so each cell test only examines the few objects whose angular
//! extent contains the cell and which are closer than it.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{segment_shape_intersects, ConvexShape, PlacedShape, Point2, RadialSupport, Segment, EPS};
use crate::pointprocess::Window;

/// Sensor mark: mount offset from the object center (world frame) and the
/// sensing support referenced to the mount point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMark {
    pub offset: Point2,
    pub support: RadialSupport,
    /// Elevated sensors see over every object.
    #[serde(default)]
    pub elevated: bool,
}

impl SensorMark {
    pub fn new(offset: Point2, support: RadialSupport) -> Self {
        SensorMark {
            offset,
            support,
            elevated: false,
        }
    }

    pub fn elevated(mut self, elevated: bool) -> Self {
        self.elevated = elevated;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedObject {
    pub id: u64,
    pub placed: PlacedShape,
    pub sensor: Option<SensorMark>,
}

impl MarkedObject {
    pub fn new(id: u64, placed: PlacedShape, sensor: Option<SensorMark>) -> Self {
        MarkedObject { id, placed, sensor }
    }

    /// World position of the sensor, if any.
    pub fn sensor_position(&self) -> Option<Point2> {
        self.sensor.as_ref().map(|s| self.placed.center + s.offset)
    }

    pub fn is_sensor(&self) -> bool {
        self.sensor.is_some()
    }
}

const BUCKET: f64 = 16.0;

/// Uniform bucket grid over object centers.
#[derive(Debug, Clone)]
struct Buckets {
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
    max_bound: f64,
}

impl Buckets {
    fn build(objects: &[MarkedObject]) -> Buckets {
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        let mut max_bound = 0.0f64;
        for o in objects {
            let c = o.placed.center;
            x0 = x0.min(c.x);
            y0 = y0.min(c.y);
            x1 = x1.max(c.x);
            y1 = y1.max(c.y);
            max_bound = max_bound.max(o.placed.shape.bounding_radius());
        }
        if objects.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let nx = ((x1 - x0) / BUCKET).floor() as usize + 1;
        let ny = ((y1 - y0) / BUCKET).floor() as usize + 1;
        let mut cells = vec![Vec::new(); nx * ny];
        for (k, o) in objects.iter().enumerate() {
            let c = o.placed.center;
            let i = ((c.x - x0) / BUCKET).floor() as usize;
            let j = ((c.y - y0) / BUCKET).floor() as usize;
            cells[j.min(ny - 1) * nx + i.min(nx - 1)].push(k as u32);
        }
        Buckets {
            x0,
            y0,
            nx,
            ny,
            cells,
            max_bound,
        }
    }

    /// Calls `f` with every object index whose center is within
    /// `radius + max_bound` of `p` (a superset of the objects meeting the
    /// disc).
    fn for_each_near(&self, p: Point2, radius: f64, mut f: impl FnMut(usize)) {
        let reach = radius + self.max_bound;
        let lo_i = ((p.x - reach - self.x0) / BUCKET).floor().max(0.0) as usize;
        let lo_j = ((p.y - reach - self.y0) / BUCKET).floor().max(0.0) as usize;
        let hi_i = (p.x + reach - self.x0) / BUCKET;
        let hi_j = (p.y + reach - self.y0) / BUCKET;
        if hi_i < 0.0 || hi_j < 0.0 {
            return;
        }
        let hi_i = (hi_i.floor() as usize).min(self.nx - 1);
        let hi_j = (hi_j.floor() as usize).min(self.ny - 1);
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                for &k in &self.cells[j * self.nx + i] {
                    f(k as usize);
                }
            }
        }
    }
}

/// Immutable realization of the marked environment.
#[derive(Debug, Clone)]
pub struct EnvironmentSnapshot {
    objects: Vec<MarkedObject>,
    window: Window,
    by_id: HashMap<u64, usize>,
    buckets: Buckets,
    max_sensor_range: f64,
}

impl EnvironmentSnapshot {
    pub fn new(objects: Vec<MarkedObject>, window: Window) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(objects.len());
        let mut max_sensor_range = 0.0f64;
        for (k, o) in objects.iter().enumerate() {
            if !o.placed.center.is_finite() {
                return Err(invalid(format!("object {} has a non-finite center", o.id)));
            }
            if by_id.insert(o.id, k).is_some() {
                return Err(invalid(format!("duplicate object id {}", o.id)));
            }
            if let Some(s) = &o.sensor {
                if !o.placed.contains(o.placed.center + s.offset) {
                    return Err(invalid(format!(
                        "sensor offset of object {} lies outside its shape",
                        o.id
                    )));
                }
                max_sensor_range = max_sensor_range.max(s.support.max_range());
            }
        }
        let buckets = Buckets::build(&objects);
        Ok(EnvironmentSnapshot {
            objects,
            window,
            by_id,
            buckets,
            max_sensor_range,
        })
    }

    pub fn objects(&self) -> &[MarkedObject] {
        &self.objects
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn index_of(&self, id: u64) -> Result<usize> {
        self.by_id.get(&id).copied().ok_or(Error::UnknownObject(id))
    }

    pub fn object(&self, id: u64) -> Result<&MarkedObject> {
        Ok(&self.objects[self.index_of(id)?])
    }

    /// Index of a sensing object, or an error if `id` is unknown or not a sensor.
    pub fn sensor_index(&self, id: u64) -> Result<usize> {
        let k = self.index_of(id)?;
        if self.objects[k].is_sensor() {
            Ok(k)
        } else {
            Err(Error::NotASensor(id))
        }
    }

    pub fn sensor_ids(&self) -> Vec<u64> {
        self.objects.iter().filter(|o| o.is_sensor()).map(|o| o.id).collect()
    }

    pub fn max_sensor_range(&self) -> f64 {
        self.max_sensor_range
    }

    /// Indices of objects whose shape comes within `radius` of `p`, ascending.
    pub fn objects_near(&self, p: Point2, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.buckets.for_each_near(p, radius, |k| {
            if self.objects[k].placed.distance_to(p) <= radius {
                out.push(k);
            }
        });
        out.sort_unstable();
        out
    }

    /// True if `p` lies in any object.
    pub fn is_occupied(&self, p: Point2) -> bool {
        let mut hit = false;
        self.buckets.for_each_near(p, 0.0, |k| {
            hit = hit || self.objects[k].placed.contains(p);
        });
        hit
    }

    /// Snapshot with additional objects appended.
    pub fn with_objects(&self, extra: impl IntoIterator<Item = MarkedObject>) -> Result<Self> {
        let mut objects = self.objects.clone();
        objects.extend(extra);
        EnvironmentSnapshot::new(objects, self.window)
    }
}

/// Region of interest: a disc, optionally clipped to the horizontal band
/// `|y - strip_center_y| <= strip_half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionOfInterest {
    Disc {
        center: Point2,
        radius: f64,
    },
    DiscStrip {
        center: Point2,
        radius: f64,
        strip_center_y: f64,
        strip_half_width: f64,
    },
}

impl RegionOfInterest {
    pub fn disc(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("roi radius must be > 0, got {radius}")));
        }
        Ok(RegionOfInterest::Disc { center, radius })
    }

    pub fn disc_strip(center: Point2, radius: f64, strip_center_y: f64, strip_half_width: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("roi radius must be > 0, got {radius}")));
        }
        if !(strip_half_width > 0.0 && strip_half_width.is_finite()) {
            return Err(invalid(format!("strip half width must be > 0, got {strip_half_width}")));
        }
        Ok(RegionOfInterest::DiscStrip {
            center,
            radius,
            strip_center_y,
            strip_half_width,
        })
    }

    pub fn center(&self) -> Point2 {
        match *self {
            RegionOfInterest::Disc { center, .. } | RegionOfInterest::DiscStrip { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            RegionOfInterest::Disc { radius, .. } | RegionOfInterest::DiscStrip { radius, .. } => radius,
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match *self {
            RegionOfInterest::Disc { center, radius } => p.distance(center) <= radius,
            RegionOfInterest::DiscStrip {
                center,
                radius,
                strip_center_y,
                strip_half_width,
            } => p.distance(center) <= radius && (p.y - strip_center_y).abs() <= strip_half_width,
        }
    }

    /// `(x_min, x_max, y_min, y_max)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let c = self.center();
        let r = self.radius();
        let (mut y0, mut y1) = (c.y - r, c.y + r);
        if let RegionOfInterest::DiscStrip {
            strip_center_y,
            strip_half_width,
            ..
        } = *self
        {
            y0 = y0.max(strip_center_y - strip_half_width);
            y1 = y1.min(strip_center_y + strip_half_width);
        }
        (c.x - r, c.x + r, y0, y1)
    }

    /// Exact area.
    pub fn area(&self) -> f64 {
        match *self {
            RegionOfInterest::Disc { radius, .. } => PI * radius * radius,
            RegionOfInterest::DiscStrip {
                center,
                radius,
                strip_center_y,
                strip_half_width,
            } => disc_band_area(
                radius,
                strip_center_y - strip_half_width - center.y,
                strip_center_y + strip_half_width - center.y,
            ),
        }
    }
}

/// Area of `b(0, r) ∩ {y0 <= y <= y1}`.
pub fn disc_band_area(r: f64, y0: f64, y1: f64) -> f64 {
    let prim = |y: f64| {
        let y = y.clamp(-r, r);
        y * (r * r - y * y).max(0.0).sqrt() + r * r * (y / r).asin()
    };
    if r <= 0.0 || y1 <= y0 {
        return 0.0;
    }
    (prim(y1) - prim(y0)).max(0.0)
}

/// Rasterized redundancy counts over a region of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub origin: Point2,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    i0: i64,
    j0: i64,
    pub counts: Vec<u32>,
    pub occupied_mask: Vec<bool>,
    pub in_roi: Vec<bool>,
    roi_cells: usize,
}

impl CoverageGrid {
    /// Zero-count grid over `roi`, with the occupancy mask taken from `env`.
    pub fn new(env: &EnvironmentSnapshot, roi: &RegionOfInterest, resolution: f64) -> Result<Self> {
        let (x0, x1, y0, y1) = roi.bbox();
        let mut grid = Self::blank(x0, x1, y0, y1, resolution)?;
        for k in 0..grid.nx * grid.ny {
            if roi.contains(grid.center_of(k)) {
                grid.in_roi[k] = true;
                grid.roi_cells += 1;
            }
        }
        grid.mark_occupied(env, roi.center(), roi.radius());
        Ok(grid)
    }

    /// Zero-count grid whose region of interest is the whole box
    /// `[x0, x1] × [y0, y1]`.
    pub fn over_box(env: &EnvironmentSnapshot, x0: f64, x1: f64, y0: f64, y1: f64, resolution: f64) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(invalid(format!("bad box [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        let mut grid = Self::blank(x0, x1, y0, y1, resolution)?;
        for k in 0..grid.nx * grid.ny {
            let c = grid.center_of(k);
            if c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1 {
                grid.in_roi[k] = true;
                grid.roi_cells += 1;
            }
        }
        let mid = Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let half_diag = 0.5 * (x1 - x0).hypot(y1 - y0);
        grid.mark_occupied(env, mid, half_diag);
        Ok(grid)
    }

    fn blank(x0: f64, x1: f64, y0: f64, y1: f64, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(invalid(format!("resolution must be > 0, got {resolution}")));
        }
        let i0 = (x0 / resolution).floor() as i64;
        let j0 = (y0 / resolution).floor() as i64;
        let nx = ((x1 / resolution).ceil() as i64 - i0).max(1) as usize;
        let ny = ((y1 / resolution).ceil() as i64 - j0).max(1) as usize;
        Ok(CoverageGrid {
            origin: Point2::new(i0 as f64 * resolution, j0 as f64 * resolution),
            resolution,
            nx,
            ny,
            i0,
            j0,
            counts: vec![0; nx * ny],
            occupied_mask: vec![false; nx * ny],
            in_roi: vec![false; nx * ny],
            roi_cells: 0,
        })
    }

    fn mark_occupied(&mut self, env: &EnvironmentSnapshot, c: Point2, radius: f64) {
        let reach = radius + self.resolution;
        for idx in env.objects_near(c, reach) {
            let placed = &env.objects()[idx].placed;
            let b = placed.shape.bounding_radius();
            self.for_cells_in_box(placed.center, b, |g, k| {
                if placed.contains(g.center_of(k)) {
                    g.occupied_mask[k] = true;
                }
            });
        }
    }

    pub fn center_of(&self, k: usize) -> Point2 {
        let ix = (k % self.nx) as i64 + self.i0;
        let iy = (k / self.nx) as i64 + self.j0;
        Point2::new((ix as f64 + 0.5) * self.resolution, (iy as f64 + 0.5) * self.resolution)
    }

    pub fn cell_area(&self) -> f64 {
        self.resolution * self.resolution
    }

    pub fn roi_cell_count(&self) -> usize {
        self.roi_cells
    }

    /// Rasterized ROI area.
    pub fn roi_area(&self) -> f64 {
        self.roi_cells as f64 * self.cell_area()
    }

    /// ROI cells with count at least `gamma`.
    pub fn cells_at_least(&self, gamma: u32) -> usize {
        self.counts
            .iter()
            .zip(&self.in_roi)
            .filter(|(c, r)| **r && **c >= gamma)
            .count()
    }

    pub fn area_at_least(&self, gamma: u32) -> f64 {
        self.cells_at_least(gamma) as f64 * self.cell_area()
    }

    /// Fraction of ROI cells with count at least `gamma`.
    pub fn normalized_at_least(&self, gamma: u32) -> f64 {
        if self.roi_cells == 0 {
            return 0.0;
        }
        self.cells_at_least(gamma) as f64 / self.roi_cells as f64
    }

    /// Calls `f` for each in-ROI cell whose center lies in the axis-aligned
    /// box `center ± half`.
    fn for_cells_in_box(&mut self, center: Point2, half: f64, mut f: impl FnMut(&mut Self, usize)) {
        let h = self.resolution;
        let lo_i = (((center.x - half) / h - 0.5).ceil() as i64 - self.i0).max(0);
        let hi_i = (((center.x + half) / h - 0.5).floor() as i64 - self.i0).min(self.nx as i64 - 1);
        let lo_j = (((center.y - half) / h - 0.5).ceil() as i64 - self.j0).max(0);
        let hi_j = (((center.y + half) / h - 0.5).floor() as i64 - self.j0).min(self.ny as i64 - 1);
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let k = j as usize * self.nx + i as usize;
                if self.in_roi[k] {
                    f(self, k);
                }
            }
        }
    }

    /// In-ROI cell indices within `reach` (box test) of `center`.
    pub fn cells_near(&self, center: Point2, reach: f64) -> Vec<usize> {
        let h = self.resolution;
        let lo_i = (((center.x - reach) / h - 0.5).ceil() as i64 - self.i0).max(0);
        let hi_i = (((center.x + reach) / h - 0.5).floor() as i64 - self.i0).min(self.nx as i64 - 1);
        let lo_j = (((center.y - reach) / h - 0.5).ceil() as i64 - self.j0).max(0);
        let hi_j = (((center.y + reach) / h - 0.5).floor() as i64 - self.j0).min(self.ny as i64 - 1);
        let mut out = Vec::new();
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let k = j as usize * self.nx + i as usize;
                if self.in_roi[k] {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Adds one to every cell covered by `view`.
    pub fn accumulate(&mut self, view: &SensorView<'_>) {
        for k in view.covered_cells(self) {
            self.counts[k] += 1;
        }
    }
}

const ANGLE_BINS: usize = 1024;

/// Occluders around a viewpoint, binned by direction and sorted by
/// distance within each bin.
#[derive(Debug, Clone)]
struct AngularIndex {
    origin: Point2,
    shapes: Vec<PlacedShape>,
    owners: Vec<usize>,
    bins: Vec<Vec<(f64, u32)>>,
    /// Per bin, the nearest distance beyond which every direction in the
    /// bin passes through one object, and that object's slot.
    horizon: Vec<(f64, u32)>,
}

/// Distance from `p` to the farthest point of `shape`.
fn farthest_distance(shape: &PlacedShape, p: Point2) -> f64 {
    match shape.shape {
        ConvexShape::Disc { radius } => shape.center.distance(p) + radius,
        ConvexShape::Rect { .. } => shape.corners().into_iter().map(|c| c.distance(p)).fold(0.0, f64::max),
    }
}

fn angle_bin(theta: f64) -> usize {
    let b = ((theta + PI) / TAU * ANGLE_BINS as f64).floor() as i64;
    b.rem_euclid(ANGLE_BINS as i64) as usize
}

impl AngularIndex {
    fn build(env: &EnvironmentSnapshot, origin: Point2, radius: f64, skip: Option<usize>) -> Self {
        let mut idx = AngularIndex {
            origin,
            shapes: Vec::new(),
            owners: Vec::new(),
            bins: vec![Vec::new(); ANGLE_BINS],
            horizon: vec![(f64::INFINITY, u32::MAX); ANGLE_BINS],
        };
        let w = TAU / ANGLE_BINS as f64;
        for k in env.objects_near(origin, radius + EPS) {
            if Some(k) == skip {
                continue;
            }
            let placed = env.objects()[k].placed;
            let slot = idx.shapes.len() as u32;
            let d = placed.distance_to(origin);
            match placed.angular_extent(origin) {
                None => idx.bins.iter_mut().for_each(|b| b.push((d, slot))),
                Some((lo, hi)) => {
                    let a = ((lo + PI) / w).floor() as i64 - 1;
                    let b = ((hi + PI) / w).floor() as i64 + 1;
                    if b - a + 1 >= ANGLE_BINS as i64 {
                        idx.bins.iter_mut().for_each(|bin| bin.push((d, slot)));
                    } else {
                        for i in a..=b {
                            idx.bins[i.rem_euclid(ANGLE_BINS as i64) as usize].push((d, slot));
                        }
                    }
                    let first = ((lo + PI) / w + 1e-9).ceil() as i64;
                    let last = ((hi + PI) / w - 1e-9).floor() as i64 - 1;
                    if first <= last {
                        let far = farthest_distance(&placed, origin);
                        for i in first..=last {
                            let h = &mut idx.horizon[i.rem_euclid(ANGLE_BINS as i64) as usize];
                            if far < h.0 {
                                *h = (far, slot);
                            }
                        }
                    }
                }
            }
            idx.shapes.push(placed);
            idx.owners.push(k);
        }
        for b in &mut idx.bins {
            b.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
        idx
    }

    /// Distance beyond which every direction is blocked.
    fn max_horizon(&self) -> f64 {
        self.horizon.iter().map(|h| h.0).fold(0.0, f64::max)
    }

    /// True if the segment from the index origin to `far` is blocked by an
    /// indexed object other than `skip`, exempting the point `exempt`.
    fn blocked(&self, far: Point2, exempt: Point2, skip: Option<usize>) -> bool {
        let d = far - self.origin;
        let rho = d.norm();
        self.blocked_in_bin(far, exempt, skip, angle_bin(d.angle()), rho)
    }

    fn blocked_in_bin(&self, far: Point2, exempt: Point2, skip: Option<usize>, bin: usize, rho: f64) -> bool {
        let (h, hs) = self.horizon[bin];
        if rho > h + EPS && Some(self.owners[hs as usize]) != skip {
            return true;
        }
        let seg = Segment::new(self.origin, far);
        for &(md, slot) in &self.bins[bin] {
            if md > rho + EPS {
                break;
            }
            let slot = slot as usize;
            if Some(self.owners[slot]) == skip {
                continue;
            }
            if segment_shape_intersects(&seg, &self.shapes[slot], exempt) {
                return true;
            }
        }
        false
    }
}

/// Visibility oracle for one sensor.
#[derive(Debug, Clone)]
pub struct SensorView<'a> {
    owner: usize,
    pos: Point2,
    body: PlacedShape,
    support: RadialSupport,
    index: Option<AngularIndex>,
    _env: std::marker::PhantomData<&'a EnvironmentSnapshot>,
}

impl<'a> SensorView<'a> {
    pub fn new(env: &'a EnvironmentSnapshot, sensor_id: u64) -> Result<Self> {
        Ok(Self::at_index(env, env.sensor_index(sensor_id)?))
    }

    /// View for the sensor stored at position `k` of `env.objects()`.
    ///
    /// Panics if that object carries no sensor.
    pub fn at_index(env: &'a EnvironmentSnapshot, k: usize) -> Self {
        let mark = env.objects()[k].sensor.as_ref().expect("object is not a sensor");
        Self::with_mark(env, k, mark)
    }

    /// View from object `k` as if it carried `mark`, whether or not it is a
    /// sensor in `env`.
    pub fn with_mark(env: &'a EnvironmentSnapshot, k: usize, mark: &SensorMark) -> Self {
        let obj = &env.objects()[k];
        let pos = obj.placed.center + mark.offset;
        let index = (!mark.elevated).then(|| AngularIndex::build(env, pos, mark.support.max_range(), Some(k)));
        SensorView {
            owner: k,
            pos,
            body: obj.placed,
            support: mark.support.clone(),
            index,
            _env: std::marker::PhantomData,
        }
    }

    pub fn position(&self) -> Point2 {
        self.pos
    }

    pub fn max_range(&self) -> f64 {
        self.support.max_range()
    }

    /// Membership of `x` in the coverage set.
    pub fn covers(&self, x: Point2) -> bool {
        if !self.support.contains(x - self.pos) {
            return false;
        }
        if self.body.contains(x) {
            return true;
        }
        match &self.index {
            None => true,
            Some(idx) => !idx.blocked(x, x, None),
        }
    }

    /// True if any of `samples` boundary points of object `target` lies in
    /// the coverage set, with `target` itself treated as transparent. A
    /// sensor always senses its own body.
    pub fn sees_object(&self, env: &EnvironmentSnapshot, target: usize, samples: usize) -> Result<bool> {
        if target == self.owner {
            return Ok(true);
        }
        let placed = env.objects()[target].placed;
        if placed.distance_to(self.pos) > self.support.max_range() + EPS {
            return Ok(false);
        }
        for x in placed.boundary_samples(samples)? {
            if !self.support.contains(x - self.pos) {
                continue;
            }
            let clear = match &self.index {
                None => true,
                Some(idx) => !idx.blocked(x, x, Some(target)),
            };
            if clear {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Number of lattice cells (centers at `(i + 0.5) h`, `(j + 0.5) h`) in
    /// the coverage set. Equals the covered cell count of a grid whose
    /// region of interest contains the whole support.
    pub fn covered_cell_count(&self, resolution: f64) -> usize {
        let h = resolution;
        let reach = self.reach();
        let (px, py) = (self.pos.x, self.pos.y);
        let j0 = ((py - reach) / h - 0.5).ceil() as i64;
        let j1 = ((py + reach) / h - 0.5).floor() as i64;
        let mut n = 0;
        for j in j0..=j1 {
            let y = (j as f64 + 0.5) * h;
            let rem = reach * reach - (y - py) * (y - py);
            if rem < 0.0 {
                continue;
            }
            let half = rem.sqrt();
            let i0 = ((px - half) / h - 0.5).ceil() as i64;
            let i1 = ((px + half) / h - 0.5).floor() as i64;
            for i in i0..=i1 {
                let x = Point2::new((i as f64 + 0.5) * h, y);
                if self.covers_fast(x) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Same answer as `covers`, computing the direction of `x` once.
    fn covers_fast(&self, x: Point2) -> bool {
        let (RadialSupport::Omni { r_max }, Some(idx)) = (&self.support, &self.index) else {
            return self.covers(x);
        };
        let d = x - self.pos;
        let rho = d.norm();
        if rho > r_max + EPS {
            return false;
        }
        if rho <= EPS {
            return true;
        }
        let bin = angle_bin(d.angle());
        if rho > idx.horizon[bin].0 + EPS {
            return self.body.contains(x);
        }
        match idx.bins[bin].first() {
            Some(&(md, _)) if md <= rho + EPS => self.body.contains(x) || !idx.blocked_in_bin(x, x, None, bin, rho),
            _ => true,
        }
    }

    /// Distance beyond which nothing is covered.
    fn reach(&self) -> f64 {
        let mut reach = self.max_range();
        if let Some(idx) = &self.index {
            let body = farthest_distance(&self.body, self.pos);
            reach = reach.min(idx.max_horizon().max(body) + EPS);
        }
        reach
    }

    /// In-ROI cells of `grid` covered by this sensor.
    pub fn covered_cells(&self, grid: &CoverageGrid) -> Vec<usize> {
        grid.cells_near(self.pos, self.reach())
            .into_iter()
            .filter(|&k| self.covers_fast(grid.center_of(k)))
            .collect()
    }
}

/// Rasterized coverage set of one sensor (counts are 0 or 1).
pub fn coverage_set(
    env: &EnvironmentSnapshot,
    sensor_id: u64,
    roi: &RegionOfInterest,
    resolution: f64,
) -> Result<CoverageGrid> {
    let view = SensorView::new(env, sensor_id)?;
    let mut grid = CoverageGrid::new(env, roi, resolution)?;
    grid.accumulate(&view);
    Ok(grid)
}

/// Covered area of one sensor inside `roi`.
pub fn coverage_area(
    env: &EnvironmentSnapshot,
    sensor_id: u64,
    roi: &RegionOfInterest,
    resolution: f64,
) -> Result<f64> {
    Ok(coverage_set(env, sensor_id, roi, resolution)?.area_at_least(1))
}

/// Redundancy counts over `roi` for the collaborator set `collaborators`.
pub fn redundancy_grid(
    env: &EnvironmentSnapshot,
    collaborators: &[u64],
    roi: &RegionOfInterest,
    resolution: f64,
) -> Result<CoverageGrid> {
    let idx = sensor_indices(env, collaborators)?;
    let mut grid = CoverageGrid::new(env, roi, resolution)?;
    for k in idx {
        let view = SensorView::at_index(env, k);
        if view.pos.distance(roi.center()) > view.max_range() + roi.radius() + EPS {
            continue;
        }
        grid.accumulate(&view);
    }
    Ok(grid)
}

fn sensor_indices(env: &EnvironmentSnapshot, ids: &[u64]) -> Result<Vec<usize>> {
    let mut idx = ids.iter().map(|&id| env.sensor_index(id)).collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// Redundancy probe centered on one location: answers "does sensor `k` see
/// `x`" for many sensors with a single occluder index.
#[derive(Debug, Clone)]
pub struct LocationProbe<'a> {
    env: &'a EnvironmentSnapshot,
    x: Point2,
    index: AngularIndex,
}

impl<'a> LocationProbe<'a> {
    pub fn new(env: &'a EnvironmentSnapshot, x: Point2) -> Self {
        LocationProbe {
            env,
            x,
            index: AngularIndex::build(env, x, env.max_sensor_range(), None),
        }
    }

    /// Membership of the probe location in the coverage set of the sensor
    /// at index `k`. Non-sensors never see it.
    pub fn seen_by(&self, k: usize) -> bool {
        let obj = &self.env.objects()[k];
        let Some(mark) = &obj.sensor else {
            return false;
        };
        let p = obj.placed.center + mark.offset;
        if !mark.support.contains(self.x - p) {
            return false;
        }
        if obj.placed.contains(self.x) || mark.elevated {
            return true;
        }
        !self.index.blocked(p, self.x, Some(k))
    }

    /// Number of sensors among `indices` that see the probe location.
    pub fn count(&self, indices: &[usize]) -> u32 {
        indices.iter().filter(|&&k| self.seen_by(k)).count() as u32
    }
}

/// Redundancy of location `x`: the number of sensors in `collaborators`
/// whose coverage set contains `x`, by direct line-of-sight tests.
pub fn redundancy_at(env: &EnvironmentSnapshot, collaborators: &[u64], x: Point2) -> Result<u32> {
    let idx = sensor_indices(env, collaborators)?;
    if idx.is_empty() {
        return Ok(0);
    }
    Ok(LocationProbe::new(env, x).count(&idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaCoverage {
    pub area: f64,
    pub normalized: f64,
}

/// Area (and ROI fraction) of cells seen by at least `gamma` collaborators.
pub fn gamma_coverage(
    env: &EnvironmentSnapshot,
    collaborators: &[u64],
    roi: &RegionOfInterest,
    gamma: u32,
    resolution: f64,
) -> Result<GammaCoverage> {
    if gamma < 1 {
        return Err(invalid("gamma must be >= 1"));
    }
    let grid = redundancy_grid(env, collaborators, roi, resolution)?;
    Ok(GammaCoverage {
        area: grid.area_at_least(gamma),
        normalized: grid.normalized_at_least(gamma),
    })
}

/// Gain in normalized γ-coverage when an infrastructure sensor contributes
/// `gamma_rsu` guaranteed views everywhere in the ROI.
pub fn rsu_gamma_gain(
    env: &EnvironmentSnapshot,
    collaborators: &[u64],
    roi: &RegionOfInterest,
    gamma: u32,
    gamma_rsu: u32,
    resolution: f64,
) -> Result<f64> {
    if gamma < 1 {
        return Err(invalid("gamma must be >= 1"));
    }
    if gamma_rsu >= gamma {
        return Err(invalid(format!(
            "gamma_rsu ({gamma_rsu}) must be smaller than gamma ({gamma})"
        )));
    }
    let grid = redundancy_grid(env, collaborators, roi, resolution)?;
    Ok(grid.normalized_at_least(gamma - gamma_rsu) - grid.normalized_at_least(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexShape;
    use proptest::prelude::*;

    fn window() -> Window {
        Window::centered(300.0, 0.0).unwrap()
    }

    fn sensor_disc(id: u64, c: Point2, r: f64, range: f64) -> MarkedObject {
        MarkedObject::new(
            id,
            PlacedShape::new(c, ConvexShape::disc(r).unwrap()),
            Some(SensorMark::new(Point2::ORIGIN, RadialSupport::omni(range).unwrap())),
        )
    }

    fn plain_disc(id: u64, c: Point2, r: f64) -> MarkedObject {
        MarkedObject::new(id, PlacedShape::new(c, ConvexShape::disc(r).unwrap()), None)
    }

    #[test]
    fn lone_sensor_covers_its_support() {
        let env = EnvironmentSnapshot::new(vec![sensor_disc(0, Point2::ORIGIN, 1.67, 100.0)], window()).unwrap();
        let roi = RegionOfInterest::disc(Point2::ORIGIN, 100.0).unwrap();
        let a = coverage_area(&env, 0, &roi, 0.25).unwrap();
        let exact = PI * 1e4;
        assert!((a - exact).abs() / exact < 0.01, "{a}");
    }

    #[test]
    fn shadow_matches_segment_distance_oracle() {
        let blocker = Point2::new(20.0, 3.0);
        let env = EnvironmentSnapshot::new(
            vec![sensor_disc(0, Point2::ORIGIN, 1.0, 60.0), plain_disc(1, blocker, 2.0)],
            window(),
        )
        .unwrap();
        let roi = RegionOfInterest::disc(Point2::ORIGIN, 60.0).unwrap();
        let grid = coverage_set(&env, 0, &roi, 0.5).unwrap();
        let mut shadowed = 0;
        for k in 0..grid.counts.len() {
            if !grid.in_roi[k] {
                continue;
            }
            let x = grid.center_of(k);
            let seg = Segment::new(Point2::ORIGIN, x);
            // A chord of positive length through the blocker hides x.
            let clearance = seg.distance_to(blocker) - 2.0;
            if clearance.abs() < 1e-6 {
                continue;
            }
            let expect = x.norm() <= 60.0 && (x.norm() <= 1.0 || clearance > 0.0);
            if !expect {
                shadowed += 1;
            }
            assert_eq!(grid.counts[k] == 1, expect, "cell {x:?}");
        }
        assert!(shadowed > 100);
    }

    #[test]
    fn surface_point_is_visible_but_interior_is_not() {
        let env = EnvironmentSnapshot::new(
            vec![
                sensor_disc(0, Point2::ORIGIN, 1.0, 100.0),
                plain_disc(1, Point2::new(10.0, 0.0), 2.0),
            ],
            window(),
        )
        .unwrap();
        let view = SensorView::new(&env, 0).unwrap();
        assert!(view.covers(Point2::new(8.0, 0.0)));
        assert!(!view.covers(Point2::new(8.5, 0.0)));
        assert!(!view.covers(Point2::new(12.0, 0.0)));
        assert!(!view.covers(Point2::new(30.0, 0.0)));
        assert!(view.covers(Point2::new(30.0, 10.0)));
    }

    #[test]
    fn own_body_is_transparent_and_covered() {
        let car = MarkedObject::new(
            0,
            PlacedShape::new(Point2::ORIGIN, ConvexShape::rect(4.8, 1.8, 0.0).unwrap()),
            Some(SensorMark::new(
                Point2::new(2.0, 0.0),
                RadialSupport::omni(50.0).unwrap(),
            )),
        );
        let env = EnvironmentSnapshot::new(vec![car], window()).unwrap();
        let view = SensorView::new(&env, 0).unwrap();
        assert!(view.covers(Point2::new(-2.3, 0.8)));
        assert!(view.covers(Point2::new(-20.0, 0.0)));
        let roi = RegionOfInterest::disc(Point2::ORIGIN, 10.0).unwrap();
        let grid = coverage_set(&env, 0, &roi, 0.25).unwrap();
        for k in 0..grid.counts.len() {
            if grid.in_roi[k] && grid.occupied_mask[k] {
                assert_eq!(grid.counts[k], 1);
            }
        }
    }

    #[test]
    fn sensor_inside_blocker_sees_nothing_else() {
        // Overlapping objects: the sensor point sits inside object 1.
        let env = EnvironmentSnapshot::new(
            vec![
                sensor_disc(0, Point2::ORIGIN, 1.0, 100.0),
                plain_disc(1, Point2::new(0.5, 0.0), 1.0),
            ],
            window(),
        )
        .unwrap();
        let view = SensorView::new(&env, 0).unwrap();
        assert!(!view.covers(Point2::new(-20.0, 0.0)));
        assert!(view.covers(Point2::new(-0.5, 0.0)));
    }

    #[test]
    fn errors_for_unknown_and_non_sensor() {
        let env = EnvironmentSnapshot::new(
            vec![
                sensor_disc(0, Point2::ORIGIN, 1.0, 10.0),
                plain_disc(1, Point2::new(5.0, 0.0), 1.0),
            ],
            window(),
        )
        .unwrap();
        let roi = RegionOfInterest::disc(Point2::ORIGIN, 10.0).unwrap();
        assert_eq!(coverage_set(&env, 7, &roi, 1.0).unwrap_err(), Error::UnknownObject(7));
        assert_eq!(coverage_set(&env, 1, &roi, 1.0).unwrap_err(), Error::NotASensor(1));
        assert!(EnvironmentSnapshot::new(
            vec![
                plain_disc(1, Point2::ORIGIN, 1.0),
                plain_disc(1, Point2::new(9.0, 0.0), 1.0)
            ],
            window()
        )
        .is_err());
    }

    #[test]
    fn redundancy_counts_body_and_los() {
        let env = EnvironmentSnapshot::new(
            vec![
                sensor_disc(0, Point2::ORIGIN, 1.0, 100.0),
                sensor_disc(1, Point2::new(30.0, 0.0), 1.0, 100.0),
                plain_disc(2, Point2::new(15.0, 0.0), 2.0),
                sensor_disc(3, Point2::new(0.0, 30.0), 1.0, 100.0),
            ],
            window(),
        )
        .unwrap();
        assert_eq!(redundancy_at(&env, &[], Point2::new(5.0, 5.0)).unwrap(), 0);
        // Inside sensor 1's body: 1 sees it, 0 is blocked by the middle disc
        // and 3 is blocked by 1's body.
        assert_eq!(redundancy_at(&env, &[0, 1, 3], Point2::new(30.5, 0.0)).unwrap(), 1);
        assert_eq!(redundancy_at(&env, &[0, 1, 3], Point2::new(5.0, 5.0)).unwrap(), 3);
        assert_eq!(redundancy_at(&env, &[0, 1], Point2::new(5.0, 5.0)).unwrap(), 2);
    }

    #[test]
    fn gamma_coverage_reductions() {
        let env = EnvironmentSnapshot::new(
            vec![
                sensor_disc(0, Point2::ORIGIN, 1.67, 50.0),
                sensor_disc(1, Point2::new(20.0, 0.0), 1.67, 50.0),
                plain_disc(2, Point2::new(10.0, 8.0), 1.67),
            ],
            window(),
        )
        .unwrap();
        let roi = RegionOfInterest::disc_strip(Point2::ORIGIN, 50.0, 0.0, 12.0).unwrap();
        let single = gamma_coverage(&env, &[0], &roi, 1, 0.5).unwrap();
        assert_eq!(single.area, coverage_area(&env, 0, &roi, 0.5).unwrap());
        assert_eq!(gamma_coverage(&env, &[0, 1], &roi, 3, 0.5).unwrap().area, 0.0);
        assert_eq!(rsu_gamma_gain(&env, &[0, 1], &roi, 2, 0, 0.5).unwrap(), 0.0);
        assert!(rsu_gamma_gain(&env, &[0, 1], &roi, 2, 1, 0.5).unwrap() > 0.0);
        assert!(rsu_gamma_gain(&env, &[0, 1], &roi, 2, 2, 0.5).is_err());
    }

    #[test]
    fn band_area_matches_sampling() {
        let roi = RegionOfInterest::disc_strip(Point2::new(3.0, 1.0), 100.0, 0.0, 12.0).unwrap();
        let env = EnvironmentSnapshot::new(vec![], window()).unwrap();
        let grid = CoverageGrid::new(&env, &roi, 0.25).unwrap();
        assert!((grid.roi_area() - roi.area()).abs() / roi.area() < 2e-3);
        assert!((disc_band_area(1.0, -2.0, 2.0) - PI).abs() < 1e-12);
        assert!((disc_band_area(1.0, 0.0, 2.0) - PI / 2.0).abs() < 1e-12);
    }

    fn random_env(seed: u64, lambda: f64, p_s: f64) -> EnvironmentSnapshot {
        use crate::pointprocess::{sample_typical_sensor_environment, EnvironmentParams, Seed};
        let p = EnvironmentParams::discs(lambda, p_s, 1.67, 40.0).unwrap();
        sample_typical_sensor_environment(&p, &Window::centered(60.0, 0.0).unwrap(), Seed::new(seed, 0)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn counts_monotone_in_collaborators_and_bounded(seed in 0u64..1000, cut in 0usize..10) {
            let env = random_env(seed, 0.01, 0.5);
            let ids = env.sensor_ids();
            let sub: Vec<u64> = ids.iter().copied().take(cut.min(ids.len())).collect();
            let roi = RegionOfInterest::disc_strip(Point2::ORIGIN, 40.0, 0.0, 12.0).unwrap();
            let small = redundancy_grid(&env, &sub, &roi, 1.0).unwrap();
            let big = redundancy_grid(&env, &ids, &roi, 1.0).unwrap();
            for k in 0..big.counts.len() {
                prop_assert!(small.counts[k] <= big.counts[k]);
                prop_assert!(big.counts[k] as usize <= ids.len());
            }
            for g in 1..4 {
                prop_assert!(big.area_at_least(g + 1) <= big.area_at_least(g));
            }
        }

        #[test]
        fn raster_matches_brute_force_segment_tests(seed in 0u64..1000, dense in proptest::bool::ANY) {
            let env = random_env(seed, if dense { 0.05 } else { 0.01 }, 1.0);
            let roi = RegionOfInterest::disc(Point2::ORIGIN, 40.0).unwrap();
            let grid = coverage_set(&env, 0, &roi, 1.0).unwrap();
            let body = env.objects()[0].placed;
            for k in (0..grid.counts.len()).filter(|&k| grid.in_roi[k]) {
                let x = grid.center_of(k);
                let seg = Segment::new(Point2::ORIGIN, x);
                let clear = env.objects()[1..]
                    .iter()
                    .all(|o| !segment_shape_intersects(&seg, &o.placed, x));
                let expect = x.norm() <= 40.0 && (body.contains(x) || clear);
                prop_assert_eq!(grid.counts[k] == 1, expect, "cell at {:?}", x);
            }
        }

        #[test]
        fn lattice_count_matches_grid(seed in 0u64..1000, dense in proptest::bool::ANY, res in 0.3f64..2.0) {
            let env = random_env(seed, if dense { 0.04 } else { 0.005 }, 1.0);
            let view = SensorView::at_index(&env, 0);
            let roi = RegionOfInterest::disc(Point2::ORIGIN, 41.0).unwrap();
            let grid = coverage_set(&env, 0, &roi, res).unwrap();
            prop_assert_eq!(view.covered_cell_count(res), grid.cells_at_least(1));
        }

        #[test]
        fn fast_membership_matches_covers(seed in 0u64..1000, dense in proptest::bool::ANY, r in 0.0f64..45.0, th in -3.2f64..3.2) {
            let env = random_env(seed, if dense { 0.04 } else { 0.005 }, 1.0);
            let view = SensorView::at_index(&env, 0);
            let x = view.position() + Point2::from_polar(r, th);
            prop_assert_eq!(view.covers_fast(x), view.covers(x));
        }

        #[test]
        fn coverage_stays_inside_support(seed in 0u64..1000) {
            let env = random_env(seed, 0.02, 1.0);
            let roi = RegionOfInterest::disc(Point2::ORIGIN, 60.0).unwrap();
            let grid = coverage_set(&env, 0, &roi, 1.0).unwrap();
            for k in 0..grid.counts.len() {
                if grid.counts[k] > 0 {
                    prop_assert!(grid.center_of(k).norm() <= 40.0 + EPS);
                }
            }
        }

        #[test]
        fn raster_agrees_with_probe(seed in 0u64..1000, px in -30.0f64..30.0, py in -30.0f64..30.0) {
            let env = random_env(seed, 0.02, 0.6);
            let ids = env.sensor_ids();
            let x = Point2::new(px, py);
            let via_views = ids.iter().filter(|&&id| SensorView::new(&env, id).unwrap().covers(x)).count() as u32;
            prop_assert_eq!(redundancy_at(&env, &ids, x).unwrap(), via_views);
        }
    }
}
