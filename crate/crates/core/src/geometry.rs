//! Planar primitives: points, segments, convex object shapes, radial sensing
//! supports, and the line-of-sight blocking predicate.
//!
//! All predicates share a single absolute tolerance [`EPS`]. A segment is
//! blocked by an object only if it passes through the object's interior
//! eroded by `EPS` at a point farther than `EPS` from the sensed target, so
//! grazing contacts and surface targets never count as blocked.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Absolute geometric tolerance in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Point2::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates counter-clockwise by `theta` radians about the origin.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Closed segment from `a` to `b`. May be degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn at(&self, t: f64) -> Point2 {
        self.a + (self.b - self.a) * t
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        self.at(0.5)
    }

    /// Euclidean distance from `p` to the closest point of the segment.
    pub fn distance_to(&self, p: Point2) -> f64 {
        let d = self.b - self.a;
        let len_sq = d.norm_sq();
        if len_sq == 0.0 {
            return self.a.distance(p);
        }
        let t = ((p - self.a).dot(d) / len_sq).clamp(0.0, 1.0);
        self.at(t).distance(p)
    }
}

/// Convex object shape referenced to its own center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexShape {
    Disc {
        radius: f64,
    },
    /// Oriented rectangle; `heading` is the direction of the length axis.
    Rect {
        half_length: f64,
        half_width: f64,
        heading: f64,
    },
}

impl ConvexShape {
    /// A disc of radius `radius`. Zero radius is accepted and models a
    /// point-like body with no footprint.
    pub fn disc(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(invalid(format!("disc radius must be finite and >= 0, got {radius}")));
        }
        Ok(ConvexShape::Disc { radius })
    }

    pub fn rect(length: f64, width: f64, heading: f64) -> Result<Self> {
        if !(length.is_finite() && width.is_finite() && length > 0.0 && width > 0.0) {
            return Err(invalid(format!(
                "rectangle dimensions must be positive, got {length} x {width}"
            )));
        }
        if !heading.is_finite() {
            return Err(invalid("rectangle heading must be finite"));
        }
        Ok(ConvexShape::Rect {
            half_length: length / 2.0,
            half_width: width / 2.0,
            heading,
        })
    }

    pub fn area(&self) -> f64 {
        match *self {
            ConvexShape::Disc { radius } => PI * radius * radius,
            ConvexShape::Rect {
                half_length,
                half_width,
                ..
            } => 4.0 * half_length * half_width,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            ConvexShape::Disc { radius } => TAU * radius,
            ConvexShape::Rect {
                half_length,
                half_width,
                ..
            } => 4.0 * (half_length + half_width),
        }
    }

    /// Radius of the smallest origin-centered disc containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ConvexShape::Disc { radius } => radius,
            ConvexShape::Rect {
                half_length,
                half_width,
                ..
            } => half_length.hypot(half_width),
        }
    }

    /// Width of the shape's projection onto the unit direction at angle `phi`.
    pub fn width_along(&self, phi: f64) -> f64 {
        match *self {
            ConvexShape::Disc { radius } => 2.0 * radius,
            ConvexShape::Rect {
                half_length,
                half_width,
                heading,
            } => {
                let rel = phi - heading;
                2.0 * (half_length * rel.cos().abs() + half_width * rel.sin().abs())
            }
        }
    }

    /// Same shape with every dimension reduced by `by` (None if it vanishes).
    fn eroded(&self, by: f64) -> Option<ConvexShape> {
        match *self {
            ConvexShape::Disc { radius } => (radius > by).then_some(ConvexShape::Disc { radius: radius - by }),
            ConvexShape::Rect {
                half_length,
                half_width,
                heading,
            } => (half_length > by && half_width > by).then_some(ConvexShape::Rect {
                half_length: half_length - by,
                half_width: half_width - by,
                heading,
            }),
        }
    }
}

/// Area of the Minkowski sum of a segment of length `seg_len` with a shape.
///
/// Exact for discs (`πr² + 2r·L`). For rectangles the segment direction is
/// taken as isotropically random, giving `area + L·perimeter/π` (Cauchy's
/// mean width). Use [`segment_dilation_area_along`] for a fixed direction.
pub fn minkowski_segment_dilation_area(seg_len: f64, shape: &ConvexShape) -> Result<f64> {
    if !(seg_len.is_finite() && seg_len >= 0.0) {
        return Err(invalid(format!("segment length must be >= 0, got {seg_len}")));
    }
    Ok(match *shape {
        ConvexShape::Disc { radius } => PI * radius * radius + 2.0 * radius * seg_len,
        ConvexShape::Rect { .. } => shape.area() + seg_len * shape.perimeter() / PI,
    })
}

/// Dilation area for a segment with direction angle `direction`.
pub fn segment_dilation_area_along(seg_len: f64, direction: f64, shape: &ConvexShape) -> Result<f64> {
    if !(seg_len.is_finite() && seg_len >= 0.0) {
        return Err(invalid(format!("segment length must be >= 0, got {seg_len}")));
    }
    Ok(shape.area() + seg_len * shape.width_along(direction + PI / 2.0))
}

/// A shape placed at a location: the region occupied by one object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedShape {
    pub center: Point2,
    pub shape: ConvexShape,
}

impl PlacedShape {
    pub const fn new(center: Point2, shape: ConvexShape) -> Self {
        PlacedShape { center, shape }
    }

    fn to_local(self, p: Point2) -> Point2 {
        let d = p - self.center;
        match self.shape {
            ConvexShape::Disc { .. } => d,
            ConvexShape::Rect { heading, .. } => d.rotate(-heading),
        }
    }

    fn to_world(self, q: Point2) -> Point2 {
        match self.shape {
            ConvexShape::Disc { .. } => self.center + q,
            ConvexShape::Rect { heading, .. } => self.center + q.rotate(heading),
        }
    }

    /// Closed-set membership with tolerance [`EPS`].
    pub fn contains(&self, p: Point2) -> bool {
        self.distance_to(p) <= EPS
    }

    /// Distance from `p` to the shape (zero inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        match self.shape {
            ConvexShape::Disc { radius } => (p.distance(self.center) - radius).max(0.0),
            ConvexShape::Rect {
                half_length,
                half_width,
                ..
            } => {
                let q = self.to_local(p);
                let dx = (q.x.abs() - half_length).max(0.0);
                let dy = (q.y.abs() - half_width).max(0.0);
                dx.hypot(dy)
            }
        }
    }

    /// World-frame corners of a rectangle, counter-clockwise; empty for discs.
    pub fn corners(&self) -> Vec<Point2> {
        match self.shape {
            ConvexShape::Disc { .. } => Vec::new(),
            ConvexShape::Rect {
                half_length: l,
                half_width: w,
                ..
            } => [(l, w), (-l, w), (-l, -w), (l, -w)]
                .into_iter()
                .map(|(x, y)| self.to_world(Point2::new(x, y)))
                .collect(),
        }
    }

    /// Parameter interval `[t0, t1] ⊆ [0, 1]` of the segment inside the
    /// closed shape, or None if they are disjoint.
    pub fn segment_interval(&self, seg: &Segment) -> Option<(f64, f64)> {
        match self.shape {
            ConvexShape::Disc { radius } => disc_interval(self.center, radius, seg),
            ConvexShape::Rect {
                half_length,
                half_width,
                ..
            } => {
                let a = self.to_local(seg.a);
                let b = self.to_local(seg.b);
                box_interval(half_length, half_width, a, b)
            }
        }
    }

    /// Angular interval `(lo, hi)` subtended as seen from `from`, with
    /// `lo <= hi` and `hi - lo < π`. None when `from` lies in the shape, in
    /// which case every direction starts inside it.
    pub fn angular_extent(&self, from: Point2) -> Option<(f64, f64)> {
        if self.contains(from) {
            return None;
        }
        let to_center = self.center - from;
        let theta = to_center.angle();
        match self.shape {
            ConvexShape::Disc { radius } => {
                let half = (radius / to_center.norm()).min(1.0).asin();
                Some((theta - half, theta + half))
            }
            ConvexShape::Rect { .. } => {
                let (mut lo, mut hi) = (0.0f64, 0.0f64);
                for c in self.corners() {
                    let d = wrap_angle((c - from).angle() - theta);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                Some((theta + lo, theta + hi))
            }
        }
    }

    /// `k` points spaced uniformly by arc length along the boundary.
    ///
    /// Discs start at angle 0 and rectangles start at the midpoint of the
    /// front edge (the `+half_length` side), both counter-clockwise. With
    /// this convention `k = 4` yields the four edge midpoints of a rectangle.
    pub fn boundary_samples(&self, k: usize) -> Result<Vec<Point2>> {
        if k < 4 {
            return Err(invalid(format!("need at least 4 boundary samples, got {k}")));
        }
        let pts = match self.shape {
            ConvexShape::Disc { radius } => (0..k)
                .map(|j| self.center + Point2::from_polar(radius, TAU * j as f64 / k as f64))
                .collect(),
            ConvexShape::Rect {
                half_length: l,
                half_width: w,
                ..
            } => {
                let perimeter = 4.0 * (l + w);
                (0..k)
                    .map(|j| {
                        let s = perimeter * j as f64 / k as f64;
                        self.to_world(rect_arc_point(l, w, s))
                    })
                    .collect()
            }
        };
        Ok(pts)
    }

    /// True if the closed shape intersects the closed disc `b(center, radius)`.
    pub fn overlaps_disc(&self, center: Point2, radius: f64) -> bool {
        self.distance_to(center) <= radius + EPS
    }
}

fn rect_arc_point(l: f64, w: f64, s: f64) -> Point2 {
    // Walk counter-clockwise from (l, 0).
    let legs = [
        (Point2::new(l, 0.0), Point2::new(l, w)),
        (Point2::new(l, w), Point2::new(-l, w)),
        (Point2::new(-l, w), Point2::new(-l, -w)),
        (Point2::new(-l, -w), Point2::new(l, -w)),
        (Point2::new(l, -w), Point2::new(l, 0.0)),
    ];
    let mut rest = s;
    for (a, b) in legs {
        let len = a.distance(b);
        if rest <= len {
            return a + (b - a) * (rest / len);
        }
        rest -= len;
    }
    Point2::new(l, 0.0)
}

fn disc_interval(center: Point2, radius: f64, seg: &Segment) -> Option<(f64, f64)> {
    let d = seg.b - seg.a;
    let f = seg.a - center;
    let a = d.norm_sq();
    let c = f.norm_sq() - radius * radius;
    if a == 0.0 {
        return (c <= 0.0).then_some((0.0, 0.0));
    }
    let half_b = f.dot(d);
    let disc = half_b * half_b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-half_b - sq) / a).max(0.0);
    let t1 = ((-half_b + sq) / a).min(1.0);
    (t0 <= t1).then_some((t0, t1))
}

/// Liang-Barsky clip of the local-frame segment `a -> b` against the box
/// `[-hl, hl] x [-hw, hw]`.
fn box_interval(hl: f64, hw: f64, a: Point2, b: Point2) -> Option<(f64, f64)> {
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [(-d.x, a.x + hl), (d.x, hl - a.x), (-d.y, a.y + hw), (d.y, hw - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Line-of-sight blocking predicate.
///
/// Returns true iff `seg` meets `obj` at some point other than
/// `target_exempt` (normally `seg.b`, the sensed location). The object is
/// eroded by [`EPS`] first, so a target on the object's surface, or a
/// segment grazing it, is not blocked.
pub fn segment_shape_intersects(seg: &Segment, obj: &PlacedShape, target_exempt: Point2) -> bool {
    let Some(core) = obj.shape.eroded(EPS) else {
        return false;
    };
    let core = PlacedShape::new(obj.center, core);
    match core.segment_interval(seg) {
        None => false,
        Some((t0, t1)) => seg.at(t0).distance(target_exempt) > EPS || seg.at(t1).distance(target_exempt) > EPS,
    }
}

/// Closed-set membership of `p` in `obj`.
pub fn point_in_shape(p: Point2, obj: &PlacedShape) -> bool {
    obj.contains(p)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

/// Maximum sensing range as a function of direction, referenced to the
/// sensor location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialSupport {
    Omni {
        r_max: f64,
    },
    Sector {
        r_max: f64,
        center_angle: f64,
        width: f64,
    },
    /// `radii[j]` is the range at angle `2πj/n`; lookups use the nearest
    /// grid angle.
    Piecewise {
        radii: Vec<f64>,
    },
}

impl RadialSupport {
    pub fn omni(r_max: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max >= 0.0) {
            return Err(invalid(format!("sensing range must be >= 0, got {r_max}")));
        }
        Ok(RadialSupport::Omni { r_max })
    }

    pub fn sector(r_max: f64, center_angle: f64, width: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max >= 0.0 && width.is_finite() && width >= 0.0) {
            return Err(invalid("sector range and width must be >= 0"));
        }
        Ok(RadialSupport::Sector {
            r_max,
            center_angle,
            width,
        })
    }

    pub fn piecewise(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(invalid("piecewise support needs at least one sample"));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("piecewise support radii must be finite and >= 0"));
        }
        Ok(RadialSupport::Piecewise { radii })
    }

    pub fn r_max_at(&self, theta: f64) -> f64 {
        match self {
            RadialSupport::Omni { r_max } => *r_max,
            RadialSupport::Sector {
                r_max,
                center_angle,
                width,
            } => {
                if *width >= TAU || wrap_angle(theta - center_angle).abs() <= width / 2.0 {
                    *r_max
                } else {
                    0.0
                }
            }
            RadialSupport::Piecewise { radii } => {
                let n = radii.len();
                let idx = (theta.rem_euclid(TAU) / TAU * n as f64).round() as usize % n;
                radii[idx]
            }
        }
    }

    pub fn max_range(&self) -> f64 {
        match self {
            RadialSupport::Omni { r_max } | RadialSupport::Sector { r_max, .. } => *r_max,
            RadialSupport::Piecewise { radii } => radii.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Whether the offset (location minus sensor position) is in the support.
    pub fn contains(&self, offset: Point2) -> bool {
        let r = offset.norm();
        if r <= EPS {
            return true;
        }
        match self {
            RadialSupport::Omni { r_max } => r <= r_max + EPS,
            _ => r <= self.r_max_at(offset.angle()) + EPS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn disc_at(x: f64, y: f64, r: f64) -> PlacedShape {
        PlacedShape::new(Point2::new(x, y), ConvexShape::disc(r).unwrap())
    }

    fn car_at(x: f64, y: f64, heading: f64) -> PlacedShape {
        PlacedShape::new(Point2::new(x, y), ConvexShape::rect(4.8, 1.8, heading).unwrap())
    }

    /// Brute-force oracle: dense sampling along the segment, ignoring samples
    /// within `skip` of the target.
    fn sampled_block(seg: &Segment, obj: &PlacedShape, skip: f64) -> bool {
        let n = 200_000;
        (0..=n).any(|i| {
            let p = seg.at(i as f64 / n as f64);
            p.distance(seg.b) > skip && obj.distance_to(p) == 0.0
        })
    }

    #[test]
    fn disc_straddling_segment_blocks() {
        let seg = Segment::new(Point2::ORIGIN, Point2::new(10.0, 0.0));
        assert!(segment_shape_intersects(&seg, &disc_at(5.0, 0.0, 1.0), seg.b));
    }

    #[test]
    fn target_on_near_surface_is_visible() {
        let seg = Segment::new(Point2::ORIGIN, Point2::new(4.0, 0.0));
        assert!(!segment_shape_intersects(&seg, &disc_at(5.0, 0.0, 1.0), seg.b));
        // Approach from straight above the top point.
        let seg = Segment::new(Point2::new(5.0, 5.0), Point2::new(5.0, 1.0));
        assert!(!segment_shape_intersects(&seg, &disc_at(5.0, 0.0, 1.0), seg.b));
    }

    #[test]
    fn shallow_approach_to_top_point_cuts_a_chord() {
        // The line from the origin to (5, 1) passes 0.98 m from (5, 0), so it
        // enters the unit disc at t = 12/13 before reaching the top point.
        let seg = Segment::new(Point2::ORIGIN, Point2::new(5.0, 1.0));
        let disc = disc_at(5.0, 0.0, 1.0);
        let (t0, t1) = disc.segment_interval(&seg).unwrap();
        assert_relative_eq!(t0, 12.0 / 13.0, epsilon = 1e-12);
        assert_relative_eq!(t1, 1.0, epsilon = 1e-12);
        assert!(segment_shape_intersects(&seg, &disc, seg.b));
        assert!(sampled_block(&seg, &disc, 1e-6));
    }

    #[test]
    fn rectangle_beside_segment_does_not_block() {
        let seg = Segment::new(Point2::ORIGIN, Point2::new(10.0, 0.0));
        let car = car_at(5.0, 3.0, 0.0);
        assert!(!segment_shape_intersects(&seg, &car, seg.b));
        assert!(!sampled_block(&seg, &car, 0.0));
        let car = car_at(5.0, 0.5, 0.0);
        assert!(segment_shape_intersects(&seg, &car, seg.b));
    }

    #[test]
    fn target_inside_other_object_is_blocked() {
        let seg = Segment::new(Point2::ORIGIN, Point2::new(5.0, 0.0));
        assert!(segment_shape_intersects(&seg, &disc_at(5.0, 0.0, 1.0), seg.b));
    }

    #[test]
    fn zero_radius_body_never_blocks() {
        let seg = Segment::new(Point2::ORIGIN, Point2::new(10.0, 0.0));
        assert!(!segment_shape_intersects(&seg, &disc_at(5.0, 0.0, 0.0), seg.b));
    }

    #[test]
    fn dilation_area_examples() {
        let d = ConvexShape::disc(1.67).unwrap();
        assert_relative_eq!(
            minkowski_segment_dilation_area(0.0, &d).unwrap(),
            PI * 1.67 * 1.67,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            minkowski_segment_dilation_area(10.0, &d).unwrap(),
            42.161_587_752,
            epsilon = 1e-6
        );
        let z = ConvexShape::disc(0.0).unwrap();
        assert_eq!(minkowski_segment_dilation_area(5.0, &z).unwrap(), 0.0);
        assert!(minkowski_segment_dilation_area(-1.0, &d).is_err());
    }

    #[test]
    fn dilation_of_disc_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let (r, len) = (1.67, 10.0);
        let seg = Segment::new(Point2::ORIGIN, Point2::new(len, 0.0));
        let (x0, x1, y0, y1) = (-r, len + r, -r, r);
        let box_area = (x1 - x0) * (y1 - y0);
        let n = 1_000_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let hits = (0..n)
            .filter(|_| {
                let p = Point2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
                seg.distance_to(p) <= r
            })
            .count() as f64;
        let frac = hits / n as f64;
        let est = frac * box_area;
        let se = box_area * (frac * (1.0 - frac) / n as f64).sqrt();
        let exact = minkowski_segment_dilation_area(len, &ConvexShape::disc(r).unwrap()).unwrap();
        assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact} (se {se})");
    }

    #[test]
    fn rect_dilation_along_axis_is_exact() {
        let car = ConvexShape::rect(4.8, 1.8, 0.0).unwrap();
        // Sweeping along the length axis adds L times the width.
        assert_relative_eq!(
            segment_dilation_area_along(10.0, 0.0, &car).unwrap(),
            4.8 * 1.8 + 10.0 * 1.8,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            segment_dilation_area_along(10.0, PI / 2.0, &car).unwrap(),
            4.8 * 1.8 + 10.0 * 4.8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn point_membership() {
        assert!(point_in_shape(Point2::ORIGIN, &disc_at(0.0, 0.0, 1.0)));
        assert!(point_in_shape(Point2::new(1.0, 0.0), &disc_at(0.0, 0.0, 1.0)));
        assert!(!point_in_shape(Point2::new(1.001, 0.0), &disc_at(0.0, 0.0, 1.0)));
        // x in [-1.4, 3.4], y in [-0.9, 0.9]
        let car = car_at(1.0, 0.0, 0.0);
        assert!(point_in_shape(Point2::new(3.0, 0.8), &car));
        assert!(point_in_shape(Point2::new(3.4, 0.9), &car));
        assert!(!point_in_shape(Point2::new(3.5, 0.0), &car));
        assert!(!point_in_shape(Point2::new(0.0, 0.95), &car));
    }

    #[test]
    fn boundary_sample_conventions() {
        let unit = disc_at(0.0, 0.0, 1.0);
        let pts = unit.boundary_samples(4).unwrap();
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, (x, y)) in pts.iter().zip(expect) {
            assert_relative_eq!(p.x, x, epsilon = 1e-12);
            assert_relative_eq!(p.y, y, epsilon = 1e-12);
        }
        let car = car_at(0.0, 0.0, 0.0);
        let pts = car.boundary_samples(4).unwrap();
        let expect = [(2.4, 0.0), (0.0, 0.9), (-2.4, 0.0), (0.0, -0.9)];
        for (p, (x, y)) in pts.iter().zip(expect) {
            assert_relative_eq!(p.x, x, epsilon = 1e-12);
            assert_relative_eq!(p.y, y, epsilon = 1e-12);
        }
        assert!(car.boundary_samples(3).is_err());
    }

    fn on_boundary(obj: &PlacedShape, p: Point2) -> bool {
        match obj.shape {
            ConvexShape::Disc { radius } => (p.distance(obj.center) - radius).abs() <= 1e-9,
            ConvexShape::Rect {
                half_length,
                half_width,
                heading,
            } => {
                let q = (p - obj.center).rotate(-heading);
                let inside = q.x.abs() <= half_length + 1e-9 && q.y.abs() <= half_width + 1e-9;
                let on_edge = (q.x.abs() - half_length).abs() <= 1e-9 || (q.y.abs() - half_width).abs() <= 1e-9;
                inside && on_edge
            }
        }
    }

    #[test]
    fn sixteen_samples_lie_on_the_boundary() {
        for obj in [disc_at(3.0, -2.0, 1.67), car_at(10.0, 4.0, 0.0), car_at(-7.0, 1.0, 0.7)] {
            for p in obj.boundary_samples(16).unwrap() {
                assert!(on_boundary(&obj, p), "{p:?} not on {obj:?}");
            }
        }
    }

    #[test]
    fn angular_extent_of_disc_and_rect() {
        let (lo, hi) = disc_at(10.0, 0.0, 1.0).angular_extent(Point2::ORIGIN).unwrap();
        assert_relative_eq!(hi, (0.1f64).asin(), epsilon = 1e-12);
        assert_relative_eq!(lo, -(0.1f64).asin(), epsilon = 1e-12);
        let (lo, hi) = car_at(-10.0, 0.0, 0.0).angular_extent(Point2::ORIGIN).unwrap();
        assert!(hi - lo < PI && hi - lo > 0.0);
        assert!(disc_at(0.5, 0.0, 1.0).angular_extent(Point2::ORIGIN).is_none());
    }

    #[test]
    fn support_membership() {
        let omni = RadialSupport::omni(100.0).unwrap();
        assert!(omni.contains(Point2::new(100.0, 0.0)));
        assert!(!omni.contains(Point2::new(100.1, 0.0)));
        let sector = RadialSupport::sector(50.0, 0.0, PI / 2.0).unwrap();
        assert!(sector.contains(Point2::new(40.0, 10.0)));
        assert!(!sector.contains(Point2::new(-10.0, 0.0)));
        assert!(sector.contains(Point2::ORIGIN));
        let mut radii = vec![10.0; 360];
        radii[90] = 30.0;
        let pw = RadialSupport::piecewise(radii).unwrap();
        assert_eq!(pw.r_max_at(PI / 2.0), 30.0);
        assert!(pw.contains(Point2::new(0.0, 25.0)));
        assert!(!pw.contains(Point2::new(25.0, 0.0)));
        assert_eq!(pw.max_range(), 30.0);
    }

    fn arb_shape() -> impl Strategy<Value = ConvexShape> {
        prop_oneof![
            (0.1f64..5.0).prop_map(|r| ConvexShape::disc(r).unwrap()),
            (0.2f64..8.0, 0.2f64..4.0, -PI..PI).prop_map(|(l, w, h)| ConvexShape::rect(l, w, h).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn blocked_when_midpoint_inside(
            shape in arb_shape(),
            ax in -20.0f64..20.0, ay in -20.0f64..20.0,
            bx in -20.0f64..20.0, by in -20.0f64..20.0,
        ) {
            let seg = Segment::new(Point2::new(ax, ay), Point2::new(bx, by));
            let obj = PlacedShape::new(seg.midpoint(), shape);
            prop_assume!(seg.length() > 1e-3);
            prop_assert!(segment_shape_intersects(&seg, &obj, seg.b));
        }

        #[test]
        fn dilation_area_is_monotone(l1 in 0.0f64..100.0, dl in 0.0f64..50.0,
                                     r1 in 0.0f64..5.0, dr in 0.0f64..5.0) {
            let a = minkowski_segment_dilation_area(l1, &ConvexShape::disc(r1).unwrap()).unwrap();
            let b = minkowski_segment_dilation_area(l1 + dl, &ConvexShape::disc(r1).unwrap()).unwrap();
            let c = minkowski_segment_dilation_area(l1, &ConvexShape::disc(r1 + dr).unwrap()).unwrap();
            prop_assert!(b >= a && c >= a);
        }

        #[test]
        fn boundary_samples_follow_translation(shape in arb_shape(),
                                               dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
            let base = PlacedShape::new(Point2::ORIGIN, shape);
            let moved = PlacedShape::new(Point2::new(dx, dy), shape);
            for (p, q) in base.boundary_samples(16).unwrap().iter()
                .zip(moved.boundary_samples(16).unwrap())
            {
                prop_assert!((*p + Point2::new(dx, dy)).distance(q) < 1e-9);
            }
        }

        #[test]
        fn exact_predicate_agrees_with_clipping_oracle(
            heading in -PI..PI, cx in -6.0f64..6.0, cy in -3.0f64..3.0,
            bx in 5.0f64..15.0, by in -3.0f64..3.0,
        ) {
            let car = car_at(cx, cy, heading);
            let seg = Segment::new(Point2::new(-10.0, 0.3), Point2::new(bx, by));
            prop_assume!(!car.contains(seg.a) && !car.contains(seg.b));
            // Sampled oracle, trusted only away from grazing configurations.
            let n = 20_000;
            let step = seg.length() / n as f64;
            let dists: Vec<f64> = (0..=n).map(|i| car.distance_to(seg.at(i as f64 / n as f64))).collect();
            let core = PlacedShape::new(car.center, ConvexShape::Rect {
                half_length: 2.4 - 1e-3, half_width: 0.9 - 1e-3, heading });
            let sure_hit = (0..=n).any(|i| core.distance_to(seg.at(i as f64 / n as f64)) == 0.0);
            let sure_miss = dists.iter().all(|d| *d > step);
            let got = segment_shape_intersects(&seg, &car, seg.b);
            if sure_hit { prop_assert!(got); }
            if sure_miss { prop_assert!(!got); }
        }
    }
}
