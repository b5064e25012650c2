//! Convex domains and the point clouds that discretize them.
//!
//! A cloud consists of the origin-anchored Cartesian lattice points strictly
//! inside the domain plus a dense sampling of the boundary curve. Interior
//! points always occupy ids `0..n_interior`; boundary points follow.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::CellGrid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by a quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn diameter(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Perimeter of the half disc; boundary sample counts are scaled relative to it.
pub const HALF_DISC_PERIMETER: f64 = PI + 2.0;

type CurveFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;
type MembershipFn = Arc<dyn Fn(Point) -> bool + Send + Sync>;

/// A convex domain described by a closed parametric boundary curve and a
/// membership predicate.
#[derive(Clone)]
pub struct CustomDomain {
    name: String,
    curve: CurveFn,
    contains: MembershipFn,
    bbox: BoundingBox,
    samples: Vec<Point>,
    perimeter: f64,
}

const CUSTOM_SAMPLES: usize = 4096;

impl CustomDomain {
    /// `curve` maps `t ∈ [0, 1)` onto the boundary (closed, `curve(1) == curve(0)`).
    /// `contains` must return true exactly for points of the open domain.
    pub fn new(
        name: impl Into<String>,
        curve: impl Fn(f64) -> Point + Send + Sync + 'static,
        contains: impl Fn(Point) -> bool + Send + Sync + 'static,
        bbox: BoundingBox,
    ) -> Result<Self> {
        let samples: Vec<Point> = (0..CUSTOM_SAMPLES)
            .map(|k| curve(k as f64 / CUSTOM_SAMPLES as f64))
            .collect();
        if let Some(p) = samples.iter().find(|p| !bbox.contains(**p)) {
            return Err(Error::InvalidParameter(format!(
                "boundary point ({}, {}) outside the declared bounding box",
                p.x, p.y
            )));
        }
        let perimeter = samples
            .iter()
            .zip(samples.iter().cycle().skip(1))
            .map(|(a, b)| a.dist(*b))
            .sum();
        Ok(Self {
            name: name.into(),
            curve: Arc::new(curve),
            contains: Arc::new(contains),
            bbox,
            samples,
            perimeter,
        })
    }

    fn distance_to_boundary(&self, p: Point) -> f64 {
        let n = self.samples.len();
        let (k, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, q)| (k, q.dist(p)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        // golden-section refinement on the two parameter cells around the best sample
        let dt = 1.0 / n as f64;
        let t_mid = k as f64 * dt;
        let f = |t: f64| (self.curve)(t.rem_euclid(1.0)).dist(p);
        let (mut a, mut b) = (t_mid - dt, t_mid + dt);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        fc.min(fd).min(self.samples[k].dist(p))
    }
}

impl fmt::Debug for CustomDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDomain")
            .field("name", &self.name)
            .field("bbox", &self.bbox)
            .field("perimeter", &self.perimeter)
            .finish()
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter("polygon needs at least 3 vertices".into()));
        }
        let signed_area: f64 = edges(&vertices).map(|(a, b)| a.x * b.y - b.x * a.y).sum();
        if signed_area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if cross(b - a, c - b) <= 0.0 {
                return Err(Error::InvalidParameter("polygon is not strictly convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned square `[x0, x0 + side] × [y0, y0 + side]`.
    pub fn square(x0: f64, y0: f64, side: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x0 + side, y0),
            Point::new(x0 + side, y0 + side),
            Point::new(x0, y0 + side),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn perimeter(&self) -> f64 {
        edges(&self.vertices).map(|(a, b)| a.dist(b)).sum()
    }
}

fn edges(v: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    v.iter().copied().zip(v.iter().copied().cycle().skip(1)).take(v.len())
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

#[derive(Clone, Debug)]
pub enum Domain {
    /// Open unit disc centred at the origin.
    UnitDisc,
    /// The part of the unit disc with `x > 0`.
    HalfDisc,
    Polygon(ConvexPolygon),
    Custom(CustomDomain),
}

impl Domain {
    pub fn name(&self) -> String {
        match self {
            Domain::UnitDisc => "full-disc".into(),
            Domain::HalfDisc => "half-disc".into(),
            Domain::Polygon(_) => "polygon".into(),
            Domain::Custom(c) => c.name.clone(),
        }
    }

    /// Membership in the open domain.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Domain::UnitDisc => p.norm_sq() < 1.0,
            Domain::HalfDisc => p.x > 0.0 && p.norm_sq() < 1.0,
            Domain::Polygon(poly) => edges(&poly.vertices).all(|(a, b)| cross(b - a, p - a) > 0.0),
            Domain::Custom(c) => (c.contains)(p),
        }
    }

    /// Boundary curve, `t ∈ [0, 1)`. The half disc runs down the diameter
    /// from `(0, 1)` and then back up along the arc, both pieces at unit
    /// speed in arclength.
    pub fn boundary_point(&self, t: f64) -> Point {
        let t = t.rem_euclid(1.0);
        match self {
            Domain::UnitDisc => {
                let a = 2.0 * PI * t;
                Point::new(a.cos(), a.sin())
            }
            Domain::HalfDisc => {
                let s = t * HALF_DISC_PERIMETER;
                if s < 2.0 {
                    Point::new(0.0, 1.0 - s)
                } else {
                    let a = -FRAC_PI_2 + (s - 2.0);
                    Point::new(a.cos().max(0.0), a.sin())
                }
            }
            Domain::Polygon(poly) => {
                let mut s = t * poly.perimeter();
                for (a, b) in edges(&poly.vertices) {
                    let len = a.dist(b);
                    if s <= len {
                        return a + (b - a) * (s / len);
                    }
                    s -= len;
                }
                poly.vertices[0]
            }
            Domain::Custom(c) => (c.curve)(t),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Domain::UnitDisc => 2.0 * PI,
            Domain::HalfDisc => HALF_DISC_PERIMETER,
            Domain::Polygon(poly) => poly.perimeter(),
            Domain::Custom(c) => c.perimeter,
        }
    }

    pub fn bbox(&self) -> BoundingBox {
        match self {
            Domain::UnitDisc => BoundingBox {
                min: Point::new(-1.0, -1.0),
                max: Point::new(1.0, 1.0),
            },
            Domain::HalfDisc => BoundingBox {
                min: Point::new(0.0, -1.0),
                max: Point::new(1.0, 1.0),
            },
            Domain::Polygon(poly) => {
                let v = &poly.vertices;
                let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&Point) -> f64| {
                    v.iter().map(pick).fold(init, f)
                };
                BoundingBox {
                    min: Point::new(
                        fold(f64::min, f64::INFINITY, |p| p.x),
                        fold(f64::min, f64::INFINITY, |p| p.y),
                    ),
                    max: Point::new(
                        fold(f64::max, f64::NEG_INFINITY, |p| p.x),
                        fold(f64::max, f64::NEG_INFINITY, |p| p.y),
                    ),
                }
            }
            Domain::Custom(c) => c.bbox,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::UnitDisc | Domain::HalfDisc => 2.0,
            _ => self.bbox().diameter(),
        }
    }

    /// Area of the domain (closed form where available, polygon shoelace,
    /// or the boundary-sample polygon for custom domains).
    pub fn area(&self) -> f64 {
        match self {
            Domain::UnitDisc => PI,
            Domain::HalfDisc => FRAC_PI_2,
            Domain::Polygon(poly) => shoelace(&poly.vertices),
            Domain::Custom(c) => shoelace(&c.samples),
        }
    }

    /// Euclidean distance from `p` to the boundary curve.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        match self {
            Domain::UnitDisc => (1.0 - p.norm()).abs(),
            Domain::HalfDisc => {
                let top = Point::new(0.0, 1.0);
                let bottom = Point::new(0.0, -1.0);
                let to_diameter = segment_distance(p, top, bottom);
                let to_arc = if p.x >= 0.0 {
                    (1.0 - p.norm()).abs()
                } else {
                    p.dist(top).min(p.dist(bottom))
                };
                to_diameter.min(to_arc)
            }
            Domain::Polygon(poly) => edges(&poly.vertices)
                .map(|(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
            Domain::Custom(c) => c.distance_to_boundary(p),
        }
    }
}

fn shoelace(v: &[Point]) -> f64 {
    0.5 * edges(v).map(|(a, b)| cross(a, b)).sum::<f64>().abs()
}

/// Relative tolerance (times the domain diameter) under which a lattice point
/// counts as lying on the boundary.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// Lattice points closer to the boundary than this multiple of the boundary
/// sample spacing are left out of the cloud. A quarter-plane cone whose apex
/// sits at distance `d` from the boundary cuts off an arc of length at least
/// `2d`, so any clearance above one half guarantees a boundary sample in every
/// quadrant.
pub const BOUNDARY_CLEARANCE: f64 = 0.75;

/// Number of boundary samples for interior spacing `h`: the half-disc count
/// `4 / h^{3/2}` scaled by relative perimeter.
pub fn boundary_sample_count(domain: &Domain, h: f64) -> usize {
    let rel = domain.perimeter() / HALF_DISC_PERIMETER;
    (rel * 4.0 / h.powf(1.5)).ceil() as usize
}

/// A neighbour returned by a ball query, in polar coordinates relative to an axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub r: f64,
    /// Angle in `[0, 2π)` measured counter-clockwise from the axis.
    pub phi: f64,
}

#[derive(Clone, Debug)]
pub struct PointCloud {
    domain: Domain,
    points: Vec<Point>,
    n_interior: usize,
    h: f64,
    h_boundary: f64,
    index: CellGrid,
}

impl PointCloud {
    /// Lattice interior plus a boundary ring of `boundary_sample_count` points.
    /// Lattice points within `BOUNDARY_CLEARANCE` sample spacings of the
    /// boundary are dropped.
    pub fn build(domain: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing h must be positive, got {h}")));
        }
        let bbox = domain.bbox();
        let snap = BOUNDARY_SNAP * domain.diameter();
        let (i0, i1) = ((bbox.min.x / h).floor() as i64, (bbox.max.x / h).ceil() as i64);
        let (j0, j1) = ((bbox.min.y / h).floor() as i64, (bbox.max.y / h).ceil() as i64);

        let m = boundary_sample_count(domain, h).max(3);
        let clearance = BOUNDARY_CLEARANCE * domain.perimeter() / m as f64;
        let mut interior = Vec::new();
        let mut on_boundary = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let p = Point::new(i as f64 * h, j as f64 * h);
                if !bbox.contains(p) {
                    continue;
                }
                let d = domain.distance_to_boundary(p);
                if d <= snap {
                    on_boundary.push(p);
                } else if d >= clearance && domain.contains(p) {
                    interior.push(p);
                }
            }
        }
        if interior.is_empty() {
            return Err(Error::DegenerateCloud(format!(
                "no lattice point with spacing {h} lies inside {}",
                domain.name()
            )));
        }

        let mut boundary: Vec<Point> =
            (0..m).map(|k| domain.boundary_point(k as f64 / m as f64)).collect();
        for p in on_boundary {
            if boundary.iter().all(|q| q.dist(p) > snap) {
                boundary.push(p);
            }
        }
        Self::from_parts(domain.clone(), interior, boundary, h)
    }

    /// Assembles a cloud from explicit interior and boundary points.
    pub fn from_parts(
        domain: Domain,
        interior: Vec<Point>,
        boundary: Vec<Point>,
        h: f64,
    ) -> Result<Self> {
        if interior.is_empty() && boundary.is_empty() {
            return Err(Error::DegenerateCloud("cloud has no points".into()));
        }
        let n_interior = interior.len();
        let mut points = interior;
        points.extend(boundary);
        let cell = h.max(domain.diameter() / 4096.0);
        let index = CellGrid::new(&points, cell);
        let mut cloud = Self {
            domain,
            points,
            n_interior,
            h,
            h_boundary: f64::NAN,
            index,
        };
        cloud.h_boundary = if cloud.n_boundary() > 0 {
            let probes = (8 * cloud.n_boundary()).max(1000);
            cloud.boundary_resolution(probes)
        } else {
            f64::INFINITY
        };
        Ok(cloud)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Boundary resolution measured by probing the boundary curve.
    pub fn h_boundary(&self) -> f64 {
        self.h_boundary
    }

    /// The constant `C` in `h_B = C · h^{3/2}`.
    pub fn boundary_constant(&self) -> f64 {
        self.h_boundary / self.h.powf(1.5)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_boundary(&self) -> usize {
        self.points.len() - self.n_interior
    }

    pub fn point(&self, id: usize) -> Point {
        self.points[id]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        id >= self.n_interior
    }

    pub fn interior_ids(&self) -> std::ops::Range<usize> {
        0..self.n_interior
    }

    pub fn boundary_ids(&self) -> std::ops::Range<usize> {
        self.n_interior..self.points.len()
    }

    /// All points `y ≠ x0` with `|y − x0| ≤ delta`, sorted by id, with polar
    /// coordinates relative to `axis` (a unit vector).
    pub fn neighbors_in_ball(&self, x0: usize, delta: f64, axis: Point) -> Vec<Neighbor> {
        let center = self.points[x0];
        let mut ids = self.index.within(&self.points, center, delta);
        ids.retain(|&id| id != x0);
        ids.sort_unstable();
        ids.into_iter()
            .map(|id| {
                let d = self.points[id] - center;
                let phi = d.dot(axis.perp()).atan2(d.dot(axis)).rem_euclid(2.0 * PI);
                Neighbor { id, r: d.norm(), phi }
            })
            .collect()
    }

    /// Ids within `delta` of an arbitrary location, sorted.
    pub fn ids_within(&self, p: Point, delta: f64) -> Vec<usize> {
        let mut ids = self.index.within(&self.points, p, delta);
        ids.sort_unstable();
        ids
    }

    /// Distance to the nearest cloud point and every id attaining it.
    pub fn nearest(&self, p: Point) -> (f64, Vec<usize>) {
        self.index.nearest(&self.points, p, |_| true)
    }

    /// Like [`nearest`](Self::nearest), restricted to boundary points.
    pub fn nearest_boundary(&self, p: Point) -> (f64, Vec<usize>) {
        let n = self.n_interior;
        self.index.nearest(&self.points, p, |id| id >= n)
    }

    fn boundary_resolution(&self, n_probe: usize) -> f64 {
        (0..n_probe)
            .map(|k| {
                let q = self.domain.boundary_point((k as f64 + 0.5) / n_probe as f64);
                self.nearest_boundary(q).0
            })
            .fold(0.0, f64::max)
    }

    /// Covering radius of the cloud (`h_eff`) over quasi-random interior probes
    /// and boundary resolution (`h_B`) over equally spaced boundary probes.
    pub fn resolution_metrics(&self, n_probe: usize) -> Result<(f64, f64)> {
        if n_probe < 100 {
            return Err(Error::InvalidParameter(format!("n_probe must be at least 100, got {n_probe}")));
        }
        let bbox = self.domain.bbox();
        let span = bbox.max - bbox.min;
        let mut h_eff: f64 = 0.0;
        let mut accepted = 0;
        let mut k = 1u64;
        while accepted < n_probe {
            let q = bbox.min + Point::new(span.x * halton(k, 2), span.y * halton(k, 3));
            k += 1;
            if self.domain.contains(q) {
                accepted += 1;
                h_eff = h_eff.max(self.nearest(q).0);
            }
            if k > 1000 * n_probe as u64 {
                break;
            }
        }
        let h_b = if self.n_boundary() > 0 {
            self.boundary_resolution(n_probe)
        } else {
            f64::INFINITY
        };
        Ok((h_eff, h_b))
    }

    /// CSV with columns `id,x,y,is_boundary`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,x,y,is_boundary")?;
        for (id, p) in self.points.iter().enumerate() {
            writeln!(w, "{id},{:.17e},{:.17e},{}", p.x, p.y, u8::from(self.is_boundary(id)))?;
        }
        Ok(())
    }
}

/// Radical inverse in the given base (Halton low-discrepancy sequence).
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ball(cloud: &PointCloud, x0: usize, delta: f64) -> Vec<usize> {
        let c = cloud.point(x0);
        (0..cloud.len())
            .filter(|&id| id != x0 && cloud.point(id).dist(c) <= delta)
            .collect()
    }

    #[test]
    fn half_disc_interior_matches_lattice_enumeration() {
        let h = 0.125;
        let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
        // independent count: lattice (i h, j h) with i ≥ 1, i² + j² < 64 and
        // distance min(x, 1 - |p|, ...) to the boundary at least the clearance
        let m = (4.0 / h.powf(1.5)).ceil();
        let clearance = BOUNDARY_CLEARANCE * HALF_DISC_PERIMETER / m;
        let (mut count, mut lattice) = (0, 0);
        for i in 1..=8i64 {
            for j in -8..=8i64 {
                if i * i + j * j < 64 {
                    lattice += 1;
                    let (x, y) = (i as f64 * h, j as f64 * h);
                    let r = x.hypot(y);
                    let to_diameter = if y.abs() <= 1.0 { x } else { x.hypot(y.abs() - 1.0) };
                    if (1.0 - r).min(to_diameter) >= clearance {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(lattice, 89);
        assert_eq!(cloud.n_interior(), count);
        for id in cloud.interior_ids() {
            assert!(Domain::HalfDisc.contains(cloud.point(id)));
        }
    }

    #[test]
    fn boundary_points_lie_on_the_curve() {
        let d = Domain::HalfDisc;
        let cloud = PointCloud::build(&d, 0.0625).unwrap();
        for id in cloud.boundary_ids() {
            assert!(d.distance_to_boundary(cloud.point(id)) <= 1e-12 * d.diameter());
        }
        assert!(cloud.h_boundary() <= cloud.h());
        assert!(cloud.n_boundary() >= boundary_sample_count(&d, 0.0625));
    }

    #[test]
    fn boundary_ratio_shrinks_under_refinement() {
        let ratios: Vec<f64> = (3..=6)
            .map(|k| {
                let c = PointCloud::build(&Domain::HalfDisc, 0.5f64.powi(k)).unwrap();
                c.h_boundary() / c.h()
            })
            .collect();
        for w in ratios.windows(2) {
            assert!(w[1] < w[0], "{ratios:?}");
        }
    }

    #[test]
    fn tiny_domain_is_degenerate() {
        let square = Domain::Polygon(ConvexPolygon::square(0.1, 0.1, 0.2).unwrap());
        let err = PointCloud::build(&square, 10.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateCloud(_)));
        assert!(err.to_string().contains("degenerate cloud"));
    }

    #[test]
    fn build_is_deterministic() {
        let a = PointCloud::build(&Domain::HalfDisc, 0.125).unwrap();
        let b = PointCloud::build(&Domain::HalfDisc, 0.125).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn lattice_ball_has_axis_and_diagonal_neighbours() {
        let h = 0.0625;
        let cloud = PointCloud::build(&Domain::UnitDisc, h).unwrap();
        let x0 = (0..cloud.n_interior())
            .find(|&id| cloud.point(id).norm() < 1e-14)
            .unwrap();
        let nb = cloud.neighbors_in_ball(x0, 1.5 * h, Point::new(1.0, 0.0));
        assert_eq!(nb.len(), 8);
        let mut phis: Vec<f64> = nb.iter().map(|n| n.phi / (PI / 4.0)).collect();
        phis.sort_by(f64::total_cmp);
        for (k, p) in phis.iter().enumerate() {
            assert!((p - k as f64).abs() < 1e-12);
        }
        assert!(cloud.neighbors_in_ball(x0, 0.9 * h, Point::new(1.0, 0.0)).is_empty());
    }

    #[test]
    fn ball_query_matches_brute_force() {
        let cloud = PointCloud::build(&Domain::HalfDisc, 0.0625).unwrap();
        let n = cloud.len();
        for k in 0..100u64 {
            let x0 = ((halton(k + 1, 2) * n as f64) as usize).min(n - 1);
            let delta = 0.01 + 0.4 * halton(k + 1, 3);
            let got: Vec<usize> = cloud
                .neighbors_in_ball(x0, delta, Point::new(0.0, 1.0))
                .iter()
                .map(|nb| nb.id)
                .collect();
            assert_eq!(got, brute_ball(&cloud, x0, delta));
        }
    }

    #[test]
    fn single_point_cloud_covering_radius_is_diameter_scale() {
        let cloud =
            PointCloud::from_parts(Domain::UnitDisc, vec![Point::new(0.0, 0.0)], vec![], 0.5).unwrap();
        let (h_eff, h_b) = cloud.resolution_metrics(400).unwrap();
        assert!(h_eff > 0.9 && h_eff < 1.0, "{h_eff}");
        assert!(h_b.is_infinite());
    }

    #[test]
    fn covering_radius_bounded_and_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 3..=4 {
            let h = 0.5f64.powi(k);
            let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
            let (h_eff, _) = cloud.resolution_metrics(2000).unwrap();
            let m = boundary_sample_count(&Domain::HalfDisc, h) as f64;
            let clearance = BOUNDARY_CLEARANCE * HALF_DISC_PERIMETER / m;
            assert!(h_eff <= h * 2f64.sqrt() / 2.0 + clearance + 1e-9, "h_eff {h_eff}");
            assert!(h_eff < prev);
            prev = h_eff;
        }
    }

    #[test]
    fn custom_domain_distance_matches_disc() {
        let c = CustomDomain::new(
            "ellipse-as-disc",
            |t| {
                let a = 2.0 * PI * t;
                Point::new(a.cos(), a.sin())
            },
            |p| p.norm_sq() < 1.0,
            Domain::UnitDisc.bbox(),
        )
        .unwrap();
        let d = Domain::Custom(c);
        for p in [Point::new(0.3, 0.1), Point::new(-0.5, 0.7), Point::new(0.0, 0.0)] {
            let exact = Domain::UnitDisc.distance_to_boundary(p);
            assert!((d.distance_to_boundary(p) - exact).abs() < 1e-9);
        }
        assert!((d.perimeter() - 2.0 * PI).abs() < 1e-5);
    }
}
