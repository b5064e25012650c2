//! Wide-stencil directional differences on a point cloud.
//!
//! For every interior point and every direction ν of a finite direction set,
//! one neighbour is picked in each quadrant of the frame (ν, ν⊥), the one
//! best aligned with the line through x₀ along ν. From these four points we
//! build a monotone second difference (coefficients `a`) and two one-sided
//! first differences (coefficients `b`) used by the upwind gradient.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointCloud};

/// Below this relative size a frame coordinate is treated as exactly zero.
const AXIS_SNAP: f64 = 1e-12;
/// `|sin φ|` threshold for the collinear branch.
const ALIGN_TOL: f64 = 1e-9;
/// Relative threshold for vanishing coefficient denominators.
const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSet {
    pub h: f64,
    pub d_theta: f64,
    /// Number of orthogonal pairs; `n_pairs · dθ = π/2`.
    pub n_pairs: usize,
    /// Directions at angles `k·dθ`, `k = 1..=2·n_pairs`. Entry `j` and entry
    /// `j + n_pairs` form the orthogonal pair (ν_j, ν_j⊥).
    pub directions: Vec<Point>,
    pub delta: f64,
}

/// Search radius `h(1 + cos(dθ/2)cot(dθ/2) + sin(dθ/2))`.
pub fn search_radius(h: f64, d_theta: f64) -> f64 {
    let half = d_theta / 2.0;
    h * (1.0 + half.cos() / half.tan() + half.sin())
}

fn unit_at(angle: f64) -> Point {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    Point::new(snap(angle.cos()), snap(angle.sin()))
}

/// Target angular resolution `2π h^{1/4}`, capped at π/4 and rounded so that
/// π/2 is an exact multiple.
pub fn make_direction_set(h: f64) -> Result<DirectionSet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing h must be positive, got {h}")));
    }
    let target = (2.0 * PI * h.powf(0.25)).min(FRAC_PI_4);
    DirectionSet::with_pairs(h, (FRAC_PI_2 / target).ceil() as usize)
}

impl DirectionSet {
    /// Direction set with exactly `n_pairs` orthogonal pairs, `dθ = π/(2·n_pairs)`.
    pub fn with_pairs(h: f64, n_pairs: usize) -> Result<DirectionSet> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing h must be positive, got {h}")));
        }
        if n_pairs < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 direction pairs, got {n_pairs}"
            )));
        }
        let d_theta = FRAC_PI_2 / n_pairs as f64;
        let directions = (1..=2 * n_pairs).map(|k| unit_at(k as f64 * d_theta)).collect();
        Ok(DirectionSet {
            h,
            d_theta,
            n_pairs,
            directions,
            delta: search_radius(h, d_theta),
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index pairs `(j, j + n_pairs)` of orthogonal directions.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_pairs).map(move |j| (j, j + self.n_pairs))
    }
}

/// A neighbour expressed in the (ν, ν⊥) frame of a stencil centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FramePoint {
    pub id: usize,
    /// `r cos φ`
    pub c: f64,
    /// `r sin φ`
    pub s: f64,
}

impl FramePoint {
    pub fn r(&self) -> f64 {
        self.c.hypot(self.s)
    }

    pub fn phi(&self) -> f64 {
        self.s.atan2(self.c).rem_euclid(2.0 * PI)
    }

    fn sin_sq(&self) -> f64 {
        let r2 = self.c * self.c + self.s * self.s;
        self.s * self.s / r2
    }
}

/// Frame coordinates of `p` seen from `center`, with near-zero components snapped.
fn to_frame(id: usize, center: Point, p: Point, nu: Point) -> FramePoint {
    let d = p - center;
    let r = d.norm();
    let snap = |v: f64| if v.abs() <= AXIS_SNAP * r { 0.0 } else { v };
    FramePoint {
        id,
        c: snap(d.dot(nu)),
        s: snap(d.dot(nu.perp())),
    }
}

/// Quadrant 0..4 of a frame point. Half-open quadrants: φ = 0 belongs to the
/// first, π/2 to the second, π to the third and 3π/2 to the fourth.
pub fn quadrant(c: f64, s: f64) -> usize {
    match (c.partial_cmp(&0.0), s.partial_cmp(&0.0)) {
        (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Equal)) => 0,
        (Some(std::cmp::Ordering::Equal), Some(std::cmp::Ordering::Greater)) => 1,
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Equal)) => 2,
        (Some(std::cmp::Ordering::Equal), Some(std::cmp::Ordering::Less)) => 3,
        _ if c > 0.0 && s > 0.0 => 0,
        _ if c < 0.0 && s > 0.0 => 1,
        _ if c < 0.0 && s < 0.0 => 2,
        _ => 3,
    }
}

fn better(candidate: &FramePoint, incumbent: &FramePoint) -> bool {
    let (a, b) = (candidate.sin_sq(), incumbent.sin_sq());
    if a < b - 1e-12 {
        return true;
    }
    if a > b + 1e-12 {
        return false;
    }
    let (ra, rb) = (candidate.r(), incumbent.r());
    if ra < rb * (1.0 - 1e-12) {
        return true;
    }
    if ra > rb * (1.0 + 1e-12) {
        return false;
    }
    candidate.id < incumbent.id
}

/// Best-aligned neighbour per quadrant among `candidates` (ids in the ball).
fn select_in_frame(
    cloud: &PointCloud,
    x0: usize,
    nu: Point,
    candidates: &[usize],
) -> [Option<FramePoint>; 4] {
    let center = cloud.point(x0);
    let mut best: [Option<FramePoint>; 4] = [None; 4];
    for &id in candidates {
        if id == x0 {
            continue;
        }
        let fp = to_frame(id, center, cloud.point(id), nu);
        if fp.c == 0.0 && fp.s == 0.0 {
            continue;
        }
        let q = quadrant(fp.c, fp.s);
        match &best[q] {
            Some(inc) if !better(&fp, inc) => {}
            _ => best[q] = Some(fp),
        }
    }
    best
}

/// Selects the four quadrant neighbours of `x0` for direction `nu` within radius `delta`.
pub fn select_neighbors(
    cloud: &PointCloud,
    x0: usize,
    nu: Point,
    delta: f64,
) -> Result<[FramePoint; 4]> {
    let candidates = cloud.ids_within(cloud.point(x0), delta);
    complete(select_in_frame(cloud, x0, nu, &candidates), x0, usize::MAX, delta)
}

fn complete(
    sel: [Option<FramePoint>; 4],
    point: usize,
    direction: usize,
    radius: f64,
) -> Result<[FramePoint; 4]> {
    let mut out = [FramePoint { id: 0, c: 0.0, s: 0.0 }; 4];
    for (q, s) in sel.iter().enumerate() {
        out[q] = s.ok_or(Error::IncompleteStencil {
            point,
            direction,
            quadrant: q + 1,
            radius,
        })?;
    }
    Ok(out)
}

fn is_aligned(p: &[FramePoint; 4]) -> bool {
    p[0].s.abs() < ALIGN_TOL * p[0].r() && p[2].s.abs() < ALIGN_TOL * p[2].r()
}

/// Second-difference coefficients `a₁..a₄` and the collinear flag.
///
/// When the first- and third-quadrant neighbours lie on the line x₀ + tν the
/// nonuniform three-point formula is used; otherwise the closed form that
/// reproduces `u_νν` exactly for quadratics.
pub fn d2_coefficients(p: &[FramePoint; 4]) -> Result<([f64; 4], bool)> {
    if is_aligned(p) {
        let (rp, rm) = (p[0].r(), p[2].r());
        let a = [2.0 / (rp * (rp + rm)), 0.0, 2.0 / (rm * (rp + rm)), 0.0];
        return Ok((a, true));
    }
    let [c1, c2, c3, c4] = [p[0].c, p[1].c, p[2].c, p[3].c];
    let [s1, s2, s3, s4] = [p[0].s, p[1].s, p[2].s, p[3].s];
    let p23 = c3 * s2 - c2 * s3;
    let p14 = c1 * s4 - c4 * s1;
    let denom = p23 * (c1 * c1 * s4 - c4 * c4 * s1) - p14 * (c3 * c3 * s2 - c2 * c2 * s3);
    let scale = p.iter().map(FramePoint::r).fold(0.0, f64::max).powi(5);
    if !(denom.abs() >= DEGENERATE_TOL * scale) {
        return Err(Error::DegenerateStencil {
            point: usize::MAX,
            direction: usize::MAX,
            reason: format!("second-difference denominator {denom:.3e}"),
        });
    }
    let a = [
        2.0 * s4 * p23 / denom,
        2.0 * s3 * p14 / denom,
        -2.0 * s2 * p14 / denom,
        -2.0 * s1 * p23 / denom,
    ];
    Ok((a, false))
}

/// One-sided gradient coefficients `((b₁, b₄), (b₂, b₃))`.
///
/// The pair on quadrants 1 and 4 approximates `−∂u/∂ν`, the pair on quadrants
/// 2 and 3 approximates `+∂u/∂ν`.
pub fn grad_coefficients(p: &[FramePoint; 4]) -> Result<([f64; 2], [f64; 2])> {
    let [c1, c2, c3, c4] = [p[0].c, p[1].c, p[2].c, p[3].c];
    let [s1, s2, s3, s4] = [p[0].s, p[1].s, p[2].s, p[3].s];
    let r_max = p.iter().map(FramePoint::r).fold(0.0, f64::max);
    let fwd_den = s1 * c4 - c1 * s4;
    let bwd_den = s2 * c3 - c2 * s3;
    let tol = DEGENERATE_TOL * r_max * r_max;
    if !(fwd_den.abs() >= tol && bwd_den.abs() >= tol) {
        return Err(Error::DegenerateStencil {
            point: usize::MAX,
            direction: usize::MAX,
            reason: format!("gradient denominators {fwd_den:.3e}, {bwd_den:.3e}"),
        });
    }
    if is_aligned(p) {
        return Ok(([-1.0 / p[0].r(), 0.0], [0.0, -1.0 / p[2].r()]));
    }
    Ok((
        [s4 / fwd_den, -s1 / fwd_den],
        [-s3 / bwd_den, s2 / bwd_den],
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionalStencil {
    pub nu: Point,
    pub points: [FramePoint; 4],
    pub a: [f64; 4],
    /// `(b₁, b₄)` acting on quadrants 1 and 4.
    pub b_fwd: [f64; 2],
    /// `(b₂, b₃)` acting on quadrants 2 and 3.
    pub b_bwd: [f64; 2],
    pub aligned: bool,
}

impl DirectionalStencil {
    pub fn from_points(nu: Point, points: [FramePoint; 4]) -> Result<Self> {
        let (a, aligned) = d2_coefficients(&points)?;
        let (b_fwd, b_bwd) = grad_coefficients(&points)?;
        Ok(Self {
            nu,
            points,
            a,
            b_fwd,
            b_bwd,
            aligned,
        })
    }

    pub fn ids(&self) -> [usize; 4] {
        [self.points[0].id, self.points[1].id, self.points[2].id, self.points[3].id]
    }

    /// Polar coordinates `(r_j, φ_j)` of the four neighbours.
    pub fn polar(&self) -> [(f64, f64); 4] {
        self.points.map(|p| (p.r(), p.phi()))
    }

    /// `Σ a_j (u(x_j) − u(x₀))`
    #[inline]
    pub fn second_diff(&self, u: &[f64], u0: f64) -> f64 {
        let mut acc = 0.0;
        for (p, a) in self.points.iter().zip(self.a) {
            acc += a * (u[p.id] - u0);
        }
        acc
    }

    /// `b₁(u₁ − u₀) + b₄(u₄ − u₀)`, approximating `−∂u/∂ν`.
    #[inline]
    pub fn forward_pair(&self, u: &[f64], u0: f64) -> f64 {
        self.b_fwd[0] * (u[self.points[0].id] - u0) + self.b_fwd[1] * (u[self.points[3].id] - u0)
    }

    /// `b₂(u₂ − u₀) + b₃(u₃ − u₀)`, approximating `+∂u/∂ν`.
    #[inline]
    pub fn backward_pair(&self, u: &[f64], u0: f64) -> f64 {
        self.b_bwd[0] * (u[self.points[1].id] - u0) + self.b_bwd[1] * (u[self.points[2].id] - u0)
    }

    /// `Σ a_j`, the derivative of the second difference with respect to `−u₀`.
    pub fn a_sum(&self) -> f64 {
        self.a.iter().sum()
    }

    /// Derivatives of the two gradient pairs with respect to `u₀`.
    pub fn b_sums(&self) -> (f64, f64) {
        (-(self.b_fwd[0] + self.b_fwd[1]), -(self.b_bwd[0] + self.b_bwd[1]))
    }
}

/// Precomputed stencils for every interior point of a cloud.
#[derive(Clone, Debug)]
pub struct StencilTable {
    dirs: DirectionSet,
    n_interior: usize,
    stencils: Vec<DirectionalStencil>,
    gradient: Vec<[DirectionalStencil; 2]>,
    build_time: Duration,
    negative_coefficients: usize,
}

const E1: Point = Point::new(1.0, 0.0);
const E2: Point = Point::new(0.0, 1.0);

fn point_stencils(
    cloud: &PointCloud,
    dirs: &DirectionSet,
    x0: usize,
) -> Result<(Vec<DirectionalStencil>, [DirectionalStencil; 2])> {
    let candidates = cloud.ids_within(cloud.point(x0), dirs.delta);
    let make = |nu: Point, direction: usize| -> Result<DirectionalStencil> {
        let sel = select_in_frame(cloud, x0, nu, &candidates);
        let pts = complete(sel, x0, direction, dirs.delta)?;
        DirectionalStencil::from_points(nu, pts).map_err(|e| match e {
            Error::DegenerateStencil { reason, .. } => Error::DegenerateStencil {
                point: x0,
                direction,
                reason,
            },
            other => other,
        })
    };
    let per_dir = dirs
        .directions
        .iter()
        .enumerate()
        .map(|(k, &nu)| make(nu, k))
        .collect::<Result<Vec<_>>>()?;
    let n = dirs.len();
    let grad = [make(E1, n)?, make(E2, n + 1)?];
    Ok((per_dir, grad))
}

/// Builds stencils for all interior points, in parallel over points.
pub fn build_stencil_table(cloud: &PointCloud, dirs: &DirectionSet) -> Result<StencilTable> {
    let start = Instant::now();
    let per_point = cloud
        .interior_ids()
        .into_par_iter()
        .map(|x0| point_stencils(cloud, dirs, x0))
        .collect::<Result<Vec<_>>>()?;
    let mut stencils = Vec::with_capacity(per_point.len() * dirs.len());
    let mut gradient = Vec::with_capacity(per_point.len());
    for (s, g) in per_point {
        stencils.extend(s);
        gradient.push(g);
    }
    let negative_coefficients = stencils
        .iter()
        .flat_map(|s| s.a)
        .filter(|&a| a < -1e-12)
        .count();
    if negative_coefficients > 0 {
        log::warn!("{negative_coefficients} negative second-difference coefficients; scheme is not monotone");
    }
    Ok(StencilTable {
        dirs: dirs.clone(),
        n_interior: cloud.n_interior(),
        stencils,
        gradient,
        build_time: start.elapsed(),
        negative_coefficients,
    })
}

impl StencilTable {
    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Stencils of interior point `x0`, one per direction of the set.
    pub fn at(&self, x0: usize) -> &[DirectionalStencil] {
        let n = self.dirs.len();
        &self.stencils[x0 * n..(x0 + 1) * n]
    }

    /// Axis stencils `(e₁, e₂)` used by the upwind gradient.
    pub fn gradient_at(&self, x0: usize) -> &[DirectionalStencil; 2] {
        &self.gradient[x0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DirectionalStencil> {
        self.stencils.iter().chain(self.gradient.iter().flatten())
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    /// Number of coefficients `a_j < −1e-12` (zero for a monotone table).
    pub fn negative_coefficients(&self) -> usize {
        self.negative_coefficients
    }

    /// JSON dump of one stencil for inspection.
    pub fn dump_json(&self, cloud: &PointCloud, x0: usize, direction: usize) -> serde_json::Value {
        let s = &self.at(x0)[direction];
        serde_json::json!({
            "point": x0,
            "x": cloud.point(x0),
            "direction": direction,
            "stencil": s,
            "neighbours": s.ids().map(|id| cloud.point(id)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    fn fp(id: usize, r: f64, phi: f64) -> FramePoint {
        FramePoint {
            id,
            c: r * phi.cos(),
            s: r * phi.sin(),
        }
    }

    #[test]
    fn direction_set_is_capped_and_closed_under_perp() {
        let d = make_direction_set(2f64.powi(-8)).unwrap();
        assert_eq!(d.n_pairs, 2);
        assert!((d.d_theta - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(d.len(), 4);
        for (j, k) in d.pairs() {
            let (a, b) = (d.directions[j], d.directions[k]);
            assert!(a.dot(b).abs() < 1e-15);
            assert!((a.perp() - b).norm() < 1e-15);
        }
        let h = 2f64.powi(-8);
        let c = (PI / 8.0).cos();
        let s = (PI / 8.0).sin();
        assert!((d.delta - h * (1.0 + c * c / s + s)).abs() < 1e-15);
    }

    #[test]
    fn direction_count_grows_as_h_shrinks() {
        let mut prev = 0;
        for k in [2, 8, 14, 16, 20, 24, 30] {
            let n = make_direction_set(2f64.powi(-k)).unwrap().n_pairs;
            assert!(n >= prev);
            prev = n;
        }
        assert!(prev > 2);
    }

    #[test]
    fn symmetric_cross_gives_equal_weights() {
        for eps in [0.1, 0.3, 0.7] {
            let pts = [fp(1, 1.0, eps), fp(2, 1.0, PI - eps), fp(3, 1.0, PI + eps), fp(4, 1.0, -eps)];
            let (a, aligned) = d2_coefficients(&pts).unwrap();
            assert!(!aligned);
            let expect = 1.0 / (2.0 * eps.cos().powi(2));
            for aj in a {
                assert!((aj - expect).abs() < 1e-12 * expect);
            }
            let (fwd, _) = grad_coefficients(&pts).unwrap();
            let eb = -1.0 / (2.0 * eps.cos());
            assert!((fwd[0] - eb).abs() < 1e-12 && (fwd[1] - eb).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_points_use_three_point_formula() {
        let h = 0.25;
        let pts = [fp(1, h, 0.0), fp(2, 2.0, 2.0), fp(3, h, PI), fp(4, 1.5, -1.0)];
        let (a, aligned) = d2_coefficients(&pts).unwrap();
        assert!(aligned);
        assert!((a[0] - 1.0 / (h * h)).abs() < 1e-12);
        assert!((a[2] - 1.0 / (h * h)).abs() < 1e-12);
        assert_eq!((a[1], a[3]), (0.0, 0.0));
        let (fwd, bwd) = grad_coefficients(&pts).unwrap();
        assert_eq!(fwd, [-1.0 / h, 0.0]);
        assert_eq!(bwd, [0.0, -1.0 / h]);
    }

    #[test]
    fn quadrant_ties_follow_axis_rule() {
        assert_eq!(quadrant(1.0, 0.0), 0);
        assert_eq!(quadrant(0.0, 1.0), 1);
        assert_eq!(quadrant(-1.0, 0.0), 2);
        assert_eq!(quadrant(0.0, -1.0), 3);
        assert_eq!(quadrant(1.0, -1.0), 3);
        assert_eq!(quadrant(-1.0, 1.0), 1);
    }

    #[test]
    fn nearly_flat_configuration_is_degenerate() {
        // beyond the alignment tolerance but with a vanishing denominator
        let e = 1e-8;
        let pts = [fp(1, 1.0, e), fp(2, 1.0, PI - e), fp(3, 1.0, PI + e), fp(4, 1.0, -e)];
        let err = d2_coefficients(&pts).unwrap_err();
        assert!(err.to_string().contains("degenerate stencil"));
        // a rotated orthogonal cross is fine
        let cross = [fp(1, 1.0, 0.2), fp(2, 1.0, 0.2 + PI / 2.0), fp(3, 1.0, 0.2 + PI), fp(4, 1.0, 0.2 + 1.5 * PI)];
        assert!(d2_coefficients(&cross).is_ok());
    }

    #[test]
    fn lattice_axis_stencil_selects_axis_neighbours() {
        let h = 0.0625;
        let cloud = PointCloud::build(&Domain::UnitDisc, h).unwrap();
        let x0 = cloud.interior_ids().find(|&i| cloud.point(i).norm() < 1e-14).unwrap();
        let sel = select_neighbors(&cloud, x0, E1, 2.0 * h).unwrap();
        let c = cloud.point(x0);
        assert!((cloud.point(sel[0].id) - c - Point::new(h, 0.0)).norm() < 1e-14);
        assert!((cloud.point(sel[2].id) - c - Point::new(-h, 0.0)).norm() < 1e-14);
        let s = DirectionalStencil::from_points(E1, sel).unwrap();
        assert!(s.aligned);
    }

    #[test]
    fn off_lattice_selection_matches_brute_force() {
        let h = 0.0625;
        let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
        let dirs = make_direction_set(h).unwrap();
        let nu = Point::new(0.3f64.cos(), 0.3f64.sin());
        for x0 in cloud.interior_ids().step_by(7) {
            let Ok(sel) = select_neighbors(&cloud, x0, nu, dirs.delta) else { continue };
            let c = cloud.point(x0);
            for (q, chosen) in sel.iter().enumerate() {
                let best = (0..cloud.len())
                    .filter(|&id| id != x0 && cloud.point(id).dist(c) <= dirs.delta)
                    .map(|id| to_frame(id, c, cloud.point(id), nu))
                    .filter(|p| quadrant(p.c, p.s) == q)
                    .map(|p| p.sin_sq())
                    .fold(f64::INFINITY, f64::min);
                assert!((chosen.sin_sq() - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_disc_table_is_complete_and_monotone() {
        for k in 3..=5 {
            let h = 0.5f64.powi(k);
            let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
            let dirs = make_direction_set(h).unwrap();
            let table = build_stencil_table(&cloud, &dirs).unwrap();
            assert_eq!(table.n_interior(), cloud.n_interior());
            assert_eq!(table.iter().count(), cloud.n_interior() * (dirs.len() + 2));
            assert_eq!(table.negative_coefficients(), 0);
        }
    }

    #[test]
    fn missing_boundary_densification_is_reported() {
        let h = 0.125;
        let full = PointCloud::build(&Domain::HalfDisc, h).unwrap();
        let interior: Vec<Point> = full.interior_ids().map(|i| full.point(i)).collect();
        let sparse = PointCloud::from_parts(Domain::HalfDisc, interior, vec![], h).unwrap();
        let dirs = make_direction_set(h).unwrap();
        let err = build_stencil_table(&sparse, &dirs).unwrap_err();
        assert!(matches!(err, Error::IncompleteStencil { .. }), "{err}");
        assert!(err.to_string().contains("incomplete stencil"));
    }

    #[test]
    fn table_construction_is_deterministic() {
        let h = 0.125;
        let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
        let dirs = make_direction_set(h).unwrap();
        let a = build_stencil_table(&cloud, &dirs).unwrap();
        let b = build_stencil_table(&cloud, &dirs).unwrap();
        assert!(a.iter().eq(b.iter()));
        let dump = a.dump_json(&cloud, 0, 1);
        assert_eq!(dump["direction"], 1);
    }
}
