//! Uniform bucket grid for radius and nearest-point queries.
//!
//! Lattice clouds put many points on the same coordinate line, which defeats
//! bucketed kd-trees; a cell grid sized to the lattice spacing handles that
//! layout directly.

use std::collections::HashMap;

use crate::geometry::Point;

#[derive(Clone, Debug)]
pub struct CellGrid {
    cell: f64,
    origin: Point,
    cells: HashMap<(i64, i64), Vec<usize>>,
    /// Cell-index extent of occupied cells.
    lo: (i64, i64),
    hi: (i64, i64),
}

impl CellGrid {
    pub fn new(points: &[Point], cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let origin = Point::new(0.0, 0.0);
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN);
        for (id, p) in points.iter().enumerate() {
            let key = key_of(*p, origin, cell);
            lo = (lo.0.min(key.0), lo.1.min(key.1));
            hi = (hi.0.max(key.0), hi.1.max(key.1));
            cells.entry(key).or_default().push(id);
        }
        Self {
            cell,
            origin,
            cells,
            lo,
            hi,
        }
    }

    /// Unsorted ids with `|p_id − center| ≤ radius`.
    pub fn within(&self, points: &[Point], center: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.cells.is_empty() {
            return out;
        }
        let a = key_of(center - Point::new(radius, radius), self.origin, self.cell);
        let b = key_of(center + Point::new(radius, radius), self.origin, self.cell);
        let r2 = radius * radius;
        for i in a.0.max(self.lo.0)..=b.0.min(self.hi.0) {
            for j in a.1.max(self.lo.1)..=b.1.min(self.hi.1) {
                if let Some(ids) = self.cells.get(&(i, j)) {
                    out.extend(ids.iter().copied().filter(|&id| (points[id] - center).norm_sq() <= r2));
                }
            }
        }
        out
    }

    /// Nearest distance among ids accepted by `keep`, and all such ids at
    /// that distance (relative tie tolerance 1e-12), sorted.
    pub fn nearest(
        &self,
        points: &[Point],
        p: Point,
        keep: impl Fn(usize) -> bool,
    ) -> (f64, Vec<usize>) {
        let mut best = f64::INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        if self.cells.is_empty() {
            return (best, ties);
        }
        let c = key_of(p, self.origin, self.cell);
        let span = (self.hi.0 - self.lo.0).max(self.hi.1 - self.lo.1)
            + (c.0 - self.lo.0).abs().max((c.0 - self.hi.0).abs())
            + (c.1 - self.lo.1).abs().max((c.1 - self.hi.1).abs())
            + 1;
        let mut ring = 0i64;
        loop {
            // every point in rings > `ring` is at least `ring * cell` away
            if ring > 0 && (ring - 1) as f64 * self.cell > best * (1.0 + 1e-12) {
                break;
            }
            if ring > span {
                break;
            }
            for key in ring_keys(c, ring) {
                let Some(ids) = self.cells.get(&key) else { continue };
                for &id in ids {
                    if !keep(id) {
                        continue;
                    }
                    let d = points[id].dist(p);
                    if d < best * (1.0 - 1e-12) {
                        best = d;
                        ties.clear();
                        ties.push(id);
                    } else if d <= best * (1.0 + 1e-12) {
                        ties.push(id);
                    }
                }
            }
            ring += 1;
        }
        // drop entries that were ties of an earlier, slightly larger minimum
        ties.retain(|&id| points[id].dist(p) <= best * (1.0 + 1e-12));
        ties.sort_unstable();
        ties.dedup();
        (best, ties)
    }
}

fn key_of(p: Point, origin: Point, cell: f64) -> (i64, i64) {
    (
        ((p.x - origin.x) / cell).floor() as i64,
        ((p.y - origin.y) / cell).floor() as i64,
    )
}

fn ring_keys(c: (i64, i64), ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![c];
    }
    let mut keys = Vec::with_capacity(8 * ring as usize);
    for d in -ring..=ring {
        keys.push((c.0 + d, c.1 - ring));
        keys.push((c.0 + d, c.1 + ring));
    }
    for d in -ring + 1..ring {
        keys.push((c.0 - ring, c.1 + d));
        keys.push((c.0 + ring, c.1 + d));
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_reports_all_equidistant_points() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(3.0, 3.0)];
        let grid = CellGrid::new(&pts, 0.25);
        let (d, ids) = grid.nearest(&pts, Point::new(0.5, 0.0), |_| true);
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(ids, vec![0, 1]);
        let (d, ids) = grid.nearest(&pts, Point::new(10.0, 10.0), |_| true);
        assert_eq!(ids, vec![2]);
        assert!((d - 7.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nearest_respects_filter() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        let grid = CellGrid::new(&pts, 0.5);
        let (_, ids) = grid.nearest(&pts, Point::new(0.1, 0.0), |id| id == 1);
        assert_eq!(ids, vec![1]);
    }
}
