//! Uniform hash grid for radius queries over point sets.

use std::collections::HashMap;

use super::Point3;

type Cell = (i64, i64, i64);

#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    buckets: HashMap<Cell, Vec<usize>>,
    points: Vec<Point3>,
}

impl PointGrid {
    /// Builds a grid with cubic cells of side `cell` (clamped to a positive
    /// value).
    pub fn new(points: &[Point3], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(key(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            buckets,
            points: points.to_vec(),
        }
    }

    /// Grid whose cells hold about a handful of points each for a roughly
    /// uniform 2D-manifold sample with spacing `spacing`.
    pub fn for_spacing(points: &[Point3], spacing: f64) -> Self {
        Self::new(points, spacing.max(1e-300))
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f(index, distance)` for every point with `|p - center| <= radius`.
    pub fn for_each_within(&self, center: &Point3, radius: f64, mut f: impl FnMut(usize, f64)) {
        if !(radius >= 0.0) {
            return;
        }
        let lo = key(&(center - Point3::repeat(radius)), self.cell);
        let hi = key(&(center + Point3::repeat(radius)), self.cell);
        let span = (hi.0 - lo.0 + 1) as f64 * (hi.1 - lo.1 + 1) as f64 * (hi.2 - lo.2 + 1) as f64;
        if span > self.buckets.len() as f64 {
            for (i, p) in self.points.iter().enumerate() {
                let d = (p - center).norm();
                if d <= radius {
                    f(i, d);
                }
            }
            return;
        }
        for x in lo.0..=hi.0 {
            for y in lo.1..=hi.1 {
                for z in lo.2..=hi.2 {
                    if let Some(bucket) = self.buckets.get(&(x, y, z)) {
                        for &i in bucket {
                            let d = (self.points[i] - center).norm();
                            if d <= radius {
                                f(i, d);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Indices within `radius`, ascending.
    pub fn within(&self, center: &Point3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Nearest point, searching outward ring by ring.
    pub fn nearest(&self, center: &Point3) -> Option<(usize, f64)> {
        self.k_nearest(center, 1).into_iter().next()
    }

    /// The `k` nearest points sorted by distance (ties broken by index).
    pub fn k_nearest(&self, center: &Point3, k: usize) -> Vec<(usize, f64)> {
        if self.points.is_empty() || k == 0 {
            return Vec::new();
        }
        let k = k.min(self.points.len());
        let mut radius = self.cell;
        loop {
            let mut found = Vec::new();
            self.for_each_within(center, radius, |i, d| found.push((i, d)));
            if found.len() >= k {
                found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                found.truncate(k);
                return found;
            }
            radius *= 2.0;
        }
    }
}

fn key(p: &Point3, cell: f64) -> Cell {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3> = (0..500)
            .map(|_| Point3::new(rng.gen(), rng.gen(), rng.gen::<f64>() * 0.1))
            .collect();
        let grid = PointGrid::new(&pts, 0.07);
        for _ in 0..50 {
            let c = Point3::new(rng.gen(), rng.gen(), 0.05);
            let r = rng.gen::<f64>() * 0.3;
            let brute: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - c).norm() <= r).collect();
            assert_eq!(grid.within(&c, r), brute);
            let (i, d) = grid.nearest(&c).unwrap();
            let best = pts.iter().map(|p| (p - c).norm()).fold(f64::INFINITY, f64::min);
            assert_eq!(d, best);
            assert_eq!((pts[i] - c).norm(), best);
        }
    }
}
