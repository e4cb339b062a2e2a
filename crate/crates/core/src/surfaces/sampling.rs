//! Quasi-uniform surface samples and closest-point projection.

use std::f64::consts::PI;

use super::{AnalyticSurface, HeightField, Rect};
use crate::mesh::Point3;

/// Point sample of a surface. Every surface point lies within `cover` of
/// some sample point (distance measured along the surface, hence also in
/// space).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Point3>,
    pub cover: f64,
}

/// `n + 1` equally spaced values from `a` to `b` with step at most `h`.
fn closed_grid(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = ((b - a) / h).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `n` equally spaced periodic values on `[0, 2 pi)` with arc step at most `h`
/// on a circle of radius `rho`.
fn periodic_grid(rho: f64, h: f64, phase: f64) -> Vec<f64> {
    let n = (2.0 * PI * rho / h).ceil().max(3.0) as usize;
    (0..n)
        .map(|i| 2.0 * PI * (i as f64 + phase) / n as f64)
        .collect()
}

impl AnalyticSurface {
    /// Sample with covering radius at most `h`.
    ///
    /// Parameter grids are chosen so that along each coordinate curve the
    /// step is at most `h`; any point is then within `h/2 + h/2` (path length
    /// along the two coordinate directions) of a sample.
    pub fn sample(&self, h: f64) -> SurfaceSample {
        assert!(h > 0.0 && h.is_finite(), "sample spacing must be positive");
        let points = match *self {
            AnalyticSurface::Sphere { r } => {
                let n_theta = (PI * r / h).ceil().max(1.0) as usize;
                let dt = PI / n_theta as f64;
                let mut pts = Vec::new();
                for i in 0..n_theta {
                    let theta = (i as f64 + 0.5) * dt;
                    let (lo, hi) = (theta - 0.5 * dt, theta + 0.5 * dt);
                    let s_max = if lo <= PI / 2.0 && hi >= PI / 2.0 {
                        1.0
                    } else {
                        lo.sin().max(hi.sin())
                    };
                    let phase = if i % 2 == 0 { 0.0 } else { 0.5 };
                    for phi in periodic_grid(r * s_max, h, phase) {
                        pts.push(self.position(theta, phi));
                    }
                }
                pts
            }
            AnalyticSurface::Cylinder { r, half_height } => {
                let mut pts = Vec::new();
                for (j, t) in closed_grid(-half_height, half_height, h).into_iter().enumerate() {
                    let phase = if j % 2 == 0 { 0.0 } else { 0.5 };
                    for phi in periodic_grid(r, h, phase) {
                        pts.push(self.position(phi, t));
                    }
                }
                pts
            }
            AnalyticSurface::Torus { big_r, r } => {
                let mut pts = Vec::new();
                for u in periodic_grid(big_r + r, h, 0.0) {
                    for v in periodic_grid(r, h, 0.0) {
                        pts.push(self.position(u, v));
                    }
                }
                pts
            }
            AnalyticSurface::Graph { h: field, domain } => graph_grid(&field, &domain, h)
                .into_iter()
                .map(|(x, y)| self.position(x, y))
                .collect(),
        };
        SurfaceSample { points, cover: h }
    }

    /// Closest surface point to `p` and the unit normal there.
    pub fn project(&self, p: &Point3) -> (Point3, Point3) {
        match *self {
            AnalyticSurface::Sphere { r } => {
                let n = if p.norm() > 0.0 { p.normalize() } else { Point3::z() };
                (r * n, n)
            }
            AnalyticSurface::Cylinder { r, half_height } => {
                let rho = p.x.hypot(p.y);
                let (c, s) = if rho > 0.0 { (p.x / rho, p.y / rho) } else { (1.0, 0.0) };
                let z = p.z.clamp(-half_height, half_height);
                (Point3::new(r * c, r * s, z), Point3::new(c, s, 0.0))
            }
            AnalyticSurface::Torus { big_r, r } => {
                let rho = p.x.hypot(p.y);
                let (c, s) = if rho > 0.0 { (p.x / rho, p.y / rho) } else { (1.0, 0.0) };
                let center = Point3::new(big_r * c, big_r * s, 0.0);
                let d = p - center;
                let n = if d.norm() > 0.0 {
                    d.normalize()
                } else {
                    Point3::new(c, s, 0.0)
                };
                (center + r * n, n)
            }
            AnalyticSurface::Graph { h, domain } => {
                let (x, y) = graph_closest(&h, &domain, p);
                (self.position(x, y), self.normal(x, y))
            }
        }
    }

    /// Distance from `p` to the surface.
    pub fn distance(&self, p: &Point3) -> f64 {
        (self.project(p).0 - p).norm()
    }

    /// A representative length: diameter-like scale used for tolerances.
    pub fn scale(&self) -> f64 {
        match *self {
            AnalyticSurface::Sphere { r } => 2.0 * r,
            AnalyticSurface::Cylinder { r, half_height } => (2.0 * r).max(2.0 * half_height),
            AnalyticSurface::Torus { big_r, r } => 2.0 * (big_r + r),
            AnalyticSurface::Graph { domain, .. } => domain.width().hypot(domain.height()),
        }
    }
}

/// Parameter grid of a graph with spatial step at most `h` along both
/// coordinate curves.
fn graph_grid(field: &HeightField, domain: &Rect, h: f64) -> Vec<(f64, f64)> {
    let g = field.max_gradient(domain);
    let step = h / (1.0 + g * g).sqrt();
    let xs = closed_grid(domain.x0, domain.x1, step);
    let ys = closed_grid(domain.y0, domain.y1, step);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            out.push((x, y));
        }
    }
    out
}

/// Minimizes `|(x, y, h(x, y)) - p|^2` over the domain by projected Newton
/// steps with a gradient fallback.
fn graph_closest(h: &HeightField, domain: &Rect, p: &Point3) -> (f64, f64) {
    let clamp = |x: f64, y: f64| (x.clamp(domain.x0, domain.x1), y.clamp(domain.y0, domain.y1));
    let f = |x: f64, y: f64| {
        let dz = h.value(x, y) - p.z;
        (x - p.x).powi(2) + (y - p.y).powi(2) + dz * dz
    };
    let (mut x, mut y) = clamp(p.x, p.y);
    for _ in 0..100 {
        let dz = h.value(x, y) - p.z;
        let [hx, hy] = h.gradient(x, y);
        let hs = h.hessian(x, y);
        let gx = x - p.x + dz * hx;
        let gy = y - p.y + dz * hy;
        let a = 1.0 + hx * hx + dz * hs[0][0];
        let b = hx * hy + dz * hs[0][1];
        let c = 1.0 + hy * hy + dz * hs[1][1];
        let det = a * c - b * b;
        let (mut sx, mut sy) = if a > 0.0 && det > 0.0 {
            ((c * gx - b * gy) / det, (a * gy - b * gx) / det)
        } else {
            (gx, gy)
        };
        // backtracking on the projected step
        let f0 = f(x, y);
        let mut accepted = false;
        for _ in 0..40 {
            let (nx, ny) = clamp(x - sx, y - sy);
            if f(nx, ny) <= f0 {
                let moved = (nx - x).hypot(ny - y);
                x = nx;
                y = ny;
                accepted = true;
                if moved <= 1e-15 * (1.0 + x.abs() + y.abs()) {
                    return (x, y);
                }
                break;
            }
            sx *= 0.5;
            sy *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::spatial::PointGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_surface_point(s: &AnalyticSurface, rng: &mut ChaCha8Rng) -> Point3 {
        let ((u0, u1), (v0, v1)) = s.param_domain();
        s.position(rng.gen_range(u0..u1), rng.gen_range(v0..v1))
    }

    #[test]
    fn samples_cover_within_reported_bound() {
        let surfaces = [
            AnalyticSurface::unit_sphere(),
            AnalyticSurface::Sphere { r: 2.5 },
            AnalyticSurface::Cylinder {
                r: 1.0,
                half_height: 1.0,
            },
            AnalyticSurface::Torus { big_r: 2.0, r: 0.5 },
            AnalyticSurface::Graph {
                h: HeightField::quadratic(0.5, 0.3, -0.4),
                domain: Rect::new(-1.0, 1.0, 0.0, 1.5),
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in surfaces {
            for h in [0.3, 0.1] {
                let sample = s.sample(h);
                let grid = PointGrid::new(&sample.points, h);
                for p in &sample.points {
                    assert!(s.distance(p) < 1e-12);
                }
                for _ in 0..2000 {
                    let x = random_surface_point(&s, &mut rng);
                    let (_, d) = grid.nearest(&x).unwrap();
                    assert!(d <= sample.cover, "{s}: {d} > {}", sample.cover);
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let surfaces = [
            AnalyticSurface::unit_sphere(),
            AnalyticSurface::Cylinder {
                r: 1.0,
                half_height: 1.0,
            },
            AnalyticSurface::Torus { big_r: 2.0, r: 0.5 },
            AnalyticSurface::Graph {
                h: HeightField::quadratic(0.3, 0.1, -0.2),
                domain: Rect::new(-1.0, 1.0, -1.0, 1.0),
            },
        ];
        for s in surfaces {
            for _ in 0..200 {
                let x = random_surface_point(&s, &mut rng);
                let ((u0, u1), (v0, v1)) = s.param_domain();
                let (u, v) = (rng.gen_range(u0..u1), rng.gen_range(v0..v1));
                let n = s.normal(u, v);
                let base = s.position(u, v);
                let off = base + 0.05 * n;
                let (q, nq) = s.project(&off);
                // interior points: the offset along the normal projects back
                let interior = match s {
                    AnalyticSurface::Cylinder { half_height, .. } => base.z.abs() < half_height,
                    AnalyticSurface::Graph { domain, .. } => {
                        domain.contains(u, v, -0.1)
                    }
                    _ => true,
                };
                if interior {
                    assert!((q - base).norm() < 1e-9, "{s}");
                    assert!((nq - n).norm() < 1e-9);
                }
                let (q2, _) = s.project(&x);
                assert!((q2 - x).norm() < 1e-9);
            }
        }
    }
}
