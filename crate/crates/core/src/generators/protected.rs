//! Greedy augmentation of a point set on a surface to an ε-covering, ε/2-spaced
//! and protected set.

use std::collections::HashMap;

use super::GeneratorError;
use crate::mesh::spatial::PointGrid;
use crate::mesh::{Point3, Triangle};
use crate::surfaces::AnalyticSurface;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOptions {
    /// Target covering radius.
    pub eps: f64,
    /// Protection ratio the seed is assumed to have (`δ ε / 2`).
    pub delta: f64,
    /// Candidates keep distance at least `c ε` from every small circumsphere.
    pub c: f64,
    /// Surface sample spacing; defaults to `ε / 20`.
    pub sample_spacing: Option<f64>,
    /// Number of times `c` is halved by [`augment_protected_with_retry`].
    pub max_retries: u32,
}

impl AugmentOptions {
    pub fn new(eps: f64, delta: f64) -> Self {
        Self {
            eps,
            delta,
            c: 0.1,
            sample_spacing: None,
            max_retries: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    /// Seed points first, then inserted points in insertion order.
    pub points: Vec<Point3>,
    pub inserted: usize,
    pub c_used: f64,
    pub sample_spacing: f64,
    /// Protection level `min(δ/2, c) ε` the construction aims for.
    pub target_margin: f64,
}

/// Sparse hash grid that accepts insertions.
struct DynGrid {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl DynGrid {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: &Point3) -> [i64; 3] {
        [p.x, p.y, p.z].map(|c| (c / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: &Point3, id: usize) {
        self.buckets.entry(self.key(p)).or_default().push(id);
    }

    /// Ids in cells meeting the cube of half-width `radius` about `p`.
    fn candidates(&self, p: &Point3, radius: f64, mut f: impl FnMut(usize)) {
        let lo = self.key(&(p - Point3::repeat(radius)));
        let hi = self.key(&(p + Point3::repeat(radius)));
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(b) = self.buckets.get(&[i, j, k]) {
                        b.iter().for_each(|&id| f(id));
                    }
                }
            }
        }
    }
}

struct Sphere {
    q: Point3,
    r: f64,
}

/// Adds points to `seed` until every surface point is within `ε` of the set.
///
/// Samples are scanned in order; a sample farther than `ε - ρ` from the set
/// triggers an insertion chosen among the samples within `ε/2 - ρ` of it,
/// taking the first one whose distance to every circumsphere of radius at
/// most `2ε` through three current points differs from the radius by at
/// least `c ε`, and whose own new circumspheres of radius at most `2ε` keep
/// the current points `c ε` away.
pub fn augment_protected(
    seed: &[Point3],
    surface: &AnalyticSurface,
    options: &AugmentOptions,
) -> Result<Augmented, GeneratorError> {
    let AugmentOptions { eps, delta, c, .. } = *options;
    if !(eps > 0.0 && eps.is_finite() && c > 0.0 && delta >= 0.0) {
        return Err(GeneratorError::DegenerateInput("eps and c must be positive".into()));
    }
    let rho = options.sample_spacing.unwrap_or(eps / 20.0);
    if !(rho > 0.0 && rho < eps / 4.0) {
        return Err(GeneratorError::DegenerateInput("sample spacing must be below eps/4".into()));
    }
    let sample = surface.sample(rho);
    let samples = &sample.points;
    let rho = sample.cover;
    let sample_grid = PointGrid::for_spacing(samples, eps / 2.0);

    let mut points: Vec<Point3> = seed.to_vec();
    let mut point_grid = DynGrid::new(eps);
    for (i, p) in points.iter().enumerate() {
        point_grid.insert(p, i);
    }
    let mut nearest = vec![f64::INFINITY; samples.len()];
    if !points.is_empty() {
        let g = PointGrid::for_spacing(&points, eps);
        for (s, d) in samples.iter().zip(nearest.iter_mut()) {
            *d = g.nearest(s).map_or(f64::INFINITY, |(_, d)| d);
        }
    }

    let mut spheres: Vec<Sphere> = Vec::new();
    let mut sphere_grid = DynGrid::new(2.0 * eps);
    let add_triples = |points: &[Point3], point_grid: &DynGrid, spheres: &mut Vec<Sphere>, sphere_grid: &mut DynGrid, v: usize| {
        let p = points[v];
        let mut near = Vec::new();
        point_grid.candidates(&p, 4.0 * eps, |i| {
            if i != v && (points[i] - p).norm() <= 4.0 * eps {
                near.push(i);
            }
        });
        near.sort_unstable();
        for (a, &i) in near.iter().enumerate() {
            for &j in &near[a + 1..] {
                if (points[i] - points[j]).norm() > 4.0 * eps {
                    continue;
                }
                let Ok(cd) = Triangle::new(p, points[i], points[j]).circumcenter() else { continue };
                if cd.r <= 2.0 * eps {
                    sphere_grid.insert(&cd.q, spheres.len());
                    spheres.push(Sphere { q: cd.q, r: cd.r });
                }
            }
        }
    };
    // triples among the seed
    {
        let mut seen = DynGrid::new(eps);
        let mut partial: Vec<Point3> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            partial.push(*p);
            seen.insert(p, i);
            add_triples(&partial, &seen, &mut spheres, &mut sphere_grid, i);
        }
    }

    let mut inserted = 0;
    for s in 0..samples.len() {
        if nearest[s] <= eps - rho {
            continue;
        }
        let x = samples[s];
        let mut cand = sample_grid.within(&x, eps / 2.0 - rho);
        cand.sort_unstable();
        let chosen = cand.into_iter().find(|&k| {
            let p = samples[k];
            let mut ok = true;
            sphere_grid.candidates(&p, 2.0 * eps + c * eps, |t| {
                if ok && ((p - spheres[t].q).norm() - spheres[t].r).abs() < c * eps {
                    ok = false;
                }
            });
            ok && new_spheres_clear(&points, &point_grid, &p, eps, c * eps)
        });
        let Some(k) = chosen else {
            return Err(GeneratorError::EmptyCandidateSet { c });
        };
        let p = samples[k];
        let v = points.len();
        points.push(p);
        point_grid.insert(&p, v);
        add_triples(&points, &point_grid, &mut spheres, &mut sphere_grid, v);
        sample_grid.for_each_within(&p, eps, |i, d| {
            if d < nearest[i] {
                nearest[i] = d;
            }
        });
        inserted += 1;
    }
    Ok(Augmented {
        points,
        inserted,
        c_used: c,
        sample_spacing: rho,
        target_margin: (delta / 2.0).min(c) * eps,
    })
}

/// Whether every small sphere through `p` and two current points keeps all
/// other current points at least `gap` away.
fn new_spheres_clear(points: &[Point3], point_grid: &DynGrid, p: &Point3, eps: f64, gap: f64) -> bool {
    let mut near = Vec::new();
    point_grid.candidates(p, 4.0 * eps, |i| {
        if (points[i] - p).norm() <= 4.0 * eps {
            near.push(i);
        }
    });
    for (a, &i) in near.iter().enumerate() {
        for &j in &near[a + 1..] {
            if (points[i] - points[j]).norm() > 4.0 * eps {
                continue;
            }
            let Ok(cd) = Triangle::new(*p, points[i], points[j]).circumcenter() else { continue };
            if cd.r > 2.0 * eps {
                continue;
            }
            let mut clear = true;
            point_grid.candidates(&cd.q, cd.r + gap, |x| {
                if clear && x != i && x != j && ((points[x] - cd.q).norm() - cd.r).abs() < gap {
                    clear = false;
                }
            });
            if !clear {
                return false;
            }
        }
    }
    true
}

/// [`augment_protected`], halving `c` after each empty candidate set.
pub fn augment_protected_with_retry(
    seed: &[Point3],
    surface: &AnalyticSurface,
    options: &AugmentOptions,
) -> Result<Augmented, GeneratorError> {
    let mut opts = *options;
    let mut last = None;
    for _ in 0..=options.max_retries {
        match augment_protected(seed, surface, &opts) {
            Err(e @ GeneratorError::EmptyCandidateSet { .. }) => {
                last = Some(e);
                opts.c /= 2.0;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}
