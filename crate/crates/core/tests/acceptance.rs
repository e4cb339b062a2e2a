//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use discrete_willmore::energy::all_energies;
use discrete_willmore::generators::{
    augment_protected_with_retry, counterexample_cylinder, counterexample_flat, icosphere, lifted_delaunay,
    planar_delaunay, restricted_delaunay, theta_grid, theta_grid_flat, AugmentOptions, CounterexampleSpec,
    RestrictedOptions, ThetaGridSpec,
};
use discrete_willmore::harness::{certify, verify_lemmas, verify_lemmas_with, CertifyOptions};
use discrete_willmore::mesh::{IndexedMesh, Point3, Triangle};
use discrete_willmore::quality::quality_report;
use discrete_willmore::surfaces::{AnalyticSurface, HeightField, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const FLAT_TOL: f64 = 1e-12;
const BOBENKO_FLAT_TOL: f64 = 1e-9;
const SPHERE_LIMINF_TOL: f64 = 0.02;
const GRAPH_UPPER_FACTOR: f64 = 1.5;
const GRAPH_REL_ERROR: f64 = 0.15;
const THETA_RATIO: (f64, f64) = (1.6, 2.4);
const CYLINDER_RATIO: (f64, f64) = (3.0, 5.0);
const CYLINDER_FRACTION: f64 = 0.1;
const CIRCUMCENTER_TOL: f64 = 1e-6;
const DISTANCE_BOUND_SLACK: f64 = 1e-12;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

/// Closed doubled regular polygon: top fan from vertex 0, bottom fan from
/// vertex 1 with reversed orientation.
fn doubled_regular_polygon(n: usize) -> IndexedMesh {
    let v = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Point3::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    let mut t: Vec<[usize; 3]> = (1..n - 1).map(|i| [0, i, i + 1]).collect();
    t.extend((2..n).map(|i| [1, (i + 1) % n, i]));
    IndexedMesh::new(v, t).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut meshes: Vec<(&str, IndexedMesh)> = Vec::new();
    let pts: Vec<[f64; 2]> = (0..300).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let planar = planar_delaunay(&pts).unwrap().mesh;
    // the same region on a tilted plane
    let (u, w) = (Point3::new(0.6, 0.0, 0.8), Point3::new(0.0, 1.0, 0.0));
    let tilted = planar.map_vertices(|p| u * p.x + w * p.y + Point3::new(0.3, -0.2, 1.0));
    meshes.push(("planar", planar));
    meshes.push(("tilted", tilted));
    let spec = ThetaGridSpec::new(HeightField::zero(), Rect::unit(), 1.0 / 32.0, 0.2);
    meshes.push(("theta-grid", theta_grid_flat(&spec).unwrap()));
    meshes.push(("strip", counterexample_flat(&CounterexampleSpec::new(16, 4).unwrap()).unwrap()));
    let mut worst: f64 = 0.0;
    for (_, m) in &meshes {
        let e = all_energies(m).unwrap();
        worst = worst.max(e.bending.abs()).max(e.seung_nelson.abs()).max(e.ghds.abs());
    }
    let mut worst_b: f64 = 0.0;
    for n in [4, 5, 6, 7, 9, 12] {
        let e = all_energies(&doubled_regular_polygon(n)).unwrap();
        worst_b = worst_b.max(e.bobenko.expect("closed").abs());
    }
    check(
        worst <= FLAT_TOL && worst_b <= BOBENKO_FLAT_TOL,
        format!("max |E|,|E_SN|,|E_GHDS| = {worst:e} on 4 flat meshes, max |E_B| = {worst_b:e} on doubled polygons"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for level in 3..=5 {
        let m = icosphere(level);
        let q = quality_report(&m).unwrap();
        let e = all_energies(&m).unwrap().bending;
        ok &= q.is_delaunay() && e >= 8.0 * PI * (1.0 - SPHERE_LIMINF_TOL);
        parts.push(format!("L{level}: E/8pi = {:.5}, delaunay = {}", e / (8.0 * PI), q.is_delaunay()));
    }
    let (fast, t) = within(start, Duration::from_secs(60));
    check(ok && fast, format!("{}; {t}", parts.join("; ")))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let h = HeightField::quadratic(0.05, 0.0, -0.05);
    let domain = Rect::unit();
    let surface = AnalyticSurface::Graph { h, domain };
    let w = surface.willmore().unwrap();
    // ∫ (h11² + h22²) over the unit square
    let hess_sq = 2.0 * 0.1 * 0.1;
    let mut errors = Vec::new();
    let mut ok = true;
    for j in 3..=7 {
        let m = theta_grid(&ThetaGridSpec::new(h, domain, (-(j as f64)).exp2(), 0.1)).unwrap();
        let q = quality_report(&m).unwrap();
        let e = all_energies(&m).unwrap().bending;
        ok &= q.is_delaunay() && e <= GRAPH_UPPER_FACTOR * hess_sq;
        errors.push((e - w) / w);
    }
    let finest = errors.last().unwrap().abs();
    let decreasing = errors.windows(2).all(|p| p[1].abs() < p[0].abs());
    let (fast, t) = within(start, Duration::from_secs(120));
    let list: Vec<String> = errors.iter().map(|e| format!("{:+.4}", e)).collect();
    check(
        ok && finest <= GRAPH_REL_ERROR && decreasing && fast,
        format!(
            "W = {w:.6}, rel. errors j=3..7: [{}], finest |err| <= {GRAPH_REL_ERROR}: {}, decreasing: {decreasing}, upper bound and Delaunay: {ok}; {t}",
            list.join(", "),
            finest <= GRAPH_REL_ERROR
        ),
    )
}

fn criterion_4() -> Outcome {
    let h = HeightField::quadratic(0.0, 0.05, 0.0);
    let eps = (-7.0f64).exp2();
    let e: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&theta| {
            let m = theta_grid(&ThetaGridSpec::new(h, Rect::unit(), eps, theta)).unwrap();
            all_energies(&m).unwrap().bending
        })
        .collect();
    let ratios: Vec<f64> = e.windows(2).map(|p| p[1] / p[0]).collect();
    let ok = ratios.iter().all(|r| (THETA_RATIO.0..=THETA_RATIO.1).contains(r));
    check(ok, format!("E(theta/2)/E(theta) = {ratios:.3?}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut e = Vec::new();
    let mut non_delaunay = true;
    for m in [8, 16, 32] {
        let mesh = counterexample_cylinder(&CounterexampleSpec::new(m, 7).unwrap()).unwrap();
        non_delaunay &= !quality_report(&mesh).unwrap().is_delaunay();
        e.push(all_energies(&mesh).unwrap().bending);
    }
    // E = C s² predicts E(s) / E(s/2) = 4
    let ratios: Vec<f64> = e.windows(2).map(|p| p[0] / p[1]).collect();
    let ratio_ok = ratios.iter().all(|r| (CYLINDER_RATIO.0..=CYLINDER_RATIO.1).contains(r));
    let small = e[2] < CYLINDER_FRACTION * 4.0 * PI;
    let (fast, t) = within(start, Duration::from_secs(60));
    check(
        ratio_ok && small && non_delaunay && fast,
        format!(
            "E(s) for s = 2pi/8, 2pi/16, 2pi/32: {e:.4?}; E(s)/E(s/2) = {ratios:.3?} in [3,5]: {ratio_ok}; E(2pi/32) < 0.1*4pi: {small}; all non-Delaunay: {non_delaunay}; {t}"
        ),
    )
}

fn criterion_6() -> Outcome {
    // K and L share the diameter ab of the unit sphere, so both circumcenters
    // are the origin and d_KL = 0
    let a = Point3::new(-1.0, 0.0, 0.0);
    let b = Point3::new(1.0, 0.0, 0.0);
    let c = Point3::new(0.0, 1.0, 0.0);
    let pair = |d: Point3| IndexedMesh::new(vec![a, b, c, d], vec![[0, 1, 2], [1, 0, 3]]).unwrap();
    let alpha: f64 = 0.7;
    let bent = all_energies(&pair(Point3::new(0.0, -alpha.cos(), alpha.sin()))).unwrap();
    let flat = all_energies(&pair(Point3::new(0.0, -1.0, 0.0))).unwrap();
    check(
        bent.bending == f64::INFINITY && flat.bending.is_finite(),
        format!("bent cospherical pair E = {}, coplanar cospherical pair E = {}", bent.bending, flat.bending),
    )
}

/// Center of the smallest ball containing the triangle, by repeated grid
/// search in its plane.
fn enclosing_center(t: &Triangle) -> Point3 {
    let u = (t.b - t.a).normalize();
    let n = (t.b - t.a).cross(&(t.c - t.a)).normalize();
    let w = n.cross(&u);
    let f = |s: f64, r: f64| {
        let x = t.a + u * s + w * r;
        [t.a, t.b, t.c].iter().map(|p| (x - p).norm()).fold(0.0, f64::max)
    };
    let g = (t.a + t.b + t.c) / 3.0;
    let (mut s, mut r) = ((g - t.a).dot(&u), (g - t.a).dot(&w));
    let mut half = 2.0 * [t.a, t.b, t.c].iter().map(|p| (p - g).norm()).fold(0.0, f64::max);
    // near-right triangles make the objective very flat in one direction,
    // so the grid must be fine relative to the zoom
    const N: i32 = 60;
    while half > 1e-13 {
        let mut best = (f(s, r), s, r);
        for i in -N..=N {
            for j in -N..=N {
                let (si, rj) = (s + half * i as f64 / N as f64, r + half * j as f64 / N as f64);
                let v = f(si, rj);
                if v < best.0 {
                    best = (v, si, rj);
                }
            }
        }
        (s, r) = (best.1, best.2);
        half *= 0.5;
    }
    t.a + u * s + w * r
}

fn random_point(rng: &mut ChaCha8Rng) -> Point3 {
    Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let t = Triangle::new(random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let angles = t.angles();
        // regular and acute, where the enclosing ball is the circumball
        if angles.iter().any(|a| !(0.3..=0.5 * PI - 0.05).contains(a)) {
            continue;
        }
        let q = t.circumcenter().unwrap().q;
        worst = worst.max((q - enclosing_center(&t)).norm());
        count += 1;
    }
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    let mut pairs = 0;
    while pairs < 1000 {
        let (a, b, c, p) = (
            random_point(&mut rng),
            random_point(&mut rng),
            random_point(&mut rng),
            random_point(&mut rng),
        );
        let (k, l) = (Triangle::new(a, b, c), Triangle::new(b, a, p));
        let (Ok(ck), Ok(cl)) = (k.circumcenter(), l.circumcenter()) else { continue };
        let d = (ck.q - cl.q).norm();
        let bound = 0.5 * ((ck.q - p).norm() - ck.r).abs();
        if d < bound - DISTANCE_BOUND_SLACK {
            violations += 1;
        }
        tightest = tightest.min(d - bound);
        pairs += 1;
    }
    check(
        worst <= CIRCUMCENTER_TOL && violations == 0,
        format!("max |circumcenter - oracle| = {worst:e} over 1000 triangles; distance bound violated {violations}/1000 (min slack {tightest:e})"),
    )
}

fn canonical(m: &IndexedMesh) -> BTreeSet<[usize; 3]> {
    m.triangles
        .iter()
        .map(|t| {
            let k = (0..3).min_by_key(|&k| t[k]).unwrap();
            [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut agree = 0;
    let mut ties = 0;
    for _ in 0..100 {
        let pts: Vec<[f64; 2]> = (0..50).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let bw = planar_delaunay(&pts).unwrap();
        let lift = lifted_delaunay(&pts).unwrap();
        if bw.ambiguous_edges > 0 {
            // cocircular ties: only the triangle count is determined
            ties += 1;
            if bw.mesh.num_triangles() == lift.num_triangles() {
                agree += 1;
            }
        } else if canonical(&bw.mesh) == canonical(&lift) {
            agree += 1;
        }
    }
    check(agree == 100, format!("{agree}/100 sets agree ({ties} with cocircular ties)"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_cs: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    let mut worst_tel: f64 = 0.0;
    for seed in 0..10 {
        let r = verify_lemmas(seed, 100).unwrap();
        ok &= r.passed();
        worst_cs = worst_cs.max(r.cs_bound.worst);
        worst_mc = worst_mc.max(r.indicator_flat.worst).max(r.indicator_lifted.worst);
        worst_tel = worst_tel.max(r.telescoping.worst);
    }
    let (fast, t) = within(start, Duration::from_secs(60));
    let repeat = verify_lemmas(0, 100).unwrap() == verify_lemmas(0, 100).unwrap();
    let teeth = !verify_lemmas_with(0, 100, 0.5).unwrap().passed();
    check(
        ok && fast && repeat && teeth,
        format!(
            "seeds 0-9 pass: {ok} (worst indicator rel. error {worst_mc:.2e}, telescoping {worst_tel:.1e}, lhs/rhs {worst_cs:.3}); deterministic: {repeat}; halved rhs fails: {teeth}; {t}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let sphere = AnalyticSurface::unit_sphere();
    let aug = augment_protected_with_retry(&[], &sphere, &AugmentOptions::new(0.3, 0.5)).unwrap();
    let mesh = restricted_delaunay(&aug.points, &sphere, &RestrictedOptions::default()).unwrap();
    let options = CertifyOptions {
        zeta: None,
        protect: Some(aug.target_margin),
    };
    let r = certify(&mesh, &sphere, &options).unwrap();
    let preserved = mesh.vertices == aug.points && mesh.used_vertices().len() == aug.points.len();
    let size_ok = r.size <= 2.0 * r.covering.upper;
    let (fast, t) = within(start, Duration::from_secs(180));
    check(
        r.passed && r.delaunay_ok && r.manifold && size_ok && preserved && fast,
        format!(
            "{} points, {} triangles; delaunay {}, manifold {}, size {:.4} <= 2 x covering [{:.4}, {:.4}]: {size_ok}; vertex set preserved: {preserved}; protection {:.3e} >= {:.3e}: {}; {t}",
            aug.points.len(),
            r.triangles,
            r.delaunay_ok,
            r.manifold,
            r.size,
            r.covering.lower,
            r.covering.upper,
            r.protection_margin.unwrap_or(f64::NAN),
            aug.target_margin,
            r.protected_ok
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("flat exactness", criterion_1),
        ("sphere liminf", criterion_2),
        ("graph upper bound and convergence", criterion_3),
        ("cross-term penalty", criterion_4),
        ("non-Delaunay cylinder scaling", criterion_5),
        ("infinite-energy semantics", criterion_6),
        ("circumcenter oracle and distance bound", criterion_7),
        ("planar Delaunay vs lifted hull", criterion_8),
        ("lemma suite", criterion_9),
        ("protection pipeline", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {name} | {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
