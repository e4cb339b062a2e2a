//! Analytic reference surfaces and their Willmore energy `∫ |Dn|^2`.

mod field;
pub mod quadrature;
mod sampling;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::{HeightField, Rect};
pub use sampling::SurfaceSample;

use crate::mesh::Point3;

/// Relative agreement required between successive quadrature orders.
pub const QUADRATURE_RTOL: f64 = 1e-6;
/// Largest order tried before giving up.
pub const MAX_QUADRATURE_ORDER: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("quadrature did not converge (order {order}: {last} vs {prev})")]
    QuadratureNotConverged { order: usize, last: f64, prev: f64 },
    #[error("invalid surface spec: {0}")]
    Parse(String),
    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticSurface {
    Sphere { r: f64 },
    /// Lateral surface `r (cos phi, sin phi) x [-half_height, half_height]`.
    Cylinder { r: f64, half_height: f64 },
    /// Major radius `big_r`, tube radius `r`.
    Torus { big_r: f64, r: f64 },
    Graph { h: HeightField, domain: Rect },
}

/// Principal curvatures with unit tangent principal directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvatures {
    pub k1: f64,
    pub k2: f64,
    pub dir1: Point3,
    pub dir2: Point3,
}

impl AnalyticSurface {
    pub fn unit_sphere() -> Self {
        AnalyticSurface::Sphere { r: 1.0 }
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |s: &str| Err(SurfaceError::InvalidParameter(s.to_string()));
        match *self {
            AnalyticSurface::Sphere { r } if !(r > 0.0 && r.is_finite()) => bad("sphere radius"),
            AnalyticSurface::Cylinder { r, half_height }
                if !(r > 0.0 && half_height > 0.0 && r.is_finite() && half_height.is_finite()) =>
            {
                bad("cylinder radius/height")
            }
            AnalyticSurface::Torus { big_r, r } if !(r > 0.0 && big_r > r && big_r.is_finite()) => {
                bad("torus radii (need R > r > 0)")
            }
            AnalyticSurface::Graph { h, domain } => {
                if !domain.is_valid() {
                    return bad("graph domain");
                }
                if let HeightField::SphericalCap { rho } = h {
                    let far = domain
                        .corners()
                        .iter()
                        .map(|(x, y)| x.hypot(*y))
                        .fold(0.0, f64::max);
                    if !(rho > far) {
                        return bad("spherical cap radius must exceed the domain");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Parameter rectangle `(u range, v range)`.
    pub fn param_domain(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            AnalyticSurface::Sphere { .. } => ((0.0, PI), (0.0, 2.0 * PI)),
            AnalyticSurface::Cylinder { half_height, .. } => {
                ((0.0, 2.0 * PI), (-half_height, half_height))
            }
            AnalyticSurface::Torus { .. } => ((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
            AnalyticSurface::Graph { domain, .. } => ((domain.x0, domain.x1), (domain.y0, domain.y1)),
        }
    }

    pub fn position(&self, u: f64, v: f64) -> Point3 {
        match *self {
            AnalyticSurface::Sphere { r } => {
                let (st, ct) = u.sin_cos();
                let (sp, cp) = v.sin_cos();
                r * Point3::new(st * cp, st * sp, ct)
            }
            AnalyticSurface::Cylinder { r, .. } => {
                let (s, c) = u.sin_cos();
                Point3::new(r * c, r * s, v)
            }
            AnalyticSurface::Torus { big_r, r } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let rho = big_r + r * cv;
                Point3::new(rho * cu, rho * su, r * sv)
            }
            AnalyticSurface::Graph { h, .. } => Point3::new(u, v, h.value(u, v)),
        }
    }

    /// Unit normal: outward for closed surfaces and the cylinder, upward for
    /// graphs.
    pub fn normal(&self, u: f64, v: f64) -> Point3 {
        match *self {
            AnalyticSurface::Sphere { r } => self.position(u, v) / r,
            AnalyticSurface::Cylinder { .. } => {
                let (s, c) = u.sin_cos();
                Point3::new(c, s, 0.0)
            }
            AnalyticSurface::Torus { .. } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                Point3::new(cv * cu, cv * su, sv)
            }
            AnalyticSurface::Graph { h, .. } => {
                let g = h.gradient(u, v);
                Point3::new(-g[0], -g[1], 1.0).normalize()
            }
        }
    }

    /// Area element `|x_u x x_v|`.
    pub fn area_element(&self, u: f64, v: f64) -> f64 {
        match *self {
            AnalyticSurface::Sphere { r } => r * r * u.sin(),
            AnalyticSurface::Cylinder { r, .. } => r,
            AnalyticSurface::Torus { big_r, r } => r * (big_r + r * v.cos()),
            AnalyticSurface::Graph { h, .. } => h.area_factor(u, v),
        }
    }

    /// Principal curvatures (up to a common sign).
    pub fn curvatures(&self, u: f64, v: f64) -> (f64, f64) {
        match *self {
            AnalyticSurface::Sphere { r } => (1.0 / r, 1.0 / r),
            AnalyticSurface::Cylinder { r, .. } => (1.0 / r, 0.0),
            AnalyticSurface::Torus { big_r, r } => {
                let cv = v.cos();
                (cv / (big_r + r * cv), 1.0 / r)
            }
            AnalyticSurface::Graph { h, .. } => {
                let c = graph_curvatures(&h, u, v);
                (c.k1, c.k2)
            }
        }
    }

    /// `∫ |Dn|^2` by closed form (sphere, cylinder) or by Gauss–Legendre
    /// quadrature with order doubling from `order` (torus, graph).
    pub fn willmore_energy(&self, order: usize) -> Result<f64, SurfaceError> {
        self.validate()?;
        match *self {
            AnalyticSurface::Sphere { .. } => Ok(8.0 * PI),
            AnalyticSurface::Cylinder { r, half_height } => Ok(4.0 * PI * half_height / r),
            AnalyticSurface::Torus { .. } => {
                let (du, dv) = self.param_domain();
                converge_quadrature(order, |n| {
                    quadrature::integrate_2d(
                        |u, v| {
                            let (k1, k2) = self.curvatures(u, v);
                            (k1 * k1 + k2 * k2) * self.area_element(u, v)
                        },
                        du,
                        dv,
                        n,
                    )
                })
            }
            AnalyticSurface::Graph { h, domain } => {
                converge_quadrature(order, |n| graph_willmore_fixed(&h, &domain, n))
            }
        }
    }

    /// Willmore energy with the default starting order.
    pub fn willmore(&self) -> Result<f64, SurfaceError> {
        self.willmore_energy(16)
    }

    /// Surface area by closed form or quadrature.
    pub fn area(&self) -> Result<f64, SurfaceError> {
        self.validate()?;
        match *self {
            AnalyticSurface::Sphere { r } => Ok(4.0 * PI * r * r),
            AnalyticSurface::Cylinder { r, half_height } => Ok(4.0 * PI * r * half_height),
            AnalyticSurface::Torus { big_r, r } => Ok(4.0 * PI * PI * big_r * r),
            AnalyticSurface::Graph { .. } => {
                let (du, dv) = self.param_domain();
                converge_quadrature(16, |n| {
                    quadrature::integrate_2d(|u, v| self.area_element(u, v), du, dv, n)
                })
            }
        }
    }
}

fn converge_quadrature(start: usize, eval: impl Fn(usize) -> f64) -> Result<f64, SurfaceError> {
    let mut n = start.max(2);
    let mut prev = eval(n);
    loop {
        let next_n = 2 * n;
        if next_n > MAX_QUADRATURE_ORDER {
            return Err(SurfaceError::QuadratureNotConverged {
                order: n,
                last: prev,
                prev,
            });
        }
        let last = eval(next_n);
        let scale = last.abs().max(prev.abs());
        if (last - prev).abs() <= QUADRATURE_RTOL * scale || scale == 0.0 {
            return Ok(last);
        }
        if !last.is_finite() {
            return Err(SurfaceError::QuadratureNotConverged {
                order: next_n,
                last,
                prev,
            });
        }
        prev = last;
        n = next_n;
    }
}

/// Graph Willmore density `tr((g^-1 ∇²h)^2) / W` with `g = I + ∇h ∇hᵀ` and
/// `W = sqrt(1 + |∇h|^2)`; equals `(κ1² + κ2²) W`, the density per unit
/// parameter area.
pub fn graph_willmore_density(h: &HeightField, x: f64, y: f64) -> f64 {
    let [p, q] = h.gradient(x, y);
    let hs = h.hessian(x, y);
    let w2 = 1.0 + p * p + q * q;
    // g^-1 = I - ∇h ∇hᵀ / W²
    let gi = [
        [1.0 - p * p / w2, -p * q / w2],
        [-p * q / w2, 1.0 - q * q / w2],
    ];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = gi[i][0] * hs[0][j] + gi[i][1] * hs[1][j];
        }
    }
    let tr_m2 = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1];
    tr_m2 / w2.sqrt()
}

fn graph_willmore_fixed(h: &HeightField, domain: &Rect, n: usize) -> f64 {
    quadrature::integrate_2d(
        |x, y| graph_willmore_density(h, x, y),
        (domain.x0, domain.x1),
        (domain.y0, domain.y1),
        n,
    )
}

/// Same integral through the principal curvatures: `∫ (κ1² + κ2²) W dx`.
pub fn graph_willmore_shape_operator(h: &HeightField, domain: &Rect, n: usize) -> f64 {
    quadrature::integrate_2d(
        |x, y| {
            let c = graph_curvatures(h, x, y);
            (c.k1 * c.k1 + c.k2 * c.k2) * h.area_factor(x, y)
        },
        (domain.x0, domain.x1),
        (domain.y0, domain.y1),
        n,
    )
}

/// Eigen-decomposition of the shape operator `S = g^-1 II` of the graph of
/// `h` at `(x, y, h(x, y))`, with `II = ∇²h / W`. Directions are returned as
/// unit tangent vectors in space; `k1 >= k2`.
pub fn graph_curvatures(h: &HeightField, x: f64, y: f64) -> Curvatures {
    let [p, q] = h.gradient(x, y);
    let hs = h.hessian(x, y);
    let w2 = 1.0 + p * p + q * q;
    let w = w2.sqrt();
    let gi = [
        [1.0 - p * p / w2, -p * q / w2],
        [-p * q / w2, 1.0 - q * q / w2],
    ];
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = (gi[i][0] * hs[0][j] + gi[i][1] * hs[1][j]) / w;
        }
    }
    let half_tr = 0.5 * (s[0][0] + s[1][1]);
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    let (k1, k2) = (half_tr + disc, half_tr - disc);

    let lift = |a: f64, b: f64| Point3::new(a, b, p * a + q * b).normalize();
    let normal = Point3::new(-p, -q, 1.0) / w;
    let scale = s.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let eigvec = |k: f64| {
        let c1 = (s[0][1], k - s[0][0]);
        let c2 = (k - s[1][1], s[1][0]);
        if c1.0.hypot(c1.1) >= c2.0.hypot(c2.1) {
            c1
        } else {
            c2
        }
    };
    let dir1 = if disc <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        lift(1.0, 0.0)
    } else {
        let (a, b) = eigvec(k1);
        lift(a, b)
    };
    let dir2 = normal.cross(&dir1).normalize();
    Curvatures { k1, k2, dir1, dir2 }
}

fn parse_f(key: &str, v: &str) -> Result<f64, SurfaceError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| SurfaceError::Parse(format!("{key}: not a number: {v:?}")))
}

/// Splits on commas that are not inside brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn parse_rect(v: &str) -> Result<Rect, SurfaceError> {
    let err = || SurfaceError::Parse(format!("domain must look like [x0,x1]x[y0,y1], got {v:?}"));
    let (a, b) = v.split_once(']').ok_or_else(err)?;
    let b = b.trim_start().strip_prefix(['x', 'X']).ok_or_else(err)?;
    let interval = |s: &str| -> Result<(f64, f64), SurfaceError> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let (lo, hi) = s.split_once(',').ok_or_else(err)?;
        Ok((parse_f("U", lo)?, parse_f("U", hi)?))
    };
    let (x0, x1) = interval(a)?;
    let (y0, y1) = interval(b)?;
    let r = Rect::new(x0, x1, y0, y1);
    if r.is_valid() {
        Ok(r)
    } else {
        Err(err())
    }
}

impl FromStr for AnalyticSurface {
    type Err = SurfaceError;

    /// `sphere:r=1`, `cylinder:r=1,h=1`, `torus:R=2,r=0.5`,
    /// `graph:h=quadratic,a=..,b=..,c=..,U=[0,1]x[0,1]` (also `h=trig` with
    /// `amp,kx,ky` and `h=cap` with `rho`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in split_top_level(rest) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| SurfaceError::Parse(format!("expected key=value, got {part:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |k: &str, default: Option<f64>| -> Result<f64, SurfaceError> {
            match kv.remove(k) {
                Some(v) => parse_f(k, &v),
                None => default.ok_or_else(|| SurfaceError::Parse(format!("missing {k}"))),
            }
        };
        let surface = match kind.trim() {
            "sphere" => AnalyticSurface::Sphere { r: take("r", Some(1.0))? },
            "cylinder" => AnalyticSurface::Cylinder {
                r: take("r", Some(1.0))?,
                half_height: take("h", Some(1.0))?,
            },
            "torus" => AnalyticSurface::Torus {
                big_r: take("R", Some(2.0))?,
                r: take("r", Some(0.5))?,
            },
            "graph" => {
                let hk = kv.remove("h").unwrap_or_else(|| "quadratic".into());
                let domain = match kv.remove("U") {
                    Some(u) => parse_rect(&u)?,
                    None => Rect::unit(),
                };
                let mut take = |k: &str, d: f64| -> Result<f64, SurfaceError> {
                    kv.remove(k).map_or(Ok(d), |v| parse_f(k, &v))
                };
                let h = match hk.as_str() {
                    "quadratic" => HeightField::Quadratic {
                        a: take("a", 0.0)?,
                        b: take("b", 0.0)?,
                        c: take("c", 0.0)?,
                        d: take("d", 0.0)?,
                        e: take("e", 0.0)?,
                        f: take("f", 0.0)?,
                    },
                    "trig" => HeightField::Trig {
                        amp: take("amp", 0.1)?,
                        kx: take("kx", PI)?,
                        ky: take("ky", PI)?,
                    },
                    "cap" => HeightField::SphericalCap { rho: take("rho", 2.0)? },
                    other => return Err(SurfaceError::Parse(format!("unknown height field {other:?}"))),
                };
                AnalyticSurface::Graph { h, domain }
            }
            other => return Err(SurfaceError::Parse(format!("unknown surface kind {other:?}"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(SurfaceError::Parse(format!("unknown key {k:?}")));
        }
        surface.validate()?;
        Ok(surface)
    }
}

impl fmt::Display for AnalyticSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticSurface::Sphere { r } => write!(f, "sphere:r={r}"),
            AnalyticSurface::Cylinder { r, half_height } => write!(f, "cylinder:r={r},h={half_height}"),
            AnalyticSurface::Torus { big_r, r } => write!(f, "torus:R={big_r},r={r}"),
            AnalyticSurface::Graph { h, domain } => {
                write!(f, "graph:")?;
                match h {
                    HeightField::Quadratic { a, b, c, d, e, f: g } => {
                        write!(f, "h=quadratic,a={a},b={b},c={c},d={d},e={e},f={g}")?
                    }
                    HeightField::Trig { amp, kx, ky } => write!(f, "h=trig,amp={amp},kx={kx},ky={ky}")?,
                    HeightField::SphericalCap { rho } => write!(f, "h=cap,rho={rho}")?,
                }
                write!(
                    f,
                    ",U=[{},{}]x[{},{}]",
                    domain.x0, domain.x1, domain.y0, domain.y1
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        assert_relative_eq!(AnalyticSurface::unit_sphere().willmore().unwrap(), 8.0 * PI);
        let cyl = AnalyticSurface::Cylinder {
            r: 1.0,
            half_height: 1.0,
        };
        assert_relative_eq!(cyl.willmore().unwrap(), 4.0 * PI);
        // independent check of the cylinder closed form by quadrature
        let (du, dv) = cyl.param_domain();
        let q = quadrature::integrate_2d(
            |u, v| {
                let (a, b) = cyl.curvatures(u, v);
                (a * a + b * b) * cyl.area_element(u, v)
            },
            du,
            dv,
            8,
        );
        assert_relative_eq!(q, 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn torus_matches_closed_form() {
        // ∫κ2² dA = 4π²R/r and ∫κ1² dA = (4π²/r)(R²/√(R²−r²) − R) sum to
        // 4π² R² / (r √(R² − r²)).
        for (big_r, r) in [(2.0, 0.5), (3.0, 1.0), (1.5, 1.2)] {
            let t = AnalyticSurface::Torus { big_r, r };
            let exact = 4.0 * PI * PI * big_r * big_r / (r * (big_r * big_r - r * r).sqrt());
            assert_relative_eq!(t.willmore().unwrap(), exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn affine_graph_is_flat() {
        let g = AnalyticSurface::Graph {
            h: HeightField::Quadratic {
                a: 0.0,
                b: 0.0,
                c: 0.0,
                d: 0.3,
                e: -2.0,
                f: 1.0,
            },
            domain: Rect::unit(),
        };
        assert_eq!(g.willmore().unwrap(), 0.0);
    }

    #[test]
    fn paraboloid_and_saddle_curvatures() {
        let c = graph_curvatures(&HeightField::quadratic(0.5, 0.0, 0.5), 0.0, 0.0);
        assert_relative_eq!(c.k1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.k2, 1.0, epsilon = 1e-15);
        let c = graph_curvatures(&HeightField::quadratic(0.5, 0.0, -0.5), 0.0, 0.0);
        assert_relative_eq!(c.k1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.k2, -1.0, epsilon = 1e-15);
        assert_relative_eq!(c.dir1.x.abs(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.dir2.y.abs(), 1.0, epsilon = 1e-15);
    }

    /// Shape operator from central differences of the unit normal:
    /// `dn = -S` in the basis `(r_x, r_y)`.
    fn fd_curvatures(h: &HeightField, x: f64, y: f64) -> (f64, f64) {
        let e = 1e-5;
        let n = |x: f64, y: f64| {
            let g = h.gradient(x, y);
            Point3::new(-g[0], -g[1], 1.0).normalize()
        };
        let nx = (n(x + e, y) - n(x - e, y)) / (2.0 * e);
        let ny = (n(x, y + e) - n(x, y - e)) / (2.0 * e);
        let g = h.gradient(x, y);
        let rx = Point3::new(1.0, 0.0, g[0]);
        let ry = Point3::new(0.0, 1.0, g[1]);
        let j = nalgebra::Matrix3x2::from_columns(&[rx, ry]);
        let a = nalgebra::Matrix3x2::from_columns(&[nx, ny]);
        let jtj = j.transpose() * j;
        let s = -(jtj.try_inverse().unwrap() * j.transpose() * a);
        let half_tr = 0.5 * s.trace();
        let disc = (half_tr * half_tr - s.determinant()).max(0.0).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    #[test]
    fn curvatures_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = HeightField::Quadratic {
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
                c: rng.gen_range(-1.0..1.0),
                d: rng.gen_range(-1.0..1.0),
                e: rng.gen_range(-1.0..1.0),
                f: 0.0,
            };
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let c = graph_curvatures(&h, x, y);
            let (k1, k2) = fd_curvatures(&h, x, y);
            assert!((c.k1 - k1).abs() < 1e-4 && (c.k2 - k2).abs() < 1e-4);
            // principal directions are orthonormal tangents
            let n = Point3::new(-h.gradient(x, y)[0], -h.gradient(x, y)[1], 1.0).normalize();
            assert!(c.dir1.dot(&n).abs() < 1e-12 && c.dir2.dot(&n).abs() < 1e-12);
            assert!(c.dir1.dot(&c.dir2).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_form_agrees_with_shape_operator() {
        let fields = [
            HeightField::quadratic(0.05, 0.0, -0.05),
            HeightField::quadratic(0.0, 0.05, 0.0),
            HeightField::quadratic(0.7, -0.4, 0.2),
            HeightField::Trig {
                amp: 0.2,
                kx: 3.0,
                ky: 2.0,
            },
        ];
        for h in fields {
            let a = graph_willmore_fixed(&h, &Rect::unit(), 64);
            let b = graph_willmore_shape_operator(&h, &Rect::unit(), 64);
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn spherical_cap_density_is_constant() {
        // κ1 = κ2 = 1/rho, so the energy is (2/rho²)·area; the area comes from
        // the inner integral ∫ dy rho/√(rho²−x²−y²) = rho·asin(y/√(rho²−x²)).
        let rho = 2.0;
        let domain = Rect::new(-0.6, 0.9, -0.5, 0.7);
        let g = AnalyticSurface::Graph {
            h: HeightField::SphericalCap { rho },
            domain,
        };
        let area = quadrature::integrate_1d(
            |x| {
                let s = (rho * rho - x * x).sqrt();
                rho * ((domain.y1 / s).asin() - (domain.y0 / s).asin())
            },
            (domain.x0, domain.x1),
            64,
        );
        let expected = 2.0 / (rho * rho) * area;
        let mut prev_err = f64::INFINITY;
        for n in [2, 4, 8] {
            let err = (graph_willmore_fixed(&HeightField::SphericalCap { rho }, &domain, n) - expected).abs();
            assert!(err <= prev_err);
            prev_err = err;
        }
        assert_relative_eq!(g.willmore().unwrap(), expected, max_relative = 1e-6);
    }

    #[test]
    fn rotated_and_translated_graph_has_same_energy() {
        let (a, b, c) = (0.3, -0.2, 0.5);
        let base = AnalyticSurface::Graph {
            h: HeightField::quadratic(a, b, c),
            domain: Rect::new(0.0, 1.0, 0.0, 2.0),
        };
        // h'(x, y) = h(y, -x) on the rotated rectangle
        let rotated = AnalyticSurface::Graph {
            h: HeightField::quadratic(c, -b, a),
            domain: Rect::new(-2.0, 0.0, 0.0, 1.0),
        };
        // h''(x, y) = h(x - 1, y + 3) + 7 on the shifted rectangle
        let (tx, ty) = (1.0, -3.0);
        let shifted = AnalyticSurface::Graph {
            h: HeightField::Quadratic {
                a,
                b,
                c,
                d: -2.0 * a * tx - b * ty,
                e: -b * tx - 2.0 * c * ty,
                f: a * tx * tx + b * tx * ty + c * ty * ty + 7.0,
            },
            domain: Rect::new(1.0, 2.0, -3.0, -1.0),
        };
        let e0 = base.willmore().unwrap();
        assert_relative_eq!(rotated.willmore().unwrap(), e0, max_relative = 1e-9);
        assert_relative_eq!(shifted.willmore().unwrap(), e0, max_relative = 1e-9);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "sphere:r=1",
            "cylinder:r=1,h=1",
            "torus:R=2,r=0.5",
            "graph:h=quadratic,a=0.05,b=0,c=-0.05,U=[0,1]x[0,1]",
            "graph:h=trig,amp=0.1,kx=3,ky=2,U=[-1,1]x[0,0.5]",
            "graph:h=cap,rho=2",
        ] {
            let parsed: AnalyticSurface = s.parse().unwrap();
            let again: AnalyticSurface = parsed.to_string().parse().unwrap();
            assert_eq!(parsed, again);
        }
        let g: AnalyticSurface = "graph:h=quadratic,a=0.05,c=-0.05,U=[0,1]x[0,2]".parse().unwrap();
        assert_eq!(
            g,
            AnalyticSurface::Graph {
                h: HeightField::quadratic(0.05, 0.0, -0.05),
                domain: Rect::new(0.0, 1.0, 0.0, 2.0)
            }
        );
        assert!("cube:r=1".parse::<AnalyticSurface>().is_err());
        assert!("sphere:r=-1".parse::<AnalyticSurface>().is_err());
        assert!("sphere:q=1".parse::<AnalyticSurface>().is_err());
        assert!("torus:R=1,r=2".parse::<AnalyticSurface>().is_err());
        assert!("graph:U=[0,1]x[1,0]".parse::<AnalyticSurface>().is_err());
    }
}
