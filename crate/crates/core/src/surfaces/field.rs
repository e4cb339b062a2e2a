//! Height fields over axis-aligned rectangles.

use serde::{Deserialize, Serialize};

/// Closed rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }

    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        x >= self.x0 - tol && x <= self.x1 + tol && y >= self.y0 - tol && y <= self.y1 + tol
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ]
    }
}

/// Scalar field `h(x, y)` with analytic gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightField {
    /// `a x^2 + b x y + c y^2 + d x + e y + f`.
    Quadratic {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        e: f64,
        f: f64,
    },
    /// `amp * sin(kx x) * sin(ky y)`.
    Trig { amp: f64, kx: f64, ky: f64 },
    /// Upper hemisphere of radius `rho` centered at the origin, shifted down by
    /// `rho`: `sqrt(rho^2 - x^2 - y^2) - rho`.
    SphericalCap { rho: f64 },
}

impl HeightField {
    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        HeightField::Quadratic {
            a,
            b,
            c,
            d: 0.0,
            e: 0.0,
            f: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::quadratic(0.0, 0.0, 0.0)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match *self {
            HeightField::Quadratic { a, b, c, d, e, f } => {
                a * x * x + b * x * y + c * y * y + d * x + e * y + f
            }
            HeightField::Trig { amp, kx, ky } => amp * (kx * x).sin() * (ky * y).sin(),
            HeightField::SphericalCap { rho } => (rho * rho - x * x - y * y).sqrt() - rho,
        }
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        match *self {
            HeightField::Quadratic { a, b, c, d, e, .. } => {
                [2.0 * a * x + b * y + d, b * x + 2.0 * c * y + e]
            }
            HeightField::Trig { amp, kx, ky } => [
                amp * kx * (kx * x).cos() * (ky * y).sin(),
                amp * ky * (kx * x).sin() * (ky * y).cos(),
            ],
            HeightField::SphericalCap { rho } => {
                let s = (rho * rho - x * x - y * y).sqrt();
                [-x / s, -y / s]
            }
        }
    }

    /// `[[h_xx, h_xy], [h_xy, h_yy]]`.
    pub fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        match *self {
            HeightField::Quadratic { a, b, c, .. } => [[2.0 * a, b], [b, 2.0 * c]],
            HeightField::Trig { amp, kx, ky } => {
                let (sx, cx) = (kx * x).sin_cos();
                let (sy, cy) = (ky * y).sin_cos();
                let xy = amp * kx * ky * cx * cy;
                [
                    [-amp * kx * kx * sx * sy, xy],
                    [xy, -amp * ky * ky * sx * sy],
                ]
            }
            HeightField::SphericalCap { rho } => {
                let s2 = rho * rho - x * x - y * y;
                let s3 = s2 * s2.sqrt();
                let xy = -x * y / s3;
                [
                    [-(rho * rho - y * y) / s3, xy],
                    [xy, -(rho * rho - x * x) / s3],
                ]
            }
        }
    }

    /// `max |grad h|` over `rect` (the constant written `delta` in the
    /// admissibility condition of theta grids).
    pub fn max_gradient(&self, rect: &Rect) -> f64 {
        let norm = |(x, y): (f64, f64)| {
            let g = self.gradient(x, y);
            g[0].hypot(g[1])
        };
        match self {
            // |grad h|^2 is a convex quadratic: maximum at a corner
            HeightField::Quadratic { .. } => rect.corners().into_iter().map(norm).fold(0.0, f64::max),
            // radially increasing: maximum at the corner farthest from the origin
            HeightField::SphericalCap { .. } => {
                rect.corners().into_iter().map(norm).fold(0.0, f64::max)
            }
            HeightField::Trig { amp, kx, ky } => {
                // dense sample plus a Lipschitz allowance for the gaps
                let n = 400;
                let mut best: f64 = 0.0;
                for i in 0..=n {
                    for j in 0..=n {
                        let x = rect.x0 + rect.width() * i as f64 / n as f64;
                        let y = rect.y0 + rect.height() * j as f64 / n as f64;
                        best = best.max(norm((x, y)));
                    }
                }
                let lip = amp.abs() * (kx * kx + ky * ky);
                let gap = 0.5 * rect.width().hypot(rect.height()) / n as f64;
                best + lip * gap
            }
        }
    }

    /// `W = sqrt(1 + |grad h|^2)`.
    pub fn area_factor(&self, x: f64, y: f64) -> f64 {
        let g = self.gradient(x, y);
        (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()
    }
}
