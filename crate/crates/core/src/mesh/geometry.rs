//! Single-triangle geometry: normals, circumballs, angles.

use nalgebra::{Matrix3, Vector3};

use super::MeshError;

/// A point (or vector) in world coordinates.
pub type Point3 = Vector3<f64>;

/// Relative area threshold below which a triangle counts as degenerate.
///
/// A triangle is degenerate when `area < DEGENERATE_AREA_RATIO * diam^2`; the
/// test is invariant under scaling of the triangle.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

/// Ordered triangle `[a, b, c]`; the orientation is counterclockwise seen from
/// the side its normal points to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
}

/// Center and radius of the smallest ball having the three vertices on its
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circumdata {
    pub q: Point3,
    pub r: f64,
}

impl Triangle {
    pub fn new(a: Point3, b: Point3, c: Point3) -> Self {
        Self { a, b, c }
    }

    pub fn vertices(&self) -> [Point3; 3] {
        [self.a, self.b, self.c]
    }

    /// Unnormalized normal `(b - a) x (c - a)`; its length is twice the area.
    pub fn area_vector(&self) -> Point3 {
        (self.b - self.a).cross(&(self.c - self.a))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.area_vector().norm()
    }

    pub fn edge_lengths(&self) -> [f64; 3] {
        [
            (self.b - self.a).norm(),
            (self.c - self.b).norm(),
            (self.a - self.c).norm(),
        ]
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let [e0, e1, e2] = self.edge_lengths();
        e0.max(e1).max(e2)
    }

    pub fn centroid(&self) -> Point3 {
        (self.a + self.b + self.c) / 3.0
    }

    pub fn is_regular(&self) -> bool {
        let d = self.diameter();
        d > 0.0 && self.area() >= DEGENERATE_AREA_RATIO * d * d
    }

    fn check_regular(&self) -> Result<(), MeshError> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(MeshError::DegenerateTriangle)
        }
    }

    /// Unit normal by the right-hand rule on `(a, b, c)`.
    pub fn normal(&self) -> Result<Point3, MeshError> {
        self.check_regular()?;
        Ok(self.area_vector().normalize())
    }

    /// Interior angles at `a`, `b`, `c`.
    pub fn angles(&self) -> [f64; 3] {
        let angle = |p: Point3, u: Point3, w: Point3| {
            let e1 = u - p;
            let e2 = w - p;
            e1.cross(&e2).norm().atan2(e1.dot(&e2))
        };
        [
            angle(self.a, self.b, self.c),
            angle(self.b, self.c, self.a),
            angle(self.c, self.a, self.b),
        ]
    }

    /// Circumcenter from the linear system
    ///
    /// ```text
    /// (q - a) . (b - a) = |b - a|^2 / 2
    /// (q - a) . (c - a) = |c - a|^2 / 2
    /// (q - a) . ((c - a) x (b - a)) = 0
    /// ```
    ///
    /// The last row pins `q` to the plane of the triangle.
    pub fn circumcenter(&self) -> Result<Circumdata, MeshError> {
        self.check_regular()?;
        let u = self.b - self.a;
        let w = self.c - self.a;
        let m = w.cross(&u);
        let mat = Matrix3::from_rows(&[u.transpose(), w.transpose(), m.transpose()]);
        let rhs = Vector3::new(0.5 * u.norm_squared(), 0.5 * w.norm_squared(), 0.0);
        let rel = mat
            .lu()
            .solve(&rhs)
            .ok_or(MeshError::DegenerateTriangle)?;
        let q = self.a + rel;
        Ok(Circumdata { q, r: rel.norm() })
    }
}
