//! OFF reading and writing, OBJ reading.

use std::fmt::Write as _;
use std::path::Path;

use super::HarnessError;
use crate::mesh::{IndexedMesh, Point3};

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, HarnessError> {
    tok.parse().map_err(|_| HarnessError::Parse {
        line,
        msg: format!("invalid number {tok:?}"),
    })
}

/// Parses an OFF file with triangle faces.
pub fn parse_off(text: &str) -> Result<IndexedMesh, HarnessError> {
    let mut lines = content_lines(text);
    let eof = |line| HarnessError::Parse {
        line,
        msg: "unexpected end of file".into(),
    };
    let (hline, header) = lines.next().ok_or_else(|| eof(1))?;
    let mut toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"OFF") {
        return Err(HarnessError::Parse {
            line: hline,
            msg: "missing OFF header".into(),
        });
    }
    toks.remove(0);
    let mut cline = hline;
    if toks.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| eof(hline + 1))?;
        cline = l;
        toks = c.split_whitespace().collect();
    }
    if toks.len() < 2 {
        return Err(HarnessError::Parse {
            line: cline,
            msg: "expected vertex and face counts".into(),
        });
    }
    let nv: usize = parse_num(toks[0], cline)?;
    let nf: usize = parse_num(toks[1], cline)?;

    let mut last = cline;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| eof(last + 1))?;
        last = l;
        let c: Vec<&str> = s.split_whitespace().collect();
        if c.len() < 3 {
            return Err(HarnessError::Parse {
                line: l,
                msg: "vertex needs three coordinates".into(),
            });
        }
        vertices.push(Point3::new(parse_num(c[0], l)?, parse_num(c[1], l)?, parse_num(c[2], l)?));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| eof(last + 1))?;
        last = l;
        let c: Vec<&str> = s.split_whitespace().collect();
        let count: usize = parse_num(c[0], l)?;
        if count != 3 {
            return Err(HarnessError::NonTriangleFace { line: l, count });
        }
        if c.len() < 4 {
            return Err(HarnessError::Parse {
                line: l,
                msg: "face has fewer indices than declared".into(),
            });
        }
        let mut t = [0usize; 3];
        for k in 0..3 {
            t[k] = parse_num(c[k + 1], l)?;
            if t[k] >= nv {
                return Err(HarnessError::Parse {
                    line: l,
                    msg: format!("vertex index {} out of range", t[k]),
                });
            }
        }
        triangles.push(t);
    }
    Ok(IndexedMesh::new(vertices, triangles)?)
}

/// OFF text with 17 significant digits per coordinate, so that reading it
/// back reproduces every coordinate bit for bit.
pub fn write_off(mesh: &IndexedMesh) -> String {
    let mut s = String::with_capacity(64 * (mesh.num_vertices() + mesh.num_triangles()));
    let _ = writeln!(s, "OFF\n{} {} 0", mesh.num_vertices(), mesh.num_triangles());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

/// Wavefront OBJ subset: `v` and `f` records, 1-based or negative indices,
/// `v/vt/vn` index forms. Polygons other than triangles are rejected.
pub fn parse_obj(text: &str) -> Result<IndexedMesh, HarnessError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (l, s) in content_lines(text) {
        let mut toks = s.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks.take(3).map(|t| parse_num(t, l)).collect::<Result<_, _>>()?;
                if c.len() < 3 {
                    return Err(HarnessError::Parse {
                        line: l,
                        msg: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<&str> = toks.collect();
                if idx.len() != 3 {
                    return Err(HarnessError::NonTriangleFace { line: l, count: idx.len() });
                }
                let mut t = [0usize; 3];
                for (k, tok) in idx.iter().enumerate() {
                    let i: i64 = parse_num(tok.split('/').next().unwrap_or(""), l)?;
                    let n = vertices.len() as i64;
                    let r = if i < 0 { n + i } else { i - 1 };
                    if !(0..n).contains(&r) {
                        return Err(HarnessError::Parse {
                            line: l,
                            msg: format!("vertex index {i} out of range"),
                        });
                    }
                    t[k] = r as usize;
                }
                triangles.push(t);
            }
            _ => {}
        }
    }
    Ok(IndexedMesh::new(vertices, triangles)?)
}

/// Reads `.off` or `.obj` by extension (OFF otherwise).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<IndexedMesh, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let is_obj = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    if is_obj {
        parse_obj(&text)
    } else {
        parse_off(&text)
    }
}

pub fn save_mesh(path: impl AsRef<Path>, mesh: &IndexedMesh) -> Result<(), HarnessError> {
    let path = path.as_ref();
    std::fs::write(path, write_off(mesh)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TET: &str = "OFF\n# regular-ish tetrahedron\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn tetrahedron() {
        let m = parse_off(TET).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles()), (4, 4));
        assert_eq!(m.triangles[3], [1, 2, 3]);
    }

    #[test]
    fn counts_on_header_line() {
        let m = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(m.num_triangles(), 1);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let v = vec![
            Point3::new(0.1, 1.0 / 3.0, -2.0f64.sqrt()),
            Point3::new(1e-300, 123456.789, std::f64::consts::PI),
            Point3::new(-0.0, 5e-324, 1.0 - f64::EPSILON),
        ];
        let m = IndexedMesh::new(v, vec![[0, 1, 2]]).unwrap();
        let back = parse_off(&write_off(&m)).unwrap();
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            for k in 0..3 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
        assert_eq!(back.triangles, m.triangles);
    }

    #[test]
    fn quad_face_and_parse_errors() {
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse_off(quad), Err(HarnessError::NonTriangleFace { line: 7, count: 4 })));
        let bad = "OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(parse_off(bad), Err(HarnessError::Parse { line: 4, .. })));
        let range = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n";
        assert!(matches!(parse_off(range), Err(HarnessError::Parse { line: 6, .. })));
        assert!(matches!(parse_off("PLY\n"), Err(HarnessError::Parse { line: 1, .. })));
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0 0\n"), Err(HarnessError::Parse { .. })));
    }

    #[test]
    fn obj_subset() {
        let text = "# cube corner\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\nf -3 -2 -1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 1, 2]]);
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n"),
            Err(HarnessError::NonTriangleFace { line: 5, count: 4 })
        ));
    }
}
