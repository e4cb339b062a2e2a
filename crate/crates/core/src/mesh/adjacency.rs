use std::collections::VecDeque;

use super::{IndexedMesh, MeshError};

/// Triangles incident to an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFaces {
    Boundary(usize),
    /// `k` traverses the edge as `v[0] -> v[1]` whenever the pair is
    /// consistently oriented; `consistent` is false when both triangles
    /// traverse it in the same direction.
    Interior { k: usize, l: usize, consistent: bool },
}

/// Undirected edge with sorted endpoints `v[0] < v[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: [usize; 2],
    pub faces: EdgeFaces,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        matches!(self.faces, EdgeFaces::Interior { .. })
    }
}

/// Edge to triangle incidence, sorted by `(v0, v1)`. The sorted order is the
/// canonical edge order used for reproducible summation.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdjacency {
    edges: Vec<Edge>,
    orientation_consistent: bool,
}

impl EdgeAdjacency {
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn orientation_consistent(&self) -> bool {
        self.orientation_consistent
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_interior())
    }

    pub fn num_interior(&self) -> usize {
        self.edges.iter().filter(|e| e.is_interior()).count()
    }

    pub fn num_boundary(&self) -> usize {
        self.edges.len() - self.num_interior()
    }

    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(Edge::is_interior)
    }

    /// Position of the edge `{u, v}` in canonical order.
    pub fn position(&self, u: usize, v: usize) -> Option<usize> {
        let key = [u.min(v), u.max(v)];
        self.edges.binary_search_by(|e| e.v.cmp(&key)).ok()
    }

    pub fn find(&self, u: usize, v: usize) -> Option<&Edge> {
        self.position(u, v).map(|i| &self.edges[i])
    }

    /// Neighbors of each triangle across its three edges (`None` on the
    /// boundary). Slot `i` is the edge opposite to corner `(i + 2) % 3`,
    /// i.e. the edge `tri[i] -> tri[(i + 1) % 3]`.
    pub fn triangle_neighbors(&self, mesh: &IndexedMesh) -> Vec<[Option<usize>; 3]> {
        let mut out = vec![[None; 3]; mesh.triangles.len()];
        for e in &self.edges {
            if let EdgeFaces::Interior { k, l, .. } = e.faces {
                for (t, other) in [(k, l), (l, k)] {
                    let tri = mesh.triangles[t];
                    for i in 0..3 {
                        let (a, b) = (tri[i], tri[(i + 1) % 3]);
                        if [a.min(b), a.max(b)] == e.v {
                            out[t][i] = Some(other);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Maps every undirected edge to its incident triangles.
pub fn build_adjacency(mesh: &IndexedMesh) -> Result<EdgeAdjacency, MeshError> {
    mesh.validate()?;
    // (lo, hi, triangle, forward) where forward means the triangle runs lo -> hi
    let mut half: Vec<(usize, usize, usize, bool)> = Vec::with_capacity(mesh.triangles.len() * 3);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            half.push((a.min(b), a.max(b), t, a < b));
        }
    }
    half.sort_unstable();

    let mut edges = Vec::with_capacity(half.len() / 2 + 1);
    let mut consistent_all = true;
    let mut i = 0;
    while i < half.len() {
        let (lo, hi, _, _) = half[i];
        let mut j = i;
        while j < half.len() && half[j].0 == lo && half[j].1 == hi {
            j += 1;
        }
        let group = &half[i..j];
        let faces = match group {
            [(_, _, t, _)] => EdgeFaces::Boundary(*t),
            [(_, _, t0, f0), (_, _, t1, f1)] => {
                let consistent = f0 != f1;
                consistent_all &= consistent;
                let (k, l) = if *f1 && !*f0 { (*t1, *t0) } else { (*t0, *t1) };
                EdgeFaces::Interior { k, l, consistent }
            }
            _ => return Err(MeshError::NonManifoldEdge(lo, hi, group.len())),
        };
        edges.push(Edge { v: [lo, hi], faces });
        i = j;
    }
    Ok(EdgeAdjacency {
        edges,
        orientation_consistent: consistent_all,
    })
}

/// Breadth-first reorientation so that every interior edge is traversed in
/// opposite directions by its two triangles. The first triangle of each
/// connected component keeps its winding. Fails on non-orientable input.
pub fn orient_consistently(mesh: &mut IndexedMesh) -> Result<(), MeshError> {
    let adjacency = build_adjacency(mesh)?;
    if adjacency.orientation_consistent() {
        return Ok(());
    }
    let neighbors = adjacency.triangle_neighbors(mesh);
    let n = mesh.triangles.len();
    // None = unvisited, Some(flip)
    let mut state: Vec<Option<bool>> = vec![None; n];
    let directed = |tri: [usize; 3], flip: bool, a: usize, b: usize| -> bool {
        // whether the (possibly flipped) triangle runs a -> b
        let t = if flip { [tri[0], tri[2], tri[1]] } else { tri };
        (0..3).any(|i| t[i] == a && t[(i + 1) % 3] == b)
    };
    for seed in 0..n {
        if state[seed].is_some() {
            continue;
        }
        state[seed] = Some(false);
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let flip_t = state[t].unwrap();
            let tri = mesh.triangles[t];
            for i in 0..3 {
                let Some(o) = neighbors[t][i] else { continue };
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let t_runs_ab = directed(tri, flip_t, a, b);
                // the neighbor must run the opposite way
                let o_tri = mesh.triangles[o];
                let needed_flip = directed(o_tri, false, a, b) == t_runs_ab;
                match state[o] {
                    None => {
                        state[o] = Some(needed_flip);
                        queue.push_back(o);
                    }
                    Some(f) if f != needed_flip => return Err(MeshError::NonOrientable),
                    Some(_) => {}
                }
            }
        }
    }
    for (tri, s) in mesh.triangles.iter_mut().zip(&state) {
        if s == &Some(true) {
            tri.swap(1, 2);
        }
    }
    Ok(())
}
