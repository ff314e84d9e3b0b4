//! Conforming triangulations: validation, derived edges, oriented normals
//! and counterclockwise vertex patches.

pub mod generators;
pub mod io;
pub mod shape;
pub mod topology;

use crate::error::{Error, Result};
use std::collections::HashMap;

pub type Point = [f64; 2];

/// An edge with its endpoints (`v[0] < v[1]`), adjacent triangles in
/// ascending order, length and fixed unit normal.
///
/// Boundary normals point outward. Interior normals point from the
/// lower-index adjacent triangle into the higher-index one.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    pub tris: Vec<usize>,
    pub length: f64,
    pub normal: Point,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tris.len() == 1
    }

    pub fn other_vertex(&self, z: usize) -> usize {
        if self.v[0] == z {
            self.v[1]
        } else {
            self.v[0]
        }
    }
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// `tri_edges[t][i]` is the edge opposite local vertex `i`.
    pub tri_edges: Vec<[usize; 3]>,
    /// Triangles around each vertex in counterclockwise order. Boundary
    /// patches start at the triangle whose edge `(z, a)` with `a` the next
    /// counterclockwise vertex lies on the boundary.
    pub patches: Vec<Vec<usize>>,
    pub on_boundary: Vec<bool>,
    edge_index: HashMap<(usize, usize), usize>,
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Angle between `a - z` and `b - z` in `[0, pi]`.
pub fn angle_at(z: Point, a: Point, b: Point) -> f64 {
    let u = sub(a, z);
    let v = sub(b, z);
    cross(u, v).abs().atan2(dot(u, v))
}

fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * cross(sub(p[1], p[0]), sub(p[2], p[0]))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Triangulation {
    /// Validates raw data and derives all connectivity.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, false)
    }

    /// Like [`Triangulation::new`] but reorients clockwise triangles.
    pub fn new_fix_orientation(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, true)
    }

    fn build(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>, fix: bool) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidInput("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::InvalidInput(format!("triangle {t} has a vertex index out of range")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle(t));
            }
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let a = signed_area(p);
            let h = (0..3).map(|i| norm(sub(p[(i + 1) % 3], p[i]))).fold(0.0, f64::max);
            if a.abs() <= 1e-12 * h * h {
                return Err(Error::DegenerateTriangle(t));
            }
            if a < 0.0 {
                if fix {
                    tri.swap(1, 2);
                } else {
                    return Err(Error::BadOrientation(t));
                }
            }
        }
        let mut used = vec![false; nv];
        for tri in &triangles {
            for &i in tri {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!("vertex {i} belongs to no triangle")));
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_index = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tri_edges = vec![[0usize; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                if let Some(prev) = directed.insert((a, b), t) {
                    return Err(Error::NonConforming(format!(
                        "triangles {prev} and {t} overlap along edge ({a},{b})"
                    )));
                }
                let k = key(a, b);
                let e = *edge_index.entry(k).or_insert_with(|| {
                    edges.push(Edge { v: [k.0, k.1], tris: Vec::new(), length: 0.0, normal: [0.0, 0.0] });
                    edges.len() - 1
                });
                edges[e].tris.push(t);
                if edges[e].tris.len() > 2 {
                    return Err(Error::NonConforming(format!("edge ({},{}) has more than two triangles", k.0, k.1)));
                }
                tri_edges[t][i] = e;
            }
        }
        for (e, edge) in edges.iter_mut().enumerate() {
            let t = edge.tris[0];
            let tri = triangles[t];
            let i = (0..3).find(|&i| tri_edges[t][i] == e).unwrap();
            let a = vertices[tri[(i + 1) % 3]];
            let b = vertices[tri[(i + 2) % 3]];
            let d = sub(b, a);
            let l = norm(d);
            edge.length = l;
            edge.normal = [d[1] / l, -d[0] / l];
        }

        let mut on_boundary = vec![false; nv];
        for e in &edges {
            if e.is_boundary() {
                on_boundary[e.v[0]] = true;
                on_boundary[e.v[1]] = true;
            }
        }

        // hanging nodes and vertices inside foreign triangles
        for (z, &p) in vertices.iter().enumerate() {
            for e in edges.iter().filter(|e| e.is_boundary()) {
                if e.v.contains(&z) {
                    continue;
                }
                let a = vertices[e.v[0]];
                let b = vertices[e.v[1]];
                let d = sub(b, a);
                let s = dot(sub(p, a), d) / dot(d, d);
                let dist = cross(d, sub(p, a)).abs() / norm(d);
                if s > 1e-12 && s < 1.0 - 1e-12 && dist <= 1e-12 * norm(d) {
                    return Err(Error::NonConforming(format!("vertex {z} is a hanging node on edge ({},{})", e.v[0], e.v[1])));
                }
            }
            for (t, tri) in triangles.iter().enumerate() {
                if tri.contains(&z) {
                    continue;
                }
                let q = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
                let area = signed_area(q);
                let inside = (0..3).all(|i| {
                    let s = signed_area([q[(i + 1) % 3], q[(i + 2) % 3], p]) / area;
                    s > 1e-12
                });
                if inside {
                    return Err(Error::NonConforming(format!("vertex {z} lies inside triangle {t}")));
                }
            }
        }

        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                incident[i].push(t);
            }
        }
        let mut patches = Vec::with_capacity(nv);
        for z in 0..nv {
            // for each triangle at z: (next ccw vertex a, previous b)
            let ab: Vec<(usize, usize, usize)> = incident[z]
                .iter()
                .map(|&t| {
                    let tri = triangles[t];
                    let j = tri.iter().position(|&v| v == z).unwrap();
                    (t, tri[(j + 1) % 3], tri[(j + 2) % 3])
                })
                .collect();
            let by_a: HashMap<usize, usize> = ab.iter().enumerate().map(|(i, x)| (x.1, i)).collect();
            let starts: Vec<usize> = (0..ab.len())
                .filter(|&i| !ab.iter().any(|x| x.2 == ab[i].1))
                .collect();
            let start = match (on_boundary[z], starts.len()) {
                (false, 0) => (0..ab.len()).min_by_key(|&i| ab[i].0).unwrap(),
                (true, 1) => starts[0],
                _ => return Err(Error::NonConforming(format!("vertex {z} has a non-manifold patch"))),
            };
            let mut order = vec![ab[start].0];
            let mut cur = start;
            while let Some(&nxt) = by_a.get(&ab[cur].2) {
                if nxt == start {
                    break;
                }
                order.push(ab[nxt].0);
                cur = nxt;
                if order.len() > ab.len() {
                    break;
                }
            }
            if order.len() != ab.len() {
                return Err(Error::NonConforming(format!("vertex {z} has a non-manifold patch")));
            }
            if !on_boundary[z] {
                let total: f64 = order
                    .iter()
                    .map(|&t| {
                        let tri = triangles[t];
                        let j = tri.iter().position(|&v| v == z).unwrap();
                        angle_at(vertices[z], vertices[tri[(j + 1) % 3]], vertices[tri[(j + 2) % 3]])
                    })
                    .sum();
                if (total - 2.0 * std::f64::consts::PI).abs() > 1e-8 {
                    return Err(Error::NonConforming(format!("triangles around vertex {z} overlap")));
                }
            }
            patches.push(order);
        }

        Ok(Triangulation { vertices, triangles, edges, tri_edges, patches, on_boundary, edge_index })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    pub fn area(&self, t: usize) -> f64 {
        let tri = self.triangles[t];
        signed_area([self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]])
    }

    pub fn tri_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn local_index(&self, t: usize, z: usize) -> Option<usize> {
        self.triangles[t].iter().position(|&v| v == z)
    }

    /// Interior angle of triangle `t` at its vertex `z`.
    pub fn angle(&self, t: usize, z: usize) -> f64 {
        let tri = self.triangles[t];
        let j = self.local_index(t, z).expect("vertex not in triangle");
        angle_at(self.vertices[z], self.vertices[tri[(j + 1) % 3]], self.vertices[tri[(j + 2) % 3]])
    }

    /// Diameter of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        self.tri_edges[t].iter().map(|&e| self.edges[e].length).fold(0.0, f64::max)
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&z| !self.on_boundary[z]).collect()
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| !self.edges[e].is_boundary()).collect()
    }

    /// Edges incident to vertex `z`.
    pub fn vertex_edges(&self, z: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.patches[z]
            .iter()
            .flat_map(|&t| {
                let j = self.local_index(t, z).unwrap();
                [self.tri_edges[t][(j + 1) % 3], self.tri_edges[t][(j + 2) % 3]]
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Triangles sharing an edge with `t`.
    pub fn neighbours(&self, t: usize) -> Vec<usize> {
        self.tri_edges[t]
            .iter()
            .flat_map(|&e| self.edges[e].tris.iter().copied())
            .filter(|&s| s != t)
            .collect()
    }

    /// Vertex of `t` opposite to edge `e`.
    pub fn opposite_vertex(&self, t: usize, e: usize) -> usize {
        let i = (0..3).find(|&i| self.tri_edges[t][i] == e).expect("edge not in triangle");
        self.triangles[t][i]
    }

    /// Sub-triangulation made of the listed triangles.
    pub fn submesh(&self, tris: &[usize]) -> Result<(Triangulation, Vec<usize>)> {
        let mut map = vec![usize::MAX; self.n_vertices()];
        let mut verts = Vec::new();
        let mut back = Vec::new();
        let mut out = Vec::new();
        for &t in tris {
            let mut nt = [0; 3];
            for (i, &v) in self.triangles[t].iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = verts.len();
                    verts.push(self.vertices[v]);
                    back.push(v);
                }
                nt[i] = map[v];
            }
            out.push(nt);
        }
        Ok((Triangulation::new(verts, out)?, back))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Triangulation {
        Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn split_square_counts() {
        let m = square();
        assert_eq!(m.edges.len(), 5);
        assert_eq!(m.interior_edges().len(), 1);
        let e = m.edge_between(0, 2).unwrap();
        let n = m.edges[e].normal;
        // from triangle 0 (below the diagonal) into triangle 1
        assert!((n[0] + n[1]).abs() < 1e-14 && n[1] > 0.0);
    }

    #[test]
    fn boundary_normals_point_outward() {
        let m = square();
        for e in m.edges.iter().filter(|e| e.is_boundary()) {
            let t = e.tris[0];
            let c = m.tri_points(t);
            let cen = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
            let mid = [(m.vertices[e.v[0]][0] + m.vertices[e.v[1]][0]) / 2.0, (m.vertices[e.v[0]][1] + m.vertices[e.v[1]][1]) / 2.0];
            assert!(dot(sub(mid, cen), e.normal) > 0.0);
        }
    }

    #[test]
    fn hanging_node_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let t = vec![[0, 1, 2], [0, 4, 3], [4, 2, 3]];
        assert!(matches!(Triangulation::new(v, t), Err(Error::NonConforming(_))));
    }

    #[test]
    fn orientation_and_degeneracy() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(Triangulation::new(v.clone(), vec![[0, 2, 1]]), Err(Error::BadOrientation(0))));
        let m = Triangulation::new_fix_orientation(v, vec![[0, 2, 1]]).unwrap();
        assert!(m.area(0) > 0.0);
        let d = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(Triangulation::new(d, vec![[0, 1, 2]]), Err(Error::DegenerateTriangle(0))));
    }

    #[test]
    fn patches_are_counterclockwise() {
        let m = generators::crisscross(1).unwrap();
        let c = m.interior_vertices()[0];
        let p = &m.patches[c];
        assert_eq!(p.len(), 4);
        for w in 0..4 {
            let t = p[w];
            let s = p[(w + 1) % 4];
            let j = m.local_index(t, c).unwrap();
            let prev = m.triangles[t][(j + 2) % 3];
            let js = m.local_index(s, c).unwrap();
            assert_eq!(m.triangles[s][(js + 1) % 3], prev);
        }
    }
}
