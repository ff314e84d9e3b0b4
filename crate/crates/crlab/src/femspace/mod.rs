//! Finite element spaces on a triangulation: barycentric frames, the
//! non-conforming edge and triangle bubbles, degree-of-freedom maps and
//! quadrature.
//!
//! Every basis function is stored per triangle as a coefficient vector in
//! the local equispaced Lagrange basis of degree `k`; the bubbles are
//! polynomials of degree `k` and are therefore represented exactly by their
//! nodal values.

pub mod lagrange;
pub mod quadrature;

use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};
use crate::orthopoly::legendre_eval;
use lagrange::LagrangeElement;

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricFrame {
    pub points: [Point; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad: [[f64; 2]; 3],
}

impl BarycentricFrame {
    pub fn new(m: &Triangulation, t: usize) -> Self {
        let points = m.tri_points(t);
        let area = m.area(t);
        let mut grad = [[0.0; 2]; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let a = points[(i + 1) % 3];
            let b = points[(i + 2) % 3];
            *g = [-(b[1] - a[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
        }
        Self { points, area, grad }
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        let p = &self.points;
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }

    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p = &self.points;
        let l1 = self.grad[1][0] * (x[0] - p[0][0]) + self.grad[1][1] * (x[1] - p[0][1]);
        let l2 = self.grad[2][0] * (x[0] - p[0][0]) + self.grad[2][1] * (x[1] - p[0][1]);
        [1.0 - l1 - l2, l1, l2]
    }

    /// Outward unit normal of the edge opposite local vertex `i`.
    pub fn outward_normal(&self, i: usize) -> [f64; 2] {
        let g = self.grad[i];
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        [-g[0] / n, -g[1] / n]
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        crate::mesh::norm(crate::mesh::sub(self.points[(i + 2) % 3], self.points[(i + 1) % 3]))
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.barycentric(x).iter().all(|&l| l >= -tol)
    }
}

/// `d lambda_i / d n_kedge` with `n_kedge` the outward normal of the edge
/// opposite local vertex `kedge` (0-based).
pub fn barycentric_normal_derivative(m: &Triangulation, t: usize, i: usize, kedge: usize) -> f64 {
    let f = BarycentricFrame::new(m, t);
    let n = f.outward_normal(kedge);
    f.grad[i][0] * n[0] + f.grad[i][1] * n[1]
}

/// `L_k(1 - 2 lambda_A)` on the triangles adjacent to interior edge `e`,
/// with `A` the vertex opposite `e`.
pub fn cr_edge_bubble_eval(m: &Triangulation, e: usize, k: usize, x: Point) -> Result<f64> {
    if k % 2 == 0 {
        return Err(Error::ParityMismatch { k });
    }
    for &t in &m.edges[e].tris {
        let f = BarycentricFrame::new(m, t);
        if f.contains(x, 1e-12) {
            let a = m.local_index(t, m.opposite_vertex(t, e)).unwrap();
            return Ok(legendre_eval(k, 1.0 - 2.0 * f.barycentric(x)[a]).0);
        }
    }
    Err(Error::PointOutside)
}

/// `(-1 + sum_i L_k(1 - 2 lambda_i)) / 2` on triangle `t`.
pub fn cr_triangle_bubble_eval(m: &Triangulation, t: usize, k: usize, x: Point) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::ParityMismatch { k });
    }
    let f = BarycentricFrame::new(m, t);
    if !f.contains(x, 1e-12) {
        return Err(Error::PointOutside);
    }
    Ok(triangle_bubble_bary(k, f.barycentric(x)))
}

pub(crate) fn triangle_bubble_bary(k: usize, l: [f64; 3]) -> f64 {
    0.5 * (-1.0 + l.iter().map(|&li| legendre_eval(k, 1.0 - 2.0 * li).0).sum::<f64>())
}

/// Which discrete space a [`DofMap`] enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Conforming `S_{k,0}`.
    Conforming,
    /// Crouzeix-Raviart `CR_{k,0}`.
    CrouzeixRaviart,
    /// Discontinuous `P_{k-1}` pressures.
    Pressure,
}

/// Geometric owner of a scalar degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    /// Lagrange function at global node `node`.
    Node(usize),
    EdgeBubble(usize),
    TriangleBubble(usize),
    /// Local pressure node `local` in triangle `tri`.
    Pressure { tri: usize, local: usize },
}

/// Scalar basis functions touching one triangle, with their local Lagrange
/// coefficient vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ElementDofs {
    pub dofs: Vec<usize>,
    pub coeffs: Vec<Vec<f64>>,
}

/// Global numbering of the equispaced nodes of degree `k`: vertices, then
/// `k-1` nodes per edge from `v[0]` to `v[1]`, then interior nodes per
/// triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeNumbering {
    pub k: usize,
    pub n_nodes: usize,
    /// `local_to_global[t][a]`
    pub local_to_global: Vec<Vec<usize>>,
    pub on_boundary: Vec<bool>,
    pub is_vertex: Vec<bool>,
}

impl NodeNumbering {
    pub fn new(m: &Triangulation, k: usize) -> Self {
        assert!(k >= 1);
        let el = LagrangeElement::new(k);
        let nv = m.n_vertices();
        let ne = m.edges.len();
        let nint = el.len() - 3 * k;
        let n_nodes = nv + ne * (k - 1) + m.n_triangles() * nint;
        let mut on_boundary = vec![false; n_nodes];
        let mut is_vertex = vec![false; n_nodes];
        for z in 0..nv {
            on_boundary[z] = m.on_boundary[z];
            is_vertex[z] = true;
        }
        for (e, edge) in m.edges.iter().enumerate() {
            for p in 0..k - 1 {
                on_boundary[nv + e * (k - 1) + p] = edge.is_boundary();
            }
        }
        let mut local_to_global = Vec::with_capacity(m.n_triangles());
        for t in 0..m.n_triangles() {
            let tri = m.triangles[t];
            let mut g = Vec::with_capacity(el.len());
            let mut interior = 0;
            for a in &el.nodes {
                let zeros: Vec<usize> = (0..3).filter(|&i| a[i] == 0).collect();
                let idx = match zeros.len() {
                    2 => tri[(0..3).find(|&i| a[i] == k).unwrap()],
                    1 => {
                        let i = zeros[0];
                        let e = m.tri_edges[t][i];
                        let v1 = m.edges[e].v[1];
                        let p = a[m.local_index(t, v1).unwrap()];
                        nv + e * (k - 1) + p - 1
                    }
                    _ => {
                        interior += 1;
                        nv + ne * (k - 1) + t * nint + interior - 1
                    }
                };
                g.push(idx);
            }
            local_to_global.push(g);
        }
        Self { k, n_nodes, local_to_global, on_boundary, is_vertex }
    }
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: Space,
    pub k: usize,
    pub vector: bool,
    pub kinds: Vec<DofKind>,
    pub elements: Vec<ElementDofs>,
    /// Local basis the coefficient vectors refer to (degree `k` for
    /// velocities, `k-1` for pressures).
    pub local: LagrangeElement,
    pub nodes: Option<NodeNumbering>,
}

impl DofMap {
    pub fn n_scalar(&self) -> usize {
        self.kinds.len()
    }

    pub fn dim(&self) -> usize {
        if self.vector {
            2 * self.kinds.len()
        } else {
            self.kinds.len()
        }
    }

    /// Vector `c` with `c^T M q = int q` for pressure maps (all ones, as the
    /// nodal basis is a partition of unity).
    pub fn deflation(&self) -> Vec<f64> {
        vec![1.0; self.n_scalar()]
    }

    pub fn scalar_map(&self) -> DofMap {
        DofMap { vector: false, ..self.clone() }
    }

    /// Local Lagrange coefficients on triangle `t` of the scalar function
    /// with global coefficients `u`.
    pub fn local_coeffs(&self, t: usize, u: &[f64]) -> Vec<f64> {
        let el = &self.elements[t];
        let mut c = vec![0.0; self.local.len()];
        for (j, &d) in el.dofs.iter().enumerate() {
            if u[d] != 0.0 {
                for (ci, bi) in c.iter_mut().zip(&el.coeffs[j]) {
                    *ci += u[d] * bi;
                }
            }
        }
        c
    }

    pub fn eval_scalar(&self, t: usize, u: &[f64], l: [f64; 3]) -> f64 {
        let c = self.local_coeffs(t, u);
        self.local.values(l).iter().zip(&c).map(|(a, b)| a * b).sum()
    }

    pub fn grad_scalar(&self, m: &Triangulation, t: usize, u: &[f64], l: [f64; 3]) -> [f64; 2] {
        let f = BarycentricFrame::new(m, t);
        let c = self.local_coeffs(t, u);
        let g = self.local.gradients(l, &f.grad);
        let mut out = [0.0; 2];
        for (gi, ci) in g.iter().zip(&c) {
            out[0] += gi[0] * ci;
            out[1] += gi[1] * ci;
        }
        out
    }
}

/// Largest scaled edge moment `|int_E [u] L_j| / |E|` over all edges and
/// `j < k`, where `[u]` is the jump on interior edges and the trace on
/// boundary edges, for the scalar function with coefficients `u`.
pub fn jump_moment_residual(m: &Triangulation, d: &DofMap, u: &[f64]) -> f64 {
    let k = d.k;
    let (xs, ws) = crate::orthopoly::gauss_legendre(k + 1);
    let mut worst: f64 = 0.0;
    for edge in &m.edges {
        let [a, b] = edge.v;
        let mut moments = vec![0.0; k];
        for (i, &t) in edge.tris.iter().enumerate() {
            let sign = if i == 0 { 1.0 } else { -1.0 };
            let ia = m.local_index(t, a).unwrap();
            let ib = m.local_index(t, b).unwrap();
            let c = d.local_coeffs(t, u);
            if c.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (&x, &w) in xs.iter().zip(&ws) {
                let mut l = [0.0; 3];
                l[ia] = 0.5 * (1.0 - x);
                l[ib] = 0.5 * (1.0 + x);
                let v: f64 = d.local.values(l).iter().zip(&c).map(|(p, q)| p * q).sum();
                for (j, mj) in moments.iter_mut().enumerate() {
                    *mj += sign * w * v * legendre_eval(j, x).0 * 0.5 * edge.length;
                }
            }
        }
        worst = moments.iter().fold(worst, |acc, mj| acc.max(mj.abs() / edge.length));
    }
    worst
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Enumerates the basis of the requested space. Velocity maps use vector
/// index `c * n_scalar + s` for component `c`.
pub fn build_dofmap(m: &Triangulation, k: usize, space: Space, vector: bool) -> Result<DofMap> {
    if k == 0 {
        return Err(Error::InvalidDegree(k));
    }
    let nt = m.n_triangles();
    if space == Space::Pressure {
        let local = LagrangeElement::new(k - 1);
        let nl = local.len();
        let mut kinds = Vec::with_capacity(nt * nl);
        let mut elements = Vec::with_capacity(nt);
        for t in 0..nt {
            let mut el = ElementDofs::default();
            for a in 0..nl {
                el.dofs.push(kinds.len());
                el.coeffs.push(unit(nl, a));
                kinds.push(DofKind::Pressure { tri: t, local: a });
            }
            elements.push(el);
        }
        return Ok(DofMap { space, k, vector: false, kinds, elements, local, nodes: None });
    }

    let local = LagrangeElement::new(k);
    let nl = local.len();
    let nn = NodeNumbering::new(m, k);
    let mut kinds = Vec::new();
    let mut node_dof = vec![usize::MAX; nn.n_nodes];
    for g in 0..nn.n_nodes {
        let keep = !nn.on_boundary[g] && !(space == Space::CrouzeixRaviart && k % 2 == 1 && nn.is_vertex[g]);
        if keep {
            node_dof[g] = kinds.len();
            kinds.push(DofKind::Node(g));
        }
    }
    let mut elements = vec![ElementDofs::default(); nt];
    for t in 0..nt {
        for (a, &g) in nn.local_to_global[t].iter().enumerate() {
            if node_dof[g] != usize::MAX {
                elements[t].dofs.push(node_dof[g]);
                elements[t].coeffs.push(unit(nl, a));
            }
        }
    }
    if space == Space::CrouzeixRaviart {
        if k % 2 == 0 {
            for t in 0..nt {
                let d = kinds.len();
                kinds.push(DofKind::TriangleBubble(t));
                let c = (0..nl).map(|a| triangle_bubble_bary(k, local.node_bary(a))).collect();
                elements[t].dofs.push(d);
                elements[t].coeffs.push(c);
            }
        } else {
            for e in m.interior_edges() {
                let d = kinds.len();
                kinds.push(DofKind::EdgeBubble(e));
                for &t in &m.edges[e].tris {
                    let ia = m.local_index(t, m.opposite_vertex(t, e)).unwrap();
                    let c = (0..nl).map(|a| legendre_eval(k, 1.0 - 2.0 * local.node_bary(a)[ia]).0).collect();
                    elements[t].dofs.push(d);
                    elements[t].coeffs.push(c);
                }
            }
        }
    }
    Ok(DofMap { space, k, vector, kinds, elements, local, nodes: Some(nn) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::*;

    #[test]
    fn normal_derivative_formula() {
        let m = single_triangle().unwrap();
        // local vertex 0 is the right-angle corner, its opposite edge the hypotenuse
        let v = barycentric_normal_derivative(&m, 0, 0, 0);
        assert!((v - -std::f64::consts::SQRT_2).abs() < 1e-14);
        // closed form |E_i|/(2|K|) * (-1 if i = kedge else cos of the third angle)
        let m = Triangulation::new(vec![[0.0, 0.0], [1.3, 0.2], [0.4, 0.9]], vec![[0, 1, 2]]).unwrap();
        let f = BarycentricFrame::new(&m, 0);
        for i in 0..3 {
            for kk in 0..3 {
                let expect = if i == kk {
                    -f.edge_length(i) / (2.0 * f.area)
                } else {
                    let l = 3 - i - kk;
                    f.edge_length(i) / (2.0 * f.area) * m.angle(0, m.triangles[0][l]).cos()
                };
                assert!((barycentric_normal_derivative(&m, 0, i, kk) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimensions() {
        let c = crisscross(1).unwrap();
        assert_eq!(build_dofmap(&c, 1, Space::CrouzeixRaviart, false).unwrap().dim(), 4);
        assert_eq!(build_dofmap(&c, 1, Space::CrouzeixRaviart, true).unwrap().dim(), 8);
        assert_eq!(build_dofmap(&single_triangle().unwrap(), 1, Space::CrouzeixRaviart, false).unwrap().dim(), 0);
        assert_eq!(build_dofmap(&c, 1, Space::Pressure, false).unwrap().dim(), 4);
        for k in 1..7 {
            let d = build_dofmap(&c, k, Space::CrouzeixRaviart, false).unwrap();
            let nn = d.nodes.as_ref().unwrap();
            let interior = nn.on_boundary.iter().filter(|&&b| !b).count();
            let expect = if k % 2 == 0 { interior + c.n_triangles() } else { interior - 1 + 4 };
            assert_eq!(d.dim(), expect);
        }
    }

    #[test]
    fn bubble_values() {
        let m = single_triangle().unwrap();
        assert!((cr_triangle_bubble_eval(&m, 0, 4, [0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        let c = legendre_eval(4, 1.0 / 3.0).0;
        let v = cr_triangle_bubble_eval(&m, 0, 4, [1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((v - 0.5 * (-1.0 + 3.0 * c)).abs() < 1e-14);
        let c = crisscross(1).unwrap();
        let e = c.interior_edges()[0];
        let mid = {
            let [a, b] = c.edges[e].v;
            [(c.vertices[a][0] + c.vertices[b][0]) / 2.0, (c.vertices[a][1] + c.vertices[b][1]) / 2.0]
        };
        assert!((cr_edge_bubble_eval(&c, e, 5, mid).unwrap() - 1.0).abs() < 1e-14);
        let t = c.edges[e].tris[0];
        let opp = c.vertices[c.opposite_vertex(t, e)];
        assert!((cr_edge_bubble_eval(&c, e, 5, opp).unwrap() + 1.0).abs() < 1e-14);
        assert_eq!(cr_edge_bubble_eval(&c, e, 5, [5.0, 5.0]), Err(Error::PointOutside));
    }

    #[test]
    fn node_numbering_is_shared() {
        let m = crisscross(2).unwrap();
        let k = 4;
        let nn = NodeNumbering::new(&m, k);
        let el = LagrangeElement::new(k);
        let mut pos = vec![None; nn.n_nodes];
        for t in 0..m.n_triangles() {
            let f = BarycentricFrame::new(&m, t);
            for a in 0..el.len() {
                let x = f.point(el.node_bary(a));
                let g = nn.local_to_global[t][a];
                match pos[g] {
                    None => pos[g] = Some(x),
                    Some(y) => {
                        let y: Point = y;
                        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14)
                    }
                }
            }
        }
        assert!(pos.iter().all(|p| p.is_some()));
    }

    #[test]
    fn basis_functions_pass_jump_moments() {
        let m = crate::mesh::generators::crisscross(1).unwrap();
        for k in 1..=6 {
            let d = build_dofmap(&m, k, Space::CrouzeixRaviart, false).unwrap();
            for i in 0..d.n_scalar() {
                let r = jump_moment_residual(&m, &d, &unit(d.n_scalar(), i));
                assert!(r < 1e-11, "k={k} dof {i}: {r:e}");
            }
        }
    }

    #[test]
    fn jump_moments_detect_boundary_trace() {
        let m = crate::mesh::generators::crisscross(1).unwrap();
        let d = build_dofmap(&m, 2, Space::Pressure, false).unwrap();
        assert!(jump_moment_residual(&m, &d, &vec![1.0; d.n_scalar()]) > 0.1);
    }
}
