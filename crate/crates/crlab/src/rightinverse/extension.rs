//! Local corrections used where the fan construction does not apply:
//! quadratic interior-edge bubbles that fix trianglewise means and one
//! extension step across a triangle attached to a sub-triangulation.

use super::bubbles::build_extended_bubble_edge;
use super::{check_degree, CrSpace};
use crate::error::{Error, Result};
use crate::linalg;
use faer::Mat;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

const SVD_RTOL: f64 = 1e-12;
const FEASIBILITY_TOL: f64 = 1e-9;

/// Quadratic bubbles `4 lambda_a lambda_b n_E` on interior edges whose
/// divergence matches the trianglewise means of a pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernardiRaugel {
    pub edges: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// `max_K |int_K (q - div v)|`.
    pub residual: f64,
    #[serde(skip)]
    pub velocity: Vec<f64>,
}

/// Nodal interpolant of `4 lambda_a lambda_b n_E` on the patch of `e`.
fn quadratic_edge_bubble(space: &CrSpace, e: usize) -> Vec<f64> {
    let m = space.mesh;
    let ns = space.n_scalar();
    let edge = &m.edges[e];
    let el = &space.velocity.local;
    let mut v = vec![0.0; space.dim()];
    for &t in &edge.tris {
        let ia = m.local_index(t, edge.v[0]).unwrap();
        let ib = m.local_index(t, edge.v[1]).unwrap();
        for a in 0..el.len() {
            if let Some(d) = space.node_dof(space.global_node(t, a)) {
                let l = el.node_bary(a);
                let s = 4.0 * l[ia] * l[ib];
                v[d] = s * edge.normal[0];
                v[ns + d] = s * edge.normal[1];
            }
        }
    }
    v
}

/// Minimum-norm combination of interior-edge bubbles reproducing the
/// trianglewise means of `q`.
pub fn bernardi_raugel(space: &CrSpace, q: &[f64]) -> Result<BernardiRaugel> {
    let m = space.mesh;
    let edges = m.interior_edges();
    let target = space.pressure_means(q);
    let cols: Vec<Vec<f64>> = edges.iter().map(|&e| quadratic_edge_bubble(space, e)).collect();
    let means: Vec<Vec<f64>> = cols.iter().map(|v| space.div_means(v)).collect();
    let g = Mat::from_fn(m.n_triangles(), edges.len(), |t, j| means[j][t]);
    let (coefficients, _) = linalg::min_norm_solve(&g, &target, SVD_RTOL)?;
    let mut velocity = vec![0.0; space.dim()];
    for (c, v) in coefficients.iter().zip(&cols) {
        for (x, y) in velocity.iter_mut().zip(v) {
            *x += c * y;
        }
    }
    let got = space.div_means(&velocity);
    let residual = got.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = target.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    if residual > FEASIBILITY_TOL * (1.0 + scale) {
        return Err(Error::UnderdeterminedMeans(residual));
    }
    Ok(BernardiRaugel { edges, coefficients, residual, velocity })
}

/// Free nodal unknowns `(component, scalar dof)` and the linear
/// constraints on them, solved for the minimal broken energy.
struct NodalProblem {
    free: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl NodalProblem {
    fn new(free: Vec<(usize, usize)>) -> Self {
        let index = free.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        Self { free, index, rows: Vec::new(), rhs: Vec::new() }
    }

    /// Free column of local node `a`, component `c` on `t`.
    fn column(&self, space: &CrSpace, t: usize, a: usize, c: usize) -> Option<usize> {
        let d = space.node_dof(space.global_node(t, a))?;
        self.index.get(&(c, d)).copied()
    }

    /// Adds the constraint `div v|_t(l) = value`.
    fn div_at(&mut self, space: &CrSpace, t: usize, l: [f64; 3], value: f64) {
        let g = space.velocity.local.gradients(l, &space.frame(t).grad);
        let mut row = vec![0.0; self.free.len()];
        for (a, ga) in g.iter().enumerate() {
            for c in 0..2 {
                if let Some(i) = self.column(space, t, a, c) {
                    row[i] += ga[c];
                }
            }
        }
        self.rows.push(row);
        self.rhs.push(value);
    }

    /// Adds the constraint `int_t div v = value`.
    fn mean(&mut self, space: &CrSpace, t: usize, value: f64) {
        let g = space.gradient_integrals(t);
        let mut row = vec![0.0; self.free.len()];
        for c in 0..2 {
            for (a, ga) in g[c].iter().enumerate() {
                if let Some(i) = self.column(space, t, a, c) {
                    row[i] += ga;
                }
            }
        }
        self.rows.push(row);
        self.rhs.push(value);
    }

    /// Returns the global velocity and the constraint residual.
    fn solve(&self, space: &CrSpace, support: &[usize]) -> Result<(Vec<f64>, f64)> {
        let n = self.free.len();
        let mut a = Mat::zeros(n, n);
        for &t in support {
            let s = space.local_stiffness(t);
            let nl = s.nrows();
            for c in 0..2 {
                let cols: Vec<Option<usize>> = (0..nl).map(|p| self.column(space, t, p, c)).collect();
                for p in 0..nl {
                    for r in 0..nl {
                        if let (Some(i), Some(j)) = (cols[p], cols[r]) {
                            a[(i, j)] += s[(p, r)];
                        }
                    }
                }
            }
        }
        let cmat = linalg::from_rows(&self.rows);
        let y = linalg::spd_solve(&a, &cmat.transpose().to_owned())?;
        let schur = &cmat * &y;
        let (mu, _) = linalg::min_norm_solve(&schur, &self.rhs, SVD_RTOL)?;
        let x = linalg::matvec(&y, &mu);
        let residual = linalg::matvec(&cmat, &x).iter().zip(&self.rhs).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max);
        let ns = space.n_scalar();
        let mut v = vec![0.0; space.dim()];
        for (&(c, d), xi) in self.free.iter().zip(&x) {
            v[c * ns + d] = *xi;
        }
        Ok((v, residual))
    }
}

fn vertex_bary(i: usize) -> [f64; 3] {
    let mut l = [0.0; 3];
    l[i] = 1.0;
    l
}

/// Continuous field vanishing on the boundary of the patch of interior
/// edge `e` with zero divergence means, `div v|_t(y) = 1` and zero
/// divergence at every other vertex of the two triangles.
pub fn vertex_field(space: &CrSpace, e: usize, t: usize, y: usize) -> Result<Vec<f64>> {
    let m = space.mesh;
    let edge = m.edges.get(e).ok_or_else(|| Error::InvalidInput(format!("edge {e} out of range")))?;
    if !edge.tris.contains(&t) || m.local_index(t, y).is_none() {
        return Err(Error::InvalidInput(format!("vertex {y} of triangle {t} is not in the patch of edge {e}")));
    }
    if edge.is_boundary() {
        return Err(Error::ConstraintInfeasible(format!("edge {e} lies on the boundary")));
    }
    let el = &space.velocity.local;
    let mut free = BTreeSet::new();
    for &s in &edge.tris {
        for a in 0..el.len() {
            let outer = (0..3).any(|i| el.nodes[a][i] == 0 && m.tri_edges[s][i] != e);
            if let (false, Some(d)) = (outer, space.node_dof(space.global_node(s, a))) {
                free.insert((0, d));
                free.insert((1, d));
            }
        }
    }
    let mut p = NodalProblem::new(free.into_iter().collect());
    for &s in &edge.tris {
        p.mean(space, s, 0.0);
        for (i, &z) in m.triangles[s].iter().enumerate() {
            p.div_at(space, s, vertex_bary(i), if s == t && z == y { 1.0 } else { 0.0 });
        }
    }
    let (v, residual) = p.solve(space, &edge.tris)?;
    if residual > FEASIBILITY_TOL {
        return Err(Error::ConstraintInfeasible(format!("vertex field of edge {e} at ({t}, {y}) misses by {residual:e}")));
    }
    Ok(v)
}

/// Minimal-energy field on the interior nodes of `t` whose divergence
/// equals `q` at the pressure nodes of `t`.
fn interior_field(space: &CrSpace, t: usize, q: &[f64]) -> Result<(Vec<f64>, f64)> {
    let el = &space.velocity.local;
    let free: Vec<(usize, usize)> = (3 * space.k..el.len())
        .filter_map(|a| space.node_dof(space.global_node(t, a)))
        .flat_map(|d| [(0, d), (1, d)])
        .collect();
    let mut p = NodalProblem::new(free);
    let pl = &space.pressure.local;
    for (a, &d) in space.pressure.elements[t].dofs.iter().enumerate() {
        p.div_at(space, t, pl.node_bary(a), q[d]);
    }
    p.solve(space, &[t])
}

/// One extension step: a velocity whose divergence equals `q` on every
/// triangle outside `sub` and keeps the trianglewise means of `q` on `sub`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionStep {
    pub sub_triangles: Vec<usize>,
    pub outside: Vec<usize>,
    /// Edge joining each outside triangle to the sub-triangulation.
    pub joints: Vec<usize>,
    /// Coefficient of the modified edge bubble per outside triangle.
    pub bubble_coefficients: Vec<f64>,
    pub means_residual: f64,
    /// `max |div v - q|` over the pressure nodes outside `sub`.
    pub residual: f64,
    /// `max |q|` over the same nodes.
    pub q_max: f64,
    /// `max_K |int_K (q - div v)|` over `sub`.
    pub sub_means_residual: f64,
    pub energy: f64,
    #[serde(skip)]
    pub velocity: Vec<f64>,
}

fn add_scaled(v: &mut [f64], a: f64, w: &[f64]) {
    for (x, y) in v.iter_mut().zip(w) {
        *x += a * y;
    }
}

fn subtract_div(space: &CrSpace, q: &[f64], v: &[f64]) -> Vec<f64> {
    q.iter().zip(space.div_pressure(v)).map(|(a, b)| a - b).collect()
}

/// Extends a right inverse from the sub-triangulation `sub` to the triangles
/// attached to it (odd `k >= 5`).
pub fn acute_extension_step(space: &CrSpace, sub: &[usize], q: &[f64]) -> Result<ExtensionStep> {
    let m = space.mesh;
    let k = space.k;
    check_degree(k)?;
    if k % 2 == 0 {
        return Err(Error::ParityMismatch { k });
    }
    if q.len() != space.dim_p() {
        return Err(Error::InvalidInput(format!("pressure has {} coefficients, expected {}", q.len(), space.dim_p())));
    }
    let inside: BTreeSet<usize> = sub.iter().copied().collect();
    if inside.iter().any(|&t| t >= m.n_triangles()) {
        return Err(Error::InvalidInput("sub-triangulation index out of range".into()));
    }
    let outside: Vec<usize> = (0..m.n_triangles()).filter(|t| !inside.contains(t)).collect();
    let sub_triangles: Vec<usize> = inside.iter().copied().collect();
    if outside.is_empty() {
        return Ok(ExtensionStep {
            sub_triangles,
            outside,
            joints: vec![],
            bubble_coefficients: vec![],
            means_residual: 0.0,
            residual: 0.0,
            q_max: 0.0,
            sub_means_residual: 0.0,
            energy: 0.0,
            velocity: vec![0.0; space.dim()],
        });
    }
    let (subm, _) = m.submesh(&sub_triangles)?;
    if subm.on_boundary.iter().all(|&b| b) {
        return Err(Error::PreconditionViolated("the sub-triangulation has no interior vertex".into()));
    }

    // attach each outside triangle to the sub-triangulation
    let mut joints = Vec::new();
    let mut load: HashMap<usize, usize> = HashMap::new();
    for &t in &outside {
        let e = m.tri_edges[t]
            .iter()
            .copied()
            .find(|&e| m.edges[e].tris.iter().any(|s| inside.contains(s)))
            .ok_or_else(|| Error::PreconditionViolated(format!("triangle {t} shares no edge with the sub-triangulation")))?;
        let kp = m.edges[e].tris.iter().copied().find(|s| inside.contains(s)).unwrap();
        *load.entry(kp).or_default() += 1;
        joints.push(e);
    }
    if let Some((kp, _)) = load.iter().find(|(_, &n)| n > 2) {
        return Err(Error::PreconditionViolated(format!("triangle {kp} carries more than two attached triangles")));
    }

    let br = bernardi_raugel(space, q)?;
    let mut v = br.velocity.clone();
    let mut bubble_coefficients = Vec::new();
    for (&t, &e) in outside.iter().zip(&joints) {
        let q1 = subtract_div(space, q, &v);
        let edge = &m.edges[e];
        let z = m.opposite_vertex(t, e);
        // normal directed from t into the sub-triangulation
        let n = if edge.tris[0] == t { edge.normal } else { [-edge.normal[0], -edge.normal[1]] };
        let b = build_extended_bubble_edge(space, e)?;
        let dz = b.div_at_vertex(space, t, z, n);
        let alpha = space.pressure_at_vertex(&q1, t, z) / dz;
        add_scaled(&mut v, alpha, &b.vector(space, n));
        bubble_coefficients.push(alpha);

        let q2 = subtract_div(space, q, &v);
        for &y in &edge.v {
            let w = vertex_field(space, e, t, y)?;
            add_scaled(&mut v, space.pressure_at_vertex(&q2, t, y), &w);
        }

        let q3 = subtract_div(space, q, &v);
        let (w, res) = interior_field(space, t, &q3)?;
        let scale = q3.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
        if res > FEASIBILITY_TOL * (1.0 + scale) {
            return Err(Error::ConstraintInfeasible(format!("interior correction on triangle {t} misses by {res:e}")));
        }
        add_scaled(&mut v, 1.0, &w);
    }

    let rest = subtract_div(space, q, &v);
    let mut residual: f64 = 0.0;
    let mut q_max: f64 = 0.0;
    for &t in &outside {
        for &d in &space.pressure.elements[t].dofs {
            residual = residual.max(rest[d].abs());
            q_max = q_max.max(q[d].abs());
        }
    }
    let means = space.pressure_means(&rest);
    let sub_means_residual = sub_triangles.iter().map(|&t| means[t].abs()).fold(0.0, f64::max);
    let energy = space.energy(&v).max(0.0).sqrt();
    Ok(ExtensionStep {
        sub_triangles,
        outside,
        joints,
        bubble_coefficients,
        means_residual: br.residual,
        residual,
        q_max,
        sub_means_residual,
        energy,
        velocity: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::*;

    fn sample_pressure(s: &CrSpace) -> Vec<f64> {
        let mut q: Vec<f64> = (0..s.dim_p()).map(|i| ((i * 37 % 11) as f64) / 5.0 - 1.0).collect();
        s.remove_mean(&mut q);
        q
    }

    #[test]
    fn bernardi_raugel_matches_means() {
        let m = crisscross(2).unwrap();
        let s = CrSpace::new(&m, 5).unwrap();
        let q = sample_pressure(&s);
        let br = bernardi_raugel(&s, &q).unwrap();
        assert!(br.residual < 1e-10);
    }

    #[test]
    fn vertex_field_constraints() {
        let m = crisscross(1).unwrap();
        let s = CrSpace::new(&m, 5).unwrap();
        let e = m.interior_edges()[0];
        let t = m.edges[e].tris[0];
        let y = m.edges[e].v[0];
        let v = vertex_field(&s, e, t, y).unwrap();
        assert!((s.div_at_vertex(&v, t, y) - 1.0).abs() < 1e-9);
        let t2 = m.edges[e].tris[1];
        assert!(s.div_at_vertex(&v, t2, y).abs() < 1e-9);
        assert!(s.div_means(&v).iter().all(|x| x.abs() < 1e-9));
        let b = m.edges.iter().position(|e| e.is_boundary()).unwrap();
        let tb = m.edges[b].tris[0];
        assert!(matches!(vertex_field(&s, b, tb, m.edges[b].v[0]), Err(Error::ConstraintInfeasible(_))));
    }

    #[test]
    fn glued_triangle_step() {
        let m = glued_crisscross().unwrap();
        for k in [5, 7] {
            let s = CrSpace::new(&m, k).unwrap();
            let q = sample_pressure(&s);
            let st = acute_extension_step(&s, &[0, 1, 2, 3], &q).unwrap();
            assert_eq!(st.outside, vec![4]);
            assert!(st.residual <= 1e-9 * (1.0 + st.q_max), "{}", st.residual);
            assert!(st.sub_means_residual < 1e-9);
        }
    }

    #[test]
    fn empty_step_and_preconditions() {
        let m = crisscross(1).unwrap();
        let s = CrSpace::new(&m, 5).unwrap();
        let q = sample_pressure(&s);
        let st = acute_extension_step(&s, &[0, 1, 2, 3], &q).unwrap();
        assert!(st.velocity.iter().all(|&x| x == 0.0));
        assert!(matches!(acute_extension_step(&s, &[0, 1], &q), Err(Error::PreconditionViolated(_))));
        let s6 = CrSpace::new(&m, 6).unwrap();
        assert!(acute_extension_step(&s6, &[0], &vec![0.0; s6.dim_p()]).is_err());
    }
}
