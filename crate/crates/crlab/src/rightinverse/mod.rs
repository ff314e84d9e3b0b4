//! Constructive right inverse of the broken divergence: modified
//! non-conforming bubbles, the alternating vertex functionals, fan systems,
//! the projection onto Scott-Vogelius pressures and the extension step at
//! acute corners.

pub mod bubbles;
pub mod extension;
pub mod fans;
pub mod picr;

pub use bubbles::{build_extended_bubble_edge, build_extended_bubble_triangle, BubbleCheck, BubbleOwner, ExtendedBubble};
pub use extension::{acute_extension_step, bernardi_raugel, vertex_field, BernardiRaugel, ExtensionStep};
pub use fans::{fan_system, fan_t_det_closed_form, fan_t_matrix, FanSystem};
pub use picr::{pi_cr, PiCr, RightInverseReport, TriangleSystem};

use crate::assembly::{quadrature_degree, ReferenceMatrices};
use crate::error::{Error, Result};
use crate::femspace::{build_dofmap, BarycentricFrame, DofKind, DofMap, Space};
use crate::mesh::topology::{functional_order, Classification};
use crate::mesh::Triangulation;
use faer::Mat;
use serde::Serialize;

/// The Crouzeix-Raviart velocity space of degree `k` on a mesh together
/// with its discontinuous pressure space and the local element matrices
/// every construction in this module needs.
pub struct CrSpace<'a> {
    pub mesh: &'a Triangulation,
    pub k: usize,
    /// Vector velocity map (component `c` at offset `c * n_scalar`).
    pub velocity: DofMap,
    pub pressure: DofMap,
    node_dof: Vec<usize>,
    bubble_dof: Vec<usize>,
    refm: ReferenceMatrices,
}

impl<'a> CrSpace<'a> {
    pub fn new(mesh: &'a Triangulation, k: usize) -> Result<Self> {
        let velocity = build_dofmap(mesh, k, Space::CrouzeixRaviart, true)?;
        let pressure = build_dofmap(mesh, k, Space::Pressure, false)?;
        let nn = velocity.nodes.as_ref().expect("velocity map has nodes");
        let mut node_dof = vec![usize::MAX; nn.n_nodes];
        let owners = if k % 2 == 0 { mesh.n_triangles() } else { mesh.edges.len() };
        let mut bubble_dof = vec![usize::MAX; owners];
        for (d, kind) in velocity.kinds.iter().enumerate() {
            match *kind {
                DofKind::Node(g) => node_dof[g] = d,
                DofKind::EdgeBubble(e) => bubble_dof[e] = d,
                DofKind::TriangleBubble(t) => bubble_dof[t] = d,
                DofKind::Pressure { .. } => {}
            }
        }
        let refm = ReferenceMatrices::new(k, quadrature_degree(k));
        Ok(Self { mesh, k, velocity, pressure, node_dof, bubble_dof, refm })
    }

    pub fn n_scalar(&self) -> usize {
        self.velocity.n_scalar()
    }

    pub fn dim(&self) -> usize {
        self.velocity.dim()
    }

    pub fn dim_p(&self) -> usize {
        self.pressure.dim()
    }

    /// Scalar dof of global Lagrange node `g`, if it is free.
    pub fn node_dof(&self, g: usize) -> Option<usize> {
        let d = self.node_dof[g];
        (d != usize::MAX).then_some(d)
    }

    /// Scalar dof of the non-conforming bubble owned by edge (odd `k`) or
    /// triangle (even `k`) `owner`.
    pub fn bubble_dof(&self, owner: usize) -> Option<usize> {
        self.bubble_dof.get(owner).copied().filter(|&d| d != usize::MAX)
    }

    pub fn global_node(&self, t: usize, a: usize) -> usize {
        self.velocity.nodes.as_ref().unwrap().local_to_global[t][a]
    }

    pub fn frame(&self, t: usize) -> BarycentricFrame {
        BarycentricFrame::new(self.mesh, t)
    }

    pub fn local_stiffness(&self, t: usize) -> Mat<f64> {
        self.refm.local_stiffness(&self.frame(t))
    }

    /// `int_K grad N_a` for every local basis function, per component.
    pub fn gradient_integrals(&self, t: usize) -> [Vec<f64>; 2] {
        let f = self.frame(t);
        std::array::from_fn(|c| {
            let b = self.refm.local_coupling(&f, c);
            (0..b.ncols()).map(|a| (0..b.nrows()).map(|r| b[(r, a)]).sum()).collect()
        })
    }

    /// Local coefficients of both components of `v` on triangle `t`.
    pub fn local_vector(&self, t: usize, v: &[f64]) -> [Vec<f64>; 2] {
        let ns = self.n_scalar();
        [self.velocity.local_coeffs(t, &v[..ns]), self.velocity.local_coeffs(t, &v[ns..])]
    }

    /// Gradient of a local scalar polynomial at barycentric point `l`.
    pub fn local_gradient(&self, t: usize, c: &[f64], l: [f64; 3]) -> [f64; 2] {
        let g = self.velocity.local.gradients(l, &self.frame(t).grad);
        g.iter().zip(c).fold([0.0; 2], |acc, (gi, ci)| [acc[0] + gi[0] * ci, acc[1] + gi[1] * ci])
    }

    pub fn local_value(&self, c: &[f64], l: [f64; 3]) -> f64 {
        self.velocity.local.values(l).iter().zip(c).map(|(a, b)| a * b).sum()
    }

    fn local_div(&self, t: usize, c: &[Vec<f64>; 2], l: [f64; 3]) -> f64 {
        self.local_gradient(t, &c[0], l)[0] + self.local_gradient(t, &c[1], l)[1]
    }

    /// `div(v|_K)(z)` at vertex `z` of triangle `t`.
    pub fn div_at_vertex(&self, v: &[f64], t: usize, z: usize) -> f64 {
        let i = self.mesh.local_index(t, z).expect("vertex not in triangle");
        let mut l = [0.0; 3];
        l[i] = 1.0;
        self.local_div(t, &self.local_vector(t, v), l)
    }

    /// `div_T v` as coefficients of the pressure space (exact, by nodal
    /// interpolation of a polynomial of degree `k - 1`).
    pub fn div_pressure(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_p()];
        for t in 0..self.mesh.n_triangles() {
            let c = self.local_vector(t, v);
            for (a, &d) in self.pressure.elements[t].dofs.iter().enumerate() {
                out[d] = self.local_div(t, &c, self.pressure.local.node_bary(a));
            }
        }
        out
    }

    /// `int_K div v` per triangle.
    pub fn div_means(&self, v: &[f64]) -> Vec<f64> {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let c = self.local_vector(t, v);
                let g = self.gradient_integrals(t);
                (0..2).map(|k| linalg_dot(&g[k], &c[k])).sum()
            })
            .collect()
    }

    /// `|v|^2_{H^1(T)}`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let a = self.local_stiffness(t);
                self.local_vector(t, v).iter().map(|c| quad_form(&a, c)).sum::<f64>()
            })
            .sum()
    }

    fn pressure_local<'q>(&self, t: usize, q: &'q [f64]) -> &'q [f64] {
        let d = &self.pressure.elements[t].dofs;
        &q[d[0]..d[0] + d.len()]
    }

    /// `|q|^2_{L^2(K)}` per triangle.
    pub fn pressure_norms_sq(&self, q: &[f64]) -> Vec<f64> {
        (0..self.mesh.n_triangles())
            .map(|t| quad_form(&(&self.refm.pressure_mass * (2.0 * self.mesh.area(t))), self.pressure_local(t, q)))
            .collect()
    }

    pub fn pressure_norm(&self, q: &[f64]) -> f64 {
        self.pressure_norms_sq(q).iter().sum::<f64>().max(0.0).sqrt()
    }

    /// `int_K q` per triangle.
    pub fn pressure_means(&self, q: &[f64]) -> Vec<f64> {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let m = &self.refm.pressure_mass;
                let ql = self.pressure_local(t, q);
                let s: f64 = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * ql[j]).sum::<f64>()).sum();
                2.0 * self.mesh.area(t) * s
            })
            .collect()
    }

    /// `q|_K(z)` at vertex `z` of `t`.
    pub fn pressure_at_vertex(&self, q: &[f64], t: usize, z: usize) -> f64 {
        let i = self.mesh.local_index(t, z).expect("vertex not in triangle");
        self.pressure_local(t, q)[self.pressure.local.vertex_node(i)]
    }

    /// Pressure with the given constant value per triangle.
    pub fn piecewise_constant(&self, values: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.dim_p()];
        for (t, &v) in values.iter().enumerate() {
            for &d in &self.pressure.elements[t].dofs {
                q[d] = v;
            }
        }
        q
    }

    /// Subtracts the global mean of `q`.
    pub fn remove_mean(&self, q: &mut [f64]) {
        let total: f64 = self.pressure_means(q).iter().sum();
        let area: f64 = (0..self.mesh.n_triangles()).map(|t| self.mesh.area(t)).sum();
        for x in q.iter_mut() {
            *x -= total / area;
        }
    }

    /// The alternating functional `A_{T,z}(q)` with the patch order of
    /// [`functional_order`].
    pub fn functional_a(&self, q: &[f64], z: usize, anchor: Option<usize>) -> f64 {
        functional_a_with(self.mesh, z, anchor, |t| self.pressure_at_vertex(q, t, z))
    }
}

fn linalg_dot(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dot(a, b)
}

pub(crate) fn quad_form(a: &Mat<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    (0..n).map(|i| x[i] * (0..n).map(|j| a[(i, j)] * x[j]).sum::<f64>()).sum()
}

/// `sum_l (-1)^l value(K_l)` over the patch of `z`, numbered from 1 in the
/// order of [`functional_order`].
pub fn functional_a_with(m: &Triangulation, z: usize, anchor: Option<usize>, value: impl Fn(usize) -> f64) -> f64 {
    functional_order(m, z, anchor)
        .into_iter()
        .enumerate()
        .map(|(i, t)| if i % 2 == 0 { -value(t) } else { value(t) })
        .sum()
}

/// Position (from 1) of triangle `t` in the functional order of `z`.
pub fn functional_position(m: &Triangulation, z: usize, anchor: Option<usize>, t: usize) -> usize {
    functional_order(m, z, anchor).iter().position(|&s| s == t).expect("triangle not in patch") + 1
}

/// Residual of one vertex functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvResidual {
    pub vertex: usize,
    pub value: f64,
    pub tolerance: f64,
}

/// Result of the Scott-Vogelius membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvMembership {
    pub eta: f64,
    pub residuals: Vec<SvResidual>,
    /// Largest `|A_{T,z}(q)| / (k^2 / h_z |q|)`.
    pub max_scaled: f64,
    pub member: bool,
}

/// Relative tolerance of the membership test.
pub const SV_TOL: f64 = 1e-9;

/// Checks `A_{T,z}(q) = 0` at every critical point of the classification,
/// scaled by `k^2 / h_z |q|_{L^2}` with `h_z` the largest diameter in the
/// patch.
pub fn sv_membership(space: &CrSpace, q: &[f64], c: &Classification) -> SvMembership {
    let m = space.mesh;
    let k = space.k as f64;
    let qn = space.pressure_norm(q);
    let mut residuals = Vec::new();
    let mut max_scaled: f64 = 0.0;
    for z in c.critical() {
        let h = m.patches[z].iter().map(|&t| m.diameter(t)).fold(0.0, f64::max);
        let scale = k * k / h * qn;
        let value = space.functional_a(q, z, None);
        let tolerance = SV_TOL * scale;
        if scale > 0.0 {
            max_scaled = max_scaled.max(value.abs() / scale);
        } else if value != 0.0 {
            max_scaled = f64::INFINITY;
        }
        residuals.push(SvResidual { vertex: z, value, tolerance });
    }
    let member = residuals.iter().all(|r| r.value.abs() <= r.tolerance);
    SvMembership { eta: c.eta, residuals, max_scaled, member }
}

pub(crate) fn check_degree(k: usize) -> Result<()> {
    if (k % 2 == 1 && k < 5) || (k % 2 == 0 && k < 4) {
        return Err(Error::InvalidDegree(k));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::*;
    use crate::mesh::topology::classify_critical;

    #[test]
    fn alternating_patch_value() {
        let m = crisscross(1).unwrap();
        let order = functional_order(&m, 4, None);
        let v = functional_a_with(&m, 4, None, |t| {
            let l = order.iter().position(|&s| s == t).unwrap() + 1;
            if l % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        assert_eq!(v, 4.0);
        assert_eq!(functional_a_with(&m, 4, None, |_| 2.5), 0.0);
    }

    #[test]
    fn constant_pressure_is_member() {
        let m = crisscross(1).unwrap();
        let s = CrSpace::new(&m, 5).unwrap();
        let q = s.piecewise_constant(&[1.0; 4]);
        let c = classify_critical(&m, 0.01).unwrap();
        assert!(sv_membership(&s, &q, &c).member);
        let q = s.piecewise_constant(&[1.0, -1.0, 1.0, -1.0]);
        let r = sv_membership(&s, &q, &c);
        assert!(!r.member);
        assert_eq!(r.residuals.len(), 1);
    }

    #[test]
    fn pressure_helpers() {
        let m = crisscross(1).unwrap();
        let s = CrSpace::new(&m, 4).unwrap();
        let mut q = s.piecewise_constant(&[1.0, 2.0, 3.0, 4.0]);
        let means = s.pressure_means(&q);
        assert!((means[1] - 2.0 * m.area(1)).abs() < 1e-14);
        s.remove_mean(&mut q);
        assert!(s.pressure_means(&q).iter().sum::<f64>().abs() < 1e-14);
        assert!((s.pressure_at_vertex(&q, 2, 4) - s.pressure_at_vertex(&q, 2, m.triangles[2][0])).abs() < 1e-14);
    }
}
