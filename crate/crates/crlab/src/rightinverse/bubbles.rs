//! Non-conforming bubbles with replaced interiors: the trace on the
//! element boundaries is prescribed and the interior nodal values minimise
//! the broken Dirichlet energy.

use super::{quad_form, CrSpace};
use crate::error::{Error, Result};
use crate::femspace::triangle_bubble_bary;
use crate::linalg;
use crate::orthopoly::{legendre_eval, phi_tilde};
use faer::Mat;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BubbleOwner {
    Edge(usize),
    Triangle(usize),
}

/// A modified bubble stored per triangle of its support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedBubble {
    pub owner: BubbleOwner,
    pub k: usize,
    pub triangles: Vec<usize>,
    /// Local Lagrange coefficients per support triangle.
    #[serde(skip)]
    pub local: Vec<Vec<f64>>,
    /// Local coefficients of the unmodified bubble.
    #[serde(skip)]
    pub reference: Vec<Vec<f64>>,
    /// Quartic correction factor per support triangle (zero for triangle
    /// bubbles).
    pub alpha: Vec<f64>,
    /// Coefficients in the scalar Crouzeix-Raviart basis of the whole mesh.
    #[serde(skip)]
    pub scalar: Vec<f64>,
    /// `|B~|_{H^1(T)}`
    pub energy: f64,
    /// `|B^CR|_{H^1(T)}`
    pub reference_energy: f64,
}

/// Measured defects of the defining properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleCheck {
    /// Largest deviation from the prescribed trace on sampled edge points.
    pub trace: f64,
    /// Largest jump across the owning edge (zero for triangle bubbles).
    pub jump: f64,
    /// Largest `|grad B~ - grad B^CR|` over all vertices of the support.
    pub vertex_gradient: f64,
    /// Largest `|int_K d_n B~|` over the support and the relevant directions.
    pub mean_div: f64,
}

fn interior_start(k: usize) -> usize {
    3 * k
}

/// Replaces the interior nodal values of `c` by the minimiser of the local
/// energy with the boundary nodal values fixed.
fn min_energy_fill(space: &CrSpace, t: usize, c: &mut [f64]) -> Result<()> {
    let n = c.len();
    let s = interior_start(space.k);
    if s >= n {
        return Ok(());
    }
    let a = space.local_stiffness(t);
    let ni = n - s;
    let aii = Mat::from_fn(ni, ni, |i, j| a[(s + i, s + j)]);
    let rhs = Mat::from_fn(ni, 1, |i, _| -(0..s).map(|j| a[(s + i, j)] * c[j]).sum::<f64>());
    let x = linalg::spd_solve(&aii, &rhs).map_err(|_| Error::SingularInteriorSolve(t))?;
    for i in 0..ni {
        c[s + i] = x[(i, 0)];
    }
    Ok(())
}

fn scalar_coefficients(space: &CrSpace, owner: usize, tris: &[usize], local: &[Vec<f64>], reference: &[Vec<f64>]) -> Vec<f64> {
    let mut scalar = vec![0.0; space.n_scalar()];
    if let Some(d) = space.bubble_dof(owner) {
        scalar[d] = 1.0;
    }
    for (j, &t) in tris.iter().enumerate() {
        for a in 0..local[j].len() {
            if let Some(d) = space.node_dof(space.global_node(t, a)) {
                scalar[d] = local[j][a] - reference[j][a];
            }
        }
    }
    scalar
}

fn energy_of(space: &CrSpace, tris: &[usize], local: &[Vec<f64>]) -> f64 {
    tris.iter().zip(local).map(|(&t, c)| quad_form(&space.local_stiffness(t), c)).sum::<f64>().max(0.0).sqrt()
}

/// Modified edge bubble for odd `k >= 5` on interior edge `e`: trace
/// `phi~_k` on `e`, the Legendre trace of the edge bubble on the outer
/// edges of the edge patch, minimal-energy interiors, and a quartic
/// correction `alpha lambda_1^2 lambda_2^2` that removes the mean of the
/// normal derivative on both triangles.
pub fn build_extended_bubble_edge(space: &CrSpace, e: usize) -> Result<ExtendedBubble> {
    let m = space.mesh;
    let k = space.k;
    if k % 2 == 0 || k < 5 {
        return Err(Error::InvalidDegree(k));
    }
    let edge = m.edges.get(e).ok_or_else(|| Error::InvalidInput(format!("edge {e} out of range")))?;
    if edge.is_boundary() {
        return Err(Error::InvalidInput(format!("edge {e} is on the boundary")));
    }
    let el = &space.velocity.local;
    let nl = el.len();
    let [v1, v2] = edge.v;
    let n = edge.normal;
    let mut local = Vec::new();
    let mut reference = Vec::new();
    let mut quartic = Vec::new();
    let mut alpha = Vec::new();
    for &t in &edge.tris {
        let ia = m.local_index(t, m.opposite_vertex(t, e)).unwrap();
        let i1 = m.local_index(t, v1).unwrap();
        let i2 = m.local_index(t, v2).unwrap();
        let bcr: Vec<f64> = (0..nl).map(|a| legendre_eval(k, 1.0 - 2.0 * el.node_bary(a)[ia]).0).collect();
        let mut w = bcr.clone();
        for (a, wa) in w.iter_mut().enumerate() {
            if el.nodes[a][ia] == 0 {
                let l = el.node_bary(a);
                *wa = phi_tilde(k, l[i2] - l[i1])?;
            }
        }
        min_energy_fill(space, t, &mut w)?;
        let psi: Vec<f64> = (0..nl)
            .map(|a| {
                let l = el.node_bary(a);
                (l[i1] * l[i2]).powi(2)
            })
            .collect();
        let g = space.gradient_integrals(t);
        let dn = |c: &[f64]| n[0] * linalg::dot(&g[0], c) + n[1] * linalg::dot(&g[1], c);
        alpha.push(dn(&w) / dn(&psi));
        local.push(w);
        reference.push(bcr);
        quartic.push(psi);
    }
    // the two factors agree because the outer traces have zero mean
    let a_common = 0.5 * (alpha[0] + alpha[1]);
    for (w, psi) in local.iter_mut().zip(&quartic) {
        for (x, p) in w.iter_mut().zip(psi) {
            *x -= a_common * p;
        }
    }
    let tris = edge.tris.clone();
    let scalar = scalar_coefficients(space, e, &tris, &local, &reference);
    let energy = energy_of(space, &tris, &local);
    let reference_energy = energy_of(space, &tris, &reference);
    Ok(ExtendedBubble { owner: BubbleOwner::Edge(e), k, triangles: tris, local, reference, alpha, scalar, energy, reference_energy })
}

/// Modified triangle bubble for even `k >= 4`: the trace of the triangle
/// bubble on `dK` with a minimal-energy interior. Its normal-derivative
/// means already vanish, so no quartic correction is needed.
pub fn build_extended_bubble_triangle(space: &CrSpace, t: usize) -> Result<ExtendedBubble> {
    let k = space.k;
    if k % 2 == 1 || k < 4 {
        return Err(Error::InvalidDegree(k));
    }
    if t >= space.mesh.n_triangles() {
        return Err(Error::InvalidInput(format!("triangle {t} out of range")));
    }
    let el = &space.velocity.local;
    let bcr: Vec<f64> = (0..el.len()).map(|a| triangle_bubble_bary(k, el.node_bary(a))).collect();
    let mut w = bcr.clone();
    min_energy_fill(space, t, &mut w)?;
    let tris = vec![t];
    let local = vec![w];
    let reference = vec![bcr];
    let scalar = scalar_coefficients(space, t, &tris, &local, &reference);
    let energy = energy_of(space, &tris, &local);
    let reference_energy = energy_of(space, &tris, &reference);
    Ok(ExtendedBubble { owner: BubbleOwner::Triangle(t), k, triangles: tris, local, reference, alpha: vec![0.0], scalar, energy, reference_energy })
}

fn vertex_bary(i: usize) -> [f64; 3] {
    let mut l = [0.0; 3];
    l[i] = 1.0;
    l
}

impl ExtendedBubble {
    fn position(&self, t: usize) -> Option<usize> {
        self.triangles.iter().position(|&s| s == t)
    }

    /// Value on support triangle `t` at barycentric point `l`; zero off the
    /// support.
    pub fn value(&self, space: &CrSpace, t: usize, l: [f64; 3]) -> f64 {
        self.position(t).map_or(0.0, |j| space.local_value(&self.local[j], l))
    }

    pub fn gradient(&self, space: &CrSpace, t: usize, l: [f64; 3]) -> [f64; 2] {
        self.position(t).map_or([0.0; 2], |j| space.local_gradient(t, &self.local[j], l))
    }

    /// `div(B~ d)|_K(z) = d . grad B~|_K(z)`.
    pub fn div_at_vertex(&self, space: &CrSpace, t: usize, z: usize, d: [f64; 2]) -> f64 {
        let Some(i) = space.mesh.local_index(t, z) else { return 0.0 };
        let g = self.gradient(space, t, vertex_bary(i));
        d[0] * g[0] + d[1] * g[1]
    }

    /// Global vector coefficients of `B~ d`.
    pub fn vector(&self, space: &CrSpace, d: [f64; 2]) -> Vec<f64> {
        let ns = space.n_scalar();
        let mut v = vec![0.0; 2 * ns];
        for (s, &x) in self.scalar.iter().enumerate() {
            v[s] = d[0] * x;
            v[ns + s] = d[1] * x;
        }
        v
    }

    /// Samples the defining properties with `samples` points per edge.
    pub fn check(&self, space: &CrSpace, samples: usize) -> BubbleCheck {
        let m = space.mesh;
        let k = self.k;
        let samples = samples.max(2);
        let mut out = BubbleCheck { trace: 0.0, jump: 0.0, vertex_gradient: 0.0, mean_div: 0.0 };
        let edge = match self.owner {
            BubbleOwner::Edge(e) => Some(e),
            BubbleOwner::Triangle(_) => None,
        };
        for (j, &t) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let e_loc = m.tri_edges[t][i];
                for s in 0..samples {
                    let x = s as f64 / (samples - 1) as f64;
                    let mut l = [0.0; 3];
                    l[(i + 1) % 3] = 1.0 - x;
                    l[(i + 2) % 3] = x;
                    let target = match edge {
                        Some(e) if e == e_loc => {
                            let [v1, v2] = m.edges[e].v;
                            let (i1, i2) = (m.local_index(t, v1).unwrap(), m.local_index(t, v2).unwrap());
                            phi_tilde(k, l[i2] - l[i1]).unwrap_or(f64::NAN) - self.alpha_mean() * (l[i1] * l[i2]).powi(2)
                        }
                        _ => space.local_value(&self.reference[j], l),
                    };
                    out.trace = out.trace.max((space.local_value(&self.local[j], l) - target).abs());
                }
            }
            for i in 0..3 {
                let a = space.local_gradient(t, &self.local[j], vertex_bary(i));
                let b = space.local_gradient(t, &self.reference[j], vertex_bary(i));
                out.vertex_gradient = out.vertex_gradient.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
            let g = space.gradient_integrals(t);
            let grad_mean = [linalg::dot(&g[0], &self.local[j]), linalg::dot(&g[1], &self.local[j])];
            let md = match edge {
                Some(e) => {
                    let n = m.edges[e].normal;
                    (n[0] * grad_mean[0] + n[1] * grad_mean[1]).abs()
                }
                None => grad_mean[0].abs().max(grad_mean[1].abs()),
            };
            out.mean_div = out.mean_div.max(md);
        }
        if let Some(e) = edge {
            let [v1, v2] = m.edges[e].v;
            let tr = &m.edges[e].tris;
            for s in 0..samples {
                let x = s as f64 / (samples - 1) as f64;
                let val = |t: usize| {
                    let mut l = [0.0; 3];
                    l[m.local_index(t, v1).unwrap()] = 1.0 - x;
                    l[m.local_index(t, v2).unwrap()] = x;
                    self.value(space, t, l)
                };
                out.jump = out.jump.max((val(tr[0]) - val(tr[1])).abs());
            }
        }
        out
    }

    pub fn alpha_mean(&self) -> f64 {
        self.alpha.iter().sum::<f64>() / self.alpha.len() as f64
    }
}
