//! The projection `Pi^CR`: a broken velocity with zero divergence means
//! whose divergence matches `q` in every critical vertex functional.

use super::bubbles::build_extended_bubble_triangle;
use super::fans::{fan_system, FanSystem};
use super::{check_degree, functional_a_with, functional_position, sv_membership, CrSpace, SvMembership};
use crate::error::{Error, Result};
use crate::mesh::topology::{classify_critical, fan_decomposition, Classification};
use serde::Serialize;
use std::collections::BTreeMap;

/// Local 2x2 system of one triangle (even `k`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleSystem {
    pub triangle: usize,
    /// `V_1, V_2`: critical vertices first.
    pub vertices: [usize; 2],
    /// Critical vertices assigned to this triangle.
    pub active: Vec<usize>,
    /// Position of the triangle in the functional order of `V_s`.
    pub positions: [usize; 2],
    pub r: [f64; 2],
    pub delta: [f64; 2],
    /// `max_s |A_{T,V_s}(div v_K) - r_s|` with `v_K` evaluated directly.
    pub residual: f64,
    /// Determinant of the geometric 2x2 bracket and `2 |K| sin(alpha_3)`.
    pub det_identity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiCr {
    pub k: usize,
    pub eta: f64,
    #[serde(skip)]
    pub velocity: Vec<f64>,
    pub fans: Vec<FanSystem>,
    pub triangles: Vec<TriangleSystem>,
    /// `max_K |int_K div v|`.
    pub div_means_max: f64,
    /// Membership of `q - div_T v`.
    pub sv: SvMembership,
    /// `|v|_{H^1(T)}`
    pub energy: f64,
    pub q_norm: f64,
}

impl PiCr {
    /// `|v|_{H^1(T)} / (sqrt(log(k + 1)) |q|)`.
    pub fn log_ratio(&self) -> f64 {
        if self.q_norm == 0.0 {
            0.0
        } else {
            self.energy / (((self.k + 1) as f64).ln().sqrt() * self.q_norm)
        }
    }
}

fn check_mean(space: &CrSpace, q: &[f64]) -> Result<f64> {
    if q.len() != space.dim_p() {
        return Err(Error::InvalidInput(format!("pressure has {} coefficients, expected {}", q.len(), space.dim_p())));
    }
    let qn = space.pressure_norm(q);
    let mean: f64 = space.pressure_means(q).iter().sum();
    let area: f64 = (0..space.mesh.n_triangles()).map(|t| space.mesh.area(t)).sum();
    if mean.abs() > 1e-10 * qn * area.sqrt() {
        return Err(Error::InvalidInput(format!("pressure mean {mean:e} is not zero")));
    }
    Ok(qn)
}

/// Applies `Pi^CR` to the mean-zero pressure `q` (odd `k >= 5` through the
/// fan systems, even `k >= 4` through per-triangle systems).
pub fn pi_cr(space: &CrSpace, q: &[f64], eta: f64) -> Result<PiCr> {
    let k = space.k;
    check_degree(k)?;
    let q_norm = check_mean(space, q)?;
    let c = classify_critical(space.mesh, eta)?;
    let mut velocity = vec![0.0; space.dim()];
    let mut fans = Vec::new();
    let mut triangles = Vec::new();
    if k % 2 == 1 {
        let acute = c.classes().acute;
        if !acute.is_empty() {
            return Err(Error::PreconditionViolated(format!("acute critical points {acute:?} need the extension step")));
        }
        let dec = fan_decomposition(space.mesh, &c)?;
        for fan in &dec.fans {
            let fs = fan_system(space, fan, q)?;
            for (x, y) in velocity.iter_mut().zip(fs.velocity(space, &fan.normals)) {
                *x += y;
            }
            fans.push(fs);
        }
    } else {
        triangles = even_systems(space, q, &c, &mut velocity)?;
    }
    let div = space.div_pressure(&velocity);
    let rest: Vec<f64> = q.iter().zip(&div).map(|(a, b)| a - b).collect();
    let sv = sv_membership(space, &rest, &c);
    let div_means_max = space.div_means(&velocity).iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    let energy = space.energy(&velocity).max(0.0).sqrt();
    Ok(PiCr { k, eta, velocity, fans, triangles, div_means_max, sv, energy, q_norm })
}

/// Assigns every critical point to a triangle of its patch that has at
/// most two critical vertices, balancing the load per triangle.
fn assign_triangles(space: &CrSpace, c: &Classification) -> Result<BTreeMap<usize, usize>> {
    let m = space.mesh;
    if m.n_triangles() < 2 {
        return Err(Error::PreconditionViolated("the mesh must contain more than one triangle".into()));
    }
    let ncrit = |t: usize| m.triangles[t].iter().filter(|&&z| c.is_critical(z)).count();
    let mut load = vec![0usize; m.n_triangles()];
    let mut owner = BTreeMap::new();
    for z in c.critical() {
        let t = m.patches[z]
            .iter()
            .copied()
            .filter(|&t| ncrit(t) <= 2)
            .min_by_key(|&t| (load[t], t))
            .ok_or_else(|| Error::PreconditionViolated(format!("every triangle at vertex {z} has three critical vertices")))?;
        load[t] += 1;
        owner.insert(z, t);
    }
    Ok(owner)
}

fn even_systems(space: &CrSpace, q: &[f64], c: &Classification, velocity: &mut [f64]) -> Result<Vec<TriangleSystem>> {
    let m = space.mesh;
    let kf = space.k as f64;
    let owner = assign_triangles(space, c)?;
    let mut out = Vec::new();
    for t in 0..m.n_triangles() {
        let active: Vec<usize> = owner.iter().filter(|(_, &s)| s == t).map(|(&z, _)| z).collect();
        if active.is_empty() {
            continue;
        }
        let mut order: Vec<usize> = active.clone();
        order.extend(m.triangles[t].iter().copied().filter(|z| c.is_critical(*z) && !active.contains(z)));
        order.extend(m.triangles[t].iter().copied().filter(|z| !c.is_critical(*z)));
        let vs = [order[0], order[1]];
        let v3 = order[2];
        let f = space.frame(t);
        let li = |z: usize| m.local_index(t, z).unwrap();
        let len = [f.edge_length(li(vs[0])), f.edge_length(li(vs[1]))];
        let normals = [f.outward_normal(li(vs[0])), f.outward_normal(li(vs[1]))];
        let a3 = m.angle(t, v3);
        let positions = [functional_position(m, vs[0], None, t), functional_position(m, vs[1], None, t)];
        let r: [f64; 2] = std::array::from_fn(|s| if active.contains(&vs[s]) { space.functional_a(q, vs[s], None) } else { 0.0 });
        let sigma: [f64; 2] = std::array::from_fn(|s| if positions[s] % 2 == 1 { 1.0 } else { -1.0 });
        let pre = 1.0 / (kf * (kf + 1.0) * a3.sin());
        let (sr0, sr1) = (sigma[0] * r[0], sigma[1] * r[1]);
        let delta = [
            pre * (len[1] * sr0 + len[0] * a3.cos() * sr1),
            pre * (len[1] * a3.cos() * sr0 + len[0] * sr1),
        ];
        let b = build_extended_bubble_triangle(space, t)?;
        let residual = (0..2)
            .map(|s| {
                let y = vs[s];
                let got = functional_a_with(m, y, None, |u| {
                    if u == t {
                        (0..2).map(|j| delta[j] * b.div_at_vertex(space, t, y, normals[j])).sum()
                    } else {
                        0.0
                    }
                });
                (got - r[s]).abs()
            })
            .fold(0.0, f64::max);
        for j in 0..2 {
            for (x, y) in velocity.iter_mut().zip(b.vector(space, normals[j])) {
                *x += delta[j] * y;
            }
        }
        let det_identity = [len[0] * len[1] * (1.0 - a3.cos().powi(2)), 2.0 * m.area(t) * a3.sin()];
        out.push(TriangleSystem { triangle: t, vertices: vs, active, positions, r, delta, residual, det_identity });
    }
    Ok(out)
}

/// Serializable summary of one `Pi^CR` application.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RightInverseReport {
    pub mesh: String,
    pub k: usize,
    pub eta: f64,
    pub fans: Vec<FanSystem>,
    pub triangles: Vec<TriangleSystem>,
    pub alpha: Vec<Vec<f64>>,
    pub div_means_max: f64,
    pub sv_residuals: Vec<f64>,
    pub sv_max_scaled: f64,
    pub sv_member: bool,
    pub q_norm: f64,
    pub energy: f64,
    pub log_ratio: f64,
    /// `|v|_{H^1(T)} / |q|` of the minimum-norm right inverse, if computed.
    pub min_norm_ratio: Option<f64>,
}

impl RightInverseReport {
    pub fn new(mesh: &str, p: &PiCr, min_norm_ratio: Option<f64>) -> Self {
        Self {
            mesh: mesh.to_string(),
            k: p.k,
            eta: p.eta,
            fans: p.fans.clone(),
            triangles: p.triangles.clone(),
            alpha: p.fans.iter().map(|f| f.alpha.clone()).collect(),
            div_means_max: p.div_means_max,
            sv_residuals: p.sv.residuals.iter().map(|r| r.value).collect(),
            sv_max_scaled: p.sv.max_scaled,
            sv_member: p.sv.member,
            q_norm: p.q_norm,
            energy: p.energy,
            log_ratio: p.log_ratio(),
            min_norm_ratio,
        }
    }
}
