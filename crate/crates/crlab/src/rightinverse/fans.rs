//! One linear system per fan of obtuse critical points.

use super::bubbles::{build_extended_bubble_edge, ExtendedBubble};
use super::{functional_a_with, CrSpace};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::topology::Fan;
use faer::Mat;
use serde::Serialize;
use std::f64::consts::PI;

/// Threshold on `|det(T + Delta)|` below which a fan is rejected.
pub const FAN_DET_MIN: f64 = 1e-12;

fn cot(a: f64) -> f64 {
    a.cos() / a.sin()
}

fn check_angles(angles: &[f64]) -> Result<()> {
    if angles.len() < 2 {
        return Err(Error::InvalidAngles(format!("need at least two apex angles, got {}", angles.len())));
    }
    if let Some(a) = angles.iter().find(|&&a| !(a > 0.0 && a < PI)) {
        return Err(Error::InvalidAngles(format!("apex angle {a} outside (0, pi)")));
    }
    Ok(())
}

/// Tridiagonal `T` for apex angles `a_1 .. a_{n+1}`: diagonal
/// `sin(a_j + a_{j+1}) / (sin a_j sin a_{j+1})`, off-diagonal
/// `1 / sin a_{j+1}`.
pub fn fan_t_matrix(apex_angles: &[f64]) -> Result<Mat<f64>> {
    check_angles(apex_angles)?;
    let n = apex_angles.len() - 1;
    let a = apex_angles;
    Ok(Mat::from_fn(n, n, |i, j| {
        if i == j {
            (a[i] + a[i + 1]).sin() / (a[i].sin() * a[i + 1].sin())
        } else if j == i + 1 {
            1.0 / a[i + 1].sin()
        } else if i == j + 1 {
            1.0 / a[j + 1].sin()
        } else {
            0.0
        }
    }))
}

/// `sin(sum a_j) / prod sin a_j`.
pub fn fan_t_det_closed_form(apex_angles: &[f64]) -> Result<f64> {
    check_angles(apex_angles)?;
    let s: f64 = apex_angles.iter().sum();
    Ok(s.sin() / apex_angles.iter().map(|a| a.sin()).product::<f64>())
}

fn rows(a: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// Assembled fan system. `m_direct[i][j]` is `A_{T,z_i}` applied to
/// `div(B~_{E_j} N_j)` evaluated from the bubbles; the geometric form is
/// `S D (T + Delta) S` with `S = diag((-1)^j)`, which has the same
/// determinant and solution norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanSystem {
    pub apex: usize,
    pub members: Vec<usize>,
    pub edges: Vec<usize>,
    /// Angles at the apex in `K_1 .. K_{n+1}`.
    pub apex_angles: Vec<f64>,
    pub d: Vec<f64>,
    pub t: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub m_direct: Vec<Vec<f64>>,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub det_t: f64,
    pub det_t_closed: f64,
    pub det_t_delta: f64,
    /// `max |M_direct - S D (T + Delta) S| / max |M_direct|`.
    pub consistency: f64,
    /// `|alpha| k (k + 1) / (h |r|)` with `h` the largest member edge.
    pub alpha_constant: f64,
    #[serde(skip)]
    pub bubbles: Vec<ExtendedBubble>,
}

impl FanSystem {
    /// `sum_j alpha_j B~_{E_j} N_j` as global vector coefficients.
    pub fn velocity(&self, space: &CrSpace, normals: &[[f64; 2]]) -> Vec<f64> {
        let mut v = vec![0.0; space.dim()];
        for ((b, &a), &n) in self.bubbles.iter().zip(&self.alpha).zip(normals) {
            for (x, y) in v.iter_mut().zip(b.vector(space, n)) {
                *x += a * y;
            }
        }
        v
    }
}

/// Builds and solves the fan system for pressure `q`.
pub fn fan_system(space: &CrSpace, fan: &Fan, q: &[f64]) -> Result<FanSystem> {
    let m = space.mesh;
    let k = space.k as f64;
    let n = fan.members.len();
    let bubbles = fan.edges.iter().map(|&e| build_extended_bubble_edge(space, e)).collect::<Result<Vec<_>>>()?;

    let mut md = Mat::zeros(n, n);
    for i in 0..n {
        let y = fan.members[i];
        let anchor = Some(fan.edges[i]);
        for j in 0..n {
            md[(i, j)] = functional_a_with(m, y, anchor, |t| bubbles[j].div_at_vertex(space, t, y, fan.normals[j]));
        }
    }
    let r: Vec<f64> = (0..n).map(|i| space.functional_a(q, fan.members[i], Some(fan.edges[i]))).collect();

    let apex_angles: Vec<f64> = fan.triangles.iter().map(|&t| m.angle(t, fan.apex)).collect();
    let t = fan_t_matrix(&apex_angles)?;
    let delta: Vec<f64> = (0..n)
        .map(|j| cot(m.angle(fan.triangles[j], fan.members[j])) + cot(m.angle(fan.triangles[j + 1], fan.members[j])))
        .collect();
    let d: Vec<f64> = fan.edges.iter().map(|&e| -k * (k + 1.0) / m.edges[e].length).collect();
    let mut tpd = t.clone();
    for j in 0..n {
        tpd[(j, j)] += delta[j];
    }
    let det_t_delta = tpd.determinant();
    if !(det_t_delta.abs() >= FAN_DET_MIN) {
        return Err(Error::FanSingular(det_t_delta));
    }
    let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    let geometric = Mat::from_fn(n, n, |i, j| sign(i) * d[i] * tpd[(i, j)] * sign(j));
    let scale = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| md[(i, j)].abs()).fold(0.0, f64::max);
    let consistency = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (md[(i, j)] - geometric[(i, j)]).abs())
        .fold(0.0, f64::max)
        / scale;

    let alpha = linalg::lu_solve(&md, &r);
    let h = fan.edges.iter().map(|&e| m.edges[e].length).fold(0.0, f64::max);
    let rn = linalg::norm2(&r);
    let alpha_constant = if rn > 0.0 { linalg::norm2(&alpha) * k * (k + 1.0) / (h * rn) } else { 0.0 };
    Ok(FanSystem {
        apex: fan.apex,
        members: fan.members.clone(),
        edges: fan.edges.clone(),
        det_t: t.determinant(),
        det_t_closed: fan_t_det_closed_form(&apex_angles)?,
        apex_angles,
        d,
        t: rows(&t),
        delta,
        m_direct: rows(&md),
        r,
        alpha,
        det_t_delta,
        consistency,
        alpha_constant,
        bubbles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::*;
    use crate::mesh::topology::{classify_critical, fan_decomposition};

    #[test]
    fn one_by_one() {
        let t = fan_t_matrix(&[PI / 3.0, PI / 3.0]).unwrap();
        assert!((t[(0, 0)] - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(fan_t_matrix(&[1.0]).is_err());
        assert!(fan_t_matrix(&[1.0, 4.0]).is_err());
    }

    #[test]
    fn determinant_identity() {
        let a = [0.4, 0.7, 0.3, 0.5];
        let det = fan_t_matrix(&a).unwrap().determinant();
        assert!((det - fan_t_det_closed_form(&a).unwrap()).abs() < 1e-12 * det.abs());
    }

    #[test]
    fn crisscross_fan() {
        let m = crisscross(1).unwrap();
        let c = classify_critical(&m, 0.01).unwrap();
        let f = fan_decomposition(&m, &c).unwrap();
        let s = CrSpace::new(&m, 5).unwrap();
        let q = s.piecewise_constant(&[1.0, -1.0, 1.0, -1.0]);
        let fs = fan_system(&s, &f.fans[0], &q).unwrap();
        assert!(fs.consistency < 1e-9, "{}", fs.consistency);
        assert!((fs.det_t - fs.det_t_closed).abs() < 1e-12);
        assert!(fs.delta[0].abs() < 1e-12);
        assert!((fs.r[0].abs() - 4.0).abs() < 1e-12);
    }
}
