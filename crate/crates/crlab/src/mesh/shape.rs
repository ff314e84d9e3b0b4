use super::Triangulation;
use serde::Serialize;

/// Shape statistics of a triangulation.
///
/// `alpha_omega` is the smallest interior angle of the domain at a boundary
/// vertex (sum of the patch angles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    pub gamma: f64,
    pub phi: f64,
    pub h_max: f64,
    pub alpha_omega: f64,
}

pub fn shape_report(m: &Triangulation) -> ShapeReport {
    let mut gamma: f64 = 0.0;
    let mut phi = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    for t in 0..m.n_triangles() {
        let per: f64 = m.tri_edges[t].iter().map(|&e| m.edges[e].length).sum();
        let rho = 4.0 * m.area(t) / per;
        let h = m.diameter(t);
        gamma = gamma.max(h / rho);
        h_max = h_max.max(h);
        for &z in &m.triangles[t] {
            phi = phi.min(m.angle(t, z));
        }
    }
    let mut alpha = f64::INFINITY;
    for z in 0..m.n_vertices() {
        if m.on_boundary[z] {
            let s: f64 = m.patches[z].iter().map(|&t| m.angle(t, z)).sum();
            alpha = alpha.min(s);
        }
    }
    ShapeReport { gamma, phi, h_max, alpha_omega: alpha }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        let r = shape_report(&single_triangle().unwrap());
        assert!((r.phi - PI / 4.0).abs() < 1e-14);
        let c = crisscross(1).unwrap();
        let r = shape_report(&c);
        assert!((r.phi - PI / 4.0).abs() < 1e-14);
        let center = c.interior_vertices()[0];
        for &t in &c.patches[center] {
            assert!((c.angle(t, center) - PI / 2.0).abs() < 1e-14);
        }
        assert!((r.alpha_omega - PI / 2.0).abs() < 1e-14);
        let eq = Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]], vec![[0, 1, 2]]).unwrap();
        assert!((shape_report(&eq).gamma - 3f64.sqrt()).abs() < 1e-13);
    }
}
