//! Oracles shared by the integration tests, written independently of the
//! library implementations.

#![allow(dead_code)]

use crlab::mesh::generators::{crisscross, diagonal_square, perturb};
use crlab::mesh::topology::CriticalKind;
use crlab::mesh::Triangulation;
use rand::Rng;

/// Classification at `eta = 0` by exact collinearity: `z` is critical iff
/// the edges at `z` lie on at most two lines through `z`.
pub fn collinearity_oracle(m: &Triangulation) -> Vec<Option<CriticalKind>> {
    (0..m.n_vertices())
        .map(|z| {
            let dirs: Vec<[f64; 2]> = m
                .edges
                .iter()
                .filter(|e| e.v.contains(&z))
                .map(|e| {
                    let o = e.other_vertex(z);
                    let d = [m.vertices[o][0] - m.vertices[z][0], m.vertices[o][1] - m.vertices[z][1]];
                    let n = d[0].hypot(d[1]);
                    [d[0] / n, d[1] / n]
                })
                .collect();
            let mut lines: Vec<[f64; 2]> = Vec::new();
            for d in &dirs {
                if !lines.iter().any(|l| (l[0] * d[1] - l[1] * d[0]).abs() < 1e-12) {
                    lines.push(*d);
                }
            }
            if lines.len() > 2 {
                return None;
            }
            let tris = (0..m.n_triangles()).filter(|&t| m.triangles[t].contains(&z)).count();
            let boundary = m.edges.iter().any(|e| e.v.contains(&z) && e.tris.len() == 1);
            Some(match (boundary, tris) {
                (false, _) => CriticalKind::Inner,
                (true, 1) => CriticalKind::Acute,
                (true, 2) => CriticalKind::Flat,
                _ => CriticalKind::Concave,
            })
        })
        .collect()
}

/// Small structured mesh with a random subset of vertices moved.
pub fn random_mesh(rng: &mut impl Rng) -> Triangulation {
    let n = rng.random_range(1..=2);
    let mut m = if rng.random_bool(0.7) { crisscross(n).unwrap() } else { diagonal_square(n).unwrap() };
    let h = 1.0 / n as f64;
    for z in 0..m.n_vertices() {
        if rng.random_bool(0.3) {
            let d = [rng.random_range(-0.12..0.12) * h, rng.random_range(-0.12..0.12) * h];
            let d = if m.edges.iter().any(|e| e.v.contains(&z) && e.tris.len() == 1) { [0.0, 0.0] } else { d };
            m = perturb(&m, z, d).unwrap();
        }
    }
    m
}

/// `sin(sum a) / prod sin a`.
pub fn det_closed_form(a: &[f64]) -> f64 {
    a.iter().sum::<f64>().sin() / a.iter().map(|x| x.sin()).product::<f64>()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_gauss(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Random admissible apex angles: `n + 1` angles of at least `pi / 12`.
pub fn random_angles(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let lo = std::f64::consts::PI / 12.0;
    (0..=n).map(|_| rng.random_range(lo..std::f64::consts::PI / 2.0)).collect()
}
