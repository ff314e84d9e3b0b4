//! Structured mesh generators and the `name:params` spec parser.

use super::{Point, Triangulation};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Unit square with `n x n` cells, each split into four triangles around
/// its centre.
pub fn crisscross(n: usize) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidInput("crisscross needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let mut v: Vec<Point> = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            v.push([i as f64 * h, j as f64 * h]);
        }
    }
    let g = |i: usize, j: usize| j * (n + 1) + i;
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let c = v.len();
            v.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            let (bl, br, tr, tl) = (g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1));
            t.push([bl, br, c]);
            t.push([br, tr, c]);
            t.push([tr, tl, c]);
            t.push([tl, bl, c]);
        }
    }
    Triangulation::new(v, t)
}

/// Unit square with `n x n` cells split along the lower-left to upper-right
/// diagonal.
pub fn diagonal_square(n: usize) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidInput("diagonal_square needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let mut v: Vec<Point> = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            v.push([i as f64 * h, j as f64 * h]);
        }
    }
    let g = |i: usize, j: usize| j * (n + 1) + i;
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (bl, br, tr, tl) = (g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1));
            t.push([bl, br, tr]);
            t.push([bl, tr, tl]);
        }
    }
    Triangulation::new(v, t)
}

/// Nodal patch around the origin with the given angles (radians) at the
/// centre. A closed patch results when the angles sum to `2 pi`.
pub fn fan_patch(angles: &[f64]) -> Result<Triangulation> {
    if angles.is_empty() {
        return Err(Error::InvalidAngles("no angles".into()));
    }
    if angles.iter().any(|&a| !(a > 0.0 && a < PI)) {
        return Err(Error::InvalidAngles("every angle must lie in (0, pi)".into()));
    }
    let total: f64 = angles.iter().sum();
    let closed = (total - 2.0 * PI).abs() < 1e-10;
    if total > 2.0 * PI + 1e-10 {
        return Err(Error::InvalidAngles(format!("angles sum to {total} > 2 pi")));
    }
    if closed && angles.len() < 3 {
        return Err(Error::InvalidAngles("closed patch needs at least three triangles".into()));
    }
    let m = angles.len();
    let mut v: Vec<Point> = vec![[0.0, 0.0]];
    let rays = if closed { m } else { m + 1 };
    let mut theta: f64 = 0.0;
    for r in 0..rays {
        v.push([theta.cos(), theta.sin()]);
        if r < m {
            theta += angles[r];
        }
    }
    let t = (0..m)
        .map(|i| {
            let a = 1 + i;
            let b = if closed { 1 + (i + 1) % m } else { 2 + i };
            [0, a, b]
        })
        .collect();
    Triangulation::new(v, t)
}

/// Copy of `mesh` with `vertex` moved by `d`.
pub fn perturb(mesh: &Triangulation, vertex: usize, d: Point) -> Result<Triangulation> {
    if vertex >= mesh.n_vertices() {
        return Err(Error::InvalidInput(format!("vertex {vertex} out of range")));
    }
    let mut v = mesh.vertices.clone();
    v[vertex][0] += d[0];
    v[vertex][1] += d[1];
    Triangulation::new(v, mesh.triangles.clone())
}

/// The reference triangle `(0,0), (1,0), (0,1)`.
pub fn single_triangle() -> Result<Triangulation> {
    Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]])
}

/// Two triangles on a straight base: the middle base vertex is a flat
/// critical point and both base ends are acute.
pub fn tent() -> Result<Triangulation> {
    Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]], vec![[0, 1, 3], [1, 2, 3]])
}

/// `crisscross(1)` with one extra triangle glued below the bottom edge; its
/// far vertex is acute and needs one extension step.
pub fn glued_crisscross() -> Result<Triangulation> {
    let m = crisscross(1)?;
    let mut v = m.vertices.clone();
    let mut t = m.triangles.clone();
    v.push([0.5, -0.5]);
    let nv = v.len() - 1;
    t.push([0, nv, 1]);
    Triangulation::new(v, t)
}

/// Parses a generator spec such as `crisscross:2`, `diagonal:1`,
/// `fan:90,90,90,90` (degrees), `single`, `tent`, `glued` or
/// `perturbed:eps` (crisscross(1) with its centre moved by `(eps, 0)`).
pub fn from_spec(spec: &str) -> Result<Triangulation> {
    let (name, params) = match spec.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (spec.trim(), ""),
    };
    let int = |p: &str| -> Result<usize> {
        p.parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad integer parameter '{p}' in '{spec}'")))
    };
    let float = |p: &str| -> Result<f64> {
        p.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number '{p}' in '{spec}'")))
    };
    match name {
        "crisscross" => crisscross(if params.is_empty() { 1 } else { int(params)? }),
        "diagonal" | "diagonal_square" => diagonal_square(if params.is_empty() { 1 } else { int(params)? }),
        "fan" => {
            let a = params
                .split(',')
                .map(|s| float(s.trim()).map(|d| d.to_radians()))
                .collect::<Result<Vec<_>>>()?;
            fan_patch(&a)
        }
        "single" => single_triangle(),
        "tent" => tent(),
        "glued" => glued_crisscross(),
        "perturbed" => {
            let eps = if params.is_empty() { 0.01 } else { float(params)? };
            let m = crisscross(1)?;
            perturb(&m, 4, [eps, 0.0])
        }
        _ => Err(Error::InvalidInput(format!("unknown generator '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crisscross_counts() {
        let m = crisscross(1).unwrap();
        assert_eq!(m.n_triangles(), 4);
        assert_eq!(m.edges.len(), 8);
        assert_eq!(m.interior_edges().len(), 4);
        assert_eq!(m.interior_vertices().len(), 1);
        let m = crisscross(3).unwrap();
        assert_eq!(m.n_triangles(), 36);
    }

    #[test]
    fn edge_incidence_identity() {
        for m in [crisscross(2).unwrap(), diagonal_square(3).unwrap(), glued_crisscross().unwrap()] {
            let nb = m.edges.iter().filter(|e| e.is_boundary()).count();
            let ni = m.edges.len() - nb;
            assert_eq!(3 * m.n_triangles(), 2 * ni + nb);
        }
    }

    #[test]
    fn fan_patch_shapes() {
        let q = PI / 2.0;
        let closed = fan_patch(&[q, q, q, q]).unwrap();
        assert_eq!(closed.n_triangles(), 4);
        assert!(!closed.on_boundary[0]);
        let open = fan_patch(&[q, q]).unwrap();
        assert!(open.on_boundary[0]);
        assert!(matches!(fan_patch(&[3.0, 3.0, 3.0]), Err(Error::InvalidAngles(_))));
        assert!(matches!(fan_patch(&[PI]), Err(Error::InvalidAngles(_))));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(from_spec("crisscross:2").unwrap().n_triangles(), 16);
        assert_eq!(from_spec("diagonal:1").unwrap().n_triangles(), 2);
        assert_eq!(from_spec("fan:90,90,90,90").unwrap().n_triangles(), 4);
        assert_eq!(from_spec("glued").unwrap().n_triangles(), 5);
        assert!(from_spec("nope").is_err());
        assert!(from_spec("crisscross:x").is_err());
    }
}
