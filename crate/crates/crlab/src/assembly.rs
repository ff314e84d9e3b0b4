//! Dense assembly of the broken stiffness `(grad_T u, grad_T v)`, the
//! divergence coupling `(div_T v, q)` and the mass matrices.

use crate::error::{Error, Result};
use crate::femspace::lagrange::{LagrangeElement, Tabulation};
use crate::femspace::{BarycentricFrame, DofMap, Space};
use crate::mesh::Triangulation;
use faer::Mat;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    BrokenGradient,
    DivCoupling,
    PressureMass,
    VelocityMass,
}

/// Identifies the space indexing the rows or columns of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceTag {
    pub space: Space,
    pub k: usize,
    pub vector: bool,
    pub dim: usize,
}

impl SpaceTag {
    pub fn of(d: &DofMap) -> Self {
        Self { space: d.space, k: d.k, vector: d.vector, dim: d.dim() }
    }
}

#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub kind: OperatorKind,
    pub matrix: Mat<f64>,
    pub rows: SpaceTag,
    pub cols: SpaceTag,
}

/// Quadrature degree used for all element integrals with velocity degree `k`.
pub fn quadrature_degree(k: usize) -> usize {
    2 * k + 2
}

/// Reference-element integrals of products of Lagrange basis functions and
/// their barycentric derivatives.
pub struct ReferenceMatrices {
    pub k: usize,
    /// `grad[i][j][a][b] = int D_i N_a D_j N_b`
    pub grad: [[Mat<f64>; 3]; 3],
    /// `int N_a N_b`
    pub mass: Mat<f64>,
    /// `coupling[i][b][a] = int P_b D_i N_a` with `P_b` of degree `k-1`
    pub coupling: [Mat<f64>; 3],
    /// `int P_b P_c`
    pub pressure_mass: Mat<f64>,
}

impl ReferenceMatrices {
    pub fn new(k: usize, degree: usize) -> Self {
        let tab = Tabulation::new(k, degree);
        let n = tab.element.len();
        let pel = LagrangeElement::new(k - 1);
        let np = pel.len();
        let pv: Vec<Vec<f64>> = tab.bary.iter().map(|&l| pel.values(l)).collect();
        let w = &tab.rule.weights;
        let nq = w.len();
        let grad = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                Mat::from_fn(n, n, |a, b| (0..nq).map(|q| w[q] * tab.dl[i][q][a] * tab.dl[j][q][b]).sum())
            })
        });
        let mass = Mat::from_fn(n, n, |a, b| (0..nq).map(|q| w[q] * tab.values[q][a] * tab.values[q][b]).sum());
        let coupling =
            std::array::from_fn(|i| Mat::from_fn(np, n, |b, a| (0..nq).map(|q| w[q] * pv[q][b] * tab.dl[i][q][a]).sum()));
        let pressure_mass = Mat::from_fn(np, np, |b, c| (0..nq).map(|q| w[q] * pv[q][b] * pv[q][c]).sum());
        Self { k, grad, mass, coupling, pressure_mass }
    }

    /// Local stiffness `int_K grad N_a . grad N_b`.
    pub fn local_stiffness(&self, f: &BarycentricFrame) -> Mat<f64> {
        let n = self.mass.nrows();
        let mut g = Mat::zeros(n, n);
        for i in 0..3 {
            for j in 0..3 {
                let gij = f.grad[i][0] * f.grad[j][0] + f.grad[i][1] * f.grad[j][1];
                g += &self.grad[i][j] * (2.0 * f.area * gij);
            }
        }
        g
    }

    /// Local `int_K P_b d_c N_a` for component `c`.
    pub fn local_coupling(&self, f: &BarycentricFrame, c: usize) -> Mat<f64> {
        let mut b = Mat::zeros(self.coupling[0].nrows(), self.coupling[0].ncols());
        for i in 0..3 {
            b += &self.coupling[i] * (2.0 * f.area * f.grad[i][c]);
        }
        b
    }
}

fn element_matrix(d: &DofMap, t: usize) -> Mat<f64> {
    let el = &d.elements[t];
    Mat::from_fn(d.local.len(), el.dofs.len(), |a, j| el.coeffs[j][a])
}

fn tag_scalar(d: &DofMap) -> SpaceTag {
    SpaceTag { vector: false, dim: d.n_scalar(), ..SpaceTag::of(d) }
}

fn expand_vector(s: &Mat<f64>) -> Mat<f64> {
    let n = s.nrows();
    Mat::from_fn(2 * n, 2 * n, |i, j| if i / n == j / n { s[(i % n, j % n)] } else { 0.0 })
}

fn scalar_form(m: &Triangulation, d: &DofMap, degree: usize, mass: bool) -> Mat<f64> {
    let r = ReferenceMatrices::new(d.k, degree);
    let n = d.n_scalar();
    let mut a = Mat::zeros(n, n);
    for t in 0..m.n_triangles() {
        let el = &d.elements[t];
        if el.dofs.is_empty() {
            continue;
        }
        let f = BarycentricFrame::new(m, t);
        let g = if mass { &r.mass * (2.0 * f.area) } else { r.local_stiffness(&f) };
        let c = element_matrix(d, t);
        let loc = c.transpose() * &g * &c;
        for (i, &di) in el.dofs.iter().enumerate() {
            for (j, &dj) in el.dofs.iter().enumerate() {
                a[(di, dj)] += loc[(i, j)];
            }
        }
    }
    a
}

/// Scalar broken stiffness matrix (no SPD check).
pub fn scalar_stiffness(m: &Triangulation, d: &DofMap) -> Mat<f64> {
    scalar_form(m, d, quadrature_degree(d.k), false)
}

pub fn scalar_mass(m: &Triangulation, d: &DofMap) -> Mat<f64> {
    scalar_form(m, d, quadrature_degree(d.k), true)
}

pub fn assemble_broken_gradient(m: &Triangulation, d: &DofMap) -> Result<AssembledOperator> {
    if d.space == Space::Pressure {
        return Err(Error::InvalidInput("stiffness needs a velocity map".into()));
    }
    let s = scalar_stiffness(m, d);
    if s.nrows() > 0 && s.llt(faer::Side::Lower).is_err() {
        return Err(Error::SingularOperator("broken stiffness is not positive definite".into()));
    }
    let (matrix, tag) = if d.vector { (expand_vector(&s), SpaceTag::of(d)) } else { (s, tag_scalar(d)) };
    Ok(AssembledOperator { kind: OperatorKind::BrokenGradient, matrix, rows: tag, cols: tag })
}

pub fn assemble_velocity_mass(m: &Triangulation, d: &DofMap) -> AssembledOperator {
    let s = scalar_mass(m, d);
    let (matrix, tag) = if d.vector { (expand_vector(&s), SpaceTag::of(d)) } else { (s, tag_scalar(d)) };
    AssembledOperator { kind: OperatorKind::VelocityMass, matrix, rows: tag, cols: tag }
}

/// Per-component coupling blocks `B_c[p][s] = (d_c phi_s, q_p)`.
pub fn div_blocks(m: &Triangulation, vel: &DofMap, pres: &DofMap, degree: usize) -> Result<[Mat<f64>; 2]> {
    if pres.space != Space::Pressure || vel.space == Space::Pressure || pres.k != vel.k {
        return Err(Error::InvalidInput("coupling needs matching velocity and pressure maps".into()));
    }
    let r = ReferenceMatrices::new(vel.k, degree);
    let (np, ns) = (pres.n_scalar(), vel.n_scalar());
    let mut out = [Mat::zeros(np, ns), Mat::zeros(np, ns)];
    for t in 0..m.n_triangles() {
        let el = &vel.elements[t];
        if el.dofs.is_empty() {
            continue;
        }
        let f = BarycentricFrame::new(m, t);
        let c = element_matrix(vel, t);
        let prow = &pres.elements[t].dofs;
        for (comp, b) in out.iter_mut().enumerate() {
            let loc = r.local_coupling(&f, comp) * &c;
            for (i, &p) in prow.iter().enumerate() {
                for (j, &s) in el.dofs.iter().enumerate() {
                    b[(p, s)] += loc[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

pub fn assemble_div_coupling_with_degree(
    m: &Triangulation,
    vel: &DofMap,
    pres: &DofMap,
    degree: usize,
) -> Result<AssembledOperator> {
    let [b0, b1] = div_blocks(m, vel, pres, degree)?;
    let (np, ns) = (b0.nrows(), b0.ncols());
    let matrix = if vel.vector {
        Mat::from_fn(np, 2 * ns, |p, j| if j < ns { b0[(p, j)] } else { b1[(p, j - ns)] })
    } else {
        b0
    };
    let cols = if vel.vector { SpaceTag::of(vel) } else { tag_scalar(vel) };
    Ok(AssembledOperator { kind: OperatorKind::DivCoupling, matrix, rows: SpaceTag::of(pres), cols })
}

pub fn assemble_div_coupling(m: &Triangulation, vel: &DofMap, pres: &DofMap) -> Result<AssembledOperator> {
    assemble_div_coupling_with_degree(m, vel, pres, quadrature_degree(vel.k))
}

/// Per-triangle pressure mass blocks (the pressure mass matrix is block
/// diagonal).
pub fn pressure_mass_blocks(m: &Triangulation, pres: &DofMap) -> Vec<Mat<f64>> {
    let r = ReferenceMatrices::new(pres.k, quadrature_degree(pres.k));
    (0..m.n_triangles()).map(|t| &r.pressure_mass * (2.0 * m.area(t))).collect()
}

pub fn assemble_pressure_mass(m: &Triangulation, pres: &DofMap) -> AssembledOperator {
    let n = pres.n_scalar();
    let mut a = Mat::zeros(n, n);
    for (t, b) in pressure_mass_blocks(m, pres).iter().enumerate() {
        let d = &pres.elements[t].dofs;
        for (i, &di) in d.iter().enumerate() {
            for (j, &dj) in d.iter().enumerate() {
                a[(di, dj)] = b[(i, j)];
            }
        }
    }
    let tag = SpaceTag::of(pres);
    AssembledOperator { kind: OperatorKind::PressureMass, matrix: a, rows: tag, cols: tag }
}

/// Text dump: header `rows cols`, then one whitespace-separated row per line.
pub fn write_matrix(a: &Mat<f64>) -> String {
    let mut s = format!("{} {}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    s
}

pub fn read_matrix(text: &str) -> Result<Mat<f64>> {
    let mut it = text.split_whitespace();
    let mut next_usize = || -> Result<usize> {
        it.next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Parse { line: 1, msg: "bad matrix header".into() })
    };
    let r = next_usize()?;
    let c = next_usize()?;
    let vals: Vec<f64> = text
        .lines()
        .skip(1)
        .flat_map(|l| l.split_whitespace())
        .map(|x| x.parse::<f64>().map_err(|_| Error::Parse { line: 0, msg: format!("bad entry '{x}'") }))
        .collect::<Result<_>>()?;
    if vals.len() != r * c {
        return Err(Error::Parse { line: 0, msg: format!("expected {} entries, found {}", r * c, vals.len()) });
    }
    Ok(Mat::from_fn(r, c, |i, j| vals[i * c + j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femspace::build_dofmap;
    use crate::mesh::generators::*;

    #[test]
    fn crisscross_k1() {
        let m = crisscross(1).unwrap();
        let v = build_dofmap(&m, 1, Space::CrouzeixRaviart, true).unwrap();
        let a = assemble_broken_gradient(&m, &v).unwrap();
        assert_eq!(a.matrix.nrows(), 8);
        let p = build_dofmap(&m, 1, Space::Pressure, false).unwrap();
        let mp = assemble_pressure_mass(&m, &p).matrix;
        for t in 0..4 {
            assert!((mp[(t, t)] - m.area(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_annihilate_divergence() {
        let m = crisscross(2).unwrap();
        for k in 1..5 {
            let v = build_dofmap(&m, k, Space::CrouzeixRaviart, true).unwrap();
            let p = build_dofmap(&m, k, Space::Pressure, false).unwrap();
            let b = assemble_div_coupling(&m, &v, &p).unwrap().matrix;
            let ones = p.deflation();
            for j in 0..b.ncols() {
                let s: f64 = (0..b.nrows()).map(|i| ones[i] * b[(i, j)]).sum();
                assert!(s.abs() < 1e-12, "k={k} column {j}: {s}");
            }
        }
    }

    #[test]
    fn matrix_dump_roundtrip() {
        let a = Mat::from_fn(2, 3, |i, j| (i * 3 + j) as f64 + 0.5);
        let s = write_matrix(&a);
        assert!(s.starts_with("2 3\n"));
        let b = read_matrix(&s).unwrap();
        assert_eq!(a, b);
    }
}
