//! Discrete inf-sup constant of the Crouzeix-Raviart / discontinuous
//! pressure pair, minimum-norm discrete right inverses of the divergence and
//! the discrete Friedrichs constant.
//!
//! With `A` the broken stiffness, `B` the divergence coupling and `M` the
//! pressure mass, the inf-sup constant is `sqrt(lambda_min)` of
//! `B A^{-1} B^T p = lambda M p` on pressures with zero mean.

use crate::assembly::{div_blocks, pressure_mass_blocks, quadrature_degree, scalar_mass, scalar_stiffness};
use crate::error::{Error, Result};
use crate::femspace::{build_dofmap, DofMap, Space};
use crate::linalg::{self, cholesky, col, lower_solve_in_place, lower_transpose_solve_in_place, sym_eigen, to_vec};
use crate::mesh::Triangulation;
use faer::Mat;
use serde::Serialize;
use std::time::Instant;

/// Values below this count as a vanishing inf-sup constant.
pub const ZERO_INFSUP: f64 = 1e-10;

/// Smallest eigenpair of `A x = lambda M x` restricted to the
/// `M`-orthogonal complement of `deflation`. Returns `(lambda, x, residual)`
/// with `x^T M x = 1` and residual `|A x - lambda M x| / |A|`.
pub fn symmetric_eig_smallest(a: &Mat<f64>, m: &Mat<f64>, deflation: Option<&[f64]>) -> Result<(f64, Vec<f64>, f64)> {
    let n = a.nrows();
    let l = cholesky(m)?;
    let mut c = a.clone();
    lower_solve_in_place(l.as_ref(), c.as_mut());
    let mut ct = c.transpose().to_owned();
    lower_solve_in_place(l.as_ref(), ct.as_mut());
    linalg::symmetrize(&mut ct);
    let anorm = linalg::fro(a).max(f64::MIN_POSITIVE);
    if let Some(d) = deflation {
        // w = L^T d spans the deflated direction in the transformed space
        let w = to_vec((l.transpose() * col(d)).as_ref());
        let wn = linalg::norm2(&w);
        let w: Vec<f64> = w.iter().map(|x| x / wn).collect();
        let cw = linalg::matvec(&ct, &w);
        let wcw = linalg::dot(&w, &cw);
        let sigma = 2.0 * linalg::fro(&ct) + 1.0;
        // P C P + sigma w w^T with P = I - w w^T
        ct = Mat::from_fn(n, n, |i, j| {
            ct[(i, j)] - w[i] * cw[j] - cw[i] * w[j] + (wcw + sigma) * w[i] * w[j]
        });
    }
    let (vals, vecs) = sym_eigen(&ct)?;
    let lam = vals[0];
    let mut y = Mat::from_fn(n, 1, |i, _| vecs[(i, 0)]);
    lower_transpose_solve_in_place(l.as_ref(), y.as_mut());
    let x = to_vec(y.as_ref());
    let ax = linalg::matvec(a, &x);
    let mx = linalg::matvec(m, &x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lam * q).collect();
    Ok((lam, x, linalg::norm2(&r) / anorm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfSupStatus {
    Ok,
    ZeroInfSup,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfSupResult {
    pub k: usize,
    pub c: f64,
    pub dim_v: usize,
    pub dim_p: usize,
    pub residual: f64,
    /// `c * sqrt(log(k+1))`
    pub scaled: f64,
    pub seconds: f64,
    pub status: InfSupStatus,
    /// Critical pressure mode (nodal coefficients, unit `M`-norm).
    #[serde(skip)]
    pub mode: Vec<f64>,
}

impl InfSupResult {
    /// `c * log(k+1)^alpha`.
    pub fn scaled_with(&self, alpha: f64) -> f64 {
        self.c * ((self.k + 1) as f64).ln().powf(alpha)
    }
}

/// Assembled Stokes operators of degree `k` on one mesh.
pub struct StokesSystem {
    pub k: usize,
    pub velocity: DofMap,
    pub pressure: DofMap,
    /// Scalar broken stiffness and its Cholesky factor.
    pub stiffness: Mat<f64>,
    pub stiffness_factor: Mat<f64>,
    /// Coupling blocks per velocity component (pressure rows).
    pub coupling: [Mat<f64>; 2],
    pub mass_blocks: Vec<Mat<f64>>,
}

impl StokesSystem {
    pub fn new(m: &Triangulation, k: usize) -> Result<Self> {
        let velocity = build_dofmap(m, k, Space::CrouzeixRaviart, true)?;
        let pressure = build_dofmap(m, k, Space::Pressure, false)?;
        if velocity.n_scalar() == 0 {
            return Err(Error::EmptyVelocitySpace);
        }
        if pressure.n_scalar() < 2 {
            return Err(Error::EmptyPressureSpace);
        }
        let stiffness = scalar_stiffness(m, &velocity);
        let stiffness_factor =
            cholesky(&stiffness).map_err(|_| Error::SingularOperator("broken stiffness is not positive definite".into()))?;
        let coupling = div_blocks(m, &velocity, &pressure, quadrature_degree(k))?;
        let mass_blocks = pressure_mass_blocks(m, &pressure);
        Ok(Self { k, velocity, pressure, stiffness, stiffness_factor, coupling, mass_blocks })
    }

    pub fn dim_v(&self) -> usize {
        self.velocity.dim()
    }

    pub fn dim_p(&self) -> usize {
        self.pressure.dim()
    }

    pub fn pressure_mass(&self) -> Mat<f64> {
        let n = self.dim_p();
        let mut a = Mat::zeros(n, n);
        for (t, b) in self.mass_blocks.iter().enumerate() {
            let d = &self.pressure.elements[t].dofs;
            for (i, &di) in d.iter().enumerate() {
                for (j, &dj) in d.iter().enumerate() {
                    a[(di, dj)] = b[(i, j)];
                }
            }
        }
        a
    }

    pub fn mass_apply(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; q.len()];
        for (t, b) in self.mass_blocks.iter().enumerate() {
            let d = &self.pressure.elements[t].dofs;
            for (i, &di) in d.iter().enumerate() {
                out[di] = d.iter().enumerate().map(|(j, &dj)| b[(i, j)] * q[dj]).sum();
            }
        }
        out
    }

    /// `int q` over the domain.
    pub fn mean_functional(&self, q: &[f64]) -> f64 {
        self.mass_apply(q).iter().sum()
    }

    /// `B_c` with each triangle's rows multiplied by `L_K^{-1}` (`M_K = L_K L_K^T`).
    fn scaled_coupling(&self, factors: &[Mat<f64>]) -> [Mat<f64>; 2] {
        let mut out = self.coupling.clone();
        for b in out.iter_mut() {
            for (t, l) in factors.iter().enumerate() {
                let d = &self.pressure.elements[t].dofs;
                let mut rows = Mat::from_fn(d.len(), b.ncols(), |i, j| b[(d[i], j)]);
                lower_solve_in_place(l.as_ref(), rows.as_mut());
                for (i, &di) in d.iter().enumerate() {
                    for j in 0..b.ncols() {
                        b[(di, j)] = rows[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// `sum_c (L_s^{-1} B_c^T)^T (L_s^{-1} B_c^T)`.
    fn schur(&self, b: &[Mat<f64>; 2]) -> Mat<f64> {
        let n = b[0].nrows();
        let mut s = Mat::zeros(n, n);
        for bc in b {
            let mut x = bc.transpose().to_owned();
            lower_solve_in_place(self.stiffness_factor.as_ref(), x.as_mut());
            s += x.transpose() * &x;
        }
        linalg::symmetrize(&mut s);
        s
    }

    pub fn infsup(&self) -> Result<InfSupResult> {
        let start = Instant::now();
        let factors: Vec<Mat<f64>> = self.mass_blocks.iter().map(cholesky).collect::<Result<_>>()?;
        let bs = self.scaled_coupling(&factors);
        let mut c = self.schur(&bs);
        let n = c.nrows();
        // w = L_M^T 1, blockwise
        let mut w = vec![0.0; n];
        for (t, l) in factors.iter().enumerate() {
            let d = &self.pressure.elements[t].dofs;
            for (j, &dj) in d.iter().enumerate() {
                w[dj] = (j..d.len()).map(|i| l[(i, j)]).sum();
            }
        }
        let wn = linalg::norm2(&w);
        w.iter_mut().for_each(|x| *x /= wn);
        let cnorm = linalg::fro(&c).max(f64::MIN_POSITIVE);
        let sigma = 2.0 * cnorm + 1.0;
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] += sigma * w[i] * w[j];
            }
        }
        let (vals, vecs) = sym_eigen(&c)?;
        let lam = vals[0];
        let y: Vec<f64> = (0..n).map(|i| vecs[(i, 0)]).collect();
        let cy = linalg::matvec(&c, &y);
        let r: Vec<f64> = cy.iter().zip(&y).map(|(a, b)| a - lam * b).collect();
        let residual = linalg::norm2(&r) / cnorm;
        // back to nodal coefficients: p = L_M^{-T} y
        let mut mode = y.clone();
        for (t, l) in factors.iter().enumerate() {
            let d = &self.pressure.elements[t].dofs;
            let mut v = Mat::from_fn(d.len(), 1, |i, _| y[d[i]]);
            lower_transpose_solve_in_place(l.as_ref(), v.as_mut());
            for (i, &di) in d.iter().enumerate() {
                mode[di] = v[(i, 0)];
            }
        }
        let cval = lam.max(0.0).sqrt();
        let status = if cval < ZERO_INFSUP { InfSupStatus::ZeroInfSup } else { InfSupStatus::Ok };
        Ok(InfSupResult {
            k: self.k,
            c: cval,
            dim_v: self.dim_v(),
            dim_p: self.dim_p(),
            residual,
            scaled: cval * ((self.k + 1) as f64).ln().sqrt(),
            seconds: start.elapsed().as_secs_f64(),
            status,
            mode,
        })
    }

    /// Velocity `v` of least broken energy with `(div_T v, r) = (q, r)` for
    /// all discrete pressures `r`; returns `v` (vector coefficients) and
    /// `|v|_{H^1(T)} / |q|_{L^2}`.
    pub fn right_inverse(&self, q: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.dim_p();
        if q.len() != n {
            return Err(Error::InvalidInput(format!("pressure has {} coefficients, expected {n}", q.len())));
        }
        let mq = self.mass_apply(q);
        let qnorm = linalg::dot(q, &mq).sqrt();
        let ns = self.velocity.n_scalar();
        if qnorm == 0.0 {
            return Ok((vec![0.0; 2 * ns], 0.0));
        }
        let mean: f64 = mq.iter().sum();
        let total: f64 = self.mass_apply(&vec![1.0; n]).iter().sum();
        if mean.abs() > 1e-10 * qnorm * total.sqrt() {
            return Err(Error::InvalidInput(format!("pressure mean {mean:e} is not zero")));
        }
        let mut s = self.schur(&self.coupling);
        let shift = linalg::fro(&s) / n as f64 + f64::MIN_POSITIVE;
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += shift / n as f64;
            }
        }
        let f = s.llt(faer::Side::Lower).map_err(|_| Error::InfeasibleConstraint)?;
        let mu = to_vec(faer::linalg::solvers::Solve::solve(&f, col(&mq)).as_ref());
        let mut v = vec![0.0; 2 * ns];
        let mut energy = 0.0;
        for (c, bc) in self.coupling.iter().enumerate() {
            let mut rhs = bc.transpose() * col(&mu);
            lower_solve_in_place(self.stiffness_factor.as_ref(), rhs.as_mut());
            energy += (0..ns).map(|i| rhs[(i, 0)].powi(2)).sum::<f64>();
            lower_transpose_solve_in_place(self.stiffness_factor.as_ref(), rhs.as_mut());
            for i in 0..ns {
                v[c * ns + i] = rhs[(i, 0)];
            }
        }
        let bv = self.apply_coupling(&v);
        let res: f64 = bv.iter().zip(&mq).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if res > 1e-6 * linalg::norm2(&mq) {
            return Err(Error::InfeasibleConstraint);
        }
        Ok((v, energy.sqrt() / qnorm))
    }

    /// `B v` (pressure-side vector of `(div_T v, q_p)`).
    pub fn apply_coupling(&self, v: &[f64]) -> Vec<f64> {
        let ns = self.velocity.n_scalar();
        let a = linalg::matvec(&self.coupling[0], &v[..ns]);
        let b = linalg::matvec(&self.coupling[1], &v[ns..]);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    /// `|v|^2_{H^1(T)}` of a vector velocity.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let ns = self.velocity.n_scalar();
        (0..2).map(|c| {
            let x = &v[c * ns..(c + 1) * ns];
            linalg::dot(x, &linalg::matvec(&self.stiffness, x))
        })
        .sum()
    }

    /// `|div_T v - q|_{L^2}` with `div_T v` projected onto the pressure space.
    pub fn divergence_residual(&self, v: &[f64], q: &[f64]) -> Result<f64> {
        let m = self.pressure_mass();
        let bv = self.apply_coupling(v);
        let proj = linalg::to_vec(linalg::spd_solve(&m, &col(&bv))?.as_ref());
        let d: Vec<f64> = proj.iter().zip(q).map(|(a, b)| a - b).collect();
        Ok(linalg::dot(&d, &self.mass_apply(&d)).max(0.0).sqrt())
    }
}

pub fn infsup_constant(m: &Triangulation, k: usize) -> Result<InfSupResult> {
    let start = Instant::now();
    let mut r = StokesSystem::new(m, k)?.infsup()?;
    r.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

pub fn min_norm_right_inverse(m: &Triangulation, k: usize, q: &[f64]) -> Result<(Vec<f64>, f64)> {
    StokesSystem::new(m, k)?.right_inverse(q)
}

/// `sqrt(1 + lambda_max)` with `lambda_max` the largest `|u|^2_{L^2} /
/// |u|^2_{H^1(T)}` over the given scalar velocity space.
pub fn friedrichs_constant_on(m: &Triangulation, d: &DofMap) -> Result<f64> {
    if d.n_scalar() == 0 {
        return Err(Error::EmptyVelocitySpace);
    }
    let a = scalar_stiffness(m, d);
    let mm = scalar_mass(m, d);
    let l = cholesky(&a)?;
    let mut c = mm;
    lower_solve_in_place(l.as_ref(), c.as_mut());
    let mut c = c.transpose().to_owned();
    lower_solve_in_place(l.as_ref(), c.as_mut());
    linalg::symmetrize(&mut c);
    let vals = linalg::sym_eigenvalues(&c)?;
    Ok((1.0 + vals[vals.len() - 1]).sqrt())
}

pub fn friedrichs_constant(m: &Triangulation, k: usize) -> Result<f64> {
    let d = build_dofmap(m, k, Space::CrouzeixRaviart, false)?;
    friedrichs_constant_on(m, &d)
}
