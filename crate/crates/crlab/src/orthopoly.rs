//! Legendre and Jacobi kernels on the reference interval `[-1, 1]`,
//! closed-form weighted integrals and fractional trace seminorms.
//!
//! Polynomials are stored by their Legendre coefficients and evaluated with
//! the three-term recurrence. Difference quotients `(f(x) - f(y)) / (x - y)`
//! are evaluated with a recurrence for the divided differences of `L_n`, so no
//! quadrature ever divides by `x - y`.

use crate::error::{Error, Result};
use std::ops::{Add, Mul, Sub};

/// Relative tolerance under which an endpoint value counts as zero.
pub const ENDPOINT_TOL: f64 = 1e-10;

/// Value and first derivative of the Legendre polynomial `L_k` at `x`.
pub fn legendre_eval(k: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut d0) = (1.0, 0.0);
    if k == 0 {
        return (p0, d0);
    }
    let (mut p1, mut d1) = (x, 1.0);
    for n in 1..k {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * x * p1 - nf * p0) / (nf + 1.0);
        let d2 = d0 + (2.0 * nf + 1.0) * p1;
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    (p1, d1)
}

/// Values `L_0(x), ..., L_kmax(x)`.
pub fn legendre_values(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(x);
    }
    for n in 1..kmax {
        let nf = n as f64;
        let v = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(v);
    }
    out
}

/// Divided differences `D_n(x, y) = (L_n(x) - L_n(y)) / (x - y)` for
/// `n = 0..=kmax`, exact also for `x == y` (where they equal `L_n'(x)`).
pub fn legendre_divided_differences(kmax: usize, x: f64, y: f64) -> Vec<f64> {
    let ly = legendre_values(kmax, y);
    let mut d = Vec::with_capacity(kmax + 1);
    d.push(0.0);
    if kmax >= 1 {
        d.push(1.0);
    }
    for n in 1..kmax {
        let nf = n as f64;
        let v = ((2.0 * nf + 1.0) * (x * d[n] + ly[n]) - nf * d[n - 1]) / (nf + 1.0);
        d.push(v);
    }
    d
}

/// Value of the Jacobi polynomial `P_n^{(a,b)}(x)` by the standard recurrence.
pub(crate) fn jacobi_eval(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for m in 2..=n {
        let mf = m as f64;
        let s = 2.0 * mf + a + b;
        let c1 = 2.0 * mf * (mf + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (mf + a - 1.0) * (mf + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Value of `P_n^{(3,3)}(x)`.
pub fn jacobi33_eval(n: usize, x: f64) -> f64 {
    jacobi_eval(n, 3.0, 3.0, x)
}

/// Binomial coefficient as a float.
pub fn binom(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0;
    for i in 0..r {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Gauss-Legendre nodes and weights with `n` points (exact up to degree `2n-1`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, z);
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Number of Gauss points integrating degree `d` exactly: `ceil((d+2)/2)`.
pub fn points_for_degree(d: usize) -> usize {
    (d + 3) / 2
}

/// Which of the two endpoint-bubbles `psi_k^-` / `psi_k^+` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleSide {
    Minus,
    Plus,
}

fn check_odd_ge5(k: usize) -> Result<()> {
    if k < 5 || k % 2 == 0 {
        return Err(Error::InvalidDegree(k));
    }
    Ok(())
}

/// Normalisation `c_k = (-1)^(k-1) binom(k, 3)`.
pub fn psi_normalisation(k: usize) -> f64 {
    let s = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
    s * binom(k, 3)
}

fn psi_minus(k: usize, x: f64) -> f64 {
    (1.0 + x) * (1.0 - x) * (1.0 - x) / 4.0 * jacobi33_eval(k - 3, x) / psi_normalisation(k)
}

/// Endpoint bubble `psi_k^-` or `psi_k^+` at `x` for odd `k >= 5`.
pub fn psi_bubble(k: usize, side: BubbleSide, x: f64) -> Result<f64> {
    check_odd_ge5(k)?;
    Ok(match side {
        BubbleSide::Minus => psi_minus(k, x),
        BubbleSide::Plus => -psi_minus(k, -x),
    })
}

/// The modified edge trace `phi_k = L_{k-1} - L'_{k-1}(-1) psi^- - L'_{k-1}(1) psi^+`.
pub fn phi_tilde(k: usize, x: f64) -> Result<f64> {
    check_odd_ge5(k)?;
    let (l, _) = legendre_eval(k - 1, x);
    let (_, dm) = legendre_eval(k - 1, -1.0);
    let (_, dp) = legendre_eval(k - 1, 1.0);
    Ok(l - dm * psi_minus(k, x) + dp * psi_minus(k, -x))
}

/// A univariate polynomial on `[-1, 1]` in the Legendre basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1D {
    coeffs: Vec<f64>,
}

impl Poly1D {
    pub fn zero() -> Self {
        Poly1D { coeffs: Vec::new() }
    }

    /// Polynomial from Legendre coefficients; trailing zeros are dropped.
    pub fn from_legendre(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly1D { coeffs }
    }

    pub fn legendre(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Poly1D { coeffs: c }
    }

    /// Exact Legendre projection of a polynomial of degree at most `degree`
    /// given as a closure.
    pub fn from_fn(degree: usize, f: impl Fn(f64) -> f64) -> Self {
        let (x, w) = gauss_legendre(degree + 1);
        let fx: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let mut c = vec![0.0; degree + 1];
        for (i, &t) in x.iter().enumerate() {
            let l = legendre_values(degree, t);
            for n in 0..=degree {
                c[n] += w[i] * fx[i] * l[n];
            }
        }
        for (n, cn) in c.iter_mut().enumerate() {
            *cn *= (2 * n + 1) as f64 / 2.0;
        }
        Poly1D::from_legendre(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let l = legendre_values(self.degree(), x);
        self.coeffs.iter().zip(&l).map(|(c, v)| c * v).sum()
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                let (ln, dn) = legendre_eval(n, x);
                v += c * ln;
                d += c * dn;
            }
        }
        (v, d)
    }

    /// `s -> p(-s)`.
    pub fn reflect(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| if n % 2 == 0 { c } else { -c })
            .collect();
        Poly1D { coeffs: c }
    }

    /// `(p(x) - p(y)) / (x - y)`, evaluated without division.
    pub fn divided_difference(&self, x: f64, y: f64) -> f64 {
        if self.coeffs.len() <= 1 {
            return 0.0;
        }
        let d = legendre_divided_differences(self.degree(), x, y);
        self.coeffs.iter().zip(&d).map(|(c, v)| c * v).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Poly1D::from_legendre(self.coeffs.iter().map(|c| c * s).collect())
    }
}

impl Add for &Poly1D {
    type Output = Poly1D;
    fn add(self, rhs: &Poly1D) -> Poly1D {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + rhs.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        Poly1D::from_legendre(c)
    }
}

impl Sub for &Poly1D {
    type Output = Poly1D;
    fn sub(self, rhs: &Poly1D) -> Poly1D {
        self + &rhs.scale(-1.0)
    }
}

impl Mul<f64> for &Poly1D {
    type Output = Poly1D;
    fn mul(self, rhs: f64) -> Poly1D {
        self.scale(rhs)
    }
}

/// `int_{-1}^{1} (t+1) L_k(t)^2 dt` by Gauss quadrature.
pub fn weighted_l2_integral(k: usize) -> f64 {
    let (x, w) = gauss_legendre(points_for_degree(2 * k + 1));
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let (l, _) = legendre_eval(k, t);
            wt * (t + 1.0) * l * l
        })
        .sum()
}

/// `int_{-1}^{1} (t+1) L_k'(t)^2 dt` by Gauss quadrature.
pub fn weighted_h1_integral(k: usize) -> f64 {
    let (x, w) = gauss_legendre(points_for_degree((2 * k).max(1) - 1));
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let (_, d) = legendre_eval(k, t);
            wt * (t + 1.0) * d * d
        })
        .sum()
}

/// Double integral of the squared difference quotient of `f` over `[-1,1]^2`.
pub fn h12_seminorm_sq(f: &Poly1D) -> f64 {
    let d = f.degree();
    if d == 0 {
        return 0.0;
    }
    let (x, w) = gauss_legendre(points_for_degree(2 * d - 2));
    let mut acc = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in x.iter().enumerate() {
            let q = f.divided_difference(xi, yj);
            acc += w[i] * w[j] * q * q;
        }
    }
    acc
}

/// `|L_k|^2_{H^{1/2}(I)}` as the exact double integral of the difference quotient.
pub fn legendre_h12_seminorm_sq(k: usize) -> f64 {
    h12_seminorm_sq(&Poly1D::legendre(k))
}

/// `|L_k|^2_{H^{1/2}}` from the three-term recursion with `I_0 = 0, I_1 = 4, I_2 = 6`.
pub fn legendre_h12_recursion(k: usize) -> f64 {
    let mut i = vec![0.0, 4.0, 6.0];
    for n in 3..=k {
        let nf = n as f64;
        let v = (2.0 * nf - 1.0) / nf * i[n - 1] - (nf - 1.0) / nf * i[n - 2];
        i.push(v);
    }
    i[k]
}

/// Harmonic number `H_k`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|l| 1.0 / l as f64).sum()
}

fn l2_norm_sq(f: &Poly1D) -> f64 {
    f.coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * c * 2.0 / (2 * n + 1) as f64)
        .sum()
}

/// Full `H^{1/2}(I)` norm squared: `L^2` part plus seminorm.
pub fn h12_norm_sq(f: &Poly1D) -> f64 {
    l2_norm_sq(f) + h12_seminorm_sq(f)
}

fn endpoint_ok(f: &Poly1D, x: f64) -> Result<()> {
    let v = f.eval(x);
    if v.abs() > ENDPOINT_TOL * f.max_coeff().max(f64::MIN_POSITIVE) {
        return Err(Error::WeightedSeminormUndefined(v));
    }
    Ok(())
}

fn weighted_sq(f: &Poly1D, endpoint: f64) -> f64 {
    let d = f.degree();
    if f.coeffs.len() <= 1 {
        return 0.0;
    }
    let (x, w) = gauss_legendre(points_for_degree(2 * d - 1));
    x.iter()
        .zip(&w)
        .map(|(&s, &ws)| {
            let g = f.divided_difference(s, endpoint);
            ws * g * g * (1.0 - endpoint * s)
        })
        .sum()
}

/// `int f^2 / (1+s)`; requires `f(-1) = 0`.
pub fn weighted_seminorm_left_sq(f: &Poly1D) -> Result<f64> {
    endpoint_ok(f, -1.0)?;
    Ok(weighted_sq(f, -1.0))
}

/// `int f^2 / (1-s)`; requires `f(1) = 0`.
pub fn weighted_seminorm_right_sq(f: &Poly1D) -> Result<f64> {
    endpoint_ok(f, 1.0)?;
    Ok(weighted_sq(f, 1.0))
}

/// Fractional seminorms of a polynomial on `[-1,1]`.
///
/// The weighted parts are `+inf` when the corresponding endpoint value
/// does not vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalHalfNorms {
    pub seminorm_h12: f64,
    pub seminorm_left: f64,
    pub seminorm_right: f64,
    pub seminorm_00: f64,
}

pub fn interval_half_norms(f: &Poly1D) -> IntervalHalfNorms {
    let h = h12_seminorm_sq(f).sqrt();
    let l = weighted_seminorm_left_sq(f).map(f64::sqrt).unwrap_or(f64::INFINITY);
    let r = weighted_seminorm_right_sq(f).map(f64::sqrt).unwrap_or(f64::INFINITY);
    IntervalHalfNorms {
        seminorm_h12: h,
        seminorm_left: l,
        seminorm_right: r,
        seminorm_00: (l * l + r * r).sqrt(),
    }
}

/// Equivalent `H^{1/2}` norm on the boundary of a triangle from its three
/// edge traces `v_1, v_2, v_3`, each pulled back so that `v_i(-1)` is the
/// value at vertex `i+1` and `v_i(1)` the value at vertex `i-1`.
pub fn boundary_triple_norm(traces: &[Poly1D; 3]) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..3 {
        let prev = &traces[(i + 2) % 3];
        let next = &traces[(i + 1) % 3];
        let d = prev - &next.reflect();
        let scale = prev.max_coeff().max(next.max_coeff()).max(1e-300);
        let dm = d.eval(-1.0);
        if dm.abs() > ENDPOINT_TOL * scale {
            return Err(Error::VertexMismatch(dm));
        }
        acc += h12_norm_sq(&traces[i]) + weighted_sq(&d, -1.0);
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_small_values() {
        assert!((legendre_eval(2, 0.0).0 + 0.5).abs() < 1e-15);
        assert_eq!(legendre_eval(0, 0.73), (1.0, 0.0));
        assert!((legendre_eval(2, 1.0).1 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_endpoints_up_to_40() {
        for k in 0..=40 {
            let b = binom(k + 1, 2);
            for &s in &[-1.0f64, 1.0] {
                let (v, d) = legendre_eval(k, s);
                assert!((v - s.powi(k as i32)).abs() <= 1e-12);
                let expect = s.powi(k as i32 + 1) * b;
                assert!((d - expect).abs() <= 1e-9 * b.max(1.0), "k={k}");
            }
        }
    }

    #[test]
    fn legendre_orthogonality() {
        let (x, w) = gauss_legendre(31);
        for j in 0..=30 {
            for k in 0..j {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&t, &wt)| wt * legendre_eval(j, t).0 * legendre_eval(k, t).0)
                    .sum();
                assert!(s.abs() < 1e-12, "{j} {k} {s}");
            }
        }
    }

    #[test]
    fn jacobi_values() {
        assert_eq!(jacobi33_eval(0, 0.4), 1.0);
        assert!(jacobi33_eval(1, 0.0).abs() < 1e-15);
        assert!((jacobi33_eval(2, 1.0) - 10.0).abs() < 1e-12);
        for n in 0..12 {
            assert!((jacobi33_eval(n, 1.0) - binom(n + 3, n)).abs() < 1e-9 * binom(n + 3, n));
        }
    }

    #[test]
    fn psi_and_phi_endpoint_behaviour() {
        for k in [5usize, 7, 9, 15] {
            let h = 1e-6;
            assert!(psi_bubble(k, BubbleSide::Minus, 1.0).unwrap().abs() < 1e-14);
            assert!(psi_bubble(k, BubbleSide::Minus, -1.0).unwrap().abs() < 1e-14);
            let dm = (psi_bubble(k, BubbleSide::Minus, -1.0 + h).unwrap()
                - psi_bubble(k, BubbleSide::Minus, -1.0).unwrap())
                / h;
            assert!((dm - 1.0).abs() < 1e-4, "k={k} d={dm}");
            for &x in &[-0.7, -0.1, 0.3, 0.9] {
                let p = psi_bubble(k, BubbleSide::Plus, x).unwrap();
                let m = psi_bubble(k, BubbleSide::Minus, -x).unwrap();
                assert!((p + m).abs() < 1e-15);
            }
            assert!((phi_tilde(k, 1.0).unwrap() - 1.0).abs() < 1e-12);
            assert!((phi_tilde(k, -1.0).unwrap() - 1.0).abs() < 1e-12);
            let p = Poly1D::from_fn(k, |x| phi_tilde(k, x).unwrap());
            assert!(p.eval_with_derivative(1.0).1.abs() < 1e-8);
            assert!(p.eval_with_derivative(-1.0).1.abs() < 1e-8);
        }
        assert!(psi_bubble(4, BubbleSide::Minus, 0.0).is_err());
        assert!(phi_tilde(3, 0.0).is_err());
    }

    #[test]
    fn divided_difference_matches_direct_quotient() {
        let p = Poly1D::from_legendre(vec![0.3, -1.0, 0.5, 2.0, -0.25]);
        for &(x, y) in &[(0.3, -0.6), (0.9, 0.1), (-0.99, 0.99)] {
            let direct = (p.eval(x) - p.eval(y)) / (x - y);
            assert!((p.divided_difference(x, y) - direct).abs() < 1e-12);
        }
        let (_, d) = p.eval_with_derivative(0.2);
        assert!((p.divided_difference(0.2, 0.2) - d).abs() < 1e-12);
    }

    #[test]
    fn weighted_integral_examples() {
        assert!((weighted_l2_integral(0) - 2.0).abs() < 1e-14);
        assert!((weighted_l2_integral(1) - 2.0 / 3.0).abs() < 1e-14);
        assert!((weighted_l2_integral(7) - 2.0 / 15.0).abs() < 1e-14);
        assert!(weighted_h1_integral(0).abs() < 1e-14);
        assert!((weighted_h1_integral(1) - 2.0).abs() < 1e-13);
        assert!((weighted_h1_integral(6) - 42.0).abs() < 1e-11);
    }

    #[test]
    fn h12_examples() {
        assert_eq!(legendre_h12_seminorm_sq(0), 0.0);
        assert!((legendre_h12_seminorm_sq(1) - 4.0).abs() < 1e-13);
        assert!((legendre_h12_seminorm_sq(2) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn half_norm_examples() {
        let z = interval_half_norms(&Poly1D::zero());
        assert_eq!(z.seminorm_h12, 0.0);
        assert_eq!(z.seminorm_left, 0.0);
        assert_eq!(z.seminorm_00, 0.0);
        let lin = Poly1D::from_legendre(vec![1.0, 1.0]);
        assert!((weighted_seminorm_left_sq(&lin).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(
            weighted_seminorm_right_sq(&lin),
            Err(Error::WeightedSeminormUndefined(_))
        ));
        let n = interval_half_norms(&lin);
        assert!(n.seminorm_right.is_infinite());
    }

    #[test]
    fn triple_norm_of_even_legendre_traces() {
        let k = 6;
        let l = Poly1D::legendre(k);
        let v = boundary_triple_norm(&[l.clone(), l.clone(), l.clone()]).unwrap();
        let expect = (3.0 * (2.0 / 13.0 + 4.0 * harmonic(k))).sqrt();
        assert!((v - expect).abs() < 1e-11);
        let z = Poly1D::zero();
        assert_eq!(boundary_triple_norm(&[z.clone(), z.clone(), z]).unwrap(), 0.0);
        let one = Poly1D::from_legendre(vec![1.0]);
        let zero = Poly1D::zero();
        assert!(matches!(
            boundary_triple_norm(&[one, zero.clone(), zero]),
            Err(Error::VertexMismatch(_))
        ));
    }
}
