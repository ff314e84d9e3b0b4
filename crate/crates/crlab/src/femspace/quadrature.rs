//! Collapsed-coordinate Gauss rules on the reference triangle
//! `(0,0), (1,0), (0,1)`.

use crate::orthopoly::{gauss_legendre, jacobi_eval};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    /// Reference coordinates `(x, y)`.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    /// Barycentric coordinates `(1-x-y, x, y)` of every point.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| [1.0 - p[0] - p[1], p[0], p[1]]).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Jacobi nodes and weights for the weight `(1 - t)` on `[-1, 1]`.
pub fn gauss_jacobi_10(n: usize) -> (Vec<f64>, Vec<f64>) {
    let p = |x: f64| jacobi_eval(n, 1.0, 0.0, x);
    // d/dx P_n^(1,0) = (n + 2)/2 P_{n-1}^(2,1)
    let dp = |x: f64| 0.5 * (n as f64 + 2.0) * jacobi_eval(n - 1, 2.0, 1.0, x);
    let mut x: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        if i > 0 && z <= x[i - 1] {
            z = 0.5 * (x[i - 1] + 1.0);
        }
        for _ in 0..200 {
            // Newton with deflation of the roots already found
            let defl: f64 = x.iter().map(|r| 1.0 / (z - r)).sum();
            let f = p(z);
            let dz = f / (dp(z) - f * defl);
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(z);
    }
    x.sort_by(f64::total_cmp);
    let w = x.iter().map(|&z| 4.0 / ((1.0 - z * z) * dp(z).powi(2))).collect();
    (x, w)
}

/// Rule exact for polynomials of total degree `degree` on the reference
/// triangle. Panics if the built-in monomial self-test fails.
pub fn quad_rule(degree: usize) -> QuadRule {
    let n = degree.div_ceil(2) + 1;
    let (xg, wg) = gauss_legendre(n);
    let (xj, wj) = gauss_jacobi_10(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&e, &we) in xj.iter().zip(&wj) {
        for (&s, &ws) in xg.iter().zip(&wg) {
            points.push([(1.0 + s) * (1.0 - e) / 4.0, (1.0 + e) / 2.0]);
            weights.push(ws * we / 8.0);
        }
    }
    let rule = QuadRule { points, weights, degree };
    assert!(self_test(&rule), "quadrature self-test failed for degree {degree}");
    rule
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Exact `int_ref x^a y^b = a! b! / (a + b + 2)!`.
pub fn monomial_integral(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

fn self_test(rule: &QuadRule) -> bool {
    for a in 0..=rule.degree {
        for b in 0..=rule.degree - a {
            let q: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
            let exact = monomial_integral(a, b);
            if (q - exact).abs() > 1e-13 * exact.max(1e-300) && (q - exact).abs() > 1e-15 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_weights_sum() {
        for n in 1..12 {
            let (x, w) = gauss_jacobi_10(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn barycentric_moments() {
        let r = quad_rule(8);
        let area = 0.5;
        let integ = |f: &dyn Fn([f64; 3]) -> f64| -> f64 {
            r.barycentric().iter().zip(&r.weights).map(|(l, w)| w * f(*l)).sum()
        };
        assert!((integ(&|_| 1.0) - area).abs() < 1e-14);
        assert!((integ(&|l| l[0] * l[1] * l[2]) - area / 60.0).abs() < 1e-15);
        assert!((integ(&|l| l[0] * l[0] * l[1] * l[1]) - area / 90.0).abs() < 1e-15);
    }

    #[test]
    fn high_degree_rules() {
        for d in [0, 1, 5, 20, 40] {
            let r = quad_rule(d);
            assert_eq!(r.len(), (d.div_ceil(2) + 1).pow(2));
        }
    }
}
