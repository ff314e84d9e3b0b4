//! Collapsed Gauss rules on the reference triangle: size and exactness.

use crlab::femspace::quadrature::{monomial_integral, quad_rule};

fn main() {
    for degree in [2, 6, 10, 18] {
        let rule = quad_rule(degree);
        let mut worst: f64 = 0.0;
        for a in 0..=degree {
            for b in 0..=degree - a {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                worst = worst.max((q - monomial_integral(a, b)).abs());
            }
        }
        println!("degree {degree:>2}: {:>4} points, max monomial error {worst:.2e}", rule.len());
    }
}
