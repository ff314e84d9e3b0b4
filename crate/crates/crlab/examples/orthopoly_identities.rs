//! Weighted Legendre integrals, the H^{1/2} seminorm of L_k and the
//! modified edge trace `phi~_k`.

use crlab::orthopoly::{
    harmonic, legendre_h12_recursion, legendre_h12_seminorm_sq, phi_tilde, weighted_h1_integral, weighted_l2_integral,
};

fn main() -> crlab::Result<()> {
    println!("{:>3} {:>14} {:>14} {:>14} {:>14}", "k", "int(t+1)L^2", "2/(2k+1)", "|L_k|^2_1/2", "4 H_k");
    for k in [1, 2, 5, 10, 20, 30] {
        println!(
            "{k:>3} {:>14.10} {:>14.10} {:>14.10} {:>14.10}",
            weighted_l2_integral(k),
            2.0 / (2 * k + 1) as f64,
            legendre_h12_seminorm_sq(k),
            4.0 * harmonic(k)
        );
        assert!((weighted_h1_integral(k) - (k * (k + 1)) as f64).abs() < 1e-9 * (k * k) as f64);
        assert!((legendre_h12_recursion(k) - legendre_h12_seminorm_sq(k)).abs() < 1e-9 * harmonic(k));
    }
    let k = 7;
    let samples: Vec<String> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&x| format!("{:.5}", phi_tilde(k, x).unwrap())).collect();
    println!("phi~_{k} at -1, -0.5, 0, 0.5, 1: {}", samples.join(" "));
    Ok(())
}
