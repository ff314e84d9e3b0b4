//! The projection onto Scott-Vogelius pressures for odd and even degree,
//! compared with the minimum-norm right inverse.

use crlab::infsup::min_norm_right_inverse;
use crlab::mesh::generators::{crisscross, tent};
use crlab::rightinverse::{pi_cr, CrSpace, RightInverseReport};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> crlab::Result<()> {
    let mut rng = StdRng::seed_from_u64(3);
    for (name, m, k) in [("crisscross(1)", crisscross(1)?, 5), ("crisscross(1)", crisscross(1)?, 7), ("tent", tent()?, 4), ("tent", tent()?, 6)] {
        let s = CrSpace::new(&m, k)?;
        let mut q: Vec<f64> = (0..s.dim_p()).map(|_| rng.random_range(-1.0..1.0)).collect();
        s.remove_mean(&mut q);
        let p = pi_cr(&s, &q, 0.01)?;
        let (_, ratio) = min_norm_right_inverse(&m, k, &q)?;
        let r = RightInverseReport::new(name, &p, Some(ratio));
        println!(
            "{name} k={k}: max |int div| {:.1e}, SV scaled residual {:.1e}, |v|/(sqrt(log) |q|) {:.4}, min-norm ratio {:.4}",
            r.div_means_max, r.sv_max_scaled, r.log_ratio, ratio
        );
    }
    Ok(())
}
