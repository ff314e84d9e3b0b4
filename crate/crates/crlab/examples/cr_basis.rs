//! Dimensions of the Crouzeix-Raviart spaces and the edge-moment law of
//! every basis function.

use crlab::femspace::{build_dofmap, jump_moment_residual, Space};
use crlab::mesh::generators::crisscross;

fn main() -> crlab::Result<()> {
    let m = crisscross(2)?;
    println!("{:>2} {:>8} {:>8} {:>8} {:>12}", "k", "S_k0", "CR_k0", "P_k-1", "max moment");
    for k in 1..=6 {
        let s = build_dofmap(&m, k, Space::Conforming, false)?;
        let cr = build_dofmap(&m, k, Space::CrouzeixRaviart, false)?;
        let p = build_dofmap(&m, k, Space::Pressure, false)?;
        let worst = (0..cr.n_scalar())
            .map(|i| {
                let mut u = vec![0.0; cr.n_scalar()];
                u[i] = 1.0;
                jump_moment_residual(&m, &cr, &u)
            })
            .fold(0.0, f64::max);
        println!("{k:>2} {:>8} {:>8} {:>8} {worst:>12.2e}", s.n_scalar(), cr.n_scalar(), p.n_scalar());
    }
    Ok(())
}
