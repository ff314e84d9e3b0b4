//! Inf-sup constants on two nested criss-cross meshes with the
//! `sqrt(log(k+1))` scaling and the mesh ratio.

use crlab::infsup::infsup_constant;
use crlab::mesh::generators::crisscross;

fn main() -> crlab::Result<()> {
    let (coarse, fine) = (crisscross(2)?, crisscross(4)?);
    println!("{:>2} {:>10} {:>10} {:>8} {:>10}", "k", "c(h)", "c(h/2)", "ratio", "scaled");
    for k in 1..=6 {
        let a = infsup_constant(&coarse, k)?;
        let b = infsup_constant(&fine, k)?;
        println!("{k:>2} {:>10.6} {:>10.6} {:>8.4} {:>10.6}", a.c, b.c, b.c / a.c, b.scaled);
    }
    Ok(())
}
