//! Energy of the modified edge bubble against the plain one for growing
//! odd degree, with the defect of each defining property.

use crlab::mesh::generators::crisscross;
use crlab::rightinverse::{build_extended_bubble_edge, CrSpace};

fn main() -> crlab::Result<()> {
    let m = crisscross(1)?;
    let e = m.interior_edges()[0];
    println!("{:>3} {:>10} {:>10} {:>12} {:>9} {:>9} {:>9}", "k", "|B~|", "|B^CR|", "|B~|/sqrtlog", "trace", "grad(z)", "mean div");
    for k in (5..=15).step_by(2) {
        let s = CrSpace::new(&m, k)?;
        let b = build_extended_bubble_edge(&s, e)?;
        let c = b.check(&s, 50);
        println!(
            "{k:>3} {:>10.5} {:>10.5} {:>12.5} {:>9.1e} {:>9.1e} {:>9.1e}",
            b.energy,
            b.reference_energy,
            b.energy / ((k + 1) as f64).ln().sqrt(),
            c.trace,
            c.vertex_gradient,
            c.mean_div
        );
    }
    Ok(())
}
