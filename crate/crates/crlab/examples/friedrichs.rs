//! Discrete Friedrichs constants of the broken space across degrees and
//! one refinement.

use crlab::infsup::friedrichs_constant;
use crlab::mesh::generators::crisscross;

fn main() -> crlab::Result<()> {
    for n in [2, 4] {
        let m = crisscross(n)?;
        let c: Vec<String> = (1..=6).map(|k| friedrichs_constant(&m, k).map(|c| format!("{c:.5}"))).collect::<crlab::Result<_>>()?;
        println!("crisscross({n}): {}", c.join(" "));
    }
    Ok(())
}
