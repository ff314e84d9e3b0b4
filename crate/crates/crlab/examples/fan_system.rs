//! The tridiagonal fan matrix, its determinant formula and the assembled
//! fan system of the criss-cross centre.

use crlab::mesh::generators::crisscross;
use crlab::mesh::topology::{classify_critical, fan_decomposition};
use crlab::rightinverse::{fan_system, fan_t_det_closed_form, fan_t_matrix, CrSpace};
use std::f64::consts::PI;

fn main() -> crlab::Result<()> {
    let angles = [PI / 5.0, PI / 7.0, PI / 6.0, PI / 4.0];
    let t = fan_t_matrix(&angles)?;
    println!("det T = {:.12}, closed form {:.12}", t.determinant(), fan_t_det_closed_form(&angles)?);

    let m = crisscross(1)?;
    let c = classify_critical(&m, 0.01)?;
    let dec = fan_decomposition(&m, &c)?;
    let space = CrSpace::new(&m, 5)?;
    let mut q = space.piecewise_constant(&[1.0, -1.0, 1.0, -1.0]);
    space.remove_mean(&mut q);
    for fan in &dec.fans {
        let fs = fan_system(&space, fan, &q)?;
        println!(
            "apex {} members {:?}: M = {:?}, r = {:?}, alpha = {:?}, consistency {:.1e}",
            fs.apex, fs.members, fs.m_direct, fs.r, fs.alpha, fs.consistency
        );
    }
    Ok(())
}
