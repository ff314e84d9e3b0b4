//! One extension step across a triangle glued to a criss-cross patch,
//! whose far corner is an acute critical point.

use crlab::mesh::generators::glued_crisscross;
use crlab::mesh::topology::{classify_critical, extension_sequence};
use crlab::rightinverse::{acute_extension_step, CrSpace};

fn main() -> crlab::Result<()> {
    let m = glued_crisscross()?;
    println!("acute points: {:?}", classify_critical(&m, 0.01)?.classes().acute);
    let seq = extension_sequence(&m)?;
    println!("levels: {:?}", seq.levels);
    for k in [5, 7, 9] {
        let s = CrSpace::new(&m, k)?;
        let mut q: Vec<f64> = (0..s.dim_p()).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        s.remove_mean(&mut q);
        let st = acute_extension_step(&s, &seq.levels[0], &q)?;
        println!(
            "k={k}: outside {:?} via edges {:?}, residual {:.1e} (|q| max {:.2}), means on sub {:.1e}, energy {:.4}",
            st.outside, st.joints, st.residual, st.q_max, st.sub_means_residual, st.energy
        );
    }
    Ok(())
}
