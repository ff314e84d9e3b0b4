//! Parses a mesh in the text format, classifies its critical points and
//! prints the topology report.

use crlab::mesh::generators::from_spec;
use crlab::mesh::io::{parse_mesh, write_mesh};
use crlab::mesh::shape::shape_report;
use crlab::mesh::topology::analyze;

const SQUARE: &str = "\
# unit square split into four triangles
v 0 0
v 1 0
v 1 1
v 0 1
v 0.5 0.5
t 0 1 4
t 1 2 4
t 2 3 4
t 3 0 4
";

fn main() -> crlab::Result<()> {
    let m = parse_mesh(SQUARE, false)?;
    let report = analyze(&m, 0.01)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    for spec in ["single", "tent", "glued", "fan:80,80,80,80", "perturbed:0.05"] {
        let g = from_spec(spec)?;
        let r = analyze(&g, 0.01)?;
        let s = shape_report(&g);
        println!(
            "{spec:>16}: {} triangles, phi = {:.3}, inner {:?}, acute {:?}, flat {:?}, concave {:?}, fans {}, L = {:?}",
            g.n_triangles(),
            s.phi,
            r.classes.inner,
            r.classes.acute,
            r.classes.flat,
            r.classes.concave,
            r.fans.fans.len(),
            r.extension_l
        );
    }
    assert!(parse_mesh("v 0 0\nt 0 1\n", false).is_err());
    print!("{}", write_mesh(&from_spec("tent")?));
    Ok(())
}
