//! Writes the divergence coupling in the `rows cols` text format and
//! reads it back.

use crlab::assembly::{assemble_div_coupling, read_matrix, write_matrix};
use crlab::femspace::{build_dofmap, Space};
use crlab::mesh::generators::diagonal_square;

fn main() -> crlab::Result<()> {
    let m = diagonal_square(1)?;
    let v = build_dofmap(&m, 2, Space::CrouzeixRaviart, true)?;
    let p = build_dofmap(&m, 2, Space::Pressure, false)?;
    let b = assemble_div_coupling(&m, &v, &p)?.matrix;
    let text = write_matrix(&b);
    println!("{}", text.lines().next().unwrap_or(""));
    let back = read_matrix(&text)?;
    let diff = (0..b.nrows()).flat_map(|i| (0..b.ncols()).map(move |j| (i, j))).map(|(i, j)| (b[(i, j)] - back[(i, j)]).abs()).fold(0.0, f64::max);
    println!("round trip max difference {diff:e}");
    Ok(())
}
