//! Plain-text mesh format: `v x y` and `t i j k` lines (0-based vertex
//! indices, counterclockwise), `#` starts a comment.

use super::{Point, Triangulation};
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Raw vertex and triangle lists as read from text, before validation.
pub fn parse_raw(text: &str) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap();
        let fields: Vec<&str> = it.collect();
        let err = |msg: String| Error::Parse { line: line_no, msg };
        match tag {
            "v" => {
                if fields.len() != 2 {
                    return Err(err(format!("expected 'v x y', got '{line}'")));
                }
                let x: f64 = fields[0].parse().map_err(|_| err(format!("bad coordinate '{}'", fields[0])))?;
                let y: f64 = fields[1].parse().map_err(|_| err(format!("bad coordinate '{}'", fields[1])))?;
                if !x.is_finite() || !y.is_finite() {
                    return Err(err("non-finite coordinate".into()));
                }
                verts.push([x, y]);
            }
            "t" => {
                if fields.len() != 3 {
                    return Err(err(format!("expected 't i j k', got '{line}'")));
                }
                let mut t = [0usize; 3];
                for (i, f) in fields.iter().enumerate() {
                    t[i] = f.parse().map_err(|_| err(format!("bad vertex index '{f}'")))?;
                }
                tris.push(t);
            }
            _ => return Err(err(format!("unknown record '{tag}'"))),
        }
    }
    Ok((verts, tris))
}

pub fn parse_mesh(text: &str, fix_orientation: bool) -> Result<Triangulation> {
    let (v, t) = parse_raw(text)?;
    if fix_orientation {
        Triangulation::new_fix_orientation(v, t)
    } else {
        Triangulation::new(v, t)
    }
}

pub fn read_mesh(path: &std::path::Path, fix_orientation: bool) -> Result<Triangulation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mesh(&text, fix_orientation)
}

pub fn write_mesh(mesh: &Triangulation) -> String {
    let mut s = String::new();
    for p in &mesh.vertices {
        writeln!(s, "v {:.17e} {:.17e}", p[0], p[1]).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "t {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let m = super::super::generators::crisscross(2).unwrap();
        let back = parse_mesh(&write_mesh(&m), false).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
    }

    #[test]
    fn comments_and_errors() {
        let ok = "# square\nv 0 0\nv 1 0 # corner\nv 0 1\n\nt 0 1 2\n";
        assert_eq!(parse_mesh(ok, false).unwrap().n_triangles(), 1);
        match parse_mesh("v 0 0\nv 1 0\nv 0 1\nt 0 1\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_mesh("v 0 0\nv 0 1\nv 1 0\nt 0 1 2\n", false), Err(Error::BadOrientation(0))));
        assert!(parse_mesh("v 0 0\nv 0 1\nv 1 0\nt 0 1 2\n", true).is_ok());
        assert!(matches!(parse_mesh("q 1 2\n", false), Err(Error::Parse { line: 1, .. })));
    }
}
