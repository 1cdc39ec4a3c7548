//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! vertices 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! triangles 2
//! 0 1 2
//! 0 2 3
//! edges 4
//! 0 1 G1
//! ...
//! ```
//!
//! Tags are `G1`..`G4`, `TW`, `VW` or `C:name`. Blank lines and `#` comments
//! are ignored.

use std::fmt::Write as _;
use std::path::Path;

use poro_core::mesh::{BoundaryTag, Mesh};

use crate::error::{AppError, AppResult};
use crate::write_atomic;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct MeshParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> MeshParseError {
    MeshParseError { line, msg: msg.into() }
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "vertices {}", mesh.num_vertices()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{:?} {:?}", v[0], v[1]).unwrap();
    }
    writeln!(s, "triangles {}", mesh.num_triangles()).unwrap();
    for t in mesh.triangles() {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "edges {}", mesh.boundary_edges().len()).unwrap();
    for e in mesh.boundary_edges() {
        writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.tag).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let line = raw.split('#').next().unwrap().trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), MeshParseError> {
        let last = self.last;
        self.next().ok_or_else(|| err(last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn section(&mut self, name: &str) -> Result<usize, MeshParseError> {
        let (n, line) = self.expect(&format!("`{name} <count>`"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(name) {
            return Err(err(n, format!("expected `{name} <count>`, found `{line}`")));
        }
        let count = it
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| err(n, format!("missing or invalid count after `{name}`")))?;
        if it.next().is_some() {
            return Err(err(n, "trailing tokens after count"));
        }
        Ok(count)
    }
}

fn fields<'a>(n: usize, line: &'a str, count: usize, what: &str) -> Result<Vec<&'a str>, MeshParseError> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != count {
        return Err(err(n, format!("{what} needs {count} fields, found {}", f.len())));
    }
    Ok(f)
}

fn index(n: usize, s: &str) -> Result<usize, MeshParseError> {
    s.parse().map_err(|_| err(n, format!("`{s}` is not a vertex index")))
}

/// Parses the text format; structural checks of the mesh itself are
/// reported with the line of the first section header.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, line) = lines.expect("a vertex")?;
        let f = fields(n, line, 2, "vertex")?;
        let c = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(n, format!("`{s}` is not a finite number")))
        };
        vertices.push([c(f[0])?, c(f[1])?]);
    }
    let nt = lines.section("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, line) = lines.expect("a triangle")?;
        let f = fields(n, line, 3, "triangle")?;
        let t = [index(n, f[0])?, index(n, f[1])?, index(n, f[2])?];
        if let Some(&bad) = t.iter().find(|&&v| v >= nv) {
            return Err(err(n, format!("vertex index {bad} out of range (mesh has {nv})")));
        }
        triangles.push(t);
    }
    let ne = lines.section("edges")?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, line) = lines.expect("a boundary edge")?;
        let f = fields(n, line, 3, "boundary edge")?;
        let e = [index(n, f[0])?, index(n, f[1])?];
        if let Some(&bad) = e.iter().find(|&&v| v >= nv) {
            return Err(err(n, format!("vertex index {bad} out of range (mesh has {nv})")));
        }
        let tag = BoundaryTag::from_code(f[2]).ok_or_else(|| err(n, format!("unknown boundary tag `{}`", f[2])))?;
        edges.push((e, tag));
    }
    if let Some((n, line)) = lines.next() {
        return Err(err(n, format!("unexpected content after the edge list: `{line}`")));
    }
    Mesh::new(vertices, triangles, edges).map_err(|e| err(1, format!("invalid mesh: {e}")))
}

pub fn read_mesh(path: &Path) -> AppResult<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_mesh(&text).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> AppResult<()> {
    write_atomic(path, format_mesh(mesh).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use poro_core::mesh::{generate_annulus, generate_rectangle};

    #[test]
    fn round_trip() {
        for mesh in [
            generate_rectangle(0.0, 1.5, 0.0, 1.0, 3, 2).unwrap(),
            generate_annulus(1.0, 2.0, 2, 12).unwrap(),
        ] {
            let back = parse_mesh(&format_mesh(&mesh)).unwrap();
            assert_eq!(back, mesh);
        }
    }

    #[test]
    fn errors_name_the_line() {
        let text = "# square\nvertices 3\n0 0\n1 0\n0 x\ntriangles 1\n0 1 2\nedges 0\n";
        let e = parse_mesh(text).unwrap_err();
        assert_eq!(e.line, 5);
        let text = "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7\n";
        assert_eq!(parse_mesh(text).unwrap_err().line, 6);
        let text = "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nedges 1\n0 1 XX\n";
        let e = parse_mesh(text).unwrap_err();
        assert_eq!(e.line, 8);
        assert!(e.msg.contains("XX"));
        let e = parse_mesh("vertices 2\n0 0\n").unwrap_err();
        assert!(e.msg.contains("end of file"));
    }
}
