//! Legacy VTK (ASCII unstructured grid) output and a small reader for it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use poro_core::mesh::Mesh;
use poro_core::norms::vertex_values;
use poro_core::problem::Discretization;
use poro_core::stepper::SystemState;
use poro_core::verification::DeformedMesh;

use crate::error::AppResult;
use crate::write_atomic;

const VTK_TRIANGLE: u32 = 5;

/// Vertex fields of a state: P1 scalars are already vertex values, the P2
/// displacement is sampled at the vertices.
pub struct PointFields {
    pub scalars: Vec<(&'static str, Vec<f64>)>,
    pub u: Vec<[f64; 2]>,
}

impl PointFields {
    pub fn from_state(disc: &Discretization, s: &SystemState) -> Self {
        PointFields {
            scalars: vec![
                ("p", s.p.clone()),
                ("q", s.q.clone()),
                ("xi", s.xi.clone()),
                ("eta", s.eta.clone()),
            ],
            u: vertex_values(&disc.mesh, &disc.du, &s.u),
        }
    }
}

pub fn format_vtk(title: &str, mesh: &Mesh, fields: &PointFields) -> String {
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    // the title line may not contain newlines
    writeln!(s, "{}", title.replace('\n', " ")).unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {nv} double").unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{:?} {:?} 0", v[0], v[1]).unwrap();
    }
    writeln!(s, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        writeln!(s, "{VTK_TRIANGLE}").unwrap();
    }
    writeln!(s, "POINT_DATA {nv}").unwrap();
    for (name, values) in &fields.scalars {
        assert_eq!(values.len(), nv, "field {name} is not a vertex field");
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in values {
            writeln!(s, "{v:?}").unwrap();
        }
    }
    assert_eq!(fields.u.len(), nv);
    s.push_str("VECTORS u double\n");
    for d in &fields.u {
        writeln!(s, "{:?} {:?} 0", d[0], d[1]).unwrap();
    }
    s
}

pub fn write_state(path: &Path, title: &str, disc: &Discretization, s: &SystemState) -> AppResult<()> {
    write_atomic(path, format_vtk(title, &disc.mesh, &PointFields::from_state(disc, s)).as_bytes())
}

/// Deformed configuration: displaced points with the state's fields.
pub fn write_deformed(path: &Path, title: &str, d: &DeformedMesh, disc: &Discretization, s: &SystemState) -> AppResult<()> {
    write_atomic(path, format_vtk(title, &d.mesh, &PointFields::from_state(disc, s)).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkData {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u32>,
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

/// Reads the subset of the legacy format written above.
pub fn parse_vtk(text: &str) -> Result<VtkData, String> {
    let mut lines = text.lines().enumerate();
    let mut next = || -> Result<(usize, &str), String> {
        lines
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| "unexpected end of file".to_string())
    };
    let (_, magic) = next()?;
    if !magic.starts_with("# vtk DataFile") {
        return Err("missing `# vtk DataFile` header".into());
    }
    let mut d = VtkData {
        title: next()?.1.to_string(),
        ..Default::default()
    };
    let (n, fmt) = next()?;
    if fmt != "ASCII" {
        return Err(format!("line {n}: only ASCII files are supported"));
    }
    let (n, ds) = next()?;
    if ds != "DATASET UNSTRUCTURED_GRID" {
        return Err(format!("line {n}: expected an unstructured grid"));
    }
    let nums = |n: usize, l: &str| -> Result<Vec<f64>, String> {
        l.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| format!("line {n}: `{t}` is not a number")))
            .collect()
    };
    let count = |n: usize, t: Option<&str>| -> Result<usize, String> {
        t.and_then(|c| c.parse().ok()).ok_or_else(|| format!("line {n}: bad count"))
    };
    let mut npoint_data = None;
    while let Ok((n, line)) = next() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("POINTS") => {
                let np = count(n, it.next())?;
                for _ in 0..np {
                    let (n, l) = next()?;
                    let v = nums(n, l)?;
                    if v.len() != 3 {
                        return Err(format!("line {n}: a point needs 3 coordinates"));
                    }
                    d.points.push([v[0], v[1], v[2]]);
                }
            }
            Some("CELLS") => {
                let nc = count(n, it.next())?;
                for _ in 0..nc {
                    let (n, l) = next()?;
                    let v: Vec<usize> = nums(n, l)?.into_iter().map(|x| x as usize).collect();
                    if v.is_empty() || v[0] + 1 != v.len() {
                        return Err(format!("line {n}: cell size does not match its count"));
                    }
                    d.cells.push(v[1..].to_vec());
                }
            }
            Some("CELL_TYPES") => {
                let nc = count(n, it.next())?;
                for _ in 0..nc {
                    let (n, l) = next()?;
                    d.cell_types.push(l.parse().map_err(|_| format!("line {n}: bad cell type"))?);
                }
            }
            Some("POINT_DATA") => npoint_data = Some(count(n, it.next())?),
            Some("SCALARS") => {
                let name = it.next().ok_or_else(|| format!("line {n}: unnamed scalars"))?.to_string();
                let np = npoint_data.ok_or_else(|| format!("line {n}: SCALARS before POINT_DATA"))?;
                let (n, lt) = next()?;
                if !lt.starts_with("LOOKUP_TABLE") {
                    return Err(format!("line {n}: expected LOOKUP_TABLE"));
                }
                let mut v = Vec::with_capacity(np);
                while v.len() < np {
                    let (n, l) = next()?;
                    v.extend(nums(n, l)?);
                }
                d.scalars.insert(name, v);
            }
            Some("VECTORS") => {
                let name = it.next().ok_or_else(|| format!("line {n}: unnamed vectors"))?.to_string();
                let np = npoint_data.ok_or_else(|| format!("line {n}: VECTORS before POINT_DATA"))?;
                let mut v = Vec::with_capacity(np);
                for _ in 0..np {
                    let (n, l) = next()?;
                    let x = nums(n, l)?;
                    if x.len() != 3 {
                        return Err(format!("line {n}: a vector needs 3 components"));
                    }
                    v.push([x[0], x[1], x[2]]);
                }
                d.vectors.insert(name, v);
            }
            Some(other) => return Err(format!("line {n}: unsupported section `{other}`")),
            None => {}
        }
    }
    if d.cells.len() != d.cell_types.len() {
        return Err("CELLS and CELL_TYPES counts differ".into());
    }
    Ok(d)
}
