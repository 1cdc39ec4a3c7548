//! Conforming 2D triangulations with tagged boundary edges.
//!
//! A [`Mesh`] is validated once at construction and immutable afterwards.
//! Besides vertices and triangles it carries the derived edge table used by
//! the quadratic spaces, and every boundary edge is stored oriented so that
//! the domain lies on its left (outward normal `(dy, -dx) / len`).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Label attached to a boundary edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    TissueWall,
    VentricleWall,
    Custom(String),
}

impl BoundaryTag {
    /// Short code used by the mesh text format.
    pub fn code(&self) -> String {
        match self {
            BoundaryTag::Gamma1 => "G1".into(),
            BoundaryTag::Gamma2 => "G2".into(),
            BoundaryTag::Gamma3 => "G3".into(),
            BoundaryTag::Gamma4 => "G4".into(),
            BoundaryTag::TissueWall => "TW".into(),
            BoundaryTag::VentricleWall => "VW".into(),
            BoundaryTag::Custom(name) => alloc::format!("C:{name}"),
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "G1" => BoundaryTag::Gamma1,
            "G2" => BoundaryTag::Gamma2,
            "G3" => BoundaryTag::Gamma3,
            "G4" => BoundaryTag::Gamma4,
            "TW" => BoundaryTag::TissueWall,
            "VW" => BoundaryTag::VentricleWall,
            other => {
                let name = other.strip_prefix("C:")?;
                if name.is_empty() {
                    return None;
                }
                BoundaryTag::Custom(name.to_string())
            }
        })
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    /// Index into [`Mesh::edges`].
    pub edge: usize,
    /// Triangle owning this edge.
    pub triangle: usize,
}

impl BoundaryEdge {
    pub fn length(&self, mesh: &Mesh) -> f64 {
        let [a, b] = self.vertices;
        dist(mesh.vertices[a], mesh.vertices[b])
    }

    pub fn outward_normal(&self, mesh: &Mesh) -> [f64; 2] {
        let [a, b] = self.vertices;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = (dx * dx + dy * dy).sqrt();
        [dy / len, -dx / len]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh and checks every structural invariant.
    ///
    /// Triangles must be counterclockwise. Boundary edges may be given in
    /// either orientation; they are reoriented to keep the domain on the left.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tagged_edges: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (k, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::VertexOutOfRange {
                        index: v,
                        context: alloc::format!("triangle {k}"),
                    });
                }
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvertedTriangle { index: k, area });
            }
        }

        // edge table: (sorted pair) -> (edge id, owning triangles)
        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut owners: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                let id = *lookup.entry(key(a, b)).or_insert_with(|| {
                    edges.push([a, b]);
                    owners.push(Vec::new());
                    edges.len() - 1
                });
                owners[id].push(k);
                if owners[id].len() > 2 {
                    return Err(Error::NonManifoldEdge { a, b });
                }
                te[j] = id;
            }
            triangle_edges.push(te);
        }

        let mut tag_of: Vec<Option<BoundaryTag>> = vec![None; edges.len()];
        for ([a, b], tag) in tagged_edges {
            if a >= nv || b >= nv {
                return Err(Error::VertexOutOfRange {
                    index: a.max(b),
                    context: "boundary edge".into(),
                });
            }
            let id = match lookup.get(&key(a, b)) {
                Some(&id) if owners[id].len() == 1 => id,
                _ => return Err(Error::TaggedInteriorEdge { a, b }),
            };
            if tag_of[id].is_some() {
                return Err(Error::DuplicateBoundaryEdge { a, b });
            }
            tag_of[id] = Some(tag);
        }

        let mut boundary_edges = Vec::new();
        let mut degree = vec![0usize; nv];
        for (id, own) in owners.iter().enumerate() {
            if own.len() != 1 {
                continue;
            }
            let [a, b] = edges[id];
            let tag = tag_of[id]
                .take()
                .ok_or(Error::UntaggedBoundaryEdge { a, b })?;
            let tri = own[0];
            // orient like the owning (counterclockwise) triangle
            let t = triangles[tri];
            let forward = (0..3).any(|j| t[j] == a && t[(j + 1) % 3] == b);
            let vertices_ab = if forward { [a, b] } else { [b, a] };
            degree[a] += 1;
            degree[b] += 1;
            boundary_edges.push(BoundaryEdge {
                vertices: vertices_ab,
                tag,
                edge: id,
                triangle: tri,
            });
        }
        if let Some(v) = degree.iter().position(|d| d % 2 == 1) {
            return Err(Error::OpenBoundary { vertex: v });
        }

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unique edges, numbered in order of first appearance while walking the
    /// triangles and their local edges `(0,1), (1,2), (2,0)`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of each triangle's local edges `(0,1), (1,2), (2,0)`.
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, k: usize) -> [Point; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn triangle_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangle_points(k);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.num_triangles()).map(|k| self.triangle_area(k)).sum()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Distinct tags in first-appearance order.
    pub fn tags(&self) -> Vec<BoundaryTag> {
        let mut out: Vec<BoundaryTag> = Vec::new();
        for e in &self.boundary_edges {
            if !out.contains(&e.tag) {
                out.push(e.tag.clone());
            }
        }
        out
    }

    pub fn has_tag(&self, tag: &BoundaryTag) -> bool {
        self.boundary_edges.iter().any(|e| &e.tag == tag)
    }

    pub fn edges_with_tag<'a>(&'a self, tag: &'a BoundaryTag) -> impl Iterator<Item = &'a BoundaryEdge> + 'a {
        self.boundary_edges.iter().filter(move |e| &e.tag == tag)
    }

    pub fn boundary_length(&self, tag: &BoundaryTag) -> f64 {
        self.edges_with_tag(tag).map(|e| e.length(self)).sum()
    }

    /// Returns a copy with displaced vertex coordinates and identical connectivity.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        Mesh {
            vertices,
            ..self.clone()
        }
    }
}

/// Largest edge length over all triangles.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.edges
        .iter()
        .map(|&[a, b]| dist(mesh.vertices[a], mesh.vertices[b]))
        .fold(0.0, f64::max)
}

/// Which diagonal splits each cell of a structured rectangle mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Forward,
    /// Upper-left to lower-right.
    Backward,
}

/// Structured triangulation of a rectangle; every cell is split along its
/// lower-left to upper-right diagonal.
///
/// Tags: `Gamma1` on `x = x_min`, `Gamma2` on `x = x_max`, `Gamma3` on
/// `y = y_max`, `Gamma4` on `y = y_min`.
pub fn generate_rectangle(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Mesh> {
    generate_rectangle_with(x_min, x_max, y_min, y_max, nx, ny, Diagonal::Forward)
}

/// As [`generate_rectangle`] with a choice of cell diagonal.
pub fn generate_rectangle_with(
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    diagonal: Diagonal,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("rectangle needs nx >= 1 and ny >= 1"));
    }
    if !(x_max > x_min) || !(y_max > y_min) {
        return Err(Error::invalid("degenerate rectangle"));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y_min + (y_max - y_min) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = x_min + (x_max - x_min) * i as f64 / nx as f64;
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            match diagonal {
                Diagonal::Forward => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                Diagonal::Backward => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
    }
    let mut edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        edges.push(([idx(i, 0), idx(i + 1, 0)], BoundaryTag::Gamma4));
        edges.push(([idx(i + 1, ny), idx(i, ny)], BoundaryTag::Gamma3));
    }
    for j in 0..ny {
        edges.push(([idx(nx, j), idx(nx, j + 1)], BoundaryTag::Gamma2));
        edges.push(([idx(0, j + 1), idx(0, j)], BoundaryTag::Gamma1));
    }
    Mesh::new(vertices, triangles, edges)
}

/// Structured polar triangulation of the annulus `r_inner < r < r_outer`.
///
/// The outer circle is tagged `TissueWall`, the inner one `VentricleWall`.
pub fn generate_annulus(r_inner: f64, r_outer: f64, n_radial: usize, n_angular: usize) -> Result<Mesh> {
    if !(r_inner > 0.0) || !(r_outer > r_inner) {
        return Err(Error::invalid("annulus needs 0 < r_inner < r_outer"));
    }
    if n_radial == 0 || n_angular < 3 {
        return Err(Error::invalid("annulus needs n_radial >= 1 and n_angular >= 3"));
    }
    let idx = |k: usize, j: usize| k * n_angular + (j % n_angular);
    let mut vertices = Vec::with_capacity((n_radial + 1) * n_angular);
    for k in 0..=n_radial {
        let r = r_inner + (r_outer - r_inner) * k as f64 / n_radial as f64;
        for j in 0..n_angular {
            let th = 2.0 * PI * j as f64 / n_angular as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n_radial * n_angular);
    for k in 0..n_radial {
        for j in 0..n_angular {
            let (a, b, c, d) = (idx(k, j), idx(k, j + 1), idx(k + 1, j + 1), idx(k + 1, j));
            triangles.push([a, c, b]);
            triangles.push([a, d, c]);
        }
    }
    let mut edges = Vec::with_capacity(2 * n_angular);
    for j in 0..n_angular {
        edges.push(([idx(n_radial, j), idx(n_radial, j + 1)], BoundaryTag::TissueWall));
        edges.push(([idx(0, j + 1), idx(0, j)], BoundaryTag::VentricleWall));
    }
    Mesh::new(vertices, triangles, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_triangles(), 8);
    }

    #[test]
    fn rectangle_mesh_size() {
        let m = generate_rectangle(0.0, 1.5, 0.0, 1.5, 16, 16).unwrap();
        assert!((mesh_size(&m) - 1.5 * 2f64.sqrt() / 16.0).abs() < 1e-14);
        assert!((mesh_size(&m) - 0.1326).abs() < 1e-4);
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        assert!((mesh_size(&m) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rectangle_tags_follow_sides() {
        let m = generate_rectangle(0.0, 2.0, -1.0, 1.0, 3, 2).unwrap();
        for e in m.boundary_edges() {
            let [a, b] = e.vertices;
            let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
            let n = e.outward_normal(&m);
            match e.tag {
                BoundaryTag::Gamma1 => {
                    assert!(pa[0] == 0.0 && pb[0] == 0.0);
                    assert!((n[0] + 1.0).abs() < 1e-15);
                }
                BoundaryTag::Gamma2 => {
                    assert!(pa[0] == 2.0 && pb[0] == 2.0);
                    assert!((n[0] - 1.0).abs() < 1e-15);
                }
                BoundaryTag::Gamma3 => assert!((n[1] - 1.0).abs() < 1e-15 && pa[1] == 1.0),
                BoundaryTag::Gamma4 => assert!((n[1] + 1.0).abs() < 1e-15 && pb[1] == -1.0),
                _ => panic!("unexpected tag"),
            }
        }
        assert!((m.boundary_length(&BoundaryTag::Gamma3) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_rectangles() {
        assert!(generate_rectangle(0.0, 1.0, 0.0, 1.0, 0, 1).is_err());
        assert!(generate_rectangle(1.0, 1.0, 0.0, 1.0, 1, 1).is_err());
        assert!(generate_rectangle(0.0, 1.0, 2.0, 1.0, 1, 1).is_err());
    }

    #[test]
    fn annulus_counts_and_tags() {
        let m = generate_annulus(10.0, 50.0, 1, 4).unwrap();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.edges_with_tag(&BoundaryTag::TissueWall).count(), 4);
        assert_eq!(m.edges_with_tag(&BoundaryTag::VentricleWall).count(), 4);
        // outward normals of the inner wall point toward the origin
        for e in m.edges_with_tag(&BoundaryTag::VentricleWall) {
            let n = e.outward_normal(&m);
            let p = m.vertices()[e.vertices[0]];
            assert!(n[0] * p[0] + n[1] * p[1] < 0.0);
        }
    }

    #[test]
    fn annulus_mesh_size_by_scan() {
        let m = generate_annulus(10.0, 50.0, 1, 4).unwrap();
        // exhaustive scan over triangle sides
        let mut best = 0.0f64;
        for k in 0..m.num_triangles() {
            let p = m.triangle_points(k);
            for j in 0..3 {
                best = best.max(dist(p[j], p[(j + 1) % 3]));
            }
        }
        assert_eq!(mesh_size(&m), best);
        // the outer chord between (50,0) and (0,50) is the longest side
        assert!((best - 50.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn default_edema_annulus_perimeter() {
        let m = generate_annulus(20.0, 62.0, 20, 96).unwrap();
        let per = m.boundary_length(&BoundaryTag::TissueWall);
        assert!((per / (2.0 * PI * 62.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_annulus() {
        assert!(generate_annulus(0.0, 1.0, 1, 4).is_err());
        assert!(generate_annulus(2.0, 1.0, 1, 4).is_err());
        assert!(generate_annulus(1.0, 2.0, 1, 2).is_err());
    }

    #[test]
    fn validation_errors() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let tags = || {
            vec![
                ([0, 1], BoundaryTag::Gamma1),
                ([1, 2], BoundaryTag::Gamma1),
                ([2, 0], BoundaryTag::Gamma1),
            ]
        };
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]], tags()).is_ok());
        assert_eq!(
            Mesh::new(v.clone(), vec![[0, 2, 1]], tags()).unwrap_err(),
            Error::InvertedTriangle { index: 0, area: -0.5 }
        );
        let mut partial = tags();
        partial.pop();
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 2]], partial),
            Err(Error::UntaggedBoundaryEdge { .. })
        ));
        let mut dup = tags();
        dup.push(([0, 1], BoundaryTag::Gamma2));
        assert!(matches!(
            Mesh::new(v, vec![[0, 1, 2]], dup),
            Err(Error::DuplicateBoundaryEdge { .. })
        ));
    }

    #[test]
    fn tag_codes_round_trip() {
        for tag in [
            BoundaryTag::Gamma1,
            BoundaryTag::Gamma4,
            BoundaryTag::TissueWall,
            BoundaryTag::VentricleWall,
            BoundaryTag::Custom("inlet".into()),
        ] {
            assert_eq!(BoundaryTag::from_code(&tag.code()), Some(tag));
        }
        assert_eq!(BoundaryTag::from_code("C:"), None);
        assert_eq!(BoundaryTag::from_code("G7"), None);
    }
}
