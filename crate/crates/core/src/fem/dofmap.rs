use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::ScalarFn;
use crate::mesh::{BoundaryTag, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    ScalarP1,
    VectorP2,
}

impl SpaceKind {
    pub fn components(self) -> usize {
        match self {
            SpaceKind::ScalarP1 => 1,
            SpaceKind::VectorP2 => 2,
        }
    }

    pub fn nodes_per_cell(self) -> usize {
        match self {
            SpaceKind::ScalarP1 => 3,
            SpaceKind::VectorP2 => 6,
        }
    }

    pub fn dofs_per_cell(self) -> usize {
        self.nodes_per_cell() * self.components()
    }
}

#[derive(Clone)]
pub struct DirichletCondition {
    pub tag: BoundaryTag,
    pub component: Option<usize>,
    pub value: ScalarFn,
}

impl fmt::Debug for DirichletCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCondition")
            .field("tag", &self.tag)
            .field("component", &self.component)
            .finish_non_exhaustive()
    }
}

/// Global numbering of a continuous Lagrange space.
///
/// Nodes are the mesh vertices followed (P2 only) by the edge midpoints in
/// mesh edge order. Vector dofs are interleaved per node: `2 * node + c`.
/// On a cell, local dof `components * a + c` belongs to local node `a`.
#[derive(Clone, Debug)]
pub struct DofMap {
    kind: SpaceKind,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
    coords: Vec<Point>,
    dirichlet: Vec<Option<usize>>,
    conditions: Vec<DirichletCondition>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: SpaceKind) -> Self {
        let nv = mesh.num_vertices();
        let ncomp = kind.components();
        let mut node_coords: Vec<Point> = mesh.vertices().to_vec();
        if kind == SpaceKind::VectorP2 {
            node_coords.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
        }
        let n_dofs = node_coords.len() * ncomp;
        let mut coords = Vec::with_capacity(n_dofs);
        for p in &node_coords {
            for _ in 0..ncomp {
                coords.push(*p);
            }
        }
        let mut cell_dofs = Vec::with_capacity(mesh.num_triangles() * kind.dofs_per_cell());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut nodes = [0usize; 6];
            nodes[..3].copy_from_slice(tri);
            if kind == SpaceKind::VectorP2 {
                for (j, &e) in mesh.triangle_edges()[t].iter().enumerate() {
                    nodes[3 + j] = nv + e;
                }
            }
            for &n in &nodes[..kind.nodes_per_cell()] {
                for c in 0..ncomp {
                    cell_dofs.push(ncomp * n + c);
                }
            }
        }
        DofMap {
            kind,
            n_dofs,
            cell_dofs,
            coords,
            dirichlet: vec![None; n_dofs],
            conditions: Vec::new(),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n_dofs
    }

    pub fn is_empty(&self) -> bool {
        self.n_dofs == 0
    }

    pub fn cell(&self, tri: usize) -> &[usize] {
        let n = self.kind.dofs_per_cell();
        &self.cell_dofs[tri * n..(tri + 1) * n]
    }

    pub fn coords(&self, dof: usize) -> Point {
        self.coords[dof]
    }

    pub fn component(&self, dof: usize) -> usize {
        dof % self.kind.components()
    }

    /// Global node index of a dof (vertex index, or `nv + edge` for midpoints).
    pub fn node(&self, dof: usize) -> usize {
        dof / self.kind.components()
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.kind.components() + component
    }

    pub fn num_nodes(&self) -> usize {
        self.n_dofs / self.kind.components()
    }

    /// Masks every dof lying on edges tagged `tag` (only component
    /// `component` for vector spaces when given).
    pub fn mark_dirichlet(
        mut self,
        mesh: &Mesh,
        tag: BoundaryTag,
        component: Option<usize>,
        value: ScalarFn,
    ) -> Result<Self> {
        if !mesh.has_tag(&tag) {
            return Err(Error::UnknownTag(tag.code()));
        }
        let ncomp = self.kind.components();
        if let Some(c) = component {
            if c >= ncomp {
                return Err(Error::invalid(alloc::format!(
                    "component {c} out of range for a {ncomp}-component space"
                )));
            }
        }
        let slot = self.conditions.len();
        let nv = mesh.num_vertices();
        let comps: Vec<usize> = match component {
            Some(c) => vec![c],
            None => (0..ncomp).collect(),
        };
        for e in mesh.edges_with_tag(&tag) {
            let mut nodes = vec![e.vertices[0], e.vertices[1]];
            if self.kind == SpaceKind::VectorP2 {
                nodes.push(nv + e.edge);
            }
            for n in nodes {
                for &c in &comps {
                    let d = self.dof(n, c);
                    if self.dirichlet[d].is_none() {
                        self.dirichlet[d] = Some(slot);
                    }
                }
            }
        }
        self.conditions.push(DirichletCondition { tag, component, value });
        Ok(self)
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof].is_some()
    }

    pub fn dirichlet_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.dirichlet
            .iter()
            .enumerate()
            .filter_map(|(d, s)| s.map(|_| d))
    }

    pub fn num_dirichlet(&self) -> usize {
        self.dirichlet.iter().filter(|s| s.is_some()).count()
    }

    pub fn conditions(&self) -> &[DirichletCondition] {
        &self.conditions
    }

    /// Prescribed values at time `t`, sorted by dof.
    pub fn dirichlet_values(&self, t: f64) -> Vec<(usize, f64)> {
        self.dirichlet
            .iter()
            .enumerate()
            .filter_map(|(d, s)| s.map(|slot| (d, (self.conditions[slot].value)(self.coords[d], t))))
            .collect()
    }

    /// Nodal interpolant of a scalar function (component-wise for vector spaces).
    pub fn interpolate(&self, f: impl Fn(Point, usize) -> f64) -> Vec<f64> {
        (0..self.n_dofs)
            .map(|d| f(self.coords[d], self.component(d)))
            .collect()
    }
}

/// Coefficient vectors of the rigid motions `(1,0)`, `(0,1)` and `(-y,x)`.
pub type RigidMotionBasis = [Vec<f64>; 3];

pub fn rigid_motions(dofmap: &DofMap) -> RigidMotionBasis {
    assert_eq!(dofmap.kind(), SpaceKind::VectorP2);
    [
        dofmap.interpolate(|_, c| if c == 0 { 1.0 } else { 0.0 }),
        dofmap.interpolate(|_, c| if c == 1 { 1.0 } else { 0.0 }),
        dofmap.interpolate(|p, c| if c == 0 { -p[1] } else { p[0] }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::constant_scalar;
    use crate::mesh::generate_rectangle;

    #[test]
    fn counts_on_two_triangle_square() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        assert_eq!(DofMap::new(&m, SpaceKind::ScalarP1).len(), 4);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(DofMap::new(&m, SpaceKind::VectorP2).len(), 18);
    }

    #[test]
    fn shared_edge_is_conforming() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let d = DofMap::new(&m, SpaceKind::VectorP2);
        // the diagonal (0,2) is local edge 2 of triangle 0 and local edge 0 of triangle 1
        let c0 = d.cell(0);
        let c1 = d.cell(1);
        assert_eq!(c0[2 * 5], c1[2 * 3]);
        assert_eq!(c0[2 * 5 + 1], c1[2 * 3 + 1]);
        assert_eq!(d.coords(c0[2 * 5]), [0.5, 0.5]);
    }

    #[test]
    fn dof_counts_scale_with_refinement() {
        for n in [1usize, 2, 4, 8] {
            let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
            // independent enumeration: horizontal + vertical + diagonal edges
            let ne = 2 * n * (n + 1) + n * n;
            assert_eq!(m.num_edges(), ne);
            let d = DofMap::new(&m, SpaceKind::VectorP2);
            assert_eq!(d.len(), 2 * ((n + 1) * (n + 1) + ne));
        }
    }

    #[test]
    fn scalar_boundary_mask() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let mut d = DofMap::new(&m, SpaceKind::ScalarP1);
        for tag in [BoundaryTag::Gamma1, BoundaryTag::Gamma2, BoundaryTag::Gamma3, BoundaryTag::Gamma4] {
            d = d.mark_dirichlet(&m, tag, None, constant_scalar(0.0)).unwrap();
        }
        assert_eq!(d.num_dirichlet(), 12);
        for dof in 0..d.len() {
            let p = d.coords(dof);
            let on_boundary = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
            assert_eq!(d.is_dirichlet(dof), on_boundary);
        }
    }

    #[test]
    fn component_mask() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let d = DofMap::new(&m, SpaceKind::VectorP2)
            .mark_dirichlet(&m, BoundaryTag::Gamma1, Some(0), constant_scalar(1.0))
            .unwrap();
        // 3 vertices + 2 midpoints on x = 0, x-component only
        assert_eq!(d.num_dirichlet(), 5);
        for dof in d.dirichlet_dofs() {
            assert_eq!(d.component(dof), 0);
            assert_eq!(d.coords(dof)[0], 0.0);
        }
        assert!(d.dirichlet_values(0.0).iter().all(|&(_, v)| v == 1.0));
    }

    #[test]
    fn example_one_masks() {
        // u1 on G1, G3 and u2 on G2, G4 on a 2x2 mesh: each side carries 5 P2 nodes
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let z = constant_scalar(0.0);
        let d = DofMap::new(&m, SpaceKind::VectorP2)
            .mark_dirichlet(&m, BoundaryTag::Gamma1, Some(0), z.clone())
            .unwrap()
            .mark_dirichlet(&m, BoundaryTag::Gamma3, Some(0), z.clone())
            .unwrap()
            .mark_dirichlet(&m, BoundaryTag::Gamma2, Some(1), z.clone())
            .unwrap()
            .mark_dirichlet(&m, BoundaryTag::Gamma4, Some(1), z)
            .unwrap();
        // per component: two sides sharing one corner = 5 + 5 - 1
        assert_eq!(d.num_dirichlet(), 2 * (5 + 5 - 1));
    }

    #[test]
    fn unknown_tag() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let r = DofMap::new(&m, SpaceKind::ScalarP1).mark_dirichlet(
            &m,
            BoundaryTag::TissueWall,
            None,
            constant_scalar(0.0),
        );
        assert!(matches!(r, Err(Error::UnknownTag(_))));
    }
}
