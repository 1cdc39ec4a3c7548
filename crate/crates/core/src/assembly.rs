//! Element-loop assembly of the bilinear forms and load functionals.
//!
//! Vector dofs are `(node, component)` pairs, so a local vector basis function
//! is `phi_a e_c` and its strain is `sym(e_c (x) grad phi_a)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{affine_map, edge_gauss3, quadrature, AffineMap, BasisEval, DofMap, ReferenceBasis, SpaceKind};
use crate::field::{BoundaryScalarFn, BoundaryVectorFn, ScalarFn, VectorFn};
use crate::mesh::{BoundaryEdge, BoundaryTag, Mesh, Point};
use crate::params::{Permeability, PhysicalParams};
use crate::sparse::{SparseOperator, TripletBuilder};

/// Volume quadrature degree for operators and loads.
pub const ASSEMBLY_QUADRATURE: usize = 4;

/// Reference basis tables at the points of one quadrature rule.
pub(crate) struct RefTable {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub p1: Vec<BasisEval>,
    pub p2: Vec<BasisEval>,
}

impl RefTable {
    pub fn new(degree: usize) -> Result<Self> {
        let rule = quadrature(degree)?;
        Ok(RefTable {
            p1: rule.points.iter().map(|&x| ReferenceBasis::P1.eval(x)).collect(),
            p2: rule.points.iter().map(|&x| ReferenceBasis::P2.eval(x)).collect(),
            points: rule.points,
            weights: rule.weights,
        })
    }

    pub fn basis(&self, kind: SpaceKind) -> &[BasisEval] {
        match kind {
            SpaceKind::ScalarP1 => &self.p1,
            SpaceKind::VectorP2 => &self.p2,
        }
    }
}

pub(crate) fn physical_gradients(map: &AffineMap, e: &BasisEval, n: usize) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for i in 0..n {
        g[i] = map.gradient(e.gradients[i]);
    }
    g
}

fn check_kind(d: &DofMap, kind: SpaceKind, what: &str) -> Result<()> {
    if d.kind() != kind {
        return Err(Error::invalid(alloc::format!("{what} requires a {kind:?} dof map")));
    }
    Ok(())
}

/// `mu (eps(u), eps(v))` on vector P2.
pub fn assemble_elasticity(mesh: &Mesh, du: &DofMap, mu: f64) -> Result<SparseOperator> {
    check_kind(du, SpaceKind::VectorP2, "elasticity")?;
    let tab = RefTable::new(ASSEMBLY_QUADRATURE)?;
    let mut b = TripletBuilder::with_capacity(du.len(), du.len(), mesh.num_triangles() * 144);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = du.cell(t);
        let mut local = [[0.0; 12]; 12];
        for (q, e) in tab.p2.iter().enumerate() {
            let w = tab.weights[q] * map.det * mu;
            let g = physical_gradients(&map, e, 6);
            for a in 0..6 {
                for bb in 0..6 {
                    let dot = g[a][0] * g[bb][0] + g[a][1] * g[bb][1];
                    for c in 0..2 {
                        for d in 0..2 {
                            // trial phi_a e_c, test phi_b e_d
                            let mut v = g[a][d] * g[bb][c];
                            if c == d {
                                v += dot;
                            }
                            local[2 * bb + d][2 * a + c] += 0.5 * w * v;
                        }
                    }
                }
            }
        }
        for i in 0..12 {
            for j in 0..12 {
                b.push(cell[i], cell[j], local[i][j]);
            }
        }
    }
    Ok(b.build())
}

/// `B[i, j] = (psi_i, div phi_j)` with scalar P1 rows and vector P2 columns.
pub fn assemble_div_coupling(mesh: &Mesh, du: &DofMap, ds: &DofMap) -> Result<SparseOperator> {
    check_kind(du, SpaceKind::VectorP2, "divergence coupling")?;
    check_kind(ds, SpaceKind::ScalarP1, "divergence coupling")?;
    let tab = RefTable::new(ASSEMBLY_QUADRATURE)?;
    let mut b = TripletBuilder::with_capacity(ds.len(), du.len(), mesh.num_triangles() * 36);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let (cu, cs) = (du.cell(t), ds.cell(t));
        let mut local = [[0.0; 12]; 3];
        for q in 0..tab.weights.len() {
            let w = tab.weights[q] * map.det;
            let g = physical_gradients(&map, &tab.p2[q], 6);
            let psi = &tab.p1[q].values;
            for i in 0..3 {
                for a in 0..6 {
                    for c in 0..2 {
                        local[i][2 * a + c] += w * psi[i] * g[a][c];
                    }
                }
            }
        }
        for i in 0..3 {
            for j in 0..12 {
                b.push(cs[i], cu[j], local[i][j]);
            }
        }
    }
    Ok(b.build())
}

/// `coefficient (phi, psi)` on either space (component-wise for vectors).
pub fn assemble_mass(mesh: &Mesh, dofmap: &DofMap, coefficient: f64) -> Result<SparseOperator> {
    let kind = dofmap.kind();
    let (n, nc) = (kind.nodes_per_cell(), kind.components());
    let nd = kind.dofs_per_cell();
    let tab = RefTable::new(ASSEMBLY_QUADRATURE)?;
    let mut b = TripletBuilder::with_capacity(dofmap.len(), dofmap.len(), mesh.num_triangles() * nd * nd);
    if coefficient == 0.0 {
        return Ok(b.build());
    }
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = dofmap.cell(t);
        let mut local = [[0.0; 6]; 6];
        for (q, e) in tab.basis(kind).iter().enumerate() {
            let w = tab.weights[q] * map.det * coefficient;
            for i in 0..n {
                for j in 0..n {
                    local[i][j] += w * e.values[i] * e.values[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for c in 0..nc {
                    b.push(cell[nc * i + c], cell[nc * j + c], local[i][j]);
                }
            }
        }
    }
    Ok(b.build())
}

/// `coefficient (phi, psi)` on scalar P1.
pub fn assemble_scalar_mass(mesh: &Mesh, ds: &DofMap, coefficient: f64) -> Result<SparseOperator> {
    check_kind(ds, SpaceKind::ScalarP1, "scalar mass")?;
    assemble_mass(mesh, ds, coefficient)
}

/// `(1 / mu_f) (K grad phi, grad psi)` on scalar P1.
pub fn assemble_pressure_stiffness(mesh: &Mesh, ds: &DofMap, k: &Permeability, mu_f: f64) -> Result<SparseOperator> {
    check_kind(ds, SpaceKind::ScalarP1, "pressure stiffness")?;
    k.validate()?;
    if !(mu_f > 0.0) {
        return Err(Error::invalid("fluid viscosity must be positive"));
    }
    let mut b = TripletBuilder::with_capacity(ds.len(), ds.len(), mesh.num_triangles() * 9);
    let e = ReferenceBasis::P1.eval([1.0 / 3.0, 1.0 / 3.0]);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = ds.cell(t);
        let g = physical_gradients(&map, &e, 3);
        for i in 0..3 {
            let kg = k.apply(g[i]);
            for j in 0..3 {
                let v = map.area() / mu_f * (kg[0] * g[j][0] + kg[1] * g[j][1]);
                b.push(cell[j], cell[i], v);
            }
        }
    }
    Ok(b.build())
}

/// Local position of boundary edge `be` inside its triangle: the reference
/// coordinates of its start and end vertices.
fn edge_reference_endpoints(mesh: &Mesh, be: &BoundaryEdge) -> ([f64; 2], [f64; 2]) {
    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let tri = mesh.triangles()[be.triangle];
    let la = tri.iter().position(|&v| v == be.vertices[0]).expect("edge vertex in owner");
    let lb = tri.iter().position(|&v| v == be.vertices[1]).expect("edge vertex in owner");
    (REF[la], REF[lb])
}

/// Calls `f(edge, point, normal, weight, reference_point)` at the Gauss
/// points of every boundary edge tagged `tag`; `weight` includes the edge length.
fn for_each_edge_point(
    mesh: &Mesh,
    tag: &BoundaryTag,
    mut f: impl FnMut(&BoundaryEdge, Point, [f64; 2], f64, [f64; 2]),
) -> Result<()> {
    if !mesh.has_tag(tag) {
        return Err(Error::UnknownTag(tag.code()));
    }
    for be in mesh.edges_with_tag(tag) {
        let map = affine_map(mesh, be.triangle)?;
        let (ra, rb) = edge_reference_endpoints(mesh, be);
        let len = be.length(mesh);
        let n = be.outward_normal(mesh);
        for (s, w) in edge_gauss3() {
            let xi = [ra[0] + s * (rb[0] - ra[0]), ra[1] + s * (rb[1] - ra[1])];
            f(be, map.to_physical(xi), n, w * len, xi);
        }
    }
    Ok(())
}

/// `(phi, psi) + <phi1, psi>` on scalar P1 at time `t`.
pub fn assemble_scalar_load(
    mesh: &Mesh,
    ds: &DofMap,
    volume: Option<&ScalarFn>,
    boundary: &[(BoundaryTag, BoundaryScalarFn)],
    t: f64,
) -> Result<Vec<f64>> {
    check_kind(ds, SpaceKind::ScalarP1, "scalar load")?;
    let mut out = vec![0.0; ds.len()];
    if let Some(f) = volume {
        let tab = RefTable::new(ASSEMBLY_QUADRATURE)?;
        for tri in 0..mesh.num_triangles() {
            let map = affine_map(mesh, tri)?;
            let cell = ds.cell(tri);
            for (q, e) in tab.p1.iter().enumerate() {
                let v = tab.weights[q] * map.det * f(map.to_physical(tab.points[q]), t);
                for i in 0..3 {
                    out[cell[i]] += v * e.values[i];
                }
            }
        }
    }
    for (tag, g) in boundary {
        for_each_edge_point(mesh, tag, |be, x, n, w, xi| {
            let e = ReferenceBasis::P1.eval(xi);
            let v = w * g(x, n, t);
            let cell = ds.cell(be.triangle);
            for i in 0..3 {
                out[cell[i]] += v * e.values[i];
            }
        })?;
    }
    Ok(out)
}

/// `(f, v) + <f1, v>` on vector P2 at time `t`.
pub fn assemble_vector_load(
    mesh: &Mesh,
    du: &DofMap,
    volume: Option<&VectorFn>,
    tractions: &[(BoundaryTag, BoundaryVectorFn)],
    t: f64,
) -> Result<Vec<f64>> {
    check_kind(du, SpaceKind::VectorP2, "vector load")?;
    let mut out = vec![0.0; du.len()];
    if let Some(f) = volume {
        let tab = RefTable::new(ASSEMBLY_QUADRATURE)?;
        for tri in 0..mesh.num_triangles() {
            let map = affine_map(mesh, tri)?;
            let cell = du.cell(tri);
            for (q, e) in tab.p2.iter().enumerate() {
                let fv = f(map.to_physical(tab.points[q]), t);
                let w = tab.weights[q] * map.det;
                for a in 0..6 {
                    for c in 0..2 {
                        out[cell[2 * a + c]] += w * fv[c] * e.values[a];
                    }
                }
            }
        }
    }
    for (tag, g) in tractions {
        for_each_edge_point(mesh, tag, |be, x, n, w, xi| {
            let e = ReferenceBasis::P2.eval(xi);
            let gv = g(x, n, t);
            let cell = du.cell(be.triangle);
            for a in 0..6 {
                for c in 0..2 {
                    out[cell[2 * a + c]] += w * gv[c] * e.values[a];
                }
            }
        })?;
    }
    Ok(out)
}

/// `(1 / mu_f) (K rho_f g, grad psi)`, the gravity contribution to the flow equation.
pub fn assemble_gravity_load(mesh: &Mesh, ds: &DofMap, params: &PhysicalParams) -> Result<Vec<f64>> {
    check_kind(ds, SpaceKind::ScalarP1, "gravity load")?;
    let mut out = vec![0.0; ds.len()];
    let kg = params.permeability.apply(params.buoyancy());
    if kg == [0.0, 0.0] {
        return Ok(out);
    }
    let e = ReferenceBasis::P1.eval([1.0 / 3.0, 1.0 / 3.0]);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let g = physical_gradients(&map, &e, 3);
        let cell = ds.cell(t);
        for i in 0..3 {
            out[cell[i]] += map.area() / params.mu_f * (kg[0] * g[i][0] + kg[1] * g[i][1]);
        }
    }
    Ok(out)
}

/// Boundary mass `(c_b / mu_f) <phi, psi>_tag` and load `(c_b / mu_f) p_ext <1, psi>_tag`
/// for the absorption condition `(K grad p) . n = c_b (p_ext - p)`.
pub fn assemble_robin_boundary(
    mesh: &Mesh,
    ds: &DofMap,
    tag: &BoundaryTag,
    c_b: f64,
    mu_f: f64,
    p_ext: f64,
) -> Result<(SparseOperator, Vec<f64>)> {
    check_kind(ds, SpaceKind::ScalarP1, "Robin boundary")?;
    let scale = c_b / mu_f;
    let mut b = TripletBuilder::new(ds.len(), ds.len());
    let mut load = vec![0.0; ds.len()];
    for_each_edge_point(mesh, tag, |be, _, _, w, xi| {
        if scale == 0.0 {
            return;
        }
        let e = ReferenceBasis::P1.eval(xi);
        let cell = ds.cell(be.triangle);
        for i in 0..3 {
            load[cell[i]] += scale * p_ext * w * e.values[i];
            for j in 0..3 {
                let v = scale * w * e.values[i] * e.values[j];
                if v != 0.0 {
                    b.push(cell[i], cell[j], v);
                }
            }
        }
    })?;
    Ok((b.build(), load))
}

/// `P[(a, c), j] = <psi_j n_c, phi_a>_tag`: the boundary term of a traction
/// `-p n` with `p` in the scalar space, moved to the left-hand side.
pub fn assemble_pressure_traction(mesh: &Mesh, du: &DofMap, ds: &DofMap, tag: &BoundaryTag) -> Result<SparseOperator> {
    check_kind(du, SpaceKind::VectorP2, "pressure traction")?;
    check_kind(ds, SpaceKind::ScalarP1, "pressure traction")?;
    let mut b = TripletBuilder::new(du.len(), ds.len());
    for_each_edge_point(mesh, tag, |be, _, n, w, xi| {
        let (e2, e1) = (ReferenceBasis::P2.eval(xi), ReferenceBasis::P1.eval(xi));
        let (cu, cs) = (du.cell(be.triangle), ds.cell(be.triangle));
        for a in 0..6 {
            for c in 0..2 {
                for j in 0..3 {
                    let v = w * e2.values[a] * n[c] * e1.values[j];
                    if v != 0.0 {
                        b.push(cu[2 * a + c], cs[j], v);
                    }
                }
            }
        }
    })?;
    Ok(b.build())
}

/// `c_b = Q0 / (p_d A_SAS)`.
pub fn conductance_from_physiology(q0: f64, p_d: f64, a_sas: f64) -> Result<f64> {
    if !(q0 > 0.0 && p_d > 0.0 && a_sas > 0.0) {
        return Err(Error::invalid("flow rate, pressure drop and area must be positive"));
    }
    Ok(q0 / (p_d * a_sas))
}
