//! Projections used for initial data: `Q_h` (L2), `S_h` (elliptic, scalar)
//! and `R_h` (elliptic, vector, orthogonal to rigid motions).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::assembly::{assemble_elasticity, assemble_mass, assemble_pressure_stiffness, physical_gradients, RefTable};
use crate::error::{Error, Result};
use crate::fem::{affine_map, rigid_motions, DofMap, SpaceKind};
use crate::linsolve::{Factorization, LinearSolver};
use crate::mesh::{Mesh, Point};
use crate::params::Permeability;
use crate::sparse::TripletBuilder;

/// Quadrature degree for the right-hand sides, which involve arbitrary functions.
const PROJECTION_QUADRATURE: usize = 6;

/// Coefficients of a projection plus the Lagrange multipliers of its constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub values: Vec<f64>,
    pub multipliers: Vec<f64>,
}

fn scalar_rhs(mesh: &Mesh, ds: &DofMap, f: impl Fn(&crate::fem::AffineMap, Point, usize) -> [f64; 3]) -> Result<Vec<f64>> {
    let tab = RefTable::new(PROJECTION_QUADRATURE)?;
    let mut out = vec![0.0; ds.len()];
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = ds.cell(t);
        for q in 0..tab.weights.len() {
            let x = map.to_physical(tab.points[q]);
            let local = f(&map, x, q);
            let w = tab.weights[q] * map.det;
            for i in 0..3 {
                out[cell[i]] += w * local[i];
            }
        }
    }
    Ok(out)
}

/// `(Q_h f, psi) = (f, psi)` on scalar P1.
pub fn l2_project(mesh: &Mesh, ds: &DofMap, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    if ds.kind() != SpaceKind::ScalarP1 {
        return Err(Error::invalid("L2 projection is implemented for scalar P1"));
    }
    let tab = RefTable::new(PROJECTION_QUADRATURE)?;
    let rhs = scalar_rhs(mesh, ds, |_, x, q| {
        let v = f(x);
        let e = &tab.p1[q].values;
        [v * e[0], v * e[1], v * e[2]]
    })?;
    let mass = assemble_mass(mesh, ds, 1.0)?;
    Factorization::new(&mass, LinearSolver::Direct)?.solve(&rhs)
}

/// `(K grad S_h f, grad psi) = (K grad f, grad psi)` with `(S_h f, 1) = (f, 1)`.
pub fn elliptic_project_scalar(
    mesh: &Mesh,
    ds: &DofMap,
    f: impl Fn(Point) -> f64,
    gradient: impl Fn(Point) -> [f64; 2],
    k: &Permeability,
) -> Result<Projection> {
    if ds.kind() != SpaceKind::ScalarP1 {
        return Err(Error::invalid("scalar elliptic projection needs a scalar P1 space"));
    }
    let n = ds.len();
    let tab = RefTable::new(PROJECTION_QUADRATURE)?;
    let stiff = assemble_pressure_stiffness(mesh, ds, k, 1.0)?;
    let ones = scalar_rhs(mesh, ds, |_, _, q| tab.p1[q].values[..3].try_into().unwrap())?;
    let mut rhs = scalar_rhs(mesh, ds, |map, x, q| {
        let kg = k.apply(gradient(x));
        let g = physical_gradients(map, &tab.p1[q], 3);
        [0, 1, 2].map(|i| kg[0] * g[i][0] + kg[1] * g[i][1])
    })?;
    let mean = scalar_rhs(mesh, ds, |_, x, q| {
        let v = f(x);
        let e = &tab.p1[q].values;
        [v * e[0], v * e[1], v * e[2]]
    })?
    .iter()
    .sum::<f64>();
    let mut b = TripletBuilder::new(n + 1, n + 1);
    b.add_block(0, 0, 1.0, &stiff);
    for (i, &m) in ones.iter().enumerate() {
        b.push(i, n, m);
        b.push(n, i, m);
    }
    rhs.push(mean);
    let mut x = Factorization::new(&b.build(), LinearSolver::Direct)?.solve(&rhs)?;
    let multiplier = x.pop().unwrap();
    Ok(Projection {
        values: x,
        multipliers: vec![multiplier],
    })
}

/// `(eps(R_h f), eps(w)) = (eps(f), eps(w))` for all `w`, with `R_h f`
/// L2-orthogonal to the rigid motions.
pub fn elliptic_project_vector(
    mesh: &Mesh,
    du: &DofMap,
    jacobian: impl Fn(Point) -> [[f64; 2]; 2],
) -> Result<Projection> {
    if du.kind() != SpaceKind::VectorP2 {
        return Err(Error::invalid("vector elliptic projection needs a vector P2 space"));
    }
    let n = du.len();
    let tab = RefTable::new(PROJECTION_QUADRATURE)?;
    let a = assemble_elasticity(mesh, du, 1.0)?;
    let mass = assemble_mass(mesh, du, 1.0)?;
    let mut rhs = vec![0.0; n];
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = du.cell(t);
        for (q, e) in tab.p2.iter().enumerate() {
            let j = jacobian(map.to_physical(tab.points[q]));
            let eps = [[j[0][0], 0.5 * (j[0][1] + j[1][0])], [0.5 * (j[0][1] + j[1][0]), j[1][1]]];
            let g = physical_gradients(&map, e, 6);
            let w = tab.weights[q] * map.det;
            for aa in 0..6 {
                for c in 0..2 {
                    rhs[cell[2 * aa + c]] += w * (eps[c][0] * g[aa][0] + eps[c][1] * g[aa][1]);
                }
            }
        }
    }
    // Pin three dofs to remove the rigid motions from the kernel, then take
    // the rigid part out again. Dense constraint rows would ruin the sparse LU.
    let pinned = kernel_pins(mesh, du);
    let mut b = TripletBuilder::with_capacity(n, n, a.nnz());
    for (i, j, v) in a.iter() {
        if !pinned.contains(&i) && !pinned.contains(&j) {
            b.push(i, j, v);
        }
    }
    for &d in &pinned {
        b.push(d, d, 1.0);
        rhs[d] = 0.0;
    }
    rhs.truncate(n);
    let mut x = Factorization::new(&b.build(), LinearSolver::Direct)?.solve(&rhs)?;
    let rm = rigid_motions(du);
    let mr: Vec<Vec<f64>> = rm.iter().map(|r| mass.mul_vec(r)).collect();
    let mut g = [[0.0; 3]; 3];
    let mut c = [0.0; 3];
    for k in 0..3 {
        c[k] = crate::sparse::dot(&mr[k], &x);
        for l in 0..3 {
            g[k][l] = crate::sparse::dot(&mr[k], &rm[l]);
        }
    }
    let coef = solve3(g, c).ok_or_else(|| Error::SingularSystem("rigid-motion Gram matrix is singular".into()))?;
    for k in 0..3 {
        x.iter_mut().zip(&rm[k]).for_each(|(xi, ri)| *xi -= coef[k] * ri);
    }
    // the right-hand side annihilates rigid motions, so the multipliers vanish
    Ok(Projection {
        values: x,
        multipliers: vec![0.0; 3],
    })
}

/// Two components at one vertex and one at the farthest vertex, chosen so
/// that no rigid motion vanishes on all three.
fn kernel_pins(mesh: &Mesh, du: &DofMap) -> [usize; 3] {
    let v = mesh.vertices();
    let a = v[0];
    let (b, _) = v.iter().enumerate().fold((0, -1.0), |(bi, bd), (i, p)| {
        let d = (p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2);
        if d > bd {
            (i, d)
        } else {
            (bi, bd)
        }
    });
    // rotation about `a` evaluated at `b` is (-(b-a)_y, (b-a)_x)
    let c = if (v[b][1] - a[1]).abs() >= (v[b][0] - a[0]).abs() { 0 } else { 1 };
    [du.dof(0, 0), du.dof(0, 1), du.dof(b, c)]
}

/// Coefficients `c` of the L2 projection `sum_k c_k r_k` of `f` onto the
/// rigid motions `(1,0)`, `(0,1)`, `(-y,x)`.
pub fn rigid_motion_component(mesh: &Mesh, f: impl Fn(Point) -> [f64; 2]) -> Result<[f64; 3]> {
    let tab = RefTable::new(crate::norms::NORM_QUADRATURE)?;
    let mut g = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        for q in 0..tab.weights.len() {
            let x = map.to_physical(tab.points[q]);
            let r = [[1.0, 0.0], [0.0, 1.0], [-x[1], x[0]]];
            let fv = f(x);
            let w = tab.weights[q] * map.det;
            for k in 0..3 {
                b[k] += w * (fv[0] * r[k][0] + fv[1] * r[k][1]);
                for l in 0..3 {
                    g[k][l] += w * (r[k][0] * r[l][0] + r[k][1] * r[l][1]);
                }
            }
        }
    }
    solve3(g, b).ok_or_else(|| Error::SingularSystem("rigid-motion Gram matrix is singular".into()))
}

/// Gaussian elimination with partial pivoting for a 3x3 system.
pub(crate) fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rectangle;
    use crate::norms::{scalar_error, vector_error};
    use core::f64::consts::PI;

    fn unit(n: usize) -> Mesh {
        generate_rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn l2_reproduces_linears_and_constants() {
        let m = unit(3);
        let ds = DofMap::new(&m, SpaceKind::ScalarP1);
        let v = l2_project(&m, &ds, |p| 2.0 * p[0] - p[1] + 0.5).unwrap();
        let e = scalar_error(&m, &ds, &v, |p| 2.0 * p[0] - p[1] + 0.5, |_| [2.0, -1.0]).unwrap();
        assert!(e.l2 < 1e-12);
        let c = l2_project(&m, &ds, |_| 4.0).unwrap();
        assert!(c.iter().all(|v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn scalar_elliptic_linear_and_mean() {
        let m = unit(4);
        let ds = DofMap::new(&m, SpaceKind::ScalarP1);
        let k = Permeability([[2.0, 0.5], [0.5, 1.0]]);
        let p = elliptic_project_scalar(&m, &ds, |p| p[0] + 3.0 * p[1], |_| [1.0, 3.0], &k).unwrap();
        let e = scalar_error(&m, &ds, &p.values, |p| p[0] + 3.0 * p[1], |_| [1.0, 3.0]).unwrap();
        assert!(e.l2 < 1e-12);
        assert!(p.multipliers[0].abs() < 1e-12);
        let f = |p: Point| (p[0] + p[1]).sin();
        let p = elliptic_project_scalar(&m, &ds, f, |p| [(p[0] + p[1]).cos(); 2], &k).unwrap();
        let mass = assemble_mass(&m, &ds, 1.0).unwrap();
        let mean_h: f64 = mass.mul_vec(&p.values).iter().sum();
        let mean = 2.0 * 1f64.sin() - 2f64.sin();
        assert!((mean_h - mean).abs() < 1e-10);
    }

    #[test]
    fn vector_elliptic_rigid_and_quadratic() {
        let m = unit(3);
        let du = DofMap::new(&m, SpaceKind::VectorP2);
        let p = elliptic_project_vector(&m, &du, |_| [[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(p.values.iter().all(|v| v.abs() < 1e-12));
        let f = |p: Point| [p[0] * p[0] + p[1], p[0] * p[1]];
        let j = |p: Point| [[2.0 * p[0], 1.0], [p[1], p[0]]];
        let p = elliptic_project_vector(&m, &du, j).unwrap();
        let c = rigid_motion_component(&m, f).unwrap();
        let g = |x: Point| {
            let v = f(x);
            [v[0] - c[0] + c[2] * x[1], v[1] - c[1] - c[2] * x[0]]
        };
        let e = vector_error(&m, &du, &p.values, g, j).unwrap();
        assert!(e.l2 < 1e-10, "{e:?}");
    }

    fn order(a: f64, b: f64) -> f64 {
        (a / b).ln() / 2f64.ln()
    }

    #[test]
    fn projection_rates() {
        let f = |p: Point| (p[0] + p[1]).sin();
        let g = |p: Point| [(p[0] + p[1]).cos(); 2];
        let v = |p: Point| [(PI * p[0]).sin() * (PI * p[1]).sin(), 0.0];
        let vj = |p: Point| {
            [
                [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()],
                [0.0, 0.0],
            ]
        };
        let mut q = vec![];
        let mut s = vec![];
        let mut r = vec![];
        for n in [4, 8, 16] {
            let m = unit(n);
            let ds = DofMap::new(&m, SpaceKind::ScalarP1);
            let du = DofMap::new(&m, SpaceKind::VectorP2);
            q.push(scalar_error(&m, &ds, &l2_project(&m, &ds, f).unwrap(), f, g).unwrap().l2);
            let sp = elliptic_project_scalar(&m, &ds, f, g, &Permeability::isotropic(1.0)).unwrap();
            s.push(scalar_error(&m, &ds, &sp.values, f, g).unwrap().l2);
            let rp = elliptic_project_vector(&m, &du, vj).unwrap();
            let c = rigid_motion_component(&m, v).unwrap();
            let target = |x: Point| {
                let w = v(x);
                [w[0] - c[0] + c[2] * x[1], w[1] - c[1] - c[2] * x[0]]
            };
            r.push(vector_error(&m, &du, &rp.values, target, vj).unwrap().l2);
        }
        for k in 0..2 {
            assert!((order(q[k], q[k + 1]) - 2.0).abs() < 0.2, "{q:?}");
            assert!((order(s[k], s[k + 1]) - 2.0).abs() < 0.2, "{s:?}");
            assert!((order(r[k], r[k + 1]) - 3.0).abs() < 0.2, "{r:?}");
        }
    }

    #[test]
    fn solve3_matches_hand() {
        let x = solve3([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]], [3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(solve3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]], [0.0; 3]).is_none());
    }
}
