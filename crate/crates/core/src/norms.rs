//! L2 and H1-seminorm errors of finite-element fields against exact functions.

use num_traits::Float;

use crate::assembly::{physical_gradients, RefTable};
use crate::error::Result;
use crate::fem::{affine_map, DofMap, SpaceKind};
use crate::mesh::{Mesh, Point};

/// Quadrature degree used for error norms.
pub const NORM_QUADRATURE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldError {
    pub l2: f64,
    pub h1_semi: f64,
}

/// Errors of a scalar P1 field against `exact` and its gradient.
pub fn scalar_error(
    mesh: &Mesh,
    ds: &DofMap,
    coeffs: &[f64],
    exact: impl Fn(Point) -> f64,
    exact_gradient: impl Fn(Point) -> [f64; 2],
) -> Result<FieldError> {
    assert_eq!(ds.kind(), SpaceKind::ScalarP1);
    assert_eq!(coeffs.len(), ds.len());
    let tab = RefTable::new(NORM_QUADRATURE)?;
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = ds.cell(t);
        for (q, e) in tab.p1.iter().enumerate() {
            let x = map.to_physical(tab.points[q]);
            let g = physical_gradients(&map, e, 3);
            let (mut v, mut gv) = (0.0, [0.0; 2]);
            for i in 0..3 {
                let c = coeffs[cell[i]];
                v += c * e.values[i];
                gv[0] += c * g[i][0];
                gv[1] += c * g[i][1];
            }
            let ge = exact_gradient(x);
            let w = tab.weights[q] * map.det;
            l2 += w * (exact(x) - v).powi(2);
            h1 += w * ((ge[0] - gv[0]).powi(2) + (ge[1] - gv[1]).powi(2));
        }
    }
    Ok(FieldError {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
    })
}

/// Errors of a vector P2 field against `exact` and its Jacobian
/// `[[d/dx u_x, d/dy u_x], [d/dx u_y, d/dy u_y]]`.
pub fn vector_error(
    mesh: &Mesh,
    du: &DofMap,
    coeffs: &[f64],
    exact: impl Fn(Point) -> [f64; 2],
    exact_jacobian: impl Fn(Point) -> [[f64; 2]; 2],
) -> Result<FieldError> {
    assert_eq!(du.kind(), SpaceKind::VectorP2);
    assert_eq!(coeffs.len(), du.len());
    let tab = RefTable::new(NORM_QUADRATURE)?;
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let map = affine_map(mesh, t)?;
        let cell = du.cell(t);
        for (q, e) in tab.p2.iter().enumerate() {
            let x = map.to_physical(tab.points[q]);
            let g = physical_gradients(&map, e, 6);
            let mut v = [0.0; 2];
            let mut jv = [[0.0; 2]; 2];
            for a in 0..6 {
                for c in 0..2 {
                    let coef = coeffs[cell[2 * a + c]];
                    v[c] += coef * e.values[a];
                    jv[c][0] += coef * g[a][0];
                    jv[c][1] += coef * g[a][1];
                }
            }
            let (ue, je) = (exact(x), exact_jacobian(x));
            let w = tab.weights[q] * map.det;
            l2 += w * ((ue[0] - v[0]).powi(2) + (ue[1] - v[1]).powi(2));
            for c in 0..2 {
                for d in 0..2 {
                    h1 += w * (je[c][d] - jv[c][d]).powi(2);
                }
            }
        }
    }
    Ok(FieldError {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
    })
}

/// Values of a vector P2 field at the mesh vertices.
pub fn vertex_values(mesh: &Mesh, du: &DofMap, coeffs: &[f64]) -> alloc::vec::Vec<[f64; 2]> {
    (0..mesh.num_vertices())
        .map(|v| [coeffs[du.dof(v, 0)], coeffs[du.dof(v, 1)]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rectangle;
    use alloc::vec;

    #[test]
    fn interpolant_of_quadratic_is_exact() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 2.0, 3, 5).unwrap();
        let du = DofMap::new(&m, SpaceKind::VectorP2);
        let f = |p: Point| [p[0] * p[1] + 1.0, p[0] * p[0] - 3.0 * p[1] * p[1]];
        let j = |p: Point| [[p[1], p[0]], [2.0 * p[0], -6.0 * p[1]]];
        let u = du.interpolate(|p, c| f(p)[c]);
        let e = vector_error(&m, &du, &u, f, j).unwrap();
        assert!(e.l2 < 1e-12 && e.h1_semi < 1e-12);
    }

    #[test]
    fn zero_fields() {
        let m = generate_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let ds = DofMap::new(&m, SpaceKind::ScalarP1);
        let e = scalar_error(&m, &ds, &vec![0.0; ds.len()], |_| 0.0, |_| [0.0; 2]).unwrap();
        assert_eq!(e, FieldError::default());
    }

    #[test]
    fn constant_offset() {
        // error of (f + 1) against f is the square root of the area
        let m = generate_rectangle(0.0, 2.0, 0.0, 2.0, 2, 2).unwrap();
        let ds = DofMap::new(&m, SpaceKind::ScalarP1);
        let c = ds.interpolate(|p, _| p[0] + 1.0);
        let e = scalar_error(&m, &ds, &c, |p| p[0], |_| [1.0, 0.0]).unwrap();
        assert!((e.l2 - 2.0).abs() < 1e-13);
        assert!(e.h1_semi < 1e-13);
    }
}
