//! Reference elements, quadrature, affine element maps and degree-of-freedom
//! numbering for continuous P1 (scalar) and P2 (vector) spaces.

mod basis;
mod dofmap;
mod quadrature;

pub use basis::{BasisEval, ReferenceBasis, P2_NODES};
pub use dofmap::{rigid_motions, DirichletCondition, DofMap, RigidMotionBasis, SpaceKind};
pub use quadrature::{edge_gauss3, quadrature, QuadratureRule};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Affine map `x = origin + J * xi` from the reference triangle onto a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: Point,
    pub jacobian: [[f64; 2]; 2],
    pub inverse_transpose: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn from_points(p: [Point; 3]) -> Result<Self> {
        let j = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det > 0.0) {
            return Err(Error::InvertedTriangle { index: usize::MAX, area: 0.5 * det });
        }
        let inverse_transpose = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        Ok(AffineMap {
            origin: p[0],
            jacobian: j,
            inverse_transpose,
            det,
        })
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> Point {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    /// Maps a reference gradient to a physical one.
    #[inline]
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inverse_transpose;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

/// Affine map of triangle `tri`; inverted elements are reported by index.
pub fn affine_map(mesh: &Mesh, tri: usize) -> Result<AffineMap> {
    AffineMap::from_points(mesh.triangle_points(tri)).map_err(|e| match e {
        Error::InvertedTriangle { area, .. } => Error::InvertedTriangle { index: tri, area },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_is_identity() {
        let m = AffineMap::from_points([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(m.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.det, 1.0);
    }

    #[test]
    fn scaling_by_two() {
        let m = AffineMap::from_points([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(m.det, 4.0);
        assert_eq!(m.gradient([1.0, 0.0]), [0.5, 0.0]);
    }

    #[test]
    fn area_matches_shoelace() {
        let p = [[0.3, -0.2], [2.1, 0.4], [0.9, 1.7]];
        let m = AffineMap::from_points(p).unwrap();
        let shoelace = 0.5
            * ((p[0][0] * p[1][1] - p[1][0] * p[0][1])
                + (p[1][0] * p[2][1] - p[2][0] * p[1][1])
                + (p[2][0] * p[0][1] - p[0][0] * p[2][1]));
        assert!((m.area() - shoelace).abs() < 1e-14);
        let c = m.to_physical([1.0, 0.0]);
        assert!((c[0] - 2.1).abs() < 1e-15 && (c[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn physical_gradient_of_linear_function() {
        // f(x, y) = 2x - 3y is linear; its P1 interpolant's gradient is exact
        let p = [[0.3, -0.2], [2.1, 0.4], [0.9, 1.7]];
        let m = AffineMap::from_points(p).unwrap();
        let f = |q: Point| 2.0 * q[0] - 3.0 * q[1];
        let e = ReferenceBasis::P1.eval([0.2, 0.2]);
        let mut g = [0.0; 2];
        for i in 0..3 {
            let gi = m.gradient(e.gradients[i]);
            g[0] += f(p[i]) * gi[0];
            g[1] += f(p[i]) * gi[1];
        }
        assert!((g[0] - 2.0).abs() < 1e-13 && (g[1] + 3.0).abs() < 1e-13);
    }

    #[test]
    fn inverted_element_is_rejected() {
        assert!(AffineMap::from_points([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
    }
}
