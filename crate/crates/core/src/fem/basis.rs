//! Lagrange bases on the reference triangle with vertices (0,0), (1,0), (0,1).
//!
//! Barycentric coordinates are `l0 = 1 - x - y`, `l1 = x`, `l2 = y`. Quadratic
//! nodes are the three vertices followed by the midpoints of the local edges
//! `(0,1)`, `(1,2)`, `(2,0)`.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceBasis {
    P1,
    P2,
}

/// Values and reference gradients at one point. Only the first
/// `node_count()` entries are meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub values: [f64; 6],
    pub gradients: [[f64; 2]; 6],
}

pub const P2_NODES: [[f64; 2]; 6] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [0.5, 0.0],
    [0.5, 0.5],
    [0.0, 0.5],
];

const BARY_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

impl ReferenceBasis {
    pub fn degree(self) -> usize {
        match self {
            ReferenceBasis::P1 => 1,
            ReferenceBasis::P2 => 2,
        }
    }

    pub fn node_count(self) -> usize {
        match self {
            ReferenceBasis::P1 => 3,
            ReferenceBasis::P2 => 6,
        }
    }

    pub fn nodes(self) -> &'static [[f64; 2]] {
        &P2_NODES[..self.node_count()]
    }

    pub fn eval(self, point: [f64; 2]) -> BasisEval {
        let l = [1.0 - point[0] - point[1], point[0], point[1]];
        let mut values = [0.0; 6];
        let mut gradients = [[0.0; 2]; 6];
        match self {
            ReferenceBasis::P1 => {
                values[..3].copy_from_slice(&l);
                gradients[..3].copy_from_slice(&BARY_GRAD);
            }
            ReferenceBasis::P2 => {
                for i in 0..3 {
                    values[i] = l[i] * (2.0 * l[i] - 1.0);
                    let s = 4.0 * l[i] - 1.0;
                    gradients[i] = [s * BARY_GRAD[i][0], s * BARY_GRAD[i][1]];
                }
                for (j, &(a, b)) in EDGES.iter().enumerate() {
                    values[3 + j] = 4.0 * l[a] * l[b];
                    gradients[3 + j] = [
                        4.0 * (l[a] * BARY_GRAD[b][0] + l[b] * BARY_GRAD[a][0]),
                        4.0 * (l[a] * BARY_GRAD[b][1] + l[b] * BARY_GRAD[a][1]),
                    ];
                }
            }
        }
        BasisEval { values, gradients }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_at_nodes() {
        for basis in [ReferenceBasis::P1, ReferenceBasis::P2] {
            for (i, &node) in basis.nodes().iter().enumerate() {
                let e = basis.eval(node);
                for j in 0..basis.node_count() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((e.values[j] - expect).abs() < 1e-15, "{basis:?} node {i} fn {j}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        for basis in [ReferenceBasis::P1, ReferenceBasis::P2] {
            for p in [[1.0 / 3.0, 1.0 / 3.0], [0.1, 0.7], [0.25, 0.05]] {
                let e = basis.eval(p);
                let n = basis.node_count();
                let s: f64 = e.values[..n].iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                let gx: f64 = e.gradients[..n].iter().map(|g| g[0]).sum();
                let gy: f64 = e.gradients[..n].iter().map(|g| g[1]).sum();
                assert!(gx.abs() < 1e-14 && gy.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for basis in [ReferenceBasis::P1, ReferenceBasis::P2] {
            let p = [0.21, 0.37];
            let e = basis.eval(p);
            let ex = (basis.eval([p[0] + h, p[1]]), basis.eval([p[0] - h, p[1]]));
            let ey = (basis.eval([p[0], p[1] + h]), basis.eval([p[0], p[1] - h]));
            for i in 0..basis.node_count() {
                let dx = (ex.0.values[i] - ex.1.values[i]) / (2.0 * h);
                let dy = (ey.0.values[i] - ey.1.values[i]) / (2.0 * h);
                assert!((dx - e.gradients[i][0]).abs() < 1e-8);
                assert!((dy - e.gradients[i][1]).abs() < 1e-8);
            }
        }
    }
}
