//! Linear solvers for the assembled block systems.
//!
//! The default is a sparse LU factorization with partial pivoting (faer),
//! factored once per matrix and reused for every right-hand side. A
//! Jacobi-preconditioned restarted GMRES is available for experiments; it
//! reports its residual history when it fails to converge.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    Direct,
    Iterative { tol: f64, max_iter: usize, restart: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::Direct
    }
}

/// Backward-error bound accepted from the direct solver.
const DIRECT_BACKWARD_TOL: f64 = 1e-8;

const REFINEMENT_STEPS: usize = 3;

enum Inner {
    Lu(Lu<usize, f64>),
    Gmres {
        inv_diag: Vec<f64>,
        tol: f64,
        max_iter: usize,
        restart: usize,
    },
}

pub struct Factorization {
    matrix: SparseOperator,
    inner: Inner,
    norm_inf: f64,
}

impl core::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Factorization")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish_non_exhaustive()
    }
}

fn inf_norm(a: &SparseOperator) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl Factorization {
    pub fn new(a: &SparseOperator, solver: LinearSolver) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::invalid("linear system matrix must be square"));
        }
        let inner = match solver {
            LinearSolver::Direct => {
                let triplets: Vec<Triplet<usize, usize, f64>> =
                    a.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
                let csc = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows(), a.ncols(), &triplets)
                    .map_err(|e| Error::invalid(format!("sparse conversion failed: {e:?}")))?;
                let symbolic = SymbolicLu::try_new(csc.symbolic())
                    .map_err(|e| Error::SingularSystem(format!("symbolic LU failed: {e:?}")))?;
                let lu = Lu::try_new_with_symbolic(symbolic, csc.as_ref())
                    .map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;
                Inner::Lu(lu)
            }
            LinearSolver::Iterative { tol, max_iter, restart } => {
                let inv_diag = a
                    .diagonal()
                    .iter()
                    .map(|&d| if d.abs() > 1e-300 { 1.0 / d } else { 1.0 })
                    .collect();
                Inner::Gmres {
                    inv_diag,
                    tol,
                    max_iter,
                    restart: restart.max(1),
                }
            }
        };
        Ok(Factorization {
            matrix: a.clone(),
            inner,
            norm_inf: inf_norm(a),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.dim());
        match &self.inner {
            Inner::Lu(lu) => {
                let lu_solve = |r: &[f64]| -> Vec<f64> {
                    let mut m = Mat::<f64>::from_fn(r.len(), 1, |i, _| r[i]);
                    lu.solve_in_place(m.as_mut());
                    (0..r.len()).map(|i| m[(i, 0)]).collect()
                };
                let mut x = lu_solve(b);
                // iterative refinement; pivoting on nearly incompressible
                // blocks loses a few digits
                let residual = |x: &[f64]| -> Vec<f64> {
                    let ax = self.matrix.mul_vec(x);
                    b.iter().zip(&ax).map(|(p, q)| p - q).collect()
                };
                let mut r = residual(&x);
                let mut rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for _ in 0..REFINEMENT_STEPS {
                    if !(rn > 0.0) {
                        break;
                    }
                    let dx = lu_solve(&r);
                    let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
                    let tr = residual(&trial);
                    let tn = tr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if !(tn < rn) {
                        break;
                    }
                    (x, r, rn) = (trial, tr, tn);
                }
                self.check_direct(b, &x)?;
                Ok(x)
            }
            Inner::Gmres {
                inv_diag,
                tol,
                max_iter,
                restart,
            } => gmres(&self.matrix, inv_diag, b, *tol, *max_iter, *restart),
        }
    }

    fn check_direct(&self, b: &[f64], x: &[f64]) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(
                "direct solve produced non-finite values (zero pivot)".into(),
            ));
        }
        let ax = self.matrix.mul_vec(x);
        let r = ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = self.norm_inf * xn + bn;
        if scale > 0.0 && r > DIRECT_BACKWARD_TOL * scale {
            return Err(Error::SingularSystem(format!(
                "direct solve backward error {:e} exceeds {:e}",
                r / scale,
                DIRECT_BACKWARD_TOL
            )));
        }
        Ok(())
    }
}

/// Right-preconditioned restarted GMRES with a Jacobi preconditioner.
fn gmres(
    a: &SparseOperator,
    inv_diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut history = Vec::new();
    let mut iters = 0;
    loop {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta <= tol * bnorm {
            return Ok(x);
        }
        if iters >= max_iter {
            return Err(Error::SolverDiverged { residuals: history });
        }
        let m = restart;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z: Vec<f64> = v[k].iter().zip(inv_diag).map(|(vi, d)| vi * d).collect();
            let mut w = a.mul_vec(&z);
            for (j, vj) in v.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                for (wi, vji) in w.iter_mut().zip(vj) {
                    *wi -= h[j][k] * vji;
                }
            }
            h[k + 1][k] = norm2(&w);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            iters += 1;
            let res = g[k + 1].abs() / bnorm;
            history.push(res);
            if res <= tol || iters >= max_iter || h[k + 1][k] == 0.0 {
                break;
            }
            let hn = h[k + 1][k];
            v.push(w.iter().map(|wi| wi / hn).collect());
            if !res.is_finite() {
                return Err(Error::SolverDiverged { residuals: history });
            }
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, (vji, d)) in x.iter_mut().zip(v[j].iter().zip(inv_diag)) {
                *xi += yj * vji * d;
            }
        }
        if k_used == 0 {
            return Err(Error::SolverDiverged { residuals: history });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn laplace_1d(n: usize) -> SparseOperator {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn direct_solves_indefinite_saddle() {
        // [[1, 1], [1, 0]] needs pivoting
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1e-14);
        b.push(0, 1, 1.0);
        b.push(1, 0, 1.0);
        let a = b.build();
        let f = Factorization::new(&a, LinearSolver::Direct).unwrap();
        let x = f.solve(&[1.0, 2.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_reports_singular() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 1, 1.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, 1.0);
        let a = b.build();
        let r = Factorization::new(&a, LinearSolver::Direct).and_then(|f| f.solve(&[1.0, 0.0]));
        assert!(matches!(r, Err(Error::SingularSystem(_))));
    }

    #[test]
    fn gmres_matches_direct_on_spd() {
        let a = laplace_1d(30);
        let rhs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let xd = Factorization::new(&a, LinearSolver::Direct).unwrap().solve(&rhs).unwrap();
        let it = LinearSolver::Iterative { tol: 1e-12, max_iter: 500, restart: 40 };
        let xi = Factorization::new(&a, it).unwrap().solve(&rhs).unwrap();
        for (p, q) in xd.iter().zip(&xi) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn gmres_reports_history_on_failure() {
        let a = laplace_1d(200);
        let rhs = vec![1.0; 200];
        let it = LinearSolver::Iterative { tol: 1e-14, max_iter: 5, restart: 5 };
        match Factorization::new(&a, it).unwrap().solve(&rhs) {
            Err(Error::SolverDiverged { residuals }) => {
                assert_eq!(residuals.len(), 5);
                assert!(residuals.iter().all(|r| *r > 1e-14));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
