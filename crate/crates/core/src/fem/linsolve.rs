//! Sparse direct solves with a fixed sparsity pattern, backed by faer's LU.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::Mat;

use crate::error::{Error, Result};

/// Target relative residual `‖Ax − b‖ / ‖b‖` of a solve.
pub const LINEAR_REL_TOL: f64 = 1e-10;

/// Square matrix structure built once from a list of (possibly repeated)
/// entries; values are supplied in the same order on every solve and the
/// symbolic factorization is reused.
pub struct SparseSolver {
    n: usize,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: Option<SymbolicLu<usize>>,
}

impl SparseSolver {
    pub fn new(n: usize, pattern: &[(usize, usize)]) -> Result<Self> {
        let pairs: Vec<Pair<usize, usize>> = pattern
            .iter()
            .map(|&(row, col)| Pair { row, col })
            .collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::LinearSolver(format!("invalid sparsity pattern: {e:?}")))?;
        Ok(Self {
            n,
            symbolic,
            argsort,
            lu: None,
        })
    }

    pub fn matrix(&self, values: &[f64]) -> Result<SparseColMat<usize, f64>> {
        SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))
    }

    /// Solves `A x = b` for the matrix with the given entry values.
    pub fn solve(&mut self, values: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let a = self.matrix(values)?;
        if self.lu.is_none() {
            let sym = SymbolicLu::try_new(a.symbolic())
                .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
            self.lu = Some(sym);
        }
        let sym = self.lu.clone().expect("symbolic factorization present");
        let lu = Lu::try_new_with_symbolic(sym, a.as_ref())
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let mut rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        lu.solve_in_place(rhs.as_mut());
        let mut x: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)]).collect();

        let bn = norm(b);
        let mut rel = norm(&residual(&a, &x, b)) / bn.max(f64::MIN_POSITIVE);
        if rel > LINEAR_REL_TOL && rel.is_finite() {
            // one step of iterative refinement
            let r = residual(&a, &x, b);
            let mut c = Mat::from_fn(self.n, 1, |i, _| r[i]);
            lu.solve_in_place(c.as_mut());
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += c[(i, 0)];
            }
            rel = norm(&residual(&a, &x, b)) / bn.max(f64::MIN_POSITIVE);
        }
        if !(rel <= LINEAR_REL_TOL) && bn > 0.0 {
            return Err(Error::LinearSolver(format!(
                "relative residual {rel:.3e} after refinement"
            )));
        }
        Ok(x)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `b − A x`.
fn residual(a: &SparseColMat<usize, f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let a = a.as_ref();
    let col_ptr = a.symbolic().col_ptr();
    let row_idx = a.symbolic().row_idx();
    let val = a.val();
    let mut r = b.to_vec();
    for j in 0..x.len() {
        for k in col_ptr[j]..col_ptr[j + 1] {
            r[row_idx[k]] -= val[k] * x[j];
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system_with_duplicates() {
        // [[4, 1, 0], [2, 5, 1], [0, 1, 3]] with the (0,0) entry split in two
        let pattern = [
            (0, 0),
            (0, 1),
            (1, 0),
            (1, 1),
            (1, 2),
            (2, 1),
            (2, 2),
            (0, 0),
        ];
        let values = [3.0, 1.0, 2.0, 5.0, 1.0, 1.0, 3.0, 1.0];
        let mut s = SparseSolver::new(3, &pattern).unwrap();
        let x = s.solve(&values, &[5.0, 8.0, 4.0]).unwrap();
        for (xi, want) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - want).abs() < 1e-14);
        }
        // reuse of the symbolic factorization with new values
        let values2 = [1.0, 1.0, 2.0, 5.0, 1.0, 1.0, 3.0, 1.0];
        let x = s.solve(&values2, &[3.0, 8.0, 4.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut s = SparseSolver::new(2, &[(0, 0), (1, 0)]).unwrap();
        assert!(s.solve(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
