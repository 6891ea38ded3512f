//! Direct solver for the pressure-velocity saddle system.
//!
//! The system solved is
//!
//! ```text
//! [  A   -B^T  0 ] [u]   [f]
//! [ -B    0    m ] [p] = [0]
//! [  0    m^T  0 ] [l]   [0]
//! ```
//!
//! where `m` is the pressure mean functional, so `p` comes out with zero mean.
//! The symbolic LU analysis is cached and reused while the sparsity pattern
//! of the assembled matrix does not change, which is the case across time
//! steps because assembly keeps explicit zeros.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

use crate::sparse::{CsrMatrix, TripletList};
use crate::{Error, Result};

/// Relative residual `|K x - r| / |r|` every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_REFINEMENT: usize = 4;

#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub velocity: Vec<f64>,
    /// Zero-mean pressure.
    pub pressure: Vec<f64>,
    pub multiplier: f64,
    /// Final relative residual.
    pub residual: f64,
    /// Relative residual after the direct solve and each refinement sweep.
    pub residual_history: Vec<f64>,
}

struct Cached {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    symbolic: SymbolicLu<usize>,
}

pub struct SaddleSolver {
    cached: Option<Cached>,
    symbolic_analyses: usize,
    tol: f64,
}

impl Default for SaddleSolver {
    fn default() -> Self {
        SaddleSolver { cached: None, symbolic_analyses: 0, tol: RESIDUAL_TOL }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SaddleSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solver with a relative residual tolerance other than [`RESIDUAL_TOL`].
    pub fn with_tolerance(tol: f64) -> Self {
        SaddleSolver { tol, ..Self::default() }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Number of symbolic analyses performed so far.
    pub fn symbolic_analyses(&self) -> usize {
        self.symbolic_analyses
    }

    /// Builds `K^T` in CSR form, which is `K` in compressed-column form.
    fn system_transpose(a: &CsrMatrix, b: &CsrMatrix, mean: &[f64]) -> CsrMatrix {
        let (n, np) = (a.nrows(), b.nrows());
        let dim = n + np + 1;
        let mut t = TripletList::with_capacity(dim, dim, a.nnz() + 2 * b.nnz() + 2 * np);
        for (i, j, v) in a.triplets() {
            t.push(j, i, v);
        }
        for (q, j, v) in b.triplets() {
            // -B^T at (j, n + q) and -B at (n + q, j); stored transposed.
            t.push(n + q, j, -v);
            t.push(j, n + q, -v);
        }
        for (q, &mq) in mean.iter().enumerate() {
            t.push(n + np, n + q, mq);
            t.push(n + q, n + np, mq);
        }
        t.into_csr()
    }

    /// Solves the saddle system with velocity block `a` (n x n), divergence
    /// `b` (np x n), mean functional `mean` (np) and momentum load `f` (n).
    pub fn solve(&mut self, a: &CsrMatrix, b: &CsrMatrix, mean: &[f64], f: &[f64]) -> Result<SaddleSolution> {
        let (n, np) = (a.nrows(), b.nrows());
        assert_eq!(a.ncols(), n);
        assert_eq!(b.ncols(), n);
        assert_eq!(mean.len(), np);
        assert_eq!(f.len(), n);
        let dim = n + np + 1;
        let kt = Self::system_transpose(a, b, mean);

        let reuse = matches!(&self.cached, Some(c) if c.col_ptr == kt.row_ptr() && c.row_idx == kt.col_idx());
        if !reuse {
            let sym = SymbolicSparseColMatRef::new_checked(dim, dim, kt.row_ptr(), None, kt.col_idx());
            let symbolic = SymbolicLu::try_new(sym).map_err(|e| Error::Solver {
                msg: format!("symbolic analysis failed: {e:?}"),
                residuals: vec![],
            })?;
            self.symbolic_analyses += 1;
            self.cached = Some(Cached {
                col_ptr: kt.row_ptr().to_vec(),
                row_idx: kt.col_idx().to_vec(),
                symbolic,
            });
        }
        let cached = self.cached.as_ref().expect("cached symbolic");
        let sym = SymbolicSparseColMatRef::new_checked(dim, dim, &cached.col_ptr, None, &cached.row_idx);
        let mat = SparseColMatRef::new(sym, kt.values());
        let lu = Lu::try_new_with_symbolic(cached.symbolic.clone(), mat).map_err(|e| Error::Solver {
            msg: format!("numeric factorization failed: {e:?}"),
            residuals: vec![],
        })?;

        let mut rhs = vec![0.0; dim];
        rhs[..n].copy_from_slice(f);
        let rhs_norm = norm2(&rhs);
        let scale = if rhs_norm > 0.0 { rhs_norm } else { 1.0 };
        let residual_of = |x: &[f64]| -> Vec<f64> {
            let kx = kt.matvec_t(x);
            rhs.iter().zip(kx).map(|(r, k)| r - k).collect()
        };

        let mut x = rhs.clone();
        lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, dim, 1));
        let mut r = residual_of(&x);
        let mut history = vec![norm2(&r) / scale];
        for _ in 0..MAX_REFINEMENT {
            let last = *history.last().unwrap();
            if !last.is_finite() || last <= 1e-15 {
                break;
            }
            let mut dx = r.clone();
            lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut dx, dim, 1));
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let tr = residual_of(&trial);
            let res = norm2(&tr) / scale;
            if !(res < last) {
                break;
            }
            x = trial;
            r = tr;
            history.push(res);
        }
        let residual = *history.last().unwrap();
        if !(residual <= self.tol) {
            return Err(Error::Solver {
                msg: format!("relative residual {residual:.3e} above {:.0e}", self.tol),
                residuals: history,
            });
        }

        let mut pressure = x[n..n + np].to_vec();
        let volume: f64 = mean.iter().sum();
        if volume > 0.0 {
            let avg = mean.iter().zip(&pressure).map(|(m, p)| m * p).sum::<f64>() / volume;
            pressure.iter_mut().for_each(|p| *p -= avg);
        }
        Ok(SaddleSolution {
            velocity: x[..n].to_vec(),
            pressure,
            multiplier: x[n + np],
            residual,
            residual_history: history,
        })
    }
}

/// Sets the number of worker threads used inside the factorization.
/// `0` or `1` selects sequential execution.
/// Without the `parallel` feature every count runs sequentially.
pub fn set_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    let par = if threads <= 1 {
        faer::Par::Seq
    } else {
        faer::Par::rayon(threads)
    };
    #[cfg(not(feature = "parallel"))]
    let par = {
        let _ = threads;
        faer::Par::Seq
    };
    faer::set_global_parallelism(par);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_csr(rows: &[&[f64]]) -> CsrMatrix {
        let mut t = TripletList::new(rows.len(), rows[0].len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.into_csr()
    }

    #[test]
    fn small_saddle_system() {
        // Columns of B sum to zero, as for a divergence with zero trace.
        let a = dense_to_csr(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let b = dense_to_csr(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, -1.0]]);
        let mean = [1.0, 1.0, 1.0];
        let mut s = SaddleSolver::new();
        // B u = 0 forces u = 0, so B^T p = -f with zero mean gives p = (-1, 1, 0).
        let sol = s.solve(&a, &b, &mean, &[1.0, -1.0]).unwrap();
        assert!(sol.velocity.iter().all(|v| v.abs() < 1e-14));
        for (p, e) in sol.pressure.iter().zip([-1.0, 1.0, 0.0]) {
            assert!((p - e).abs() < 1e-14);
        }
        assert!(sol.multiplier.abs() < 1e-14);
        assert!(sol.residual <= RESIDUAL_TOL);
        s.solve(&a.scaled(2.0), &b, &mean, &[1.0, 0.0]).unwrap();
        assert_eq!(s.symbolic_analyses(), 1);
    }

    #[test]
    fn singular_system_reports_residuals() {
        let a = dense_to_csr(&[&[1.0, 0.0], &[0.0, 1.0]]);
        // Both pressure rows identical: the pressure block is rank deficient.
        let b = dense_to_csr(&[&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]]);
        let mut s = SaddleSolver::new();
        match s.solve(&a, &b, &[1.0, 1.0, 1.0], &[1.0, 1.0]) {
            Err(Error::Solver { .. }) => {}
            Ok(sol) => assert!(sol.pressure.iter().all(|p| p.is_finite())),
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
