use serde::{Deserialize, Serialize};

use super::sparse::{dot, norm, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative residual target `‖Ax − b‖ / ‖b‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 · n`.
    pub max_iters: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: None }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, max_iters: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of the returned iterate.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn solve_spd<A: LinearOperator + ?Sized>(a: &A, b: &[f64], opts: SolverOptions) -> Result<CgSolution> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let diag = a.diagonal();
    if let Some(&d) = diag.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite { iteration: 0, curvature: d });
    }
    let inv_diag: Vec<f64> = diag.into_iter().map(|d| 1.0 / d).collect();
    let max_iters = opts.max_iters.unwrap_or(10 * n.max(1));

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 0..max_iters {
        a.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature == 0.0 {
            // search direction underflowed: stagnation, not indefiniteness
            return Err(Error::NotConverged { iterations: it, residual: true_residual(a, &x, b) / b_norm });
        }
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= opts.tol * b_norm {
            let relative_residual = true_residual(a, &x, b) / b_norm;
            // Recursive and true residuals can drift apart; keep iterating if so.
            if relative_residual <= opts.tol {
                return Ok(CgSolution { x, iterations: it + 1, relative_residual });
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged { iterations: max_iters, residual: true_residual(a, &x, b) / b_norm })
}

fn true_residual<A: LinearOperator + ?Sized>(a: &A, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; b.len()];
    a.apply(x, &mut ax);
    ax.iter().zip(b).map(|(ax, b)| (b - ax).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::CsrMatrix;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = [0.3, -1.0, 2.5, 7.0];
        let s = solve_spd(&CsrMatrix::identity(4), &b, SolverOptions::default()).unwrap();
        assert_eq!(s.x, b.to_vec());
    }

    #[test]
    fn diagonal_system() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 4.0]);
        let s = solve_spd(&a, &[1.0, 2.0, 4.0], SolverOptions::default()).unwrap();
        for x in s.x {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let s = solve_spd(&CsrMatrix::identity(3), &[0.0; 3], SolverOptions::default()).unwrap();
        assert_eq!(s.x, vec![0.0; 3]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn random_spd_matches_dense_cholesky() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let dense = &g * g.transpose() + DMatrix::identity(n, n) * (n as f64) * 0.1;
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let trip = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, dense[(i, j)])).collect();
        let a = CsrMatrix::from_triplets(n, trip);
        let s = solve_spd(&a, &b, SolverOptions::with_tol(1e-13)).unwrap();
        let oracle = dense.cholesky().unwrap().solve(&DVector::from_vec(b));
        for i in 0..n {
            assert!((s.x[i] - oracle[i]).abs() < 1e-8, "{i}: {} vs {}", s.x[i], oracle[i]);
        }
        assert!(s.relative_residual <= 1e-13);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let err = solve_spd(&a, &[1.0, 1.0], SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)],
        );
        let opts = SolverOptions { tol: 1e-14, max_iters: Some(1) };
        assert!(matches!(solve_spd(&a, &[1.0, 0.0, 0.0], opts), Err(Error::NotConverged { .. })));
    }
}
