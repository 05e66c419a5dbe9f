//! Discrete Poincaré–Friedrichs and trace constants as extreme generalized
//! eigenvalues, with random-field certification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{dot, solve_spd, CsrMatrix, FemOperators, LinearOperator, RankOneUpdate, SolverOptions};
use crate::geometry::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Relative change of the Rayleigh quotient that ends the iteration.
    pub tol: f64,
    pub max_iters: usize,
    /// Tolerance of the inner conjugate-gradient solves.
    pub inner_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 20_000, inner_tol: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Largest `μ` of `A x = μ B x` with `A` symmetric positive semi-definite
/// and `B` symmetric positive definite, by power iteration on `B⁻¹A`.
pub(crate) fn largest_generalized_eigenpair<A, B>(a: &A, b: &B, x0: Vec<f64>, opts: EigenOptions) -> Result<EigenPair>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let n = a.dim();
    let inner = SolverOptions { tol: opts.inner_tol, max_iters: Some(20 * n.max(1)) };
    let mut x = x0;
    let mut ax = vec![0.0; n];
    let mut bx = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut change = f64::INFINITY;
    for it in 0..opts.max_iters {
        a.apply(&x, &mut ax);
        let z = solve_spd(b, &ax, inner)?.x;
        b.apply(&z, &mut bx);
        let scale = dot(&z, &bx).sqrt();
        if !(scale > 0.0) {
            return Err(Error::EigenStagnation { iterations: it, change: f64::NAN });
        }
        x = z.into_iter().map(|v| v / scale).collect();
        a.apply(&x, &mut ax);
        let mu = dot(&x, &ax);
        change = ((mu - prev) / mu).abs();
        if change <= opts.tol {
            return Ok(EigenPair { value: mu, vector: x, iterations: it + 1 });
        }
        prev = mu;
    }
    Err(Error::EigenStagnation { iterations: opts.max_iters, change })
}

/// Deterministic start vector with smooth and rough components.
fn start_vector(mesh: &Mesh, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mesh.nodes.iter().map(|&[x, y]| 1.0 + x + 0.7 * y + 0.3 * x * y + 0.05 * rng.gen_range(-1.0..1.0)).collect()
}

/// Random fields for certifying an inequality: rough nodal noise, smooth
/// low-order fields, constants, and perturbations of a given extremal field.
fn certification_fields(mesh: &Mesh, extremal: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.node_count();
    (0..count)
        .map(|s| match s % 4 {
            0 => (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            1 => {
                let c: Vec<f64> = (0..14).map(|_| rng.gen_range(-1.0..1.0)).collect();
                mesh.nodes
                    .iter()
                    .map(|&[x, y]| {
                        let (r, t) = (x.hypot(y), y.atan2(x));
                        let mut v = c[0];
                        for k in 1..=3 {
                            let kt = k as f64 * t;
                            let base = 4 * (k - 1) + 1;
                            v += (c[base] + c[base + 1] * r) * kt.cos() + (c[base + 2] + c[base + 3] * r) * kt.sin();
                        }
                        v + c[13] * r
                    })
                    .collect()
            }
            2 => vec![rng.gen_range(-10.0..10.0); n],
            _ => {
                let eps = 10f64.powf(rng.gen_range(-6.0..-1.0));
                extremal.iter().map(|v| v + eps * rng.gen_range(-1.0..1.0)).collect()
            }
        })
        .collect()
}

pub(crate) fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

/// `‖v‖_{H¹} ≤ C_pf (|∫_Σ v| + |v|_{H¹})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfEstimate {
    pub c_pf: f64,
    /// Largest eigenvalue of `(K + M)x = μ(bbᵀ + K)x`; `C_pf = √μ`.
    pub mu_max: f64,
    /// `√|Ω| / m(Σ)`, the ratio attained by constants.
    pub constant_lower_bound: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub iterations: usize,
    pub certification_samples: usize,
    /// Smallest relative slack over the certification samples.
    pub min_relative_slack: f64,
}

pub fn pf_ratio(ops: &FemOperators, v: &[f64]) -> f64 {
    ops.h1_norm(v) / (ops.trace_integral(v).abs() + ops.h1_seminorm(v))
}

pub fn estimate_pf_constant(
    mesh: &Mesh,
    ops: &FemOperators,
    samples: usize,
    seed: u64,
    opts: EigenOptions,
) -> Result<PfEstimate> {
    let sigma = ops.sigma_measure();
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput("Poincaré–Friedrichs constant needs m(Σ) > 0".into()));
    }
    let a = ops.stiffness.add_scaled(&ops.mass, 1.0);
    let b = RankOneUpdate { base: &ops.stiffness, vector: &ops.sigma_weights };
    let pair = largest_generalized_eigenpair(&a, &b, start_vector(mesh, seed), opts)?;
    let c_pf = pair.value.sqrt();
    let min_relative_slack = certification_fields(mesh, &pair.vector, samples, seed ^ 0x5eed)
        .iter()
        .map(|v| {
            let lhs = ops.h1_norm(v);
            let rhs = c_pf * (ops.trace_integral(v).abs() + ops.h1_seminorm(v));
            relative_slack(lhs, rhs)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(PfEstimate {
        c_pf,
        mu_max: pair.value,
        constant_lower_bound: ops.area().sqrt() / sigma,
        n_r: mesh.n_r,
        n_theta: mesh.n_theta,
        iterations: pair.iterations,
        certification_samples: samples,
        min_relative_slack,
    })
}

/// `‖v‖_{L²(Σ)} ≤ C_tr ‖v‖_{H¹}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub c_tr: f64,
    /// Largest eigenvalue of `M_Σ x = ν (K + M) x`; `C_tr = √ν`.
    pub nu_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub iterations: usize,
    pub certification_samples: usize,
    pub min_relative_slack: f64,
}

pub fn estimate_trace_constant(
    mesh: &Mesh,
    ops: &FemOperators,
    samples: usize,
    seed: u64,
    opts: EigenOptions,
) -> Result<TraceEstimate> {
    let b: CsrMatrix = ops.stiffness.add_scaled(&ops.mass, 1.0);
    let pair = largest_generalized_eigenpair(&ops.boundary_mass, &b, start_vector(mesh, seed), opts)?;
    let c_tr = pair.value.sqrt();
    if !(c_tr > 0.0 && c_tr.is_finite()) {
        return Err(Error::EigenStagnation { iterations: pair.iterations, change: f64::NAN });
    }
    let min_relative_slack = certification_fields(mesh, &pair.vector, samples, seed ^ 0x7ace)
        .iter()
        .map(|v| relative_slack(ops.boundary_l2(v), c_tr * ops.h1_norm(v)))
        .fold(f64::INFINITY, f64::min);
    Ok(TraceEstimate {
        c_tr,
        nu_max: pair.value,
        n_r: mesh.n_r,
        n_theta: mesh.n_theta,
        iterations: pair.iterations,
        certification_samples: samples,
        min_relative_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, DomainSpec, Resolution};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn dense(m: &CsrMatrix) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(m.n(), m.n());
        for (i, j, v) in m.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Dense oracle: Cholesky of B, then the symmetric eigenproblem of L⁻¹AL⁻ᵀ.
    fn dense_max_eig(a: DMatrix<f64>, b: DMatrix<f64>) -> f64 {
        let l = b.cholesky().unwrap().l();
        let li = l.try_inverse().unwrap();
        let c = &li * a * li.transpose();
        let c = (&c + c.transpose()) * 0.5;
        c.symmetric_eigen().eigenvalues.max()
    }

    fn small_mesh() -> (Mesh, FemOperators) {
        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.1, 0.05), (0.0, 0.1)], 5.0).unwrap();
        let m = generate_mesh(&s, Resolution::new(3, 12)).unwrap();
        let ops = FemOperators::new(&m).unwrap();
        (m, ops)
    }

    #[test]
    fn pf_matches_dense_generalized_eigensolver() {
        let (m, ops) = small_mesh();
        let est = estimate_pf_constant(&m, &ops, 200, 1, EigenOptions::default()).unwrap();
        let a = dense(&ops.stiffness) + dense(&ops.mass);
        let bv = nalgebra::DVector::from_column_slice(&ops.sigma_weights);
        let b = dense(&ops.stiffness) + &bv * bv.transpose();
        let oracle = dense_max_eig(a, b);
        assert!((est.mu_max - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", est.mu_max);
        assert!(est.min_relative_slack >= -1e-9);
    }

    #[test]
    fn trace_matches_dense_generalized_eigensolver() {
        let (m, ops) = small_mesh();
        let est = estimate_trace_constant(&m, &ops, 200, 1, EigenOptions::default()).unwrap();
        let oracle = dense_max_eig(dense(&ops.boundary_mass), dense(&ops.stiffness) + dense(&ops.mass));
        assert!((est.nu_max - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", est.nu_max);
        assert!(est.c_tr > 0.0 && est.c_tr.is_finite());
        assert!(est.min_relative_slack >= -1e-9);
    }

    #[test]
    fn pf_constant_lower_bound_and_scale_invariance() {
        let s = DomainSpec::concentric(1.0, 2.0, 5.0).unwrap();
        let m = generate_mesh(&s, Resolution::new(8, 64)).unwrap();
        let ops = FemOperators::new(&m).unwrap();
        let est = estimate_pf_constant(&m, &ops, 1000, 42, EigenOptions::default()).unwrap();
        // √(3π)/(4π) on the exact annulus
        assert!(est.c_pf >= (3.0 * PI).sqrt() / (4.0 * PI));
        assert!(est.c_pf >= est.constant_lower_bound);
        assert!(est.min_relative_slack >= -1e-9);
        let v: Vec<f64> = m.nodes.iter().map(|&[x, y]| x * x - y + 0.3).collect();
        let v10: Vec<f64> = v.iter().map(|x| 10.0 * x).collect();
        let (r1, r10) = (pf_ratio(&ops, &v), pf_ratio(&ops, &v10));
        assert!((r1 - r10).abs() <= 1e-14 * r1);
    }
}
