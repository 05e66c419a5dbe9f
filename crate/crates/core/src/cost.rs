//! Energy-gap cost `J(Ω) = ∫_Ω |∇(u_N − u_R)|²` and its finite-difference
//! derivative with respect to the Fourier shape parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemOperators, SolverOptions};
use crate::geometry::{generate_mesh, AdmissibilityLimits, DomainSpec, Mesh, Resolution};
use crate::state::{solve_state, PhysicsParams, StateKind, StateSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// `J = (u_N − u_R)ᵀ K (u_N − u_R)`.
    pub j: f64,
    /// `|u_N|²_{H¹}`
    pub neumann_energy: f64,
    /// `|u_R|²_{H¹}`
    pub robin_energy: f64,
    /// `u_Nᵀ K u_R`
    pub cross_term: f64,
    /// `|J − (|u_N|² + |u_R|² − 2·cross)|` relative to `|u_N|² + |u_R|²`.
    pub reconstruction_error: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub params: PhysicsParams,
}

/// Energy gap between two state solutions on the same mesh.
pub fn energy_gap(mesh: &Mesh, ops: &FemOperators, un: &StateSolution, ur: &StateSolution) -> Result<CostReport> {
    un.u.check_len(mesh)?;
    ur.u.check_len(mesh)?;
    if ops.dim() != mesh.node_count() {
        return Err(Error::LengthMismatch { expected: mesh.node_count(), got: ops.dim() });
    }
    let k = &ops.stiffness;
    let diff: Vec<f64> = un.u.iter().zip(ur.u.iter()).map(|(a, b)| a - b).collect();
    let j = k.quadratic_form(&diff).max(0.0);
    let neumann_energy = k.quadratic_form(&un.u);
    let robin_energy = k.quadratic_form(&ur.u);
    let cross_term = k.bilinear(&un.u, &ur.u);
    let scale = (neumann_energy + robin_energy).max(f64::MIN_POSITIVE);
    let reconstruction_error = (j - (neumann_energy + robin_energy - 2.0 * cross_term)).abs() / scale;
    Ok(CostReport {
        j,
        neumann_energy,
        robin_energy,
        cross_term,
        reconstruction_error,
        n_r: mesh.n_r,
        n_theta: mesh.n_theta,
        params: un.params,
    })
}

/// Meshes the domain, solves both states and evaluates `J`.
pub fn evaluate_cost(spec: &DomainSpec, p: &PhysicsParams, res: Resolution, opts: SolverOptions) -> Result<CostReport> {
    let mesh = generate_mesh(spec, res)?;
    let ops = FemOperators::new(&mesh)?;
    let un = solve_state(&ops, &mesh, p, StateKind::Neumann, opts)?;
    let ur = solve_state(&ops, &mesh, p, StateKind::Robin, opts)?;
    energy_gap(&mesh, &ops, &un, &ur)
}

/// Central differences of `J` in every shape parameter
/// `[c₀, cos₁, sin₁, …]`, re-meshing each perturbed domain at the same
/// resolution.
pub fn shape_gradient_fd(
    spec: &DomainSpec,
    p: &PhysicsParams,
    limits: &AdmissibilityLimits,
    res: Resolution,
    h_fd: f64,
    opts: SolverOptions,
) -> Result<Vec<f64>> {
    if !(h_fd > 0.0 && h_fd.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h_fd}")));
    }
    let base = spec.shape_params();
    let mut perturbed = Vec::with_capacity(2 * base.len());
    for i in 0..base.len() {
        for step in [h_fd, -h_fd] {
            let mut q = base.clone();
            q[i] += step;
            let s = spec.with_shape_params(&q)?;
            if !s.validate_admissible(limits).is_empty() {
                return Err(Error::PerturbationInadmissible { coefficient: i, step });
            }
            perturbed.push(s);
        }
    }
    let values = perturbed.par_iter().map(|s| evaluate_cost(s, p, res, opts).map(|r| r.j)).collect::<Result<Vec<f64>>>()?;
    Ok(values.chunks(2).map(|pm| (pm[0] - pm[1]) / (2.0 * h_fd)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_mesh;
    use crate::state::{bernoulli_radius, radial_oracle_neumann, radial_oracle_robin, FluxSign};
    use std::f64::consts::{E, PI};

    fn params() -> PhysicsParams {
        PhysicsParams::new(1.0 / E, 1.0, FluxSign::Negative).unwrap()
    }

    fn tight() -> SolverOptions {
        SolverOptions::with_tol(1e-12)
    }

    fn solve_pair(mesh: &Mesh, p: &PhysicsParams) -> (FemOperators, StateSolution, StateSolution) {
        let ops = FemOperators::new(mesh).unwrap();
        let un = solve_state(&ops, mesh, p, StateKind::Neumann, tight()).unwrap();
        let ur = solve_state(&ops, mesh, p, StateKind::Robin, tight()).unwrap();
        (ops, un, ur)
    }

    #[test]
    fn identical_states_have_zero_gap() {
        let mesh = generate_mesh(&DomainSpec::concentric(1.0, 2.0, 5.0).unwrap(), Resolution::new(4, 32)).unwrap();
        let (ops, un, _) = solve_pair(&mesh, &params());
        let r = energy_gap(&mesh, &ops, &un, &un).unwrap();
        assert_eq!(r.j, 0.0);
        assert!(r.reconstruction_error < 1e-10);
    }

    #[test]
    fn baseline_gap_converges_to_closed_form() {
        let p = params();
        let cn = radial_oracle_neumann(1.0, 2.0, p.datum()).unwrap().coefficient;
        let cr = radial_oracle_robin(1.0, 2.0, p.datum(), p.beta).unwrap().coefficient;
        assert!((cn + 2.0 / E).abs() < 1e-15);
        // closed form 2π ln2 (c_N − c_R)², mpmath: 0.734562247304327455
        let exact = 2.0 * PI * 2f64.ln() * (cn - cr).powi(2);
        assert!((exact - 0.734_562_247_304_327_5).abs() < 1e-14);
        let err = |n: usize| {
            let mesh = generate_mesh(&DomainSpec::concentric(1.0, 2.0, 5.0).unwrap(), Resolution::new(n / 2, n)).unwrap();
            let (ops, un, ur) = solve_pair(&mesh, &p);
            let r = energy_gap(&mesh, &ops, &un, &ur).unwrap();
            assert!(r.reconstruction_error < 1e-10);
            (r.j - exact).abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 5e-3 * exact, "{e1} {e2}");
        assert!(e1 / e2 > 3.0);
    }

    #[test]
    fn gap_is_invariant_under_common_constant() {
        let mesh = generate_mesh(&DomainSpec::concentric(1.0, 2.0, 5.0).unwrap(), Resolution::new(4, 32)).unwrap();
        let (ops, un, ur) = solve_pair(&mesh, &params());
        let j0 = energy_gap(&mesh, &ops, &un, &ur).unwrap().j;
        let shift = |s: &StateSolution| {
            let mut s = s.clone();
            s.u = s.u.iter().map(|v| v + 3.25).collect::<Vec<_>>().into();
            s
        };
        let j1 = energy_gap(&mesh, &ops, &shift(&un), &shift(&ur)).unwrap().j;
        assert!((j0 - j1).abs() <= 1e-12 * j0);
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let spec = DomainSpec::concentric(1.0, 2.0, 5.0).unwrap();
        let m1 = generate_mesh(&spec, Resolution::new(4, 32)).unwrap();
        let m2 = generate_mesh(&spec, Resolution::new(2, 32)).unwrap();
        let (ops, un, ur) = solve_pair(&m1, &params());
        assert!(matches!(energy_gap(&m2, &ops, &un, &ur), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn radial_scan_minimum_is_at_bernoulli_radius() {
        let p = params();
        let r_star = bernoulli_radius(1.0, p.lambda).unwrap();
        let radii: Vec<f64> = (0..=25).map(|i| 1.5 + 0.1 * i as f64).collect();
        let js: Vec<f64> = radii
            .iter()
            .map(|&r| {
                let s = DomainSpec::concentric(1.0, r, 5.0).unwrap();
                evaluate_cost(&s, &p, Resolution::new(16, 64), tight()).unwrap().j
            })
            .collect();
        let argmin = (0..js.len()).min_by(|&a, &b| js[a].total_cmp(&js[b])).unwrap();
        assert!((radii[argmin] - r_star).abs() <= 0.1, "argmin {}", radii[argmin]);
        // unimodal: decreasing then increasing
        assert!(js[..=argmin].windows(2).all(|w| w[1] < w[0]));
        assert!(js[argmin..].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gradient_vanishes_at_concentric_optimum() {
        let p = params();
        let lim = AdmissibilityLimits::default();
        let res = Resolution::new(16, 64);
        let grad_c0 = |c0: f64| {
            let s = DomainSpec::new(1.0, vec![(c0, 0.0), (0.0, 0.0), (0.0, 0.0)], 5.0).unwrap();
            shape_gradient_fd(&s, &p, &lim, res, 1e-3, tight()).unwrap()
        };
        let at_opt = grad_c0(E);
        let reference = grad_c0(E + 0.3)[0].abs().min(grad_c0(E - 0.3)[0].abs());
        assert!(at_opt[0].abs() <= 0.05 * reference, "{} vs {}", at_opt[0], reference);
        // harmonics vanish by rotational symmetry
        for g in &at_opt[1..] {
            assert!(g.abs() < 1e-5, "{g}");
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        let p = params();
        let spec = DomainSpec::new(1.0, vec![(2.2, 0.0), (0.1, 0.05)], 5.0).unwrap();
        let lim = AdmissibilityLimits::default();
        let res = Resolution::new(8, 32);
        let opts = SolverOptions::with_tol(1e-13);
        let g = |h| shape_gradient_fd(&spec, &p, &lim, res, h, opts).unwrap();
        let (g1, g2, g3) = (g(0.16), g(0.08), g(0.04));
        for i in 0..g1.len() {
            let ratio = (g1[i] - g2[i]) / (g2[i] - g3[i]);
            assert!((3.0..5.0).contains(&ratio), "component {i}: ratio {ratio}");
        }
    }

    #[test]
    fn inadmissible_perturbation_reports_coefficient() {
        let spec = DomainSpec::concentric(1.0, 1.1005, 5.0).unwrap();
        let err = shape_gradient_fd(&spec, &params(), &AdmissibilityLimits::default(), Resolution::new(2, 16), 1e-3, tight())
            .unwrap_err();
        assert_eq!(err, Error::PerturbationInadmissible { coefficient: 0, step: -1e-3 });
    }
}
