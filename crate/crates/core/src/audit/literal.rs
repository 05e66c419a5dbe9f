//! The boundedness estimate as originally written: the energy identity with
//! `φ = u_R` substituted, the two boundary estimates, and the boxed bound
//! that drops the quadratic term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{boundary_abs_integral, dot, FemOperators};
use crate::geometry::Mesh;
use crate::state::{FluxSign, PhysicsParams, StateSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralAudit {
    pub flux_sign: FluxSign,
    /// `∫|∇u_R|²`
    pub energy_lhs: f64,
    /// `−∫∇u_{R₀}·∇u_R`, zero because `u_{R₀} ≡ 1`.
    pub lifting_term: f64,
    /// `−β‖u_R‖²_{L²(Σ)}`
    pub robin_term: f64,
    /// `∫_Σ g u_R` with the signed datum `g`.
    pub datum_term: f64,
    pub energy_rhs: f64,
    /// `lhs − rhs` of the substituted identity.
    pub identity_residual: f64,
    /// `∫_Γ ∂ₙu_R` (normal out of Ω) as the Γ rows of `K u_R`.
    pub gamma_flux_reaction: f64,
    /// `∫_Γ ∂ₙu_R` as `a(u_R, ψ)` with `ψ` the radial ramp, 1 on Γ and 0 on Σ.
    pub gamma_flux_ramp: f64,
    pub sigma_measure: f64,
    pub holdall_area: f64,
    pub trace_l2: f64,
    /// `β‖u_R‖²_{L²(Σ)}`
    pub quadratic_term: f64,
    /// `λ∫_Σ|u_R|`
    pub linear_term: f64,
    /// `λ m(Σ)^{1/2} ‖u_R‖_{L²(Σ)}`
    pub linear_cauchy_schwarz: f64,
    /// `λ |U|^{1/2} ‖u_R‖_{L²(Σ)}`
    pub linear_holdall: f64,
    /// Whether `m(Σ) ≤ |U|`, the step used to pass to the hold-all bound.
    pub sigma_below_holdall: bool,
    /// `max{β, λ|U|^{1/2}} ‖u_R‖_{L²(Σ)}`
    pub boxed_bound: f64,
    /// `quadratic_term + linear_holdall`
    pub true_sum: f64,
    pub boxed_dominates: bool,
}

/// Ramp `1 − j/n_r` on the structured grid.
fn radial_ramp(mesh: &Mesh) -> Result<Vec<f64>> {
    if mesh.n_r == 0 || mesh.node_count() != mesh.n_theta * (mesh.n_r + 1) {
        return Err(Error::InvalidInput("ramp flux needs a structured annular mesh".into()));
    }
    let n_r = mesh.n_r;
    Ok((0..mesh.node_count()).map(|i| 1.0 - (i % (n_r + 1)) as f64 / n_r as f64).collect())
}

pub fn audit_literal_paper(mesh: &Mesh, ops: &FemOperators, robin: &StateSolution, holdall_area: f64) -> Result<LiteralAudit> {
    robin.u.check_len(mesh)?;
    let p: &PhysicsParams = &robin.params;
    let u = &robin.u;
    let k = &ops.stiffness;
    let energy_lhs = k.quadratic_form(u);
    let lifting_term = -k.bilinear(&vec![1.0; u.len()], u);
    let trace_sq = ops.boundary_mass.quadratic_form(u);
    let robin_term = -p.beta * trace_sq;
    let datum_term = p.datum() * ops.trace_integral(u);
    let energy_rhs = lifting_term + robin_term + datum_term;

    let ku = k.mul_vec(u);
    let gamma_flux_reaction = crate::fem::gamma_nodes(mesh).iter().map(|&i| ku[i]).sum();
    let gamma_flux_ramp = dot(&ku, &radial_ramp(mesh)?);

    let sigma_measure = ops.sigma_measure();
    let trace_l2 = trace_sq.max(0.0).sqrt();
    let quadratic_term = p.beta * trace_sq;
    let linear_term = p.lambda * boundary_abs_integral(mesh, u);
    let linear_cauchy_schwarz = p.lambda * sigma_measure.sqrt() * trace_l2;
    let linear_holdall = p.lambda * holdall_area.sqrt() * trace_l2;
    let boxed_bound = p.beta.max(p.lambda * holdall_area.sqrt()) * trace_l2;
    let true_sum = quadratic_term + linear_holdall;
    Ok(LiteralAudit {
        flux_sign: p.flux_sign,
        energy_lhs,
        lifting_term,
        robin_term,
        datum_term,
        energy_rhs,
        identity_residual: energy_lhs - energy_rhs,
        gamma_flux_reaction,
        gamma_flux_ramp,
        sigma_measure,
        holdall_area,
        trace_l2,
        quadratic_term,
        linear_term,
        linear_cauchy_schwarz,
        linear_holdall,
        sigma_below_holdall: sigma_measure <= holdall_area,
        boxed_bound,
        true_sum,
        boxed_dominates: boxed_bound >= true_sum,
    })
}

/// Geometric grid of `count` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlawWitness {
    /// Smallest grid scale at which the boxed bound fails.
    pub scale: f64,
    pub grid_index: usize,
    /// `β s²‖u‖² + λ|U|^{1/2} s‖u‖`
    pub true_sum: f64,
    /// `max{β, λ|U|^{1/2}} s‖u‖`
    pub boxed_bound: f64,
    /// Scale above which failure is guaranteed:
    /// `max{β, λ|U|^{1/2}} / (β‖u‖)`.
    pub guaranteed_scale: f64,
}

/// Scans `v = s·u_R` for the first `s` where the boxed linear bound is
/// smaller than the quadratic-plus-linear sum it is meant to dominate.
pub fn flawed_bound_probe(trace_l2: f64, p: &PhysicsParams, holdall_area: f64, s_grid: &[f64]) -> Result<FlawWitness> {
    let coeff = p.beta.max(p.lambda * holdall_area.sqrt());
    let guaranteed_scale = if trace_l2 > 0.0 { coeff / (p.beta * trace_l2) } else { f64::INFINITY };
    for (grid_index, &s) in s_grid.iter().enumerate() {
        let norm = s * trace_l2;
        let true_sum = p.beta * norm * norm + p.lambda * holdall_area.sqrt() * norm;
        let boxed_bound = coeff * norm;
        if true_sum > boxed_bound {
            return Ok(FlawWitness { scale: s, grid_index, true_sum, boxed_bound, guaranteed_scale });
        }
    }
    Err(Error::NoViolation { trace_norm: trace_l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::SolverOptions;
    use crate::geometry::{generate_mesh, DomainSpec, Resolution};
    use crate::state::{radial_oracle_robin, solve_robin};
    use std::f64::consts::{E, PI};

    fn setup(p: &PhysicsParams) -> (Mesh, FemOperators, StateSolution) {
        let s = DomainSpec::concentric(1.0, 2.0, 5.0).unwrap();
        let m = generate_mesh(&s, Resolution::new(16, 64)).unwrap();
        let ops = FemOperators::new(&m).unwrap();
        let ur = solve_robin(&m, p, SolverOptions::with_tol(1e-13)).unwrap();
        (m, ops, ur)
    }

    #[test]
    fn constant_field_terms() {
        let p = PhysicsParams::new(0.8, 0.8, FluxSign::Positive).unwrap();
        let (m, ops, ur) = setup(&p);
        let a = audit_literal_paper(&m, &ops, &ur, 25.0 * PI).unwrap();
        assert!(a.energy_lhs.abs() < 1e-12);
        assert!(a.lifting_term.abs() < 1e-12);
        let ms = ops.sigma_measure();
        assert!((a.robin_term + 0.8 * ms).abs() < 1e-10);
        assert!((a.datum_term - 0.8 * ms).abs() < 1e-10);
        assert!(a.identity_residual.abs() < 1e-10);
        assert!(a.gamma_flux_reaction.abs() < 1e-10);
    }

    #[test]
    fn residual_equals_gamma_flux() {
        for sign in [FluxSign::Negative, FluxSign::Positive] {
            let p = PhysicsParams::new(1.0 / E, 1.0, sign).unwrap();
            let (m, ops, ur) = setup(&p);
            let a = audit_literal_paper(&m, &ops, &ur, 25.0 * PI).unwrap();
            assert!(a.lifting_term.abs() < 1e-12);
            assert!(a.identity_residual.abs() > 1e-3);
            assert!((a.identity_residual - a.gamma_flux_ramp).abs() <= 1e-6 * a.gamma_flux_ramp.abs());
            assert!((a.gamma_flux_reaction - a.gamma_flux_ramp).abs() <= 1e-8 * a.gamma_flux_ramp.abs());
            // analytic flux with normal pointing into the hole: −2πc
            let c = radial_oracle_robin(1.0, 2.0, p.datum(), p.beta).unwrap().coefficient;
            assert!((a.gamma_flux_ramp + 2.0 * PI * c).abs() < 0.02 * (2.0 * PI * c).abs());
        }
    }

    #[test]
    fn boundary_estimates_are_ordered() {
        let p = PhysicsParams::new(1.0 / E, 1.0, FluxSign::Negative).unwrap();
        let (m, ops, ur) = setup(&p);
        let a = audit_literal_paper(&m, &ops, &ur, 25.0 * PI).unwrap();
        assert!(a.linear_term <= a.linear_cauchy_schwarz * (1.0 + 1e-12));
        assert!(a.sigma_below_holdall);
        assert!(a.linear_cauchy_schwarz <= a.linear_holdall);
        assert!(!a.boxed_dominates);
    }

    #[test]
    fn probe_finds_witness_beyond_guaranteed_scale() {
        // β dominates the boxed coefficient, so small scales are fine
        let p = PhysicsParams::new(0.01, 5.0, FluxSign::Negative).unwrap();
        let grid = geometric_grid(1.0, 1e4, 81);
        let w = flawed_bound_probe(0.5, &p, 4.0, &grid).unwrap();
        assert!(w.true_sum > w.boxed_bound);
        assert!(w.scale <= w.guaranteed_scale * grid[1] / grid[0]);
        if w.grid_index > 0 {
            let s = grid[w.grid_index - 1];
            let n = s * 0.5;
            assert!(5.0 * n * n + 0.01 * 2.0 * n <= 5.0 * n);
        }
    }

    #[test]
    fn probe_degenerate_trace() {
        let p = PhysicsParams::new(1.0, 1.0, FluxSign::Negative).unwrap();
        let err = flawed_bound_probe(0.0, &p, 4.0, &geometric_grid(1.0, 100.0, 21)).unwrap_err();
        assert_eq!(err, Error::NoViolation { trace_norm: 0.0 });
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1.0, 100.0, 3);
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert!((g[2] - 100.0).abs() < 1e-12);
    }
}
