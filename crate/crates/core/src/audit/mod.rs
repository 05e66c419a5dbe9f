//! Audits of the Robin-state boundedness estimate: the original argument,
//! its scaling counterexample, and the corrected chain with computed
//! Poincaré–Friedrichs and trace constants.

mod chain;
mod constants;
mod literal;
mod survey;

pub use chain::{audit_consistent_chain, ChainAudit, ChainLink, SLACK_TOLERANCE};
pub use constants::{estimate_pf_constant, estimate_trace_constant, pf_ratio, EigenOptions, PfEstimate, TraceEstimate};
pub use literal::{audit_literal_paper, flawed_bound_probe, geometric_grid, FlawWitness, LiteralAudit};
pub use survey::{concentric_family, random_fourier_family, uniform_bound_survey, FamilyConfig, SurveyReport, SurveyRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemOperators, SolverOptions};
use crate::geometry::{generate_mesh, DomainSpec, Resolution};
use crate::state::{solve_state, FluxSign, PhysicsParams, StateKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Random fields used to certify each constant.
    pub certification_samples: usize,
    pub seed: u64,
    /// Largest scale tried by the flaw probe; the grid starts at 1.
    pub s_max: f64,
    pub s_points: usize,
    pub eigen: EigenOptions,
    pub solver: SolverOptions,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            certification_samples: 1000,
            seed: 42,
            s_max: 1e4,
            s_points: 81,
            eigen: EigenOptions::default(),
            solver: SolverOptions::with_tol(1e-12),
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_max >= 1.0 && self.s_max.is_finite()) || self.s_points < 2 {
            return Err(Error::InvalidInput("probe grid needs s_max >= 1 and at least 2 points".into()));
        }
        if !(self.eigen.tol > 0.0 && self.eigen.inner_tol > 0.0) || self.eigen.max_iters == 0 {
            return Err(Error::InvalidInput("eigen tolerances must be positive and max_iters >= 1".into()));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::InvalidInput("solver tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn s_grid(&self) -> Vec<f64> {
        geometric_grid(1.0, self.s_max, self.s_points)
    }
}

/// Full audit of one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub inner_radius: f64,
    pub shape_params: Vec<f64>,
    pub n_r: usize,
    pub n_theta: usize,
    pub pf: PfEstimate,
    pub trace: TraceEstimate,
    pub chain: ChainAudit,
    /// The original computation, once per flux sign.
    pub literal: Vec<LiteralAudit>,
    /// `|residual − Γ flux| / |Γ flux|` for each literal audit.
    pub literal_flux_mismatch: Vec<f64>,
    /// `None` when the Σ-trace vanishes.
    pub witness: Option<FlawWitness>,
}

impl AuditReport {
    pub fn check(&self) -> Result<()> {
        self.chain.check()
    }
}

fn flux_mismatch(l: &LiteralAudit) -> f64 {
    let flux = l.gamma_flux_ramp;
    if flux == 0.0 {
        l.identity_residual.abs()
    } else {
        (l.identity_residual - flux).abs() / flux.abs()
    }
}

/// Meshes the domain and runs every audit. Slack violations are recorded,
/// not raised; call [`AuditReport::check`].
pub fn audit_domain(spec: &DomainSpec, p: &PhysicsParams, res: Resolution, cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let mesh = generate_mesh(spec, res)?;
    let ops = FemOperators::new(&mesh)?;
    let robin = solve_state(&ops, &mesh, p, StateKind::Robin, cfg.solver)?;
    let pf = estimate_pf_constant(&mesh, &ops, cfg.certification_samples, cfg.seed, cfg.eigen)?;
    let trace = estimate_trace_constant(&mesh, &ops, cfg.certification_samples, cfg.seed, cfg.eigen)?;
    let holdall = spec.holdall_area();
    let chain = audit_consistent_chain(&ops, &robin, &pf, &trace, holdall)?;

    let mut literal = Vec::with_capacity(2);
    for sign in [FluxSign::Positive, FluxSign::Negative] {
        let q = PhysicsParams { flux_sign: sign, ..*p };
        let ur = if sign == p.flux_sign { robin.clone() } else { solve_state(&ops, &mesh, &q, StateKind::Robin, cfg.solver)? };
        literal.push(audit_literal_paper(&mesh, &ops, &ur, holdall)?);
    }
    let literal_flux_mismatch = literal.iter().map(flux_mismatch).collect();

    let witness = match flawed_bound_probe(chain.u_trace_l2, p, holdall, &cfg.s_grid()) {
        Ok(w) => Some(w),
        Err(Error::NoViolation { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(AuditReport {
        inner_radius: spec.inner_radius(),
        shape_params: spec.shape_params(),
        n_r: mesh.n_r,
        n_theta: mesh.n_theta,
        pf,
        trace,
        chain,
        literal,
        literal_flux_mismatch,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn baseline_audit() {
        let p = PhysicsParams::new(1.0 / E, 1.0, FluxSign::Negative).unwrap();
        let spec = DomainSpec::concentric(1.0, 2.0, 5.0).unwrap();
        let cfg = AuditConfig { certification_samples: 200, ..AuditConfig::default() };
        let r = audit_domain(&spec, &p, Resolution::new(8, 64), &cfg).unwrap();
        r.check().unwrap();
        assert_eq!(r.literal.len(), 2);
        for m in &r.literal_flux_mismatch {
            assert!(*m <= 1e-6, "{m}");
        }
        let w = r.witness.unwrap();
        assert!(w.scale <= 1e4);
    }

    #[test]
    fn bad_probe_grid_is_rejected() {
        let cfg = AuditConfig { s_max: 0.5, ..AuditConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
