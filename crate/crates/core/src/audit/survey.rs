//! Uniform-bound survey over a family of domains sharing one hold-all.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{audit_domain, AuditConfig, AuditReport};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Resolution};
use crate::state::PhysicsParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub index: usize,
    pub c0: f64,
    pub harmonic_norm: f64,
    pub c_pf: f64,
    pub c_tr: f64,
    pub u_h1: f64,
    /// Per-domain bound on `‖u_R‖_{H¹}`.
    pub bound_u: f64,
    /// Per-domain bound on `‖w_R‖_{H¹}`.
    pub c: f64,
    pub min_slack: f64,
    pub identity_relative_residual: f64,
    pub max_literal_flux_mismatch: f64,
    pub witness_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub rows: Vec<SurveyRow>,
    pub max_u_h1: f64,
    /// The single bound: largest per-domain bound on `‖u_R‖_{H¹}`.
    pub uniform_bound: f64,
    pub bounded: bool,
    pub min_slack: f64,
}

impl SurveyRow {
    fn from_report(index: usize, spec: &DomainSpec, r: &AuditReport) -> Self {
        Self {
            index,
            c0: spec.shape_params()[0],
            harmonic_norm: spec.harmonic_norm(),
            c_pf: r.pf.c_pf,
            c_tr: r.trace.c_tr,
            u_h1: r.chain.u_h1,
            bound_u: r.chain.bound_u,
            c: r.chain.c,
            min_slack: r.chain.min_slack(),
            identity_relative_residual: r.chain.identity_relative_residual,
            max_literal_flux_mismatch: r.literal_flux_mismatch.iter().copied().fold(0.0, f64::max),
            witness_scale: r.witness.map(|w| w.scale),
        }
    }
}

/// Audits every member concurrently; rows come back in family order.
pub fn uniform_bound_survey(
    family: &[DomainSpec],
    p: &PhysicsParams,
    res: Resolution,
    cfg: &AuditConfig,
) -> Result<SurveyReport> {
    if family.is_empty() {
        return Err(Error::InvalidInput("survey family is empty".into()));
    }
    let r_u = family[0].holdall_radius();
    if family.iter().any(|s| s.holdall_radius() != r_u) {
        return Err(Error::InvalidInput("survey members must share one hold-all".into()));
    }
    let mut rows = family
        .par_iter()
        .enumerate()
        .map(|(i, s)| audit_domain(s, p, res, cfg).map(|r| SurveyRow::from_report(i, s, &r)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.index);
    let max_u_h1 = rows.iter().map(|r| r.u_h1).fold(0.0, f64::max);
    let uniform_bound = rows.iter().map(|r| r.bound_u).fold(0.0, f64::max);
    let min_slack = rows.iter().map(|r| r.min_slack).fold(f64::INFINITY, f64::min);
    Ok(SurveyReport { bounded: uniform_bound.is_finite() && max_u_h1 <= uniform_bound, rows, max_u_h1, uniform_bound, min_slack })
}

pub fn concentric_family(inner_radius: f64, radii: &[f64], holdall_radius: f64) -> Result<Vec<DomainSpec>> {
    radii.iter().map(|&r| DomainSpec::concentric(inner_radius, r, holdall_radius)).collect()
}

/// Random Fourier perturbations of a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub count: usize,
    pub seed: u64,
    pub inner_radius: f64,
    pub base_radius: f64,
    pub holdall_radius: f64,
    pub max_harmonic: usize,
    /// Each harmonic gets amplitude `U[0, max_amplitude]` and a uniform phase.
    pub max_amplitude: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            count: 50,
            seed: 42,
            inner_radius: 1.0,
            base_radius: 2.0,
            holdall_radius: 5.0,
            max_harmonic: 3,
            max_amplitude: 0.2,
        }
    }
}

pub fn random_fourier_family(cfg: &FamilyConfig) -> Result<Vec<DomainSpec>> {
    if !(cfg.max_amplitude >= 0.0 && cfg.max_amplitude.is_finite()) {
        return Err(Error::InvalidInput(format!("amplitude must be nonnegative, got {}", cfg.max_amplitude)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|_| {
            let mut fourier = vec![(cfg.base_radius, 0.0)];
            for _ in 0..cfg.max_harmonic {
                let amp = cfg.max_amplitude * rng.gen::<f64>();
                let phase = TAU * rng.gen::<f64>();
                fourier.push((amp * phase.cos(), amp * phase.sin()));
            }
            DomainSpec::new(cfg.inner_radius, fourier, cfg.holdall_radius)
        })
        .collect()
}
