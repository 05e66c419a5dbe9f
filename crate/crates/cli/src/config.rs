//! JSON run configuration. Every section is optional; unknown keys are errors.

use std::path::{Path, PathBuf};

use bfb_core::audit::{AuditConfig, EigenOptions, FamilyConfig};
use bfb_core::convergence::ConvergenceConfig;
use bfb_core::fem::SolverOptions;
use bfb_core::geometry::{AdmissibilityLimits, DomainSpec, Resolution};
use bfb_core::optimize::{Method, OptimConfig};
use bfb_core::state::{FluxSign, PhysicsParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub physics: PhysicsSection,
    pub mesh: MeshSection,
    pub solver: SolverSection,
    pub limits: LimitsSection,
    pub optimizer: OptimizerSection,
    pub audit: AuditSection,
    pub convergence: ConvergenceSection,
    pub survey: SurveySection,
    /// Seed for random domain families and certification fields.
    pub seed: u64,
    /// Used when `--out` is not given.
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSection::default(),
            physics: PhysicsSection::default(),
            mesh: MeshSection::default(),
            solver: SolverSection::default(),
            limits: LimitsSection::default(),
            optimizer: OptimizerSection::default(),
            audit: AuditSection::default(),
            convergence: ConvergenceSection::default(),
            survey: SurveySection::default(),
            seed: 42,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub inner_radius: f64,
    /// `[[c₀, 0], [cos₁, sin₁], …]`
    pub fourier: Vec<(f64, f64)>,
    pub holdall_radius: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { inner_radius: 1.0, fourier: vec![(2.0, 0.0)], holdall_radius: 5.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub lambda: f64,
    pub beta: f64,
    /// `-1` (default) or `+1`.
    pub flux_sign: i64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { lambda: (-1f64).exp(), beta: 1.0, flux_sign: -1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { n_r: 16, n_theta: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    pub delta_gap: f64,
    pub max_fourier_norm: f64,
    pub max_perimeter: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        let d = AdmissibilityLimits::default();
        Self { delta_gap: d.delta_gap, max_fourier_norm: d.max_fourier_norm, max_perimeter: d.max_perimeter }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub method: Method,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub min_step: f64,
    pub j_tol: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimConfig::default();
        Self {
            method: d.method,
            initial_step: d.initial_step,
            shrink: d.shrink,
            armijo: d.armijo,
            min_step: d.min_step,
            j_tol: d.j_tol,
            grad_tol: d.grad_tol,
            max_iters: d.max_iters,
            fd_step: d.fd_step,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    pub s_max: f64,
    pub s_points: usize,
    pub certification_samples: usize,
    pub eigen_tol: f64,
    pub eigen_inner_tol: f64,
    pub eigen_max_iters: usize,
}

impl Default for AuditSection {
    fn default() -> Self {
        let d = AuditConfig::default();
        Self {
            s_max: d.s_max,
            s_points: d.s_points,
            certification_samples: d.certification_samples,
            eigen_tol: d.eigen.tol,
            eigen_inner_tol: d.eigen.inner_tol,
            eigen_max_iters: d.eigen.max_iters,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub levels: Vec<usize>,
    pub radial_divisor: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self { levels: vec![16, 32, 64, 128], radial_divisor: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Random,
    Concentric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurveySection {
    pub family: FamilyKind,
    /// Outer radii of the concentric family.
    pub radii: Vec<f64>,
    pub count: usize,
    pub base_radius: f64,
    pub max_harmonic: usize,
    pub max_amplitude: f64,
}

impl Default for SurveySection {
    fn default() -> Self {
        let d = FamilyConfig::default();
        Self {
            family: FamilyKind::Random,
            radii: vec![1.5, 2.0, 2.5, 3.0],
            count: d.count,
            base_radius: d.base_radius,
            max_harmonic: d.max_harmonic,
            max_amplitude: d.max_amplitude,
        }
    }
}

/// Configuration after validation, in library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub domain: DomainSpec,
    pub physics: PhysicsParams,
    pub resolution: Resolution,
    pub solver: SolverOptions,
    pub limits: AdmissibilityLimits,
    pub optimizer: OptimConfig,
    pub audit: AuditConfig,
    pub convergence: ConvergenceConfig,
    pub family: FamilyConfig,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks every section; nothing is computed before this succeeds.
    pub fn resolve(self) -> Result<Resolved, CliError> {
        let d = &self.domain;
        let domain = DomainSpec::new(d.inner_radius, d.fourier.clone(), d.holdall_radius).map_err(config_err)?;
        let flux_sign = FluxSign::from_value(self.physics.flux_sign).map_err(config_err)?;
        let physics = PhysicsParams::new(self.physics.lambda, self.physics.beta, flux_sign).map_err(config_err)?;
        if self.mesh.n_r < 1 || self.mesh.n_theta < 8 {
            return Err(CliError::Config(format!(
                "mesh needs n_r >= 1 and n_theta >= 8, got {} x {}",
                self.mesh.n_r, self.mesh.n_theta
            )));
        }
        let resolution = Resolution::new(self.mesh.n_r, self.mesh.n_theta);
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) || self.solver.max_iters == Some(0) {
            return Err(CliError::Config("solver.tol must lie in (0, 1) and solver.max_iters must be positive".into()));
        }
        let solver = SolverOptions { tol: self.solver.tol, max_iters: self.solver.max_iters };
        let l = &self.limits;
        let limits = AdmissibilityLimits::new(l.delta_gap, l.max_fourier_norm, l.max_perimeter).map_err(config_err)?;
        let violations = domain.validate_admissible(&limits);
        if !violations.is_empty() {
            let names: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::Config(format!("domain is not admissible: {}", names.join("; "))));
        }

        let o = &self.optimizer;
        let optimizer = OptimConfig {
            method: o.method,
            initial_step: o.initial_step,
            shrink: o.shrink,
            armijo: o.armijo,
            min_step: o.min_step,
            j_tol: o.j_tol,
            grad_tol: o.grad_tol,
            max_iters: o.max_iters,
            resolution,
            fd_step: o.fd_step,
            solver,
            limits,
        };
        optimizer.validate().map_err(config_err)?;

        let a = &self.audit;
        let audit = AuditConfig {
            certification_samples: a.certification_samples,
            seed: self.seed,
            s_max: a.s_max,
            s_points: a.s_points,
            eigen: EigenOptions { tol: a.eigen_tol, max_iters: a.eigen_max_iters, inner_tol: a.eigen_inner_tol },
            solver,
        };
        audit.validate().map_err(config_err)?;

        let c = &self.convergence;
        if c.levels.is_empty() || c.radial_divisor == 0 || c.levels.iter().any(|&n| n < 8 || n < c.radial_divisor) {
            return Err(CliError::Config("convergence levels must be >= 8 and >= radial_divisor > 0".into()));
        }
        let convergence = ConvergenceConfig {
            inner_radius: d.inner_radius,
            outer_radius: d.fourier[0].0,
            levels: c.levels.clone(),
            radial_divisor: c.radial_divisor,
            solver,
        };

        let s = &self.survey;
        if s.family == FamilyKind::Concentric && s.radii.is_empty() || s.family == FamilyKind::Random && s.count == 0 {
            return Err(CliError::Config("survey family is empty".into()));
        }
        if !(s.max_amplitude >= 0.0 && s.max_amplitude.is_finite()) {
            return Err(CliError::Config(format!("survey.max_amplitude must be nonnegative, got {}", s.max_amplitude)));
        }
        let family = FamilyConfig {
            count: s.count,
            seed: self.seed,
            inner_radius: d.inner_radius,
            base_radius: s.base_radius,
            holdall_radius: d.holdall_radius,
            max_harmonic: s.max_harmonic,
            max_amplitude: s.max_amplitude,
        };

        Ok(Resolved { raw: self, domain, physics, resolution, solver, limits, optimizer, audit, convergence, family })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Resolved, CliError> {
        serde_json::from_str::<RunConfig>(s).map_err(config_err)?.resolve()
    }

    #[test]
    fn empty_object_uses_defaults() {
        let r = parse("{}").unwrap();
        assert_eq!(r.raw.seed, 42);
        assert_eq!(r.physics.flux_sign, FluxSign::Negative);
        assert_eq!(r.domain.shape_params(), vec![2.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse(r#"{"physics": {"lambda": 1.0, "gamma": 2.0}}"#), Err(CliError::Config(_))));
        assert!(matches!(parse(r#"{"extra": 1}"#), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_values_are_rejected() {
        for s in [
            r#"{"physics": {"beta": -1.0}}"#,
            r#"{"physics": {"flux_sign": 0}}"#,
            r#"{"mesh": {"n_r": 0}}"#,
            r#"{"domain": {"inner_radius": 3.0}}"#,
            r#"{"optimizer": {"max_iters": 0}}"#,
            r#"{"audit": {"s_max": 0.1}}"#,
            r#"{"convergence": {"levels": []}}"#,
        ] {
            assert!(matches!(parse(s), Err(CliError::Config(_))), "{s}");
        }
    }

    #[test]
    fn method_names() {
        let r = parse(r#"{"optimizer": {"method": "nelder-mead"}}"#).unwrap();
        assert_eq!(r.optimizer.method, Method::NelderMead);
    }
}
