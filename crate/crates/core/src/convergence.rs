//! Mesh-refinement study of the state solvers against the radial oracles on
//! a concentric annulus.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::{h1_seminorm_error, l2_error, SolverOptions};
use crate::geometry::{generate_mesh, DomainSpec, Resolution};
use crate::state::{radial_oracle_neumann, radial_oracle_robin, solve_neumann, solve_robin, PhysicsParams};

/// Level `n` uses `n_theta = n` and `n_r = max(1, n / radial_divisor)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub levels: Vec<usize>,
    pub radial_divisor: usize,
    pub solver: SolverOptions,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            inner_radius: 1.0,
            outer_radius: 2.0,
            levels: vec![16, 32, 64, 128],
            radial_divisor: 2,
            solver: SolverOptions::with_tol(1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub n_r: usize,
    pub n_theta: usize,
    /// Largest edge length of the mesh.
    pub h: f64,
    pub neumann_l2: f64,
    pub neumann_h1: f64,
    pub robin_l2: f64,
    pub robin_h1: f64,
    /// Successive-error ratios against the previous level (absent on the first).
    pub neumann_l2_ratio: Option<f64>,
    pub neumann_h1_ratio: Option<f64>,
    pub robin_l2_ratio: Option<f64>,
    pub robin_h1_ratio: Option<f64>,
}

pub fn convergence_study(cfg: &ConvergenceConfig, p: &PhysicsParams) -> Result<Vec<ConvergenceRow>> {
    let (a, r) = (cfg.inner_radius, cfg.outer_radius);
    let spec = DomainSpec::concentric(a, r, 2.0 * r)?;
    let neumann = radial_oracle_neumann(a, r, p.datum())?;
    let robin = radial_oracle_robin(a, r, p.datum(), p.beta)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let res = Resolution::new((n / cfg.radial_divisor.max(1)).max(1), n);
        let mesh = generate_mesh(&spec, res)?;
        let un = solve_neumann(&mesh, p, cfg.solver)?;
        let ur = solve_robin(&mesh, p, cfg.solver)?;
        let h = mesh
            .triangles
            .iter()
            .flat_map(|&[i, j, k]| [[i, j], [j, k], [k, i]])
            .map(|e| mesh.edge_length(e))
            .fold(0.0, f64::max);
        let mut row = ConvergenceRow {
            n,
            n_r: res.n_r,
            n_theta: res.n_theta,
            h,
            neumann_l2: l2_error(&mesh, &un.u, |x, y| neumann.value_xy(x, y)),
            neumann_h1: h1_seminorm_error(&mesh, &un.u, |x, y| neumann.gradient_xy(x, y)),
            robin_l2: l2_error(&mesh, &ur.u, |x, y| robin.value_xy(x, y)),
            robin_h1: h1_seminorm_error(&mesh, &ur.u, |x, y| robin.gradient_xy(x, y)),
            neumann_l2_ratio: None,
            neumann_h1_ratio: None,
            robin_l2_ratio: None,
            robin_h1_ratio: None,
        };
        if let Some(prev) = rows.last() {
            row.neumann_l2_ratio = Some(prev.neumann_l2 / row.neumann_l2);
            row.neumann_h1_ratio = Some(prev.neumann_h1 / row.neumann_h1);
            row.robin_l2_ratio = Some(prev.robin_l2 / row.robin_l2);
            row.robin_h1_ratio = Some(prev.robin_h1 / row.robin_h1);
        }
        rows.push(row);
    }
    Ok(rows)
}
