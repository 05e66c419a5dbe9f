//! Minimization of `J` over the Fourier shape parameters.

use serde::{Deserialize, Serialize};

use crate::cost::{evaluate_cost, shape_gradient_fd};
use crate::error::{Error, Result};
use crate::fem::{norm, SolverOptions};
use crate::geometry::{AdmissibilityLimits, DomainSpec, Resolution};
use crate::state::PhysicsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FdGradientDescent,
    NelderMead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub method: Method,
    /// Length of the first trial step in parameter space (gradient descent)
    /// or edge length of the initial simplex (Nelder–Mead).
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo sufficient-decrease parameter.
    pub armijo: f64,
    pub min_step: f64,
    pub j_tol: f64,
    /// Gradient-norm tolerance, or spread of simplex `J` values for Nelder–Mead.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub resolution: Resolution,
    pub fd_step: f64,
    pub solver: SolverOptions,
    pub limits: AdmissibilityLimits,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            method: Method::FdGradientDescent,
            initial_step: 0.25,
            shrink: 0.5,
            armijo: 1e-4,
            min_step: 1e-8,
            j_tol: 2e-5,
            grad_tol: 1e-4,
            max_iters: 200,
            resolution: Resolution::new(16, 64),
            fd_step: 1e-3,
            solver: SolverOptions::with_tol(1e-12),
            limits: AdmissibilityLimits::default(),
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_step", self.initial_step),
            ("armijo", self.armijo),
            ("min_step", self.min_step),
            ("j_tol", self.j_tol),
            ("grad_tol", self.grad_tol),
            ("fd_step", self.fd_step),
            ("solver.tol", self.solver.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidInput(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if self.armijo >= 1.0 {
            return Err(Error::InvalidInput(format!("armijo must be below 1, got {}", self.armijo)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimStatus {
    ConvergedJ,
    ConvergedGrad,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimRecord {
    pub iteration: usize,
    /// `[c₀, cos₁, sin₁, …]` of the current iterate.
    pub coefficients: Vec<f64>,
    pub j: f64,
    /// Gradient norm, or simplex spread for Nelder–Mead.
    pub measure: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimTrajectory {
    pub method: Method,
    pub inner_radius: f64,
    pub holdall_radius: f64,
    pub records: Vec<OptimRecord>,
    pub status: OptimStatus,
    pub evaluations: usize,
}

impl OptimTrajectory {
    /// Last accepted iterate.
    pub fn best(&self) -> &OptimRecord {
        self.records.iter().rev().find(|r| r.accepted).expect("trajectory always records its start")
    }

    pub fn final_spec(&self) -> Result<DomainSpec> {
        let n = self.best().coefficients.len();
        let fourier = vec![(0.0, 0.0); n.div_ceil(2)];
        DomainSpec::new(self.inner_radius, fourier, self.holdall_radius)?.with_shape_params(&self.best().coefficients)
    }
}

struct Objective<'a> {
    base: &'a DomainSpec,
    p: &'a PhysicsParams,
    cfg: &'a OptimConfig,
    evaluations: usize,
}

impl Objective<'_> {
    /// `None` for inadmissible parameters.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        let s = self.base.with_shape_params(x)?;
        if !s.validate_admissible(&self.cfg.limits).is_empty() {
            return Ok(None);
        }
        self.evaluations += 1;
        Ok(Some(evaluate_cost(&s, self.p, self.cfg.resolution, self.cfg.solver)?.j))
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.base.with_shape_params(x)?;
        self.evaluations += 2 * x.len();
        shape_gradient_fd(&s, self.p, &self.cfg.limits, self.cfg.resolution, self.cfg.fd_step, self.cfg.solver)
    }
}

/// Runs the configured method from an admissible initial domain.
pub fn optimize_shape(initial: &DomainSpec, p: &PhysicsParams, cfg: &OptimConfig) -> Result<OptimTrajectory> {
    cfg.validate()?;
    let violations = initial.validate_admissible(&cfg.limits);
    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    let mut obj = Objective { base: initial, p, cfg, evaluations: 0 };
    let (records, status) = match cfg.method {
        Method::FdGradientDescent => gradient_descent(&mut obj, initial.shape_params())?,
        Method::NelderMead => nelder_mead(&mut obj, initial.shape_params())?,
    };
    Ok(OptimTrajectory {
        method: cfg.method,
        inner_radius: initial.inner_radius(),
        holdall_radius: initial.holdall_radius(),
        records,
        status,
        evaluations: obj.evaluations,
    })
}

fn gradient_descent(obj: &mut Objective, mut x: Vec<f64>) -> Result<(Vec<OptimRecord>, OptimStatus)> {
    let cfg = *obj.cfg;
    let mut j = obj.eval(&x)?.ok_or_else(|| Error::InvalidInput("initial domain is inadmissible".into()))?;
    let mut records = Vec::new();
    let mut length = cfg.initial_step;
    for it in 0..cfg.max_iters {
        if j <= cfg.j_tol {
            records.push(OptimRecord { iteration: it, coefficients: x, j, measure: None, accepted: true });
            return Ok((records, OptimStatus::ConvergedJ));
        }
        let g = match obj.gradient(&x) {
            Ok(g) => g,
            Err(Error::PerturbationInadmissible { .. }) => {
                records.push(OptimRecord { iteration: it, coefficients: x, j, measure: None, accepted: true });
                return Ok((records, OptimStatus::Stalled));
            }
            Err(e) => return Err(e),
        };
        let gn = norm(&g);
        records.push(OptimRecord { iteration: it, coefficients: x.clone(), j, measure: Some(gn), accepted: true });
        if gn <= cfg.grad_tol {
            return Ok((records, OptimStatus::ConvergedGrad));
        }
        let mut accepted = None;
        while length >= cfg.min_step {
            let t = length / gn;
            let trial: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x - t * g).collect();
            if let Some(jt) = obj.eval(&trial)? {
                if jt <= j - cfg.armijo * t * gn * gn {
                    accepted = Some((trial, jt));
                    break;
                }
                records.push(OptimRecord { iteration: it, coefficients: trial, j: jt, measure: None, accepted: false });
            }
            length *= cfg.shrink;
        }
        match accepted {
            Some((xn, jn)) => {
                x = xn;
                j = jn;
                length = (2.0 * length).min(cfg.initial_step);
            }
            None => return Ok((records, OptimStatus::Stalled)),
        }
    }
    records.push(OptimRecord { iteration: cfg.max_iters, coefficients: x, j, measure: None, accepted: true });
    Ok((records, if j <= cfg.j_tol { OptimStatus::ConvergedJ } else { OptimStatus::MaxIters }))
}

fn nelder_mead(obj: &mut Objective, x0: Vec<f64>) -> Result<(Vec<OptimRecord>, OptimStatus)> {
    let cfg = *obj.cfg;
    let n = x0.len();
    let mut f = |x: &[f64]| -> Result<f64> { Ok(obj.eval(x)?.unwrap_or(f64::INFINITY)) };
    let j0 = f(&x0)?;
    if !j0.is_finite() {
        return Err(Error::InvalidInput("initial domain is inadmissible".into()));
    }
    let mut simplex = vec![(x0.clone(), j0)];
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += cfg.initial_step;
        let mut fv = f(&v)?;
        if !fv.is_finite() {
            v[i] = x0[i] - cfg.initial_step;
            fv = f(&v)?;
        }
        simplex.push((v, fv));
    }
    let mut records = Vec::new();
    for it in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let spread = simplex[n].1 - best;
        records.push(OptimRecord {
            iteration: it,
            coefficients: simplex[0].0.clone(),
            j: best,
            measure: Some(spread),
            accepted: true,
        });
        if best <= cfg.j_tol {
            return Ok((records, OptimStatus::ConvergedJ));
        }
        if spread <= cfg.grad_tol {
            return Ok((records, OptimStatus::ConvergedGrad));
        }
        let size = simplex[1..].iter().map(|(v, _)| norm(&sub(v, &simplex[0].0))).fold(0.0, f64::max);
        if size < cfg.min_step {
            return Ok((records, OptimStatus::Stalled));
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|(v, _)| v[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = f(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let xs: Vec<f64> = b.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fs = f(&xs)?;
                    *v = (xs, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, j) = simplex.swap_remove(0);
    let status = if j <= cfg.j_tol { OptimStatus::ConvergedJ } else { OptimStatus::MaxIters };
    records.push(OptimRecord { iteration: cfg.max_iters, coefficients: x, j, measure: None, accepted: true });
    Ok((records, status))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}
