//! The Neumann and Robin state problems on a mesh, and their closed-form
//! radial solutions on concentric annuli.
//!
//! Both problems are harmonic in Ω with `u = 1` on Γ. On Σ they carry the
//! boundary datum `g = flux_sign · λ`:
//!
//! ```text
//! Neumann:  ∂ₙu = g
//! Robin:    ∂ₙu + βu = g
//! ```
//!
//! The unknown is the lifted field `w = u − 1 ∈ H¹_Γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_boundary_load, gamma_nodes, solve_spd, CsrMatrix, FemOperators, FieldVector, SolverOptions,
};
use crate::geometry::Mesh;

/// Sign of the Σ boundary datum relative to λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FluxSign {
    /// `g = +λ`, the sign printed for the auxiliary problems.
    Positive,
    /// `g = −λ`, matching `−∂ₙu = λ` at the Bernoulli configuration.
    #[default]
    Negative,
}

impl FluxSign {
    pub fn value(self) -> f64 {
        match self {
            FluxSign::Positive => 1.0,
            FluxSign::Negative => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(FluxSign::Positive),
            -1 => Ok(FluxSign::Negative),
            other => Err(Error::InvalidInput(format!("flux sign must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub lambda: f64,
    pub beta: f64,
    pub flux_sign: FluxSign,
}

impl PhysicsParams {
    pub fn new(lambda: f64, beta: f64, flux_sign: FluxSign) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { lambda, beta, flux_sign })
    }

    /// Boundary datum `g = flux_sign · λ`.
    pub fn datum(&self) -> f64 {
        self.flux_sign.value() * self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Neumann,
    Robin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSolution {
    pub kind: StateKind,
    /// Full solution, equal to 1 on Γ.
    pub u: FieldVector,
    /// Lifted part `u − 1`, equal to 0 on Γ.
    pub w: FieldVector,
    pub params: PhysicsParams,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves the Neumann state: `K w = load(g)` on the free nodes.
pub fn solve_neumann(mesh: &Mesh, p: &PhysicsParams, opts: SolverOptions) -> Result<StateSolution> {
    let k = crate::fem::assemble_stiffness(mesh)?;
    solve_with(mesh, &k, p, StateKind::Neumann, opts)
}

/// Solves the Robin state: `(K + βM_Σ) w = load(g) − βM_Σ·1` on the free
/// nodes. The `−βM_Σ·1` term is the Σ contribution of the lifting.
pub fn solve_robin(mesh: &Mesh, p: &PhysicsParams, opts: SolverOptions) -> Result<StateSolution> {
    let k = crate::fem::assemble_stiffness(mesh)?;
    let a = k.add_scaled(&crate::fem::assemble_boundary_mass(mesh), p.beta);
    solve_with(mesh, &a, p, StateKind::Robin, opts)
}

/// Same as [`solve_neumann`] / [`solve_robin`] but reusing assembled operators.
pub fn solve_state(
    ops: &FemOperators,
    mesh: &Mesh,
    p: &PhysicsParams,
    kind: StateKind,
    opts: SolverOptions,
) -> Result<StateSolution> {
    match kind {
        StateKind::Neumann => solve_with(mesh, &ops.stiffness, p, kind, opts),
        StateKind::Robin => {
            let a = ops.stiffness.add_scaled(&ops.boundary_mass, p.beta);
            solve_with(mesh, &a, p, kind, opts)
        }
    }
}

fn solve_with(mesh: &Mesh, a: &CsrMatrix, p: &PhysicsParams, kind: StateKind, opts: SolverOptions) -> Result<StateSolution> {
    let load = assemble_boundary_load(mesh, p.datum());
    let reduced = apply_dirichlet(a, &load, &gamma_nodes(mesh), 1.0)?;
    let sol = solve_spd(&reduced.matrix, &reduced.rhs, opts)?;
    let (u, w) = reduced.expand(&sol.x);
    Ok(StateSolution { kind, u, w, params: *p, iterations: sol.iterations, residual: sol.relative_residual })
}

/// `u(r) = 1 + c·ln(r/a)` on `a < r < R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub coefficient: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl RadialSolution {
    pub fn value(&self, r: f64) -> f64 {
        1.0 + self.coefficient * (r / self.inner_radius).ln()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.coefficient / r
    }

    pub fn value_xy(&self, x: f64, y: f64) -> f64 {
        self.value(x.hypot(y))
    }

    pub fn gradient_xy(&self, x: f64, y: f64) -> [f64; 2] {
        let r2 = x * x + y * y;
        [self.coefficient * x / r2, self.coefficient * y / r2]
    }

    /// `∫_Ω |∇u|² = 2π c² ln(R/a)`.
    pub fn dirichlet_energy(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.coefficient.powi(2) * (self.outer_radius / self.inner_radius).ln()
    }
}

fn check_radii(a: f64, r: f64) -> Result<()> {
    if !(a > 0.0 && r > a && r.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 < a < R, got a={a}, R={r}")));
    }
    Ok(())
}

/// Radial Neumann solution: `u′(R) = g` gives `c = g·R`.
pub fn radial_oracle_neumann(a: f64, r: f64, g: f64) -> Result<RadialSolution> {
    check_radii(a, r)?;
    Ok(RadialSolution { coefficient: g * r, inner_radius: a, outer_radius: r })
}

/// Radial Robin solution: `u′(R) + βu(R) = g` gives
/// `c = (g − β) / (1/R + β ln(R/a))`.
pub fn radial_oracle_robin(a: f64, r: f64, g: f64, beta: f64) -> Result<RadialSolution> {
    check_radii(a, r)?;
    let denom = 1.0 / r + beta * (r / a).ln();
    if denom == 0.0 {
        return Err(Error::InvalidInput("singular Robin denominator".into()));
    }
    Ok(RadialSolution { coefficient: (g - beta) / denom, inner_radius: a, outer_radius: r })
}

/// Radius `R* > a` of the concentric Bernoulli solution, the root of
/// `R ln(R/a) = 1/λ`, by bisection.
pub fn bernoulli_radius(a: f64, lambda: f64) -> Result<f64> {
    if !(a > 0.0 && lambda > 0.0 && a.is_finite() && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("need a > 0 and lambda > 0, got a={a}, lambda={lambda}")));
    }
    let target = 1.0 / lambda;
    let f = |r: f64| r * (r / a).ln() - target;
    let mut lo = a;
    let mut hi = 2.0 * a;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
