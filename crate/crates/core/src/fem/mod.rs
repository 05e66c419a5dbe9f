//! P1 finite elements on triangles: assembly of the Dirichlet form, the
//! volume and boundary mass forms, boundary loads, Dirichlet elimination and
//! the norms and trace functionals built on them.
//!
//! All element integrals are exact for piecewise-linear functions.

mod cg;
mod sparse;

use std::ops::Deref;

pub use cg::{solve_spd, CgSolution, SolverOptions};
pub use sparse::{dot, norm, CsrMatrix, LinearOperator, RankOneUpdate};

use crate::error::{Error, Result};
use crate::geometry::{signed_area, BoundaryPart, Mesh};

/// Nodal coefficients of a P1 function.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector(Vec<f64>);

impl FieldVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    /// Nodal interpolant of `f(x, y)`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self(mesh.nodes.iter().map(|&[x, y]| f(x, y)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.0.len() != mesh.node_count() {
            return Err(Error::LengthMismatch { expected: mesh.node_count(), got: self.0.len() });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for FieldVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FieldVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Gradients of the three barycentric basis functions and the area.
pub fn p1_gradients(p: &[[f64; 2]; 3]) -> Result<([[f64; 2]; 3], f64)> {
    let area = signed_area(p);
    if !(area > 0.0) {
        return Err(Error::DegenerateTriangle { triangle: 0, area });
    }
    let inv = 1.0 / (2.0 * area);
    let g = [
        [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
        [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
        [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
    ];
    Ok((g, area))
}

/// `∫_T ∇φᵢ·∇φⱼ` for one triangle.
pub fn element_stiffness(p: &[[f64; 2]; 3]) -> Result<[[f64; 3]; 3]> {
    let (g, area) = p1_gradients(p)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Ok(k)
}

fn assemble_elements<F>(mesh: &Mesh, element: F) -> Result<CsrMatrix>
where
    F: Fn(&[[f64; 2]; 3]) -> Result<[[f64; 3]; 3]>,
{
    let mut trip = Vec::with_capacity(9 * mesh.triangle_count());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let ke = element(&mesh.triangle_coords(t)).map_err(|e| match e {
            Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { triangle: t, area },
            other => other,
        })?;
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], ke[a][b]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.node_count(), trip))
}

/// Stiffness matrix of `a(w, v) = ∫_Ω ∇w·∇v`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<CsrMatrix> {
    assemble_elements(mesh, element_stiffness)
}

/// Volume mass matrix of `∫_Ω w v`.
pub fn assemble_mass(mesh: &Mesh) -> Result<CsrMatrix> {
    assemble_elements(mesh, |p| {
        let area = signed_area(p);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: 0, area });
        }
        let d = area / 6.0;
        let o = area / 12.0;
        Ok([[d, o, o], [o, d, o], [o, o, d]])
    })
}

/// Boundary mass matrix of `a_Σ(w, v) = ∫_Σ w v`; per edge of length `L`
/// the block is `(L/6)[[2, 1], [1, 2]]`.
pub fn assemble_boundary_mass(mesh: &Mesh) -> CsrMatrix {
    let mut trip = Vec::with_capacity(4 * mesh.sigma_edges.len());
    for &e in &mesh.sigma_edges {
        let l = mesh.edge_length(e);
        let d = l / 3.0;
        let o = l / 6.0;
        trip.extend([(e[0], e[0], d), (e[0], e[1], o), (e[1], e[0], o), (e[1], e[1], d)]);
    }
    CsrMatrix::from_triplets(mesh.node_count(), trip)
}

/// Load vector of `∫_Σ g φᵢ` for constant flux `g`.
pub fn assemble_boundary_load(mesh: &Mesh, g: f64) -> FieldVector {
    let mut f = vec![0.0; mesh.node_count()];
    for &e in &mesh.sigma_edges {
        let half = 0.5 * g * mesh.edge_length(e);
        f[e[0]] += half;
        f[e[1]] += half;
    }
    FieldVector(f)
}

/// System on the free nodes after eliminating Dirichlet nodes, for the
/// lifted unknown `w = u − value` (the lifting is the constant `value` on
/// every node, so `w = 0` on the constrained nodes).
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free: Vec<usize>,
    pub constrained: Vec<usize>,
    pub value: f64,
    /// `−(A · lifting)` restricted to the free nodes, already added to `rhs`.
    pub lifting_correction: Vec<f64>,
    n: usize,
}

impl ReducedSystem {
    /// Scatters a free-node solution back to full vectors `(u, w)`.
    pub fn expand(&self, w_free: &[f64]) -> (FieldVector, FieldVector) {
        let mut w = vec![0.0; self.n];
        for (k, &i) in self.free.iter().enumerate() {
            w[i] = w_free[k];
        }
        let u = w.iter().map(|wi| wi + self.value).collect();
        (FieldVector(u), FieldVector(w))
    }
}

pub fn apply_dirichlet(a: &CsrMatrix, rhs: &[f64], nodes: &[usize], value: f64) -> Result<ReducedSystem> {
    if nodes.is_empty() {
        return Err(Error::EmptyConstraintSet);
    }
    let n = a.n();
    let mut is_constrained = vec![false; n];
    for &i in nodes {
        if i >= n {
            return Err(Error::InvalidInput(format!("constrained node {i} out of range")));
        }
        is_constrained[i] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_constrained[i]).collect();
    let constrained: Vec<usize> = (0..n).filter(|&i| is_constrained[i]).collect();
    let lifted = a.mul_vec(&vec![value; n]);
    let lifting_correction: Vec<f64> = free.iter().map(|&i| -lifted[i]).collect();
    let rhs = free.iter().zip(&lifting_correction).map(|(&i, c)| rhs[i] + c).collect();
    Ok(ReducedSystem { matrix: a.principal_submatrix(&free), rhs, free, constrained, value, lifting_correction, n })
}

/// The four matrices/vectors every functional on a mesh is built from.
#[derive(Debug, Clone)]
pub struct FemOperators {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub boundary_mass: CsrMatrix,
    /// `bᵢ = ∫_Σ φᵢ`, so `bᵀv = ∫_Σ v`.
    pub sigma_weights: Vec<f64>,
}

impl FemOperators {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        Ok(Self {
            stiffness: assemble_stiffness(mesh)?,
            mass: assemble_mass(mesh)?,
            boundary_mass: assemble_boundary_mass(mesh),
            sigma_weights: assemble_boundary_load(mesh, 1.0).into_inner(),
        })
    }

    pub fn dim(&self) -> usize {
        self.stiffness.n()
    }

    /// `|v|_{H¹} = (vᵀKv)^{1/2}`.
    pub fn h1_seminorm(&self, v: &[f64]) -> f64 {
        self.stiffness.quadratic_form(v).max(0.0).sqrt()
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.mass.quadratic_form(v).max(0.0).sqrt()
    }

    pub fn h1_norm(&self, v: &[f64]) -> f64 {
        (self.stiffness.quadratic_form(v).max(0.0) + self.mass.quadratic_form(v).max(0.0)).sqrt()
    }

    /// `∫_Σ v dσ`.
    pub fn trace_integral(&self, v: &[f64]) -> f64 {
        dot(&self.sigma_weights, v)
    }

    /// `‖v‖_{L²(Σ)}`.
    pub fn boundary_l2(&self, v: &[f64]) -> f64 {
        self.boundary_mass.quadratic_form(v).max(0.0).sqrt()
    }

    /// `|Ω|` of the discrete domain.
    pub fn area(&self) -> f64 {
        self.mass.triplets().map(|(_, _, v)| v).sum()
    }

    /// `m(Σ)` of the polygonal boundary.
    pub fn sigma_measure(&self) -> f64 {
        self.sigma_weights.iter().sum()
    }
}

pub fn h1_seminorm(mesh: &Mesh, v: &FieldVector) -> Result<f64> {
    v.check_len(mesh)?;
    Ok(assemble_stiffness(mesh)?.quadratic_form(v).max(0.0).sqrt())
}

pub fn l2_norm(mesh: &Mesh, v: &FieldVector) -> Result<f64> {
    v.check_len(mesh)?;
    Ok(assemble_mass(mesh)?.quadratic_form(v).max(0.0).sqrt())
}

pub fn h1_norm(mesh: &Mesh, v: &FieldVector) -> Result<f64> {
    Ok(h1_seminorm(mesh, v)?.hypot(l2_norm(mesh, v)?))
}

pub fn trace_integral(mesh: &Mesh, v: &FieldVector) -> Result<f64> {
    v.check_len(mesh)?;
    Ok(dot(&assemble_boundary_load(mesh, 1.0), v))
}

pub fn boundary_l2(mesh: &Mesh, v: &FieldVector) -> Result<f64> {
    v.check_len(mesh)?;
    Ok(assemble_boundary_mass(mesh).quadratic_form(v).max(0.0).sqrt())
}

/// `∫_Σ |v| dσ`, exact for P1 traces (sign changes inside an edge are split).
pub fn boundary_abs_integral(mesh: &Mesh, v: &[f64]) -> f64 {
    mesh.sigma_edges
        .iter()
        .map(|&e| {
            let (p, q) = (v[e[0]], v[e[1]]);
            let l = mesh.edge_length(e);
            if p * q >= 0.0 {
                0.5 * l * (p.abs() + q.abs())
            } else {
                0.5 * l * (p * p + q * q) / (p.abs() + q.abs())
            }
        })
        .sum()
}

/// Degree-5, seven-point symmetric rule on the reference triangle:
/// `(barycentric coordinates, weight)` with weights summing to one.
const QUAD7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_2;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W2: f64 = 0.125_939_180_544_827_2;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// `‖u_h − u‖_{L²(Ω_h)}` against an exact function, by element quadrature.
pub fn l2_error(mesh: &Mesh, uh: &[f64], exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_coords(t);
        let area = signed_area(&p);
        for (lam, w) in QUAD7 {
            let x = lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0];
            let y = lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1];
            let vh = lam[0] * uh[tri[0]] + lam[1] * uh[tri[1]] + lam[2] * uh[tri[2]];
            sum += w * area * (vh - exact(x, y)).powi(2);
        }
    }
    sum.sqrt()
}

/// `|u_h − u|_{H¹(Ω_h)}` against an exact gradient, by element quadrature.
pub fn h1_seminorm_error(mesh: &Mesh, uh: &[f64], exact_grad: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
    let mut sum = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_coords(t);
        let Ok((g, area)) = p1_gradients(&p) else { continue };
        let gh = [0, 1].map(|d| (0..3).map(|a| g[a][d] * uh[tri[a]]).sum::<f64>());
        for (lam, w) in QUAD7 {
            let x = lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0];
            let y = lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1];
            let ge = exact_grad(x, y);
            sum += w * area * ((gh[0] - ge[0]).powi(2) + (gh[1] - ge[1]).powi(2));
        }
    }
    sum.sqrt()
}

/// Nodes on Γ, the Dirichlet set of both state problems.
pub fn gamma_nodes(mesh: &Mesh) -> Vec<usize> {
    mesh.boundary_nodes(BoundaryPart::Gamma)
}
