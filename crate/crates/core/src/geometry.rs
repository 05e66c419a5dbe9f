//! Annular domains with a radial-graph outer boundary, and their structured
//! triangulations.
//!
//! The domain is `Ω = {a < r < ρ(θ)}` where the inner circle `r = a` is the
//! fixed boundary Γ and `r = ρ(θ)` is the free boundary Σ, with
//!
//! ```text
//! ρ(θ) = c₀ + Σ_{k≥1} (cos_k · cos kθ + sin_k · sin kθ)
//! ```
//!
//! Everything in this module is immutable after construction.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equispaced angles used by every sampled check.
pub const ANGLE_SAMPLES: usize = 1440;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPart {
    /// Fixed inner circle.
    Gamma,
    /// Free outer boundary.
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    inner_radius: f64,
    /// `(cos_k, sin_k)` for `k = 0..=K`; the `sin_0` slot is ignored.
    fourier: Vec<(f64, f64)>,
    holdall_radius: f64,
}

impl DomainSpec {
    /// Builds a domain description. Admissibility is checked separately by
    /// [`DomainSpec::validate_admissible`].
    pub fn new(inner_radius: f64, fourier: Vec<(f64, f64)>, holdall_radius: f64) -> Result<Self> {
        if !inner_radius.is_finite() || inner_radius <= 0.0 {
            return Err(Error::InvalidInput(format!("inner radius must be positive, got {inner_radius}")));
        }
        if !holdall_radius.is_finite() || holdall_radius <= inner_radius {
            return Err(Error::InvalidInput(format!("hold-all radius {holdall_radius} must exceed inner radius {inner_radius}")));
        }
        if fourier.is_empty() {
            return Err(Error::InvalidInput("at least the mean radius c0 is required".into()));
        }
        if let Some(index) = fourier.iter().position(|(c, s)| !c.is_finite() || !s.is_finite()) {
            return Err(Error::NonFiniteCoefficient { index });
        }
        Ok(Self { inner_radius, fourier, holdall_radius })
    }

    /// Concentric annulus `a < r < outer`.
    pub fn concentric(inner_radius: f64, outer_radius: f64, holdall_radius: f64) -> Result<Self> {
        Self::new(inner_radius, vec![(outer_radius, 0.0)], holdall_radius)
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn holdall_radius(&self) -> f64 {
        self.holdall_radius
    }

    pub fn fourier(&self) -> &[(f64, f64)] {
        &self.fourier
    }

    /// Highest harmonic index `K`.
    pub fn max_harmonic(&self) -> usize {
        self.fourier.len() - 1
    }

    /// Area of the hold-all disk `U`.
    pub fn holdall_area(&self) -> f64 {
        PI * self.holdall_radius * self.holdall_radius
    }

    pub fn radius(&self, theta: f64) -> f64 {
        let mut r = self.fourier[0].0;
        for (k, &(c, s)) in self.fourier.iter().enumerate().skip(1) {
            let kt = k as f64 * theta;
            r += c * kt.cos() + s * kt.sin();
        }
        r
    }

    /// `dρ/dθ`.
    pub fn radius_derivative(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, &(c, s)) in self.fourier.iter().enumerate().skip(1) {
            let kf = k as f64;
            let kt = kf * theta;
            d += kf * (s * kt.cos() - c * kt.sin());
        }
        d
    }

    /// Shape parameters as a flat vector `[c₀, cos₁, sin₁, …, cos_K, sin_K]`.
    pub fn shape_params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(2 * self.fourier.len() - 1);
        p.push(self.fourier[0].0);
        for &(c, s) in &self.fourier[1..] {
            p.push(c);
            p.push(s);
        }
        p
    }

    /// Inverse of [`DomainSpec::shape_params`], keeping `a` and `R_U`.
    pub fn with_shape_params(&self, params: &[f64]) -> Result<Self> {
        if params.is_empty() || params.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("shape parameter vector must have odd length, got {}", params.len())));
        }
        let mut fourier = vec![(params[0], 0.0)];
        fourier.extend(params[1..].chunks(2).map(|cs| (cs[0], cs[1])));
        Self::new(self.inner_radius, fourier, self.holdall_radius)
    }

    /// Euclidean norm of the harmonic (k ≥ 1) coefficients.
    pub fn harmonic_norm(&self) -> f64 {
        self.fourier[1..].iter().map(|(c, s)| c * c + s * s).sum::<f64>().sqrt()
    }

    fn sampled_radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..ANGLE_SAMPLES).map(move |i| self.radius(2.0 * PI * i as f64 / ANGLE_SAMPLES as f64))
    }

    /// Returns every violated admissibility constraint; empty means admissible.
    pub fn validate_admissible(&self, limits: &AdmissibilityLimits) -> Vec<Violation> {
        let (min_rho, max_rho) =
            self.sampled_radii().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        let mut out = Vec::new();
        let required = self.inner_radius + limits.delta_gap;
        if min_rho < required {
            out.push(Violation::Gap { min_radius: min_rho, required });
        }
        let limit = self.holdall_radius - limits.delta_gap;
        if max_rho > limit {
            out.push(Violation::Holdall { max_radius: max_rho, limit });
        }
        let norm = self.harmonic_norm();
        if norm > limits.max_fourier_norm {
            out.push(Violation::FourierNorm { norm, limit: limits.max_fourier_norm });
        }
        // Only meaningful for a positive radius; a gap violation is already recorded otherwise.
        if min_rho > 0.0 {
            let perimeter = self.boundary_measure(BoundaryPart::Sigma);
            if perimeter > limits.max_perimeter {
                out.push(Violation::Perimeter { perimeter, limit: limits.max_perimeter });
            }
        }
        out
    }

    /// Arc length of Γ or Σ. For Σ the periodic trapezoidal rule on
    /// `√(ρ² + ρ′²)` is refined until successive values agree to 1e-14.
    pub fn boundary_measure(&self, which: BoundaryPart) -> f64 {
        match which {
            BoundaryPart::Gamma => 2.0 * PI * self.inner_radius,
            BoundaryPart::Sigma => {
                let integrand = |t: f64| {
                    let r = self.radius(t);
                    let d = self.radius_derivative(t);
                    (r * r + d * d).sqrt()
                };
                let trapezoid = |n: usize| {
                    let h = 2.0 * PI / n as f64;
                    (0..n).map(|i| integrand(h * i as f64)).sum::<f64>() * h
                };
                let mut n = 64 * (self.max_harmonic() + 1);
                let mut prev = trapezoid(n);
                while n < 1 << 22 {
                    n *= 2;
                    let next = trapezoid(n);
                    if (next - prev).abs() <= 1e-14 * next.abs() {
                        return next;
                    }
                    prev = next;
                }
                prev
            }
        }
    }
}

/// Max over sampled angles of `|ρ₁(θ) − ρ₂(θ)|`.
pub fn domain_distance(s1: &DomainSpec, s2: &DomainSpec) -> Result<f64> {
    if s1.inner_radius != s2.inner_radius {
        return Err(Error::InvalidInput(format!(
            "domains have different inner radii ({} vs {})",
            s1.inner_radius, s2.inner_radius
        )));
    }
    Ok(s1.sampled_radii().zip(s2.sampled_radii()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityLimits {
    pub delta_gap: f64,
    pub max_fourier_norm: f64,
    pub max_perimeter: f64,
}

impl AdmissibilityLimits {
    pub fn new(delta_gap: f64, max_fourier_norm: f64, max_perimeter: f64) -> Result<Self> {
        let all_positive = [delta_gap, max_fourier_norm, max_perimeter].iter().all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidInput("admissibility limits must be finite and strictly positive".into()));
        }
        Ok(Self { delta_gap, max_fourier_norm, max_perimeter })
    }
}

impl Default for AdmissibilityLimits {
    fn default() -> Self {
        Self { delta_gap: 0.1, max_fourier_norm: 1.0, max_perimeter: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Gap { min_radius: f64, required: f64 },
    Holdall { max_radius: f64, limit: f64 },
    FourierNorm { norm: f64, limit: f64 },
    Perimeter { perimeter: f64, limit: f64 },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::Gap { .. } => "gap",
            Violation::Holdall { .. } => "holdall",
            Violation::FourierNorm { .. } => "fourier_norm",
            Violation::Perimeter { .. } => "perimeter",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Gap { min_radius, required } => {
                write!(f, "gap: min radius {min_radius} < {required}")
            }
            Violation::Holdall { max_radius, limit } => {
                write!(f, "holdall: max radius {max_radius} > {limit}")
            }
            Violation::FourierNorm { norm, limit } => {
                write!(f, "fourier_norm: {norm} > {limit}")
            }
            Violation::Perimeter { perimeter, limit } => {
                write!(f, "perimeter: {perimeter} > {limit}")
            }
        }
    }
}

/// Conforming triangulation with tagged boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub gamma_edges: Vec<[usize; 2]>,
    pub sigma_edges: Vec<[usize; 2]>,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Mesh {
    /// Builds a mesh from raw parts, rejecting non-positive triangles.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        gamma_edges: Vec<[usize; 2]>,
        sigma_edges: Vec<[usize; 2]>,
    ) -> Result<Self> {
        let n = nodes.len();
        let in_range =
            triangles.iter().flatten().all(|&i| i < n) && gamma_edges.iter().chain(&sigma_edges).flatten().all(|&i| i < n);
        if !in_range {
            return Err(Error::InvalidInput("mesh connectivity references a missing node".into()));
        }
        let mesh = Self { nodes, triangles, gamma_edges, sigma_edges, n_r: 0, n_theta: 0 };
        mesh.check_orientation()?;
        Ok(mesh)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [i, j, k] = self.triangles[t];
        [self.nodes[i], self.nodes[j], self.nodes[k]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_coords(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    fn check_orientation(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
        }
        Ok(())
    }

    pub fn edge_length(&self, edge: [usize; 2]) -> f64 {
        let [p, q] = [self.nodes[edge[0]], self.nodes[edge[1]]];
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    pub fn edges(&self, which: BoundaryPart) -> &[[usize; 2]] {
        match which {
            BoundaryPart::Gamma => &self.gamma_edges,
            BoundaryPart::Sigma => &self.sigma_edges,
        }
    }

    /// Sorted, deduplicated node indices on Γ or Σ.
    pub fn boundary_nodes(&self, which: BoundaryPart) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.edges(which).iter().flatten().copied().collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Length of the polygonal Γ or Σ.
    pub fn polygon_length(&self, which: BoundaryPart) -> f64 {
        self.edges(which).iter().map(|&e| self.edge_length(e)).sum()
    }

    /// Checks edge multiplicities: boundary edges bound one triangle,
    /// interior edges two, and every tagged boundary node has exactly two
    /// incident tagged edges.
    pub fn check_topology(&self) -> Result<()> {
        use std::collections::HashMap;
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for &[i, j, k] in &self.triangles {
            for (a, b) in [(i, j), (j, k), (k, i)] {
                *count.entry(key(a, b)).or_default() += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), BoundaryPart> = HashMap::new();
        for (part, edges) in [(BoundaryPart::Gamma, &self.gamma_edges), (BoundaryPart::Sigma, &self.sigma_edges)] {
            for e in edges {
                if tagged.insert(key(e[0], e[1]), part).is_some() {
                    return Err(Error::InvalidInput(format!("boundary edge {e:?} tagged twice")));
                }
            }
        }
        for (edge, &c) in &count {
            let expected = if tagged.contains_key(edge) { 1 } else { 2 };
            if c != expected {
                return Err(Error::InvalidInput(format!("edge {edge:?} belongs to {c} triangles, expected {expected}")));
            }
        }
        if let Some(edge) = tagged.keys().find(|e| !count.contains_key(e)) {
            return Err(Error::InvalidInput(format!("tagged edge {edge:?} is not a triangle edge")));
        }
        for part in [BoundaryPart::Gamma, BoundaryPart::Sigma] {
            let mut degree: HashMap<usize, usize> = HashMap::new();
            for e in self.edges(part) {
                *degree.entry(e[0]).or_default() += 1;
                *degree.entry(e[1]).or_default() += 1;
            }
            if let Some((node, d)) = degree.iter().find(|(_, &d)| d != 2) {
                return Err(Error::InvalidInput(format!("{part:?} node {node} has {d} incident edges, expected 2")));
            }
        }
        Ok(())
    }

    /// Writes the plain-text mesh format:
    ///
    /// ```text
    /// nodes N triangles T
    /// x y            (N lines)
    /// i j k          (T lines)
    /// gamma_edges G
    /// i j            (G lines)
    /// sigma_edges S
    /// i j            (S lines)
    /// ```
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "nodes {} triangles {}", self.nodes.len(), self.triangles.len())?;
        for [x, y] in &self.nodes {
            writeln!(w, "{x} {y}")?;
        }
        for [i, j, k] in &self.triangles {
            writeln!(w, "{i} {j} {k}")?;
        }
        writeln!(w, "gamma_edges {}", self.gamma_edges.len())?;
        for [i, j] in &self.gamma_edges {
            writeln!(w, "{i} {j}")?;
        }
        writeln!(w, "sigma_edges {}", self.sigma_edges.len())?;
        for [i, j] in &self.sigma_edges {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }
}

pub(crate) fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Resolution {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        Self { n_r, n_theta }
    }
}

/// Node index of grid point `(i, j)`: angle index `i`, radial index `j`.
pub fn grid_index(i: usize, j: usize, n_r: usize) -> usize {
    i * (n_r + 1) + j
}

/// Transfinite annular grid: node `(i, j)` sits at radius
/// `a + (j / n_r)(ρ(θᵢ) − a)`, `θᵢ = 2πi / n_theta`. Each quad is cut along
/// the diagonal from `(i, j)` to `(i+1, j+1)`.
pub fn generate_mesh(spec: &DomainSpec, res: Resolution) -> Result<Mesh> {
    let Resolution { n_r, n_theta } = res;
    if n_r < 1 || n_theta < 8 {
        return Err(Error::InvalidInput(format!(
            "mesh resolution needs n_r >= 1 and n_theta >= 8, got n_r={n_r}, n_theta={n_theta}"
        )));
    }
    generate_mesh_unchecked(spec, n_r, n_theta)
}

/// Same grid construction without the resolution floor; used for tiny
/// hand-checkable meshes.
pub fn generate_mesh_unchecked(spec: &DomainSpec, n_r: usize, n_theta: usize) -> Result<Mesh> {
    if n_r < 1 || n_theta < 3 {
        return Err(Error::InvalidInput("mesh needs n_r >= 1 and n_theta >= 3".into()));
    }
    let a = spec.inner_radius();
    let mut nodes = Vec::with_capacity(n_theta * (n_r + 1));
    for i in 0..n_theta {
        let theta = 2.0 * PI * i as f64 / n_theta as f64;
        let rho = spec.radius(theta);
        if !(rho > a) {
            return Err(Error::Inadmissible(vec![Violation::Gap { min_radius: rho, required: a }]));
        }
        let (s, c) = theta.sin_cos();
        for j in 0..=n_r {
            let r = a + (j as f64 / n_r as f64) * (rho - a);
            nodes.push([r * c, r * s]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n_r * n_theta);
    for i in 0..n_theta {
        let ip = (i + 1) % n_theta;
        for j in 0..n_r {
            let p00 = grid_index(i, j, n_r);
            let p01 = grid_index(i, j + 1, n_r);
            let p10 = grid_index(ip, j, n_r);
            let p11 = grid_index(ip, j + 1, n_r);
            triangles.push([p00, p01, p11]);
            triangles.push([p00, p11, p10]);
        }
    }
    let gamma_edges = (0..n_theta).map(|i| [grid_index(i, 0, n_r), grid_index((i + 1) % n_theta, 0, n_r)]).collect();
    let sigma_edges = (0..n_theta).map(|i| [grid_index(i, n_r, n_r), grid_index((i + 1) % n_theta, n_r, n_r)]).collect();
    let mesh = Mesh { nodes, triangles, gamma_edges, sigma_edges, n_r, n_theta };
    mesh.check_orientation()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn annulus() -> DomainSpec {
        DomainSpec::concentric(1.0, 2.0, 5.0).unwrap()
    }

    #[test]
    fn build_domain_examples() {
        let s = annulus();
        assert_eq!(s.radius(0.3), 2.0);
        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.1, 0.0)], 5.0).unwrap();
        for t in [0.0, 0.7, 2.0, 4.5] {
            assert_relative_eq!(s.radius(t), 2.0 + 0.1 * f64::cos(t), epsilon = 1e-15);
        }
        // degenerate spec still builds; validation rejects it
        let s = DomainSpec::new(1.0, vec![(0.5, 0.0)], 5.0).unwrap();
        let v = s.validate_admissible(&AdmissibilityLimits::default());
        assert!(v.iter().any(|v| v.name() == "gap"));
    }

    #[test]
    fn build_domain_rejects_non_finite() {
        let err = DomainSpec::new(1.0, vec![(2.0, 0.0), (f64::NAN, 0.0)], 5.0).unwrap_err();
        assert_eq!(err, Error::NonFiniteCoefficient { index: 1 });
        assert!(DomainSpec::new(0.0, vec![(2.0, 0.0)], 5.0).is_err());
        assert!(DomainSpec::new(1.0, vec![(2.0, 0.0)], 0.5).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let lim = AdmissibilityLimits::new(0.1, 1.0, 100.0).unwrap();
        assert!(annulus().validate_admissible(&lim).is_empty());

        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (1.2, 0.0)], 5.0).unwrap();
        let v = s.validate_admissible(&AdmissibilityLimits::new(0.1, 10.0, 100.0).unwrap());
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::Gap { min_radius, required } => {
                assert_relative_eq!(min_radius, 0.8, epsilon = 1e-12);
                assert_relative_eq!(required, 1.1);
            }
            ref other => panic!("unexpected {other:?}"),
        }

        let s = DomainSpec::concentric(1.0, 2.0, 2.05).unwrap();
        let v = s.validate_admissible(&lim);
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["holdall"]);
    }

    #[test]
    fn admissibility_caps() {
        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.3, 0.4)], 5.0).unwrap();
        let v = s.validate_admissible(&AdmissibilityLimits::new(0.1, 0.4, 100.0).unwrap());
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["fourier_norm"]);
        let v = annulus().validate_admissible(&AdmissibilityLimits::new(0.1, 1.0, 10.0).unwrap());
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["perimeter"]);
        assert!(AdmissibilityLimits::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn boundary_measure_examples() {
        let s = annulus();
        assert_relative_eq!(s.boundary_measure(BoundaryPart::Gamma), 2.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(s.boundary_measure(BoundaryPart::Sigma), 4.0 * PI, max_relative = 1e-14);
        // mpmath adaptive quadrature at 30 digits: 12.5742258239455180731658669385
        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.1, 0.0)], 5.0).unwrap();
        assert_relative_eq!(s.boundary_measure(BoundaryPart::Sigma), 12.574_225_823_945_518, max_relative = 1e-12);
    }

    #[test]
    fn mesh_counts() {
        let m = generate_mesh_unchecked(&annulus(), 1, 4).unwrap();
        assert_eq!((m.node_count(), m.triangle_count()), (8, 8));
        assert_eq!((m.gamma_edges.len(), m.sigma_edges.len()), (4, 4));
        m.check_topology().unwrap();

        let m = generate_mesh(&annulus(), Resolution::new(2, 16)).unwrap();
        assert_eq!((m.node_count(), m.triangle_count()), (48, 64));
        m.check_topology().unwrap();
        assert!(generate_mesh(&annulus(), Resolution::new(2, 4)).is_err());
    }

    #[test]
    fn mesh_boundary_loops_sit_on_their_curves() {
        let s = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.2, -0.1), (0.0, 0.15)], 5.0).unwrap();
        let m = generate_mesh(&s, Resolution::new(4, 32)).unwrap();
        for i in m.boundary_nodes(BoundaryPart::Gamma) {
            let [x, y] = m.nodes[i];
            assert_relative_eq!(x.hypot(y), 1.0, epsilon = 1e-14);
        }
        for i in m.boundary_nodes(BoundaryPart::Sigma) {
            let [x, y] = m.nodes[i];
            assert_relative_eq!(x.hypot(y), s.radius(y.atan2(x)), epsilon = 1e-13);
        }
        m.check_topology().unwrap();
    }

    #[test]
    fn mesh_area_converges_to_annulus_area() {
        let m = generate_mesh(&annulus(), Resolution::new(8, 64)).unwrap();
        assert!((m.area() - 3.0 * PI).abs() / (3.0 * PI) < 0.01);
        // second-order: the inscribed polygons lose area ∝ n_theta⁻²
        let err = |n| (generate_mesh(&annulus(), Resolution::new(4, n)).unwrap().area() - 3.0 * PI).abs();
        let ratio = err(32) / err(64);
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn inadmissible_mesh_is_rejected() {
        let s = DomainSpec::new(1.0, vec![(0.5, 0.0)], 5.0).unwrap();
        assert!(matches!(generate_mesh(&s, Resolution::new(2, 16)), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn distance_examples() {
        let a = annulus();
        assert_eq!(domain_distance(&a, &a).unwrap(), 0.0);
        let b = DomainSpec::concentric(1.0, 2.3, 5.0).unwrap();
        assert_relative_eq!(domain_distance(&a, &b).unwrap(), 0.3, epsilon = 1e-14);
        let c = DomainSpec::new(1.0, vec![(2.0, 0.0), (0.1, 0.0)], 5.0).unwrap();
        assert_relative_eq!(domain_distance(&a, &c).unwrap(), 0.1, epsilon = 1e-14);
        let d = DomainSpec::concentric(1.5, 2.0, 5.0).unwrap();
        assert!(domain_distance(&a, &d).is_err());
    }

    #[test]
    fn shape_params_round_trip() {
        let s = DomainSpec::new(1.0, vec![(2.0, 9.0), (0.1, 0.2), (0.3, 0.4)], 5.0).unwrap();
        let p = s.shape_params();
        assert_eq!(p, vec![2.0, 0.1, 0.2, 0.3, 0.4]);
        let t = s.with_shape_params(&p).unwrap();
        assert_eq!(t.shape_params(), p);
        assert!(s.with_shape_params(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn text_export_header() {
        let m = generate_mesh_unchecked(&annulus(), 1, 4).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "nodes 8 triangles 8");
        assert_eq!(lines.len(), 1 + 8 + 8 + 1 + 4 + 1 + 4);
        assert_eq!(lines[17], "gamma_edges 4");
    }
}
