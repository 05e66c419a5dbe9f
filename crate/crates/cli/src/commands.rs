use std::f64::consts::TAU;

use bfb_core::audit::{
    audit_domain, concentric_family, estimate_pf_constant, estimate_trace_constant, random_fourier_family, uniform_bound_survey,
    AuditReport, PfEstimate, SurveyReport, TraceEstimate, SLACK_TOLERANCE,
};
use bfb_core::convergence::{convergence_study, ConvergenceRow};
use bfb_core::cost::{energy_gap, CostReport};
use bfb_core::fem::FemOperators;
use bfb_core::geometry::{generate_mesh, BoundaryPart, DomainSpec};
use bfb_core::optimize::{optimize_shape, Method, OptimStatus};
use bfb_core::state::{
    bernoulli_radius, radial_oracle_neumann, radial_oracle_robin, solve_state, FluxSign, PhysicsParams, StateKind,
};
use serde::Serialize;

use crate::config::{FamilyKind, Resolved};
use crate::output::{num, opt, OutputDir};
use crate::svg::{ramp_color, Axes, Chart, Series};
use crate::CliError;

const BOUNDARY_SAMPLES: usize = 256;

#[derive(Serialize)]
struct DomainSummary {
    inner_radius: f64,
    shape_params: Vec<f64>,
    holdall_radius: f64,
    holdall_area: f64,
    sigma_length: f64,
}

impl DomainSummary {
    fn of(s: &DomainSpec) -> Self {
        Self {
            inner_radius: s.inner_radius(),
            shape_params: s.shape_params(),
            holdall_radius: s.holdall_radius(),
            holdall_area: s.holdall_area(),
            sigma_length: s.boundary_measure(BoundaryPart::Sigma),
        }
    }
}

fn boundary_points(s: &DomainSpec) -> Vec<(f64, f64)> {
    (0..BOUNDARY_SAMPLES)
        .map(|i| {
            let t = TAU * i as f64 / BOUNDARY_SAMPLES as f64;
            let r = s.radius(t);
            (r * t.cos(), r * t.sin())
        })
        .collect()
}

fn circle(r: f64) -> Vec<(f64, f64)> {
    (0..BOUNDARY_SAMPLES)
        .map(|i| {
            let t = TAU * i as f64 / BOUNDARY_SAMPLES as f64;
            (r * t.cos(), r * t.sin())
        })
        .collect()
}

fn closed(label: &str, points: Vec<(f64, f64)>, color: &str) -> Series {
    Series { label: label.into(), points, color: Some(color.into()), closed: true }
}

// ---------------------------------------------------------------- solve

#[derive(Serialize)]
struct StateSummary {
    iterations: usize,
    relative_residual: f64,
    min: f64,
    max: f64,
    trace_integral: f64,
}

#[derive(Serialize)]
struct RadialCheck {
    neumann_coefficient: f64,
    robin_coefficient: f64,
    j_exact: f64,
    j_relative_error: f64,
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    domain: DomainSummary,
    physics: PhysicsParams,
    nodes: usize,
    triangles: usize,
    cost: CostReport,
    neumann: StateSummary,
    robin: StateSummary,
    /// Present for concentric domains.
    radial_oracle: Option<RadialCheck>,
}

pub fn solve(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let mesh = generate_mesh(&cfg.domain, cfg.resolution)?;
    let ops = FemOperators::new(&mesh)?;
    let un = solve_state(&ops, &mesh, &cfg.physics, StateKind::Neumann, cfg.solver)?;
    let ur = solve_state(&ops, &mesh, &cfg.physics, StateKind::Robin, cfg.solver)?;
    let cost = energy_gap(&mesh, &ops, &un, &ur)?;
    let summary = |s: &bfb_core::state::StateSolution| StateSummary {
        iterations: s.iterations,
        relative_residual: s.residual,
        min: s.u.iter().copied().fold(f64::INFINITY, f64::min),
        max: s.u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        trace_integral: ops.trace_integral(&s.u),
    };
    let radial_oracle = if cfg.domain.harmonic_norm() == 0.0 {
        let (a, r, g) = (cfg.domain.inner_radius(), cfg.domain.shape_params()[0], cfg.physics.datum());
        let cn = radial_oracle_neumann(a, r, g)?.coefficient;
        let cr = radial_oracle_robin(a, r, g, cfg.physics.beta)?.coefficient;
        let j_exact = TAU * (r / a).ln() * (cn - cr).powi(2);
        let j_relative_error = if j_exact > 0.0 { (cost.j - j_exact).abs() / j_exact } else { cost.j };
        Some(RadialCheck { neumann_coefficient: cn, robin_coefficient: cr, j_exact, j_relative_error })
    } else {
        None
    };
    let report = SolveReport {
        command: "solve",
        domain: DomainSummary::of(&cfg.domain),
        physics: cfg.physics,
        nodes: mesh.node_count(),
        triangles: mesh.triangle_count(),
        cost,
        neumann: summary(&un),
        robin: summary(&ur),
        radial_oracle,
    };
    out.write_json("report.json", &report)?;
    for (name, s) in [("neumann.csv", &un), ("robin.csv", &ur)] {
        let rows: Vec<Vec<String>> = mesh
            .nodes
            .iter()
            .zip(s.u.iter())
            .enumerate()
            .map(|(i, (p, u))| vec![i.to_string(), num(p[0]), num(p[1]), num(*u)])
            .collect();
        out.write_csv(name, &["node_index", "x", "y", "u"], &rows)?;
    }
    let mut text = Vec::new();
    mesh.write_text(&mut text)?;
    out.write("mesh.txt", &text)?;
    let chart = Chart {
        title: "Domain".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        axes: Axes::Equal,
        series: vec![
            closed("hold-all", circle(cfg.domain.holdall_radius()), "#999"),
            closed("Gamma", circle(cfg.domain.inner_radius()), "#d62728"),
            closed("Sigma", boundary_points(&cfg.domain), "#1f77b4"),
        ],
        legend: true,
    };
    out.write("domain.svg", chart.render().as_bytes())?;
    Ok(format!("J = {:.6e} ({} nodes)", report.cost.j, report.nodes))
}

// ---------------------------------------------------------------- optimize

#[derive(Serialize)]
struct Endpoint {
    coefficients: Vec<f64>,
    j: f64,
}

#[derive(Serialize)]
struct OptimizeReport {
    command: &'static str,
    method: Method,
    status: OptimStatus,
    physics: PhysicsParams,
    n_r: usize,
    n_theta: usize,
    accepted_steps: usize,
    records: usize,
    evaluations: usize,
    initial: Endpoint,
    r#final: Endpoint,
    max_harmonic_amplitude: f64,
    /// Root of `R ln(R/a) = 1/λ`; the optimum for `flux_sign = -1`.
    bernoulli_radius: f64,
    c0_relative_error: f64,
}

pub fn optimize(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let t = optimize_shape(&cfg.domain, &cfg.physics, &cfg.optimizer)?;
    let accepted: Vec<_> = t.records.iter().filter(|r| r.accepted).collect();
    let best = t.best();
    let r_star = bernoulli_radius(cfg.domain.inner_radius(), cfg.physics.lambda)?;
    let final_spec = t.final_spec()?;
    let max_harmonic_amplitude = final_spec.fourier()[1..].iter().map(|(c, s)| c.hypot(*s)).fold(0.0, f64::max);
    let report = OptimizeReport {
        command: "optimize",
        method: t.method,
        status: t.status,
        physics: cfg.physics,
        n_r: cfg.resolution.n_r,
        n_theta: cfg.resolution.n_theta,
        accepted_steps: accepted.len().saturating_sub(1),
        records: t.records.len(),
        evaluations: t.evaluations,
        initial: Endpoint { coefficients: t.records[0].coefficients.clone(), j: t.records[0].j },
        r#final: Endpoint { coefficients: best.coefficients.clone(), j: best.j },
        max_harmonic_amplitude,
        bernoulli_radius: r_star,
        c0_relative_error: (best.coefficients[0] - r_star).abs() / r_star,
    };
    out.write_json("report.json", &report)?;

    let n = best.coefficients.len();
    let mut header = vec!["iteration".to_string(), "accepted".into(), "j".into(), "measure".into(), "c0".into()];
    for k in 1..=(n - 1) / 2 {
        header.push(format!("cos{k}"));
        header.push(format!("sin{k}"));
    }
    let rows: Vec<Vec<String>> = t
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.iteration.to_string(), r.accepted.to_string(), num(r.j), opt(r.measure)];
            row.extend(r.coefficients.iter().map(|&c| num(c)));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("trajectory.csv", &header, &rows)?;

    let mut series = vec![closed("Gamma", circle(cfg.domain.inner_radius()), "#000")];
    let last = (accepted.len().max(2) - 1) as f64;
    for (k, r) in accepted.iter().enumerate() {
        let s = cfg.domain.with_shape_params(&r.coefficients)?;
        series.push(closed(&format!("iterate {}", r.iteration), boundary_points(&s), &ramp_color(k as f64 / last)));
    }
    series.push(Series { label: "R*".into(), points: circle(r_star), color: Some("#2ca02c".into()), closed: true });
    let chart = Chart {
        title: "Free boundary evolution (blue: start, red: final, green: R*)".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        axes: Axes::Equal,
        series,
        legend: false,
    };
    out.write("boundary.svg", chart.render().as_bytes())?;
    let chart = Chart {
        title: "Energy gap per accepted iterate".into(),
        x_label: "iteration".into(),
        y_label: "J".into(),
        axes: Axes::SemiLogY,
        series: vec![Series::new("J", accepted.iter().map(|r| (r.iteration as f64, r.j)).collect())],
        legend: false,
    };
    out.write("j_history.svg", chart.render().as_bytes())?;
    Ok(format!("{:?} after {} steps: J = {:.3e}, c0 = {:.6}", t.status, report.accepted_steps, best.j, best.coefficients[0]))
}

// ---------------------------------------------------------------- audit

#[derive(Serialize)]
struct AuditOutput<'a> {
    command: &'static str,
    physics: PhysicsParams,
    passed: bool,
    #[serde(flatten)]
    report: &'a AuditReport,
}

pub fn audit(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let r = audit_domain(&cfg.domain, &cfg.physics, cfg.resolution, &cfg.audit)?;
    let passed = r.check().is_ok();
    out.write_json("report.json", &AuditOutput { command: "audit", physics: cfg.physics, passed, report: &r })?;
    let c = &r.chain;
    let rows: Vec<Vec<String>> = c
        .links
        .iter()
        .map(|l| {
            vec![
                l.name.clone(),
                num(l.lhs),
                num(l.rhs),
                num(l.relative_slack),
                l.informational.to_string(),
                num(c.c1),
                num(c.c2),
                num(c.c3),
                num(c.c),
            ]
        })
        .collect();
    out.write_csv("chain.csv", &["link", "lhs", "rhs", "relative_slack", "informational", "c1", "c2", "c3", "c"], &rows)?;
    let rows: Vec<Vec<String>> = r
        .literal
        .iter()
        .zip(&r.literal_flux_mismatch)
        .map(|(l, m)| {
            vec![
                (l.flux_sign.value() as i64).to_string(),
                num(l.energy_lhs),
                num(l.energy_rhs),
                num(l.identity_residual),
                num(l.gamma_flux_ramp),
                num(l.gamma_flux_reaction),
                num(*m),
                num(l.true_sum),
                num(l.boxed_bound),
            ]
        })
        .collect();
    out.write_csv(
        "literal.csv",
        &[
            "flux_sign",
            "lhs",
            "rhs",
            "residual",
            "gamma_flux",
            "gamma_flux_reaction",
            "flux_mismatch",
            "quadratic_plus_linear",
            "boxed",
        ],
        &rows,
    )?;
    r.check()?;
    Ok(format!(
        "chain holds (min slack {:.3e}); ||u_R|| = {:.4} <= {:.4}; witness s = {}",
        c.min_slack(),
        c.u_h1,
        c.bound_u,
        r.witness.map(|w| format!("{:.3}", w.scale)).unwrap_or_else(|| "none".into())
    ))
}

// ---------------------------------------------------------------- pf

#[derive(Serialize)]
struct PfReport {
    command: &'static str,
    pf: PfEstimate,
    trace: TraceEstimate,
}

pub fn pf(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let mesh = generate_mesh(&cfg.domain, cfg.resolution)?;
    let ops = FemOperators::new(&mesh)?;
    let a = &cfg.audit;
    let pf = estimate_pf_constant(&mesh, &ops, a.certification_samples, a.seed, a.eigen)?;
    let trace = estimate_trace_constant(&mesh, &ops, a.certification_samples, a.seed, a.eigen)?;
    let msg = format!("C_pf = {:.6}, C_tr = {:.6}", pf.c_pf, trace.c_tr);
    out.write_json("report.json", &PfReport { command: "pf", pf, trace })?;
    Ok(msg)
}

// ---------------------------------------------------------------- convergence

#[derive(Serialize)]
struct ConvergenceReport {
    command: &'static str,
    inner_radius: f64,
    outer_radius: f64,
    physics: PhysicsParams,
    rows: Vec<ConvergenceRow>,
}

pub fn convergence(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let rows = convergence_study(&cfg.convergence, &cfg.physics)?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.n_r.to_string(),
                r.n_theta.to_string(),
                num(r.h),
                num(r.neumann_l2),
                num(r.neumann_h1),
                num(r.robin_l2),
                num(r.robin_h1),
                opt(r.neumann_l2_ratio),
                opt(r.neumann_h1_ratio),
                opt(r.robin_l2_ratio),
                opt(r.robin_h1_ratio),
            ]
        })
        .collect();
    out.write_csv(
        "convergence.csv",
        &[
            "n",
            "n_r",
            "n_theta",
            "h",
            "neumann_l2",
            "neumann_h1",
            "robin_l2",
            "robin_h1",
            "neumann_l2_ratio",
            "neumann_h1_ratio",
            "robin_l2_ratio",
            "robin_h1_ratio",
        ],
        &csv,
    )?;
    let series = |label: &str, f: fn(&ConvergenceRow) -> f64| Series::new(label, rows.iter().map(|r| (r.h, f(r))).collect());
    let chart = Chart {
        title: "Error against the radial solution".into(),
        x_label: "h".into(),
        y_label: "error".into(),
        axes: Axes::LogLog,
        series: vec![
            series("Neumann L2", |r| r.neumann_l2),
            series("Neumann H1", |r| r.neumann_h1),
            series("Robin L2", |r| r.robin_l2),
            series("Robin H1", |r| r.robin_h1),
        ],
        legend: true,
    };
    out.write("convergence.svg", chart.render().as_bytes())?;
    let last = rows.last().expect("at least one level");
    let msg = format!(
        "finest n = {}: L2 ratios {} / {}, H1 ratios {} / {}",
        last.n,
        opt(last.neumann_l2_ratio),
        opt(last.robin_l2_ratio),
        opt(last.neumann_h1_ratio),
        opt(last.robin_h1_ratio)
    );
    out.write_json(
        "report.json",
        &ConvergenceReport {
            command: "convergence",
            inner_radius: cfg.convergence.inner_radius,
            outer_radius: cfg.convergence.outer_radius,
            physics: cfg.physics,
            rows,
        },
    )?;
    Ok(msg)
}

// ---------------------------------------------------------------- survey

#[derive(Serialize)]
struct SurveyOutput<'a> {
    command: &'static str,
    family: FamilyKind,
    physics: PhysicsParams,
    n_r: usize,
    n_theta: usize,
    #[serde(flatten)]
    report: &'a SurveyReport,
}

pub fn survey(cfg: &Resolved, out: &mut OutputDir) -> Result<String, CliError> {
    let s = &cfg.raw.survey;
    let family = match s.family {
        FamilyKind::Concentric => concentric_family(cfg.domain.inner_radius(), &s.radii, cfg.domain.holdall_radius())?,
        FamilyKind::Random => random_fourier_family(&cfg.family)?,
    };
    if let Some((i, v)) = family.iter().enumerate().find_map(|(i, d)| {
        let v = d.validate_admissible(&cfg.limits);
        (!v.is_empty()).then_some((i, v))
    }) {
        return Err(CliError::Config(format!("survey member {i} is not admissible: {}", v[0])));
    }
    let r = uniform_bound_survey(&family, &cfg.physics, cfg.resolution, &cfg.audit)?;
    out.write_json(
        "report.json",
        &SurveyOutput {
            command: "survey",
            family: s.family,
            physics: cfg.physics,
            n_r: cfg.resolution.n_r,
            n_theta: cfg.resolution.n_theta,
            report: &r,
        },
    )?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|w| {
            vec![
                w.index.to_string(),
                num(w.c0),
                num(w.harmonic_norm),
                num(w.c_pf),
                num(w.c_tr),
                num(w.u_h1),
                num(w.bound_u),
                num(w.c),
                num(w.min_slack),
                num(w.identity_relative_residual),
                num(w.max_literal_flux_mismatch),
                opt(w.witness_scale),
            ]
        })
        .collect();
    out.write_csv(
        "survey.csv",
        &[
            "index",
            "c0",
            "harmonic_norm",
            "c_pf",
            "c_tr",
            "u_h1",
            "bound_u",
            "c",
            "min_slack",
            "identity_relative_residual",
            "literal_flux_mismatch",
            "witness_scale",
        ],
        &rows,
    )?;
    let chart = Chart {
        title: "Robin state norm against its bound".into(),
        x_label: "domain index".into(),
        y_label: "H1 norm".into(),
        axes: Axes::SemiLogY,
        series: vec![
            Series::new("||u_R||", r.rows.iter().map(|w| (w.index as f64, w.u_h1)).collect()),
            Series::new("bound", r.rows.iter().map(|w| (w.index as f64, w.bound_u)).collect()),
        ],
        legend: true,
    };
    out.write("survey.svg", chart.render().as_bytes())?;
    if r.min_slack < -SLACK_TOLERANCE || !r.bounded {
        let worst = r.rows.iter().min_by(|a, b| a.min_slack.total_cmp(&b.min_slack)).expect("nonempty");
        return Err(CliError::Slack(format!("domain {} has slack {:.3e}", worst.index, worst.min_slack)));
    }
    Ok(format!("{} domains: max ||u_R|| = {:.4} <= uniform bound {:.4}", r.rows.len(), r.max_u_h1, r.uniform_bound))
}

/// Literal-sign parameters for messages; the audit always covers both signs.
pub fn describe(p: &PhysicsParams) -> String {
    let sign = if p.flux_sign == FluxSign::Negative { "-" } else { "+" };
    format!("lambda = {}, beta = {}, g = {sign}lambda", p.lambda, p.beta)
}
