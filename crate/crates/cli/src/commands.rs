//! The `solve`, `frequency`, `blowup` and `symmetrize` subcommands.

use std::path::{Path, PathBuf};

use fracplasma::{
    blowup, classify_point, extract_free_boundary, frequency_profile, steiner_symmetrize, Axis, ClassifyOptions,
    Constraint, ExtensionField64, FreeBoundary64, SpectralField64, Tag,
};
use log::{info, warn};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::io::{fmt17, prepare_dir, thin_header, thin_row, write_csv, write_json};
use crate::problem::{Problem, SolutionArtifact};
use crate::report::{CheckBuilder, FreeBoundarySummary, RunReport, SolverOutcome};

/// Failure of a command before a report could be produced.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or arguments (exit status 2).
    Invalid(String),
    /// Anything else, such as I/O (exit status 1).
    Failed(anyhow::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Invalid(m) => write!(f, "invalid input: {m}"),
            RunError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Failed(e)
    }
}

impl From<crate::config::ConfigError> for RunError {
    fn from(e: crate::config::ConfigError) -> Self {
        RunError::Invalid(e.to_string())
    }
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: Option<PathBuf>) -> Self {
        let out = out
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Self { config, out }
    }

    fn problem(&self) -> Result<Problem, RunError> {
        Problem::build(&self.config).map_err(|e| RunError::Invalid(e.to_string()))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn outcome(problem: &Problem, result: &fracplasma::Result<fracplasma::PlasmaSolution64>) -> SolverOutcome {
    match result {
        Ok(sol) => SolverOutcome {
            converged: true,
            lambda: Some(sol.lambda),
            lambda_1: problem.lambda_1(),
            c: Some(sol.c),
            residual: Some(sol.residual),
            iterations: Some(sol.iterations),
            max_u: Some(sol.max_value()),
            error: None,
        },
        Err(e) => SolverOutcome {
            converged: false,
            lambda: None,
            lambda_1: problem.lambda_1(),
            c: None,
            residual: None,
            iterations: None,
            max_u: None,
            error: Some(e.to_string()),
        },
    }
}

fn summary(fb: &FreeBoundary64) -> FreeBoundarySummary {
    FreeBoundarySummary {
        points: fb.points.len(),
        chains: fb.chains.len(),
        crossing_cells: fb.crossing_cells,
        degenerate_cells: fb.degenerate_cells,
        regular_by_gradient: fb.count(Tag::Regular),
        gradient_threshold: fb.gradient_threshold,
    }
}

fn write_thin(path: &Path, problem: &Problem, values: &[f64]) -> anyhow::Result<()> {
    let d = &problem.domain;
    let dim = d.dim();
    write_csv(
        path,
        &thin_header(dim),
        (0..d.grid_len()).map(|g| thin_row(dim, d.position(g), &[values[g]])),
    )
}

/// Layers `0, 1, 2, 4, ...` and the top layer of the extension.
fn write_extension(path: &Path, problem: &Problem, w: &ExtensionField64) -> anyhow::Result<()> {
    let d = &problem.domain;
    let dim = d.dim();
    let m = w.mesh().layers();
    let mut layers = vec![0];
    let mut j = 1;
    while j < m {
        layers.push(j);
        j *= 2;
    }
    layers.push(m);
    let mut header = thin_header(dim);
    header.insert(dim, "y");
    let ys = w.mesh().nodes();
    let rows = layers.into_iter().flat_map(|j| {
        let layer = w.layer(j);
        (0..d.grid_len()).map(move |g| thin_row(dim, d.position(g), &[ys[j], layer[g]]))
    });
    write_csv(path, &header, rows)
}

/// The stored solution when it matches the configuration, otherwise a
/// fresh solve (which is then stored).
fn obtain_solution(
    ctx: &Context,
    problem: &Problem,
    report: &mut RunReport,
) -> Result<Option<(SpectralField64, f64)>, RunError> {
    let path = ctx.path("solution.json");
    if let Ok(art) = SolutionArtifact::load(&path) {
        if art.matches(problem) {
            info!("reusing {}", path.display());
            let u = art.field(problem).map_err(|e| RunError::Invalid(e.to_string()))?;
            return Ok(Some((u, art.lambda)));
        }
        warn!("{} does not match the configuration; solving again", path.display());
    }
    let result = report.timed("solve", || problem.solve());
    report.solver = Some(outcome(problem, &result));
    match result {
        Ok(sol) => {
            write_json(&path, &SolutionArtifact::new(problem, &sol))?;
            Ok(Some((sol.u.clone(), sol.lambda)))
        }
        Err(e) => {
            warn!("solver failed: {e}");
            Ok(None)
        }
    }
}

/// `solve`: the thin solution, extension slices, metadata and report.
pub fn run_solve(ctx: &Context) -> Result<RunReport, RunError> {
    prepare_dir(&ctx.out)?;
    let problem = ctx.problem()?;
    let mut report = RunReport::new("solve", &ctx.config);
    let result = report.timed("solve", || problem.solve());
    report.solver = Some(outcome(&problem, &result));
    if let Ok(sol) = &result {
        let grid = sol.u.grid_values();
        write_thin(&ctx.path("u.csv"), &problem, &grid)?;
        write_json(&ctx.path("solution.json"), &SolutionArtifact::new(&problem, sol))?;
        let w = report
            .timed("extension", || problem.extend(&sol.u))
            .map_err(|e| RunError::Failed(e.into()))?;
        write_extension(&ctx.path("extension.csv"), &problem, &w)?;
        let fb = extract_free_boundary(&problem.domain, &grid, sol.gamma).map_err(|e| RunError::Failed(e.into()))?;
        report.free_boundary = Some(summary(&fb));
    }
    write_json(&ctx.path("report.json"), &report)?;
    Ok(report)
}

/// Centres from the configuration or evenly spaced free-boundary points.
pub(crate) fn centers(cfg: &ExperimentConfig, fb: &FreeBoundary64) -> Vec<[f64; 2]> {
    if let Some(c) = &cfg.frequency.centers {
        return c.clone();
    }
    let n = fb.points.len();
    let k = cfg.frequency.max_centers.min(n);
    (0..k).map(|i| fb.points[i * n / k].position).collect()
}

/// Geometric radii around `center`, or `None` when the centre is outside
/// the grid or has no room.
pub(crate) fn radii_for(cfg: &ExperimentConfig, w: &ExtensionField64, center: [f64; 2]) -> Option<Vec<f64>> {
    let d = w.domain();
    let mut room = w.mesh().height();
    for (k, b) in d.grid_bounds().iter().enumerate().take(d.dim()) {
        if center[k] < b.0 || center[k] > b.1 {
            return None;
        }
        room = room.min(center[k] - b.0).min(b.1 - center[k]);
    }
    let f = &cfg.frequency;
    let lo = f.min_radius_cells * d.h();
    let hi = f.max_radius_fraction * room;
    if !(hi > lo) {
        return None;
    }
    let m = f.radii;
    Some((0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect())
}

fn tag_name(t: Tag) -> &'static str {
    match t {
        Tag::Regular => "regular",
        Tag::SingularCandidate => "singular_candidate",
        Tag::Unresolved => "unresolved",
    }
}

#[derive(Debug, Serialize)]
struct ProfileSummary {
    index: usize,
    center: [f64; 2],
    radii: usize,
    n0: Option<f64>,
    classification: &'static str,
    monotonicity_violations: usize,
    max_relative_decrease: f64,
    sandwich_c: f64,
    truncated: bool,
}

/// Shared set-up of `frequency` and `blowup`: solution, shifted extension
/// and centres.
struct Analysis {
    problem: Problem,
    w: ExtensionField64,
    lambda: f64,
    centers: Vec<[f64; 2]>,
}

fn analyse(ctx: &Context, report: &mut RunReport) -> Result<Option<Analysis>, RunError> {
    prepare_dir(&ctx.out)?;
    let problem = ctx.problem()?;
    let Some((u, lambda)) = obtain_solution(ctx, &problem, report)? else {
        return Ok(None);
    };
    let gamma = ctx.config.gamma;
    let fb = extract_free_boundary(&problem.domain, &u.grid_values(), gamma).map_err(|e| RunError::Failed(e.into()))?;
    report.free_boundary = Some(summary(&fb));
    let w = report
        .timed("extension", || problem.extend(&u))
        .map_err(|e| RunError::Failed(e.into()))?
        .shifted(gamma);
    let centers = centers(&ctx.config, &fb);
    Ok(Some(Analysis {
        problem,
        w,
        lambda,
        centers,
    }))
}

/// `frequency`: one profile per centre, a combined table and a summary.
pub fn run_frequency(ctx: &Context) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("frequency", &ctx.config);
    let mut combined = Vec::new();
    let mut summaries = Vec::new();
    if let Some(a) = analyse(ctx, &mut report)? {
        let start = std::time::Instant::now();
        for (k, &center) in a.centers.iter().enumerate() {
            let Some(radii) = radii_for(&ctx.config, &a.w, center) else {
                warn!("centre {center:?} is outside the domain or too close to its edge; skipped");
                continue;
            };
            let p = frequency_profile(&a.w, center, &radii, a.lambda).map_err(|e| RunError::Failed(e.into()))?;
            let rows: Vec<Vec<f64>> = (0..p.len())
                .map(|i| vec![p.radii[i], p.energy[i], p.height[i], p.n[i], p.n_tilde[i]])
                .collect();
            write_csv(
                &ctx.path(&format!("frequency_{k}.csv")),
                &["r", "D", "H", "N", "N_tilde"],
                rows.clone(),
            )?;
            combined.extend(rows.into_iter().map(|mut r| {
                r.insert(0, k as f64);
                r
            }));
            let class = classify_point(&a.w, center, a.lambda, &ClassifyOptions::default())
                .map_err(|e| RunError::Failed(e.into()))?;
            summaries.push(ProfileSummary {
                index: k,
                center,
                radii: p.len(),
                n0: p.n0,
                classification: tag_name(class.tag),
                monotonicity_violations: p.monotonicity_violations(1e-3).len(),
                max_relative_decrease: p.max_relative_decrease(),
                sandwich_c: p.sandwich_c,
                truncated: p.truncated,
            });
        }
        report.timings.insert("profiles".into(), start.elapsed().as_secs_f64());
    }
    write_csv(
        &ctx.path("frequency.csv"),
        &["center", "r", "D", "H", "N", "N_tilde"],
        combined,
    )?;
    write_json(&ctx.path("frequency.json"), &summaries)?;
    write_json(&ctx.path("report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct BlowupSummary {
    index: usize,
    center: [f64; 2],
    r: f64,
    normalization: f64,
    boundary_norm: f64,
    frequency: f64,
    fit_p: Option<[f64; 3]>,
    fit_c: Option<f64>,
    fit_residual: Option<f64>,
}

/// `blowup`: the rescaled field on the unit half-ball for each centre.
pub fn run_blowup(ctx: &Context) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("blowup", &ctx.config);
    let mut summaries = Vec::new();
    if let Some(a) = analyse(ctx, &mut report)? {
        let dim = a.problem.domain.dim();
        for (k, &center) in a.centers.iter().enumerate() {
            let Some(radii) = radii_for(&ctx.config, &a.w, center) else {
                warn!("centre {center:?} is outside the domain or too close to its edge; skipped");
                continue;
            };
            let r = ctx.config.frequency.blowup_radius.unwrap_or(radii[0]);
            let b = match blowup(&a.w, center, r) {
                Ok(b) => b,
                Err(e) => {
                    warn!("blow-up at {center:?} rejected: {e}");
                    continue;
                }
            };
            let mut header = thin_header(dim);
            header[0] = "xi";
            if dim == 2 {
                header[1] = "xi2";
            }
            header.insert(dim, "eta");
            let rows = b.grid.iter().map(|(p, v)| thin_row(dim, [p[0], p[1]], &[p[2], *v]));
            write_csv(&ctx.path(&format!("blowup_{k}.csv")), &header, rows)?;
            let fit = b.fit_quadratic();
            summaries.push(BlowupSummary {
                index: k,
                center,
                r,
                normalization: b.normalization,
                boundary_norm: b.boundary_norm(),
                frequency: b.frequency(),
                fit_p: fit.map(|f| f.p),
                fit_c: fit.map(|f| f.c),
                fit_residual: fit.map(|f| f.residual),
            });
        }
    }
    write_json(&ctx.path("blowup.json"), &summaries)?;
    write_json(&ctx.path("report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct SymmetrizeSummary {
    axis: &'static str,
    energy_before: f64,
    energy_after: f64,
    constraint_before: String,
    constraint_after: String,
}

/// `symmetrize`: Steiner symmetrization of the solution about every
/// symmetry axis of the domain, with energy and constraint before and after.
pub fn run_symmetrize(ctx: &Context) -> Result<RunReport, RunError> {
    prepare_dir(&ctx.out)?;
    let problem = ctx.problem()?;
    let mut report = RunReport::new("symmetrize", &ctx.config);
    let mut summaries = Vec::new();
    if let Some((u, _)) = obtain_solution(ctx, &problem, &mut report)? {
        let d = &problem.domain;
        let gamma = ctx.config.gamma;
        let kind: Constraint = ctx.config.solver.constraint.into();
        let energy = |f: &[f64]| problem.extension_energy(f).map_err(|e| RunError::Failed(e.into()));
        let e0 = energy(u.nodal())?;
        let g0 = kind.evaluate(u.nodal(), gamma, d.cell_volume());
        let mut energy_check = CheckBuilder::new("steiner_energy");
        let mut constraint_check = CheckBuilder::new("steiner_constraint");
        let axes: Vec<Axis> = d.symmetry_axes().to_vec();
        for axis in &axes {
            let name = if *axis == Axis::X { "x" } else { "y" };
            let sym = steiner_symmetrize(d, u.nodal(), *axis).map_err(|e| RunError::Failed(e.into()))?;
            let e1 = energy(&sym)?;
            let g1 = kind.evaluate(&sym, gamma, d.cell_volume());
            energy_check.require(format!("energy_ratio_{name}"), e1 / e0, e1 <= e0 * (1.0 + 1e-12));
            constraint_check.require(format!("constraint_change_{name}"), (g1 - g0).abs(), g1 == g0);
            write_thin(&ctx.path(&format!("symmetrized_{name}.csv")), &problem, &d.embed(&sym))?;
            summaries.push(SymmetrizeSummary {
                axis: name,
                energy_before: e0,
                energy_after: e1,
                constraint_before: fmt17(g0),
                constraint_after: fmt17(g1),
            });
        }
        if axes.is_empty() {
            report.checks.push(energy_check.skip("domain has no symmetry axis"));
            report.checks.push(constraint_check.skip("domain has no symmetry axis"));
        } else {
            report.checks.push(energy_check.finish());
            report.checks.push(constraint_check.finish());
        }
    }
    write_json(&ctx.path("symmetrize.json"), &summaries)?;
    write_json(&ctx.path("report.json"), &report)?;
    Ok(report)
}

/// Exit status for a finished report: 0 when everything passed, 1 otherwise.
pub fn exit_status(report: &RunReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}
