//! The acceptance suite behind `verify`.
//!
//! Every check is a free function returning a [`CheckResult`], so the suite
//! can also be driven piecemeal from tests. [`run_verify`] runs all of them
//! for one configuration.

use std::f64::consts::PI;
use std::sync::Arc;

use fracplasma::{
    apply_fractional, blowup, check_boundary_inclusion, check_subharmonic_strip, check_uy_sign, classify_point, dtn,
    extend_semianalytic, extract_free_boundary, frequency_profile, hessian_bound, minimize_energy, singular_census,
    solve_fixed_lambda, steiner_symmetrize, util::thomas, ClassifyOptions, Constraint, Domain64, EigenBasis64,
    ExtensionField64, FdExtension, PlasmaSolution64, Shape, SolverOptions, SpectralField64, Tag, YMesh,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{centers, radii_for, Context, RunError};
use crate::config::{DomainConfig, ExperimentConfig};
use crate::io::{prepare_dir, write_json};
use crate::problem::Problem;
use crate::report::{CheckBuilder, CheckResult, RunReport};

const ORDERS: [f64; 3] = [0.25, 0.5, 0.75];

/// Runs `body`, turning an error into a failure of the check.
fn guarded(name: &str, body: impl FnOnce(&mut CheckBuilder) -> fracplasma::Result<()>) -> CheckResult {
    let mut check = CheckBuilder::new(name);
    if let Err(e) = body(&mut check) {
        check.fail(e.to_string());
    }
    check.finish()
}

fn scaled_nodes(n: usize, refine: f64) -> usize {
    (((n - 1) as f64 * refine).round() as usize).max(2) + 1
}

fn scaled_layers(m: usize, refine: f64) -> usize {
    ((m as f64 * refine).round() as usize).max(8)
}

fn interval(start: f64, end: f64, n: usize) -> fracplasma::Result<Arc<Domain64>> {
    Ok(Arc::new(Domain64::build(Shape::Interval { start, end }, n)?))
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Seeded coefficients `r_k / (k + 1)` on the first `active` of `count` modes.
fn random_coefficients(rng: &mut ChaCha8Rng, count: usize, active: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            if k < active {
                rng.gen_range(-1.0..1.0) / (k as f64 + 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn tag(s: f64) -> String {
    format!("s{s}")
}

/// The D2N map of the semi-analytic extension reproduces the fractional
/// Laplacian, and the finite-difference extension converges to it.
pub fn d2n_equivalence(refine: f64, seed: u64) -> CheckResult {
    guarded("d2n_equivalence", |check| {
        let start = std::time::Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = random_coefficients(&mut rng, 20, 20);
        let n = scaled_nodes(256, refine);
        let layers = scaled_layers(200, refine);
        let d = interval(0.0, PI, n)?;
        let basis = Arc::new(EigenBasis64::new(Arc::clone(&d), 20)?);
        let u = SpectralField64::from_coefficients(Arc::clone(&basis), coeffs.clone())?;
        for s in ORDERS {
            let mesh = YMesh::for_order(s, basis.values()[0], 20.0, layers)?;
            let got = dtn(&extend_semianalytic(&u, s, &mesh)?)?;
            let want = apply_fractional(&u, s)?;
            let diff: Vec<f64> = got.iter().zip(want.nodal()).map(|(a, b)| a - b).collect();
            let rel = d.norm(&diff) / want.norm();
            check.require(format!("dtn_rel_error_{}", tag(s)), rel, rel <= 1e-5);
        }
        let levels: Vec<(usize, usize)> = [(64, 50), (128, 100), (256, 200)]
            .iter()
            .map(|&(n, m)| (scaled_nodes(n, refine), scaled_layers(m, refine)))
            .collect();
        for s in ORDERS {
            let mut gaps = Vec::new();
            for &(n, m) in &levels {
                let d = interval(0.0, PI, n)?;
                let basis = Arc::new(EigenBasis64::new(Arc::clone(&d), d.interior_len())?);
                let mut a = coeffs.clone();
                a.resize(basis.count(), 0.0);
                let u = SpectralField64::from_coefficients(Arc::clone(&basis), a)?;
                let mesh = YMesh::for_order(s, basis.values()[0], 20.0, m)?;
                let exact = extend_semianalytic(&u, s, &mesh)?;
                let fd = FdExtension::with_basis(Arc::clone(&basis), &mesh, s)?.solve(u.nodal())?;
                gaps.push(sup_distance(exact.values(), fd.values()));
            }
            let order = gaps
                .windows(2)
                .map(|g| (g[0] / g[1]).log2())
                .fold(f64::INFINITY, f64::min);
            check.measure(format!("fd_gap_finest_{}", tag(s)), gaps[2]);
            check.require(format!("fd_order_{}", tag(s)), order, order >= 1.0);
        }
        let t = start.elapsed().as_secs_f64();
        check.require("seconds", t, t < 30.0);
        Ok(())
    })
}

/// `A_{s1} A_{s2} = A_{s1+s2}` on random fields, and `A_1` is the stencil.
pub fn semigroup(seed: u64) -> CheckResult {
    guarded("semigroup", |check| {
        let start = std::time::Instant::now();
        let d = Arc::new(Domain64::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            33,
        )?);
        let basis = Arc::new(EigenBasis64::new(Arc::clone(&d), d.interior_len())?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut stencil: f64 = 0.0;
        for _ in 0..100 {
            let coeffs = (0..basis.count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = SpectralField64::from_coefficients(Arc::clone(&basis), coeffs)?;
            let s1 = rng.gen_range(0.01..0.5);
            let s2 = rng.gen_range(0.01..0.5);
            let lhs = apply_fractional(&apply_fractional(&u, s2)?, s1)?;
            let rhs = apply_fractional(&u, s1 + s2)?;
            let diff: Vec<f64> = lhs.nodal().iter().zip(rhs.nodal()).map(|(a, b)| a - b).collect();
            worst = worst.max(d.norm(&diff) / rhs.norm());
            let lap = d.laplacian(u.nodal());
            let one = apply_fractional(&u, 1.0)?;
            let diff: Vec<f64> = one.nodal().iter().zip(&lap).map(|(a, b)| a - b).collect();
            stencil = stencil.max(d.norm(&diff) / d.norm(&lap));
        }
        check.require("composition_rel_error", worst, worst <= 1e-10);
        check.require("stencil_rel_error", stencil, stencil <= 1e-9);
        let t = start.elapsed().as_secs_f64();
        check.require("seconds", t, t < 5.0);
        Ok(())
    })
}

/// Full-grid Newton solve of `-u'' = lambda (u - gamma)_+` on `(0, pi)` with
/// the three-point stencil, started from the continuum solution
/// `gamma + A cos(sqrt(lambda)(x - pi/2))` on the plasma and linear ramps
/// outside it.
pub fn newton_oracle(d: &Domain64, lambda: f64, gamma: f64) -> Option<Vec<f64>> {
    let n = d.interior_len();
    let h = d.h();
    let inv = 1.0 / (h * h);
    let root = lambda.sqrt();
    let ramp = (PI - PI / root) / 2.0;
    let amp = gamma / (ramp * root);
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let x = d.interior_position(i)[0];
            if (x - PI / 2.0).abs() < PI / (2.0 * root) {
                gamma + amp * (root * (x - PI / 2.0)).cos()
            } else {
                gamma * x.min(PI - x) / ramp
            }
        })
        .collect();
    for _ in 0..100 {
        let at = |u: &[f64], i: usize| if i < n { u[i] } else { 0.0 };
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { u[i - 1] };
                -((2.0 * u[i] - left - at(&u, i + 1)) * inv - lambda * (u[i] - gamma).max(0.0))
            })
            .collect();
        let diag: Vec<f64> = u
            .iter()
            .map(|&v| 2.0 * inv - if v > gamma { lambda } else { 0.0 })
            .collect();
        let off = vec![-inv; n - 1];
        thomas(&off, &diag, &off, &mut rhs)?;
        let step = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let before: Vec<bool> = u.iter().map(|&v| v > gamma).collect();
        for (v, dv) in u.iter_mut().zip(&rhs) {
            *v += dv;
        }
        let same = u.iter().zip(&before).all(|(&v, &b)| (v > gamma) == b);
        if same && step <= 1e-15 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            return Some(u);
        }
    }
    None
}

/// Picard on the interval at `s = 1/2`, and the `s = 1` solve against the
/// Newton oracle.
pub fn plasma_interval(refine: f64) -> CheckResult {
    guarded("plasma_interval", |check| {
        let start = std::time::Instant::now();
        let gamma = 0.1;
        let d = interval(0.0, PI, scaled_nodes(128, refine))?;
        let basis = Arc::new(EigenBasis64::new(Arc::clone(&d), d.interior_len())?);
        let opts = SolverOptions::default();
        let l1 = basis.values()[0];
        let half = solve_fixed_lambda(4.0 * l1.sqrt(), gamma, 0.5, &basis, &opts)?;
        check.require("residual_s0.5", half.residual, half.residual <= 1e-10);
        let one = solve_fixed_lambda(4.0 * l1, gamma, 1.0, &basis, &opts)?;
        match newton_oracle(&d, 4.0 * l1, gamma) {
            Some(oracle) => {
                let gap = sup_distance(one.u.nodal(), &oracle);
                check.require("newton_sup_gap_s1", gap, gap <= 1e-8);
            }
            None => check.fail("Newton oracle did not converge"),
        }
        let t = start.elapsed().as_secs_f64();
        check.require("seconds", t, t < 10.0);
        Ok(())
    })
}

/// A solved configuration with its extension.
#[derive(Debug, Clone)]
pub struct PlasmaCase {
    pub label: String,
    pub problem: Problem,
    pub solution: PlasmaSolution64,
    pub extension: ExtensionField64,
}

impl PlasmaCase {
    pub fn solve(label: impl Into<String>, config: &ExperimentConfig) -> fracplasma::Result<Self> {
        let problem = Problem::build(config)?;
        let solution = problem.solve()?;
        let extension = problem.extend(&solution.u)?;
        Ok(Self {
            label: label.into(),
            problem,
            solution,
            extension,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        self.solution.u.grid_values()
    }

    pub fn gamma(&self) -> f64 {
        self.solution.gamma
    }
}

/// No positive `y`-slopes in the extensions.
pub fn uy_sign(cases: &[PlasmaCase]) -> CheckResult {
    guarded("uy_sign", |check| {
        for c in cases {
            let r = check_uy_sign(&c.extension, 1e-8);
            check.measure(format!("max_slope_{}", c.label), r.max_slope);
            check.require(format!("violations_{}", c.label), r.violations.len() as f64, r.passed());
        }
        Ok(())
    })
}

/// Every point of `d{u < gamma}` lies within one cell of `d{u > gamma}`.
pub fn boundary_inclusion(cases: &[PlasmaCase]) -> CheckResult {
    guarded("boundary_inclusion", |check| {
        for c in cases {
            let r = check_boundary_inclusion(&c.problem.domain, &c.grid(), c.gamma())?;
            check.measure(format!("checked_{}", c.label), r.checked as f64);
            check.require(format!("violations_{}", c.label), r.violations.len() as f64, r.passed());
        }
        Ok(())
    })
}

/// `Delta u > 0` within `2h` of the free boundary; only meaningful for `s > 1/2`.
pub fn subharmonic_strip(case: &PlasmaCase) -> CheckResult {
    let s = case.problem.config.s;
    if s <= 0.5 {
        return CheckBuilder::new("subharmonic_strip").skip("requires s>1/2");
    }
    guarded("subharmonic_strip", |check| {
        let r = check_subharmonic_strip(&case.problem.domain, &case.grid(), case.gamma(), s)?;
        check.measure("checked", r.checked as f64);
        check.require("min_laplacian", r.min_laplacian, r.passed());
        Ok(())
    })
}

/// Frequencies of the homogeneous models and the rescaling identity.
pub fn frequency_models(refine: f64) -> CheckResult {
    guarded("frequency_models", |check| {
        let d = interval(-1.0, 1.0, scaled_nodes(200, refine))?;
        let mesh = YMesh::graded(1.0, scaled_layers(200, refine), 2.0)?;
        let lo = 10.0 * d.h();
        let hi: f64 = 0.4;
        let radii: Vec<f64> = (0..8).map(|i| lo * (hi / lo).powf(i as f64 / 7.0)).collect();
        let worst =
            |p: &fracplasma::FrequencyProfile64, target: f64| p.n.iter().fold(0.0f64, |m, n| m.max((n - target).abs()));
        for s in ORDERS {
            let a = 1.0 - 2.0 * s;
            let linear = ExtensionField64::synthetic(Arc::clone(&d), mesh.clone(), s, |p, _| p[0])?;
            let p = frequency_profile(&linear, [0.0, 0.0], &radii, 0.0)?;
            let e = worst(&p, 1.0);
            check.require(format!("linear_error_{}", tag(s)), e, e <= 0.02);
            let quad =
                ExtensionField64::synthetic(Arc::clone(&d), mesh.clone(), s, |p, y| p[0] * p[0] - y * y / (1.0 + a))?;
            let p = frequency_profile(&quad, [0.0, 0.0], &radii, 0.0)?;
            let e = worst(&p, 2.0);
            check.require(format!("quadratic_error_{}", tag(s)), e, e <= 0.02);
            let mixed = ExtensionField64::synthetic(Arc::clone(&d), mesh.clone(), s, |p, y| {
                p[0] * p[0] - y * y / (1.0 + a) + 0.3 * p[0] + 0.05
            })?;
            let p = frequency_profile(&mixed, [0.0, 0.0], &radii, 0.0)?;
            let mut gap: f64 = 0.0;
            for (r, n) in p.radii.iter().zip(&p.n) {
                gap = gap.max((blowup(&mixed, [0.0, 0.0], *r)?.frequency() - n).abs());
            }
            check.require(format!("rescale_gap_{}", tag(s)), gap, gap <= 1e-3);
        }
        Ok(())
    })
}

/// Monotonicity of the modified frequency on plasma solutions, at up to four
/// free-boundary points per case.
pub fn frequency_monotonicity(cases: &[PlasmaCase]) -> CheckResult {
    guarded("frequency_monotonicity", |check| {
        for c in cases {
            let w = c.extension.shifted(c.gamma());
            let fb = extract_free_boundary(&c.problem.domain, &c.grid(), c.gamma())?;
            let mut cfg = c.problem.config.clone();
            cfg.frequency.max_centers = 4;
            let mut violations = 0;
            let mut decrease: f64 = 0.0;
            let mut profiles = 0;
            for center in centers(&cfg, &fb) {
                let Some(radii) = radii_for(&cfg, &w, center) else {
                    continue;
                };
                let p = frequency_profile(&w, center, &radii, c.solution.lambda)?;
                violations += p.monotonicity_violations(1e-3).len();
                decrease = decrease.max(p.max_relative_decrease());
                profiles += 1;
            }
            if profiles == 0 {
                check.fail(format!("no admissible centre for {}", c.label));
            }
            check.measure(format!("max_relative_decrease_{}", c.label), decrease);
            check.require(format!("violations_{}", c.label), violations as f64, violations == 0);
        }
        Ok(())
    })
}

/// Exact models: linear is regular, the quadratic model a singular candidate
/// with the right `y^2` coefficient, the cubic unresolved with `N(0+) ~ 3`.
pub fn classification(refine: f64) -> CheckResult {
    guarded("classification", |check| {
        let d = interval(-1.0, 1.0, scaled_nodes(200, refine))?;
        let mesh = YMesh::graded(1.0, scaled_layers(200, refine), 2.0)?;
        let opts = ClassifyOptions::default();
        for s in [0.3, 0.5, 0.75] {
            let a = 1.0 - 2.0 * s;
            let label = tag(s);
            let field =
                |f: &dyn Fn([f64; 2], f64) -> f64| ExtensionField64::synthetic(Arc::clone(&d), mesh.clone(), s, f);
            let linear = classify_point(&field(&|p, _| p[0])?, [0.0, 0.0], 0.0, &opts)?;
            check.require(format!("linear_regular_{label}"), 0.0, linear.tag == Tag::Regular);
            let quad = classify_point(&field(&|p, y| p[0] * p[0] - y * y / (1.0 + a))?, [0.0, 0.0], 0.0, &opts)?;
            let c_err = quad.fit.map_or(f64::INFINITY, |f| (f.c - 1.0 / (1.0 + a)).abs());
            check.require(
                format!("quadratic_c_error_{label}"),
                c_err,
                quad.tag == Tag::SingularCandidate && c_err <= 0.02,
            );
            let cubic = classify_point(
                &field(&|p, y| p[0].powi(3) - 3.0 * p[0] * y * y / (1.0 + a))?,
                [0.0, 0.0],
                0.0,
                &opts,
            )?;
            let n0_err = cubic.n0.map_or(f64::INFINITY, |n| (n - 3.0).abs());
            check.require(
                format!("cubic_n0_error_{label}"),
                n0_err,
                cubic.tag == Tag::Unresolved && n0_err <= 0.15,
            );
        }
        Ok(())
    })
}

/// Symmetry of the constrained minimizer from a perturbed start, and Steiner
/// symmetrization of random fields.
///
/// Without a configured `c` the minimizer uses the constraint value of the
/// configured solution, which `reference` supplies.
pub fn symmetry(config: &ExperimentConfig, reference: Option<&PlasmaCase>, seed: u64) -> CheckResult {
    let problem = match Problem::build(config) {
        Ok(p) => p,
        Err(e) => {
            let mut check = CheckBuilder::new("symmetry");
            check.fail(e.to_string());
            return check.finish();
        }
    };
    let axes = problem.domain.symmetry_axes().to_vec();
    if axes.is_empty() {
        return CheckBuilder::new("symmetry").skip("domain has no symmetry axis");
    }
    guarded("symmetry", |check| {
        let d = &problem.domain;
        let gamma = config.gamma;
        let kind: Constraint = config.solver.constraint.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = match (config.c, reference) {
            (Some(c), _) => Some(c),
            (None, Some(r)) => Some(kind.evaluate(r.solution.u.nodal(), gamma, d.cell_volume())),
            (None, None) => None,
        };
        match target {
            Some(c) => {
                let mut opts = problem.options();
                let mut start = vec![0.0; problem.basis.count()];
                let peak = problem.basis.vector(0).iter().fold(0.0f64, |m, v| m.max(*v));
                start[0] = 2.0 * gamma / peak;
                for a in start.iter_mut().skip(1).take(10) {
                    *a = 0.1 * gamma / peak * rng.gen_range(-1.0..1.0);
                }
                opts.initial = Some(start);
                let sol = minimize_energy(c, gamma, config.s, &problem.basis, &opts)?;
                for axis in &axes {
                    let mirrored = d.reflect(*axis, sol.u.nodal())?;
                    let gap = sup_distance(sol.u.nodal(), &mirrored);
                    check.require(format!("reflection_gap_{axis:?}").to_lowercase(), gap, gap <= 1e-6);
                }
            }
            None => check.fail("no constraint value for the minimizer"),
        }
        let mut ratio: f64 = 0.0;
        let mut g_change: f64 = 0.0;
        for _ in 0..10 {
            let f: Vec<f64> = (0..d.interior_len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let e0 = problem.extension_energy(&f)?;
            let g0 = kind.evaluate(&f, gamma, d.cell_volume());
            for axis in &axes {
                let sym = steiner_symmetrize(d, &f, *axis)?;
                ratio = ratio.max(problem.extension_energy(&sym)? / e0);
                g_change = g_change.max((kind.evaluate(&sym, gamma, d.cell_volume()) - g0).abs());
            }
        }
        check.require("steiner_energy_ratio", ratio, ratio <= 1.0 + 1e-12);
        check.require("steiner_constraint_change", g_change, g_change == 0.0);
        Ok(())
    })
}

struct CensusCounts {
    singular: usize,
    regular: usize,
    unresolved: usize,
    cells: usize,
}

fn census_of(case: &PlasmaCase) -> fracplasma::Result<CensusCounts> {
    let fb = extract_free_boundary(&case.problem.domain, &case.grid(), case.gamma())?;
    let w = case.extension.shifted(case.gamma());
    let census = singular_census(&w, &fb, case.solution.lambda, &ClassifyOptions::default())?;
    Ok(CensusCounts {
        singular: census.singular_count(),
        regular: census.regular,
        unresolved: census.unresolved,
        cells: fb.crossing_cells,
    })
}

/// Singular-candidate count and free-boundary cell count under one grid
/// refinement of a two-dimensional solution.
pub fn singular_census_check(coarse: &PlasmaCase, fine: &PlasmaCase) -> CheckResult {
    if coarse.problem.domain.dim() != 2 {
        return CheckBuilder::new("singular_census").skip("requires a two-dimensional domain");
    }
    guarded("singular_census", |check| {
        let c = census_of(coarse)?;
        let f = census_of(fine)?;
        for (label, n) in [("coarse", &c), ("fine", &f)] {
            check.measure(format!("regular_{label}"), n.regular as f64);
            check.measure(format!("unresolved_{label}"), n.unresolved as f64);
            check.measure(format!("cells_{label}"), n.cells as f64);
        }
        check.measure("singular_coarse", c.singular as f64);
        check.require("singular_fine", f.singular as f64, c.singular == f.singular);
        let scaling = (f.cells as f64 / c.cells as f64) / (coarse.problem.domain.h() / fine.problem.domain.h());
        check.require("cell_scaling", scaling, (1.0 / 1.5..=1.5).contains(&scaling));
        Ok(())
    })
}

fn interior_hessian(case: &PlasmaCase) -> f64 {
    let d = &case.problem.domain;
    let bounds = d.grid_bounds();
    let dim = d.dim();
    let away = move |x: [f64; 2]| {
        (0..dim).all(|k| {
            let (lo, hi) = bounds[k];
            let margin = (hi - lo) / 8.0;
            x[k] - lo >= margin && hi - x[k] >= margin
        })
    };
    hessian_bound(d, &case.grid(), away)
}

/// Second differences of the solution away from the boundary stay bounded
/// under one refinement when `s > 1/2`.
pub fn regularity_proxy(coarse: &PlasmaCase, fine: &PlasmaCase) -> CheckResult {
    if coarse.problem.config.s <= 0.5 {
        return CheckBuilder::new("regularity_proxy").skip("requires s>1/2");
    }
    guarded("regularity_proxy", |check| {
        let b0 = interior_hessian(coarse);
        let b1 = interior_hessian(fine);
        check.measure("hessian_coarse", b0);
        check.measure("hessian_fine", b1);
        check.require("hessian_ratio", b1 / b0, b1 / b0 <= 1.2);
        Ok(())
    })
}

/// Two-dimensional configurations refine by halving `h`; others are unused.
fn refined_case(config: &ExperimentConfig) -> fracplasma::Result<PlasmaCase> {
    let fine = config
        .refined(2.0)
        .map_err(|e| fracplasma::Error::InvalidInput(e.to_string()))?;
    PlasmaCase::solve("fine", &fine)
}

fn failed(name: &str, why: &str) -> CheckResult {
    let mut check = CheckBuilder::new(name);
    check.fail(why);
    check.finish()
}

/// `verify`: the whole suite for one configuration. `refine` scales the
/// fixed-size checks the same way `--refine` scales the configuration.
pub fn run_verify(ctx: &Context, refine: f64, seed: u64) -> Result<RunReport, RunError> {
    prepare_dir(&ctx.out)?;
    let config = &ctx.config;
    Problem::build(config).map_err(|e| RunError::Invalid(e.to_string()))?;
    let mut report = RunReport::new("verify", config);
    let push = |report: &mut RunReport, c: CheckResult| {
        log::info!("{c}");
        report.checks.push(c);
    };
    push(&mut report, d2n_equivalence(refine, seed));
    push(&mut report, semigroup(seed));
    push(&mut report, plasma_interval(refine));

    let label = match config.domain {
        DomainConfig::Interval { .. } => "interval",
        DomainConfig::Rectangle { .. } => "rectangle",
        DomainConfig::Disk { .. } => "disk",
    };
    let case = report.timed("solve", || PlasmaCase::solve(label, config));
    let fine = match (&case, config.domain.dim()) {
        (Ok(_), 2) => Some(report.timed("solve_refined", || refined_case(config))),
        (Ok(_), _) if config.s > 0.5 => Some(report.timed("solve_refined", || refined_case(config))),
        _ => None,
    };
    match &case {
        Ok(case) => {
            let cases = std::slice::from_ref(case);
            push(&mut report, uy_sign(cases));
            push(&mut report, boundary_inclusion(cases));
            push(&mut report, subharmonic_strip(case));
        }
        Err(e) => {
            let why = format!("solver failed: {e}");
            for name in ["uy_sign", "boundary_inclusion", "subharmonic_strip"] {
                push(&mut report, failed(name, &why));
            }
        }
    }
    push(&mut report, frequency_models(refine));
    match &case {
        Ok(c) => push(&mut report, frequency_monotonicity(std::slice::from_ref(c))),
        Err(e) => push(
            &mut report,
            failed("frequency_monotonicity", &format!("solver failed: {e}")),
        ),
    }
    push(&mut report, classification(refine));
    push(&mut report, symmetry(config, case.as_ref().ok(), seed));
    for (name, run) in [
        (
            "singular_census",
            singular_census_check as fn(&PlasmaCase, &PlasmaCase) -> CheckResult,
        ),
        ("regularity_proxy", regularity_proxy),
    ] {
        let result = match (&case, &fine) {
            (Ok(c), Some(Ok(f))) => run(c, f),
            (Ok(c), None) => {
                let skip = CheckBuilder::new(name);
                if name == "singular_census" {
                    skip.skip("requires a two-dimensional domain")
                } else if c.problem.config.s <= 0.5 {
                    skip.skip("requires s>1/2")
                } else {
                    skip.skip("no refined solution")
                }
            }
            (Ok(_), Some(Err(e))) => failed(name, &format!("refined solve failed: {e}")),
            (Err(e), _) => failed(name, &format!("solver failed: {e}")),
        };
        push(&mut report, result);
    }
    write_json(&ctx.out.join("report.json"), &report)?;
    Ok(report)
}
