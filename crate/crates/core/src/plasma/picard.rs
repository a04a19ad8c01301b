//! Picard-type solvers.
//!
//! The plain fixed-`lambda` iteration `u <- A^{-s} P lambda (u - gamma)_+` is
//! unstable along the amplitude direction: it either collapses to `u = 0` or
//! blows up. The solvers here instead fix the amplitude `tau = max u` and
//! iterate `u <- tau z / max z` with `z = A^{-s} P (u - gamma)_+`, which
//! converges to a solution of the plasma equation whose multiplier
//! `lambda(tau) = tau / max z` is then matched to the target (fixed `lambda`
//! or constraint value `c`) by a scalar root-find in `ln(tau - gamma)`.

use std::sync::Arc;

use super::{check_problem, initial_coefficients, plasma_residual, PlasmaSolution, SolverOptions};
use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::fractional::{eigen_power, SpectralField};
use crate::scalar::{max_value, Real};
use crate::util::brent;

struct Normalized<T> {
    coeffs: Vec<T>,
    lambda: T,
    iterations: usize,
}

fn inner_tolerance<T: Real>(opts: &SolverOptions<T>) -> T {
    (opts.tolerance * T::lit(1e-4)).max(T::eps() * T::lit(64.0))
}

/// Damped amplitude-normalized fixed point at `max u = tau`.
fn normalized_fixed_point<T: Real>(
    basis: &EigenBasis<T>,
    s: T,
    gamma: T,
    tau: T,
    warm: &[T],
    opts: &SolverOptions<T>,
) -> Result<Normalized<T>> {
    let inv: Vec<T> = basis.values().iter().map(|&l| eigen_power(l, -s)).collect();
    let omega = opts.damping;
    let tol = inner_tolerance(opts);
    let mut a = warm.to_vec();
    let mut v = basis.synthesize(&a);
    let peak = max_value(&v);
    if !(peak > T::zero()) {
        return Err(Error::InvalidInput("initial guess must have a positive maximum".into()));
    }
    let scale = tau / peak;
    a.iter_mut().for_each(|x| *x *= scale);
    v.iter_mut().for_each(|x| *x *= scale);
    // best iterate so far; a node sitting exactly at gamma can leave the
    // iteration cycling at round-off amplitude around the fixed point
    let mut best: Option<(T, Vec<T>, T)> = None;
    let mut since_best = 0usize;
    let mut last_step = T::lit(f64::INFINITY);
    for it in 1..=opts.max_iterations {
        let rhs: Vec<T> = v.iter().map(|&x| (x - gamma).pos()).collect();
        let mut z = basis.project(&rhs)?;
        z.iter_mut().zip(&inv).for_each(|(x, &w)| *x *= w);
        let zn = basis.synthesize(&z);
        let m = max_value(&zn);
        if !(m > T::zero()) {
            return Err(Error::TrivialSolution {
                iterations: it,
                trace: vec![],
            });
        }
        let mu = tau / m;
        let mut step = T::zero();
        let mut norm = T::zero();
        for (x, &zk) in a.iter_mut().zip(&z) {
            let new = (T::one() - omega) * *x + omega * mu * zk;
            step += (new - *x) * (new - *x);
            norm += new * new;
            *x = new;
        }
        // re-synthesize periodically to keep the nodal copy from drifting
        if it % 64 == 0 {
            v = basis.synthesize(&a);
        } else {
            for (x, &zk) in v.iter_mut().zip(&zn) {
                *x = (T::one() - omega) * *x + omega * mu * zk;
            }
        }
        let rel = step.sqrt() / norm.sqrt();
        if rel <= tol {
            return Ok(Normalized {
                coeffs: a,
                lambda: mu,
                iterations: it,
            });
        }
        last_step = rel;
        if best.as_ref().is_none_or(|b| rel < b.0) {
            best = Some((rel, a.clone(), mu));
            since_best = 0;
        } else {
            since_best += 1;
        }
        let stalled = since_best >= 1000 || it == opts.max_iterations;
        if stalled && best.as_ref().is_some_and(|b| b.0 <= opts.tolerance) {
            let (_, coeffs, lambda) = best.expect("checked above");
            return Ok(Normalized {
                coeffs,
                lambda,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: last_step.as_f64(),
        trace: best.map(|b| vec![b.2.as_f64()]).unwrap_or_default(),
    })
}

/// Solution with prescribed amplitude `max u = tau > gamma` and its multiplier.
pub fn multiplier_for_amplitude<T: Real>(
    tau: T,
    gamma: T,
    s: T,
    basis: &Arc<EigenBasis<T>>,
    opts: &SolverOptions<T>,
) -> Result<(SpectralField<T>, T)> {
    check_problem(gamma, s)?;
    opts.validate()?;
    if !(tau > gamma) {
        return Err(Error::InvalidInput("amplitude must exceed gamma".into()));
    }
    let warm = initial_coefficients(basis, gamma, opts)?;
    let n = normalized_fixed_point(basis, s, gamma, tau, &warm, opts)?;
    Ok((SpectralField::from_coefficients(Arc::clone(basis), n.coeffs)?, n.lambda))
}

/// Evaluates a scalar function of the amplitude at `t = ln(tau - gamma)`,
/// warm-starting every inner solve from the previous one.
struct AmplitudeCurve<'a, T: Real> {
    basis: &'a Arc<EigenBasis<T>>,
    s: T,
    gamma: T,
    opts: &'a SolverOptions<T>,
    warm: Vec<T>,
    iterations: usize,
    /// `(t, lambda, coefficients)` of every evaluation.
    history: Vec<(T, T, Vec<T>)>,
    error: Option<Error>,
}

impl<'a, T: Real> AmplitudeCurve<'a, T> {
    fn eval(&mut self, t: T) -> Option<(T, &[T])> {
        if self.error.is_some() {
            return None;
        }
        let tau = self.gamma + t.exp();
        match normalized_fixed_point(self.basis, self.s, self.gamma, tau, &self.warm, self.opts) {
            Ok(n) => {
                self.iterations += n.iterations;
                self.warm.clone_from(&n.coeffs);
                self.history.push((t, n.lambda, n.coeffs));
                let last = self.history.last().expect("just pushed");
                Some((last.1, &last.2))
            }
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }

    /// Root of `f(lambda, coeffs)` in `t`, bracketing outward from `ln gamma`.
    fn root(&mut self, f: impl Fn(T, &[T]) -> T, tol: T) -> Result<Option<T>> {
        let step = T::lit(2.0).ln();
        let t0 = self.gamma.ln();
        let value = |curve: &mut Self, t: T| -> Option<T> { curve.eval(t).map(|(l, a)| f(l, a)) };
        let f0 = match value(self, t0) {
            Some(v) => v,
            None => return Err(self.error.take().expect("recorded error")),
        };
        // f is taken to be increasing in t; walk toward the sign change
        let dir = if f0 < T::zero() { T::one() } else { -T::one() };
        let (mut lo, mut flo) = (t0, f0);
        let mut bracket = None;
        for k in 1..=60 {
            let t = t0 + dir * step * T::from_count(k);
            let ft = match value(self, t) {
                Some(v) => v,
                None => return Err(self.error.take().expect("recorded error")),
            };
            if (ft > T::zero()) != (flo > T::zero()) || ft == T::zero() {
                bracket = Some(if dir > T::zero() { (lo, t) } else { (t, lo) });
                break;
            }
            lo = t;
            flo = ft;
        }
        let Some((a, b)) = bracket else {
            return Ok(None);
        };
        let root = brent(|t| value(self, t).unwrap_or(T::lit(f64::NAN)), a, b, tol, 200);
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        Ok(root)
    }

    fn solution_at(&mut self, t: T) -> Result<(Vec<T>, T)> {
        if let Some(h) = self.history.iter().find(|h| h.0 == t) {
            return Ok((h.2.clone(), h.1));
        }
        match self.eval(t) {
            Some((l, a)) => Ok((a.to_vec(), l)),
            None => Err(self.error.take().expect("recorded error")),
        }
    }
}

/// Plain damped Picard iteration at fixed `lambda`; used at or below the
/// bifurcation threshold, where it can only reach the trivial solution.
fn plain_picard<T: Real>(
    lambda: T,
    gamma: T,
    s: T,
    basis: &Arc<EigenBasis<T>>,
    opts: &SolverOptions<T>,
) -> Result<PlasmaSolution<T>> {
    let inv: Vec<T> = basis.values().iter().map(|&l| eigen_power(l, -s)).collect();
    let mut a = initial_coefficients(basis, gamma, opts)?;
    let omega = opts.damping;
    let mut trace = Vec::new();
    for it in 1..=opts.max_iterations {
        let u = SpectralField::from_coefficients(Arc::clone(basis), a.clone())?;
        let res = plasma_residual(&u, lambda, gamma, s);
        trace.push(res);
        let norm = u.norm();
        if norm <= opts.tolerance {
            return Err(Error::TrivialSolution {
                iterations: it,
                trace: trace.iter().map(|x| x.as_f64()).collect(),
            });
        }
        if res <= opts.tolerance {
            return Ok(PlasmaSolution {
                c: opts.constraint.evaluate(u.nodal(), gamma, basis.domain().cell_volume()),
                u,
                lambda,
                gamma,
                s,
                constraint: opts.constraint,
                residual: res,
                trace,
                iterations: it,
            });
        }
        let rhs = super::plasma_rhs(&u, gamma);
        let z = basis.project(&rhs)?;
        for ((x, &zk), &w) in a.iter_mut().zip(&z).zip(&inv) {
            *x = (T::one() - omega) * *x + omega * lambda * w * zk;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: trace.last().map_or(f64::NAN, |r| r.as_f64()),
        trace: trace.iter().map(|x| x.as_f64()).collect(),
    })
}

/// Solves `(-Delta)^s u = lambda (u - gamma)_+` at a prescribed multiplier.
///
/// For `lambda <= lambda_1^s` only the trivial solution exists and the damped
/// Picard iteration from the default guess collapses onto it, which is
/// reported as [`Error::TrivialSolution`].
pub fn solve_fixed_lambda<T: Real>(
    lambda: T,
    gamma: T,
    s: T,
    basis: &Arc<EigenBasis<T>>,
    opts: &SolverOptions<T>,
) -> Result<PlasmaSolution<T>> {
    check_problem(gamma, s)?;
    opts.validate()?;
    if !(lambda > T::zero()) {
        return Err(Error::InvalidInput(format!("multiplier {lambda} must be positive")));
    }
    let threshold = eigen_power(basis.values()[0], s);
    if lambda <= threshold {
        return plain_picard(lambda, gamma, s, basis, opts);
    }
    let mut curve = AmplitudeCurve {
        basis,
        s,
        gamma,
        opts,
        warm: initial_coefficients(basis, gamma, opts)?,
        iterations: 0,
        history: Vec::new(),
        error: None,
    };
    // lambda(tau) decreases with the amplitude
    let root = curve.root(|l, _| lambda - l, T::lit(1e-15))?;
    let trace_of = |curve: &AmplitudeCurve<T>| -> Vec<T> {
        curve
            .history
            .iter()
            .map(|h| {
                let u = SpectralField::from_coefficients(Arc::clone(basis), h.2.clone()).expect("basis size");
                plasma_residual(&u, lambda, gamma, s)
            })
            .collect()
    };
    let Some(t) = root else {
        let trace = trace_of(&curve);
        return Err(Error::NonConvergence {
            iterations: curve.iterations,
            residual: trace.last().map_or(f64::NAN, |r| r.as_f64()),
            trace: trace.iter().map(|r| r.as_f64()).collect(),
        });
    };
    let (coeffs, _) = curve.solution_at(t)?;
    let mut trace = trace_of(&curve);
    let u = SpectralField::from_coefficients(Arc::clone(basis), coeffs)?;
    let residual = plasma_residual(&u, lambda, gamma, s);
    trace.push(residual);
    if !(residual <= opts.tolerance) {
        return Err(Error::NonConvergence {
            iterations: curve.iterations,
            residual: residual.as_f64(),
            trace: trace.iter().map(|r| r.as_f64()).collect(),
        });
    }
    Ok(PlasmaSolution {
        c: opts.constraint.evaluate(u.nodal(), gamma, basis.domain().cell_volume()),
        u,
        lambda,
        gamma,
        s,
        constraint: opts.constraint,
        residual,
        trace,
        iterations: curve.iterations,
    })
}

/// Solves the plasma problem with the multiplier chosen so that `G(u) = c`.
pub fn solve_constrained<T: Real>(
    c: T,
    gamma: T,
    s: T,
    basis: &Arc<EigenBasis<T>>,
    opts: &SolverOptions<T>,
) -> Result<PlasmaSolution<T>> {
    check_problem(gamma, s)?;
    opts.validate()?;
    if !(c > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "constraint value c = {c} must be positive"
        )));
    }
    let vol = basis.domain().cell_volume();
    let kind = opts.constraint;
    let g_of = |a: &[T]| kind.evaluate(&basis.synthesize(a), gamma, vol);
    let mut curve = AmplitudeCurve {
        basis,
        s,
        gamma,
        opts,
        warm: initial_coefficients(basis, gamma, opts)?,
        iterations: 0,
        history: Vec::new(),
        error: None,
    };
    let threshold = eigen_power(basis.values()[0], s);
    let lo = threshold * opts.lambda_bracket.0;
    let hi = threshold * opts.lambda_bracket.1;
    let root = curve.root(|_, a| (g_of(a) - c) / c, T::lit(1e-15))?;
    let samples = |curve: &AmplitudeCurve<T>| -> Vec<(f64, f64)> {
        curve
            .history
            .iter()
            .map(|h| (h.1.as_f64(), g_of(&h.2).as_f64()))
            .collect()
    };
    let Some(t) = root else {
        return Err(Error::BracketNotFound {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            samples: samples(&curve),
        });
    };
    let (coeffs, lambda) = curve.solution_at(t)?;
    if lambda < lo || lambda > hi {
        return Err(Error::BracketNotFound {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            samples: samples(&curve),
        });
    }
    let u = SpectralField::from_coefficients(Arc::clone(basis), coeffs)?;
    let g = kind.evaluate(u.nodal(), gamma, vol);
    let residual = plasma_residual(&u, lambda, gamma, s);
    let trace: Vec<T> = curve.history.iter().map(|h| (g_of(&h.2) - c).abs() / c).collect();
    if (g - c).abs() > opts.constraint_tolerance * c || !(residual <= opts.tolerance) {
        return Err(Error::NonConvergence {
            iterations: curve.iterations,
            residual: residual.as_f64(),
            trace: trace.iter().map(|r| r.as_f64()).collect(),
        });
    }
    Ok(PlasmaSolution {
        u,
        lambda,
        gamma,
        s,
        c: g,
        constraint: kind,
        residual,
        trace,
        iterations: curve.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eigendecompose;
    use crate::domain::{Domain, Shape};
    use crate::fractional::project;
    use crate::plasma::Constraint;
    use std::f64::consts::PI;

    fn basis(n: usize) -> Arc<EigenBasis<f64>> {
        let d = Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, n).unwrap();
        Arc::new(eigendecompose(&d, n - 2).unwrap())
    }

    #[test]
    fn fixed_lambda_converges_and_reports_residual() {
        let b = basis(65);
        let s = 0.5;
        let lam = 4.0 * b.values()[0].powf(s);
        let sol = solve_fixed_lambda(lam, 0.1, s, &b, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-10, "{}", sol.residual);
        assert!(sol.max_value() > 0.1);
        let direct = plasma_residual(&sol.u, lam, 0.1, s);
        assert_eq!(direct, sol.residual);
    }

    #[test]
    fn below_threshold_collapses() {
        let b = basis(33);
        let s = 0.6;
        let l1 = b.values()[0].powf(s);
        for factor in [0.5, 0.9, 1.0] {
            let err = solve_fixed_lambda(factor * l1, 0.2, s, &b, &SolverOptions::default()).unwrap_err();
            assert!(matches!(err, Error::TrivialSolution { .. }), "{factor}: {err:?}");
        }
    }

    #[test]
    fn scaling_gamma_scales_solution() {
        let b = basis(49);
        let s = 0.7;
        let lam = 3.0 * b.values()[0].powf(s);
        let sol = solve_fixed_lambda(lam, 0.1, s, &b, &SolverOptions::default()).unwrap();
        for t in [0.5, 3.0] {
            let scaled = sol.u.scaled(t);
            assert!(plasma_residual(&scaled, lam, 0.1 * t, s) <= 1e-10 * t.max(1.0));
        }
    }

    #[test]
    fn constrained_solve_hits_target_and_is_consistent() {
        let b = basis(65);
        let s = 0.5;
        let opts = SolverOptions::default();
        let sol = solve_constrained(1e-3, 0.1, s, &b, &opts).unwrap();
        assert!((sol.c - 1e-3).abs() <= 1e-9);
        let again = solve_fixed_lambda(sol.lambda, 0.1, s, &b, &opts).unwrap();
        let diff = again
            .u
            .nodal()
            .iter()
            .zip(sol.u.nodal())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn small_constraint_values_shrink_the_plasma() {
        let b = basis(65);
        let mut excess = Vec::new();
        for c in [1e-2, 1e-3, 1e-4] {
            let sol = solve_constrained(c, 0.1, 0.5, &b, &SolverOptions::default()).unwrap();
            excess.push(sol.max_value() - 0.1);
        }
        assert!(excess.windows(2).all(|w| w[1] < w[0]), "{excess:?}");
    }

    #[test]
    fn bracket_failure_reports_samples() {
        let b = basis(33);
        let opts = SolverOptions {
            lambda_bracket: (1.0, 1.01),
            ..Default::default()
        };
        match solve_constrained(1e-4, 0.1, 0.5, &b, &opts) {
            Err(Error::BracketNotFound { samples, .. }) => assert!(!samples.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linear_constraint_switch() {
        let b = basis(33);
        let opts = SolverOptions {
            constraint: Constraint::Linear,
            ..Default::default()
        };
        let sol = solve_constrained(1e-2, 0.1, 0.5, &b, &opts).unwrap();
        assert!((Constraint::Linear.evaluate(sol.u.nodal(), 0.1, b.domain().cell_volume()) - 1e-2).abs() < 1e-8);
        let u = project(sol.u.nodal(), &b).unwrap();
        assert!(plasma_residual(&u, sol.lambda, 0.1, 0.5) < 1e-10);
    }
}
