use std::sync::Arc;

use super::{check_problem, plasma_residual, Constraint, PlasmaSolution, SolverOptions};
use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::fractional::{eigen_power, SpectralField};
use crate::scalar::{max_value, Real};
use crate::util::brent;

struct State<T> {
    a: Vec<T>,
    g: T,
    /// `P (u - gamma)_+` (quadratic) or `P 1_{u > gamma}` (linear).
    grad_g: Vec<T>,
    energy: T,
}

struct Problem<'a, T: Real> {
    basis: &'a EigenBasis<T>,
    pow: Vec<T>,
    gamma: T,
    c: T,
    kind: Constraint,
    vol: T,
}

impl<T: Real> Problem<'_, T> {
    fn state(&self, a: Vec<T>) -> Result<State<T>> {
        let nodal = self.basis.synthesize(&a);
        let g = self.kind.evaluate(&nodal, self.gamma, self.vol);
        let dens: Vec<T> = nodal
            .iter()
            .map(|&v| match self.kind {
                Constraint::Quadratic => (v - self.gamma).pos(),
                Constraint::Linear if v > self.gamma => T::lit(0.5),
                Constraint::Linear => T::zero(),
            })
            .collect();
        let grad_g = self.basis.project(&dens)?;
        let energy = a.iter().zip(&self.pow).fold(T::zero(), |acc, (&x, &p)| acc + p * x * x);
        Ok(State { a, g, grad_g, energy })
    }

    /// Least-squares multiplier `mu` minimizing `||Lambda^s a - mu grad_g||`
    /// in the `Lambda^{-s}` metric.
    fn multiplier(&self, st: &State<T>) -> T {
        let (num, den) =
            st.a.iter()
                .zip(&st.grad_g)
                .zip(&self.pow)
                .fold((T::zero(), T::zero()), |(n, d), ((&x, &q), &p)| {
                    (n + x * q, d + q * q / p)
                });
        if den > T::zero() {
            num / den
        } else {
            T::zero()
        }
    }

    /// Tangential descent direction `-a + mu Lambda^{-s} grad_g`.
    fn direction(&self, st: &State<T>, mu: T) -> Vec<T> {
        st.a.iter()
            .zip(&st.grad_g)
            .zip(&self.pow)
            .map(|((&x, &q), &p)| -x + mu * q / p)
            .collect()
    }

    /// `||Lambda^s a - mu grad_g||`.
    fn stationarity(&self, st: &State<T>, mu: T) -> T {
        st.a.iter()
            .zip(&st.grad_g)
            .zip(&self.pow)
            .fold(T::zero(), |acc, ((&x, &q), &p)| {
                let r = p * x - mu * q;
                acc + r * r
            })
            .sqrt()
    }

    /// Rescales `a` so that `G = c`.
    fn make_feasible(&self, a: &[T]) -> Result<Vec<T>> {
        let nodal = self.basis.synthesize(a);
        let peak = max_value(&nodal);
        if !(peak > T::zero()) {
            return Err(Error::InvalidInput("initial guess must have a positive maximum".into()));
        }
        let g_at = |t: T| {
            self.kind
                .evaluate(&nodal.iter().map(|&v| v * t).collect::<Vec<_>>(), self.gamma, self.vol)
                - self.c
        };
        let lo = self.gamma / peak;
        let mut hi = lo * T::lit(2.0);
        let mut guard = 0;
        while g_at(hi) < T::zero() {
            hi *= T::lit(2.0);
            guard += 1;
            if guard > 200 {
                return Err(Error::InvalidInput(
                    "constraint value unreachable from the initial guess".into(),
                ));
            }
        }
        let t = brent(g_at, lo, hi, T::eps() * hi, 200)
            .ok_or_else(|| Error::InvalidInput("could not scale the initial guess onto the constraint".into()))?;
        Ok(a.iter().map(|&x| x * t).collect())
    }
}

/// Default starting coefficients: the ground state with a small asymmetric
/// admixture of the next modes, so symmetry of the result is not inherited.
fn perturbed_guess<T: Real>(basis: &EigenBasis<T>, gamma: T) -> Vec<T> {
    let mut a = super::default_guess(basis, gamma);
    let base = a[0];
    for (k, x) in a.iter_mut().enumerate().skip(1).take(5) {
        *x = base * T::lit(0.05) / T::from_count(k + 1);
    }
    a
}

/// Minimizes `D(u) = sum lambda_k^s a_k^2` subject to `G(u) = c` by
/// projected gradient descent in coefficient space.
///
/// Every step moves along the `Lambda^{-s}`-preconditioned tangential
/// gradient and is pulled back onto `G = c` by rescaling the amplitude, with
/// Armijo backtracking on `D`. The reported `lambda` is the least-squares
/// multiplier and `residual` the stationarity residual
/// `||Lambda^s a - lambda P (u - gamma)_+||`.
pub fn minimize_energy<T: Real>(
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
    let problem = Problem {
        basis,
        pow: basis.values().iter().map(|&l| eigen_power(l, s)).collect(),
        gamma,
        c,
        kind: opts.constraint,
        vol: basis.domain().cell_volume(),
    };
    let start = match &opts.initial {
        Some(a) if a.len() != basis.count() => {
            return Err(Error::DimensionMismatch {
                expected: basis.count(),
                found: a.len(),
            })
        }
        Some(a) => a.clone(),
        None => perturbed_guess(basis, gamma),
    };
    let mut st = problem.state(problem.make_feasible(&start)?)?;

    let tol = opts.tolerance;
    let armijo = T::lit(1e-4);
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut mu = problem.multiplier(&st);
    loop {
        let res = problem.stationarity(&st, mu);
        trace.push(res);
        if res <= tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual: res.as_f64(),
                trace: trace.iter().map(|r| r.as_f64()).collect(),
            });
        }
        iterations += 1;
        let d = problem.direction(&st, mu);
        // D decreases along d at rate 2 d^T Lambda^s d to first order
        let slope = d
            .iter()
            .zip(&problem.pow)
            .fold(T::zero(), |acc, (&x, &p)| acc + p * x * x)
            * T::lit(2.0);
        let slack = T::eps() * T::lit(16.0) * st.energy;
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<T> = st.a.iter().zip(&d).map(|(&x, &dx)| x + alpha * dx).collect();
            if let Ok(feasible) = problem.make_feasible(&trial) {
                let cand = problem.state(feasible)?;
                if cand.energy <= st.energy - armijo * alpha * slope + slack {
                    accepted = Some(cand);
                    break;
                }
            }
            alpha *= T::lit(0.5);
        }
        match accepted {
            Some(cand) => {
                st = cand;
                mu = problem.multiplier(&st);
            }
            None => {
                return Err(Error::Stagnation {
                    iterations,
                    residual: res.as_f64(),
                    trace: trace.iter().map(|r| r.as_f64()).collect(),
                })
            }
        }
    }
    let u = SpectralField::from_coefficients(Arc::clone(basis), st.a)?;
    let lambda = mu;
    let residual = match opts.constraint {
        Constraint::Quadratic => plasma_residual(&u, lambda, gamma, s),
        Constraint::Linear => *trace.last().expect("at least one residual"),
    };
    Ok(PlasmaSolution {
        u,
        lambda,
        gamma,
        s,
        c: st.g,
        constraint: opts.constraint,
        residual,
        trace,
        iterations,
    })
}
