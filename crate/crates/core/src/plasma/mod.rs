//! Solvers for the fractional plasma problem `(-Delta)^s u = lambda (u - gamma)_+`.

mod minimize;
mod picard;
mod steiner;

use std::sync::Arc;

pub use minimize::minimize_energy;
pub use picard::{multiplier_for_amplitude, solve_constrained, solve_fixed_lambda};
pub use steiner::steiner_symmetrize;

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::fractional::{eigen_power, SpectralField};
use crate::scalar::Real;
use crate::util::sorted_sum;

/// Constraint functional `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constraint {
    /// `\int (u - gamma)_+^2`; its Euler-Lagrange equation is the plasma equation.
    #[default]
    Quadratic,
    /// `\int (u - gamma)_+`.
    Linear,
}

impl Constraint {
    /// `G(u)` for interior nodal values; summation order depends only on the
    /// multiset of values, so rearrangements preserve `G` exactly.
    pub fn evaluate<T: Real>(self, nodal: &[T], gamma: T, cell_volume: T) -> T {
        let parts = nodal.iter().map(|&v| {
            let p = (v - gamma).pos();
            match self {
                Constraint::Quadratic => p * p,
                Constraint::Linear => p,
            }
        });
        sorted_sum(parts) * cell_volume
    }
}

/// Options shared by the plasma solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions<T> {
    /// Picard damping `omega` in `(0, 1]`.
    pub damping: T,
    /// Residual tolerance.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Initial coefficients; defaults to a multiple of `phi_1` with `max u = 2 gamma`.
    pub initial: Option<Vec<T>>,
    pub constraint: Constraint,
    /// Relative tolerance on `|G(u) - c| / c`.
    pub constraint_tolerance: T,
    /// Admissible multiplier range as multiples of `lambda_1^s`.
    pub lambda_bracket: (T, T),
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            damping: T::lit(0.5),
            tolerance: T::lit(1e-10),
            max_iterations: 10_000,
            initial: None,
            constraint: Constraint::Quadratic,
            constraint_tolerance: T::lit(1e-6),
            lambda_bracket: (T::one(), T::lit(50.0)),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "damping {} must lie in (0, 1]",
                self.damping
            )));
        }
        if !(self.tolerance > T::zero()) || !(self.constraint_tolerance > T::zero()) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        if !(self.lambda_bracket.0 > T::zero() && self.lambda_bracket.1 > self.lambda_bracket.0) {
            return Err(Error::InvalidInput(
                "lambda bracket must be an increasing positive pair".into(),
            ));
        }
        Ok(())
    }
}

/// One solve of the plasma problem.
#[derive(Debug, Clone)]
pub struct PlasmaSolution<T: Real> {
    pub u: SpectralField<T>,
    pub lambda: T,
    pub gamma: T,
    /// Order of the fractional operator.
    pub s: T,
    /// Constraint value `G(u)` for the constraint kind used.
    pub c: T,
    pub constraint: Constraint,
    /// `||(-Delta)^s u - lambda P (u - gamma)_+||`.
    pub residual: T,
    /// Residual history of the outer iteration.
    pub trace: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> PlasmaSolution<T> {
    /// Maximum of `u` over the interior nodes.
    pub fn max_value(&self) -> T {
        crate::scalar::max_value(self.u.nodal())
    }
}

/// Nodal right-hand side `(u - gamma)_+` on the interior nodes.
pub fn plasma_rhs<T: Real>(u: &SpectralField<T>, gamma: T) -> Vec<T> {
    u.nodal().iter().map(|&v| (v - gamma).pos()).collect()
}

/// `||Lambda^s a - lambda P (u - gamma)_+||` in coefficient space.
pub fn plasma_residual<T: Real>(u: &SpectralField<T>, lambda: T, gamma: T, s: T) -> T {
    let basis = u.basis();
    let rhs = basis.project(&plasma_rhs(u, gamma)).expect("matching basis");
    u.coefficients()
        .iter()
        .zip(basis.values())
        .zip(&rhs)
        .fold(T::zero(), |acc, ((&a, &l), &r)| {
            let d = eigen_power(l, s) * a - lambda * r;
            acc + d * d
        })
        .sqrt()
}

pub(crate) fn check_problem<T: Real>(gamma: T, s: T) -> Result<()> {
    crate::fractional::check_order(s)?;
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput(format!("shift gamma = {gamma} must be positive")));
    }
    Ok(())
}

/// Coefficients of `beta phi_1` with `max u = 2 gamma`.
pub(crate) fn default_guess<T: Real>(basis: &EigenBasis<T>, gamma: T) -> Vec<T> {
    let phi = basis.vector(0);
    let peak = crate::scalar::max_value(&phi);
    let mut a = vec![T::zero(); basis.count()];
    a[0] = T::lit(2.0) * gamma / peak;
    a
}

pub(crate) fn initial_coefficients<T: Real>(
    basis: &Arc<EigenBasis<T>>,
    gamma: T,
    opts: &SolverOptions<T>,
) -> Result<Vec<T>> {
    match &opts.initial {
        Some(a) if a.len() != basis.count() => Err(Error::DimensionMismatch {
            expected: basis.count(),
            found: a.len(),
        }),
        Some(a) => Ok(a.clone()),
        None => Ok(default_guess(basis, gamma)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eigendecompose;
    use crate::domain::{Domain, Shape};

    fn basis() -> Arc<EigenBasis<f64>> {
        let d = Domain::<f64>::build(Shape::Interval { start: 0.0, end: 1.0 }, 33).unwrap();
        Arc::new(eigendecompose(&d, 31).unwrap())
    }

    #[test]
    fn rhs_examples() {
        let b = basis();
        let gamma = 0.3;
        let d = b.domain();
        let level = crate::fractional::project(&vec![gamma; 31], &b).unwrap();
        assert!(plasma_rhs(&level, gamma).iter().all(|v| v.abs() < 1e-12));
        let above = crate::fractional::project(&vec![gamma + 1.0; 31], &b).unwrap();
        assert!(plasma_rhs(&above, gamma).iter().all(|v| (v - 1.0).abs() < 1e-12));
        let phi = b.vector(0);
        assert!(phi.iter().all(|&v| v > 0.0));
        let shifted: Vec<f64> = phi.iter().map(|v| v + gamma).collect();
        let u = crate::fractional::project(&shifted, &b).unwrap();
        for (r, p) in plasma_rhs(&u, gamma).iter().zip(&phi) {
            assert!((r - p).abs() < 1e-12);
        }
        assert_eq!(d.interior_len(), 31);
    }

    #[test]
    fn constraint_kinds() {
        let v = [0.0f64, 0.5, 1.5, 2.0];
        assert!((Constraint::Quadratic.evaluate(&v, 1.0, 0.5) - 0.5 * (0.25 + 1.0)).abs() < 1e-15);
        assert!((Constraint::Linear.evaluate(&v, 1.0, 0.5) - 0.5 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn option_validation() {
        let mut o = SolverOptions::<f64>::default();
        assert!(o.validate().is_ok());
        o.damping = 0.0;
        assert!(o.validate().is_err());
        let o = SolverOptions::<f64> {
            tolerance: -1.0,
            ..Default::default()
        };
        assert!(o.validate().is_err());
    }
}
