//! Spectral fractional Laplacian `(-Delta)^s` on a fixed eigenbasis.

use std::sync::{Arc, OnceLock};

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Thin-space field stored by its eigen-coefficients, with lazily cached nodal
/// values.
#[derive(Debug, Clone)]
pub struct SpectralField<T: Real> {
    basis: Arc<EigenBasis<T>>,
    coeffs: Vec<T>,
    nodal: OnceLock<Vec<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn from_coefficients(basis: Arc<EigenBasis<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis.count() {
            return Err(Error::DimensionMismatch {
                expected: basis.count(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            basis,
            coeffs,
            nodal: OnceLock::new(),
        })
    }

    pub fn zeros(basis: Arc<EigenBasis<T>>) -> Self {
        let n = basis.count();
        Self {
            basis,
            coeffs: vec![T::zero(); n],
            nodal: OnceLock::new(),
        }
    }

    /// Single eigenmode `phi_k` (zero-based).
    pub fn mode(basis: Arc<EigenBasis<T>>, k: usize) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[k] = T::one();
        f
    }

    pub fn basis(&self) -> &Arc<EigenBasis<T>> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    /// Nodal values `sum a_k phi_k` on the interior nodes.
    pub fn nodal(&self) -> &[T] {
        self.nodal.get_or_init(|| self.basis.synthesize(&self.coeffs))
    }

    /// Nodal values on the full grid, zero on the boundary.
    pub fn grid_values(&self) -> Vec<T> {
        self.basis.domain().embed(self.nodal())
    }

    /// Same basis, new coefficients.
    pub fn with_coefficients(&self, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), self.coeffs.len());
        Self {
            basis: Arc::clone(&self.basis),
            coeffs,
            nodal: OnceLock::new(),
        }
    }

    pub fn scaled(&self, t: T) -> Self {
        self.with_coefficients(self.coeffs.iter().map(|&a| a * t).collect())
    }

    /// Discrete L2 norm, equal to the coefficient norm.
    pub fn norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt()
    }

    /// `<self, other>` through the coefficients.
    pub fn inner(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

/// `a_k = <f, phi_k>`.
pub fn project<T: Real>(f: &[T], basis: &Arc<EigenBasis<T>>) -> Result<SpectralField<T>> {
    let coeffs = basis.project(f)?;
    SpectralField::from_coefficients(Arc::clone(basis), coeffs)
}

/// Norm of the part of `f` orthogonal to the span of the basis.
pub fn truncation_residual<T: Real>(f: &[T], basis: &EigenBasis<T>) -> Result<T> {
    let a = basis.project(f)?;
    let back = basis.synthesize(&a);
    let diff: Vec<T> = f.iter().zip(&back).map(|(&x, &y)| x - y).collect();
    Ok(basis.domain().norm(&diff))
}

pub(crate) fn check_order<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("order s = {s} must lie in (0, 1]")))
    }
}

/// `lambda^p` as `exp(p ln lambda)`.
#[inline]
pub fn eigen_power<T: Real>(lambda: T, p: T) -> T {
    (p * lambda.ln()).exp()
}

fn scale_by_power<T: Real>(u: &SpectralField<T>, p: T) -> SpectralField<T> {
    let vals = u.basis.values();
    u.with_coefficients(
        u.coeffs
            .iter()
            .zip(vals)
            .map(|(&a, &l)| a * eigen_power(l, p))
            .collect(),
    )
}

/// `(-Delta)^s u`: coefficients `lambda_k^s a_k`.
pub fn apply_fractional<T: Real>(u: &SpectralField<T>, s: T) -> Result<SpectralField<T>> {
    check_order(s)?;
    Ok(scale_by_power(u, s))
}

/// `(-Delta)^{-s} g`: coefficients `lambda_k^{-s} b_k`.
pub fn invert_fractional<T: Real>(g: &SpectralField<T>, s: T) -> Result<SpectralField<T>> {
    check_order(s)?;
    Ok(scale_by_power(g, -s))
}

/// `D(u) = sum lambda_k^s a_k^2`.
pub fn fractional_energy<T: Real>(u: &SpectralField<T>, s: T) -> Result<T> {
    check_order(s)?;
    Ok(u.coeffs
        .iter()
        .zip(u.basis.values())
        .fold(T::zero(), |acc, (&a, &l)| acc + eigen_power(l, s) * a * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eigendecompose;
    use crate::domain::{Domain, Shape};
    use std::f64::consts::PI;

    fn basis(n: usize, k: usize) -> Arc<EigenBasis<f64>> {
        let d = Domain::build(Shape::Interval { start: 0.0, end: PI }, n).unwrap();
        Arc::new(eigendecompose(&d, k).unwrap())
    }

    #[test]
    fn project_mode_gives_unit_vector() {
        let b = basis(33, 31);
        let f = b.vector(2);
        let u = project(&f, &b).unwrap();
        for (k, &a) in u.coefficients().iter().enumerate() {
            let want = if k == 2 { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-12);
        }
        let z = project(&vec![0.0; 31], &b).unwrap();
        assert!(z.coefficients().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn half_laplacian_of_sin2x() {
        let mut prev = f64::INFINITY;
        for n in [33, 65, 129] {
            let b = basis(n, n - 2);
            let d = b.domain();
            let f: Vec<f64> = (0..d.interior_len())
                .map(|i| (2.0 * d.interior_position(i)[0]).sin())
                .collect();
            let g = apply_fractional(&project(&f, &b).unwrap(), 0.5).unwrap();
            let err = g
                .nodal()
                .iter()
                .zip(&f)
                .fold(0.0f64, |m, (a, b)| m.max((a - 2.0 * b).abs()));
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn s_one_matches_stencil() {
        let b = basis(40, 38);
        let f: Vec<f64> = (0..38).map(|i| ((i * 31 % 17) as f64) / 17.0).collect();
        let u = project(&f, &b).unwrap();
        let g = apply_fractional(&u, 1.0).unwrap();
        let direct = b.domain().laplacian(&f);
        for (a, c) in g.nodal().iter().zip(&direct) {
            assert!((a - c).abs() < 1e-9 * direct.iter().fold(1.0f64, |m, x| m.max(x.abs())));
        }
    }

    #[test]
    fn inverse_on_ground_state() {
        let b = basis(20, 10);
        let u = SpectralField::mode(Arc::clone(&b), 0);
        let v = invert_fractional(&u, 0.3).unwrap();
        assert!((v.coefficients()[0] - b.values()[0].powf(-0.3)).abs() < 1e-14);
        assert!((fractional_energy(&u, 0.3).unwrap() - b.values()[0].powf(0.3)).abs() < 1e-14);
        let e2 = fractional_energy(&u.scaled(2.0), 0.3).unwrap();
        assert!((e2 - 4.0 * b.values()[0].powf(0.3)).abs() < 1e-13);
    }

    #[test]
    fn invalid_orders() {
        let b = basis(10, 5);
        let u = SpectralField::zeros(b);
        assert!(apply_fractional(&u, 0.0).is_err());
        assert!(apply_fractional(&u, 1.5).is_err());
        assert!(fractional_energy(&u, -0.1).is_err());
    }

    #[test]
    fn truncated_projection_reports_residual() {
        let b = basis(33, 5);
        let f = b.domain().restrict(&vec![1.0; 33]);
        let r = truncation_residual(&f, &b).unwrap();
        assert!(r > 0.1);
        let full = basis(33, 31);
        assert!(truncation_residual(&f, &full).unwrap() < 1e-12);
    }
}
