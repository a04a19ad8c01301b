use std::sync::Arc;

use super::{check_extension_order, layer_weights, ExtensionField, Provenance, YMesh};
use crate::basis::EigenBasis;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::util::thomas;

/// Finite-difference solver for the weighted extension.
///
/// The scheme couples the thin stencil `L_h` on every layer with exactly
/// integrated vertical face weights. Diagonalizing `L_h` with a complete
/// eigenbasis splits the system into one tridiagonal problem in `y` per mode.
#[derive(Debug, Clone)]
pub struct FdExtension<T: Real> {
    basis: Arc<EigenBasis<T>>,
    mesh: YMesh<T>,
    s: T,
    dual: Vec<T>,
    face: Vec<T>,
}

impl<T: Real> FdExtension<T> {
    pub fn new(domain: &Domain<T>, mesh: &YMesh<T>, s: T) -> Result<Self> {
        let basis = EigenBasis::new(Arc::new(domain.clone()), domain.interior_len())?;
        Self::with_basis(Arc::new(basis), mesh, s)
    }

    /// Reuses a complete eigenbasis of the domain.
    pub fn with_basis(basis: Arc<EigenBasis<T>>, mesh: &YMesh<T>, s: T) -> Result<Self> {
        check_extension_order(s)?;
        if !basis.is_complete() {
            return Err(Error::InvalidInput(
                "the finite-difference solve needs a complete eigenbasis".into(),
            ));
        }
        let a = T::one() - T::lit(2.0) * s;
        let (dual, face) = layer_weights(mesh, a);
        Ok(Self {
            basis,
            mesh: mesh.clone(),
            s,
            dual,
            face,
        })
    }

    pub fn mesh(&self) -> &YMesh<T> {
        &self.mesh
    }

    /// Extension of interior Dirichlet data `f`, zero on the lateral boundary
    /// and at `y = Y`.
    pub fn solve(&self, f: &[T]) -> Result<ExtensionField<T>> {
        let coeffs = self.basis.project(f)?;
        let m = self.mesh.layers();
        let unknowns = m - 1;
        // profiles[k][j] for j = 0..=M
        let mut profiles = vec![vec![T::zero(); m + 1]; coeffs.len()];
        let mut lower = vec![T::zero(); unknowns.saturating_sub(1)];
        let mut upper = vec![T::zero(); unknowns.saturating_sub(1)];
        for i in 0..unknowns.saturating_sub(1) {
            lower[i] = -self.face[i + 1];
            upper[i] = -self.face[i + 1];
        }
        let mut diag = vec![T::zero(); unknowns];
        let mut rhs = vec![T::zero(); unknowns];
        for ((profile, &ak), &lam) in profiles.iter_mut().zip(&coeffs).zip(self.basis.values()) {
            profile[0] = ak;
            if ak == T::zero() {
                continue;
            }
            for i in 0..unknowns {
                let j = i + 1;
                diag[i] = self.face[j - 1] + self.face[j] + lam * self.dual[j];
                rhs[i] = T::zero();
            }
            rhs[0] = self.face[0] * ak;
            thomas(&lower, &diag, &upper, &mut rhs)
                .ok_or_else(|| Error::LinearSolve("zero pivot in the vertical tridiagonal solve".into()))?;
            profile[1..m].copy_from_slice(&rhs);
        }
        let domain = self.basis.domain();
        let mut values = Vec::with_capacity(domain.grid_len() * (m + 1));
        values.extend(domain.embed(f));
        let mut layer = vec![T::zero(); coeffs.len()];
        for j in 1..=m {
            for (c, p) in layer.iter_mut().zip(&profiles) {
                *c = p[j];
            }
            values.extend(domain.embed(&self.basis.synthesize(&layer)));
        }
        ExtensionField::from_values(
            Arc::clone(self.basis.domain_arc()),
            self.mesh.clone(),
            self.s,
            values,
            Provenance::FiniteDifference,
        )
    }
}

/// One-shot finite-difference extension of interior data `f`.
pub fn extend_fd<T: Real>(domain: &Domain<T>, f: &[T], s: T, mesh: &YMesh<T>) -> Result<ExtensionField<T>> {
    FdExtension::new(domain, mesh, s)?.solve(f)
}
