//! Orthonormal Dirichlet-Laplacian eigenbases.
//!
//! On tensor grids (intervals, rectangles) the eigenvectors of the
//! second-difference Laplacian are products of discrete sine vectors and the
//! eigenvalues are known in closed form; projections then reduce to two small
//! matrix products. Masked grids use a dense symmetric eigensolve.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
enum Storage<T: Real> {
    /// `phi_m(ix, iy) = sx[(ix, k)] * sy[(iy, l)]` for `modes[m] = (k, l)`.
    Separable {
        sx: DMatrix<T>,
        sy: DMatrix<T>,
        modes: Vec<(usize, usize)>,
    },
    /// Columns are eigenvectors in interior-slot ordering.
    Dense { vectors: DMatrix<T> },
}

/// First `K` eigenpairs of `L_h`, orthonormal under `<f, g> = h^dim sum f g`.
#[derive(Debug, Clone)]
pub struct EigenBasis<T: Real> {
    domain: Arc<Domain<T>>,
    values: Vec<T>,
    storage: Storage<T>,
}

/// Eigenbasis with `count` modes; closed form on tensor grids, dense otherwise.
pub fn eigendecompose<T: Real>(domain: &Domain<T>, count: usize) -> Result<EigenBasis<T>> {
    EigenBasis::new(Arc::new(domain.clone()), count)
}

/// Eigenbasis from a dense symmetric eigensolve regardless of the shape.
pub fn eigendecompose_dense<T: Real>(domain: &Domain<T>, count: usize) -> Result<EigenBasis<T>> {
    EigenBasis::dense(Arc::new(domain.clone()), count)
}

/// Discrete sine eigenvectors of the 1D three-point Laplacian with `m` interior
/// nodes and spacing `h`: columns normalized so that `h sum v^2 = 1`.
fn sine_basis<T: Real>(m: usize, h: T) -> (DMatrix<T>, Vec<T>) {
    let np1 = T::from_count(m + 1);
    let norm = (T::lit(2.0) / (np1 * h)).sqrt();
    let pi = T::pi();
    let vectors = DMatrix::from_fn(m, m, |i, k| {
        norm * (T::from_count(k + 1) * pi * T::from_count(i + 1) / np1).sin()
    });
    let four_over_h2 = T::lit(4.0) / (h * h);
    let values = (0..m)
        .map(|k| {
            let t = (T::from_count(k + 1) * pi / (T::lit(2.0) * np1)).sin();
            four_over_h2 * t * t
        })
        .collect();
    (vectors, values)
}

impl<T: Real> EigenBasis<T> {
    pub fn new(domain: Arc<Domain<T>>, count: usize) -> Result<Self> {
        Self::check_count(&domain, count)?;
        if !domain.is_tensor() {
            return Self::dense(domain, count);
        }
        let [nx, ny] = domain.counts();
        let [hx, hy] = domain.spacing();
        let (sx, lx) = sine_basis(nx - 2, hx);
        let (sy, ly) = if domain.dim() == 1 {
            (DMatrix::from_element(1, 1, T::one()), vec![T::zero()])
        } else {
            sine_basis(ny - 2, hy)
        };
        let mut modes: Vec<(T, usize, usize)> = Vec::with_capacity(lx.len() * ly.len());
        for (k, &a) in lx.iter().enumerate() {
            for (l, &b) in ly.iter().enumerate() {
                modes.push((a + b, k, l));
            }
        }
        modes.sort_by(|p, q| {
            p.0.partial_cmp(&q.0)
                .expect("finite eigenvalues")
                .then(p.1.cmp(&q.1))
                .then(p.2.cmp(&q.2))
        });
        modes.truncate(count);
        Ok(Self {
            domain,
            values: modes.iter().map(|m| m.0).collect(),
            storage: Storage::Separable {
                sx,
                sy,
                modes: modes.iter().map(|m| (m.1, m.2)).collect(),
            },
        })
    }

    pub fn dense(domain: Arc<Domain<T>>, count: usize) -> Result<Self> {
        Self::check_count(&domain, count)?;
        let matrix = domain.laplacian_matrix();
        let n = matrix.nrows();
        let eig =
            SymmetricEigen::try_new(matrix.clone(), T::eps(), 10_000 * n.max(1)).ok_or(Error::EigenNonConvergence {
                residual: f64::INFINITY,
            })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .expect("finite eigenvalues")
                .then(i.cmp(&j))
        });
        order.truncate(count);
        let scale = T::one() / domain.cell_volume().sqrt();
        let mut vectors = DMatrix::zeros(n, count);
        for (c, &i) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(i).into_owned();
            let first = col.iter().copied().find(|v| v.abs() > T::eps().sqrt() * T::lit(1e-3));
            if matches!(first, Some(v) if v < T::zero()) {
                col.neg_mut();
            }
            vectors.set_column(c, &(col * scale));
        }
        let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let basis = Self {
            domain,
            values,
            storage: Storage::Dense { vectors },
        };
        let worst = basis.max_eigen_residual();
        let lmax = basis.values.last().copied().unwrap_or(T::one());
        let tol = T::lit(1e-8).max(T::eps() * T::lit(64.0) * lmax);
        if !(worst <= tol) {
            return Err(Error::EigenNonConvergence {
                residual: worst.as_f64(),
            });
        }
        Ok(basis)
    }

    fn check_count(domain: &Domain<T>, count: usize) -> Result<()> {
        if count == 0 || count > domain.interior_len() {
            return Err(Error::InvalidInput(format!(
                "basis size {count} must lie in 1..={}",
                domain.interior_len()
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<Domain<T>> {
        &self.domain
    }

    /// Number of modes `K`.
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_complete(&self) -> bool {
        self.count() == self.domain.interior_len()
    }

    /// Nodal values of `phi_k` (zero-based).
    pub fn vector(&self, k: usize) -> Vec<T> {
        let mut a = vec![T::zero(); self.count()];
        a[k] = T::one();
        self.synthesize(&a)
    }

    /// Coefficients `a_k = <f, phi_k>` of an interior field.
    pub fn project(&self, f: &[T]) -> Result<Vec<T>> {
        let n = self.domain.interior_len();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        let vol = self.domain.cell_volume();
        Ok(match &self.storage {
            Storage::Separable { sx, sy, modes } => {
                let fm = DMatrix::from_column_slice(sx.nrows(), sy.nrows(), f);
                let c = sx.tr_mul(&fm) * sy;
                modes.iter().map(|&(k, l)| c[(k, l)] * vol).collect()
            }
            Storage::Dense { vectors } => {
                let fv = nalgebra::DVector::from_column_slice(f);
                (vectors.tr_mul(&fv) * vol).iter().copied().collect()
            }
        })
    }

    /// Nodal field `sum a_k phi_k`.
    pub fn synthesize(&self, a: &[T]) -> Vec<T> {
        assert_eq!(a.len(), self.count(), "coefficient vector length");
        match &self.storage {
            Storage::Separable { sx, sy, modes } => {
                let mut c = DMatrix::zeros(sx.ncols(), sy.ncols());
                for (&(k, l), &v) in modes.iter().zip(a) {
                    c[(k, l)] = v;
                }
                let f = sx * c * sy.transpose();
                f.as_slice().to_vec()
            }
            Storage::Dense { vectors } => {
                let av = nalgebra::DVector::from_column_slice(a);
                (vectors * av).as_slice().to_vec()
            }
        }
    }

    /// `max_k ||L_h phi_k - lambda_k phi_k|| / ||phi_k||`.
    pub fn max_eigen_residual(&self) -> T {
        (0..self.count())
            .map(|k| {
                let v = self.vector(k);
                let lv = self.domain.laplacian(&v);
                let r: Vec<T> = lv.iter().zip(&v).map(|(&x, &y)| x - self.values[k] * y).collect();
                self.domain.norm(&r) / self.domain.norm(&v)
            })
            .fold(T::zero(), |m, x| m.max(x))
    }

    /// Gram matrix `<phi_i, phi_j>`.
    pub fn gram(&self) -> DMatrix<T> {
        let vecs: Vec<Vec<T>> = (0..self.count()).map(|k| self.vector(k)).collect();
        DMatrix::from_fn(self.count(), self.count(), |i, j| self.domain.inner(&vecs[i], &vecs[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Axis, Shape};
    use std::f64::consts::PI;

    fn interval(n: usize) -> Domain<f64> {
        Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, n).unwrap()
    }

    fn identity_error(g: &DMatrix<f64>) -> f64 {
        (g - DMatrix::identity(g.nrows(), g.ncols())).amax()
    }

    #[test]
    fn interval_basis_invariants() {
        let d = interval(33);
        let b = eigendecompose(&d, 31).unwrap();
        assert!(b.values()[0] > 0.0);
        assert!(b.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(identity_error(&b.gram()) < 1e-10);
        assert!(b.max_eigen_residual() < 1e-8);
        for k in 0..5 {
            // sin(kx) on the grid is an exact discrete eigenvector
            let phi = b.vector(k);
            let want = (2.0 / PI).sqrt() * (((k + 1) as f64) * PI / 32.0).sin();
            assert!((phi[0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_one_converges_at_second_order() {
        let err = |n: usize| eigendecompose(&interval(n), 1).unwrap().values()[0] - 1.0;
        let (e1, e2, e3) = (err(17), err(33), err(65));
        assert!(e1 < 0.0 && e2 < 0.0);
        let order1 = (e1 / e2).abs().log2();
        let order2 = (e2 / e3).abs().log2();
        assert!(order1 >= 1.9 && order2 >= 1.9, "orders {order1} {order2}");
    }

    #[test]
    fn square_ground_state_near_two() {
        let d = Domain::<f64>::build(
            Shape::Rectangle {
                x: (0.0, PI),
                y: (0.0, PI),
            },
            41,
        )
        .unwrap();
        let b = eigendecompose(&d, 3).unwrap();
        assert!((b.values()[0] - 2.0).abs() < 2e-3);
        assert_eq!(b.values()[1], b.values()[2]);
    }

    #[test]
    fn separable_agrees_with_dense() {
        let d = Domain::<f64>::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.5),
            },
            9,
        )
        .unwrap();
        let sep = eigendecompose(&d, 49).unwrap();
        let den = eigendecompose_dense(&d, 49).unwrap();
        for (a, b) in sep.values().iter().zip(den.values()) {
            assert!((a - b).abs() < 1e-9 * a);
        }
        assert!(identity_error(&den.gram()) < 1e-10);
        assert!(den.max_eigen_residual() < 1e-8);
    }

    #[test]
    fn full_basis_reconstructs() {
        let d = Domain::<f64>::build(
            Shape::Disk {
                center: [0.5, 0.5],
                radius: 0.45,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            15,
        )
        .unwrap();
        let b = eigendecompose(&d, d.interior_len()).unwrap();
        let f: Vec<f64> = (0..d.interior_len()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let back = b.synthesize(&b.project(&f).unwrap());
        let err = f.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10);
        assert!(b.is_complete());
    }

    #[test]
    fn sign_convention() {
        let d = Domain::<f64>::build(
            Shape::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
            },
            13,
        )
        .unwrap();
        let b = eigendecompose(&d, 10).unwrap();
        for k in 0..10 {
            let v = b.vector(k);
            let first = v.iter().copied().find(|x| x.abs() > 1e-9).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn eigenspaces_closed_under_reflection() {
        let d = Domain::<f64>::build(
            Shape::Disk {
                center: [0.5, 0.5],
                radius: 0.45,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            17,
        )
        .unwrap();
        let b = eigendecompose(&d, 20).unwrap();
        let vals = b.values();
        for &axis in &[Axis::X, Axis::Y] {
            for k in 0..20 {
                let refl = d.reflect(axis, &b.vector(k)).unwrap();
                // project onto the eigenspace of lambda_k
                let mut rest = refl.clone();
                for j in 0..20 {
                    if (vals[j] - vals[k]).abs() < 1e-8 * vals[k] {
                        let phi = b.vector(j);
                        let c = d.inner(&refl, &phi);
                        for (r, p) in rest.iter_mut().zip(&phi) {
                            *r -= c * p;
                        }
                    }
                }
                assert!(d.norm(&rest) < 1e-8, "axis {axis:?} mode {k}");
            }
        }
    }

    #[test]
    fn rejects_bad_count() {
        let d = interval(5);
        assert!(eigendecompose(&d, 0).is_err());
        assert!(eigendecompose(&d, 4).is_err());
        let b = eigendecompose(&d, 3).unwrap();
        assert!(matches!(b.project(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
