//! Gauss-Jacobi rules used for the weighted half-ball integrals, where the
//! weight `y^a` (and the radial Jacobian) is integrated exactly.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Real;
use crate::special::gamma;

/// Nodes and weights on `[0, 1]` for `\int_0^1 t^beta f(t) dt`.
#[derive(Debug, Clone)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// Gauss-Jacobi rule with `count` nodes for the weight `t^beta` on `[0, 1]`,
    /// `beta > -1`. `beta = 0` gives Gauss-Legendre.
    pub fn jacobi(count: usize, beta: T) -> Self {
        assert!(count >= 1);
        assert!(beta > -T::one(), "Jacobi exponent must exceed -1");
        // Golub-Welsch on [-1, 1] for (1-x)^0 (1+x)^beta
        let alpha = T::zero();
        let two = T::lit(2.0);
        let ab = alpha + beta;
        let mut jac = DMatrix::<T>::zeros(count, count);
        for k in 0..count {
            let kf = T::from_count(k);
            let diag = if k == 0 {
                (beta - alpha) / (ab + two)
            } else {
                let d = two * kf + ab;
                (beta * beta - alpha * alpha) / (d * (d + two))
            };
            jac[(k, k)] = diag;
            if k + 1 < count {
                let n = T::from_count(k + 1);
                let d = two * n + ab;
                let off2 = if k == 0 {
                    // (1 + ab) factor cancelled analytically
                    T::lit(4.0) * (T::one() + alpha) * (T::one() + beta) / (d * d * (d + T::one()))
                } else {
                    T::lit(4.0) * n * (n + alpha) * (n + beta) * (n + ab) / (d * d * (d + T::one()) * (d - T::one()))
                };
                let off = off2.sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mu0 = two.powf(ab + T::one()) * gamma(alpha + T::one()) * gamma(beta + T::one()) / gamma(ab + two);
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(T, T)> = (0..count)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
        // map to [0, 1]: t = (1 + x)/2, (1+x)^beta = 2^beta t^beta, dx = 2 dt
        let scale = T::one() / two.powf(beta + T::one());
        Self {
            nodes: pairs.iter().map(|p| (T::one() + p.0) / two).collect(),
            weights: pairs.iter().map(|p| p.1 * scale).collect(),
        }
    }

    /// Gauss-Legendre rule on `[0, 1]`.
    pub fn legendre(count: usize) -> Self {
        Self::jacobi(count, T::zero())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&t, &w)| acc + w * f(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let r = Rule::<f64>::legendre(6);
        for p in 0..12 {
            let got = r.integrate(|t| t.powi(p));
            assert!((got - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn jacobi_integrates_weighted_monomials() {
        for &beta in &[-0.5f64, 0.0, 0.5, 1.5, 2.75] {
            let r = Rule::<f64>::jacobi(8, beta);
            for p in 0..16 {
                let got = r.integrate(|t| t.powi(p));
                let want = 1.0 / (p as f64 + beta + 1.0);
                assert!((got - want).abs() < 1e-13, "beta={beta} p={p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn single_node_rule() {
        let r = Rule::<f64>::jacobi(1, 1.0);
        // node at the weighted mean 2/3, weight 1/2
        assert!((r.nodes[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.weights[0] - 0.5).abs() < 1e-14);
    }
}
