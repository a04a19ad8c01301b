use crate::error::{Error, Result};
use crate::scalar::Real;

/// Graded mesh `y_j = Y (j/M)^g` on `[0, Y]`, refined toward the thin space.
#[derive(Debug, Clone, PartialEq)]
pub struct YMesh<T> {
    height: T,
    grading: T,
    nodes: Vec<T>,
}

impl<T: Real> YMesh<T> {
    pub fn graded(height: T, layers: usize, grading: T) -> Result<Self> {
        if !(height > T::zero()) {
            return Err(Error::InvalidInput("mesh height must be positive".into()));
        }
        if layers < 2 {
            return Err(Error::InvalidInput("mesh needs at least 2 layers".into()));
        }
        if !(grading >= T::one()) {
            return Err(Error::InvalidInput("grading exponent must be at least 1".into()));
        }
        let m = T::from_count(layers);
        let mut nodes: Vec<T> = (0..=layers)
            .map(|j| height * (T::from_count(j) / m).powf(grading))
            .collect();
        nodes[layers] = height;
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("mesh grading underflows the first layer".into()));
        }
        Ok(Self { height, grading, nodes })
    }

    /// Default grading `max(2, 2/(1-a)) = max(2, 1/s)`.
    pub fn default_grading(s: T) -> T {
        T::lit(2.0).max(T::one() / s)
    }

    /// Mesh of height `scaled_height / sqrt(lambda_1)` with the default grading.
    pub fn for_order(s: T, lambda_1: T, scaled_height: T, layers: usize) -> Result<Self> {
        Self::graded(scaled_height / lambda_1.sqrt(), layers, Self::default_grading(s))
    }

    /// Truncation height `Y`.
    pub fn height(&self) -> T {
        self.height
    }

    pub fn grading(&self) -> T {
        self.grading
    }

    /// Number of layers `M` (there are `M + 1` nodes).
    pub fn layers(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Index `j` with `y_j <= y <= y_{j+1}`, clamped to the mesh.
    pub fn locate(&self, y: T) -> usize {
        let idx = self.nodes.partition_point(|&v| v <= y);
        idx.saturating_sub(1).min(self.layers() - 1)
    }
}

/// `\int_lo^hi y^a dy` for `lo >= 0`.
pub fn weighted_length<T: Real>(a: T, lo: T, hi: T) -> T {
    let p = a + T::one();
    (hi.powf(p) - lo.powf(p)) / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_and_first_layer() {
        let m = YMesh::graded(2.0f64, 10, 3.0).unwrap();
        assert_eq!(m.layers(), 10);
        assert_eq!(m.nodes()[0], 0.0);
        assert_eq!(m.nodes()[10], 2.0);
        assert!(m.nodes()[1] <= 2.0 * 0.1f64.powf(3.0) * (1.0 + 1e-15));
        assert!(m.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn locate_brackets() {
        let m = YMesh::graded(1.0f64, 8, 2.0).unwrap();
        for &y in &[0.0, 1e-6, 0.3, 0.99, 1.0] {
            let j = m.locate(y);
            assert!(m.nodes()[j] <= y && y <= m.nodes()[j + 1]);
        }
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(YMesh::graded(0.0f64, 10, 2.0).is_err());
        assert!(YMesh::graded(1.0f64, 1, 2.0).is_err());
        assert!(YMesh::graded(1.0f64, 10, 0.5).is_err());
    }

    #[test]
    fn weighted_length_exact() {
        assert!((weighted_length(0.0f64, 1.0, 3.0) - 2.0).abs() < 1e-15);
        assert!((weighted_length(-0.5f64, 0.0, 4.0) - 4.0).abs() < 1e-14);
    }
}
