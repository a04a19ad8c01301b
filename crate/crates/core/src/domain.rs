//! Uniform-grid discretizations of bounded domains in one and two dimensions.
//!
//! A [`Domain`] is a tensor grid (endpoints included) together with a mask of
//! interior nodes. Every other node is a boundary node carrying homogeneous
//! Dirichlet data. Interior fields are stored as one value per interior node,
//! in ascending grid order; full-grid fields carry one value per grid node.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    /// Open interval `(start, end)`.
    Interval { start: T, end: T },
    /// Open rectangle `(x.0, x.1) x (y.0, y.1)`.
    Rectangle { x: (T, T), y: (T, T) },
    /// Disk mask inside a bounding rectangle; the grid covers the rectangle.
    Disk {
        center: [T; 2],
        radius: T,
        x: (T, T),
        y: (T, T),
    },
}

impl<T: Real> Shape<T> {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    fn bounds(&self) -> [(T, T); 2] {
        match *self {
            Shape::Interval { start, end } => [(start, end), (T::zero(), T::zero())],
            Shape::Rectangle { x, y } | Shape::Disk { x, y, .. } => [x, y],
        }
    }
}

/// Coordinate axis; as a symmetry it names the reflection `x_axis -> -x_axis`
/// about the midplane of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Grid, interior mask and symmetry information of a bounded domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    shape: Shape<T>,
    counts: [usize; 2],
    origin: [T; 2],
    spacing: [T; 2],
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
    symmetry: Vec<Axis>,
}

/// Builds a domain with `n` grid nodes per axis (endpoints included).
pub fn build_domain<T: Real>(shape: Shape<T>, n: usize) -> Result<Domain<T>> {
    Domain::build(shape, n)
}

impl<T: Real> Domain<T> {
    pub fn build(shape: Shape<T>, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 nodes per axis, got {n}")));
        }
        let dim = shape.dim();
        let bounds = shape.bounds();
        for (k, &(lo, hi)) in bounds.iter().enumerate().take(dim) {
            if !(hi > lo) {
                return Err(Error::InvalidInput(format!("axis {k} has non-positive extent")));
            }
        }
        if let Shape::Disk { radius, .. } = shape {
            if !(radius > T::zero()) {
                return Err(Error::InvalidInput("disk radius must be positive".into()));
            }
        }
        let counts = if dim == 1 { [n, 1] } else { [n, n] };
        let nm1 = T::from_count(n - 1);
        let origin = [bounds[0].0, bounds[1].0];
        let spacing = [
            (bounds[0].1 - bounds[0].0) / nm1,
            if dim == 1 {
                T::one()
            } else {
                (bounds[1].1 - bounds[1].0) / nm1
            },
        ];

        let total = counts[0] * counts[1];
        let mut slot = vec![None; total];
        let mut interior = Vec::new();
        for (g, entry) in slot.iter_mut().enumerate() {
            let (ix, iy) = (g % counts[0], g / counts[0]);
            let on_edge = ix == 0 || ix + 1 == counts[0] || (dim == 2 && (iy == 0 || iy + 1 == counts[1]));
            if on_edge {
                continue;
            }
            let inside = match shape {
                Shape::Disk { center, radius, .. } => {
                    let p = [
                        origin[0] + spacing[0] * T::from_count(ix),
                        origin[1] + spacing[1] * T::from_count(iy),
                    ];
                    let dx = p[0] - center[0];
                    let dy = p[1] - center[1];
                    dx * dx + dy * dy < radius * radius
                }
                _ => true,
            };
            if inside {
                *entry = Some(interior.len());
                interior.push(g);
            }
        }
        if interior.is_empty() {
            return Err(Error::InvalidInput("domain mask contains no interior node".into()));
        }

        let mut domain = Self {
            shape,
            counts,
            origin,
            spacing,
            interior,
            slot,
            symmetry: Vec::new(),
        };
        let axes: &[Axis] = if dim == 1 { &[Axis::X] } else { &[Axis::X, Axis::Y] };
        domain.symmetry = axes
            .iter()
            .copied()
            .filter(|&axis| domain.mask_is_symmetric(axis))
            .collect();
        Ok(domain)
    }

    fn mask_is_symmetric(&self, axis: Axis) -> bool {
        if let Shape::Disk { center, .. } = self.shape {
            let k = axis.index();
            let b = self.shape.bounds()[k];
            let mid = (b.0 + b.1) * T::lit(0.5);
            if (center[k] - mid).abs() > T::lit(1e-12) * (b.1 - b.0) {
                return false;
            }
        }
        (0..self.grid_len()).all(|g| self.slot[g].is_some() == self.slot[self.reflect_grid_index(axis, g)].is_some())
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Grid nodes per axis (`[n, 1]` in one dimension).
    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn spacing(&self) -> [T; 2] {
        self.spacing
    }

    /// Largest grid spacing.
    pub fn h(&self) -> T {
        if self.dim() == 1 {
            self.spacing[0]
        } else {
            self.spacing[0].max(self.spacing[1])
        }
    }

    /// Quadrature weight of one node, `h^dim`.
    pub fn cell_volume(&self) -> T {
        if self.dim() == 1 {
            self.spacing[0]
        } else {
            self.spacing[0] * self.spacing[1]
        }
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    /// Lower and upper corner of the grid box, per axis.
    pub fn grid_bounds(&self) -> [(T, T); 2] {
        let mut out = [(T::zero(), T::zero()); 2];
        for (k, item) in out.iter_mut().enumerate().take(self.dim()) {
            *item = (
                self.origin[k],
                self.origin[k] + self.spacing[k] * T::from_count(self.counts[k] - 1),
            );
        }
        out
    }

    pub fn grid_len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    /// Grid indices of the interior nodes.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Interior slot of a grid node, if the node is interior.
    pub fn slot(&self, g: usize) -> Option<usize> {
        self.slot[g]
    }

    pub fn is_interior(&self, g: usize) -> bool {
        self.slot[g].is_some()
    }

    pub fn grid_coords(&self, g: usize) -> (usize, usize) {
        (g % self.counts[0], g / self.counts[0])
    }

    pub fn grid_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.counts[0] + ix
    }

    /// Physical coordinates of a grid node (second entry is 0 in 1D).
    pub fn position(&self, g: usize) -> [T; 2] {
        let (ix, iy) = self.grid_coords(g);
        let y = if self.dim() == 1 {
            T::zero()
        } else {
            self.origin[1] + self.spacing[1] * T::from_count(iy)
        };
        [self.origin[0] + self.spacing[0] * T::from_count(ix), y]
    }

    pub fn interior_position(&self, i: usize) -> [T; 2] {
        self.position(self.interior[i])
    }

    /// Interior field -> full-grid field with zero boundary values.
    pub fn embed(&self, interior: &[T]) -> Vec<T> {
        assert_eq!(interior.len(), self.interior_len(), "interior field length");
        let mut full = vec![T::zero(); self.grid_len()];
        for (&g, &v) in self.interior.iter().zip(interior) {
            full[g] = v;
        }
        full
    }

    /// Full-grid field -> values at interior nodes.
    pub fn restrict(&self, full: &[T]) -> Vec<T> {
        assert_eq!(full.len(), self.grid_len(), "full-grid field length");
        self.interior.iter().map(|&g| full[g]).collect()
    }

    /// Discrete inner product `h^dim sum f g` on interior fields.
    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        f.iter().zip(g).fold(T::zero(), |acc, (&a, &b)| acc + a * b) * self.cell_volume()
    }

    /// Discrete L2 norm of an interior field.
    pub fn norm(&self, f: &[T]) -> T {
        self.inner(f, f).sqrt()
    }

    /// Grid neighbours of `g` along each axis, `None` past the grid edge.
    pub fn neighbours(&self, g: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (ix, iy) = self.grid_coords(g);
        let dim = self.dim();
        let c = self.counts;
        let mut out = [(usize::MAX, 0usize); 4];
        let mut len = 0;
        if ix > 0 {
            out[len] = (g - 1, 0);
            len += 1;
        }
        if ix + 1 < c[0] {
            out[len] = (g + 1, 0);
            len += 1;
        }
        if dim == 2 {
            if iy > 0 {
                out[len] = (g - c[0], 1);
                len += 1;
            }
            if iy + 1 < c[1] {
                out[len] = (g + c[0], 1);
                len += 1;
            }
        }
        out.into_iter().take(len)
    }

    /// Positive definite second-difference Dirichlet Laplacian `L_h = -Delta_h`
    /// applied to an interior field.
    pub fn laplacian(&self, u: &[T]) -> Vec<T> {
        assert_eq!(u.len(), self.interior_len());
        let inv_h2 = [
            T::one() / (self.spacing[0] * self.spacing[0]),
            T::one() / (self.spacing[1] * self.spacing[1]),
        ];
        let two = T::lit(2.0);
        self.interior
            .iter()
            .zip(u)
            .map(|(&g, &ug)| {
                let mut acc = inv_h2[..self.dim()].iter().fold(T::zero(), |acc, &w| acc + two * ug * w);
                for (nb, axis) in self.neighbours(g) {
                    if let Some(j) = self.slot[nb] {
                        acc -= u[j] * inv_h2[axis];
                    }
                }
                acc
            })
            .collect()
    }

    /// Classical Laplacian `Delta_h` of a full-grid field at every interior node.
    pub fn grid_laplacian(&self, full: &[T]) -> Vec<T> {
        assert_eq!(full.len(), self.grid_len());
        self.interior
            .iter()
            .map(|&g| {
                self.neighbours(g).fold(T::zero(), |acc, (nb, axis)| {
                    acc + (full[nb] - full[g]) / (self.spacing[axis] * self.spacing[axis])
                })
            })
            .collect()
    }

    /// Dense matrix of `L_h` in the interior-slot ordering.
    pub fn laplacian_matrix(&self) -> DMatrix<T> {
        let n = self.interior_len();
        let two = T::lit(2.0);
        let mut m = DMatrix::zeros(n, n);
        for (i, &g) in self.interior.iter().enumerate() {
            for axis in 0..self.dim() {
                m[(i, i)] += two / (self.spacing[axis] * self.spacing[axis]);
            }
            for (nb, axis) in self.neighbours(g) {
                if let Some(j) = self.slot[nb] {
                    m[(i, j)] -= T::one() / (self.spacing[axis] * self.spacing[axis]);
                }
            }
        }
        m
    }

    /// Reflection axes under which the interior mask is invariant.
    pub fn symmetry_axes(&self) -> &[Axis] {
        &self.symmetry
    }

    pub fn is_symmetric(&self, axis: Axis) -> bool {
        self.symmetry.contains(&axis)
    }

    /// Mirror image of grid node `g` under the reflection about the grid
    /// midplane orthogonal to `axis`.
    pub fn reflect_grid_index(&self, axis: Axis, g: usize) -> usize {
        let (ix, iy) = self.grid_coords(g);
        match axis {
            Axis::X => self.grid_index(self.counts[0] - 1 - ix, iy),
            Axis::Y => self.grid_index(ix, self.counts[1] - 1 - iy),
        }
    }

    /// `f o reflect` for an interior field; the axis must be a symmetry axis.
    pub fn reflect(&self, axis: Axis, f: &[T]) -> Result<Vec<T>> {
        if !self.is_symmetric(axis) {
            return Err(Error::Rejected(format!("domain is not symmetric about axis {axis:?}")));
        }
        Ok(self
            .interior
            .iter()
            .map(|&g| {
                let m = self.reflect_grid_index(axis, g);
                f[self.slot[m].expect("symmetric mask")]
            })
            .collect())
    }

    /// Whether the interior is a full tensor grid (intervals, rectangles).
    pub fn is_tensor(&self) -> bool {
        !matches!(self.shape, Shape::Disk { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_grid() {
        let d = Domain::build(Shape::Interval { start: 0.0, end: PI }, 5).unwrap();
        assert_eq!(d.interior_len(), 3);
        assert!((d.h() - PI / 4.0).abs() < 1e-15);
        let xs: Vec<f64> = (0..3).map(|i| d.interior_position(i)[0]).collect();
        for (x, want) in xs.iter().zip([PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]) {
            assert!((x - want).abs() < 1e-15);
        }
        assert_eq!(d.symmetry_axes(), &[Axis::X]);
    }

    #[test]
    fn unit_square_three_nodes() {
        let d = Domain::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            3,
        )
        .unwrap();
        assert_eq!(d.interior_len(), 1);
        assert_eq!(d.interior_position(0), [0.5, 0.5]);
        assert_eq!(d.symmetry_axes(), &[Axis::X, Axis::Y]);
    }

    #[test]
    fn disk_mask_by_hand() {
        // nodes at 0, 1/3, 2/3, 1 per axis; only the four nodes at distance
        // sqrt(2)/6 ~ 0.236 from the centre lie inside radius 0.4
        let d = Domain::build(
            Shape::Disk {
                center: [0.5, 0.5],
                radius: 0.4,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            4,
        )
        .unwrap();
        assert_eq!(d.interior_len(), 4);
        assert_eq!(d.symmetry_axes(), &[Axis::X, Axis::Y]);
    }

    #[test]
    fn empty_mask_is_rejected() {
        let err = Domain::build(
            Shape::Disk {
                center: [0.5, 0.5],
                radius: 0.05,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(Domain::build(Shape::Interval { start: 0.0, end: 1.0 }, 2).is_err());
        assert!(Domain::build(Shape::Interval { start: 1.0, end: 1.0 }, 5).is_err());
    }

    #[test]
    fn off_centre_disk_has_no_symmetry() {
        let d = Domain::build(
            Shape::Disk {
                center: [0.45, 0.5],
                radius: 0.3,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            21,
        )
        .unwrap();
        assert!(!d.is_symmetric(Axis::X));
        assert!(d.is_symmetric(Axis::Y));
    }

    #[test]
    fn stencil_neighbours_are_interior_or_boundary() {
        let d = Domain::build(
            Shape::Disk {
                center: [0.0, 0.0],
                radius: 0.8,
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
            },
            17,
        )
        .unwrap();
        for &g in d.interior_nodes() {
            assert_eq!(d.neighbours(g).count(), 4);
        }
    }

    #[test]
    fn laplacian_matrix_matches_operator() {
        let d = Domain::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 2.0),
            },
            6,
        )
        .unwrap();
        let u: Vec<f64> = (0..d.interior_len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let direct = d.laplacian(&u);
        let m = d.laplacian_matrix();
        let via = &m * nalgebra::DVector::from_column_slice(&u);
        for (a, b) in direct.iter().zip(via.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        let full = d.embed(&u);
        let classical = d.grid_laplacian(&full);
        for (a, b) in direct.iter().zip(&classical) {
            assert!((a + b).abs() < 1e-10);
        }
    }
}
