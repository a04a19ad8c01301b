use crate::domain::{Axis, Domain};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Steiner symmetrization of an interior field about the midplane orthogonal
/// to `axis`.
///
/// Along every grid line parallel to `axis` the values are rearranged
/// symmetric-decreasingly: the largest value goes to the node nearest the
/// midplane, the next to the nearest remaining node (the lower-index one on
/// ties), and so on. Each line keeps its multiset of values.
pub fn steiner_symmetrize<T: Real>(domain: &Domain<T>, f: &[T], axis: Axis) -> Result<Vec<T>> {
    if f.len() != domain.interior_len() {
        return Err(Error::DimensionMismatch {
            expected: domain.interior_len(),
            found: f.len(),
        });
    }
    if !domain.is_symmetric(axis) {
        return Err(Error::Rejected(format!("domain is not symmetric about axis {axis:?}")));
    }
    let [nx, ny] = domain.counts();
    let (along, across) = match axis {
        Axis::X => (nx, ny),
        Axis::Y => (ny, nx),
    };
    let node = |i: usize, line: usize| match axis {
        Axis::X => domain.grid_index(i, line),
        Axis::Y => domain.grid_index(line, i),
    };
    let mut out = f.to_vec();
    for line in 0..across {
        let mut slots: Vec<(usize, usize)> = (0..along)
            .filter_map(|i| domain.slot(node(i, line)).map(|k| (i, k)))
            .collect();
        if slots.is_empty() {
            continue;
        }
        // doubled distance to the midplane keeps the ordering exact
        slots.sort_by_key(|&(i, _)| ((2 * i).abs_diff(along - 1), i));
        let mut values: Vec<T> = slots.iter().map(|&(_, k)| f[k]).collect();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        for (&(_, k), v) in slots.iter().zip(values) {
            out[k] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;

    #[test]
    fn symmetric_decreasing_is_fixed() {
        let d = Domain::<f64>::build(Shape::Interval { start: 0.0, end: 1.0 }, 9).unwrap();
        let f: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(steiner_symmetrize(&d, &f, Axis::X).unwrap(), f);
    }

    #[test]
    fn rearranges_each_line() {
        let d = Domain::<f64>::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            6,
        )
        .unwrap();
        let f: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64).collect();
        let g = steiner_symmetrize(&d, &f, Axis::X).unwrap();
        for row in 0..4 {
            let mut a = f[row * 4..row * 4 + 4].to_vec();
            let mut b = g[row * 4..row * 4 + 4].to_vec();
            assert!(b[1] >= b[0] && b[2] >= b[3] && b[1] >= b[2]);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_asymmetric_domain() {
        let d = Domain::<f64>::build(
            Shape::Disk {
                center: [0.4, 0.5],
                radius: 0.3,
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            21,
        )
        .unwrap();
        let f = vec![0.0; d.interior_len()];
        assert!(matches!(steiner_symmetrize(&d, &f, Axis::X), Err(Error::Rejected(_))));
        assert!(steiner_symmetrize(&d, &f, Axis::Y).is_ok());
    }
}
