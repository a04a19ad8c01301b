//! Free boundary `{u = gamma}` on the thin space: contour extraction, the
//! inclusion and subharmonicity checks, and (in [`frequency`]) Almgren
//! frequency profiles, blow-ups and the regular/singular classification.

mod frequency;

use std::collections::HashMap;

pub use frequency::{
    blowup, classify_point, frequency_profile, singular_census, BlowupField, Census, Classification, ClassifyOptions,
    FrequencyProfile, QuadraticFit,
};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Classification of a free-boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    /// Nonvanishing thin gradient or linear blow-up.
    Regular,
    /// Vanishing gradient with a quadratic blow-up `p(x) - c y^2`.
    SingularCandidate,
    Unresolved,
}

/// One crossing of the level on the thin grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint<T> {
    pub position: [T; 2],
    /// Thin gradient interpolated from nodal central differences.
    pub gradient: [T; 2],
    pub tag: Tag,
}

impl<T: Real> BoundaryPoint<T> {
    pub fn gradient_norm(&self) -> T {
        self.gradient[0].hypot(self.gradient[1])
    }
}

/// Discrete level set `{u = level}` of a thin field.
#[derive(Debug, Clone)]
pub struct FreeBoundary<T> {
    pub level: T,
    pub points: Vec<BoundaryPoint<T>>,
    /// Polylines through `points` (2D only); a closed chain repeats its first
    /// index at the end.
    pub chains: Vec<Vec<usize>>,
    /// Cells whose corners straddle the level.
    pub crossing_cells: usize,
    /// Cells on which `u` equals the level at every corner; nothing can be
    /// said about them, so they count as unresolved.
    pub degenerate_cells: usize,
    /// `|grad u|` above which a point is tagged regular.
    pub gradient_threshold: T,
}

impl<T: Real> FreeBoundary<T> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.points.iter().filter(|p| p.tag == tag).count()
    }
}

fn check_grid<T: Real>(domain: &Domain<T>, values: &[T]) -> Result<()> {
    if values.len() != domain.grid_len() {
        return Err(Error::DimensionMismatch {
            expected: domain.grid_len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// Nodal gradient by central differences, one-sided at the grid edge.
fn node_gradient<T: Real>(domain: &Domain<T>, values: &[T], g: usize) -> [T; 2] {
    let (ix, iy) = domain.grid_coords(g);
    let [nx, ny] = domain.counts();
    let [hx, hy] = domain.spacing();
    let diff = |i: usize, n: usize, h: T, at: &dyn Fn(usize) -> T| {
        if n < 2 {
            T::zero()
        } else if i == 0 {
            (at(1) - at(0)) / h
        } else if i + 1 == n {
            (at(n - 1) - at(n - 2)) / h
        } else {
            (at(i + 1) - at(i - 1)) / (h + h)
        }
    };
    let gx = diff(ix, nx, hx, &|k| values[domain.grid_index(k, iy)]);
    let gy = if domain.dim() == 2 {
        diff(iy, ny, hy, &|k| values[domain.grid_index(ix, k)])
    } else {
        T::zero()
    };
    [gx, gy]
}

/// Largest second difference `|u_xx|, |u_yy|, |u_xy|` over the grid nodes
/// accepted by `near` that have a full 3x3 stencil.
pub fn hessian_bound<T: Real>(domain: &Domain<T>, values: &[T], near: impl Fn([T; 2]) -> bool) -> T {
    let [nx, ny] = domain.counts();
    let [hx, hy] = domain.spacing();
    let at = |ix: usize, iy: usize| values[domain.grid_index(ix, iy)];
    let mut bound = T::zero();
    let (ylo, yhi) = if domain.dim() == 2 { (1, ny - 1) } else { (0, 1) };
    for iy in ylo..yhi {
        for ix in 1..nx - 1 {
            if !near(domain.position(domain.grid_index(ix, iy))) {
                continue;
            }
            let c = at(ix, iy);
            let uxx = (at(ix + 1, iy) - c - c + at(ix - 1, iy)) / (hx * hx);
            bound = bound.max(uxx.abs());
            if domain.dim() == 2 {
                let uyy = (at(ix, iy + 1) - c - c + at(ix, iy - 1)) / (hy * hy);
                let uxy = (at(ix + 1, iy + 1) - at(ix + 1, iy - 1) - at(ix - 1, iy + 1) + at(ix - 1, iy - 1))
                    / (T::lit(4.0) * hx * hy);
                bound = bound.max(uyy.abs()).max(uxy.abs());
            }
        }
    }
    bound
}

fn distance<T: Real>(p: [T; 2], q: [T; 2]) -> T {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Crossing of `pred` along the grid edge from `g0` to `g1`, placed where the
/// linear interpolant of `v = u - level` vanishes.
fn edge_crossing<T: Real>(domain: &Domain<T>, v: &[T], g0: usize, g1: usize) -> (T, [T; 2]) {
    let t = v[g0] / (v[g0] - v[g1]);
    let (p0, p1) = (domain.position(g0), domain.position(g1));
    (t, [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])])
}

/// Grid edges `(g0, g1)` as used by the contouring, with a stable id each.
struct Edges {
    nx: usize,
    ny: usize,
    horizontal: usize,
}

impl Edges {
    fn new(counts: [usize; 2]) -> Self {
        let [nx, ny] = counts;
        Self {
            nx,
            ny,
            horizontal: (nx - 1) * ny,
        }
    }

    fn horizontal(&self, ix: usize, iy: usize) -> (usize, usize, usize) {
        let g = iy * self.nx + ix;
        (iy * (self.nx - 1) + ix, g, g + 1)
    }

    fn vertical(&self, ix: usize, iy: usize) -> (usize, usize, usize) {
        let g = iy * self.nx + ix;
        (self.horizontal + iy * self.nx + ix, g, g + self.nx)
    }

    fn all(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let h = (0..self.ny).flat_map(move |iy| (0..self.nx - 1).map(move |ix| self.horizontal(ix, iy)));
        let v = (0..self.ny.saturating_sub(1)).flat_map(move |iy| (0..self.nx).map(move |ix| self.vertical(ix, iy)));
        h.chain(v)
    }
}

/// Positions where `pred(u - level)` changes along a grid edge.
fn crossings<T: Real>(domain: &Domain<T>, values: &[T], level: T, pred: impl Fn(T) -> bool) -> Vec<[T; 2]> {
    let v: Vec<T> = values.iter().map(|&x| x - level).collect();
    Edges::new(domain.counts())
        .all()
        .filter(|&(_, g0, g1)| pred(v[g0]) != pred(v[g1]))
        .map(|(_, g0, g1)| edge_crossing(domain, &v, g0, g1).1)
        .collect()
}

/// Extracts `{u = level}` from full-grid values of a thin field.
///
/// A node counts as inside when `u > level`. In 1D every interval with a
/// change of sides contributes one point; in 2D marching squares produces
/// edge points linked into chains, with saddle cells resolved by the cell
/// average. Points whose gradient exceeds `10 h max|D^2 u|` (the Hessian
/// bound taken over nodes within two cells of the level set) are tagged
/// regular, all others unresolved.
pub fn extract_free_boundary<T: Real>(domain: &Domain<T>, values: &[T], level: T) -> Result<FreeBoundary<T>> {
    check_grid(domain, values)?;
    let v: Vec<T> = values.iter().map(|&x| x - level).collect();
    let inside = |g: usize| v[g] > T::zero();
    let edges = Edges::new(domain.counts());
    let [nx, ny] = domain.counts();

    let mut points: Vec<(usize, usize, T, [T; 2])> = Vec::new();
    let mut by_edge: HashMap<usize, usize> = HashMap::new();
    for (id, g0, g1) in edges.all() {
        if inside(g0) != inside(g1) {
            let (t, p) = edge_crossing(domain, &v, g0, g1);
            by_edge.insert(id, points.len());
            points.push((g0, g1, t, p));
        }
    }

    let mut segments = Vec::new();
    let mut crossing_cells = 0;
    let mut degenerate_cells = 0;
    if domain.dim() == 1 {
        for ix in 0..nx - 1 {
            if inside(ix) != inside(ix + 1) {
                crossing_cells += 1;
            } else if v[ix] == T::zero() && v[ix + 1] == T::zero() {
                degenerate_cells += 1;
            }
        }
    } else {
        for iy in 0..ny - 1 {
            for ix in 0..nx - 1 {
                let corners = [
                    domain.grid_index(ix, iy),
                    domain.grid_index(ix + 1, iy),
                    domain.grid_index(ix + 1, iy + 1),
                    domain.grid_index(ix, iy + 1),
                ];
                if corners.iter().all(|&g| v[g] == T::zero()) {
                    degenerate_cells += 1;
                    continue;
                }
                // bottom, right, top, left
                let cell_edges = [
                    edges.horizontal(ix, iy).0,
                    edges.vertical(ix + 1, iy).0,
                    edges.horizontal(ix, iy + 1).0,
                    edges.vertical(ix, iy).0,
                ];
                let hit: Vec<usize> = cell_edges.iter().filter_map(|e| by_edge.get(e).copied()).collect();
                match hit.len() {
                    0 => {}
                    2 => {
                        crossing_cells += 1;
                        segments.push((hit[0], hit[1]));
                    }
                    4 => {
                        crossing_cells += 1;
                        let mean = corners.iter().fold(T::zero(), |acc, &g| acc + v[g]) * T::lit(0.25);
                        let p = |k: usize| by_edge[&cell_edges[k]];
                        if (mean > T::zero()) == inside(corners[0]) {
                            // corners 1 and 3 are cut off
                            segments.push((p(0), p(1)));
                            segments.push((p(2), p(3)));
                        } else {
                            segments.push((p(3), p(0)));
                            segments.push((p(1), p(2)));
                        }
                    }
                    _ => unreachable!("a cell has an even number of crossed edges"),
                }
            }
        }
    }

    let near = |x: [T; 2]| {
        let reach = domain.h() * T::lit(2.0);
        points.iter().any(|p| distance(p.3, x) <= reach)
    };
    let threshold = T::lit(10.0) * domain.h() * hessian_bound(domain, values, near);
    let points: Vec<BoundaryPoint<T>> = points
        .iter()
        .map(|&(g0, g1, t, position)| {
            let (d0, d1) = (node_gradient(domain, values, g0), node_gradient(domain, values, g1));
            let gradient = [d0[0] + t * (d1[0] - d0[0]), d0[1] + t * (d1[1] - d0[1])];
            let tag = if gradient[0].hypot(gradient[1]) > threshold {
                Tag::Regular
            } else {
                Tag::Unresolved
            };
            BoundaryPoint {
                position,
                gradient,
                tag,
            }
        })
        .collect();
    let chains = link_chains(points.len(), &segments);
    Ok(FreeBoundary {
        level,
        points,
        chains,
        crossing_cells,
        degenerate_cells,
        gradient_threshold: threshold,
    })
}

/// Links segments into polylines; every point has at most two neighbours.
fn link_chains(n: usize, segments: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::with_capacity(2); n];
    for &(a, b) in segments {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut used = vec![false; n];
    let mut chains = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        used[start] = true;
        let mut cur = start;
        loop {
            match adj[cur].iter().find(|&&nb| !used[nb]) {
                Some(&nb) => {
                    used[nb] = true;
                    chain.push(nb);
                    cur = nb;
                }
                None => {
                    if chain.len() > 2 && adj[cur].contains(&start) {
                        chain.push(start);
                    }
                    return chain;
                }
            }
        }
    };
    // open chains first, starting at their endpoints
    for p in 0..n {
        if !used[p] && adj[p].len() == 1 {
            chains.push(walk(p, &mut used));
        }
    }
    for p in 0..n {
        if !used[p] && !adj[p].is_empty() {
            chains.push(walk(p, &mut used));
        }
    }
    chains
}

/// Result of [`check_boundary_inclusion`].
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport<T> {
    /// Points of `d{u < level}` examined.
    pub checked: usize,
    /// Points of `d{u < level}` with no point of `d{u > level}` within one
    /// grid cell.
    pub violations: Vec<[T; 2]>,
}

impl<T> InclusionReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `d{u < level} subset d{u > level}` up to one grid cell
/// (distance `h sqrt(dim)`).
pub fn check_boundary_inclusion<T: Real>(domain: &Domain<T>, values: &[T], level: T) -> Result<InclusionReport<T>> {
    check_grid(domain, values)?;
    let lower = crossings(domain, values, level, |v| v < T::zero());
    let upper = crossings(domain, values, level, |v| v > T::zero());
    let reach = domain.h() * T::from_count(domain.dim()).sqrt() * (T::one() + T::lit(1e-9));
    let violations = lower
        .iter()
        .filter(|p| !upper.iter().any(|q| distance(**p, *q) <= reach))
        .copied()
        .collect();
    Ok(InclusionReport {
        checked: lower.len(),
        violations,
    })
}

/// Result of [`check_subharmonic_strip`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripReport<T> {
    /// Interior nodes within `2h` of the level set.
    pub checked: usize,
    /// Smallest discrete Laplacian among them (`+inf` when none).
    pub min_laplacian: T,
    /// Where the minimum is attained.
    pub at: Option<[T; 2]>,
}

impl<T: Real> StripReport<T> {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.min_laplacian > T::zero()
    }
}

/// Smallest classical `Delta_h u` over interior nodes within `2h` of
/// `{u = level}`. Strict subharmonicity there is only expected for
/// `s > 1/2`; smaller orders are rejected.
pub fn check_subharmonic_strip<T: Real>(domain: &Domain<T>, values: &[T], level: T, s: T) -> Result<StripReport<T>> {
    check_grid(domain, values)?;
    if !(s > T::lit(0.5)) {
        return Err(Error::Rejected(format!(
            "subharmonic strip check requires s > 1/2, got {s}"
        )));
    }
    let level_set = crossings(domain, values, level, |v| v > T::zero());
    let lap = domain.grid_laplacian(values);
    let reach = domain.h() * T::lit(2.0) * (T::one() + T::lit(1e-9));
    let mut report = StripReport {
        checked: 0,
        min_laplacian: T::lit(f64::INFINITY),
        at: None,
    };
    for (i, &value) in lap.iter().enumerate() {
        let x = domain.interior_position(i);
        if level_set.iter().any(|&q| distance(x, q) <= reach) {
            report.checked += 1;
            if value < report.min_laplacian {
                report.min_laplacian = value;
                report.at = Some(x);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;

    fn interval(a: f64, b: f64, n: usize) -> Domain<f64> {
        Domain::build(Shape::Interval { start: a, end: b }, n).unwrap()
    }

    fn sample(d: &Domain<f64>, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..d.grid_len()).map(|g| f(d.position(g))).collect()
    }

    #[test]
    fn linear_crossing_in_1d() {
        let d = interval(0.0, 1.0, 12);
        let fb = extract_free_boundary(&d, &sample(&d, |p| p[0] - 0.5), 0.0).unwrap();
        assert_eq!(fb.points.len(), 1);
        assert!((fb.points[0].position[0] - 0.5).abs() < 1e-14);
        assert!((fb.points[0].gradient[0] - 1.0).abs() < 1e-12);
        assert_eq!(fb.points[0].tag, Tag::Regular);
        assert_eq!(fb.crossing_cells, 1);
    }

    #[test]
    fn circle_in_2d() {
        let d = Domain::build(
            Shape::Rectangle {
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
            },
            41,
        )
        .unwrap();
        let r0 = 0.55;
        let fb = extract_free_boundary(&d, &sample(&d, |p| p[0] * p[0] + p[1] * p[1] - r0 * r0), 0.0).unwrap();
        assert_eq!(fb.chains.len(), 1);
        let chain = &fb.chains[0];
        assert_eq!(chain.first(), chain.last());
        assert_eq!(chain.len(), fb.points.len() + 1);
        for p in &fb.points {
            assert!((p.position[0].hypot(p.position[1]) - r0).abs() <= d.h());
            assert_eq!(p.tag, Tag::Regular);
        }
    }

    #[test]
    fn constant_field_is_degenerate() {
        let d = Domain::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
            6,
        )
        .unwrap();
        let fb = extract_free_boundary(&d, &vec![0.3; 36], 0.3).unwrap();
        assert!(fb.is_empty());
        assert_eq!(fb.degenerate_cells, 25);
        let fb = extract_free_boundary(&d, &vec![0.0; 36], 0.3).unwrap();
        assert!(fb.is_empty() && fb.degenerate_cells == 0);
    }

    #[test]
    fn saddle_is_split_consistently() {
        let d = Domain::build(
            Shape::Rectangle {
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
            },
            4,
        )
        .unwrap();
        let fb = extract_free_boundary(&d, &sample(&d, |p| p[0] * p[1] + 0.01), 0.0).unwrap();
        assert!(fb.chains.iter().all(|c| c.len() >= 2));
        let linked: usize = fb.chains.iter().map(|c| c.len()).sum();
        assert_eq!(linked, fb.points.len());
    }

    #[test]
    fn inclusion_examples() {
        let d = interval(-2.0, 2.0, 41);
        let r = check_boundary_inclusion(&d, &sample(&d, |p| p[0] * p[0] - 1.0), 0.0).unwrap();
        assert_eq!(r.checked, 2);
        assert!(r.passed());
        // touches the level from below on a plateau: d{u<0} has no partner
        let plateau = sample(&d, |p| -(p[0].abs() - 0.5).max(0.0).powi(2));
        let r = check_boundary_inclusion(&d, &plateau, 0.0).unwrap();
        assert_eq!(r.checked, 2);
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn strip_examples() {
        let d = interval(-1.0, 1.0, 41);
        let up = check_subharmonic_strip(&d, &sample(&d, |p| p[0] * p[0] - 0.25), 0.0, 0.75).unwrap();
        assert!(up.passed());
        assert!((up.min_laplacian - 2.0).abs() < 1e-9);
        let down = check_subharmonic_strip(&d, &sample(&d, |p| 0.25 - p[0] * p[0]), 0.0, 0.75).unwrap();
        assert!(!down.passed());
        assert!(down.checked >= 4);
        assert!(matches!(
            check_subharmonic_strip(&d, &vec![0.0; 41], 0.0, 0.5),
            Err(Error::Rejected(_))
        ));
    }
}
