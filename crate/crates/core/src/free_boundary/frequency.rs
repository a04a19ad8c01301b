use nalgebra::{DMatrix, DVector, Matrix2};

use super::{hessian_bound, FreeBoundary, Tag};
use crate::error::{Error, Result};
use crate::extension::{ExtensionField, HalfBallRule, Sample, Sampler};
use crate::scalar::Real;
use crate::special::flux_constant;
use crate::util::least_squares;

/// Almgren frequency of an extension on half-balls `B_r^+(center)`.
///
/// The field is taken with its free boundary at level 0, so a solution with
/// shift `gamma` must be passed as `w.shifted(gamma)`. With
/// `D(r) = \int_{B_r^+} y^a |grad w|^2`, `H(r) = \int_{(dB_r)^+} y^a w^2` and
/// `M(r) = \int_{B_r'} w_+^2`:
/// `N = r D / H` and `N~ = r (D - d_s lambda M) / H`, where `d_s` converts the
/// spectral multiplier to the weighted flux of the extension.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile<T> {
    pub center: [T; 2],
    pub lambda: T,
    pub radii: Vec<T>,
    pub energy: Vec<T>,
    pub height: Vec<T>,
    pub thin_mass: Vec<T>,
    pub n: Vec<T>,
    pub n_tilde: Vec<T>,
    /// Set when `H` fell below `1e-14` and the remaining radii were dropped.
    pub truncated: bool,
    /// `N(0+)` from the fit `N~ = N0 + beta r^{1-a}` on the three smallest radii.
    pub n0: Option<T>,
    /// Smallest `C` with `(1 - C lambda r^{1-a}) N <= N~` at every radius.
    pub sandwich_c: T,
}

impl<T: Real> FrequencyProfile<T> {
    /// Indices `i` with `N~(r_{i+1}) < N~(r_i) - rel |N~(r_i)|`.
    pub fn monotonicity_violations(&self, rel: T) -> Vec<usize> {
        self.n_tilde
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] < w[0] - rel * w[0].abs())
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest relative decrease `(N~_i - N~_{i+1}) / |N~_i|`, or 0.
    pub fn max_relative_decrease(&self) -> T {
        self.n_tilde.windows(2).fold(T::zero(), |acc, w| {
            if w[0] != T::zero() {
                acc.max((w[0] - w[1]) / w[0].abs())
            } else {
                acc
            }
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

struct Integrals<T> {
    energy: T,
    height: T,
    thin_mass: T,
}

fn integrate<T: Real>(rule: &HalfBallRule<T>, sampler: &Sampler<'_, T>, center: [T; 2], r: T) -> Integrals<T> {
    let at = |p: &[T; 3]| {
        sampler
            .sample([center[0] + r * p[0], center[1] + r * p[1]], r * p[2])
            .expect("half-ball inside the box")
    };
    let (sv, ss, st) = rule.scales(r);
    let energy = rule.volume.iter().fold(T::zero(), |acc, (p, wt)| {
        let g = at(p).grad;
        acc + *wt * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    });
    let height = rule
        .sphere
        .iter()
        .fold(T::zero(), |acc, (p, wt)| acc + *wt * at(p).value.powi(2));
    let thin_mass = rule
        .thin
        .iter()
        .fold(T::zero(), |acc, (p, wt)| acc + *wt * at(p).value.pos().powi(2));
    Integrals {
        energy: energy * sv,
        height: height * ss,
        thin_mass: thin_mass * st,
    }
}

fn fits_box<T: Real>(w: &ExtensionField<T>, center: [T; 2], r: T) -> Result<()> {
    crate::extension::check_half_ball(w, center, r)
}

/// Frequency profile at increasing `radii`.
pub fn frequency_profile<T: Real>(
    w: &ExtensionField<T>,
    center: [T; 2],
    radii: &[T],
    lambda: T,
) -> Result<FrequencyProfile<T>> {
    if radii.windows(2).any(|p| !(p[1] > p[0])) || radii.first().is_some_and(|&r| !(r > T::zero())) {
        return Err(Error::InvalidInput(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    if let Some(&r) = radii.last() {
        fits_box(w, center, r)?;
    }
    let rule = HalfBallRule::new(w.domain().dim(), w.a());
    let sampler = Sampler::new(w);
    let lambda_eff = flux_constant(w.s()) * lambda;
    let one_minus_a = T::one() - w.a();
    let mut p = FrequencyProfile {
        center,
        lambda,
        radii: Vec::new(),
        energy: Vec::new(),
        height: Vec::new(),
        thin_mass: Vec::new(),
        n: Vec::new(),
        n_tilde: Vec::new(),
        truncated: false,
        n0: None,
        sandwich_c: T::zero(),
    };
    for &r in radii {
        let q = integrate(&rule, &sampler, center, r);
        if !(q.height >= T::lit(1e-14)) {
            p.truncated = true;
            break;
        }
        let n = r * q.energy / q.height;
        let nt = r * (q.energy - lambda_eff * q.thin_mass) / q.height;
        if lambda_eff > T::zero() && n > T::zero() {
            p.sandwich_c = p.sandwich_c.max((n - nt) / (n * lambda_eff * r.powf(one_minus_a)));
        }
        p.radii.push(r);
        p.energy.push(q.energy);
        p.height.push(q.height);
        p.thin_mass.push(q.thin_mass);
        p.n.push(n);
        p.n_tilde.push(nt);
    }
    if p.radii.len() >= 3 {
        let a = DMatrix::from_fn(
            3,
            2,
            |i, j| {
                if j == 0 {
                    T::one()
                } else {
                    p.radii[i].powf(one_minus_a)
                }
            },
        );
        let b = DVector::from_fn(3, |i, _| p.n_tilde[i]);
        p.n0 = least_squares(&a, &b).map(|(x, _)| x[0]);
    }
    Ok(p)
}

/// Least-squares fit `v ~ p(x) - c y^2` with `p` a quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit<T> {
    /// Coefficients of `x1^2`, `x1 x2`, `x2^2`.
    pub p: [T; 3],
    /// `c` divided by the largest eigenvalue magnitude of `p`.
    pub c: T,
    /// Weighted relative residual.
    pub residual: T,
}

/// Rescaled field `u_r(xi) = w(x0 + r xi) / norm` on the unit half-ball with
/// `norm = (r^{-(n+a)} \int_{(dB_r)^+} y^a w^2)^{1/2}`.
///
/// It is stored at the nodes of the unit half-ball rule (which carry all of
/// its integrals) and on a uniform reference grid for output.
#[derive(Debug, Clone)]
pub struct BlowupField<T> {
    pub center: [T; 2],
    pub r: T,
    pub normalization: T,
    pub rule: HalfBallRule<T>,
    /// Value and gradient at each volume node.
    pub volume: Vec<Sample<T>>,
    /// Value at each sphere node.
    pub sphere: Vec<T>,
    /// `((xi1, xi2, eta), u_r)` on the reference grid inside the half-ball.
    pub grid: Vec<([T; 3], T)>,
}

impl<T: Real> BlowupField<T> {
    /// `\int_{(dB_1)^+} y^a u_r^2`; equal to 1 by construction.
    pub fn boundary_norm(&self) -> T {
        self.rule
            .sphere
            .iter()
            .zip(&self.sphere)
            .fold(T::zero(), |acc, ((_, wt), &v)| acc + *wt * v * v)
    }

    /// `\int_{B_1^+} y^a |grad u_r|^2`.
    pub fn energy(&self) -> T {
        self.rule
            .volume
            .iter()
            .zip(&self.volume)
            .fold(T::zero(), |acc, ((_, wt), s)| {
                acc + *wt * (s.grad[0] * s.grad[0] + s.grad[1] * s.grad[1] + s.grad[2] * s.grad[2])
            })
    }

    /// `N(1, u_r)`.
    pub fn frequency(&self) -> T {
        self.energy() / self.boundary_norm()
    }

    /// Fits `p(x) - c y^2` over the volume nodes.
    pub fn fit_quadratic(&self) -> Option<QuadraticFit<T>> {
        let two_d = self.rule.dim == 2;
        let cols = if two_d { 4 } else { 2 };
        let rows = self.volume.len();
        let mut a = DMatrix::zeros(rows, cols);
        let mut b = DVector::zeros(rows);
        for (i, ((p, wt), s)) in self.rule.volume.iter().zip(&self.volume).enumerate() {
            let sw = wt.sqrt();
            let [x1, x2, y] = *p;
            let terms: Vec<T> = if two_d {
                vec![x1 * x1, x1 * x2, x2 * x2, -y * y]
            } else {
                vec![x1 * x1, -y * y]
            };
            for (j, t) in terms.into_iter().enumerate() {
                a[(i, j)] = sw * t;
            }
            b[i] = sw * s.value;
        }
        let (x, resid) = least_squares(&a, &b)?;
        let p = if two_d {
            [x[0], x[1], x[2]]
        } else {
            [x[0], T::zero(), T::zero()]
        };
        let c_raw = x[cols - 1];
        let m = Matrix2::new(p[0], p[1] * T::lit(0.5), p[1] * T::lit(0.5), p[2]);
        let eig = m.symmetric_eigenvalues();
        let scale = eig[0].abs().max(eig[1].abs());
        let norm = b.norm();
        Some(QuadraticFit {
            p,
            c: if scale > T::zero() {
                c_raw / scale
            } else {
                T::lit(f64::INFINITY)
            },
            residual: if norm > T::zero() { resid / norm } else { T::zero() },
        })
    }
}

/// Number of reference grid nodes per unit length.
const BLOWUP_GRID: usize = 20;

/// Blow-up of `w` at `center` from radius `r`.
pub fn blowup<T: Real>(w: &ExtensionField<T>, center: [T; 2], r: T) -> Result<BlowupField<T>> {
    fits_box(w, center, r)?;
    let dim = w.domain().dim();
    let rule = HalfBallRule::new(dim, w.a());
    let sampler = Sampler::new(w);
    let at = |p: &[T; 3]| {
        sampler
            .sample([center[0] + r * p[0], center[1] + r * p[1]], r * p[2])
            .expect("half-ball inside the box")
    };
    let sphere_raw: Vec<T> = rule.sphere.iter().map(|(p, _)| at(p).value).collect();
    let height = rule
        .sphere
        .iter()
        .zip(&sphere_raw)
        .fold(T::zero(), |acc, ((_, wt), &v)| acc + *wt * v * v);
    // r^{-(n+a)} \int_{(dB_r)^+} y^a w^2 is exactly the unit-sphere sum
    let normalization = height.sqrt();
    if !(normalization > T::zero()) {
        return Err(Error::Rejected(
            "field vanishes on the half-sphere; blow-up undefined".into(),
        ));
    }
    let inv = normalization.recip();
    let volume = rule
        .volume
        .iter()
        .map(|(p, _)| {
            let s = at(p);
            Sample {
                value: s.value * inv,
                grad: s.grad.map(|g| g * r * inv),
            }
        })
        .collect();
    let sphere = sphere_raw.iter().map(|&v| v * inv).collect();
    let step = T::one() / T::from_count(BLOWUP_GRID);
    let span = 2 * BLOWUP_GRID;
    let coord = |k: usize| -T::one() + step * T::from_count(k);
    let mut grid = Vec::new();
    let x2_range = if dim == 2 {
        0..span + 1
    } else {
        BLOWUP_GRID..BLOWUP_GRID + 1
    };
    for k2 in x2_range {
        for k1 in 0..=span {
            for ky in 0..=BLOWUP_GRID {
                let p = [
                    coord(k1),
                    if dim == 2 { coord(k2) } else { T::zero() },
                    step * T::from_count(ky),
                ];
                if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= T::one() + T::lit(1e-12) {
                    grid.push((p, at(&p).value * inv));
                }
            }
        }
    }
    Ok(BlowupField {
        center,
        r,
        normalization,
        rule,
        volume,
        sphere,
        grid,
    })
}

/// Parameters of [`classify_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions<T> {
    /// Half-width of the windows around the integer frequencies 1 and 2.
    pub delta: T,
    /// Number of geometrically spaced radii in the frequency profile.
    pub radii: usize,
    /// Smallest radius in grid spacings.
    pub min_radius_cells: T,
    /// Largest admissible relative residual of the quadratic blow-up fit.
    pub fit_tolerance: T,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        Self {
            delta: T::lit(0.15),
            radii: 12,
            min_radius_cells: T::lit(10.0),
            fit_tolerance: T::lit(0.05),
        }
    }
}

impl<T: Real> ClassifyOptions<T> {
    /// Geometric radii from `min_radius_cells h` to 90% of the largest
    /// half-ball that fits; empty when that range is too short.
    pub fn radii_at(&self, w: &ExtensionField<T>, center: [T; 2]) -> Vec<T> {
        let d = w.domain();
        let bounds = d.grid_bounds();
        let mut room = w.mesh().height();
        for (k, b) in bounds.iter().enumerate().take(d.dim()) {
            room = room.min(center[k] - b.0).min(b.1 - center[k]);
        }
        let r_max = room * T::lit(0.9);
        let r_min = self.min_radius_cells * d.h();
        if self.radii < 3 || !(r_max >= r_min * T::lit(2.0)) {
            return Vec::new();
        }
        let ratio = (r_max / r_min).ln() / T::from_count(self.radii - 1);
        (0..self.radii)
            .map(|i| r_min * (ratio * T::from_count(i)).exp())
            .collect()
    }
}

/// Outcome of [`classify_point`].
#[derive(Debug, Clone)]
pub struct Classification<T> {
    pub tag: Tag,
    /// `|grad_x u|` at the centre.
    pub gradient_norm: T,
    pub gradient_threshold: T,
    pub n0: Option<T>,
    pub fit: Option<QuadraticFit<T>>,
    pub profile: Option<FrequencyProfile<T>>,
}

/// Classifies a free-boundary point of `w` (free boundary at level 0).
///
/// Regular when the thin gradient exceeds `10 h max|D^2 u|` (Hessian of the
/// trace near the centre) or `N(0+)` is within `delta` of 1; a singular
/// candidate when `N(0+)` is within `delta` of 2 and the blow-up at the
/// smallest radius fits `p(x) - c y^2` with `c >= 0`; unresolved otherwise.
pub fn classify_point<T: Real>(
    w: &ExtensionField<T>,
    center: [T; 2],
    lambda: T,
    opts: &ClassifyOptions<T>,
) -> Result<Classification<T>> {
    let d = w.domain();
    let sampler = Sampler::new(w);
    let at_center = sampler
        .sample(center, T::zero())
        .ok_or_else(|| Error::InvalidInput("centre lies outside the grid".into()))?;
    let gradient_norm = at_center.grad[0].hypot(at_center.grad[1]);
    let reach = d.h() * T::lit(3.0);
    let near = |x: [T; 2]| (x[0] - center[0]).hypot(x[1] - center[1]) <= reach;
    let threshold = T::lit(10.0) * d.h() * hessian_bound(d, w.layer(0), near);
    let mut out = Classification {
        tag: Tag::Unresolved,
        gradient_norm,
        gradient_threshold: threshold,
        n0: None,
        fit: None,
        profile: None,
    };
    if gradient_norm > threshold {
        out.tag = Tag::Regular;
        return Ok(out);
    }
    let radii = opts.radii_at(w, center);
    if radii.is_empty() {
        return Ok(out);
    }
    let profile = frequency_profile(w, center, &radii, lambda)?;
    out.n0 = profile.n0;
    let smallest = profile.radii.first().copied();
    out.profile = Some(profile);
    let Some(n0) = out.n0 else {
        return Ok(out);
    };
    if (n0 - T::one()).abs() < opts.delta {
        out.tag = Tag::Regular;
    } else if (n0 - T::lit(2.0)).abs() < opts.delta {
        let r = smallest.expect("profile has at least three radii");
        let fit = blowup(w, center, r)?.fit_quadratic();
        if let Some(f) = fit {
            if f.residual < opts.fit_tolerance && f.c >= T::zero() {
                out.tag = Tag::SingularCandidate;
            }
        }
        out.fit = fit;
    }
    Ok(out)
}

/// Classification of every point of a free boundary.
#[derive(Debug, Clone)]
pub struct Census<T> {
    /// Tag per point of the free boundary, in order.
    pub tags: Vec<Tag>,
    pub regular: usize,
    pub unresolved: usize,
    /// Positions of the singular candidates.
    pub singular: Vec<[T; 2]>,
    /// Centroids of groups of singular candidates closer than `2h` in chain.
    pub clusters: Vec<[T; 2]>,
    pub crossing_cells: usize,
    pub degenerate_cells: usize,
}

impl<T> Census<T> {
    /// Number of distinct singular points.
    pub fn singular_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Classifies all points of `fb` on the extension `w` (free boundary at
/// level 0). Points already tagged regular by their gradient are kept.
pub fn singular_census<T: Real>(
    w: &ExtensionField<T>,
    fb: &FreeBoundary<T>,
    lambda: T,
    opts: &ClassifyOptions<T>,
) -> Result<Census<T>> {
    let mut tags = Vec::with_capacity(fb.points.len());
    for p in &fb.points {
        let tag = if p.tag == Tag::Regular {
            Tag::Regular
        } else {
            classify_point(w, p.position, lambda, opts)?.tag
        };
        tags.push(tag);
    }
    let singular: Vec<[T; 2]> = fb
        .points
        .iter()
        .zip(&tags)
        .filter(|(_, &t)| t == Tag::SingularCandidate)
        .map(|(p, _)| p.position)
        .collect();
    let clusters = cluster(&singular, w.domain().h() * T::lit(2.0));
    Ok(Census {
        regular: tags.iter().filter(|&&t| t == Tag::Regular).count(),
        unresolved: tags.iter().filter(|&&t| t == Tag::Unresolved).count(),
        tags,
        singular,
        clusters,
        crossing_cells: fb.crossing_cells,
        degenerate_cells: fb.degenerate_cells,
    })
}

/// Single-linkage groups at distance `reach`, returned as centroids.
fn cluster<T: Real>(points: &[[T; 2]], reach: T) -> Vec<[T; 2]> {
    let n = points.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn root(group: &mut [usize], mut i: usize) -> usize {
        while group[i] != i {
            group[i] = group[group[i]];
            i = group[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]) <= reach {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums: Vec<(usize, [T; 2], usize)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let r = root(&mut group, i);
        match sums.iter_mut().find(|s| s.0 == r) {
            Some(s) => {
                s.1[0] += p[0];
                s.1[1] += p[1];
                s.2 += 1;
            }
            None => sums.push((r, *p, 1)),
        }
    }
    sums.into_iter()
        .map(|(_, s, k)| [s[0] / T::from_count(k), s[1] / T::from_count(k)])
        .collect()
}
