//! Point sampling of extension fields and quadrature on half-balls
//! `B_r^+(x0) = {(x, y) : |x - x0|^2 + y^2 < r^2, y > 0}`.

use super::ExtensionField;
use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::scalar::Real;

/// Interpolated value and gradient `(d/dx1, d/dx2, d/dy)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub value: T,
    pub grad: [T; 3],
}

/// Multilinear interpolation of values and of nodal finite-difference
/// gradients of an [`ExtensionField`].
#[derive(Debug, Clone, Copy)]
pub struct Sampler<'a, T: Real> {
    field: &'a ExtensionField<T>,
}

impl<'a, T: Real> Sampler<'a, T> {
    pub fn new(field: &'a ExtensionField<T>) -> Self {
        Self { field }
    }

    fn axis_cell(&self, v: T, axis: usize) -> Option<(usize, T)> {
        let d = self.field.domain();
        let n = d.counts()[axis];
        let h = d.spacing()[axis];
        let t = (v - d.origin()[axis]) / h;
        let tol = T::lit(1e-9);
        if t < -tol || t > T::from_count(n - 1) + tol {
            return None;
        }
        let i = t.floor().max(T::zero()).to_usize().unwrap_or(0).min(n - 2);
        Some((i, (t - T::from_count(i)).max(T::zero()).min(T::one())))
    }

    fn node_grad(&self, ix: usize, iy: usize, j: usize) -> [T; 3] {
        let f = self.field;
        let d = f.domain();
        let [nx, ny] = d.counts();
        let [hx, hy] = d.spacing();
        let at = |ix: usize, iy: usize, j: usize| f.value(d.grid_index(ix, iy), j);
        let diff = |i: usize, n: usize, h: T, get: &dyn Fn(usize) -> T| -> T {
            if i == 0 {
                (get(1) - get(0)) / h
            } else if i + 1 == n {
                (get(n - 1) - get(n - 2)) / h
            } else {
                (get(i + 1) - get(i - 1)) / (h + h)
            }
        };
        let gx = diff(ix, nx, hx, &|k| at(k, iy, j));
        let gy = if d.dim() == 2 {
            diff(iy, ny, hy, &|k| at(ix, k, j))
        } else {
            T::zero()
        };
        let ys = f.mesh().nodes();
        let m = f.mesh().layers();
        let gz = if j == 0 {
            (at(ix, iy, 1) - at(ix, iy, 0)) / ys[1]
        } else if j == m {
            (at(ix, iy, m) - at(ix, iy, m - 1)) / (ys[m] - ys[m - 1])
        } else {
            let h1 = ys[j] - ys[j - 1];
            let h2 = ys[j + 1] - ys[j];
            let cm = -h2 / (h1 * (h1 + h2));
            let c0 = (h2 - h1) / (h1 * h2);
            let cp = h1 / (h2 * (h1 + h2));
            cm * at(ix, iy, j - 1) + c0 * at(ix, iy, j) + cp * at(ix, iy, j + 1)
        };
        [gx, gy, gz]
    }

    /// Value and gradient at thin point `x` and height `y`, or `None` outside
    /// the computational box.
    pub fn sample(&self, x: [T; 2], y: T) -> Option<Sample<T>> {
        let f = self.field;
        let d = f.domain();
        let mesh = f.mesh();
        if y < T::zero() || y > mesh.height() * (T::one() + T::lit(1e-12)) {
            return None;
        }
        let (ix, tx) = self.axis_cell(x[0], 0)?;
        let (iy, ty) = if d.dim() == 2 {
            self.axis_cell(x[1], 1)?
        } else {
            (0, T::zero())
        };
        let j = mesh.locate(y);
        let ys = mesh.nodes();
        let tz = ((y - ys[j]) / (ys[j + 1] - ys[j])).max(T::zero()).min(T::one());
        let mut value = T::zero();
        let mut grad = [T::zero(); 3];
        let y_corners = if d.dim() == 2 { 2 } else { 1 };
        for cz in 0..2 {
            let wz = if cz == 0 { T::one() - tz } else { tz };
            for cy in 0..y_corners {
                let wy = if d.dim() == 1 {
                    T::one()
                } else if cy == 0 {
                    T::one() - ty
                } else {
                    ty
                };
                for cx in 0..2 {
                    let wx = if cx == 0 { T::one() - tx } else { tx };
                    let w = wx * wy * wz;
                    if w == T::zero() {
                        continue;
                    }
                    let g = d.grid_index(ix + cx, iy + cy);
                    value += w * f.value(g, j + cz);
                    let ng = self.node_grad(ix + cx, iy + cy, j + cz);
                    for k in 0..3 {
                        grad[k] += w * ng[k];
                    }
                }
            }
        }
        Some(Sample { value, grad })
    }
}

/// Weighted node on the reference half-ball: `(x1, x2, y)` and weight.
pub type Node<T> = ([T; 3], T);

/// Quadrature on the unit half-ball for the weight `y^a`.
///
/// For a half-ball of radius `r` centred at `x0` on the thin space:
/// * `\int_{B_r^+} y^a f ~ r^{n+1+a} sum volume_w f(x0 + r xi)`,
/// * `\int_{(dB_r)^+} y^a f ~ r^{n+a} sum sphere_w f(x0 + r xi)`,
/// * `\int_{B_r'} f ~ r^n sum thin_w f(x0 + r xi)`.
///
/// The `y^a` factor and the polar Jacobians are integrated exactly with
/// Gauss-Jacobi rules.
#[derive(Debug, Clone)]
pub struct HalfBallRule<T> {
    pub dim: usize,
    pub a: T,
    pub volume: Vec<Node<T>>,
    pub sphere: Vec<Node<T>>,
    pub thin: Vec<Node<T>>,
}

impl<T: Real> HalfBallRule<T> {
    /// Rule with default resolution for thin dimension `dim` (1 or 2).
    pub fn new(dim: usize, a: T) -> Self {
        if dim == 1 {
            Self::with_counts(dim, a, 24, 24, 0)
        } else {
            Self::with_counts(dim, a, 16, 16, 32)
        }
    }

    /// `radial` and `polar` Gauss nodes; `azimuthal` trapezoid nodes (2D only).
    pub fn with_counts(dim: usize, a: T, radial: usize, polar: usize, azimuthal: usize) -> Self {
        assert!(dim == 1 || dim == 2, "thin dimension must be 1 or 2");
        let half_pi = T::frac_pi_2();
        let mut volume = Vec::new();
        let mut sphere = Vec::new();
        let mut thin = Vec::new();
        if dim == 1 {
            let rad = Rule::jacobi(radial, T::one() + a);
            // phi = pi/2 - |theta| measures the angle from the thin space
            let ang = Rule::jacobi(polar, a);
            let mut dirs = Vec::with_capacity(2 * polar);
            for (&t, &wt) in ang.nodes.iter().zip(&ang.weights) {
                let phi = half_pi * t;
                let w = wt * half_pi.powf(T::one() + a) * (phi.sin() / phi).powf(a);
                for sign in [T::one(), -T::one()] {
                    dirs.push(([sign * phi.cos(), T::zero(), phi.sin()], w));
                }
            }
            for &(p, w) in &dirs {
                sphere.push((p, w));
                for (&rho, &wr) in rad.nodes.iter().zip(&rad.weights) {
                    volume.push(([p[0] * rho, T::zero(), p[2] * rho], w * wr));
                }
            }
            let gl = Rule::<T>::legendre(radial);
            for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                thin.push(([t, T::zero(), T::zero()], w));
                thin.push(([-t, T::zero(), T::zero()], w));
            }
        } else {
            let rad = Rule::jacobi(radial, T::lit(2.0) + a);
            let pol = Rule::jacobi(polar, a);
            let two_pi = T::two_pi();
            let wphi = two_pi / T::from_count(azimuthal);
            let phis: Vec<T> = (0..azimuthal)
                .map(|k| wphi * (T::from_count(k) + T::lit(0.5)))
                .collect();
            for (&c, &wc) in pol.nodes.iter().zip(&pol.weights) {
                let sin_t = (T::one() - c * c).max(T::zero()).sqrt();
                for &phi in &phis {
                    let p = [sin_t * phi.cos(), sin_t * phi.sin(), c];
                    let w = wc * wphi;
                    sphere.push((p, w));
                    for (&rho, &wr) in rad.nodes.iter().zip(&rad.weights) {
                        volume.push(([p[0] * rho, p[1] * rho, p[2] * rho], w * wr));
                    }
                }
            }
            let disk = Rule::jacobi(radial, T::one());
            for (&rho, &wr) in disk.nodes.iter().zip(&disk.weights) {
                for &phi in &phis {
                    thin.push(([rho * phi.cos(), rho * phi.sin(), T::zero()], wr * wphi));
                }
            }
        }
        Self {
            dim,
            a,
            volume,
            sphere,
            thin,
        }
    }

    fn n(&self) -> T {
        T::from_count(self.dim)
    }

    /// Scale factors `(volume, sphere, thin)` for radius `r`.
    pub fn scales(&self, r: T) -> (T, T, T) {
        let n = self.n();
        (r.powf(n + T::one() + self.a), r.powf(n + self.a), r.powf(n))
    }
}

/// Integrals bounded by the weighted trace inequalities on one half-ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport<T> {
    pub r: T,
    /// `\int_{(dB_r)^+} y^a w^2`.
    pub boundary_norm: T,
    /// `\int_{B_r'} w^2`.
    pub thin_norm: T,
    /// `\int_{B_r^+} y^a |grad w|^2`.
    pub energy: T,
    /// `boundary_norm / (r energy)`.
    pub boundary_ratio: T,
    /// `thin_norm / (r^{1-a} energy)`.
    pub thin_ratio: T,
}

pub(crate) fn check_half_ball<T: Real>(w: &ExtensionField<T>, center: [T; 2], r: T) -> Result<()> {
    let d = w.domain();
    let bounds = d.grid_bounds();
    let slack = T::lit(1e-12) * (T::one() + r);
    for k in 0..d.dim() {
        if center[k] - r < bounds[k].0 - slack || center[k] + r > bounds[k].1 + slack {
            return Err(Error::Rejected(format!(
                "half-ball of radius {r} at the centre leaves the box along axis {k}"
            )));
        }
    }
    if r > w.mesh().height() * (T::one() + T::lit(1e-12)) || !(r > T::zero()) {
        return Err(Error::Rejected(format!(
            "half-ball radius {r} does not fit below the mesh top"
        )));
    }
    Ok(())
}

pub(crate) fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else if num == T::zero() {
        T::zero()
    } else {
        T::lit(f64::INFINITY)
    }
}

/// Weighted boundary, thin and energy integrals of `w` on `B_r^+(center)`.
pub fn trace_norms<T: Real>(w: &ExtensionField<T>, center: [T; 2], r: T) -> Result<TraceReport<T>> {
    check_half_ball(w, center, r)?;
    let rule = HalfBallRule::new(w.domain().dim(), w.a());
    let sampler = Sampler::new(w);
    let (sv, ss, st) = rule.scales(r);
    let at = |p: &[T; 3]| {
        sampler
            .sample([center[0] + r * p[0], center[1] + r * p[1]], r * p[2])
            .expect("half-ball inside the box")
    };
    let mut energy = T::zero();
    for (p, wt) in &rule.volume {
        let g = at(p).grad;
        energy += *wt * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    }
    let mut boundary = T::zero();
    for (p, wt) in &rule.sphere {
        boundary += *wt * at(p).value.powi(2);
    }
    let mut thin = T::zero();
    for (p, wt) in &rule.thin {
        thin += *wt * at(p).value.powi(2);
    }
    let (energy, boundary, thin) = (energy * sv, boundary * ss, thin * st);
    Ok(TraceReport {
        r,
        boundary_norm: boundary,
        thin_norm: thin,
        energy,
        boundary_ratio: ratio(boundary, r * energy),
        thin_ratio: ratio(thin, r.powf(T::one() - w.a()) * energy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain, Shape};
    use crate::extension::YMesh;
    use std::sync::Arc;

    fn volume_of_half_ball(dim: usize, a: f64) -> f64 {
        // \int_{B_1^+} y^a = \int_0^1 rho^{n+a} d rho * \int_{S^+} cos^a
        let g = crate::special::gamma::<f64>;
        let pi = std::f64::consts::PI;
        let cap = if dim == 1 {
            pi.sqrt() * g((a + 1.0) / 2.0) / g(a / 2.0 + 1.0)
        } else {
            2.0 * pi / (a + 1.0)
        };
        cap / (dim as f64 + 1.0 + a)
    }

    #[test]
    fn rules_integrate_the_weight() {
        for dim in [1, 2] {
            for &a in &[-0.5, 0.0, 0.4] {
                let rule = HalfBallRule::<f64>::new(dim, a);
                let vol: f64 = rule.volume.iter().map(|n| n.1).sum();
                assert!((vol - volume_of_half_ball(dim, a)).abs() < 1e-12, "dim={dim} a={a}");
                let cap: f64 = rule.sphere.iter().map(|n| n.1).sum();
                assert!((cap - volume_of_half_ball(dim, a) * (dim as f64 + 1.0 + a)).abs() < 1e-12);
                let thin: f64 = rule.thin.iter().map(|n| n.1).sum();
                let want = if dim == 1 { 2.0 } else { std::f64::consts::PI };
                assert!((thin - want).abs() < 1e-12);
                // even polynomial moments: \int y^a x1^2 over the cap
                let m2: f64 = rule.sphere.iter().map(|n| n.1 * n.0[0] * n.0[0]).sum();
                let m2y: f64 = rule.sphere.iter().map(|n| n.1 * n.0[2] * n.0[2]).sum();
                let total: f64 = rule.sphere.iter().map(|n| n.1).sum();
                // x1^2 + .. + y^2 = 1 on the sphere
                assert!((dim as f64 * m2 + m2y - total).abs() < 1e-12);
            }
        }
    }

    fn field_1d(f: impl Fn([f64; 2], f64) -> f64, s: f64) -> ExtensionField<f64> {
        let d = Arc::new(Domain::<f64>::build(Shape::Interval { start: -1.0, end: 1.0 }, 81).unwrap());
        let mesh = YMesh::graded(1.0, 120, 2.0).unwrap();
        ExtensionField::synthetic(d, mesh, s, f).unwrap()
    }

    #[test]
    fn sampler_is_exact_for_multilinear_fields() {
        let w = field_1d(|p, y| 1.0 + 2.0 * p[0] - 3.0 * y + p[0] * y, 0.3);
        let s = Sampler::new(&w).sample([0.1234, 0.0], 0.377).unwrap();
        assert!((s.value - (1.0 + 0.2468 - 1.131 + 0.1234 * 0.377)).abs() < 1e-12);
        assert!((s.grad[0] - (2.0 + 0.377)).abs() < 1e-12);
        assert!((s.grad[2] - (-3.0 + 0.1234)).abs() < 1e-12);
        assert!(Sampler::new(&w).sample([1.5, 0.0], 0.1).is_none());
        assert!(Sampler::new(&w).sample([0.0, 0.0], 1.5).is_none());
    }

    #[test]
    fn trace_norms_examples() {
        let zero = field_1d(|_, _| 0.0, 0.4);
        let r = trace_norms(&zero, [0.0, 0.0], 0.5).unwrap();
        assert_eq!((r.boundary_norm, r.thin_norm, r.energy), (0.0, 0.0, 0.0));
        assert_eq!((r.boundary_ratio, r.thin_ratio), (0.0, 0.0));
        let s = 0.4;
        let power = field_1d(move |_, y| y.powf(2.0 * s), s);
        let r = trace_norms(&power, [0.0, 0.0], 0.5).unwrap();
        assert!(r.thin_norm == 0.0 && r.energy > 0.0);
        assert!(matches!(trace_norms(&power, [0.8, 0.0], 0.5), Err(Error::Rejected(_))));
    }

    #[test]
    fn linear_energy_matches_closed_form() {
        let w = field_1d(|p, _| p[0], 0.5);
        let r = 0.4;
        let t = trace_norms(&w, [0.0, 0.0], r).unwrap();
        // a = 0: energy = area of the half disk, boundary = \int x^2 over the arc
        let pi = std::f64::consts::PI;
        assert!((t.energy - pi * r * r / 2.0).abs() < 1e-10);
        assert!((t.boundary_norm - r.powi(3) * pi / 2.0).abs() < 1e-10);
        assert!((t.thin_norm - 2.0 * r.powi(3) / 3.0).abs() < 1e-10);
    }
}
