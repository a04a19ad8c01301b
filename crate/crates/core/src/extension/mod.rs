//! Weighted extension `div(y^a grad w) = 0` on `Omega x (0, Y)` with
//! `a = 1 - 2s`, and the Dirichlet-to-Neumann map that recovers the spectral
//! fractional Laplacian on the thin space `y = 0`.

mod fd;
mod mesh;
mod sample;

use std::sync::Arc;

use nalgebra::DMatrix;

pub use fd::{extend_fd, FdExtension};
pub use mesh::{weighted_length, YMesh};
pub(crate) use sample::check_half_ball;
pub use sample::{trace_norms, HalfBallRule, Sample, Sampler, TraceReport};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fractional::SpectralField;
use crate::quadrature::Rule;
use crate::scalar::Real;
use crate::special::{boundary_layer_coefficient, extension_profile, extension_profile_derivative};

/// How an extension field was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SemiAnalytic,
    FiniteDifference,
    Synthetic,
}

/// Values of `w(x_i, y_j)` on the full thin grid times the y-mesh, stored
/// layer by layer.
#[derive(Debug, Clone)]
pub struct ExtensionField<T: Real> {
    domain: Arc<Domain<T>>,
    mesh: YMesh<T>,
    s: T,
    values: Vec<T>,
    provenance: Provenance,
    clamped: usize,
}

pub(crate) fn check_extension_order<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "extension order s = {s} must lie in (0, 1)"
        )))
    }
}

impl<T: Real> ExtensionField<T> {
    /// Wraps layer-major values (`(M + 1) * grid_len` entries).
    pub fn from_values(
        domain: Arc<Domain<T>>,
        mesh: YMesh<T>,
        s: T,
        values: Vec<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_extension_order(s)?;
        let expected = (mesh.layers() + 1) * domain.grid_len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            domain,
            mesh,
            s,
            values,
            provenance,
            clamped: 0,
        })
    }

    /// Samples a closed-form field `f(x, y)` on every grid node and layer.
    /// In one dimension only `x[0]` is meaningful.
    pub fn synthetic(domain: Arc<Domain<T>>, mesh: YMesh<T>, s: T, f: impl Fn([T; 2], T) -> T) -> Result<Self> {
        let n = domain.grid_len();
        let positions: Vec<[T; 2]> = (0..n).map(|g| domain.position(g)).collect();
        let mut values = Vec::with_capacity(n * (mesh.layers() + 1));
        for &y in mesh.nodes() {
            values.extend(positions.iter().map(|&p| f(p, y)));
        }
        Self::from_values(domain, mesh, s, values, Provenance::Synthetic)
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<Domain<T>> {
        &self.domain
    }

    pub fn mesh(&self) -> &YMesh<T> {
        &self.mesh
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Weight exponent `a = 1 - 2s`.
    pub fn a(&self) -> T {
        T::one() - T::lit(2.0) * self.s
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Number of mode profiles that underflowed and were set to zero.
    pub fn clamped_profiles(&self) -> usize {
        self.clamped
    }

    /// Full-grid values on layer `j`.
    pub fn layer(&self, j: usize) -> &[T] {
        let n = self.domain.grid_len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn value(&self, g: usize, j: usize) -> T {
        self.values[j * self.domain.grid_len() + g]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Thin trace `w(., 0)` on the interior nodes.
    pub fn trace(&self) -> Vec<T> {
        self.domain.restrict(self.layer(0))
    }

    /// The field minus a constant; used to centre a solution at its level.
    pub fn shifted(&self, c: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v -= c);
        out
    }
}

/// Semi-analytic extension `w = sum a_k phi_k psi_s(sqrt(lambda_k) y)`.
pub fn extend_semianalytic<T: Real>(u: &SpectralField<T>, s: T, mesh: &YMesh<T>) -> Result<ExtensionField<T>> {
    check_extension_order(s)?;
    let basis = u.basis();
    let domain = Arc::clone(basis.domain_arc());
    let roots: Vec<T> = basis.values().iter().map(|l| l.sqrt()).collect();
    let a = u.coefficients();
    let mut values = Vec::with_capacity(domain.grid_len() * (mesh.layers() + 1));
    let mut clamped = 0usize;
    values.extend(domain.embed(u.nodal()));
    let mut coeffs = vec![T::zero(); a.len()];
    for &y in &mesh.nodes()[1..] {
        for ((c, &ak), &r) in coeffs.iter_mut().zip(a).zip(&roots) {
            if ak == T::zero() {
                *c = T::zero();
                continue;
            }
            let (p, was_clamped) = extension_profile(s, r * y);
            clamped += usize::from(was_clamped);
            *c = ak * p;
        }
        values.extend(domain.embed(&basis.synthesize(&coeffs)));
    }
    if clamped > 0 {
        log::debug!("{clamped} extension profile values underflowed and were clamped to zero");
    }
    let mut field = ExtensionField::from_values(domain, mesh.clone(), s, values, Provenance::SemiAnalytic)?;
    field.clamped = clamped;
    Ok(field)
}

/// Exponents of the small-`y` expansion `w - w(., 0)` fitted by [`dtn`].
fn fit_exponents<T: Real>(s: T) -> [T; 6] {
    let two = T::lit(2.0);
    let ts = two * s;
    [ts, two, ts + two, T::lit(4.0), ts + T::lit(4.0), T::lit(6.0)]
}

/// Weights `r_j` with `b = sum_j r_j (w_j - w_0)` for the coefficient `b` of
/// `y^{2s}` in a least-squares power fit over the first interior layers.
fn flux_weights<T: Real>(mesh: &YMesh<T>, s: T) -> Result<Vec<T>> {
    let terms = 6.min(mesh.layers() - 1);
    if terms == 0 {
        return Err(Error::InvalidInput(
            "the D2N fit needs at least one interior layer".into(),
        ));
    }
    let ys = &mesh.nodes()[1..=terms];
    let scale = ys[terms - 1];
    let exps = fit_exponents(s);
    let m = DMatrix::from_fn(terms, terms, |j, p| (ys[j] / scale).powf(exps[p]));
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::LinearSolve("singular D2N fit matrix".into()))?;
    let norm = scale.powf(exps[0]);
    Ok((0..terms).map(|j| inv[(0, j)] / norm).collect())
}

fn flux_coefficients<T: Real>(w: &ExtensionField<T>) -> Result<Vec<T>> {
    let weights = flux_weights(w.mesh(), w.s())?;
    let base = w.layer(0);
    let mut b = vec![T::zero(); base.len()];
    for (j, &r) in weights.iter().enumerate() {
        for ((bg, &v), &v0) in b.iter_mut().zip(w.layer(j + 1)).zip(base) {
            *bg += r * (v - v0);
        }
    }
    Ok(b)
}

/// Dirichlet-to-Neumann map on the interior nodes, normalized to equal
/// `(-Delta)^s` of the trace.
///
/// Fits `w(x, y) - w(x, 0) ~ b(x) y^{2s} + c y^2 + ...` on the lowest layers
/// and returns `-b / kappa_s`, where `psi_s(z) = 1 - kappa_s z^{2s} + ...`.
pub fn dtn<T: Real>(w: &ExtensionField<T>) -> Result<Vec<T>> {
    let kappa = boundary_layer_coefficient(w.s());
    let b = flux_coefficients(w)?;
    Ok(w.domain().restrict(&b).into_iter().map(|v| -v / kappa).collect())
}

/// Result of scanning one-sided `y`-differences of an extension field.
#[derive(Debug, Clone, PartialEq)]
pub struct UySignReport<T> {
    /// Largest one-sided difference quotient `(w_{j+1} - w_j)/(y_{j+1} - y_j)`.
    pub max_slope: T,
    /// `(grid node, layer)` pairs whose slope exceeds the tolerance.
    pub violations: Vec<(usize, usize)>,
    pub checked: usize,
}

impl<T> UySignReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `w_y <= tol` at every node with one-sided differences.
pub fn check_uy_sign<T: Real>(w: &ExtensionField<T>, tol: T) -> UySignReport<T> {
    let ys = w.mesh().nodes();
    let mut max_slope = T::lit(f64::NEG_INFINITY);
    let mut violations = Vec::new();
    for j in 0..w.mesh().layers() {
        let dy = ys[j + 1] - ys[j];
        for (g, (&lo, &hi)) in w.layer(j).iter().zip(w.layer(j + 1)).enumerate() {
            let slope = (hi - lo) / dy;
            max_slope = max_slope.max(slope);
            if slope > tol {
                violations.push((g, j));
            }
        }
    }
    UySignReport {
        max_slope,
        violations,
        checked: w.mesh().layers() * w.domain().grid_len(),
    }
}

/// Estimate of `lim (w(x0, y) - w(x0, 0)) / y^{1-a}` at the grid node nearest
/// to `x0`, using the same power fit as [`dtn`].
///
/// The field must attain its minimum over the surrounding half-ball of radius
/// `3h` at `(x0, 0)`, and must not be constant there.
pub fn hopf_ratio<T: Real>(w: &ExtensionField<T>, x0: [T; 2]) -> Result<T> {
    let d = w.domain();
    let g0 = nearest_node(d, x0);
    let radius = T::lit(3.0) * d.h();
    let p0 = d.position(g0);
    let w0 = w.value(g0, 0);
    let mut spread = T::zero();
    for (j, &y) in w.mesh().nodes().iter().enumerate() {
        if y > radius {
            break;
        }
        for g in 0..d.grid_len() {
            let p = d.position(g);
            let dist2 = (p[0] - p0[0]).powi(2) + (p[1] - p0[1]).powi(2) + y * y;
            if dist2 > radius * radius {
                continue;
            }
            let diff = w.value(g, j) - w0;
            let tol = T::lit(1e-12) * (T::one() + w0.abs());
            if diff < -tol {
                return Err(Error::Rejected(format!(
                    "field drops below its value at the centre at node {g}, layer {j}"
                )));
            }
            spread = spread.max(diff.abs());
        }
    }
    if spread <= T::lit(1e-14) * (T::one() + w0.abs()) {
        return Err(Error::Rejected("field is constant near the centre".into()));
    }
    Ok(flux_coefficients(w)?[g0])
}

pub(crate) fn nearest_node<T: Real>(d: &Domain<T>, x: [T; 2]) -> usize {
    let [nx, ny] = d.counts();
    let [hx, hy] = d.spacing();
    let o = d.origin();
    let idx = |v: T, o: T, h: T, n: usize| -> usize {
        let k = ((v - o) / h).round();
        if k < T::zero() {
            0
        } else {
            k.to_usize().unwrap_or(0).min(n - 1)
        }
    };
    let ix = idx(x[0], o[0], hx, nx);
    let iy = if d.dim() == 1 { 0 } else { idx(x[1], o[1], hy, ny) };
    d.grid_index(ix, iy)
}

/// Discrete weighted energy `\int y^a |grad w|^2` of a field with zero lateral
/// data: `sum_j W_j <w_j, L_h w_j> + sum_j alpha_j ||w_{j+1} - w_j||^2`, with
/// `W_j` the exact weighted length of the dual cell around `y_j` and
/// `alpha_j = (\int_{y_j}^{y_{j+1}} y^a) / (y_{j+1} - y_j)^2`.
///
/// This is the energy minimized by [`extend_fd`].
pub fn weighted_energy<T: Real>(w: &ExtensionField<T>) -> T {
    let (dual, face) = layer_weights(w.mesh(), w.a());
    let d = w.domain();
    let m = w.mesh().layers();
    let mut e = T::zero();
    for j in 0..m {
        let wj = d.restrict(w.layer(j));
        let lw = d.laplacian(&wj);
        e += dual[j] * d.inner(&wj, &lw);
        let diff: Vec<T> = w.layer(j + 1).iter().zip(w.layer(j)).map(|(&p, &q)| p - q).collect();
        let diff = d.restrict(&diff);
        e += face[j] * d.inner(&diff, &diff);
    }
    e
}

/// Dual-cell weights `W_j` (`j = 0..=M`) and face weights `alpha_j`
/// (`j = 0..M`) of the weighted scheme.
pub(crate) fn layer_weights<T: Real>(mesh: &YMesh<T>, a: T) -> (Vec<T>, Vec<T>) {
    let ys = mesh.nodes();
    let m = mesh.layers();
    let half = T::lit(0.5);
    let mids: Vec<T> = ys.windows(2).map(|p| (p[0] + p[1]) * half).collect();
    let dual = (0..=m)
        .map(|j| {
            let lo = if j == 0 { T::zero() } else { mids[j - 1] };
            let hi = if j == m { ys[m] } else { mids[j] };
            weighted_length(a, lo, hi)
        })
        .collect();
    let face = (0..m)
        .map(|j| {
            let dy = ys[j + 1] - ys[j];
            weighted_length(a, ys[j], ys[j + 1]) / (dy * dy)
        })
        .collect();
    (dual, face)
}

/// `\int_0^Z z^a (psi_s^2 + psi_s'^2) dz`, the weighted energy of a unit
/// mode profile truncated at `Z`; tends to the flux constant `2 s kappa_s`.
pub fn profile_energy<T: Real>(s: T, z_max: T) -> T {
    let a = T::one() - T::lit(2.0) * s;
    let psi = |z: T| extension_profile(s, z).0;
    // z^a psi'^2 = z^{-a} (z^a psi')^2 with z^a psi' bounded at 0
    let flux = |z: T| z.powf(a) * extension_profile_derivative(s, z);
    let z0 = T::lit(1e-3).min(z_max);
    let ja = Rule::jacobi(16, a);
    let jm = Rule::jacobi(16, -a);
    let near_value = ja.integrate(|t| psi(z0 * t).powi(2)) * z0.powf(a + T::one());
    let near_flux = jm.integrate(|t| flux(z0 * t).powi(2)) * z0.powf(T::one() - a);
    let gl = Rule::<T>::legendre(20);
    let mut total = near_value + near_flux;
    let mut lo = z0;
    while lo < z_max {
        let hi = if lo < T::one() {
            (lo * T::lit(2.0)).min(T::one())
        } else {
            lo + T::one()
        }
        .min(z_max);
        let len = hi - lo;
        total += gl.integrate(|t| {
            let z = lo + len * t;
            let d = extension_profile_derivative(s, z);
            z.powf(a) * (psi(z).powi(2) + d * d)
        }) * len;
        lo = hi;
    }
    total
}

/// Weighted energy of the semi-analytic extension of `u` truncated at height
/// `Y`: `sum_k a_k^2 lambda_k^s I_s(sqrt(lambda_k) Y)`.
pub fn semianalytic_energy<T: Real>(u: &SpectralField<T>, s: T, height: T) -> Result<T> {
    check_extension_order(s)?;
    Ok(u.coefficients()
        .iter()
        .zip(u.basis().values())
        .filter(|(&a, _)| a != T::zero())
        .fold(T::zero(), |acc, (&a, &l)| {
            acc + a * a * (s * l.ln()).exp() * profile_energy(s, l.sqrt() * height)
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eigendecompose;
    use crate::domain::Shape;
    use crate::fractional::{apply_fractional, fractional_energy, project};
    use crate::special::flux_constant;
    use std::f64::consts::PI;

    fn interval_basis(n: usize) -> Arc<crate::basis::EigenBasis<f64>> {
        let d = Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, n).unwrap();
        Arc::new(eigendecompose(&d, n - 2).unwrap())
    }

    #[test]
    fn half_order_profile_is_exponential() {
        let b = interval_basis(65);
        let d = b.domain();
        let f: Vec<f64> = (0..d.interior_len()).map(|i| d.interior_position(i)[0].sin()).collect();
        let u = project(&f, &b).unwrap();
        let mesh = YMesh::graded(3.0, 30, 2.0).unwrap();
        let w = extend_semianalytic(&u, 0.5, &mesh).unwrap();
        let lam = b.values()[0].sqrt();
        for (j, &y) in mesh.nodes().iter().enumerate() {
            for (i, &g) in d.interior_nodes().iter().enumerate() {
                assert!((w.value(g, j) - f[i] * (-lam * y).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_data_extends_to_zero() {
        let b = interval_basis(17);
        let u = SpectralField::zeros(Arc::clone(&b));
        let mesh = YMesh::for_order(0.3, b.values()[0], 21.0, 20).unwrap();
        let w = extend_semianalytic(&u, 0.3, &mesh).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_separates() {
        let b = interval_basis(33);
        let u = SpectralField::mode(Arc::clone(&b), 0);
        let mesh = YMesh::for_order(0.3, b.values()[0], 21.0, 40).unwrap();
        let w = extend_semianalytic(&u, 0.3, &mesh).unwrap();
        let d = b.domain();
        let phi = u.nodal();
        for j in 0..=40 {
            let ratios: Vec<f64> = d
                .interior_nodes()
                .iter()
                .zip(phi)
                .map(|(&g, &p)| w.value(g, j) / p)
                .collect();
            let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - ratios[0]).abs()));
            assert!(spread < 1e-12);
        }
    }

    #[test]
    fn dtn_reproduces_fractional_laplacian() {
        let b = interval_basis(129);
        for &s in &[0.25, 0.5, 0.75] {
            let coeffs: Vec<f64> = (0..b.count())
                .map(|k| if k < 10 { 1.0 / (k as f64 + 1.0) } else { 0.0 })
                .collect();
            let u = SpectralField::from_coefficients(Arc::clone(&b), coeffs).unwrap();
            let mesh = YMesh::for_order(s, b.values()[0], 20.0, 200).unwrap();
            let w = extend_semianalytic(&u, s, &mesh).unwrap();
            let got = dtn(&w).unwrap();
            let want = apply_fractional(&u, s).unwrap();
            let diff: Vec<f64> = got.iter().zip(want.nodal()).map(|(a, b)| a - b).collect();
            let rel = b.domain().norm(&diff) / want.norm();
            assert!(rel < 1e-6, "s={s}: {rel}");
        }
    }

    #[test]
    fn dtn_of_harmonic_exponential() {
        let d = Arc::new(Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, 101).unwrap());
        let mesh = YMesh::graded(20.0, 200, 2.0).unwrap();
        let w = ExtensionField::synthetic(Arc::clone(&d), mesh.clone(), 0.5, |p, y| p[0].sin() * (-y).exp()).unwrap();
        let flux = dtn(&w).unwrap();
        for (i, v) in flux.iter().enumerate() {
            assert!((v - d.interior_position(i)[0].sin()).abs() < 1e-8);
        }
        let flat = ExtensionField::synthetic(d, mesh, 0.3, |p, _| p[0]).unwrap();
        assert!(dtn(&flat).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn uy_sign_examples() {
        let d = Arc::new(Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, 21).unwrap());
        let mesh = YMesh::graded(5.0, 30, 2.0).unwrap();
        let decay =
            ExtensionField::synthetic(Arc::clone(&d), mesh.clone(), 0.5, |p, y| p[0].sin() * (-y).exp()).unwrap();
        assert!(check_uy_sign(&decay, 0.0).passed());
        let rising = ExtensionField::synthetic(d, mesh, 0.5, |_, y| y).unwrap();
        let r = check_uy_sign(&rising, 1e-8);
        assert_eq!(r.violations.len(), r.checked);
        assert!((r.max_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hopf_examples() {
        let d = Arc::new(Domain::<f64>::build(Shape::Interval { start: -1.0, end: 1.0 }, 41).unwrap());
        let mesh = YMesh::graded(2.0, 100, 3.0).unwrap();
        let power = ExtensionField::synthetic(Arc::clone(&d), mesh.clone(), 0.3, |_, y| y.powf(0.6)).unwrap();
        assert!((hopf_ratio(&power, [0.1, 0.0]).unwrap() - 1.0).abs() < 1e-10);
        let constant = ExtensionField::synthetic(Arc::clone(&d), mesh.clone(), 0.3, |_, _| 2.0).unwrap();
        assert!(matches!(hopf_ratio(&constant, [0.0, 0.0]), Err(Error::Rejected(_))));
        let saddle = ExtensionField::synthetic(d, mesh, 0.3, |p, _| p[0]).unwrap();
        assert!(matches!(hopf_ratio(&saddle, [0.0, 0.0]), Err(Error::Rejected(_))));

        let d = Arc::new(Domain::<f64>::build(Shape::Interval { start: 0.0, end: PI }, 101).unwrap());
        let mesh = YMesh::graded(10.0, 200, 2.0).unwrap();
        let w = ExtensionField::synthetic(d, mesh, 0.5, |p, y| 1.0 - p[0].sin() * (-y).exp()).unwrap();
        let ratio = hopf_ratio(&w, [PI / 2.0, 0.0]).unwrap();
        assert!(ratio > 0.0 && (ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn profile_energy_equals_flux_constant() {
        for &s in &[0.25f64, 0.5, 0.75] {
            let e = profile_energy(s, 20.0);
            assert!((e - flux_constant(s)).abs() < 1e-6 * flux_constant(s), "s={s}: {e}");
        }
    }

    #[test]
    fn energy_identity_for_single_modes() {
        let b = interval_basis(65);
        for &s in &[0.3, 0.6] {
            for k in [0, 3] {
                let u = SpectralField::mode(Arc::clone(&b), k).scaled(1.7);
                let height = 20.0 / b.values()[0].sqrt();
                let e = semianalytic_energy(&u, s, height).unwrap();
                let want = flux_constant(s) * fractional_energy(&u, s).unwrap();
                assert!((e - want).abs() < 1e-6 * want);
            }
        }
    }
}
