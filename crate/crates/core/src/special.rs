//! Special functions needed by the extension profiles: the Gamma function,
//! the modified Bessel function of the second kind `K_nu` and the
//! normalized extension profile built from it.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos approximation with reflection for `x < 1/2`).
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::pi();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    T::two_pi().sqrt() * t.powf(x + half) * (-t).exp() * acc
}

/// Exponentially scaled modified Bessel function `e^z K_nu(z)` for `z > 0`.
///
/// Evaluated with the trapezoidal rule on
/// `K_nu(z) = \int_0^\infty exp(-z cosh t) cosh(nu t) dt`, whose integrand is
/// analytic in a strip, so the rule converges geometrically in the step.
pub fn bessel_k_scaled<T: Real>(nu: T, z: T) -> T {
    assert!(z > T::zero(), "bessel_k_scaled needs z > 0");
    let nu = nu.abs();
    let step = T::lit(0.2).min(T::lit(0.35) / z.sqrt());
    let tiny = T::eps() * T::lit(1e-2);
    let half = T::lit(0.5);
    let term = |t: T| (-(z * (t.cosh() - T::one()))).exp() * (nu * t).cosh();
    let peak = (nu / z).asinh();
    let mut sum = half * term(T::zero());
    let mut k = 1usize;
    loop {
        let t = step * T::from_count(k);
        let f = term(t);
        sum += f;
        if t > peak && f <= tiny * sum {
            break;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    sum * step
}

/// `K_nu(z)`; underflows to zero for large `z`.
pub fn bessel_k<T: Real>(nu: T, z: T) -> T {
    bessel_k_scaled(nu, z) * (-z).exp()
}

/// Log of the smallest positive normal value, below which `exp` underflows.
fn underflow_log<T: Real>() -> T {
    let tiny = T::lit(f64::MIN_POSITIVE);
    if tiny > T::zero() {
        tiny.ln()
    } else {
        // f32 and friends
        T::lit(f32::MIN_POSITIVE as f64).ln()
    }
}

/// Normalized extension profile
/// `psi_s(z) = 2^{1-s} / Gamma(s) * z^s K_s(z)`, with `psi_s(0) = 1`.
///
/// `psi_s` solves `psi'' + (1-2s)/z psi' = psi`, decays at infinity and gives
/// the `y`-dependence of each eigenmode of the weighted extension.
/// Returns `(value, clamped)`; `clamped` is set when the value underflowed and
/// was replaced by zero.
pub fn extension_profile<T: Real>(s: T, z: T) -> (T, bool) {
    if z <= T::zero() {
        return (T::one(), false);
    }
    let log_pref = (T::one() - s) * T::lit(2.0).ln() - gamma(s).ln();
    let log_mag = log_pref + s * z.ln() - z;
    if log_mag < underflow_log::<T>() {
        return (T::zero(), true);
    }
    (log_mag.exp() * bessel_k_scaled(s, z), false)
}

/// Derivative `psi_s'(z) = -2^{1-s}/Gamma(s) * z^s K_{1-s}(z)`.
pub fn extension_profile_derivative<T: Real>(s: T, z: T) -> T {
    if z <= T::zero() {
        // finite (zero) only for s > 1/2; the caller integrates past z = 0
        return T::zero();
    }
    let log_pref = (T::one() - s) * T::lit(2.0).ln() - gamma(s).ln();
    let log_mag = log_pref + s * z.ln() - z;
    if log_mag < underflow_log::<T>() {
        return T::zero();
    }
    -(log_mag.exp() * bessel_k_scaled(T::one() - s, z))
}

/// Leading coefficient of the boundary layer:
/// `psi_s(z) = 1 - kappa_s z^{2s} + O(z^2)` with
/// `kappa_s = Gamma(1-s) / (Gamma(1+s) 4^s)`.
pub fn boundary_layer_coefficient<T: Real>(s: T) -> T {
    gamma(T::one() - s) / (gamma(T::one() + s) * T::lit(4.0).powf(s))
}

/// Constant `d_s = 2 s kappa_s` relating the weighted flux to the spectral
/// operator: `-lim_{y->0} y^a w_y = d_s (-Delta)^s u`. Equals `1` at `s = 1/2`.
pub fn flux_constant<T: Real>(s: T) -> T {
    T::lit(2.0) * s * boundary_layer_coefficient(s)
}
