//! Checks against values computed independently of this crate (closed forms
//! and high-precision reference evaluations).

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;
use std::sync::Arc;

use fracplasma::special::{bessel_k, boundary_layer_coefficient, extension_profile, flux_constant};
use fracplasma::{extract_free_boundary, solve_fixed_lambda, Domain64, EigenBasis64, Shape, SolverOptions};

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got}, want {want}");
}

#[test]
fn bessel_k_reference_values() {
    close(bessel_k(0.25, 0.5), 0.960_316_324_931_886_02, 1e-12);
    close(bessel_k(0.75, 2.0), 0.127_902_978_629_179_03, 1e-12);
    close(bessel_k(1.0 / 3.0, 10.0), 1.787_460_827_105_533_5e-5, 1e-12);
}

#[test]
fn extension_profile_reference_values() {
    close(boundary_layer_coefficient(0.25), 0.955_977_594_972_249_93, 1e-13);
    close(flux_constant(0.25), 0.477_988_797_486_124_96, 1e-13);
    close(flux_constant(0.75), 2.092_099_240_106_203_2, 1e-13);
    close(flux_constant(0.5), 1.0, 1e-14);
    close(extension_profile(0.25, 0.3).0, 0.497_110_667_954_188_38, 1e-12);
    close(extension_profile(0.25, 2.0).0, 0.063_646_271_806_136_585, 1e-12);
    close(extension_profile(0.75, 0.3).0, 0.858_676_062_957_292_11, 1e-12);
    close(extension_profile(0.75, 2.0).0, 0.208_750_180_035_698_68, 1e-12);
    close(extension_profile(0.5, 1.7).0, (-1.7f64).exp(), 1e-13);
}

#[test]
fn interval_eigenvalues_match_the_stencil_symbol() {
    let n = 65;
    let d = Arc::new(Domain64::build(Shape::Interval { start: 0.0, end: PI }, n).unwrap());
    let b = EigenBasis64::new(Arc::clone(&d), n - 2).unwrap();
    let h = d.h();
    for (k, &l) in b.values().iter().enumerate() {
        let want = 4.0 / (h * h) * ((k + 1) as f64 * h / 2.0).sin().powi(2);
        close(l, want, 1e-12);
    }
}

#[test]
fn square_eigenvalues_are_sums() {
    let d = Arc::new(
        Domain64::build(
            Shape::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 2.0),
            },
            17,
        )
        .unwrap(),
    );
    let b = EigenBasis64::new(Arc::clone(&d), 3).unwrap();
    let [hx, hy] = d.spacing();
    let sym = |k: f64, h: f64, len: f64| 4.0 / (h * h) * (k * PI * h / (2.0 * len)).sin().powi(2);
    close(b.values()[0], sym(1.0, hx, 1.0) + sym(1.0, hy, 2.0), 1e-12);
    close(b.values()[1], sym(1.0, hx, 1.0) + sym(2.0, hy, 2.0), 1e-12);
}

/// For `s = 1` and `lambda = 4` on `(0, pi)` the continuum plasma is
/// `(pi/4, 3pi/4)` with peak `gamma + gamma / (pi/4 * 2)`.
#[test]
fn local_plasma_matches_the_closed_form() {
    let gamma = 0.1;
    let d = Arc::new(Domain64::build(Shape::Interval { start: 0.0, end: PI }, 257).unwrap());
    let b = Arc::new(EigenBasis64::new(Arc::clone(&d), d.interior_len()).unwrap());
    let sol = solve_fixed_lambda(4.0, gamma, 1.0, &b, &SolverOptions::default()).unwrap();
    close(sol.max_value(), gamma + gamma / (PI / 2.0), 1e-4);
    let fb = extract_free_boundary(&d, &sol.u.grid_values(), gamma).unwrap();
    let mut xs: Vec<f64> = fb.points.iter().map(|p| p.position[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs.len(), 2);
    assert!((xs[0] - PI / 4.0).abs() < d.h());
    assert!((xs[1] - 3.0 * PI / 4.0).abs() < d.h());
}
