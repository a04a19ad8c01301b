//! Numerical toolkit for the fractional plasma problem
//!
//! ```text
//! (-Delta)^s u = lambda (u - gamma)_+  in Omega,   u = 0 on dOmega,
//! ```
//!
//! with the spectral fractional Laplacian on intervals, rectangles and
//! disks. The crate covers the Dirichlet eigenbasis of the grid Laplacian,
//! spectral powers, the weighted harmonic extension to `Omega x (0, Y)`,
//! Picard and energy-minimizing solvers, and the analysis of the free
//! boundary `{u = gamma}`.
//!
//! Everything is generic over the scalar type through [`Real`]; the `*64`
//! and `*32` aliases fix it.
//!
//! ```
//! use std::sync::Arc;
//! use fracplasma::{Domain64, EigenBasis64, Shape, SolverOptions, solve_constrained};
//!
//! let domain = Arc::new(Domain64::build(Shape::Interval { start: 0.0, end: 1.0 }, 33).unwrap());
//! let basis = Arc::new(EigenBasis64::new(domain, 31).unwrap());
//! let sol = solve_constrained(1e-3, 0.1, 0.5, &basis, &SolverOptions::default()).unwrap();
//! assert!(sol.residual < 1e-8);
//! ```

// `!(x > 0)` style comparisons deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod domain;
pub mod error;
pub mod extension;
pub mod fractional;
pub mod free_boundary;
pub mod plasma;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod util;

pub use basis::{eigendecompose, eigendecompose_dense, EigenBasis};
pub use domain::{build_domain, Axis, Domain, Shape};
pub use error::{Error, Result};
pub use extension::{
    check_uy_sign, dtn, extend_fd, extend_semianalytic, hopf_ratio, trace_norms, weighted_energy, ExtensionField,
    FdExtension, HalfBallRule, Provenance, Sampler, TraceReport, UySignReport, YMesh,
};
pub use fractional::{apply_fractional, fractional_energy, invert_fractional, project, SpectralField};
pub use free_boundary::{
    blowup, check_boundary_inclusion, check_subharmonic_strip, classify_point, extract_free_boundary,
    frequency_profile, hessian_bound, singular_census, BlowupField, BoundaryPoint, Census, Classification,
    ClassifyOptions, FreeBoundary, FrequencyProfile, InclusionReport, QuadraticFit, StripReport, Tag,
};
pub use plasma::{
    minimize_energy, multiplier_for_amplitude, plasma_residual, plasma_rhs, solve_constrained, solve_fixed_lambda,
    steiner_symmetrize, Constraint, PlasmaSolution, SolverOptions,
};
pub use scalar::Real;

pub type Domain64 = Domain<f64>;
pub type EigenBasis64 = EigenBasis<f64>;
pub type SpectralField64 = SpectralField<f64>;
pub type ExtensionField64 = ExtensionField<f64>;
pub type PlasmaSolution64 = PlasmaSolution<f64>;
pub type FreeBoundary64 = FreeBoundary<f64>;
pub type FrequencyProfile64 = FrequencyProfile<f64>;

pub type Domain32 = Domain<f32>;
pub type EigenBasis32 = EigenBasis<f32>;
pub type SpectralField32 = SpectralField<f32>;
pub type ExtensionField32 = ExtensionField<f32>;
pub type PlasmaSolution32 = PlasmaSolution<f32>;
pub type FreeBoundary32 = FreeBoundary<f32>;
pub type FrequencyProfile32 = FrequencyProfile<f32>;
