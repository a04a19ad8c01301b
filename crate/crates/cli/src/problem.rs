//! Building and solving the configured problem.

use std::path::Path;
use std::sync::Arc;

use fracplasma::{
    extend_semianalytic, minimize_energy, project, solve_constrained, solve_fixed_lambda, weighted_energy, Constraint,
    Domain64, EigenBasis64, ExtensionField64, FdExtension, PlasmaSolution64, SolverOptions, SpectralField64, YMesh,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method};

/// Domain and eigenbasis of a configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ExperimentConfig,
    pub domain: Arc<Domain64>,
    pub basis: Arc<EigenBasis64>,
}

impl Problem {
    pub fn build(config: &ExperimentConfig) -> fracplasma::Result<Self> {
        let domain = Arc::new(Domain64::build(config.domain.shape(), config.n)?);
        let modes = config.modes.unwrap_or(domain.interior_len()).min(domain.interior_len());
        let basis = Arc::new(EigenBasis64::new(Arc::clone(&domain), modes)?);
        Ok(Self {
            config: config.clone(),
            domain,
            basis,
        })
    }

    pub fn lambda_1(&self) -> f64 {
        self.basis.values()[0]
    }

    pub fn options(&self) -> SolverOptions<f64> {
        let s = &self.config.solver;
        SolverOptions {
            damping: s.damping,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            constraint: s.constraint.into(),
            constraint_tolerance: s.constraint_tolerance,
            ..Default::default()
        }
    }

    /// The configured multiplier, if fixed.
    pub fn fixed_lambda(&self) -> Option<f64> {
        let c = &self.config;
        c.lambda
            .or_else(|| c.lambda_factor.map(|f| f * self.lambda_1().powf(c.s)))
    }

    pub fn solve(&self) -> fracplasma::Result<PlasmaSolution64> {
        let c = &self.config;
        let opts = self.options();
        match (c.solver.method, c.c) {
            (Method::Minimize, Some(target)) => minimize_energy(target, c.gamma, c.s, &self.basis, &opts),
            (_, Some(target)) => solve_constrained(target, c.gamma, c.s, &self.basis, &opts),
            (_, None) => {
                let lambda = self.fixed_lambda().expect("validated config sets a multiplier");
                solve_fixed_lambda(lambda, c.gamma, c.s, &self.basis, &opts)
            }
        }
    }

    pub fn mesh(&self) -> fracplasma::Result<YMesh<f64>> {
        let e = &self.config.extension;
        let height = e.scaled_height / self.lambda_1().sqrt();
        let grading = e
            .grading
            .unwrap_or_else(|| YMesh::<f64>::default_grading(self.config.s));
        YMesh::graded(height, e.layers, grading)
    }

    pub fn extend(&self, u: &SpectralField64) -> fracplasma::Result<ExtensionField64> {
        extend_semianalytic(u, self.config.s, &self.mesh()?)
    }

    /// Weighted energy of the discrete extension of interior data `f`: the
    /// finite-difference minimizer when the basis is complete, otherwise the
    /// semi-analytic extension of the projection of `f`.
    pub fn extension_energy(&self, f: &[f64]) -> fracplasma::Result<f64> {
        let mesh = self.mesh()?;
        let w = if self.basis.is_complete() {
            FdExtension::with_basis(Arc::clone(&self.basis), &mesh, self.config.s)?.solve(f)?
        } else {
            extend_semianalytic(&project(f, &self.basis)?, self.config.s, &mesh)?
        };
        Ok(weighted_energy(&w))
    }
}

/// Metadata and coefficients of a solved problem, stored as `solution.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionArtifact {
    pub n: usize,
    pub modes: usize,
    pub s: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub lambda_1: f64,
    pub c: f64,
    pub constraint: String,
    pub residual: f64,
    pub iterations: usize,
    pub max_u: f64,
    pub coefficients: Vec<f64>,
}

impl SolutionArtifact {
    pub fn new(problem: &Problem, sol: &PlasmaSolution64) -> Self {
        Self {
            n: problem.config.n,
            modes: problem.basis.count(),
            s: sol.s,
            gamma: sol.gamma,
            lambda: sol.lambda,
            lambda_1: problem.lambda_1(),
            c: sol.c,
            constraint: match sol.constraint {
                Constraint::Quadratic => "quadratic".into(),
                Constraint::Linear => "linear".into(),
            },
            residual: sol.residual,
            iterations: sol.iterations,
            max_u: sol.max_value(),
            coefficients: sol.u.coefficients().to_vec(),
        }
    }

    /// Whether the artifact was produced for this problem.
    pub fn matches(&self, problem: &Problem) -> bool {
        self.n == problem.config.n
            && self.modes == problem.basis.count()
            && self.s == problem.config.s
            && self.gamma == problem.config.gamma
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn field(&self, problem: &Problem) -> fracplasma::Result<SpectralField64> {
        SpectralField64::from_coefficients(Arc::clone(&problem.basis), self.coefficients.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_the_default_square() {
        let p = Problem::build(&ExperimentConfig::default_square()).unwrap();
        let sol = p.solve().unwrap();
        assert!(sol.residual <= 1e-10);
        let art = SolutionArtifact::new(&p, &sol);
        assert!(art.matches(&p));
        assert_eq!(art.field(&p).unwrap().coefficients(), sol.u.coefficients());
        let m = p.mesh().unwrap();
        assert!((m.height() * p.lambda_1().sqrt() - 20.0).abs() < 1e-12);
    }
}
