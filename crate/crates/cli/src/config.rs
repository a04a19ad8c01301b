//! Experiment configuration, read from a single JSON document.

use std::fmt;
use std::path::{Path, PathBuf};

use fracplasma::{Constraint, Shape};
use serde::{Deserialize, Serialize};

/// Computational domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval {
        start: f64,
        end: f64,
    },
    Rectangle {
        x: [f64; 2],
        y: [f64; 2],
    },
    /// Disk inside its bounding square.
    Disk {
        center: [f64; 2],
        radius: f64,
    },
}

impl DomainConfig {
    pub fn shape(&self) -> Shape<f64> {
        match *self {
            DomainConfig::Interval { start, end } => Shape::Interval { start, end },
            DomainConfig::Rectangle { x, y } => Shape::Rectangle {
                x: (x[0], x[1]),
                y: (y[0], y[1]),
            },
            DomainConfig::Disk { center, radius } => Shape::Disk {
                center,
                radius,
                x: (center[0] - radius, center[0] + radius),
                y: (center[1] - radius, center[1] + radius),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainConfig::Interval { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Amplitude-normalized Picard iteration.
    #[default]
    Picard,
    /// Constrained energy minimization (requires `c`).
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    #[default]
    Quadratic,
    Linear,
}

impl From<ConstraintKind> for Constraint {
    fn from(k: ConstraintKind) -> Self {
        match k {
            ConstraintKind::Quadratic => Constraint::Quadratic,
            ConstraintKind::Linear => Constraint::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub constraint: ConstraintKind,
    pub damping: f64,
    pub tolerance: f64,
    pub constraint_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Picard,
            constraint: ConstraintKind::Quadratic,
            damping: 0.5,
            tolerance: 1e-10,
            constraint_tolerance: 1e-6,
            max_iterations: 10_000,
        }
    }
}

/// Vertical mesh of the extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionConfig {
    /// Height in units of `1 / sqrt(lambda_1)`.
    pub scaled_height: f64,
    pub layers: usize,
    /// Mesh grading exponent; defaults to `max(2, 1/s)`.
    pub grading: Option<f64>,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self {
            scaled_height: 20.0,
            layers: 200,
            grading: None,
        }
    }
}

/// Where and how to evaluate frequency profiles and blow-ups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyConfig {
    /// Explicit centres; by default evenly spaced free-boundary points.
    pub centers: Option<Vec<[f64; 2]>>,
    pub max_centers: usize,
    pub radii: usize,
    /// Smallest radius in grid spacings.
    pub min_radius_cells: f64,
    /// Largest radius as a fraction of the room around the centre.
    pub max_radius_fraction: f64,
    /// Blow-up radius; defaults to the smallest profile radius.
    pub blowup_radius: Option<f64>,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        Self {
            centers: None,
            max_centers: 8,
            radii: 10,
            min_radius_cells: 2.0,
            max_radius_fraction: 0.9,
            blowup_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    /// Grid nodes per axis, boundary included.
    pub n: usize,
    /// Number of eigenmodes; all interior nodes by default.
    #[serde(default)]
    pub modes: Option<usize>,
    pub s: f64,
    pub gamma: f64,
    /// Constraint value `G(u) = c`.
    #[serde(default)]
    pub c: Option<f64>,
    /// Fixed multiplier.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Fixed multiplier as a multiple of `lambda_1^s`.
    #[serde(default)]
    pub lambda_factor: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub extension: ExtensionConfig,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// A configuration value that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(field, format!("{v} must be positive")))
    }
}

impl ExperimentConfig {
    /// The unit square at `s = 1/2` with a multiplier of twice the threshold.
    pub fn default_square() -> Self {
        Self {
            domain: DomainConfig::Rectangle {
                x: [0.0, 1.0],
                y: [0.0, 1.0],
            },
            n: 33,
            modes: None,
            s: 0.5,
            gamma: 0.1,
            c: None,
            lambda: None,
            lambda_factor: Some(2.0),
            solver: SolverConfig::default(),
            extension: ExtensionConfig::default(),
            frequency: FrequencyConfig::default(),
            output_dir: None,
            seed: 0,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde reports the offending key in backticks for unknown fields
            let field = msg.split('`').nth(1).unwrap_or("config").to_string();
            bad(&field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.domain {
            DomainConfig::Interval { start, end } if !(end > start) => {
                return Err(bad("domain", "interval end must exceed its start"))
            }
            DomainConfig::Rectangle { x, y } if !(x[1] > x[0] && y[1] > y[0]) => {
                return Err(bad("domain", "rectangle sides must be increasing"))
            }
            DomainConfig::Disk { radius, .. } => positive("domain.radius", radius)?,
            _ => {}
        }
        if self.n < 3 {
            return Err(bad("n", "at least 3 grid nodes per axis are needed"));
        }
        if self.modes == Some(0) {
            return Err(bad("modes", "at least one mode is needed"));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(bad("s", format!("{} must lie in (0, 1)", self.s)));
        }
        positive("gamma", self.gamma)?;
        let set = [self.c.is_some(), self.lambda.is_some(), self.lambda_factor.is_some()];
        if set.iter().filter(|&&b| b).count() != 1 {
            return Err(bad("c", "exactly one of c, lambda, lambda_factor must be set"));
        }
        if let Some(c) = self.c {
            positive("c", c)?;
        }
        if let Some(l) = self.lambda {
            positive("lambda", l)?;
        }
        if let Some(l) = self.lambda_factor {
            positive("lambda_factor", l)?;
        }
        if self.solver.method == Method::Minimize && self.c.is_none() {
            return Err(bad("solver.method", "minimize needs a constraint value c"));
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            return Err(bad(
                "solver.damping",
                format!("{} must lie in (0, 1]", self.solver.damping),
            ));
        }
        positive("solver.tolerance", self.solver.tolerance)?;
        positive("solver.constraint_tolerance", self.solver.constraint_tolerance)?;
        if self.solver.max_iterations == 0 {
            return Err(bad("solver.max_iterations", "must be positive"));
        }
        positive("extension.scaled_height", self.extension.scaled_height)?;
        if self.extension.layers < 8 {
            return Err(bad("extension.layers", "at least 8 layers are needed"));
        }
        if let Some(g) = self.extension.grading {
            if !(g >= 1.0) {
                return Err(bad("extension.grading", format!("{g} must be at least 1")));
            }
        }
        if self.frequency.radii < 3 {
            return Err(bad("frequency.radii", "at least 3 radii are needed"));
        }
        positive("frequency.min_radius_cells", self.frequency.min_radius_cells)?;
        let f = self.frequency.max_radius_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(bad("frequency.max_radius_fraction", format!("{f} must lie in (0, 1]")));
        }
        if let Some(r) = self.frequency.blowup_radius {
            positive("frequency.blowup_radius", r)?;
        }
        Ok(())
    }

    /// Scales the grid and the vertical mesh by `factor`.
    pub fn refined(&self, factor: f64) -> Result<Self, ConfigError> {
        positive("refine", factor)?;
        let mut out = self.clone();
        out.n = (((self.n - 1) as f64 * factor).round() as usize + 1).max(3);
        out.extension.layers = ((self.extension.layers as f64 * factor).round() as usize).max(8);
        out.modes = self
            .modes
            .map(|m| ((m as f64 * factor.powi(self.domain.dim() as i32)).round() as usize).max(1));
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "domain": {"kind": "interval", "start": 0.0, "end": 3.141592653589793},
        "n": 65, "s": 0.5, "gamma": 0.1, "lambda_factor": 4.0
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.solver, SolverConfig::default());
        assert_eq!(cfg.domain.dim(), 1);
    }

    #[test]
    fn names_the_bad_field() {
        let err = ExperimentConfig::from_json(&MINIMAL.replace("\"s\": 0.5", "\"s\": 1.5")).unwrap_err();
        assert_eq!(err.field, "s");
        let err =
            ExperimentConfig::from_json(&MINIMAL.replace("\"lambda_factor\": 4.0", "\"c\": 1e-3, \"lambda\": 2.0"))
                .unwrap_err();
        assert_eq!(err.field, "c");
        let err = ExperimentConfig::from_json(&MINIMAL.replace("\"n\": 65", "\"n\": 65, \"bogus\": 1")).unwrap_err();
        assert_eq!(err.field, "bogus");
    }

    #[test]
    fn refinement_scales_the_grid() {
        let cfg = ExperimentConfig::default_square().refined(2.0).unwrap();
        assert_eq!(cfg.n, 65);
        assert_eq!(cfg.extension.layers, 400);
        assert!(ExperimentConfig::default_square().refined(0.0).is_err());
    }
}
