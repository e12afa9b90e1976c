//! Experiment configuration: a single JSON document, validated in two passes.
//! The first pass reports every missing field by path; the second builds the
//! algebra and checks values against it.

use std::path::PathBuf;

use orbitflow::liealg::AlgebraDescriptor;
use orbitflow::LieAlgebraSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Geodesic,
    Pendulum,
    Semidirect,
    RadiusScan,
    Certify,
    Lax,
}

impl ExperimentKind {
    pub const ALL: [&'static str; 6] = ["geodesic", "pendulum", "semidirect", "radius_scan", "certify", "lax"];

    fn required(self) -> &'static [&'static str] {
        const INTEGRATOR: [&str; 2] = ["integrator.h", "integrator.t_end"];
        match self {
            ExperimentKind::Geodesic => &["epsilon", INTEGRATOR[0], INTEGRATOR[1]],
            ExperimentKind::Pendulum | ExperimentKind::Semidirect | ExperimentKind::Lax => {
                &["epsilon", "b", INTEGRATOR[0], INTEGRATOR[1]]
            }
            ExperimentKind::RadiusScan => &["epsilons", INTEGRATOR[0], INTEGRATOR[1]],
            ExperimentKind::Certify => &["epsilon", "b"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Geodesic => "geodesic",
            ExperimentKind::Pendulum => "pendulum",
            ExperimentKind::Semidirect => "semidirect",
            ExperimentKind::RadiusScan => "radius_scan",
            ExperimentKind::Certify => "certify",
            ExperimentKind::Lax => "lax",
        }
    }
}

const COMMON_REQUIRED: [&str; 3] = ["kind", "algebra", "seed_a"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub h: f64,
    pub t_end: f64,
    /// Re-project onto the constraint set every this many steps; 0 disables.
    #[serde(default = "default_project_every")]
    pub project_every: usize,
}

fn default_project_every() -> usize {
    10
}

fn default_kappa() -> f64 {
    1.0
}

fn default_samples() -> usize {
    20
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub algebra: AlgebraDescriptor,
    /// Coordinates of the orbit seed a in the algebra basis.
    pub seed_a: Vec<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Coordinates of the potential direction b.
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    /// λ grid for shifted families; defaults to r + 2 Chebyshev points.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    /// ε values for `radius_scan`.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// λ values at which `lax` tracks the spectrum of L(λ).
    #[serde(default)]
    pub lax_lambdas: Option<Vec<f64>>,
    /// RNG seed of the initial phase point.
    #[serde(default)]
    pub seed: u64,
    /// First RNG seed of the generic-point samples used by `certify`.
    #[serde(default)]
    pub sample_seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Rescale the initial momentum to H_0 = 1/2.
    #[serde(default = "default_true")]
    pub unit_speed: bool,
    /// Used when `--out` is not given. Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(root, |v, key| v.get(key)).filter(|v| !v.is_null())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("(root): {e}")]))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        if !value.is_object() {
            return Err(CliError::Config(vec!["(root): expected a JSON object".into()]));
        }
        let mut errors: Vec<String> = COMMON_REQUIRED
            .iter()
            .filter(|p| lookup(&value, p).is_none())
            .map(|p| format!("{p}: missing field"))
            .collect();
        if let Some(kind) = lookup(&value, "kind") {
            match serde_json::from_value::<ExperimentKind>(kind.clone()) {
                Ok(kind) => errors.extend(
                    kind.required().iter().filter(|p| lookup(&value, p).is_none()).map(|p| format!("{p}: missing field (required by kind {})", kind.as_str())),
                ),
                Err(_) => errors.push(format!("kind: unknown experiment kind {kind}, expected one of {}", ExperimentKind::ALL.join(", "))),
            }
        }
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(vec![format!("{path}: {}", e.into_inner())])
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the algebra and checks every value against it, collecting all
    /// problems before failing.
    pub fn validate(&self) -> Result<LieAlgebraSpec, CliError> {
        let spec = self.algebra.build().map_err(|e| CliError::Config(vec![format!("algebra: {e}")]))?;
        let d = spec.dim();
        let mut errors = Vec::new();
        let mut finite = |path: &str, v: f64| {
            if !v.is_finite() {
                errors.push(format!("{path}: must be finite"));
            }
        };
        finite("kappa", self.kappa);
        if let Some(e) = self.epsilon {
            finite("epsilon", e);
        }
        if self.seed_a.len() != d {
            errors.push(format!("seed_a: expected {d} coordinates for {}, found {}", spec.name(), self.seed_a.len()));
        } else if self.seed_a.iter().all(|v| *v == 0.0) {
            errors.push("seed_a: the orbit seed must be nonzero".into());
        }
        if let Some(b) = &self.b {
            if b.len() != d {
                errors.push(format!("b: expected {d} coordinates for {}, found {}", spec.name(), b.len()));
            }
        }
        if let Some(int) = &self.integrator {
            if !(int.h > 0.0 && int.h.is_finite()) {
                errors.push(format!("integrator.h: must be positive, found {}", int.h));
            }
            if !(int.t_end > 0.0 && int.t_end.is_finite()) {
                errors.push(format!("integrator.t_end: must be positive, found {}", int.t_end));
            }
        }
        for (path, list) in [("lambda_grid", &self.lambda_grid), ("epsilons", &self.epsilons), ("lax_lambdas", &self.lax_lambdas)] {
            if let Some(list) = list {
                if list.is_empty() {
                    errors.push(format!("{path}: must be nonempty"));
                }
                for (i, v) in list.iter().enumerate() {
                    if !v.is_finite() {
                        errors.push(format!("{path}[{i}]: must be finite"));
                    }
                }
            }
        }
        if self.kind == ExperimentKind::RadiusScan && !spec.is_so3() {
            errors.push(format!("algebra: radius_scan needs so(3), found {}", spec.name()));
        }
        if self.kind == ExperimentKind::Certify && self.samples == 0 {
            errors.push("samples: must be at least 1".into());
        }
        if errors.is_empty() {
            Ok(spec)
        } else {
            Err(CliError::Config(errors))
        }
    }

    /// The config with defaults filled in, as JSON with sorted keys and the
    /// output directory removed.
    pub fn canonical_json(&self) -> String {
        let mut cfg = self.clone();
        cfg.output_dir = None;
        // serde_json maps are ordered by key, so this is canonical.
        let value = serde_json::to_value(&cfg).expect("config serializes");
        value.to_string()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.0)
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        self.integrator.as_ref().expect("validated configs of this kind carry an integrator")
    }
}
