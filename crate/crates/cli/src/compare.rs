//! Metric-by-metric comparison of two run manifests.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::Manifest;

/// Two metric values agree when |a − b| ≤ REL_TOL · max(|a|, |b|, 1).
pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDiff {
    pub metric: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// a − b when both are present.
    pub diff: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub kind: String,
    pub config_hash_a: String,
    pub config_hash_b: String,
    pub rel_tol: f64,
    /// Only the metrics that differ beyond tolerance.
    pub differences: Vec<MetricDiff>,
    /// terminal_error(a) / terminal_error(b); near 16 when b halves the step of a.
    pub terminal_error_ratio: Option<f64>,
    /// radius(a) − radius(b) for circle-measuring runs.
    pub radius_difference: Option<f64>,
}

pub fn compare(a: &Manifest, b: &Manifest) -> Result<DiffReport, CliError> {
    if a.kind != b.kind {
        return Err(CliError::Usage(format!(
            "cannot compare a {} run with a {} run",
            serde_json::to_value(a.kind).map_err(orbitflow::Error::from)?,
            serde_json::to_value(b.kind).map_err(orbitflow::Error::from)?
        )));
    }
    let names: BTreeSet<&String> = a.metrics.keys().chain(b.metrics.keys()).collect();
    let mut differences = Vec::new();
    for name in names {
        let (va, vb) = (a.metrics.get(name).copied(), b.metrics.get(name).copied());
        let scale = va.unwrap_or(0.0).abs().max(vb.unwrap_or(0.0).abs()).max(1.0);
        let tolerance = REL_TOL * scale;
        let diff = va.zip(vb).map(|(x, y)| x - y);
        // NaN differences count as differences.
        let same = matches!(diff, Some(d) if d.abs() <= tolerance) || (va.is_some_and(f64::is_nan) && vb.is_some_and(f64::is_nan));
        if !same {
            differences.push(MetricDiff { metric: name.clone(), a: va, b: vb, diff, tolerance });
        }
    }
    let pair = |key: &str| a.metrics.get(key).copied().zip(b.metrics.get(key).copied());
    Ok(DiffReport {
        kind: serde_json::to_value(a.kind).map_err(orbitflow::Error::from)?.as_str().unwrap_or_default().to_string(),
        config_hash_a: a.config_hash.clone(),
        config_hash_b: b.config_hash.clone(),
        rel_tol: REL_TOL,
        differences,
        terminal_error_ratio: pair("terminal_error").filter(|(_, y)| *y > 0.0).map(|(x, y)| x / y),
        radius_difference: pair("radius").map(|(x, y)| x - y),
    })
}
