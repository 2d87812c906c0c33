//! The JSON report written by `run`. The schema is described in the README.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{ExperimentConfig, LabError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub library_version: String,
    /// The resolved config, defaults included.
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    /// One flag per tolerance in the config.
    pub pass: BTreeMap<String, bool>,
    pub all_pass: bool,
    pub notes: Vec<String>,
    /// Seconds. The only field that differs between reruns of one config.
    pub wall_time: f64,
}

/// Metric a tolerance refers to, and whether the tolerance is a floor.
///
/// `name` bounds metric `name` from above; `name_min` bounds metric `name`
/// from below.
pub fn tolerance_target(tolerance: &str) -> (&str, bool) {
    match tolerance.strip_suffix("_min") {
        Some(metric) => (metric, true),
        None => (tolerance, false),
    }
}

impl ExperimentReport {
    /// Evaluates every tolerance against `metrics`. A tolerance without a
    /// matching metric is a usage error.
    pub fn assemble(
        config: ExperimentConfig,
        metrics: BTreeMap<String, f64>,
        notes: Vec<String>,
        wall_time: f64,
    ) -> Result<Self, LabError> {
        let mut pass = BTreeMap::new();
        for (name, &tol) in &config.tolerances {
            let (metric, floor) = tolerance_target(name);
            let value = *metrics.get(metric).ok_or_else(|| {
                let known: Vec<_> = metrics.keys().map(String::as_str).collect();
                LabError::usage(
                    &format!("tolerances.{name}"),
                    format!("no metric `{metric}` in this run; available: {}", known.join(", ")),
                )
            })?;
            // NaN fails both ways.
            pass.insert(name.clone(), if floor { value >= tol } else { value <= tol });
        }
        Ok(ExperimentReport {
            experiment: config.experiment.to_string(),
            library_version: crate::LIBRARY_VERSION.to_string(),
            all_pass: pass.values().all(|&p| p),
            config,
            metrics,
            pass,
            notes,
            wall_time,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without `wall_time`, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        ExperimentReport { wall_time: 0.0, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExperimentName;

    #[test]
    fn floors_and_ceilings() {
        let mut cfg = ExperimentConfig::default_for(ExperimentName::PaN).unwrap();
        cfg.tolerances = [("exact_pa_min".to_string(), 0.5), ("limit_gap".to_string(), 0.01)].into();
        let metrics = [("exact_pa".to_string(), 0.6234), ("limit_gap".to_string(), 0.062)].into();
        let r = ExperimentReport::assemble(cfg.clone(), metrics, vec![], 0.0).unwrap();
        assert!(r.pass["exact_pa_min"]);
        assert!(!r.pass["limit_gap"]);
        assert!(!r.all_pass);

        let nan = [("exact_pa".to_string(), f64::NAN), ("limit_gap".to_string(), f64::NAN)].into();
        let r = ExperimentReport::assemble(cfg.clone(), nan, vec![], 0.0).unwrap();
        assert!(r.pass.values().all(|&p| !p));

        let missing = [("exact_pa".to_string(), 0.6)].into();
        assert!(matches!(
            ExperimentReport::assemble(cfg, missing, vec![], 0.0),
            Err(LabError::Usage { field, .. }) if field == "tolerances.limit_gap"
        ));
    }
}
