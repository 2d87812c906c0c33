//! Experiment configuration.
//!
//! A config is one flat JSON object. Values are resolved in three layers,
//! later layers winning: built-in defaults for the experiment, then the
//! file, then command-line flags. A `tolerances` object in the file replaces
//! the default set as a whole, so it can also drop criteria.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use hdickman_core::additive::ThetaSpec;
use hdickman_core::dickman::DEFAULT_HORIZON;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Mertens,
    Rho,
    PaN,
    Representation,
    Poissonization,
    LimitTheorem,
    Proposition,
    Bias,
    ErdosKac,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::Mertens,
        ExperimentName::Rho,
        ExperimentName::PaN,
        ExperimentName::Representation,
        ExperimentName::Poissonization,
        ExperimentName::LimitTheorem,
        ExperimentName::Proposition,
        ExperimentName::Bias,
        ExperimentName::ErdosKac,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Mertens => "mertens",
            ExperimentName::Rho => "rho",
            ExperimentName::PaN => "pa-n",
            ExperimentName::Representation => "representation",
            ExperimentName::Poissonization => "poissonization",
            ExperimentName::LimitTheorem => "limit-theorem",
            ExperimentName::Proposition => "proposition",
            ExperimentName::Bias => "bias",
            ExperimentName::ErdosKac => "erdos-kac",
        }
    }

    /// One-line summary shown by `list`.
    pub fn description(self) -> &'static str {
        match self {
            ExperimentName::Mertens => {
                "prime sums: |sum log p/p - log n| <= 2 on a grid up to n, stability of the 1/p constant"
            }
            ExperimentName::Rho => {
                "Dickman rho: closed-form and oracle values, equation residual, series samples vs rho-based CDF"
            }
            ExperimentName::PaN => "exact probability that the geometric product stays <= n",
            ExperimentName::Representation => {
                "conditioned geometric product equals the harmonic law, exactly, for every m <= n"
            }
            ExperimentName::Poissonization => {
                "compound Poisson exponent vs geometric law; Poissonized vs geometric characteristic function"
            }
            ExperimentName::LimitTheorem => {
                "normalized additive function of a harmonic sample vs the conditioned limit law (KS)"
            }
            ExperimentName::Proposition => {
                "characteristic functions: Poisson integrals and the unconditioned linear statistic vs their limits"
            }
            ExperimentName::Bias => "size-bias identity E[D f(D)] = int_0^1 E[f(D + t)] dt and E[D] = 1",
            ExperimentName::ErdosKac => {
                "contrast: standardized distinct-prime count of a uniform sample vs the normal law"
            }
        }
    }

    /// `theta` used when the config names neither `theta` nor `alpha`.
    fn default_theta(self) -> Option<&'static str> {
        match self {
            ExperimentName::LimitTheorem => Some("linear"),
            ExperimentName::Proposition => Some("square"),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        ExperimentName::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = ExperimentName::ALL.iter().map(|e| e.as_str()).collect();
            LabError::usage("experiment", format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// How `limit-theorem` draws its finite-n sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Inverse-CDF harmonic draws, factorized.
    Harmonic,
    /// Geometric exponent vectors conditioned on the product being `<= n`.
    Conditioned,
}

/// A fully resolved configuration. Serialized verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub theta: Option<String>,
    pub alpha: Option<f64>,
    pub slowly_varying: Option<String>,
    pub sampler: Option<SamplerKind>,
    pub horizon: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<String>,
    pub prime_cache: Option<String>,
    pub write_csv: bool,
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<ExperimentName>,
    pub n: Option<u64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub output_path: Option<String>,
    pub prime_cache: Option<String>,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn tolerances(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

impl ExperimentConfig {
    /// Built-in defaults. For `limit-theorem` they depend on the degree of
    /// `theta`: degree one compares exact harmonic draws with the uniform
    /// law, any other degree compares conditioned draws with limit draws.
    pub fn defaults(experiment: ExperimentName, alpha: f64) -> Self {
        use ExperimentName::*;
        let (n, samples, tols) = match experiment {
            Mertens => (
                10_000_000,
                1,
                tolerances(&[("max_abs_deviation1", 2.0), ("c1_stability", 5.0 / 1e6f64.ln())]),
            ),
            Rho => (
                1,
                1_000_000,
                tolerances(&[
                    ("rho_2_error", 1e-8),
                    ("rho_3_error", 1e-6),
                    ("max_residual", 1e-8),
                    ("ks_series", 0.005),
                    ("acceptance_gap", 0.005),
                ]),
            ),
            PaN => (
                10_000_000,
                1,
                tolerances(&[("exact_pa_2_error", 1e-12), ("exact_pa_21_min", 0.5), ("limit_gap", 0.01)]),
            ),
            Representation => (50, 1, tolerances(&[("max_atom_error", 1e-12)])),
            Poissonization => (
                10_000,
                100_000,
                tolerances(&[("max_tv", 1e-10), ("no_point_error", 1e-12), ("construction_cf_gap", 0.01)]),
            ),
            LimitTheorem if alpha == 1.0 => (1_000_000, 100_000, tolerances(&[("ks_uniform", 0.05)])),
            LimitTheorem => (10_000_000, 50_000, tolerances(&[("ks_limit", 0.08)])),
            Proposition => (
                100_000,
                1_000_000,
                tolerances(&[
                    ("cf_gap_1_0", 0.05),
                    ("cf_gap_0_1", 0.05),
                    ("cf_gap_1_1", 0.05),
                    ("poisson_cf_gap_x", 0.01),
                    ("poisson_cf_gap_x2_plus_x", 0.01),
                    ("formula_gap", 1e-8),
                ]),
            ),
            Bias => (
                1,
                1_000_000,
                tolerances(&[("bias_const_z", 3.0), ("bias_exp_z", 3.0), ("mean_error", 0.005)]),
            ),
            ErdosKac => (1_000_000, 100_000, tolerances(&[("ks_normal", 0.15)])),
        };
        ExperimentConfig {
            experiment,
            n,
            samples,
            seed: DEFAULT_SEED,
            theta: experiment.default_theta().map(str::to_string),
            alpha: None,
            slowly_varying: None,
            sampler: None,
            horizon: DEFAULT_HORIZON,
            tolerances: tols,
            output_path: None,
            prime_cache: None,
            write_csv: true,
        }
    }

    /// Defaults only, as used by `run --experiment NAME` without a file.
    pub fn default_for(experiment: ExperimentName) -> Result<Self, LabError> {
        Self::resolve(Map::new(), &Overrides { experiment: Some(experiment), ..Overrides::default() })
    }

    /// Parses a JSON document and applies `overrides`.
    pub fn from_json(text: &str, overrides: &Overrides) -> Result<Self, LabError> {
        match serde_json::from_str::<Value>(text)? {
            Value::Object(map) => Self::resolve(map, overrides),
            _ => Err(LabError::usage("<root>", "config must be a JSON object")),
        }
    }

    /// Layers `file` and `overrides` over the defaults and validates.
    /// `null` values count as absent, so a report's config echo can be fed back in.
    pub fn resolve(mut file: Map<String, Value>, overrides: &Overrides) -> Result<Self, LabError> {
        file.retain(|_, v| !v.is_null());
        let experiment = match (overrides.experiment, file.get("experiment")) {
            (Some(e), _) => e,
            (None, Some(v)) => as_str(v, "experiment")?.parse()?,
            (None, None) => return Err(LabError::usage("experiment", "missing")),
        };
        let theta_name = match file.get("theta") {
            Some(v) => Some(as_str(v, "theta")?.to_string()),
            None if file.contains_key("alpha") => None,
            None => experiment.default_theta().map(str::to_string),
        };
        let alpha = file.get("alpha").map(|v| as_f64(v, "alpha")).transpose()?;
        let degree = match (&theta_name, alpha) {
            (Some(name), _) => ThetaSpec::by_name(name).map_err(|e| LabError::usage("theta", e.to_string()))?.degree(),
            (None, Some(a)) => a,
            (None, None) => 1.0,
        };

        let mut cfg = Self::defaults(experiment, degree);
        cfg.theta = theta_name;
        cfg.alpha = alpha;
        for (key, value) in &file {
            match key.as_str() {
                "experiment" | "theta" | "alpha" => {}
                "n" => cfg.n = as_u64(value, key)?,
                "samples" => cfg.samples = as_u64(value, key)?,
                "seed" => cfg.seed = as_u64(value, key)?,
                "slowly_varying" => cfg.slowly_varying = Some(as_str(value, key)?.to_string()),
                "sampler" => {
                    cfg.sampler = Some(
                        serde_json::from_value(value.clone())
                            .map_err(|_| LabError::usage(key, "expected \"harmonic\" or \"conditioned\""))?,
                    )
                }
                "horizon" => cfg.horizon = as_f64(value, key)?,
                "tolerances" => {
                    let map = value.as_object().ok_or_else(|| LabError::usage(key, "expected an object"))?;
                    cfg.tolerances.clear();
                    for (name, tol) in map {
                        cfg.tolerances.insert(name.clone(), as_f64(tol, &format!("tolerances.{name}"))?);
                    }
                }
                "output_path" => cfg.output_path = Some(as_str(value, key)?.to_string()),
                "prime_cache" => cfg.prime_cache = Some(as_str(value, key)?.to_string()),
                "write_csv" => {
                    cfg.write_csv = value.as_bool().ok_or_else(|| LabError::usage(key, "expected a boolean"))?
                }
                other => return Err(LabError::usage(other, "unknown field")),
            }
        }

        if let Some(n) = overrides.n {
            cfg.n = n;
        }
        if let Some(s) = overrides.samples {
            cfg.samples = s;
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(p) = &overrides.output_path {
            cfg.output_path = Some(p.clone());
        }
        if let Some(p) = &overrides.prime_cache {
            cfg.prime_cache = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.samples < 1 {
            return Err(LabError::usage("samples", "must be at least 1"));
        }
        if self.n < 1 {
            return Err(LabError::usage("n", "must be at least 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(LabError::usage("horizon", "must be a positive finite real"));
        }
        for (name, &tol) in &self.tolerances {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(LabError::usage(&format!("tolerances.{name}"), "must be a nonnegative finite real"));
            }
        }
        if self.theta.is_some() && self.slowly_varying.is_some() {
            return Err(LabError::usage("slowly_varying", "only allowed together with alpha, not with theta"));
        }
        self.theta_spec()?;
        Ok(())
    }

    /// `theta` by catalog name, or built from `alpha` and `slowly_varying`.
    pub fn theta_spec(&self) -> Result<ThetaSpec, LabError> {
        match (&self.theta, self.alpha) {
            (Some(name), alpha) => {
                let spec = ThetaSpec::by_name(name).map_err(|e| LabError::usage("theta", e.to_string()))?;
                if let Some(a) = alpha {
                    if a != spec.degree() {
                        return Err(LabError::usage(
                            "alpha",
                            format!("theta `{name}` has degree {}, not {a}", spec.degree()),
                        ));
                    }
                }
                Ok(spec)
            }
            (None, Some(a)) => {
                let factor = self.slowly_varying.as_deref().unwrap_or("constant");
                ThetaSpec::from_alpha_and_factor(a, factor).map_err(|e| LabError::usage("alpha", e.to_string()))
            }
            (None, None) => ThetaSpec::by_name("linear").map_err(|e| LabError::usage("theta", e.to_string())),
        }
    }
}

fn as_str<'a>(v: &'a Value, field: &str) -> Result<&'a str, LabError> {
    v.as_str().ok_or_else(|| LabError::usage(field, "expected a string"))
}

fn as_u64(v: &Value, field: &str) -> Result<u64, LabError> {
    if let Some(x) = v.as_u64() {
        return Ok(x);
    }
    // Accept integral floats such as 1e7.
    match v.as_f64() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(LabError::usage(field, "expected a nonnegative integer")),
    }
}

fn as_f64(v: &Value, field: &str) -> Result<f64, LabError> {
    v.as_f64().ok_or_else(|| LabError::usage(field, "expected a number"))
}
