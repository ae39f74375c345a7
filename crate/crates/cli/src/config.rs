//! Experiment configuration: a single JSON document.

use std::fmt;
use std::path::PathBuf;

use privauction_core::verify::{CorpusSpec, GridConfig, MechanismKind};
use privauction_core::{BitModel, CostModel, PopulationSpec, ValueDistribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[serde(alias = "budget")]
    BudgetMode,
    #[serde(alias = "accuracy")]
    AccuracyMode,
}

impl Scenario {
    pub fn default_mechanism(self) -> MechanismKind {
        match self {
            Scenario::BudgetMode => MechanismKind::FairQuery,
            Scenario::AccuracyMode => MechanismKind::MinCostAuction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub n: usize,
    #[serde(alias = "value_distribution")]
    pub values: ValueDistribution,
    #[serde(alias = "bit_model")]
    pub bits: BitModel,
    /// Defaults to the experiment seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Budget,
    Alpha,
    /// Correlation threshold of value-correlated bits.
    Threshold,
    /// Bit probability of independent bits.
    Q,
    N,
    Seed,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepParameter::Budget => "budget",
            SweepParameter::Alpha => "alpha",
            SweepParameter::Threshold => "threshold",
            SweepParameter::Q => "q",
            SweepParameter::N => "n",
            SweepParameter::Seed => "seed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Settings for the `verify` command's random instance family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub instances: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Defaults to the configured cost family.
    pub families: Option<Vec<CostModel>>,
    /// Defaults to the configured mechanism, or both auctions.
    pub mechanisms: Option<Vec<MechanismKind>>,
    /// Draw corpus valuations from the configured population's distribution
    /// rather than the corpus' built-in mix of integer and continuous values.
    pub population_values: bool,
    pub grid: GridConfig,
    pub privacy_instances: usize,
    pub privacy_grid_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let corpus = CorpusSpec::default();
        VerifyConfig {
            instances: corpus.instances,
            n_min: corpus.n_min,
            n_max: corpus.n_max,
            families: None,
            mechanisms: None,
            population_values: false,
            grid: GridConfig::default(),
            privacy_instances: 20,
            privacy_grid_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub mechanism: Option<MechanismKind>,
    pub population: PopulationConfig,
    pub cost_family: CostModel,
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub clamp_estimates: bool,
    #[serde(default)]
    pub verify: VerifyConfig,
}

/// A configuration problem, anchored to a line of the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"` in `source`.
fn locate(source: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    source
        .lines()
        .position(|l| l.contains(&quoted))
        .map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses without validating, so command-line overrides can be applied
    /// first; call [`ExperimentConfig::validate`] afterwards.
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(source).map_err(|e| ConfigError {
            line: (e.line() > 0).then_some(e.line()),
            message: e.to_string(),
        })
    }

    /// Checks cross-field constraints. `source` is used only to attach line
    /// numbers to messages.
    pub fn validate(&self, source: Option<&str>) -> Result<(), ConfigError> {
        let err = |key: &str, message: String| ConfigError {
            line: source.and_then(|s| locate(s, key)),
            message,
        };
        match self.scenario {
            Scenario::BudgetMode => {
                if self.alpha.is_some() {
                    return Err(err(
                        "alpha",
                        "budget-mode takes `budget`, not `alpha`".into(),
                    ));
                }
                match self.budget {
                    None => return Err(err("scenario", "budget-mode requires `budget`".into())),
                    Some(b) if !(b.is_finite() && b >= 0.0) => {
                        return Err(err(
                            "budget",
                            format!("budget must be finite and non-negative, got {b}"),
                        ))
                    }
                    _ => {}
                }
            }
            Scenario::AccuracyMode => {
                if self.budget.is_some() {
                    return Err(err(
                        "budget",
                        "accuracy-mode takes `alpha`, not `budget`".into(),
                    ));
                }
                match self.alpha {
                    None => return Err(err("scenario", "accuracy-mode requires `alpha`".into())),
                    Some(a) if !(a > 0.0 && a < 1.0) => {
                        return Err(err("alpha", format!("alpha must lie in (0, 1), got {a}")))
                    }
                    _ => {}
                }
            }
        }
        let mechanism = self.mechanism();
        let compatible = match self.scenario {
            Scenario::BudgetMode => mechanism == MechanismKind::FairQuery,
            Scenario::AccuracyMode => mechanism != MechanismKind::FairQuery,
        };
        if !compatible {
            return Err(err(
                "mechanism",
                format!("mechanism {mechanism} does not run in {:?}", self.scenario),
            ));
        }
        if self.trials == 0 {
            return Err(err("trials", "trials must be at least 1".into()));
        }
        self.population_spec()
            .validate()
            .map_err(|e| err("population", e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(err("sweep", "sweep value list is empty".into()));
            }
            let ok = match sweep.parameter {
                SweepParameter::Budget => self.scenario == Scenario::BudgetMode,
                SweepParameter::Alpha => self.scenario == Scenario::AccuracyMode,
                SweepParameter::Threshold => {
                    matches!(self.population.bits, BitModel::ValueCorrelated { .. })
                }
                SweepParameter::Q => matches!(self.population.bits, BitModel::Independent { .. }),
                SweepParameter::N => sweep.values.iter().all(|&v| v >= 1.0 && v.fract() == 0.0),
                SweepParameter::Seed => sweep.values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0),
            };
            if !ok {
                return Err(err(
                    "parameter",
                    format!("cannot sweep `{}` in this configuration", sweep.parameter),
                ));
            }
        }
        let v = &self.verify;
        if v.n_min < 2 || v.n_min > v.n_max {
            return Err(err(
                "verify",
                format!(
                    "verify needs 2 <= n_min <= n_max, got [{}, {}]",
                    v.n_min, v.n_max
                ),
            ));
        }
        if v.families.as_ref().is_some_and(Vec::is_empty)
            || v.mechanisms.as_ref().is_some_and(Vec::is_empty)
        {
            return Err(err(
                "verify",
                "verify family and mechanism lists must be non-empty".into(),
            ));
        }
        Ok(())
    }

    pub fn mechanism(&self) -> MechanismKind {
        self.mechanism.unwrap_or(self.scenario.default_mechanism())
    }

    pub fn population_spec(&self) -> PopulationSpec {
        PopulationSpec {
            n: self.population.n,
            values: self.population.values.clone(),
            bits: self.population.bits.clone(),
            seed: self.population.seed.unwrap_or(self.seed),
        }
    }

    /// This configuration with the swept parameter set to `value`.
    pub fn with_sweep_value(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match parameter {
            SweepParameter::Budget => cfg.budget = Some(value),
            SweepParameter::Alpha => cfg.alpha = Some(value),
            SweepParameter::Threshold => {
                cfg.population.bits = BitModel::ValueCorrelated { threshold: value }
            }
            SweepParameter::Q => cfg.population.bits = BitModel::Independent { q: value },
            SweepParameter::N => cfg.population.n = value as usize,
            SweepParameter::Seed => cfg.seed = value as u64,
        }
        cfg
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        CorpusSpec {
            instances: self.verify.instances,
            n_min: self.verify.n_min,
            n_max: self.verify.n_max,
            families: self
                .verify
                .families
                .clone()
                .unwrap_or_else(|| vec![self.cost_family]),
            values: self
                .verify
                .population_values
                .then(|| self.population.values.clone()),
            bits: Some(self.population.bits.clone()),
            seed: self.seed,
        }
    }

    pub fn verify_mechanisms(&self) -> Vec<MechanismKind> {
        if let Some(list) = &self.verify.mechanisms {
            return list.clone();
        }
        match self.mechanism {
            Some(kind) => vec![kind],
            None => vec![MechanismKind::FairQuery, MechanismKind::MinCostAuction],
        }
    }
}
