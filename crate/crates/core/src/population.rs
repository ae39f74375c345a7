//! Populations of agents and seeded population generators.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::stream;

/// Agents' verifiable private bits `b_i` paired with their privacy
/// valuations `v_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPopulation")]
pub struct Population {
    bits: Vec<bool>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPopulation {
    bits: Vec<bool>,
    values: Vec<f64>,
}

impl TryFrom<RawPopulation> for Population {
    type Error = Error;

    fn try_from(raw: RawPopulation) -> Result<Self> {
        Population::new(raw.bits, raw.values)
    }
}

impl Population {
    pub fn new(bits: Vec<bool>, values: Vec<f64>) -> Result<Self> {
        if bits.len() != values.len() {
            return Err(Error::LengthMismatch {
                bits: bits.len(),
                values: values.len(),
            });
        }
        if bits.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        validate_values(&values)?;
        Ok(Population { bits, values })
    }

    /// Builds a population from 0/1 integers.
    pub fn from_bits01(bits: &[u8], values: Vec<f64>) -> Result<Self> {
        Population::new(bits.iter().map(|&b| b != 0).collect(), values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The true count `s = sum b_i`.
    pub fn true_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// The same agents with a different valuation profile (a misreport).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Population::new(self.bits.clone(), values)
    }

    /// The same agents with agent `i`'s bit flipped.
    pub fn with_flipped_bit(&self, i: usize) -> Result<Self> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        Ok(Population {
            bits,
            values: self.values.clone(),
        })
    }
}

pub(crate) fn validate_values(values: &[f64]) -> Result<()> {
    for &v in values {
        crate::error::non_negative("valuation", v)?;
    }
    Ok(())
}

/// How valuations are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    /// Deterministic values: agent `i` gets `list[i % list.len()]`.
    PointMass(Vec<f64>),
}

/// How private bits are assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitModel {
    /// `b_i ~ Bernoulli(q)`, independent of `v_i`.
    Independent { q: f64 },
    /// `b_i = 1` iff `v_i >= threshold`.
    ValueCorrelated { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n: usize,
    #[serde(alias = "value_distribution")]
    pub values: ValueDistribution,
    #[serde(alias = "bit_model")]
    pub bits: BitModel,
    #[serde(default)]
    pub seed: u64,
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        match &self.values {
            ValueDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo <= hi) {
                    return bad(format!(
                        "uniform bounds need 0 <= lo <= hi, got [{lo}, {hi}]"
                    ));
                }
            }
            ValueDistribution::Lognormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma >= 0.0) {
                    return bad(format!(
                        "lognormal needs finite mu and sigma >= 0, got ({mu}, {sigma})"
                    ));
                }
            }
            ValueDistribution::PointMass(list) => {
                if list.is_empty() {
                    return bad("point-mass list is empty".into());
                }
                validate_values(list)?;
            }
        }
        match self.bits {
            BitModel::Independent { q } if !(0.0..=1.0).contains(&q) => {
                bad(format!("bit probability q must lie in [0, 1], got {q}"))
            }
            BitModel::ValueCorrelated { threshold } if threshold.is_nan() => {
                bad("correlation threshold is NaN".into())
            }
            _ => Ok(()),
        }
    }
}

/// Draws a population. Identical specs give identical populations.
pub fn generate_population(spec: &PopulationSpec) -> Result<Population> {
    spec.validate()?;
    let mut rng = stream(spec.seed);
    let values: Vec<f64> = match &spec.values {
        ValueDistribution::Uniform { lo, hi } => (0..spec.n)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect(),
        ValueDistribution::Lognormal { mu, sigma } => {
            let dist = LogNormal::new(*mu, *sigma)
                .map_err(|e| Error::InvalidSpec(format!("lognormal: {e}")))?;
            (0..spec.n).map(|_| dist.sample(&mut rng)).collect()
        }
        ValueDistribution::PointMass(list) => (0..spec.n).map(|i| list[i % list.len()]).collect(),
    };
    let bits = match spec.bits {
        BitModel::Independent { q } => (0..spec.n).map(|_| rng.random::<f64>() < q).collect(),
        BitModel::ValueCorrelated { threshold } => values.iter().map(|&v| v >= threshold).collect(),
    };
    Population::new(bits, values)
}
