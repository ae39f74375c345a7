//! Seeded random instance corpora and the full property suite.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::mechanisms::{rank_by, FairQuery, Mechanism, MinCostAuction, ACCURACY_CONSTANT};
use crate::population::{
    generate_population, BitModel, Population, PopulationSpec, ValueDistribution,
};
use crate::stream::derive_stream;

use super::bounds::{accuracy_alpha, impossibility_bound, payment_lower_bound};
use super::checks::{
    check_budget_feasibility, check_envy_freeness, check_estimator_privacy,
    check_individual_rationality, check_necessity, check_truthfulness,
};
use super::control::PayYourBid;
use super::grid::{GridConfig, MisreportGrid};
use super::oracles::{oracle_max_winners_envy_free, oracle_min_payment_k_units};
use super::report::{VerificationReport, Violation, TOLERANCE};

/// Which mechanism a suite run targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    FairQuery,
    MinCostAuction,
    /// Negative control: winners are paid their own reported cost.
    PayYourBidControl,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::FairQuery => "fair-query",
            MechanismKind::MinCostAuction => "min-cost-auction",
            MechanismKind::PayYourBidControl => "pay-your-bid-control",
        }
    }

    pub fn build(self, model: CostModel, budget: f64, alpha: f64) -> Result<Box<dyn Mechanism>> {
        Ok(match self {
            MechanismKind::FairQuery => Box::new(FairQuery::new(model, budget)?),
            MechanismKind::MinCostAuction => Box::new(MinCostAuction::new(model, alpha)?),
            MechanismKind::PayYourBidControl => {
                Box::new(PayYourBid(MinCostAuction::new(model, alpha)?))
            }
        })
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fair-query" => Ok(MechanismKind::FairQuery),
            "min-cost-auction" => Ok(MechanismKind::MinCostAuction),
            "pay-your-bid-control" => Ok(MechanismKind::PayYourBidControl),
            other => Err(format!(
                "unknown mechanism `{other}` (expected fair-query, min-cost-auction or pay-your-bid-control)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub instances: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub families: Vec<CostModel>,
    /// Valuation distribution; `None` mixes uniform(0, 10) draws with small
    /// integers, which produces ties and zero valuations.
    pub values: Option<ValueDistribution>,
    /// Bit model; `None` means independent fair coins.
    pub bits: Option<BitModel>,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            instances: 500,
            n_min: 2,
            n_max: 16,
            families: CostModel::ALL.to_vec(),
            values: None,
            bits: None,
            seed: 0,
        }
    }
}

/// One random instance, usable by both auctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub index: usize,
    pub pop: Population,
    pub model: CostModel,
    pub budget: f64,
    /// An attainable accuracy parameter: `alpha' = alpha / (1/2 + ln 3)`
    /// lies in `[1/n, 0.6]`.
    pub alpha: f64,
}

pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusInstance>> {
    if spec.n_min < 2 || spec.n_min > spec.n_max {
        return Err(Error::InvalidSpec(format!(
            "corpus sizes need 2 <= n_min <= n_max, got [{}, {}]",
            spec.n_min, spec.n_max
        )));
    }
    if spec.families.is_empty() {
        return Err(Error::InvalidSpec(
            "corpus needs at least one cost family".into(),
        ));
    }
    (0..spec.instances)
        .map(|index| {
            let mut rng = derive_stream(spec.seed, index as u64);
            let n = rng.random_range(spec.n_min..=spec.n_max);
            let model = spec.families[index % spec.families.len()];
            let values = match &spec.values {
                Some(dist) => dist.clone(),
                None if rng.random_bool(0.25) => ValueDistribution::PointMass(
                    (0..n).map(|_| rng.random_range(0..=5) as f64).collect(),
                ),
                None => ValueDistribution::Uniform { lo: 0.0, hi: 10.0 },
            };
            let bits = spec
                .bits
                .clone()
                .unwrap_or(BitModel::Independent { q: 0.5 });
            let pop = generate_population(&PopulationSpec {
                n,
                values,
                bits,
                seed: rng.random(),
            })?;
            let full: f64 = pop.values().iter().map(|&v| model.cost(v, 1.0)).sum();
            let budget = if rng.random_bool(0.05) {
                0.0
            } else {
                let u: f64 = rng.random();
                u * u * full
            };
            let alpha_prime = rng.random_range(1.0 / n as f64..=0.6);
            Ok(CorpusInstance {
                index,
                pop,
                model,
                budget,
                alpha: alpha_prime * ACCURACY_CONSTANT,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub grid: GridConfig,
    /// Instances (from the front of the corpus) that get the analytic
    /// density-ratio privacy check.
    pub privacy_instances: usize,
    pub privacy_grid_points: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            grid: GridConfig::default(),
            privacy_instances: 20,
            privacy_grid_points: 10_000,
            seed: 0,
        }
    }
}

fn single(property: &str, violation: Option<Violation>) -> VerificationReport {
    VerificationReport::new(property, violation.into_iter().collect())
}

fn check_instance(
    kind: MechanismKind,
    inst: &CorpusInstance,
    opts: &SuiteOptions,
) -> Result<Vec<VerificationReport>> {
    let mech = kind.build(inst.model, inst.budget, inst.alpha)?;
    let pop = &inst.pop;
    let values = pop.values();
    let n = pop.n();
    let mut rng = derive_stream(opts.seed, inst.index as u64);
    let alloc = mech.allocate(values)?;
    let outcome = alloc.realize(pop, &mut rng)?;
    let k = outcome.winner_count();
    let noise = alloc.plan.noise_scale().sigma();
    let grid = MisreportGrid::pivots(values, &opts.grid);

    let mut reports = vec![
        check_truthfulness(mech.as_ref(), values, &grid)?,
        check_individual_rationality(&outcome, pop, inst.model)?,
        check_envy_freeness(&outcome, pop, inst.model)?,
    ];

    match kind {
        MechanismKind::FairQuery => {
            reports.push(check_budget_feasibility(&outcome, inst.budget));
            let oracle = oracle_max_winners_envy_free(values, inst.model, inst.budget);
            reports.push(single(
                "optimal_winner_count",
                (oracle != k).then(|| Violation::new(0, oracle as f64, k as f64 - oracle as f64)),
            ));
        }
        MechanismKind::MinCostAuction | MechanismKind::PayYourBidControl => {
            let eps = 1.0 / (n - k) as f64;
            let order = rank_by(values);
            let threshold = inst.model.cost(values[order[k]], eps);
            let target = k as f64 * threshold;
            let oracle = oracle_min_payment_k_units(values, inst.model, k)?;
            let total = outcome.total_payment();
            let mut violations = Vec::new();
            if (total - target).abs() > TOLERANCE {
                violations.push(Violation::new(0, target, total - target));
            }
            if (total - oracle).abs() > TOLERANCE {
                violations.push(Violation::new(0, oracle, total - oracle));
            }
            reports.push(VerificationReport::new("optimal_total_payment", violations));
        }
    }

    let necessity_alpha = match kind {
        MechanismKind::FairQuery => alloc.plan.alpha_fraction(),
        _ => inst.alpha / ACCURACY_CONSTANT,
    };
    reports.push(single(
        "necessity",
        (!check_necessity(&outcome.epsilons, necessity_alpha))
            .then(|| Violation::new(0, necessity_alpha, -1.0)),
    ));

    let bound = payment_lower_bound(values, inst.model, accuracy_alpha(noise, n));
    let total = outcome.total_payment();
    reports.push(single(
        "payment_lower_bound",
        (total < bound - TOLERANCE).then(|| Violation::new(0, bound, total - bound)),
    ));

    if inst.index < opts.privacy_instances {
        reports.push(check_estimator_privacy(
            pop,
            &alloc.plan,
            opts.privacy_grid_points,
        )?);
    }
    Ok(reports)
}

/// Runs every applicable property check for each mechanism over the
/// corpus, returning one aggregated report per (mechanism, property), named
/// `"<mechanism>/<property>"`, followed by the impossibility-bound report.
pub fn run_suite(
    corpus: &[CorpusInstance],
    kinds: &[MechanismKind],
    opts: &SuiteOptions,
) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &kind in kinds {
        let per_instance: Vec<Vec<VerificationReport>> = corpus
            .par_iter()
            .map(|inst| check_instance(kind, inst, opts))
            .collect::<Result<_>>()?;
        let mut merged: Vec<VerificationReport> = Vec::new();
        for (inst, reports) in corpus.iter().zip(per_instance) {
            for report in reports {
                let name = format!("{kind}/{}", report.property);
                match merged.iter_mut().find(|r| r.property == name) {
                    Some(acc) => acc.absorb(report, inst.index),
                    None => {
                        let mut acc =
                            VerificationReport::empty(name).with_tolerance(report.tolerance);
                        acc.absorb(report, inst.index);
                        merged.push(acc);
                    }
                }
            }
        }
        out.extend(merged);
    }
    out.push(impossibility_growth_report()?);
    Ok(out)
}

/// `ln(4/3)`, written out rather than computed.
const LN_4_3: f64 = 0.287_682_072_451_780_9;

/// Checks `impossibility_bound = ln(4/3) min v` along `min v = 10^0 .. 10^6`
/// and that the bound grows strictly along the sequence.
pub fn impossibility_growth_report() -> Result<VerificationReport> {
    let mut violations = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for e in 0..=6 {
        let m = 10f64.powi(e);
        let bound = impossibility_bound(&[3.0 * m, m, 2.0 * m])?;
        let err = bound - LN_4_3 * m;
        if err.abs() > TOLERANCE || bound <= last {
            violations.push(Violation::new(e as usize, m, err));
        }
        last = bound;
    }
    let mut report = VerificationReport::new("impossibility_bound", violations);
    report.checked = 7;
    Ok(report)
}
