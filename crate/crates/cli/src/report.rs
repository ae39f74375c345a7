//! Report documents and their JSON/CSV writers.

use std::io::Write;

use privauction_core::verify::{CorpusSpec, MechanismKind};
use privauction_core::{CostModel, VerificationReport};
use serde::{Deserialize, Serialize};

use crate::config::{Format, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

/// One simulated configuration. Fields that depend on the mechanism are
/// `None` when the mechanism rejected the instance; `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub n: usize,
    pub true_count: Option<usize>,
    pub k: Option<usize>,
    pub total_payment: Option<f64>,
    pub noise_scale: Option<f64>,
    /// Error level the accuracy contract is stated at.
    pub contract_bound: Option<f64>,
    /// Fraction of trials with `|estimate - count| >= contract_bound`.
    pub miss_rate: Option<f64>,
    pub error_mean: Option<f64>,
    pub error_stddev: Option<f64>,
    pub mean_abs_error: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(sweep_value: Option<f64>, seed: u64, n: usize, error: String) -> Self {
        RunRecord {
            sweep_value,
            seed,
            n,
            true_count: None,
            k: None,
            total_payment: None,
            noise_scale: None,
            contract_bound: None,
            miss_rate: None,
            error_mean: None,
            error_stddev: None,
            mean_abs_error: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub scenario: Scenario,
    pub mechanism: MechanismKind,
    pub cost_family: CostModel,
    pub seed: u64,
    pub trials: usize,
    pub clamp: bool,
    pub sweep_parameter: Option<String>,
    pub records: Vec<RunRecord>,
    /// Property checks on the realized outcome (`run` only).
    pub verification: Vec<VerificationReport>,
    pub skipped_checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: String,
    pub corpus: CorpusSpec,
    pub mechanisms: Vec<MechanismKind>,
    pub reports: Vec<VerificationReport>,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    property: &'a str,
    pass: bool,
    violation_count: usize,
    checked: usize,
    tolerance: f64,
}

fn json<T: Serialize>(doc: &T, out: &mut dyn Write) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)?;
    Ok(())
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verification.iter().all(|r| r.pass)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> anyhow::Result<()> {
        match format {
            Format::Json => json(self, out),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for record in &self.records {
                    w.serialize(record)?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> anyhow::Result<()> {
        match format {
            Format::Json => json(self, out),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for r in &self.reports {
                    w.serialize(SummaryRow {
                        property: &r.property,
                        pass: r.pass,
                        violation_count: r.violation_count,
                        checked: r.checked,
                        tolerance: r.tolerance,
                    })?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }
}
