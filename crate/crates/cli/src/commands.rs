use privauction_core::verify::{
    check_budget_feasibility, check_envy_freeness, check_individual_rationality,
    check_truthfulness, generate_corpus, run_suite, simulate_estimates, GridConfig, MisreportGrid,
    SuiteOptions,
};
use privauction_core::{
    derive_stream, generate_population, Mechanism, VerificationReport, ACCURACY_CONSTANT,
};

use crate::config::{ExperimentConfig, Scenario};
use crate::report::{RunRecord, RunReport, VerifyReport, SCHEMA_VERSION};

/// Above this many agents `run` skips the misreport check, whose cost grows
/// cubically in `n`.
pub const TRUTHFULNESS_MAX_N: usize = 256;

fn build(cfg: &ExperimentConfig) -> privauction_core::Result<Box<dyn Mechanism>> {
    cfg.mechanism().build(
        cfg.cost_family,
        cfg.budget.unwrap_or(0.0),
        cfg.alpha.unwrap_or(0.5),
    )
}

struct Simulated {
    record: RunRecord,
    verification: Vec<VerificationReport>,
    skipped: Vec<String>,
}

fn simulate(
    cfg: &ExperimentConfig,
    sweep_value: Option<f64>,
    with_checks: bool,
) -> privauction_core::Result<Simulated> {
    let pop = generate_population(&cfg.population_spec())?;
    let mech = build(cfg)?;
    let n = pop.n();
    let alloc = mech.allocate(pop.values())?;
    let k = alloc.winner_count();
    let noise = alloc.plan.noise_scale().sigma();
    let bound = match cfg.scenario {
        Scenario::AccuracyMode => cfg.alpha.unwrap_or_default() * n as f64,
        Scenario::BudgetMode => ACCURACY_CONSTANT * noise,
    };

    let s = pop.true_count() as f64;
    let errors: Vec<f64> = simulate_estimates(mech.as_ref(), &pop, cfg.trials, cfg.seed)?
        .into_iter()
        .map(|est| {
            let est = if cfg.clamp_estimates {
                est.clamp(0.0, n as f64)
            } else {
                est
            };
            est - s
        })
        .collect();
    let t = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / t;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / t;
    let misses = errors.iter().filter(|e| e.abs() >= bound).count();

    let mut verification = Vec::new();
    let mut skipped = Vec::new();
    if with_checks {
        let outcome = alloc.realize(&pop, &mut derive_stream(cfg.seed, 0))?;
        verification.push(check_individual_rationality(
            &outcome,
            &pop,
            cfg.cost_family,
        )?);
        verification.push(check_envy_freeness(&outcome, &pop, cfg.cost_family)?);
        if let Some(budget) = cfg.budget {
            verification.push(check_budget_feasibility(&outcome, budget));
        }
        if n <= TRUTHFULNESS_MAX_N {
            let grid = MisreportGrid::pivots(pop.values(), &GridConfig::default());
            verification.push(check_truthfulness(mech.as_ref(), pop.values(), &grid)?);
        } else {
            skipped.push("truthfulness".to_string());
        }
    }

    Ok(Simulated {
        record: RunRecord {
            sweep_value,
            seed: cfg.seed,
            n,
            true_count: Some(pop.true_count()),
            k: Some(k),
            total_payment: Some(alloc.total_payment()),
            noise_scale: Some(noise),
            contract_bound: Some(bound),
            miss_rate: Some(misses as f64 / t),
            error_mean: Some(mean),
            error_stddev: Some(var.sqrt()),
            mean_abs_error: Some(errors.iter().map(|e| e.abs()).sum::<f64>() / t),
            error: None,
        },
        verification,
        skipped,
    })
}

fn header(cfg: &ExperimentConfig, command: &str) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        scenario: cfg.scenario,
        mechanism: cfg.mechanism(),
        cost_family: cfg.cost_family,
        seed: cfg.seed,
        trials: cfg.trials,
        clamp: cfg.clamp_estimates,
        sweep_parameter: None,
        records: Vec::new(),
        verification: Vec::new(),
        skipped_checks: Vec::new(),
    }
}

/// Simulates the configured instance and checks its outcome.
pub fn run(cfg: &ExperimentConfig) -> privauction_core::Result<RunReport> {
    let sim = simulate(cfg, None, true)?;
    let mut report = header(cfg, "run");
    report.records.push(sim.record);
    report.verification = sim.verification;
    report.skipped_checks = sim.skipped;
    Ok(report)
}

/// One record per sweep value. Values the mechanism rejects produce a row
/// with the error message instead of failing the whole sweep.
pub fn sweep(cfg: &ExperimentConfig) -> RunReport {
    let sweep = cfg.sweep.as_ref().expect("validated sweep section");
    let mut report = header(cfg, "sweep");
    report.sweep_parameter = Some(sweep.parameter.to_string());
    for &value in &sweep.values {
        let point = cfg.with_sweep_value(sweep.parameter, value);
        let record = match simulate(&point, Some(value), false) {
            Ok(sim) => sim.record,
            Err(e) => RunRecord::failed(Some(value), point.seed, point.population.n, e.to_string()),
        };
        report.records.push(record);
    }
    report
}

/// Runs the property suite over a seeded corpus drawn from the configured
/// population family.
pub fn verify(cfg: &ExperimentConfig) -> privauction_core::Result<VerifyReport> {
    let corpus_spec = cfg.corpus_spec();
    let corpus = generate_corpus(&corpus_spec)?;
    let mechanisms = cfg.verify_mechanisms();
    let opts = SuiteOptions {
        grid: cfg.verify.grid.clone(),
        privacy_instances: cfg.verify.privacy_instances,
        privacy_grid_points: cfg.verify.privacy_grid_points,
        seed: cfg.seed,
    };
    let reports = run_suite(&corpus, &mechanisms, &opts)?;
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify".to_string(),
        corpus: corpus_spec,
        mechanisms,
        reports,
    })
}
