//! Property checkers over mechanism outcomes.

use crate::cost::CostModel;
use crate::dp::{privacy_ratio_bound, EstimatorPlan};
use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, MechanismOutcome};
use crate::population::Population;

use super::grid::MisreportGrid;
use super::report::{VerificationReport, Violation, TOLERANCE};

fn check_dimensions(outcome: &MechanismOutcome, n: usize) -> Result<()> {
    if outcome.payments.len() != n || outcome.epsilons.len() != n {
        return Err(Error::LengthMismatch {
            bits: outcome.payments.len(),
            values: n,
        });
    }
    Ok(())
}

/// Flags every agent paid less than its privacy cost. The violation's datum
/// is the agent's privacy level and its slack is `p_i - c(v_i, eps_i)`.
pub fn check_individual_rationality(
    outcome: &MechanismOutcome,
    pop: &Population,
    model: CostModel,
) -> Result<VerificationReport> {
    check_dimensions(outcome, pop.n())?;
    let violations = pop
        .values()
        .iter()
        .zip(outcome.payments.iter().zip(&outcome.epsilons))
        .enumerate()
        .filter_map(|(i, (&v, (&p, &eps)))| {
            let slack = p - model.cost(v, eps);
            (slack < -TOLERANCE).then(|| Violation::new(i, eps, slack))
        })
        .collect();
    Ok(VerificationReport::new(
        "individual_rationality",
        violations,
    ))
}

/// Flags every pair `(i, j)` where agent `i` strictly prefers `j`'s payment
/// and privacy level to its own. The datum is `j`.
pub fn check_envy_freeness(
    outcome: &MechanismOutcome,
    pop: &Population,
    model: CostModel,
) -> Result<VerificationReport> {
    check_dimensions(outcome, pop.n())?;
    let p = &outcome.payments;
    let eps = &outcome.epsilons;
    let mut violations = Vec::new();
    for (i, &v) in pop.values().iter().enumerate() {
        let own = p[i] - model.cost(v, eps[i]);
        for j in 0..pop.n() {
            let other = p[j] - model.cost(v, eps[j]);
            if own < other - TOLERANCE {
                violations.push(Violation::new(i, j as f64, own - other));
            }
        }
    }
    Ok(VerificationReport::new("envy_freeness", violations))
}

/// Checks `sum p_i <= budget` and `analyst_charge >= sum p_i` without slack.
pub fn check_budget_feasibility(outcome: &MechanismOutcome, budget: f64) -> VerificationReport {
    let total = outcome.total_payment();
    let mut violations = Vec::new();
    if total > budget {
        violations.push(Violation::new(0, total, budget - total));
    }
    if outcome.analyst_charge < total {
        violations.push(Violation::new(
            0,
            outcome.analyst_charge,
            outcome.analyst_charge - total,
        ));
    }
    VerificationReport::new("budget_feasibility", violations).with_tolerance(0.0)
}

/// Reruns `mechanism` with each agent's report replaced by every grid
/// candidate and flags any misreport that raises the agent's true utility
/// `p_i - c(v_i, eps_i)`. Payments and privacy levels are deterministic in
/// the reports, so the comparison is exact rather than in expectation.
pub fn check_truthfulness(
    mechanism: &dyn Mechanism,
    values: &[f64],
    grid: &MisreportGrid,
) -> Result<VerificationReport> {
    let model = mechanism.model();
    let truthful = mechanism.allocate(values)?;
    let mut reports = values.to_vec();
    let mut violations = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let honest = truthful.payments[i] - model.cost(v, truthful.epsilons[i]);
        for &lie in grid.for_agent(i) {
            reports[i] = lie;
            let alloc = mechanism.allocate(&reports)?;
            let gain = alloc.payments[i] - model.cost(v, alloc.epsilons[i]) - honest;
            if gain > TOLERANCE {
                violations.push(Violation::new(i, lie, gain));
            }
        }
        reports[i] = v;
    }
    Ok(VerificationReport::new("truthfulness", violations))
}

/// Whether at least `(1 - alpha) n` agents have `eps_i >= 1/(alpha n)`.
///
/// Any `alpha n / 4`-accurate private mechanism must satisfy this. For
/// `alpha >= 1` the requirement is vacuous and the check returns true.
pub fn check_necessity(epsilons: &[f64], alpha: f64) -> bool {
    let n = epsilons.len() as f64;
    let level = 1.0 / (alpha * n) - 1e-12;
    let count = epsilons.iter().filter(|&&e| e >= level).count() as f64;
    count >= (1.0 - alpha) * n - TOLERANCE
}

/// Evaluates the estimator's output densities under each single-bit flip on
/// `grid_points` points spanning `t +- 20 sigma`, and flags any flip whose
/// worst pointwise ratio exceeds `exp(1/sigma)` for winners or `1` for
/// non-winners. The datum is the worst ratio found.
pub fn check_estimator_privacy(
    pop: &Population,
    plan: &EstimatorPlan,
    grid_points: usize,
) -> Result<VerificationReport> {
    let sigma = plan.noise_scale().sigma();
    let t = plan.deterministic_part(pop)?;
    let winner_bound = privacy_ratio_bound(plan.noise_scale(), 1.0);
    let steps = grid_points.max(2) - 1;
    let mut violations = Vec::new();
    for i in 0..pop.n() {
        let flipped = pop.with_flipped_bit(i)?;
        let mut worst: f64 = 1.0;
        for k in 0..=steps {
            let x = t - 20.0 * sigma + 40.0 * sigma * k as f64 / steps as f64;
            let a = plan.output_density(pop, x)?;
            let b = plan.output_density(&flipped, x)?;
            worst = worst.max(a / b).max(b / a);
        }
        let bound = if plan.winners().binary_search(&i).is_ok() {
            winner_bound
        } else {
            1.0
        };
        if worst > bound + TOLERANCE {
            violations.push(Violation::new(i, worst, bound - worst));
        }
    }
    Ok(VerificationReport::new("estimator_privacy", violations))
}
