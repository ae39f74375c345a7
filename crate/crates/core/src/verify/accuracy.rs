//! Monte Carlo accuracy estimation.

use rayon::prelude::*;

use crate::dp::lap_sample;
use crate::error::Result;
use crate::mechanisms::Mechanism;
use crate::population::Population;
use crate::stream::derive_stream;

/// Runs the mechanism's estimator `trials` times, trial `t` drawing from
/// `derive_stream(seed, t)`. The allocation is computed once since it does
/// not depend on the noise. Estimates are returned in trial order.
pub fn simulate_estimates(
    mechanism: &dyn Mechanism,
    pop: &Population,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let alloc = mechanism.allocate(pop.values())?;
    let t = alloc.plan.deterministic_part(pop)?;
    let scale = alloc.plan.noise_scale();
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|trial| t + lap_sample(scale, &mut derive_stream(seed, trial)))
        .collect())
}

/// Fraction of trials with `|s_hat - s| >= error_bound`.
pub fn estimate_accuracy(
    mechanism: &dyn Mechanism,
    pop: &Population,
    error_bound: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let s = pop.true_count() as f64;
    let misses = simulate_estimates(mechanism, pop, trials, seed)?
        .into_iter()
        .filter(|est| (est - s).abs() >= error_bound)
        .count();
    Ok(misses as f64 / trials.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostModel;
    use crate::mechanisms::{MinCostAuction, ACCURACY_CONSTANT};

    fn setup() -> (MinCostAuction, Population) {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let pop = Population::new(vec![true; 10], values).unwrap();
        (
            MinCostAuction::new(CostModel::Linear, 0.2 * ACCURACY_CONSTANT).unwrap(),
            pop,
        )
    }

    #[test]
    fn zero_bound_always_misses() {
        let (mech, pop) = setup();
        assert_eq!(estimate_accuracy(&mech, &pop, 0.0, 500, 1).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let (mech, pop) = setup();
        let a = estimate_accuracy(&mech, &pop, 2.0, 5000, 99).unwrap();
        let b = estimate_accuracy(&mech, &pop, 2.0, 5000, 99).unwrap();
        assert_eq!(a, b);
        let c = estimate_accuracy(&mech, &pop, 2.0, 5000, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn contract_bound_holds() {
        let (mech, pop) = setup();
        let bound = mech.alpha * 10.0;
        let p = estimate_accuracy(&mech, &pop, bound, 100_000, 3).unwrap();
        assert!(p <= 1.0 / 3.0 + 0.01, "{p}");
    }
}
