//! Brute-force optimality oracles over the envy-free fixed-price family.

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::mechanisms::rank_by;

/// Largest `k'` in `0..n` such that buying `1/(n-k')` units from the `k'`
/// cheapest sellers at the lowest individually rational common price fits
/// in the budget, i.e. `k' * c(v_(k'), 1/(n-k')) <= budget`.
pub fn oracle_max_winners_envy_free(values: &[f64], model: CostModel, budget: f64) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (0..n)
        .filter(|&k| k == 0 || k as f64 * model.cost(sorted[k - 1], 1.0 / (n - k) as f64) <= budget)
        .max()
        .unwrap_or(0)
}

/// Why a posted price cannot be the outcome of a truthful, individually
/// rational, envy-free auction that always buys `k` units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PriceViolation {
    /// A winner's cost exceeds the price.
    IndividualRationality { agent: usize, shortfall: f64 },
    /// A loser would sell at the price and envies the winners.
    LoserEnvy { agent: usize, surplus: f64 },
    /// Winner `agent` gains `gain` by reporting `report`: with that report
    /// fewer than `k` sellers accept the price, so the common price must
    /// rise to at least the deviator's reported cost while it still wins.
    Deviation {
        agent: usize,
        report: f64,
        gain: f64,
    },
}

/// Tests whether `price` is admissible for the `k` cheapest sellers.
pub fn fixed_price_admissible(
    values: &[f64],
    model: CostModel,
    k: usize,
    price: f64,
) -> std::result::Result<(), PriceViolation> {
    let n = values.len();
    let eps = 1.0 / (n - k) as f64;
    let costs: Vec<f64> = values.iter().map(|&v| model.cost(v, eps)).collect();
    let order = rank_by(values);
    let (winners, losers) = order.split_at(k);

    if let Some(&i) = winners.iter().find(|&&i| costs[i] > price) {
        return Err(PriceViolation::IndividualRationality {
            agent: i,
            shortfall: price - costs[i],
        });
    }
    if let Some(&j) = losers.iter().find(|&&j| costs[j] < price) {
        return Err(PriceViolation::LoserEnvy {
            agent: j,
            surplus: price - costs[j],
        });
    }
    let marginal = losers
        .iter()
        .map(|&j| costs[j])
        .fold(f64::INFINITY, f64::min);
    if price < marginal && k > 0 {
        // Replay the deviation: the costliest winner reports a valuation whose
        // cost sits halfway between the price and the first loser's cost.
        let i = winners[k - 1];
        let target = 0.5 * (price + marginal);
        let report = model
            .inverse_in_v(target, eps)
            .expect("cost families are continuous and unbounded in v");
        let mut deviated = values.to_vec();
        deviated[i] = report;
        let dev_costs: Vec<f64> = deviated.iter().map(|&v| model.cost(v, eps)).collect();
        let dev_order = rank_by(&deviated);
        let floor = dev_costs[dev_order[k - 1]];
        let still_wins = dev_order[..k].contains(&i);
        if still_wins && floor > price {
            return Err(PriceViolation::Deviation {
                agent: i,
                report,
                gain: floor - price,
            });
        }
    }
    Ok(())
}

/// Minimum total payment of any truthful, individually rational, envy-free
/// fixed-purchase auction guaranteed to buy `k` units, found by scanning
/// candidate prices (zero, every seller's cost, and midpoints between
/// consecutive costs) and keeping the cheapest admissible one.
pub fn oracle_min_payment_k_units(values: &[f64], model: CostModel, k: usize) -> Result<f64> {
    let n = values.len();
    if k == 0 || k >= n {
        return Err(Error::TooManyWinners {
            k,
            max: n.saturating_sub(1),
        });
    }
    let eps = 1.0 / (n - k) as f64;
    let mut costs: Vec<f64> = values.iter().map(|&v| model.cost(v, eps)).collect();
    costs.sort_by(f64::total_cmp);
    let mut candidates = vec![0.0];
    candidates.extend(costs.iter().copied());
    candidates.extend(costs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let price = candidates
        .into_iter()
        .find(|&p| fixed_price_admissible(values, model, k, p).is_ok())
        .expect("the first loser's cost is always admissible");
    Ok(k as f64 * price)
}
