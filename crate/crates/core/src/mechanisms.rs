//! The two procurement auctions and the fixed-price benchmark family.
//!
//! Every mechanism splits into a deterministic allocation (who sells, at
//! what privacy level, for what payment), which depends only on reported
//! valuations, and a randomized estimate computed from the winners' bits.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::dp::{laplace_estimator, EstimatorPlan};
use crate::error::{non_negative, Error, Result};
use crate::population::{validate_values, Population};

/// `1/2 + ln 3`, the accuracy constant of the subset-sum estimator.
pub const ACCURACY_CONSTANT: f64 = 0.5 + crate::dp::LN_3;

/// Slack used when rounding `(1 - alpha') n` up to an integer, so that a
/// product like `0.8 * 10` that lands one ulp above 8 still rounds to 8.
const CEIL_SLACK: f64 = 1e-9;

/// Result of running a mechanism once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    /// Noisy estimate of `s = sum b_i`.
    pub estimate: f64,
    pub payments: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Amount charged to the analyst; always `sum payments`.
    pub analyst_charge: f64,
    /// Winner indices in ascending order.
    pub winners: Vec<usize>,
    pub noise_scale: Option<f64>,
    /// False when a fixed price undercuts the marginal winner's cost.
    pub ir_feasible: bool,
}

impl MechanismOutcome {
    pub fn n(&self) -> usize {
        self.payments.len()
    }

    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }

    pub fn winner_count(&self) -> usize {
        self.winners.len()
    }
}

/// The deterministic part of a mechanism's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub plan: EstimatorPlan,
    pub payments: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub ir_feasible: bool,
}

impl Allocation {
    fn new(plan: EstimatorPlan, price: f64, ir_feasible: bool) -> Self {
        let mut payments = vec![0.0; plan.n()];
        for &i in plan.winners() {
            payments[i] = price;
        }
        let epsilons = plan.epsilons();
        Allocation {
            plan,
            payments,
            epsilons,
            ir_feasible,
        }
    }

    pub fn winner_count(&self) -> usize {
        self.plan.winners().len()
    }

    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }

    /// Draws the estimate from `pop`'s bits and assembles the outcome.
    pub fn realize<R: Rng + ?Sized>(
        &self,
        pop: &Population,
        rng: &mut R,
    ) -> Result<MechanismOutcome> {
        let (estimate, _) = laplace_estimator(pop, &self.plan, rng)?;
        Ok(MechanismOutcome {
            estimate,
            analyst_charge: self.total_payment(),
            payments: self.payments.clone(),
            epsilons: self.epsilons.clone(),
            winners: self.plan.winners().to_vec(),
            noise_scale: Some(self.plan.noise_scale().sigma()),
            ir_feasible: self.ir_feasible,
        })
    }
}

/// A direct-revelation mechanism in the insensitive-value model.
pub trait Mechanism: Sync {
    fn name(&self) -> &str;

    fn model(&self) -> CostModel;

    /// Payments and privacy levels as a function of reported valuations.
    fn allocate(&self, values: &[f64]) -> Result<Allocation>;

    fn run(&self, pop: &Population, rng: &mut dyn RngCore) -> Result<MechanismOutcome> {
        self.allocate(pop.values())?.realize(pop, rng)
    }
}

/// Agent indices sorted by ascending key; equal keys keep index order.
pub fn rank_by(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    order
}

fn check_reports(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    validate_values(values)
}

/// Budget-constrained accuracy maximization.
///
/// Buys `1/(n-k)` units of privacy from the `k` cheapest sellers, where `k`
/// is the largest count in `1..=n-1` whose marginal seller's cost fits in an
/// equal share `B/k` of the budget, and pays each winner
/// `min(B/k, c(v_(k+1), 1/(n-k)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairQuery {
    pub model: CostModel,
    pub budget: f64,
}

impl FairQuery {
    pub fn new(model: CostModel, budget: f64) -> Result<Self> {
        non_negative("budget", budget)?;
        Ok(FairQuery { model, budget })
    }

    /// The winner count for sorted valuations.
    pub fn winner_count(&self, sorted: &[f64]) -> usize {
        let n = sorted.len();
        (1..n)
            .rev()
            .find(|&k| {
                self.model.cost(sorted[k - 1], 1.0 / (n - k) as f64) <= self.budget / k as f64
            })
            .unwrap_or(0)
    }
}

impl Mechanism for FairQuery {
    fn name(&self) -> &str {
        "fair-query"
    }

    fn model(&self) -> CostModel {
        self.model
    }

    fn allocate(&self, values: &[f64]) -> Result<Allocation> {
        check_reports(values)?;
        let n = values.len();
        let order = rank_by(values);
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let k = self.winner_count(&sorted);
        let plan = EstimatorPlan::new(n, order[..k].to_vec())?;
        if k == 0 {
            return Ok(Allocation::new(plan, 0.0, true));
        }
        let eps = 1.0 / (n - k) as f64;
        let threshold = self.model.cost(sorted[k], eps);
        let mut price = (self.budget / k as f64).min(threshold);
        // k * (B/k) can round above B; step down until the summed payments fit.
        while price > 0.0 && std::iter::repeat_n(price, k).sum::<f64>() > self.budget {
            price = price.next_down();
        }
        Ok(Allocation::new(plan, price, true))
    }
}

/// Accuracy-constrained payment minimization (a `(k+1)`-th price auction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinCostAuction {
    pub model: CostModel,
    pub alpha: f64,
}

impl MinCostAuction {
    pub fn new(model: CostModel, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(MinCostAuction { model, alpha })
    }

    /// `alpha' = alpha / (1/2 + ln 3)`.
    pub fn alpha_prime(&self) -> f64 {
        self.alpha / ACCURACY_CONSTANT
    }

    /// `k = ceil((1 - alpha') n)`, or an error when `k` would reach `n`.
    pub fn winner_count(&self, n: usize) -> Result<usize> {
        let alpha_prime = self.alpha_prime();
        let unattainable = Error::AccuracyUnattainable {
            alpha_prime,
            min: 1.0 / n as f64,
        };
        if alpha_prime * (n as f64) < 1.0 - CEIL_SLACK {
            return Err(unattainable);
        }
        let k = ((1.0 - alpha_prime) * n as f64 - CEIL_SLACK)
            .ceil()
            .max(0.0) as usize;
        if k >= n {
            return Err(unattainable);
        }
        Ok(k)
    }
}

impl Mechanism for MinCostAuction {
    fn name(&self) -> &str {
        "min-cost-auction"
    }

    fn model(&self) -> CostModel {
        self.model
    }

    fn allocate(&self, values: &[f64]) -> Result<Allocation> {
        check_reports(values)?;
        let n = values.len();
        let k = self.winner_count(n)?;
        let eps = 1.0 / (n - k) as f64;
        let costs: Vec<f64> = values.iter().map(|&v| self.model.cost(v, eps)).collect();
        let order = rank_by(&costs);
        let price = costs[order[k]];
        let plan = EstimatorPlan::new(n, order[..k].to_vec())?;
        Ok(Allocation::new(plan, price, true))
    }
}

/// Buys from the `k` cheapest sellers at one posted price.
///
/// This is the envy-free fixed-purchase benchmark family; the allocation is
/// flagged infeasible when the price undercuts the `k`-th seller's cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPrice {
    pub model: CostModel,
    pub k: usize,
    pub price: f64,
}

impl Mechanism for FixedPrice {
    fn name(&self) -> &str {
        "fixed-price"
    }

    fn model(&self) -> CostModel {
        self.model
    }

    fn allocate(&self, values: &[f64]) -> Result<Allocation> {
        check_reports(values)?;
        non_negative("price", self.price)?;
        let n = values.len();
        if self.k >= n {
            return Err(Error::TooManyWinners {
                k: self.k,
                max: n - 1,
            });
        }
        let order = rank_by(values);
        let plan = EstimatorPlan::new(n, order[..self.k].to_vec())?;
        if self.k == 0 {
            return Ok(Allocation::new(plan, 0.0, true));
        }
        let eps = 1.0 / (n - self.k) as f64;
        let feasible = self.price >= self.model.cost(values[order[self.k - 1]], eps);
        Ok(Allocation::new(plan, self.price, feasible))
    }
}

/// A population, a cost family and a hard budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetInstance {
    pub pop: Population,
    pub model: CostModel,
    pub budget: f64,
}

impl BudgetInstance {
    pub fn new(pop: Population, model: CostModel, budget: f64) -> Result<Self> {
        non_negative("budget", budget)?;
        Ok(BudgetInstance { pop, model, budget })
    }

    pub fn mechanism(&self) -> FairQuery {
        FairQuery {
            model: self.model,
            budget: self.budget,
        }
    }
}

/// A population, a cost family and an accuracy target `alpha n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyInstance {
    pub pop: Population,
    pub model: CostModel,
    pub alpha: f64,
}

impl AccuracyInstance {
    pub fn new(pop: Population, model: CostModel, alpha: f64) -> Result<Self> {
        MinCostAuction::new(model, alpha)?.winner_count(pop.n())?;
        Ok(AccuracyInstance { pop, model, alpha })
    }

    pub fn mechanism(&self) -> MinCostAuction {
        MinCostAuction {
            model: self.model,
            alpha: self.alpha,
        }
    }
}

pub fn fair_query<R: Rng + ?Sized>(inst: &BudgetInstance, rng: &mut R) -> MechanismOutcome {
    inst.mechanism()
        .allocate(inst.pop.values())
        .and_then(|a| a.realize(&inst.pop, rng))
        .expect("a validated budget instance always has an outcome")
}

pub fn min_cost_auction<R: Rng + ?Sized>(
    inst: &AccuracyInstance,
    rng: &mut R,
) -> Result<MechanismOutcome> {
    inst.mechanism()
        .allocate(inst.pop.values())?
        .realize(&inst.pop, rng)
}

pub fn fixed_price_mechanism<R: Rng + ?Sized>(
    pop: &Population,
    model: CostModel,
    k: usize,
    price: f64,
    rng: &mut R,
) -> Result<MechanismOutcome> {
    FixedPrice { model, k, price }
        .allocate(pop.values())?
        .realize(pop, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::stream;

    fn pop(values: &[f64]) -> Population {
        Population::new(vec![true; values.len()], values.to_vec()).unwrap()
    }

    /// Brute-force winner count: every k in 1..n tested against its defining
    /// inequality, largest survivor kept.
    fn brute_force_k(model: CostModel, values: &[f64], budget: f64) -> usize {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut best = 0;
        for k in 1..n {
            if model.cost(sorted[k - 1], 1.0 / (n - k) as f64) <= budget / k as f64 {
                best = k;
            }
        }
        best
    }

    #[test]
    fn fair_query_worked_example() {
        let v = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(brute_force_k(CostModel::Linear, &v, 2.0), 2);
        let inst = BudgetInstance::new(pop(&v), CostModel::Linear, 2.0).unwrap();
        let out = fair_query(&inst, &mut stream(0));
        assert_eq!(out.winners, vec![0, 1]);
        assert_eq!(out.payments, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(out.epsilons, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(out.noise_scale, Some(2.0));
        assert_eq!(out.analyst_charge, 2.0);
    }

    #[test]
    fn fair_query_zero_budget() {
        let inst = BudgetInstance::new(pop(&[1.0, 2.0, 3.0]), CostModel::Linear, 0.0).unwrap();
        let out = fair_query(&inst, &mut stream(0));
        assert!(out.winners.is_empty());
        assert_eq!(out.analyst_charge, 0.0);
        assert_eq!(out.noise_scale, Some(3.0));
        assert!(out.epsilons.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn fair_query_zero_cost_sellers_cap_at_n_minus_one() {
        let inst = BudgetInstance::new(pop(&[0.0, 0.0, 0.0]), CostModel::Linear, 1.0).unwrap();
        let out = fair_query(&inst, &mut stream(0));
        assert_eq!(out.winners, vec![0, 1]);
        assert_eq!(out.payments, vec![0.0, 0.0, 0.0]);
        assert_eq!(out.epsilons, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn fair_query_single_agent_buys_nothing() {
        let inst = BudgetInstance::new(pop(&[0.0]), CostModel::Linear, 10.0).unwrap();
        let out = fair_query(&inst, &mut stream(0));
        assert!(out.winners.is_empty());
        assert_eq!(out.noise_scale, Some(1.0));
    }

    #[test]
    fn fair_query_ties_break_by_index() {
        let inst = BudgetInstance::new(pop(&[3.0, 1.0, 1.0, 1.0]), CostModel::Linear, 1.0).unwrap();
        // k = 2: c(1, 1/2) = 0.5 <= 0.5; k = 3: c(1, 1) = 1 > 1/3.
        let out = fair_query(&inst, &mut stream(0));
        assert_eq!(out.winners, vec![1, 2]);
        assert_eq!(out.payments, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn fair_query_matches_brute_force_and_budget() {
        use rand::Rng;
        let mut rng = stream(77);
        for trial in 0..2000 {
            let n = rng.random_range(1..12);
            let model = CostModel::ALL[trial % 4];
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            let budget = rng.random_range(0.0..20.0);
            let fq = FairQuery::new(model, budget).unwrap();
            let alloc = fq.allocate(&values).unwrap();
            assert_eq!(alloc.winner_count(), brute_force_k(model, &values, budget));
            assert!(alloc.total_payment() <= budget);
        }
    }

    #[test]
    fn budget_never_exceeded_when_shares_round_up() {
        // B/k * k rounds above B for these budgets.
        for budget in [0.7, 1.1, 2.3, 0.1 + 0.2, 5.0 / 3.0] {
            let fq = FairQuery::new(CostModel::Linear, budget).unwrap();
            let values = [0.0; 8];
            for n in 2..8 {
                let alloc = fq.allocate(&values[..n]).unwrap();
                assert!(alloc.total_payment() <= budget);
            }
        }
        let fq = FairQuery::new(CostModel::Linear, 0.7).unwrap();
        let alloc = fq.allocate(&[0.0, 0.0, 0.0, 10.0]).unwrap();
        assert_eq!(alloc.winner_count(), 3);
        assert!(alloc.total_payment() <= 0.7);
        assert!((alloc.total_payment() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn min_cost_worked_example() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let alpha = 0.2 * ACCURACY_CONSTANT;
        let inst = AccuracyInstance::new(pop(&values), CostModel::Linear, alpha).unwrap();
        let mech = inst.mechanism();
        assert!((mech.alpha_prime() - 0.2).abs() < 1e-15);
        assert_eq!(mech.winner_count(10).unwrap(), 8);
        let out = min_cost_auction(&inst, &mut stream(3)).unwrap();
        assert_eq!(out.winners, (0..8).collect::<Vec<_>>());
        assert!(out.payments[..8].iter().all(|&p| p == 4.5));
        assert_eq!(&out.payments[8..], &[0.0, 0.0]);
        assert_eq!(out.analyst_charge, 36.0);
        assert_eq!(out.noise_scale, Some(2.0));
        assert!(out.epsilons[..8].iter().all(|&e| e == 0.5));
    }

    #[test]
    fn min_cost_symmetric_values() {
        let inst = AccuracyInstance::new(pop(&[2.5; 6]), CostModel::Quadratic, 0.5).unwrap();
        let out = min_cost_auction(&inst, &mut stream(3)).unwrap();
        let k = inst.mechanism().winner_count(6).unwrap();
        let w = CostModel::Quadratic.cost(2.5, 1.0 / (6 - k) as f64);
        assert!((out.analyst_charge - k as f64 * w).abs() < 1e-12);
        assert_eq!(out.winners, (0..k).collect::<Vec<_>>());
    }

    #[test]
    fn min_cost_rejects_unattainable_accuracy() {
        let err = AccuracyInstance::new(pop(&[1.0; 5]), CostModel::Linear, 0.1).unwrap_err();
        assert!(matches!(err, Error::AccuracyUnattainable { .. }));
        assert!(err.to_string().contains("accuracy target unattainable"));
        let mech = MinCostAuction::new(CostModel::Linear, 0.1).unwrap();
        assert!(mech.allocate(&[1.0; 5]).is_err());
        assert!(MinCostAuction::new(CostModel::Linear, 1.0).is_err());
        assert!(MinCostAuction::new(CostModel::Linear, 0.0).is_err());
    }

    #[test]
    fn min_cost_boundary_alpha_prime_equals_one_over_n() {
        let mech = MinCostAuction::new(CostModel::Linear, ACCURACY_CONSTANT / 5.0).unwrap();
        assert_eq!(mech.winner_count(5).unwrap(), 4);
    }

    #[test]
    fn fixed_price_examples() {
        let p = pop(&[1.0, 2.0, 4.0, 8.0]);
        let empty = fixed_price_mechanism(&p, CostModel::Linear, 0, 5.0, &mut stream(0)).unwrap();
        assert_eq!(empty.analyst_charge, 0.0);
        assert!(empty.winners.is_empty());
        let ok = fixed_price_mechanism(&p, CostModel::Linear, 2, 1.0, &mut stream(0)).unwrap();
        assert!(ok.ir_feasible);
        assert_eq!(ok.analyst_charge, 2.0);
        let bad = fixed_price_mechanism(&p, CostModel::Linear, 2, 0.9, &mut stream(0)).unwrap();
        assert!(!bad.ir_feasible);
        assert!(matches!(
            fixed_price_mechanism(&p, CostModel::Linear, 4, 1.0, &mut stream(0)),
            Err(Error::TooManyWinners { .. })
        ));
    }

    #[test]
    fn payments_do_not_depend_on_noise() {
        let values = [0.3, 2.0, 1.1, 0.9, 5.0, 0.2];
        let p = pop(&values);
        let fq = FairQuery::new(CostModel::ExpScaled, 3.0).unwrap();
        let mc = MinCostAuction::new(CostModel::ExpArg, 0.9).unwrap();
        for mech in [&fq as &dyn Mechanism, &mc] {
            let a = mech.run(&p, &mut stream(1)).unwrap();
            let b = mech.run(&p, &mut stream(2)).unwrap();
            assert_ne!(a.estimate, b.estimate);
            assert_eq!(a.payments, b.payments);
            assert_eq!(a.epsilons, b.epsilons);
        }
    }

    #[test]
    fn rejects_invalid_reports() {
        let fq = FairQuery::new(CostModel::Linear, 1.0).unwrap();
        assert!(fq.allocate(&[]).is_err());
        assert!(fq.allocate(&[1.0, -2.0]).is_err());
        assert!(FairQuery::new(CostModel::Linear, -1.0).is_err());
    }
}
