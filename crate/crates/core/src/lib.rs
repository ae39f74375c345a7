//! Procurement auctions for differentially private counting queries.
//!
//! An analyst wants an estimate of `s = sum b_i` over agents' private bits.
//! Each agent `i` has a privacy valuation `v_i` and suffers cost
//! `c(v_i, eps_i)` when its bit is used `eps_i`-privately. The crate provides
//!
//! - [`cost`] and [`population`]: cost families and agent populations,
//! - [`dp`]: Laplace noise and the subset-sum estimator,
//! - [`mechanisms`]: a budget-feasible auction ([`FairQuery`]), an
//!   accuracy-target auction ([`MinCostAuction`]) and the fixed-price
//!   benchmark family,
//! - [`verify`]: checkers for truthfulness, individual rationality,
//!   envy-freeness, accuracy and the optimality and lower-bound results the
//!   auctions are measured against.

pub mod cost;
pub mod dp;
pub mod error;
pub mod mechanisms;
pub mod population;
pub mod stream;
pub mod verify;

pub use cost::{cost_eval, cost_inverse_in_v, CostModel};
pub use dp::{
    group_privacy_factor, lap_sample, lap_tail_prob, laplace_estimator, privacy_ratio_bound,
    EstimatorPlan, LaplaceScale,
};
pub use error::{Error, Result};
pub use mechanisms::{
    fair_query, fixed_price_mechanism, min_cost_auction, AccuracyInstance, Allocation,
    BudgetInstance, FairQuery, FixedPrice, Mechanism, MechanismOutcome, MinCostAuction,
    ACCURACY_CONSTANT,
};
pub use population::{
    generate_population, BitModel, Population, PopulationSpec, ValueDistribution,
};
pub use stream::{derive_stream, stream, Stream};
pub use verify::{VerificationReport, Violation};
