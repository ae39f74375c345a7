//! Executable checks for the properties the auctions are claimed to have:
//! truthfulness, individual rationality, envy-freeness, budget feasibility,
//! accuracy, the necessary privacy purchase, instance optimality against
//! brute-force oracles, and the payment lower bounds.

mod accuracy;
mod bounds;
mod checks;
#[doc(hidden)]
pub mod control;
mod grid;
mod oracles;
mod report;
mod suite;

pub use accuracy::{estimate_accuracy, simulate_estimates};
pub use bounds::{accuracy_alpha, impossibility_bound, payment_lower_bound};
pub use checks::{
    check_budget_feasibility, check_envy_freeness, check_estimator_privacy,
    check_individual_rationality, check_necessity, check_truthfulness,
};
pub use grid::{GridConfig, MisreportGrid};
pub use oracles::{
    fixed_price_admissible, oracle_max_winners_envy_free, oracle_min_payment_k_units,
    PriceViolation,
};
pub use report::{VerificationReport, Violation, TOLERANCE};
pub use suite::{
    generate_corpus, impossibility_growth_report, run_suite, CorpusInstance, CorpusSpec,
    MechanismKind, SuiteOptions,
};
