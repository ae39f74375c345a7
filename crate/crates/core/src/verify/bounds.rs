//! Closed-form payment bounds.

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::mechanisms::ACCURACY_CONSTANT;

/// Lower bound on the total payment of any `alpha n`-accurate, individually
/// rational mechanism: `sum_{i <= floor((1 - 4 alpha) n)} c(v_(i), 1/(4 alpha n))`
/// over ascending valuations. Zero when `alpha >= 1/4`.
pub fn payment_lower_bound(values: &[f64], model: CostModel, alpha: f64) -> f64 {
    let n = values.len() as f64;
    let terms = ((1.0 - 4.0 * alpha) * n).floor();
    if terms <= 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let eps = 1.0 / (4.0 * alpha * n);
    sorted[..terms as usize]
        .iter()
        .map(|&v| model.cost(v, eps))
        .sum()
}

/// `ln(4/3) * min_i v_i`: the payment that any individually rational
/// mechanism which also keeps valuations private, and is better than
/// `n/2`-accurate, must exceed on every input.
pub fn impossibility_bound(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    crate::population::validate_values(values)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((4.0f64 / 3.0).ln() * min)
}

/// The `alpha` for which an estimator with noise scale `n - |H|` is
/// `alpha n`-accurate: `(1/2 + ln 3)(n - |H|) / n`.
pub fn accuracy_alpha(noise_scale: f64, n: usize) -> f64 {
    ACCURACY_CONSTANT * noise_scale / n as f64
}
