//! Differential-privacy primitives: Laplace noise, the subset-sum estimator
//! used by both auctions, and closed-form privacy and tail calculations.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::population::Population;

/// `ln 3`.
pub const LN_3: f64 = 1.098_612_288_668_109_8;

/// Scale `sigma` of a zero-mean Laplace distribution.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LaplaceScale(f64);

impl LaplaceScale {
    pub fn new(sigma: f64) -> Result<Self> {
        positive("laplace scale", sigma).map(LaplaceScale)
    }

    pub fn sigma(self) -> f64 {
        self.0
    }

    /// Density `(1 / 2 sigma) exp(-|x| / sigma)`.
    pub fn density(self, x: f64) -> f64 {
        (-(x.abs()) / self.0).exp() / (2.0 * self.0)
    }

    pub fn cdf(self, x: f64) -> f64 {
        if x < 0.0 {
            0.5 * (x / self.0).exp()
        } else {
            1.0 - 0.5 * (-x / self.0).exp()
        }
    }
}

/// Draws one sample by inverting the CDF at a single uniform `u` in (0, 1).
pub fn lap_sample<R: Rng + ?Sized>(scale: LaplaceScale, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let centered = u - 0.5;
    -scale.sigma() * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// Two-sided tail mass `Pr[|X| >= threshold] = exp(-threshold / sigma)`.
pub fn lap_tail_prob(scale: LaplaceScale, threshold: f64) -> f64 {
    debug_assert!(threshold >= 0.0);
    (-threshold / scale.sigma()).exp()
}

/// Worst-case ratio of the estimator's output densities for two runs whose
/// deterministic parts differ by `shift`.
pub fn privacy_ratio_bound(noise_scale: LaplaceScale, shift: f64) -> f64 {
    (shift.abs() / noise_scale.sigma()).exp()
}

/// Group-privacy factor `exp(sum_{i in group} eps_i)` for databases that
/// differ exactly on `group`.
///
/// Panics if an index in `group` is out of range.
pub fn group_privacy_factor(epsilons: &[f64], group: &[usize]) -> f64 {
    group.iter().map(|&i| epsilons[i]).sum::<f64>().exp()
}

/// Which agents' bits enter the estimate and how much noise covers them.
///
/// The estimate is `sum_{i in H} b_i + (n - |H|)/2 + Lap(n - |H|)`: the
/// unknown bits of the `n - |H|` agents outside `H` are replaced by their
/// midpoint, and every agent in `H` is `1/(n - |H|)`-private.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorPlan {
    n: usize,
    winners: Vec<usize>,
    noise_scale: f64,
    offset: f64,
}

impl EstimatorPlan {
    /// Builds the plan for a population of size `n` that uses the bits of
    /// `winners`. An empty winner set is allowed and means "use no bits".
    pub fn new(n: usize, mut winners: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPopulation);
        }
        winners.sort_unstable();
        winners.dedup();
        if let Some(&i) = winners.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if winners.len() >= n {
            return Err(Error::WinnerSetCoversPopulation { n });
        }
        let left_out = (n - winners.len()) as f64;
        Ok(EstimatorPlan {
            n,
            winners,
            noise_scale: left_out,
            offset: left_out / 2.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Winner indices in ascending order.
    pub fn winners(&self) -> &[usize] {
        &self.winners
    }

    pub fn noise_scale(&self) -> LaplaceScale {
        LaplaceScale(self.noise_scale)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Fraction `alpha = (n - |H|) / n` of agents left out.
    pub fn alpha_fraction(&self) -> f64 {
        self.noise_scale / self.n as f64
    }

    /// Privacy level of every agent under this plan.
    pub fn epsilons(&self) -> Vec<f64> {
        let mut eps = vec![0.0; self.n];
        let level = 1.0 / self.noise_scale;
        for &i in &self.winners {
            eps[i] = level;
        }
        eps
    }

    /// The noiseless part `t = sum_{i in H} b_i + offset`.
    pub fn deterministic_part(&self, pop: &Population) -> Result<f64> {
        self.check_population(pop)?;
        let sum = self.winners.iter().filter(|&&i| pop.bits()[i]).count();
        Ok(sum as f64 + self.offset)
    }

    /// Density of the estimate at `x`.
    pub fn output_density(&self, pop: &Population, x: f64) -> Result<f64> {
        let t = self.deterministic_part(pop)?;
        Ok(self.noise_scale().density(x - t))
    }

    fn check_population(&self, pop: &Population) -> Result<()> {
        if pop.n() != self.n {
            return Err(Error::LengthMismatch {
                bits: pop.n(),
                values: self.n,
            });
        }
        Ok(())
    }
}

/// Runs the estimator once, returning the estimate and per-agent privacy
/// levels (`1/noise_scale` inside the winner set, `0` outside).
pub fn laplace_estimator<R: Rng + ?Sized>(
    pop: &Population,
    plan: &EstimatorPlan,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    let t = plan.deterministic_part(pop)?;
    Ok((t + lap_sample(plan.noise_scale(), rng), plan.epsilons()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::stream;

    #[test]
    fn scale_must_be_positive() {
        assert!(LaplaceScale::new(0.0).is_err());
        assert!(LaplaceScale::new(-1.0).is_err());
        assert!(LaplaceScale::new(f64::NAN).is_err());
        assert!(LaplaceScale::new(0.5).is_ok());
    }

    #[test]
    fn tail_examples() {
        let s = LaplaceScale::new(3.0).unwrap();
        assert_eq!(lap_tail_prob(s, 0.0), 1.0);
        assert!((lap_tail_prob(s, LN_3 * 3.0) - 1.0 / 3.0).abs() < 1e-12);
        let two = LaplaceScale::new(2.0).unwrap();
        assert!((lap_tail_prob(two, 4.0) - 0.135_335_283_236_612_7).abs() < 1e-12);
    }

    /// Composite Simpson integration of the density over [x, x + 60 sigma].
    fn integrated_tail(scale: LaplaceScale, x: f64) -> f64 {
        let hi = x + 60.0 * scale.sigma();
        let steps = 20_000;
        let h = (hi - x) / steps as f64;
        let mut acc = scale.density(x) + scale.density(hi);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * scale.density(x + k as f64 * h);
        }
        2.0 * acc * h / 3.0
    }

    #[test]
    fn tail_matches_numerical_integration() {
        let s = LaplaceScale::new(1.7).unwrap();
        for k in 0..100 {
            let x = k as f64 * 0.1;
            let diff = (lap_tail_prob(s, x) - integrated_tail(s, x)).abs();
            assert!(diff <= 1e-9, "x = {x}: {diff}");
        }
    }

    #[test]
    fn ratio_bound_examples() {
        let s = LaplaceScale::new(4.0).unwrap();
        assert_eq!(privacy_ratio_bound(s, 0.0), 1.0);
        assert!((privacy_ratio_bound(s, 1.0) - (0.25f64).exp()).abs() < 1e-15);
        let five = LaplaceScale::new(5.0).unwrap();
        assert!((privacy_ratio_bound(five, 2.0) - 1.491_824_697_641_270_3).abs() < 1e-12);
        assert_eq!(
            privacy_ratio_bound(five, -2.0),
            privacy_ratio_bound(five, 2.0)
        );
    }

    #[test]
    fn group_privacy_examples() {
        assert_eq!(group_privacy_factor(&[0.3, 0.4], &[]), 1.0);
        let f = group_privacy_factor(&[0.1, 0.2], &[0, 1]);
        assert!((f - 1.349_858_807_576_003_1).abs() < 1e-12);
        // alpha n = 10: half of alpha n agents at 1/(alpha n) each gives e^(1/2).
        let eps = vec![0.1; 20];
        let group: Vec<usize> = (0..5).collect();
        assert!((group_privacy_factor(&eps, &group) - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn group_privacy_is_multiplicative_over_disjoint_groups() {
        let eps = [0.05, 0.3, 0.0, 1.2, 0.7];
        let a = [0, 3];
        let b = [1, 4];
        let both = [0, 3, 1, 4];
        let lhs = group_privacy_factor(&eps, &both);
        let rhs = group_privacy_factor(&eps, &a) * group_privacy_factor(&eps, &b);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn sampler_median_and_tails() {
        let sigma = 2.5;
        let s = LaplaceScale::new(sigma).unwrap();
        let mut rng = stream(2024);
        let n = 1_000_000;
        let mut draws: Vec<f64> = (0..n).map(|_| lap_sample(s, &mut rng)).collect();
        let tail = |t: f64| draws.iter().filter(|x| x.abs() >= t * sigma).count() as f64 / n as f64;
        assert!((tail(LN_3) - 1.0 / 3.0).abs() <= 0.005);
        for t in [0.5, 1.0, 2.0] {
            assert!((tail(t) - (-t).exp()).abs() <= 0.005, "t = {t}");
        }
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.01 * sigma, "mean {mean}");
        draws.sort_by(f64::total_cmp);
        let median = 0.5 * (draws[n / 2 - 1] + draws[n / 2]);
        assert!(median.abs() <= 0.01 * sigma, "median {median}");
        // Kolmogorov-Smirnov distance against the exact CDF.
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = s.cdf(x);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 0.002, "ks {ks}");
    }

    #[test]
    fn sampler_is_reproducible() {
        let s = LaplaceScale::new(1.0).unwrap();
        let a: Vec<f64> = {
            let mut r = stream(9);
            (0..10).map(|_| lap_sample(s, &mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = stream(9);
            (0..10).map(|_| lap_sample(s, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn estimator_worked_example() {
        let pop = Population::new(vec![true; 10], vec![1.0; 10]).unwrap();
        let plan = EstimatorPlan::new(10, (0..8).collect()).unwrap();
        assert_eq!(plan.noise_scale().sigma(), 2.0);
        assert_eq!(plan.offset(), 1.0);
        assert!((plan.alpha_fraction() - 0.2).abs() < 1e-15);
        let t = plan.deterministic_part(&pop).unwrap();
        assert_eq!(t, 9.0);
        assert_eq!((t - pop.true_count() as f64).abs(), 1.0);
        let (_, eps) = laplace_estimator(&pop, &plan, &mut stream(1)).unwrap();
        assert_eq!(&eps[..8], &[0.5; 8]);
        assert_eq!(&eps[8..], &[0.0; 2]);
    }

    #[test]
    fn non_winner_bit_is_ignored() {
        let pop = Population::from_bits01(&[1, 0, 1, 1], vec![1.0; 4]).unwrap();
        let plan = EstimatorPlan::new(4, vec![0, 2]).unwrap();
        let flipped = pop.with_flipped_bit(3).unwrap();
        let a = laplace_estimator(&pop, &plan, &mut stream(5)).unwrap();
        let b = laplace_estimator(&flipped, &plan, &mut stream(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn winner_bit_flip_ratio_on_grid() {
        let pop = Population::from_bits01(&[1, 0, 1, 1, 0], vec![1.0; 5]).unwrap();
        let plan = EstimatorPlan::new(5, vec![0, 1, 2]).unwrap();
        let bound = privacy_ratio_bound(plan.noise_scale(), 1.0);
        for i in plan.winners().to_vec() {
            let flipped = pop.with_flipped_bit(i).unwrap();
            let sigma = plan.noise_scale().sigma();
            let mut worst: f64 = 0.0;
            for k in 0..=2000 {
                let x = -20.0 * sigma + 40.0 * sigma * k as f64 / 2000.0;
                let p = plan.output_density(&pop, x).unwrap();
                let q = plan.output_density(&flipped, x).unwrap();
                worst = worst.max(p / q).max(q / p);
            }
            assert!(worst <= bound + 1e-9);
            assert!(
                worst >= bound - 1e-9,
                "bound is attained away from the centres"
            );
        }
    }

    #[test]
    fn plan_validation() {
        assert_eq!(
            EstimatorPlan::new(3, vec![0, 1, 2]).unwrap_err(),
            Error::WinnerSetCoversPopulation { n: 3 }
        );
        assert!(EstimatorPlan::new(3, vec![5]).is_err());
        let empty = EstimatorPlan::new(4, vec![]).unwrap();
        assert_eq!(empty.noise_scale().sigma(), 4.0);
        assert_eq!(empty.offset(), 2.0);
        let dup = EstimatorPlan::new(4, vec![2, 0, 2]).unwrap();
        assert_eq!(dup.winners(), &[0, 2]);
        let pop = Population::new(vec![true; 3], vec![0.0; 3]).unwrap();
        assert!(dup.deterministic_part(&pop).is_err());
    }
}
