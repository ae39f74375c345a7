//! Single-parameter privacy cost families `c(v, eps)`.
//!
//! Every family is normalized so that `c(v, 0) = 0`, is continuous and
//! nondecreasing in `eps`, and orders agents by `v` independently of `eps`:
//! for `eps > 0`, `c(v, eps) <= c(v', eps)` iff `v <= v'`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};

/// A cost-function family. The valuation `v` is per-agent, so the family has
/// no free parameters of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// `v * eps`
    Linear,
    /// `v * eps^2`
    Quadratic,
    /// `(e^eps - 1) * v`, the expected-utility loss of an `eps`-private use.
    ExpScaled,
    /// `e^(eps * v) - 1`, the exponential family shifted so that `c(v, 0) = 0`.
    ExpArg,
}

impl CostModel {
    pub const ALL: [CostModel; 4] = [
        CostModel::Linear,
        CostModel::Quadratic,
        CostModel::ExpScaled,
        CostModel::ExpArg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostModel::Linear => "linear",
            CostModel::Quadratic => "quadratic",
            CostModel::ExpScaled => "exp_scaled",
            CostModel::ExpArg => "exp_arg",
        }
    }

    /// Evaluates `c(v, eps)`, rejecting negative or non-finite arguments.
    pub fn eval(self, v: f64, eps: f64) -> Result<f64> {
        non_negative("valuation", v)?;
        non_negative("epsilon", eps)?;
        Ok(self.cost(v, eps))
    }

    /// Evaluates `c(v, eps)` for arguments already known to be valid.
    ///
    /// Population values and mechanism privacy levels are validated on
    /// construction, so the mechanisms call this directly.
    #[inline]
    pub fn cost(self, v: f64, eps: f64) -> f64 {
        debug_assert!(v >= 0.0 && eps >= 0.0, "cost({v}, {eps})");
        if eps == 0.0 {
            return 0.0;
        }
        match self {
            CostModel::Linear => v * eps,
            CostModel::Quadratic => v * eps * eps,
            CostModel::ExpScaled => eps.exp_m1() * v,
            CostModel::ExpArg => (eps * v).exp_m1(),
        }
    }

    /// Returns the valuation `v` with `c(v, eps) = target`.
    pub fn inverse_in_v(self, target: f64, eps: f64) -> Result<f64> {
        non_negative("target cost", target)?;
        positive("epsilon", eps)?;
        if target == 0.0 {
            return Ok(0.0);
        }
        let v = match self {
            CostModel::Linear => target / eps,
            CostModel::Quadratic => target / (eps * eps),
            CostModel::ExpScaled => target / eps.exp_m1(),
            CostModel::ExpArg => target.ln_1p() / eps,
        };
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::NoInverse {
                family: self.name(),
                target,
                epsilon: eps,
            })
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(CostModel::Linear),
            "quadratic" => Ok(CostModel::Quadratic),
            "exp_scaled" => Ok(CostModel::ExpScaled),
            "exp_arg" => Ok(CostModel::ExpArg),
            other => Err(format!(
                "unknown cost family `{other}` (expected linear, quadratic, exp_scaled or exp_arg)"
            )),
        }
    }
}

/// Free-function form of [`CostModel::eval`].
pub fn cost_eval(model: CostModel, v: f64, eps: f64) -> Result<f64> {
    model.eval(v, eps)
}

/// Free-function form of [`CostModel::inverse_in_v`].
pub fn cost_inverse_in_v(model: CostModel, target_cost: f64, eps: f64) -> Result<f64> {
    model.inverse_in_v(target_cost, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bisection on `v` using only forward evaluations.
    fn bisect_inverse(model: CostModel, target: f64, eps: f64) -> f64 {
        let mut hi = 1.0;
        while model.cost(hi, eps) < target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if model.cost(mid, eps) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_example() {
        assert_eq!(cost_eval(CostModel::Linear, 2.0, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn zero_epsilon_costs_nothing() {
        for model in CostModel::ALL {
            assert_eq!(model.eval(7.3, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn exp_scaled_example() {
        // (e - 1) * 3 = 5.154845485377136...
        let c = cost_eval(CostModel::ExpScaled, 3.0, 1.0).unwrap();
        assert!((c - 5.154_845_485_377_136).abs() < 1e-12, "{c}");
    }

    #[test]
    fn rejects_bad_inputs() {
        for model in CostModel::ALL {
            assert!(model.eval(-1.0, 0.5).is_err());
            assert!(model.eval(1.0, -0.5).is_err());
            assert!(model.eval(f64::NAN, 0.5).is_err());
            assert!(model.eval(1.0, f64::INFINITY).is_err());
            assert!(model.inverse_in_v(1.0, 0.0).is_err());
            assert!(model.inverse_in_v(-1.0, 0.5).is_err());
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(cost_inverse_in_v(CostModel::Linear, 1.0, 0.5).unwrap(), 2.0);
        for model in CostModel::ALL {
            assert_eq!(model.inverse_in_v(0.0, 0.3).unwrap(), 0.0);
        }
        let v = cost_inverse_in_v(CostModel::Quadratic, 2.0, 0.5).unwrap();
        let oracle = bisect_inverse(CostModel::Quadratic, 2.0, 0.5);
        assert!((oracle - 8.0).abs() < 1e-9);
        assert!((v - oracle).abs() < 1e-9);
    }

    #[test]
    fn inverse_without_solution() {
        let err = CostModel::ExpScaled
            .inverse_in_v(1e300, 1e-300)
            .unwrap_err();
        assert!(matches!(err, Error::NoInverse { .. }));
    }

    #[test]
    fn family_names_round_trip() {
        for model in CostModel::ALL {
            assert_eq!(model.name().parse::<CostModel>().unwrap(), model);
        }
        assert!("cubic".parse::<CostModel>().is_err());
    }

    #[test]
    fn ordering_on_random_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let eps: Vec<f64> = (0..100).map(|_| rng.random_range(1e-3..1.0)).collect();
        for model in CostModel::ALL {
            for _ in 0..1000 {
                let v: f64 = rng.random_range(0.0..20.0);
                let w: f64 = rng.random_range(0.0..20.0);
                for &e in &eps {
                    let dc = model.cost(v, e) - model.cost(w, e);
                    assert_eq!(
                        dc.partial_cmp(&0.0),
                        v.partial_cmp(&w),
                        "{model} {v} {w} {e}"
                    );
                }
            }
        }
    }

    fn any_model() -> impl Strategy<Value = CostModel> {
        prop::sample::select(CostModel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn strictly_increasing_in_epsilon(
            model in any_model(),
            v in 0.01f64..20.0,
            e1 in 0.001f64..1.0,
            step in 0.001f64..1.0,
        ) {
            prop_assert!(model.cost(v, e1 + step) > model.cost(v, e1));
        }

        #[test]
        fn orders_agents_independently_of_epsilon(
            model in any_model(),
            v in 0.0f64..20.0,
            w in 0.0f64..20.0,
            eps in 0.001f64..1.0,
        ) {
            let dc = model.cost(v, eps) - model.cost(w, eps);
            if v < w {
                prop_assert!(dc < 0.0);
            } else if v > w {
                prop_assert!(dc > 0.0);
            } else {
                prop_assert!(dc == 0.0);
            }
        }

        #[test]
        fn inverse_is_right_inverse(
            model in any_model(),
            target in 0.0f64..100.0,
            eps in 0.01f64..1.0,
        ) {
            let v = model.inverse_in_v(target, eps).unwrap();
            prop_assert!((model.cost(v, eps) - target).abs() <= 1e-9);
            let oracle = bisect_inverse(model, target, eps);
            prop_assert!((v - oracle).abs() <= 1e-9 * v.max(1.0));
        }
    }
}
