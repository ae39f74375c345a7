use serde::{Deserialize, Serialize};

/// Candidate misreports for each agent.
///
/// Both auctions depend on a report only through its rank among the other
/// reports and the values at the winner/loser boundary, so it suffices to try
/// every other agent's value, a step `delta` either side of it, zero, and a
/// few multiples of the agent's own value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportGrid {
    candidates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// `delta = relative_delta * max(v)`, or `relative_delta` if all values are 0.
    pub relative_delta: f64,
    pub multipliers: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            relative_delta: 1e-6,
            multipliers: vec![0.0, 0.5, 0.9, 1.1, 2.0, 10.0],
        }
    }
}

impl MisreportGrid {
    pub fn pivots(values: &[f64], config: &GridConfig) -> Self {
        let max = values.iter().copied().fold(0.0, f64::max);
        let delta = if max > 0.0 {
            config.relative_delta * max
        } else {
            config.relative_delta
        };
        let candidates = values
            .iter()
            .enumerate()
            .map(|(i, &own)| {
                let mut c = vec![0.0];
                for (j, &v) in values.iter().enumerate() {
                    if j != i {
                        c.extend([v, v - delta, v + delta]);
                    }
                }
                c.extend(config.multipliers.iter().map(|m| own * m));
                c.retain(|x| x.is_finite() && *x >= 0.0);
                c.sort_by(f64::total_cmp);
                c.dedup();
                c
            })
            .collect();
        MisreportGrid { candidates }
    }

    pub fn for_agent(&self, i: usize) -> &[f64] {
        &self.candidates[i]
    }

    pub fn n(&self) -> usize {
        self.candidates.len()
    }
}
