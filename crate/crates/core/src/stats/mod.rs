//! Non-parametric statistics: Kendall's tau-b, Wilcoxon rank-sum and
//! signed-rank tests, and Cliff's delta.
//!
//! All tests are two-sided. Small samples get exact null distributions; larger
//! ones fall back to the normal approximation with tie-corrected variance.

mod cliff;
mod kendall;
mod wilcoxon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cliff::cliffs_delta;
pub use kendall::kendall_tau;
pub use wilcoxon::{rank_sum_test, signed_rank_test};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("tau is undefined for a constant input")]
    ConstantInput,
    #[error("degenerate: every paired difference is zero")]
    Degenerate,
    #[error("non-finite observation")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EffectClass {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectClass {
    /// Lower bounds are inclusive: |d| = 0.147 is already Small.
    pub fn from_delta(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            EffectClass::Negligible
        } else if d < 0.330 {
            EffectClass::Small
        } else if d < 0.474 {
            EffectClass::Medium
        } else {
            EffectClass::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectClass::Negligible => "Negligible",
            EffectClass::Small => "Small",
            EffectClass::Medium => "Medium",
            EffectClass::Large => "Large",
        }
    }
}

impl fmt::Display for EffectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EffectClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Negligible" | "N" => Ok(EffectClass::Negligible),
            "Small" | "S" => Ok(EffectClass::Small),
            "Medium" | "M" => Ok(EffectClass::Medium),
            "Large" | "L" => Ok(EffectClass::Large),
            other => Err(format!("unknown effect class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
    pub effect_class: Option<EffectClass>,
}

/// Where exact distributions stop and approximations begin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    /// Largest tie-free n for the exact Kendall distribution.
    pub kendall_exact_max: usize,
    /// Largest n for which tied Kendall inputs are permuted exhaustively.
    pub kendall_permutation_max: usize,
    /// Largest combined size for the exact rank-sum distribution.
    pub rank_sum_exact_max: usize,
    /// Largest count of non-zero differences for the exact signed-rank distribution.
    pub signed_rank_exact_max: usize,
    /// Half-unit continuity correction for the normal approximation of the Wilcoxon tests.
    pub continuity_correction: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            kendall_exact_max: 40,
            kendall_permutation_max: 9,
            rank_sum_exact_max: 12,
            signed_rank_exact_max: 12,
            continuity_correction: true,
        }
    }
}

/// Rank-sum p-value combined with Cliff's delta of `a` against `b`.
pub fn compare_samples(a: &[f64], b: &[f64], config: &StatsConfig) -> Result<StatResult, StatsError> {
    let test = rank_sum_test(a, b, config)?;
    let delta = cliffs_delta(a, b)?;
    Ok(StatResult {
        statistic: test.statistic,
        p_value: test.p_value,
        effect_size: delta.effect_size,
        effect_class: delta.effect_class,
    })
}

/// Two-sided normal tail probability.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Average ranks (1-based) with ties sharing the mean of their positions,
/// plus the sizes of every tie group.
pub(crate) fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Tolerance for "at least as extreme" comparisons on exact distributions.
pub(crate) const EXTREME_EPS: f64 = 1e-9;
