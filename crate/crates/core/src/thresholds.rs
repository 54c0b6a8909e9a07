//! Corpus-wide SLOC thresholds (Alves et al.) and size categories.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PERCENTILES: [f64; 3] = [0.70, 0.80, 0.90];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("no projects to derive thresholds from")]
    NoProjects,
    #[error("project {0} has no methods")]
    EmptyProject(usize),
    #[error("SLOC must be at least 1 (project {project}, method {index})")]
    ZeroSloc { project: usize, index: usize },
    #[error("percentile {0} outside (0, 1]")]
    Percentile(f64),
    #[error("thresholds must be ordered t70 <= t80 <= t90, got {0}, {1}, {2}")]
    Unordered(usize, usize, usize),
    #[error("invalid thresholds spec {0:?}; expected `derive` or `fixed:A,B,C`")]
    Spec(String),
}

/// Per-project method SLOCs; the number of projects is `projects.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThresholdInput {
    pub projects: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeThresholds {
    pub t70: usize,
    pub t80: usize,
    pub t90: usize,
}

impl Default for SizeThresholds {
    fn default() -> Self {
        SizeThresholds { t70: 24, t80: 36, t90: 63 }
    }
}

impl SizeThresholds {
    pub fn new(t70: usize, t80: usize, t90: usize) -> Result<Self, ThresholdError> {
        if t70 <= t80 && t80 <= t90 {
            Ok(SizeThresholds { t70, t80, t90 })
        } else {
            Err(ThresholdError::Unordered(t70, t80, t90))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeCategory {
    Small,
    Medium,
    Large,
    VeryLarge,
}

impl SizeCategory {
    pub const ALL: [SizeCategory; 4] = [SizeCategory::Small, SizeCategory::Medium, SizeCategory::Large, SizeCategory::VeryLarge];

    pub fn as_str(self) -> &'static str {
        match self {
            SizeCategory::Small => "Small",
            SizeCategory::Medium => "Medium",
            SizeCategory::Large => "Large",
            SizeCategory::VeryLarge => "VeryLarge",
        }
    }
}

impl fmt::Display for SizeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn categorize(sloc: usize, thresholds: &SizeThresholds) -> SizeCategory {
    if sloc <= thresholds.t70 {
        SizeCategory::Small
    } else if sloc <= thresholds.t80 {
        SizeCategory::Medium
    } else if sloc <= thresholds.t90 {
        SizeCategory::Large
    } else {
        SizeCategory::VeryLarge
    }
}

/// Either derive from the corpus or use a fixed triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    #[default]
    Derive,
    Fixed(SizeThresholds),
}

impl FromStr for ThresholdMode {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "derive" {
            return Ok(ThresholdMode::Derive);
        }
        let bad = || ThresholdError::Spec(s.to_string());
        let values = s.strip_prefix("fixed:").ok_or_else(bad)?;
        let parsed: Vec<usize> = values.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        match parsed[..] {
            [a, b, c] => Ok(ThresholdMode::Fixed(SizeThresholds::new(a, b, c)?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdDerivation {
    #[serde(flatten)]
    pub thresholds: SizeThresholds,
    /// Distinct SLOCs of each project in first-appearance order.
    #[serde(skip)]
    pub list_slocs: Vec<Vec<usize>>,
    /// Normalized aggregated weight for each entry of `list_slocs`.
    #[serde(skip)]
    pub list_norms: Vec<Vec<f64>>,
    pub x_axis: Vec<usize>,
    pub y_axis: Vec<f64>,
}

const CUMULATIVE_EPS: f64 = 1e-12;

pub fn derive_thresholds(input: &ThresholdInput, percentiles: [f64; 3]) -> Result<ThresholdDerivation, ThresholdError> {
    if input.projects.is_empty() {
        return Err(ThresholdError::NoProjects);
    }
    if let Some(&p) = percentiles.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(ThresholdError::Percentile(p));
    }
    let phi = input.projects.len() as f64;
    let mut list_slocs = Vec::with_capacity(input.projects.len());
    let mut list_norms = Vec::with_capacity(input.projects.len());
    for (p, methods) in input.projects.iter().enumerate() {
        if methods.is_empty() {
            return Err(ThresholdError::EmptyProject(p));
        }
        if let Some(index) = methods.iter().position(|&s| s == 0) {
            return Err(ThresholdError::ZeroSloc { project: p, index });
        }
        let total: usize = methods.iter().sum();
        let mut slocs: Vec<usize> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &s in methods {
            match slocs.iter().position(|&x| x == s) {
                Some(i) => counts[i] += 1,
                None => {
                    slocs.push(s);
                    counts.push(1);
                }
            }
        }
        let norms = slocs.iter().zip(&counts).map(|(&s, &c)| (c * s) as f64 / total as f64 / phi).collect();
        list_slocs.push(slocs);
        list_norms.push(norms);
    }

    // summing each x in a fixed order keeps the result independent of project order
    let mut contributions: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (slocs, norms) in list_slocs.iter().zip(&list_norms) {
        for (&s, &n) in slocs.iter().zip(norms) {
            contributions.entry(s).or_default().push(n);
        }
    }
    let mut x_axis = Vec::with_capacity(contributions.len());
    let mut y_axis = Vec::with_capacity(contributions.len());
    for (s, mut parts) in contributions {
        parts.sort_by(f64::total_cmp);
        x_axis.push(s);
        y_axis.push(parts.iter().sum());
    }

    let cut = |p: f64| {
        let mut cumulative = 0.0;
        for (&x, &y) in x_axis.iter().zip(&y_axis) {
            cumulative += y;
            if cumulative + CUMULATIVE_EPS >= p {
                return x;
            }
        }
        *x_axis.last().expect("at least one project with methods")
    };
    let thresholds = SizeThresholds { t70: cut(percentiles[0]), t80: cut(percentiles[1]), t90: cut(percentiles[2]) };
    Ok(ThresholdDerivation { thresholds, list_slocs, list_norms, x_axis, y_axis })
}
