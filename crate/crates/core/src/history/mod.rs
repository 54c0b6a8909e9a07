//! Per-method change history and the maintenance indicators derived from it.

mod bugfix;
mod levenshtein;
mod normalize;
mod tracer;

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bugfix::{classify_bugfix, BugKeywords, DEFAULT_BUG_KEYWORDS};
pub use levenshtein::levenshtein;
pub use normalize::{
    compute_indicators, normalize_age, versionize, versions_from_snapshots, window_seconds, SECONDS_PER_YEAR,
};
pub use tracer::{line_changes, trace_method_history, TraceOptions, Tracer};

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("git: {0}")]
    Git(#[from] git2::Error),
    #[error("commit `{0}` is not on the first-parent chain being traced")]
    SnapshotNotOnChain(String),
    #[error("cannot resolve revision `{0}`")]
    UnknownRevision(String),
    #[error("{path}:{line}: malformed history: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("history of {method_id} lacks the method text needed for versioning")]
    MissingBody { method_id: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub commit_id: String,
    pub timestamp: i64,
    pub lines_added: u64,
    pub lines_deleted: u64,
    /// Always `lines_added + lines_deleted`; filled in on ingestion when absent.
    #[serde(default)]
    pub diff_size: u64,
    pub edit_distance: u64,
    pub is_bugfix: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_after: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodHistory {
    pub method_id: String,
    pub birth_commit: String,
    pub birth_timestamp: i64,
    pub end_of_observation: i64,
    pub revisions: Vec<Revision>,
    /// Set when tracing stopped at a rename it could not bridge.
    #[serde(default)]
    pub truncated: bool,
    /// Method text at birth; needed only for versioning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_body: Option<String>,
}

impl MethodHistory {
    pub fn age_seconds(&self) -> i64 {
        self.end_of_observation - self.birth_timestamp
    }

    fn validate(&mut self) -> Result<(), String> {
        if self.end_of_observation < self.birth_timestamp {
            return Err("end_of_observation precedes birth_timestamp".into());
        }
        let mut last = self.birth_timestamp;
        for rev in &mut self.revisions {
            if rev.timestamp < last {
                return Err(format!("revision {} is out of order or predates birth", rev.commit_id));
            }
            last = rev.timestamp;
            let sum = rev.lines_added + rev.lines_deleted;
            if rev.diff_size == 0 {
                rev.diff_size = sum;
            } else if rev.diff_size != sum {
                return Err(format!("revision {}: diff_size {} != lines_added + lines_deleted", rev.commit_id, rev.diff_size));
            }
        }
        Ok(())
    }
}

/// The five maintenance indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Revisions,
    Additions,
    DiffSize,
    EditDistance,
    BuggyCommits,
}

impl Indicator {
    pub const ALL: [Indicator; 5] =
        [Indicator::Revisions, Indicator::Additions, Indicator::DiffSize, Indicator::EditDistance, Indicator::BuggyCommits];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Revisions => "revisions",
            Indicator::Additions => "additions",
            Indicator::DiffSize => "diff_size",
            Indicator::EditDistance => "edit_distance",
            Indicator::BuggyCommits => "buggy_commits",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| format!("unknown indicator `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MethodVersion {
    pub sloc: usize,
    pub n_revisions: u64,
    pub n_additions: u64,
    pub diff_size_sum: u64,
    pub edit_distance_sum: u64,
    pub n_buggy_commits: u64,
}

impl MethodVersion {
    pub fn get(&self, indicator: Indicator) -> u64 {
        match indicator {
            Indicator::Revisions => self.n_revisions,
            Indicator::Additions => self.n_additions,
            Indicator::DiffSize => self.diff_size_sum,
            Indicator::EditDistance => self.edit_distance_sum,
            Indicator::BuggyCommits => self.n_buggy_commits,
        }
    }

    fn absorb(&mut self, rev: &Revision) {
        self.n_revisions += 1;
        self.n_additions += rev.lines_added;
        self.diff_size_sum += rev.lines_added + rev.lines_deleted;
        self.edit_distance_sum += rev.edit_distance;
        self.n_buggy_commits += u64::from(rev.is_bugfix);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IndicatorTotals {
    pub n_revisions: u64,
    pub n_additions_sum: u64,
    pub diff_size_sum: u64,
    pub edit_distance_sum: u64,
    pub n_buggy_commits: u64,
}

impl IndicatorTotals {
    pub fn get(&self, indicator: Indicator) -> u64 {
        match indicator {
            Indicator::Revisions => self.n_revisions,
            Indicator::Additions => self.n_additions_sum,
            Indicator::DiffSize => self.diff_size_sum,
            Indicator::EditDistance => self.edit_distance_sum,
            Indicator::BuggyCommits => self.n_buggy_commits,
        }
    }

    pub fn from_versions(versions: &[MethodVersion]) -> Self {
        versions.iter().fold(IndicatorTotals::default(), |acc, v| acc + IndicatorTotals {
            n_revisions: v.n_revisions,
            n_additions_sum: v.n_additions,
            diff_size_sum: v.diff_size_sum,
            edit_distance_sum: v.edit_distance_sum,
            n_buggy_commits: v.n_buggy_commits,
        })
    }
}

impl std::ops::Add for IndicatorTotals {
    type Output = IndicatorTotals;

    fn add(self, o: IndicatorTotals) -> IndicatorTotals {
        IndicatorTotals {
            n_revisions: self.n_revisions + o.n_revisions,
            n_additions_sum: self.n_additions_sum + o.n_additions_sum,
            diff_size_sum: self.diff_size_sum + o.diff_size_sum,
            edit_distance_sum: self.edit_distance_sum + o.edit_distance_sum,
            n_buggy_commits: self.n_buggy_commits + o.n_buggy_commits,
        }
    }
}

impl std::iter::Sum for IndicatorTotals {
    fn sum<I: Iterator<Item = IndicatorTotals>>(iter: I) -> Self {
        iter.fold(IndicatorTotals::default(), |a, b| a + b)
    }
}

/// Reads precomputed histories: JSON lines, or a single JSON array.
pub fn load_histories(path: &Path) -> Result<Vec<MethodHistory>, HistoryError> {
    let text = std::fs::read_to_string(path)?;
    parse_histories(&text, &path.display().to_string())
}

pub fn parse_histories(text: &str, origin: &str) -> Result<Vec<MethodHistory>, HistoryError> {
    let malformed = |line: usize, message: String| HistoryError::Malformed { path: origin.to_string(), line, message };
    let mut histories: Vec<MethodHistory> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| malformed(e.line(), e.to_string()))?
    } else {
        let mut out = Vec::new();
        for (i, line) in std::io::Cursor::new(text).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| malformed(i + 1, e.to_string()))?);
        }
        out
    };
    for (i, h) in histories.iter_mut().enumerate() {
        h.validate().map_err(|m| malformed(i + 1, m))?;
    }
    Ok(histories)
}
