//! Age normalization, versioning and indicator totals.

use super::{HistoryError, IndicatorTotals, MethodHistory, MethodVersion, Revision};

/// A Julian year.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

pub fn window_seconds(window_years: f64) -> i64 {
    (window_years * SECONDS_PER_YEAR).round() as i64
}

/// Drops methods observed for less than the window (`None`), otherwise cuts
/// the history at `birth + window`. A method exactly one window old is kept.
pub fn normalize_age(history: &MethodHistory, window_years: f64) -> Option<MethodHistory> {
    let window = window_seconds(window_years);
    if history.age_seconds() < window {
        return None;
    }
    let cutoff = history.birth_timestamp + window;
    let mut out = history.clone();
    out.revisions.retain(|r| r.timestamp <= cutoff);
    out.end_of_observation = out.end_of_observation.min(cutoff);
    Some(out)
}

/// Splits revisions over SLOC-stable versions. `snapshot_slocs[0]` is the size
/// at birth and `snapshot_slocs[i]` the size after revision `i`; revision `i`
/// is charged to the version that was current when it happened.
pub fn versions_from_snapshots(snapshot_slocs: &[usize], revisions: &[Revision]) -> Vec<MethodVersion> {
    assert_eq!(snapshot_slocs.len(), revisions.len() + 1, "one SLOC snapshot per revision plus birth");
    let mut versions: Vec<MethodVersion> = Vec::new();
    for (i, &sloc) in snapshot_slocs.iter().enumerate() {
        if versions.last().is_none_or(|v| v.sloc != sloc) {
            versions.push(MethodVersion { sloc, ..MethodVersion::default() });
        }
        if let Some(rev) = revisions.get(i) {
            versions.last_mut().expect("pushed above").absorb(rev);
        }
    }
    versions
}

pub fn versionize(history: &MethodHistory, sloc_of: impl Fn(&str) -> usize) -> Result<Vec<MethodVersion>, HistoryError> {
    let missing = || HistoryError::MissingBody { method_id: history.method_id.clone() };
    let mut slocs = Vec::with_capacity(history.revisions.len() + 1);
    slocs.push(sloc_of(history.birth_body.as_deref().ok_or_else(missing)?));
    for rev in &history.revisions {
        slocs.push(sloc_of(rev.body_after.as_deref().ok_or_else(missing)?));
    }
    Ok(versions_from_snapshots(&slocs, &history.revisions))
}

pub fn compute_indicators(history: &MethodHistory) -> IndicatorTotals {
    history
        .revisions
        .iter()
        .map(|r| IndicatorTotals {
            n_revisions: 1,
            n_additions_sum: r.lines_added,
            diff_size_sum: r.lines_added + r.lines_deleted,
            edit_distance_sum: r.edit_distance,
            n_buggy_commits: u64::from(r.is_bugfix),
        })
        .sum()
}
