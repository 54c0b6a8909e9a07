use super::{check_finite, EffectClass, StatResult, StatsError};

/// `(#{a > b} - #{a < b}) / (|a| |b|)` over all cross pairs.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x) as i64;
        let above = (sorted.len() - sorted.partition_point(|&y| y <= x)) as i64;
        dominance += below - above;
    }
    let delta = dominance as f64 / (a.len() as f64 * b.len() as f64);
    Ok(StatResult {
        statistic: delta,
        p_value: None,
        effect_size: Some(delta),
        effect_class: Some(EffectClass::from_delta(delta)),
    })
}
