use super::{check_finite, midranks, normal_two_sided, StatResult, StatsConfig, StatsError, EXTREME_EPS};

fn tie_term(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum()
}

/// Wilcoxon rank-sum (Mann-Whitney) test. The statistic is U for `a`, i.e.
/// the rank sum of `a` minus `|a|(|a|+1)/2`.
pub fn rank_sum_test(a: &[f64], b: &[f64], config: &StatsConfig) -> Result<StatResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let (na, n) = (a.len(), pooled.len());
    let w: f64 = ranks[..na].iter().sum();
    let mean = na as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (w - mean).abs();

    let p = if n <= config.rank_sum_exact_max {
        exact_rank_sum_p(&ranks, na, mean, observed)
    } else {
        let (na, nb, nf) = (na as f64, b.len() as f64, n as f64);
        let var = na * nb / 12.0 * ((nf + 1.0) - tie_term(&ties) / (nf * (nf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let cc = if config.continuity_correction { 0.5 } else { 0.0 };
            normal_two_sided((observed - cc).max(0.0) / var.sqrt())
        }
    };
    let u = w - na as f64 * (na as f64 + 1.0) / 2.0;
    Ok(StatResult { statistic: u, p_value: Some(p), effect_size: None, effect_class: None })
}

/// Enumerates every way of drawing `k` ranks out of the pooled ranks.
fn exact_rank_sum_p(ranks: &[f64], k: usize, mean: f64, observed: f64) -> f64 {
    let n = ranks.len();
    let mut chosen: Vec<usize> = (0..k).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        total += 1;
        let w: f64 = chosen.iter().map(|&i| ranks[i]).sum();
        if (w - mean).abs() >= observed - EXTREME_EPS {
            hits += 1;
        }
        // advance to the next k-combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return hits as f64 / total as f64;
            }
            i -= 1;
            if chosen[i] < n - k + i {
                break;
            }
        }
        chosen[i] += 1;
        for j in i + 1..k {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

/// Wilcoxon signed-rank test on paired observations. Differences are
/// `before - after`; zero differences are dropped. The statistic is the rank
/// sum of the positive differences.
pub fn signed_rank_test(pairs: &[(f64, f64)], config: &StatsConfig) -> Result<StatResult, StatsError> {
    let diffs: Vec<f64> = pairs.iter().map(|(b, a)| b - a).collect();
    check_finite(&diffs)?;
    let nonzero: Vec<f64> = diffs.into_iter().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(StatsError::Degenerate);
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&magnitudes);
    let m = nonzero.len();
    let w_plus: f64 = nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let mean = m as f64 * (m as f64 + 1.0) / 4.0;
    let observed = (w_plus - mean).abs();

    let p = if m <= config.signed_rank_exact_max {
        let (mut hits, total) = (0u64, 1u64 << m);
        for mask in 0..total {
            let w: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if (w - mean).abs() >= observed - EXTREME_EPS {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    } else {
        let mf = m as f64;
        let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
        if var <= 0.0 {
            1.0
        } else {
            let cc = if config.continuity_correction { 0.5 } else { 0.0 };
            normal_two_sided((observed - cc).max(0.0) / var.sqrt())
        }
    };
    Ok(StatResult { statistic: w_plus, p_value: Some(p), effect_size: None, effect_class: None })
}
