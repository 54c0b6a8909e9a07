use super::{check_finite, normal_two_sided, StatResult, StatsConfig, StatsError, EXTREME_EPS};

/// Pair counts underlying tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairCounts {
    /// concordant minus discordant
    s: i64,
    total: i64,
    tied_x: i64,
    tied_y: i64,
}

fn pairs(n: usize) -> i64 {
    (n as i64) * (n as i64 - 1) / 2
}

/// Knight's O(n log n) counting: sort by (x, y), then count y-inversions with a
/// merge sort.
fn pair_counts(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));

    let mut tied_x = 0;
    let mut tied_xy = 0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[order[j]] == x[order[i]] {
            j += 1;
        }
        tied_x += pairs(j - i);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && y[order[l]] == y[order[k]] {
                l += 1;
            }
            tied_xy += pairs(l - k);
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = ys.clone();
    let swaps = inversions(&mut ys, &mut buf);

    let mut tied_y = 0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pairs(j - i);
        i = j;
    }

    let total = pairs(n);
    PairCounts { s: total - tied_x - tied_y + tied_xy - 2 * swaps, total, tied_x, tied_y }
}

/// Sorts `v` ascending and returns the number of strictly inverted pairs.
fn inversions(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        let (lb, rb) = buf.split_at_mut(mid);
        inversions(left, lb) + inversions(right, rb)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

fn tie_groups(values: &[f64]) -> Vec<i64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push((j - i) as i64);
        i = j;
    }
    groups
}

/// Exact null distribution of S for untied data: S = total - 2 * inversions,
/// and inversions of a random permutation follow the Mahonian distribution.
fn exact_untied_p(n: usize, s: i64) -> f64 {
    let max_inv = n * (n - 1) / 2;
    let mut dist = vec![0.0f64; max_inv + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for m in 2..=n {
        // inserting the m-th element adds 0..m-1 inversions, uniformly
        let new_reach = reach + m - 1;
        let mut next = vec![0.0f64; max_inv + 1];
        let mut window = 0.0;
        for inv in 0..=new_reach {
            if inv <= reach {
                window += dist[inv];
            }
            if inv >= m && inv - m <= reach {
                window -= dist[inv - m];
            }
            next[inv] = window / m as f64;
        }
        dist = next;
        reach = new_reach;
    }
    let total = max_inv as i64;
    let threshold = s.abs() as f64 - EXTREME_EPS;
    dist.iter()
        .enumerate()
        .filter(|(inv, _)| ((total - 2 * *inv as i64).abs() as f64) >= threshold)
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

fn s_direct(x: &[f64], y: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            if x[i] != x[j] && y[i] != y[j] {
                s += dx * dy;
            }
        }
    }
    s
}

/// Rearranges `v` into the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [f64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Permutation p-value conditional on the observed tie pattern: every distinct
/// arrangement of the y multiset against fixed x is equally likely.
fn exact_permutation_p(x: &[f64], y: &[f64], s: i64) -> f64 {
    let mut perm = y.to_vec();
    perm.sort_by(f64::total_cmp);
    let threshold = s.abs() as f64 - EXTREME_EPS;
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        total += 1;
        if (s_direct(x, &perm).abs() as f64) >= threshold {
            hits += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    hits as f64 / total as f64
}

fn normal_p(x: &[f64], y: &[f64], s: i64) -> f64 {
    let n = x.len() as f64;
    let tx = tie_groups(x);
    let ty = tie_groups(y);
    let sum = |g: &[i64], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(&tx, &|t| t * (t - 1.0)) * sum(&ty, &|t| t * (t - 1.0)) / (2.0 * n * (n - 1.0));
    let v2 = sum(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ty, &|t| t * (t - 1.0) * (t - 2.0))
        / (9.0 * n * (n - 1.0) * (n - 2.0));
    let var = (v0 - vt - vu) / 18.0 + v1 + if n > 2.0 { v2 } else { 0.0 };
    if var <= 0.0 {
        return 1.0;
    }
    normal_two_sided(s as f64 / var.sqrt())
}

/// Kendall's tau-b with a two-sided p-value.
///
/// Untied inputs up to `kendall_exact_max` use the exact distribution; tied
/// inputs up to `kendall_permutation_max` are permuted exhaustively; anything
/// larger uses the tie-corrected normal approximation.
pub fn kendall_tau(x: &[f64], y: &[f64], config: &StatsConfig) -> Result<StatResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: x.len() });
    }
    check_finite(x)?;
    check_finite(y)?;
    let counts = pair_counts(x, y);
    if counts.tied_x == counts.total || counts.tied_y == counts.total {
        return Err(StatsError::ConstantInput);
    }
    let denom = (((counts.total - counts.tied_x) as f64) * ((counts.total - counts.tied_y) as f64)).sqrt();
    let tau = (counts.s as f64 / denom).clamp(-1.0, 1.0);

    let n = x.len();
    let untied = counts.tied_x == 0 && counts.tied_y == 0;
    let p = if untied && n <= config.kendall_exact_max {
        exact_untied_p(n, counts.s)
    } else if !untied && n <= config.kendall_permutation_max {
        exact_permutation_p(x, y, counts.s)
    } else {
        normal_p(x, y, counts.s)
    };
    Ok(StatResult { statistic: tau, p_value: Some(p), effect_size: None, effect_class: None })
}
