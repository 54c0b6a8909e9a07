//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};

use maintlens::decomposition::{
    enumerate_merge_candidates, individuals_above, sloc_match_filter, CallGraph, MethodStats, DEFAULT_SIZE_LIMIT,
};
use maintlens::extractor::SlocMode;
use maintlens::history::{
    compute_indicators, levenshtein, normalize_age, versionize, versions_from_snapshots, IndicatorTotals, MethodHistory,
    Revision, TraceOptions, Tracer,
};
use maintlens::extractor::compute_sloc;
use maintlens::pipeline;
use maintlens::stats::{cliffs_delta, kendall_tau, rank_sum_test, signed_rank_test, EffectClass, StatsConfig, StatsError};
use maintlens::thresholds::{categorize, derive_thresholds, SizeCategory, SizeThresholds, ThresholdInput, DEFAULT_PERCENTILES};

use common::*;

const STAT_TOL: f64 = 1e-9;
const EXACT_P_TOL: f64 = 1e-6;
const AXIS_TOL: f64 = 1e-9;

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// 1 -----------------------------------------------------------------------

fn threshold_worked_example() -> Result<(), String> {
    let input = ThresholdInput { projects: vec![vec![10, 20, 10], vec![20, 10, 20]] };
    let d = derive_thresholds(&input, DEFAULT_PERCENTILES).map_err(|e| e.to_string())?;
    let want_norms = [vec![0.25, 0.25], vec![0.4, 0.1]];
    ensure(d.list_norms.len() == 2, || format!("list_norms {:?}", d.list_norms))?;
    for (got, want) in d.list_norms.iter().zip(&want_norms) {
        ensure(got.len() == want.len() && got.iter().zip(want).all(|(g, w)| close(*g, *w, AXIS_TOL)), || {
            format!("list_norms {:?}, expected {want_norms:?}", d.list_norms)
        })?;
    }
    ensure(d.x_axis == vec![10, 20], || format!("x_axis {:?}", d.x_axis))?;
    ensure(d.y_axis.len() == 2 && close(d.y_axis[0], 0.35, AXIS_TOL) && close(d.y_axis[1], 0.65, AXIS_TOL), || {
        format!("y_axis {:?}", d.y_axis)
    })
}

// 2 -----------------------------------------------------------------------

fn size_categorization() -> Result<(), String> {
    let t = SizeThresholds::new(24, 36, 63).map_err(|e| e.to_string())?;
    let expected = [
        (24, SizeCategory::Small),
        (25, SizeCategory::Medium),
        (36, SizeCategory::Medium),
        (37, SizeCategory::Large),
        (63, SizeCategory::Large),
        (64, SizeCategory::VeryLarge),
    ];
    for (sloc, want) in expected {
        let got = categorize(sloc, &t);
        ensure(got == want, || format!("sloc {sloc}: got {got}, expected {want}"))?;
    }
    Ok(())
}

// 3 -----------------------------------------------------------------------

fn merge_example_reproduction() -> Result<(), String> {
    let graph = CallGraph::from_edges(
        ["M1", "M2", "M3"],
        [("M4", "M5"), ("M5", "M6"), ("M5", "M7"), ("M7", "M9"), ("M6", "M8"), ("M9", "M8")],
    );
    let revisions = |n| IndicatorTotals { n_revisions: n, ..IndicatorTotals::default() };
    let stats: BTreeMap<String, MethodStats> = [
        ("M1", 40, 3),
        ("M2", 36, 4),
        ("M3", 28, 1),
        ("M4", 80, 3),
        ("M5", 20, 1),
        ("M6", 20, 1),
        ("M7", 8, 0),
        ("M8", 12, 2),
        ("M9", 8, 0),
    ]
    .into_iter()
    .map(|(id, sloc, rev)| (id.to_string(), MethodStats { sloc, totals: revisions(rev) }))
    .collect();

    let found = enumerate_merge_candidates(&graph, &stats, DEFAULT_SIZE_LIMIT);
    let mut merged = found.candidates;
    let mut individuals = individuals_above(&stats, DEFAULT_SIZE_LIMIT);
    sloc_match_filter(&mut individuals, &mut merged);

    let mut got_ind: Vec<(String, usize, u64, bool)> =
        individuals.iter().map(|m| (m.method_id.clone(), m.sloc, m.totals.n_revisions, m.selected)).collect();
    got_ind.sort();
    let want_ind = vec![
        ("M1".to_string(), 40, 3, true),
        ("M2".to_string(), 36, 4, true),
        ("M3".to_string(), 28, 1, true),
        ("M4".to_string(), 80, 3, false),
    ];
    ensure(got_ind == want_ind, || format!("individual rows {got_ind:?}"))?;

    let mut got_merged: Vec<(String, usize, u64, bool)> =
        merged.iter().map(|m| (m.member_ids.join(", "), m.total_sloc, m.totals.n_revisions, m.selected)).collect();
    got_merged.sort();
    let want_merged = vec![
        ("M5, M6".to_string(), 40, 2, true),
        ("M5, M7".to_string(), 28, 1, true),
        ("M5, M7, M9".to_string(), 36, 1, true),
        ("M7, M9".to_string(), 16, 0, false),
    ];
    ensure(got_merged == want_merged, || format!("merged rows {got_merged:?}"))?;
    ensure(found.cycles.is_empty(), || format!("unexpected cycles {:?}", found.cycles))
}

// 4 -----------------------------------------------------------------------

fn versioning_example() -> Result<(), String> {
    let revs: Vec<Revision> = (1..=4)
        .map(|i| Revision {
            commit_id: format!("c{i}"),
            timestamp: i,
            lines_added: 1,
            lines_deleted: 0,
            diff_size: 1,
            edit_distance: 1,
            is_bugfix: false,
            body_after: None,
        })
        .collect();
    let versions = versions_from_snapshots(&[20, 50, 50, 50, 22], &revs);
    let got: Vec<(usize, u64)> = versions.iter().map(|v| (v.sloc, v.n_revisions)).collect();
    ensure(got == vec![(20, 1), (50, 3), (22, 0)], || format!("versions {got:?}"))
}

// 5 -----------------------------------------------------------------------

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn oracle_s(x: &[f64], y: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
        }
    }
    s
}

/// Heap's algorithm over every ordering (duplicates included).
fn for_each_permutation(v: &mut [f64], f: &mut dyn FnMut(&[f64])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    f(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            f(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn kendall_oracle(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    let n0 = (n * (n - 1) / 2) as f64;
    let (mut tx, mut ty) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            if x[i] == x[j] {
                tx += 1.0;
            }
            if y[i] == y[j] {
                ty += 1.0;
            }
        }
    }
    if tx == n0 || ty == n0 {
        return None;
    }
    let s = oracle_s(x, y);
    let tau = s as f64 / ((n0 - tx) * (n0 - ty)).sqrt();
    let (mut hits, mut total) = (0u64, 0u64);
    let mut perm = y.to_vec();
    for_each_permutation(&mut perm, &mut |p| {
        total += 1;
        if oracle_s(x, p).abs() >= s.abs() {
            hits += 1;
        }
    });
    Some((tau, hits as f64 / total as f64))
}

fn oracle_midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn tie_term(v: &[f64]) -> f64 {
    let mut seen: Vec<f64> = Vec::new();
    let mut term = 0.0;
    for &x in v {
        if !seen.contains(&x) {
            seen.push(x);
            let t = v.iter().filter(|&&y| y == x).count() as f64;
            term += t * t * t - t;
        }
    }
    term
}

fn normal_two_sided(z: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::new(0.0, 1.0).unwrap();
    2.0 * (1.0 - n.cdf(z.abs()))
}

/// (U from pair dominance, p by enumerating every split when small, else the
/// tie-corrected normal approximation with continuity correction).
fn rank_sum_oracle(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut u = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = oracle_midranks(&pooled);
    let (na, n) = (a.len(), pooled.len());
    let w: f64 = ranks[..na].iter().sum();
    let mean = na as f64 * (n as f64 + 1.0) / 2.0;
    let p = if n <= 12 {
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            total += 1;
            let wm: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if (wm - mean).abs() >= (w - mean).abs() - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    } else {
        let (naf, nbf, nf) = (na as f64, b.len() as f64, n as f64);
        let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term(&pooled) / (nf * (nf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            normal_two_sided(((w - mean).abs() - 0.5).max(0.0) / var.sqrt())
        }
    };
    (u, p)
}

fn signed_rank_oracle(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    let d: Vec<f64> = pairs.iter().map(|(b, a)| b - a).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return None;
    }
    let ranks = oracle_midranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let m = d.len();
    let mean = m as f64 * (m as f64 + 1.0) / 4.0;
    let mut hits = 0u64;
    for mask in 0u32..(1 << m) {
        let w: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (w - mean).abs() >= (w_plus - mean).abs() - 1e-9 {
            hits += 1;
        }
    }
    Some((w_plus, hits as f64 / (1u64 << m) as f64))
}

fn cliff_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0i64;
    for &x in a {
        for &y in b {
            d += sign(x - y);
        }
    }
    d as f64 / (a.len() * b.len()) as f64
}

fn random_sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        (0..n).map(|_| rng.gen_range(0..5) as f64).collect()
    } else {
        (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect()
    }
}

fn statistics_oracles() -> Result<(), String> {
    let cfg = StatsConfig::default();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0005);
    for instance in 0..200 {
        // Kendall
        let n = rng.gen_range(2..=8);
        let x = random_sample(&mut rng, n);
        let y = random_sample(&mut rng, n);
        match (kendall_tau(&x, &y, &cfg), kendall_oracle(&x, &y)) {
            (Ok(r), Some((tau, p))) => {
                ensure(close(r.statistic, tau, STAT_TOL), || format!("#{instance} kendall tau {} vs {tau} on {x:?} {y:?}", r.statistic))?;
                let got = r.p_value.unwrap_or(f64::NAN);
                ensure(close(got, p, EXACT_P_TOL), || format!("#{instance} kendall p {got} vs {p} on {x:?} {y:?}"))?;
            }
            (Err(StatsError::ConstantInput), None) => {}
            (got, want) => return Err(format!("#{instance} kendall disagreement {got:?} vs {want:?}")),
        }

        // rank-sum
        let (na, nb) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_sample(&mut rng, na);
        let b = random_sample(&mut rng, nb);
        let r = rank_sum_test(&a, &b, &cfg).map_err(|e| format!("#{instance} rank-sum: {e}"))?;
        let (u, p) = rank_sum_oracle(&a, &b);
        ensure(close(r.statistic, u, STAT_TOL), || format!("#{instance} rank-sum U {} vs {u}", r.statistic))?;
        let tol = if na + nb <= 12 { EXACT_P_TOL } else { STAT_TOL };
        let got = r.p_value.unwrap_or(f64::NAN);
        ensure(close(got, p, tol), || format!("#{instance} rank-sum p {got} vs {p} on {a:?} {b:?}"))?;
        let swapped = rank_sum_test(&b, &a, &cfg).map_err(|e| e.to_string())?;
        ensure(close(swapped.p_value.unwrap_or(f64::NAN), got, 1e-12), || format!("#{instance} rank-sum asymmetric p"))?;

        // signed-rank
        let m = rng.gen_range(1..=8);
        let before = random_sample(&mut rng, m);
        let after: Vec<f64> = before.iter().map(|v| if rng.gen_bool(0.2) { *v } else { v + rng.gen_range(-3..=3) as f64 }).collect();
        let pairs: Vec<(f64, f64)> = before.into_iter().zip(after).collect();
        match (signed_rank_test(&pairs, &cfg), signed_rank_oracle(&pairs)) {
            (Ok(r), Some((w, p))) => {
                ensure(close(r.statistic, w, STAT_TOL), || format!("#{instance} signed-rank W+ {} vs {w}", r.statistic))?;
                let got = r.p_value.unwrap_or(f64::NAN);
                ensure(close(got, p, EXACT_P_TOL), || format!("#{instance} signed-rank p {got} vs {p} on {pairs:?}"))?;
            }
            (Err(StatsError::Degenerate), None) => {}
            (got, want) => return Err(format!("#{instance} signed-rank disagreement {got:?} vs {want:?}")),
        }

        // Cliff's delta
        let r = cliffs_delta(&a, &b).map_err(|e| e.to_string())?;
        let delta = cliff_oracle(&a, &b);
        ensure(close(r.statistic, delta, STAT_TOL), || format!("#{instance} cliff {} vs {delta}", r.statistic))?;
        ensure(r.effect_class == Some(EffectClass::from_delta(delta)), || format!("#{instance} cliff class"))?;
    }

    // class boundaries, lower bound inclusive, reached by real samples
    for (count, below, at) in [
        (147, EffectClass::Negligible, EffectClass::Small),
        (330, EffectClass::Small, EffectClass::Medium),
        (474, EffectClass::Medium, EffectClass::Large),
    ] {
        let sample = |k: usize| -> Vec<f64> { (0..1000).map(|i| if i < k { 0.0 } else { 1.0 }).collect() };
        let exact = cliffs_delta(&[1.0], &sample(count)).map_err(|e| e.to_string())?;
        ensure(exact.effect_size == Some(count as f64 / 1000.0) && exact.effect_class == Some(at), || {
            format!("delta {:?} classified {:?}, expected {at:?}", exact.effect_size, exact.effect_class)
        })?;
        let under = cliffs_delta(&[1.0], &sample(count - 1)).map_err(|e| e.to_string())?;
        ensure(under.effect_class == Some(below), || format!("delta {:?} classified {:?}, expected {below:?}", under.effect_size, under.effect_class))?;
        let negative = cliffs_delta(&sample(count), &[1.0]).map_err(|e| e.to_string())?;
        ensure(negative.effect_class == Some(at), || format!("negative delta {:?} classified {:?}", negative.effect_size, negative.effect_class))?;
    }
    Ok(())
}

// 6 -----------------------------------------------------------------------

fn levenshtein_oracle(a: &str, b: &str) -> u64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut dp = vec![vec![0u64; b.len() + 1]; a.len() + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i as u64;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j as u64;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = dp[i - 1][j - 1] + u64::from(a[i - 1] != b[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }
    dp[a.len()][b.len()]
}

fn random_string(rng: &mut impl Rng) -> String {
    const ALPHABET: [char; 6] = ['a', 'b', 'c', ' ', '{', 'é'];
    let len = rng.gen_range(0..12);
    (0..len).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect()
}

fn edit_distance_properties() -> Result<(), String> {
    ensure(levenshtein("kitten", "sitting") == 3, || "kitten/sitting".into())?;
    ensure(levenshtein_oracle("kitten", "sitting") == 3, || "oracle kitten/sitting".into())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0006);
    for i in 0..1000 {
        let (a, b, c) = (random_string(&mut rng), random_string(&mut rng), random_string(&mut rng));
        let ab = levenshtein(&a, &b);
        ensure(ab == levenshtein_oracle(&a, &b), || format!("#{i} {a:?} {b:?}: {ab} vs oracle"))?;
        ensure(levenshtein(&a, &a) == 0, || format!("#{i} identity {a:?}"))?;
        ensure((ab == 0) == (a == b), || format!("#{i} zero iff equal {a:?} {b:?}"))?;
        ensure(ab == levenshtein(&b, &a), || format!("#{i} symmetry {a:?} {b:?}"))?;
        let (ac, bc) = (levenshtein(&a, &c), levenshtein(&b, &c));
        ensure(ac <= ab + bc, || format!("#{i} triangle {a:?} {b:?} {c:?}"))?;
        let (la, lb) = (a.chars().count() as u64, b.chars().count() as u64);
        ensure(la.abs_diff(lb) <= ab && ab <= la.max(lb), || format!("#{i} bounds {a:?} {b:?}"))?;
    }
    Ok(())
}

// 7 -----------------------------------------------------------------------

fn trace_fixture() -> Result<(FixtureRepo, Vec<maintlens::extractor::MethodRecord>, Vec<MethodHistory>), String> {
    let fixture = build_fixture_repo();
    let records = fixture_records();
    let tracer = Tracer::open(&fixture.path(), "HEAD", TraceOptions::default()).map_err(|e| e.to_string())?;
    let histories = records.iter().map(|r| tracer.trace(r)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    Ok((fixture, records, histories))
}

fn end_to_end_repository() -> Result<(), String> {
    let (fixture, records, histories) = trace_fixture()?;
    let names: Vec<&str> = records.iter().map(|r| r.name.as_str()).collect();
    ensure(names == vec!["add", "scale", "fresh", "trim"], || format!("methods {names:?}"))?;
    let history_of = |name: &str| &histories[records.iter().position(|r| r.name == name).unwrap()];

    let raw: Vec<(&str, usize)> = names.iter().map(|n| (*n, history_of(n).revisions.len())).collect();
    ensure(raw == vec![("add", 1), ("scale", 2), ("fresh", 1), ("trim", 1)], || format!("raw revision counts {raw:?}"))?;

    let trim = history_of("trim");
    ensure(!trim.truncated, || "rename not bridged".into())?;
    ensure(trim.birth_commit == fixture.commits[0].to_string(), || format!("trim born at {}", trim.birth_commit))?;
    ensure(trim.revisions[0].commit_id == fixture.commits[4].to_string(), || "trim revision is not the bug fix".into())?;

    let totals = |lines: (u64, u64), ed: u64, bugs: u64| IndicatorTotals {
        n_revisions: 1,
        n_additions_sum: lines.0,
        diff_size_sum: lines.0 + lines.1,
        edit_distance_sum: ed,
        n_buggy_commits: bugs,
    };
    let expected: BTreeMap<&str, Option<IndicatorTotals>> = [
        ("add", Some(totals((1, 1), 55, 1))),
        ("scale", Some(totals((2, 0), 37, 0))),
        ("fresh", None),
        ("trim", Some(totals((1, 1), 17, 1))),
    ]
    .into_iter()
    .collect();
    for (name, want) in expected {
        let got = normalize_age(history_of(name), 2.0).map(|h| compute_indicators(&h));
        ensure(got == want, || format!("{name}: {got:?}, expected {want:?}"))?;
    }

    let parallel = pipeline::trace_histories(&fixture.path(), "HEAD", &records, &TraceOptions::default()).map_err(|e| e.to_string())?;
    ensure(parallel == histories, || "batch tracing differs from single tracing".into())
}

// 8 -----------------------------------------------------------------------

fn conservation_on_fixtures() -> Result<(), String> {
    let sloc_of = |body: &str| compute_sloc(body, SlocMode::Standard).expect("fixture bodies lex");
    let (_fixture, _records, histories) = trace_fixture()?;
    let mut checked = 0;
    for h in &histories {
        for window in [None, Some(2.0), Some(1.0)] {
            let h = match window {
                None => h.clone(),
                Some(w) => match normalize_age(h, w) {
                    Some(n) => n,
                    None => continue,
                },
            };
            let versions = versionize(&h, sloc_of).map_err(|e| e.to_string())?;
            ensure(IndicatorTotals::from_versions(&versions) == compute_indicators(&h), || format!("git fixture {}", h.method_id))?;
            checked += 1;
        }
    }
    let (records, histories) = synthetic_corpus();
    let config = pipeline::PipelineConfig::default();
    let (observed, _) = pipeline::join_and_normalize(&records, &histories, config.window_years, true);
    for m in observed.values().flatten() {
        let versions = pipeline::method_versions(m, SlocMode::Standard);
        ensure(IndicatorTotals::from_versions(&versions) == compute_indicators(&m.history), || format!("synthetic {}", m.record.method_id))?;
        checked += 1;
    }
    let revs: Vec<Revision> = (1..=4)
        .map(|i| Revision { commit_id: format!("c{i}"), timestamp: i, lines_added: i as u64, lines_deleted: 1, diff_size: i as u64 + 1, edit_distance: 7, is_bugfix: i % 2 == 0, body_after: None })
        .collect();
    let h = MethodHistory { method_id: "v".into(), birth_commit: "c0".into(), birth_timestamp: 0, end_of_observation: 10, revisions: revs, truncated: false, birth_body: None };
    let versions = versions_from_snapshots(&[20, 50, 50, 50, 22], &h.revisions);
    ensure(IndicatorTotals::from_versions(&versions) == compute_indicators(&h), || "versioning fixture".into())?;
    ensure(checked > 100, || format!("only {checked} histories checked"))
}

// 9 -----------------------------------------------------------------------

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_maintlens"));
    cmd.env_remove(pipeline::CONFIG_ENV);
    cmd
}

fn run(cmd: &mut Command) -> Result<(), String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{cmd:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn directional_sanity() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = synthetic_fixture_dir();
    let correlations = dir.path().join("correlations.csv");
    run(binary()
        .args(["analyze", "--thresholds", "fixed:24,36,63", "--records"])
        .arg(corpus.join("records.jsonl"))
        .arg("--histories")
        .arg(corpus.join("histories.jsonl"))
        .arg("--correlations")
        .arg(&correlations)
        .arg("--comparisons")
        .arg(dir.path().join("comparisons.csv")))?;
    let mut reader = csv::Reader::from_path(&correlations).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for row in reader.deserialize::<pipeline::ReportRow>() {
        let row = row.map_err(|e| e.to_string())?;
        if row.indicator != "revisions" {
            continue;
        }
        let tau = row.statistic.ok_or_else(|| format!("{}: no tau ({})", row.project_id, row.status))?;
        ensure(tau > 0.0, || format!("{}: tau {tau} not positive", row.project_id))?;
        seen.push(row.project_id);
    }
    ensure(seen == SYNTHETIC_PROJECTS.to_vec(), || format!("projects with correlations {seen:?}"))
}

// 10 ----------------------------------------------------------------------

fn full_pipeline(repo: &Path, out: &Path, threads: &str) -> Result<(), String> {
    let p = |name: &str| out.join(name);
    let step = |args: &[&str], paths: &[(&str, &Path)]| -> Result<(), String> {
        let mut cmd = binary();
        cmd.env("RAYON_NUM_THREADS", threads).args(args);
        for (flag, path) in paths {
            cmd.arg(flag).arg(path);
        }
        run(&mut cmd)
    };
    step(&["extract", "--snapshot", "HEAD", "--project", "demo"], &[("--repo", repo), ("--out", &p("records.jsonl"))])?;
    step(&["metrics"], &[("--records", &p("records.jsonl")), ("--out", &p("with_metrics.jsonl")), ("--csv", &p("metrics.csv"))])?;
    step(&["history", "--snapshot", "HEAD"], &[("--records", &p("records.jsonl")), ("--repo", repo), ("--out", &p("histories.jsonl"))])?;
    step(&["thresholds"], &[("--records", &p("with_metrics.jsonl")), ("--out", &p("thresholds.json")), ("--categories", &p("categories.csv"))])?;
    step(
        &["analyze", "--window-years", "1"],
        &[
            ("--records", &p("with_metrics.jsonl")),
            ("--histories", &p("histories.jsonl")),
            ("--thresholds-file", &p("thresholds.json")),
            ("--correlations", &p("correlations.csv")),
            ("--comparisons", &p("comparisons.csv")),
        ],
    )?;
    step(
        &["decompose", "--window-years", "1", "--size-limit", "4"],
        &[
            ("--records", &p("with_metrics.jsonl")),
            ("--histories", &p("histories.jsonl")),
            ("--candidates", &p("candidates.jsonl")),
            ("--individuals", &p("individuals.jsonl")),
            ("--comparisons", &p("groups.csv")),
        ],
    )?;
    step(&["report"], &[("--input", &p("comparisons.csv")), ("--out", &p("summary.csv"))])?;
    step(&["report", "--format", "json"], &[("--input", &p("correlations.csv")), ("--out", &p("correlation_summary.jsonl"))])
}

fn determinism() -> Result<(), String> {
    let fixture = build_fixture_repo();
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    full_pipeline(&fixture.path(), first.path(), "1")?;
    full_pipeline(&fixture.path(), second.path(), "4")?;
    let mut names: Vec<String> = std::fs::read_dir(first.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    ensure(names.len() == 13, || format!("outputs {names:?}"))?;
    for name in &names {
        let a = std::fs::read(first.path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(second.path().join(name)).map_err(|e| e.to_string())?;
        let may_be_empty = matches!(name.as_str(), "candidates.jsonl" | "individuals.jsonl");
        ensure(may_be_empty || !a.is_empty(), || format!("{name} is empty"))?;
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(u32, &str, Check, Option<Duration>); 10] = [
        (1, "threshold derivation worked example", threshold_worked_example, Some(Duration::from_secs(1))),
        (2, "size table categorization", size_categorization, Some(Duration::from_secs(1))),
        (3, "merge example reproduction", merge_example_reproduction, Some(Duration::from_secs(1))),
        (4, "versioning example", versioning_example, Some(Duration::from_secs(1))),
        (5, "statistics oracle equivalence", statistics_oracles, Some(Duration::from_secs(30))),
        (6, "edit distance properties", edit_distance_properties, Some(Duration::from_secs(10))),
        (7, "end-to-end synthetic repository", end_to_end_repository, Some(Duration::from_secs(20))),
        (8, "conservation invariant", conservation_on_fixtures, None),
        (9, "directional sanity", directional_sanity, Some(Duration::from_secs(30))),
        (10, "determinism", determinism, None),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(()), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(()) => println!("criterion {id:>2} PASS  {name} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
