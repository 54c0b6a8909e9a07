//! Merge candidates: call chains of small single-caller methods, compared
//! against individual large methods of matching size.

mod callgraph;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::history::{Indicator, IndicatorTotals};
use crate::stats::{compare_samples, EffectClass, StatResult, StatsConfig};

pub use callgraph::{build_call_graph, CallDiagnostics, CallGraph, CallIssue};

pub const DEFAULT_SIZE_LIMIT: usize = 24;

/// Size and indicator totals of one method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MethodStats {
    pub sloc: usize,
    pub totals: IndicatorTotals,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeCandidate {
    /// Root first.
    pub member_ids: Vec<String>,
    pub total_sloc: usize,
    pub totals: IndicatorTotals,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndividualMethod {
    pub method_id: String,
    pub sloc: usize,
    pub totals: IndicatorTotals,
    pub selected: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeEnumeration {
    pub candidates: Vec<MergeCandidate>,
    /// Call cycles met while extending chains, each rotated to start at its smallest id.
    pub cycles: Vec<Vec<String>>,
}

/// Every chain `M0 -> M1 -> ... -> Mk` (k >= 1) where each `Mi` with i >= 1
/// has exactly one caller, and every member is at most `limit` SLOC. All
/// prefixes of a chain are candidates too. Methods without stats are skipped.
pub fn enumerate_merge_candidates(graph: &CallGraph, stats: &BTreeMap<String, MethodStats>, limit: usize) -> MergeEnumeration {
    let in_degrees = graph.in_degrees();
    let small = |id: &str| stats.get(id).is_some_and(|s| s.sloc <= limit);
    let mut candidates = Vec::new();
    let mut cycles = BTreeSet::new();

    fn extend(
        path: &mut Vec<String>,
        graph: &CallGraph,
        in_degrees: &BTreeMap<&str, usize>,
        small: &dyn Fn(&str) -> bool,
        stats: &BTreeMap<String, MethodStats>,
        candidates: &mut Vec<MergeCandidate>,
        cycles: &mut BTreeSet<Vec<String>>,
    ) {
        let last = path.last().expect("chains start non-empty").clone();
        for callee in graph.callees(&last) {
            if in_degrees.get(callee).copied() != Some(1) || !small(callee) {
                continue;
            }
            if let Some(pos) = path.iter().position(|m| m == callee) {
                let mut cycle = path[pos..].to_vec();
                let min = cycle.iter().enumerate().min_by_key(|(_, m)| m.as_str()).map(|(i, _)| i).unwrap_or(0);
                cycle.rotate_left(min);
                cycles.insert(cycle);
                continue;
            }
            path.push(callee.to_string());
            let members: Vec<&MethodStats> = path.iter().map(|m| &stats[m]).collect();
            candidates.push(MergeCandidate {
                member_ids: path.clone(),
                total_sloc: members.iter().map(|s| s.sloc).sum(),
                totals: members.iter().map(|s| s.totals).sum(),
                selected: false,
            });
            extend(path, graph, in_degrees, small, stats, candidates, cycles);
            path.pop();
        }
    }

    for root in graph.nodes.iter().filter(|n| small(n)) {
        let mut path = vec![root.clone()];
        extend(&mut path, graph, &in_degrees, &small, stats, &mut candidates, &mut cycles);
    }
    MergeEnumeration { candidates, cycles: cycles.into_iter().collect() }
}

/// Methods strictly larger than `limit`, in id order.
pub fn individuals_above(stats: &BTreeMap<String, MethodStats>, limit: usize) -> Vec<IndividualMethod> {
    stats
        .iter()
        .filter(|(_, s)| s.sloc > limit)
        .map(|(id, s)| IndividualMethod { method_id: id.clone(), sloc: s.sloc, totals: s.totals, selected: false })
        .collect()
}

/// Selects the entries whose SLOC also occurs in the other group.
pub fn sloc_match_filter(individuals: &mut [IndividualMethod], merged: &mut [MergeCandidate]) {
    let ind: BTreeSet<usize> = individuals.iter().map(|m| m.sloc).collect();
    let mer: BTreeSet<usize> = merged.iter().map(|m| m.total_sloc).collect();
    for m in individuals.iter_mut() {
        m.selected = mer.contains(&m.sloc);
    }
    for m in merged.iter_mut() {
        m.selected = ind.contains(&m.total_sloc);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    MergedLower,
    IndividualLower,
    NoDifference,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::MergedLower => "merged lower",
            Direction::IndividualLower => "individual lower",
            Direction::NoDifference => "no difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub indicator: Indicator,
    pub individual: Vec<u64>,
    pub merged: Vec<u64>,
    /// `None` when either side has fewer than two selected entries.
    pub result: Option<StatResult>,
    pub direction: Option<Direction>,
}

impl GroupComparison {
    pub fn status(&self) -> &'static str {
        if self.result.is_some() {
            "ok"
        } else {
            "insufficient samples"
        }
    }

    pub fn effect_class(&self) -> Option<EffectClass> {
        self.result.as_ref().and_then(|r| r.effect_class)
    }
}

/// Rank-sum test and Cliff's delta of individual versus merged, on selected entries only.
pub fn compare_groups(
    individuals: &[IndividualMethod],
    merged: &[MergeCandidate],
    indicator: Indicator,
    config: &StatsConfig,
) -> GroupComparison {
    let individual: Vec<u64> = individuals.iter().filter(|m| m.selected).map(|m| m.totals.get(indicator)).collect();
    let merged: Vec<u64> = merged.iter().filter(|m| m.selected).map(|m| m.totals.get(indicator)).collect();
    let mut out = GroupComparison { indicator, individual, merged, result: None, direction: None };
    if out.individual.len() < 2 || out.merged.len() < 2 {
        return out;
    }
    let a: Vec<f64> = out.individual.iter().map(|&v| v as f64).collect();
    let b: Vec<f64> = out.merged.iter().map(|&v| v as f64).collect();
    let result = compare_samples(&a, &b, config).expect("both samples non-empty and finite");
    let delta = result.effect_size.unwrap_or(0.0);
    out.direction = Some(if delta > 0.0 {
        Direction::MergedLower
    } else if delta < 0.0 {
        Direction::IndividualLower
    } else {
        Direction::NoDifference
    });
    out.result = Some(result);
    out
}
