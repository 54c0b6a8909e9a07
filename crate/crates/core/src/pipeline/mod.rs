//! Stage functions behind the command line. Every stage reads and writes
//! plain data so that each can be fed hand-built fixtures.

mod config;
mod io;
mod report;

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    build_call_graph, compare_groups, enumerate_merge_candidates, individuals_above, sloc_match_filter, CallDiagnostics,
    GroupComparison, IndividualMethod, MergeCandidate, MethodStats,
};
use crate::extractor::{compute_sloc, extract_methods, MethodRecord, SlocMode};
use crate::history::{
    compute_indicators, normalize_age, versionize, HistoryError, Indicator, IndicatorTotals, MethodHistory, MethodVersion,
    TraceOptions, Tracer,
};
use crate::metrics::{annotate, MetricOptions};
use crate::stats::{compare_samples, kendall_tau, StatsConfig, StatsError};
use crate::thresholds::{categorize, derive_thresholds, SizeCategory, SizeThresholds, ThresholdInput, DEFAULT_PERCENTILES};

pub use config::{OutputFormat, PipelineConfig, ProjectConfig, CONFIG_ENV};
pub use io::{read_jsonl, to_jsonl, write_output};
pub use report::{emit_report, emit_summary, read_report, sort_rows, summarize, ReportRow, SummaryRow, SIGNIFICANCE_LEVEL};

/// Records of one project plus the files that could not be parsed.
#[derive(Debug, Default)]
pub struct ExtractOutcome {
    pub records: Vec<MethodRecord>,
    pub failures: Vec<String>,
}

impl ExtractOutcome {
    fn from_files(files: Vec<(String, Result<String, String>)>, project_id: &str, exclude_accessors: bool) -> Self {
        let parsed: Vec<Result<Vec<MethodRecord>, String>> = files
            .into_par_iter()
            .map(|(path, text)| {
                let text = text?;
                extract_methods(&text, &path, project_id).map_err(|e| e.to_string())
            })
            .collect();
        let mut outcome = ExtractOutcome::default();
        for result in parsed {
            match result {
                Ok(records) => outcome.records.extend(records.into_iter().filter(|r| !(exclude_accessors && r.is_accessor))),
                Err(message) => outcome.failures.push(message),
            }
        }
        outcome
    }
}

fn is_java(path: &str) -> bool {
    path.ends_with(".java")
}

/// All `.java` files below `root`, with paths relative to it using `/`.
pub fn extract_source_tree(root: &Path, project_id: &str, exclude_accessors: bool) -> anyhow::Result<ExtractOutcome> {
    if !root.is_dir() {
        bail!("source directory {} does not exist", root.display());
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.with_context(|| format!("walking {}", root.display()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir stays below root");
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if !is_java(&rel) {
            continue;
        }
        let text = std::fs::read(entry.path())
            .map_err(|e| format!("{rel}: {e}"))
            .and_then(|bytes| String::from_utf8(bytes).map_err(|_| format!("{rel}: not valid UTF-8")));
        files.push((rel, text));
    }
    Ok(ExtractOutcome::from_files(files, project_id, exclude_accessors))
}

/// All `.java` files in the tree of `snapshot`.
pub fn extract_git_snapshot(repo: &Path, snapshot: &str, project_id: &str, exclude_accessors: bool) -> anyhow::Result<ExtractOutcome> {
    let repository = git2::Repository::open(repo).with_context(|| format!("opening repository {}", repo.display()))?;
    let commit = repository
        .revparse_single(snapshot)
        .and_then(|o| o.peel_to_commit())
        .with_context(|| format!("resolving snapshot `{snapshot}` in {}", repo.display()))?;
    let tree = commit.tree()?;
    let mut entries = Vec::new();
    tree.walk(git2::TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() == Some(git2::ObjectType::Blob) {
            let path = format!("{dir}{}", entry.name().unwrap_or_default());
            if is_java(&path) {
                entries.push((path, entry.id()));
            }
        }
        git2::TreeWalkResult::Ok
    })?;
    entries.sort();
    let mut files = Vec::with_capacity(entries.len());
    for (path, oid) in entries {
        let blob = repository.find_blob(oid)?;
        let text = String::from_utf8(blob.content().to_vec()).map_err(|_| format!("{path}: not valid UTF-8"));
        files.push((path, text));
    }
    Ok(ExtractOutcome::from_files(files, project_id, exclude_accessors))
}

pub fn extract_project(project: &ProjectConfig, exclude_accessors: bool) -> anyhow::Result<ExtractOutcome> {
    project.validate()?;
    match (&project.src, &project.repo) {
        (Some(src), None) => extract_source_tree(src, &project.id, exclude_accessors),
        (None, Some(repo)) => extract_git_snapshot(repo, project.snapshot.as_deref().unwrap_or("HEAD"), &project.id, exclude_accessors),
        _ => unreachable!("validated above"),
    }
}

/// Adds metrics to every record; returns messages for records that failed.
pub fn annotate_records(records: &mut [MethodRecord], options: &MetricOptions) -> Vec<String> {
    let failures: Vec<Option<String>> = records
        .par_iter_mut()
        .map(|r| annotate(r, options).err().map(|e| format!("{} {}:{}: {e}", r.method_id, r.file_path, r.start_line)))
        .collect();
    failures.into_iter().flatten().collect()
}

const TRACE_CHUNK: usize = 32;

/// Traces every record through `repo`. Output follows the record order.
pub fn trace_histories(repo: &Path, snapshot: &str, records: &[MethodRecord], options: &TraceOptions) -> Result<Vec<MethodHistory>, HistoryError> {
    // fail fast on a bad repository or revision before fanning out
    drop(Tracer::open(repo, snapshot, options.clone())?);
    let chunks: Vec<Result<Vec<MethodHistory>, HistoryError>> = records
        .par_chunks(TRACE_CHUNK)
        .map(|chunk| {
            let tracer = Tracer::open(repo, snapshot, options.clone())?;
            chunk.iter().map(|r| tracer.trace(r)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(records.len());
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Groups method SLOCs by project, projects in id order.
pub fn threshold_input(records: &[MethodRecord], mode: SlocMode) -> ThresholdInput {
    let mut by_project: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in records {
        by_project.entry(&r.project_id).or_default().push(r.sloc(mode).max(1));
    }
    ThresholdInput { projects: by_project.into_values().collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub t70: usize,
    pub t80: usize,
    pub t90: usize,
    pub x_axis: Vec<usize>,
    pub y_axis: Vec<f64>,
}

impl ThresholdReport {
    pub fn thresholds(&self) -> SizeThresholds {
        SizeThresholds { t70: self.t70, t80: self.t80, t90: self.t90 }
    }
}

pub fn derive_report(records: &[MethodRecord], mode: SlocMode) -> anyhow::Result<ThresholdReport> {
    let d = derive_thresholds(&threshold_input(records, mode), DEFAULT_PERCENTILES)?;
    Ok(ThresholdReport { t70: d.thresholds.t70, t80: d.thresholds.t80, t90: d.thresholds.t90, x_axis: d.x_axis, y_axis: d.y_axis })
}

pub fn fixed_report(t: SizeThresholds) -> ThresholdReport {
    ThresholdReport { t70: t.t70, t80: t.t80, t90: t.t90, x_axis: Vec::new(), y_axis: Vec::new() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryRow {
    pub project_id: String,
    pub method_id: String,
    pub sloc: usize,
    pub category: SizeCategory,
}

pub fn categorize_records(records: &[MethodRecord], mode: SlocMode, thresholds: &SizeThresholds) -> Vec<CategoryRow> {
    let mut rows: Vec<CategoryRow> = records
        .iter()
        .map(|r| CategoryRow {
            project_id: r.project_id.clone(),
            method_id: r.method_id.clone(),
            sloc: r.sloc(mode),
            category: categorize(r.sloc(mode).max(1), thresholds),
        })
        .collect();
    rows.sort_by(|a, b| (&a.project_id, &a.method_id).cmp(&(&b.project_id, &b.method_id)));
    rows
}

pub fn emit_categories(rows: &[CategoryRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["project_id", "method_id", "sloc", "category"]).expect("in-memory write");
    for r in rows {
        w.write_record([r.project_id.as_str(), &r.method_id, &r.sloc.to_string(), r.category.as_str()]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// A record joined with its age-normalized history.
#[derive(Debug, Clone)]
pub struct ObservedMethod<'a> {
    pub record: &'a MethodRecord,
    pub history: MethodHistory,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct JoinReport {
    pub without_history: usize,
    pub too_young: usize,
    pub accessors: usize,
}

/// Pairs records with histories by method id, drops accessors (when asked)
/// and methods younger than the window, and cuts the rest to the window.
pub fn join_and_normalize<'a>(
    records: &'a [MethodRecord],
    histories: &[MethodHistory],
    window_years: f64,
    exclude_accessors: bool,
) -> (BTreeMap<String, Vec<ObservedMethod<'a>>>, JoinReport) {
    let by_id: BTreeMap<&str, &MethodHistory> = histories.iter().map(|h| (h.method_id.as_str(), h)).collect();
    let mut report = JoinReport::default();
    let mut out: BTreeMap<String, Vec<ObservedMethod<'a>>> = BTreeMap::new();
    for r in records {
        if exclude_accessors && r.is_accessor {
            report.accessors += 1;
            continue;
        }
        let Some(h) = by_id.get(r.method_id.as_str()) else {
            report.without_history += 1;
            continue;
        };
        match normalize_age(h, window_years) {
            Some(history) => out.entry(r.project_id.clone()).or_default().push(ObservedMethod { record: r, history }),
            None => report.too_young += 1,
        }
    }
    (out, report)
}

/// SLOC-stable versions of a method. Histories without method text yield a
/// single version at the record's size.
pub fn method_versions(m: &ObservedMethod<'_>, mode: SlocMode) -> Vec<MethodVersion> {
    let sloc_of = |body: &str| compute_sloc(body, mode).unwrap_or_else(|_| body.lines().count());
    match versionize(&m.history, sloc_of) {
        Ok(v) => v,
        Err(_) => {
            let t = compute_indicators(&m.history);
            vec![MethodVersion {
                sloc: m.record.sloc(mode),
                n_revisions: t.n_revisions,
                n_additions: t.n_additions_sum,
                diff_size_sum: t.diff_size_sum,
                edit_distance_sum: t.edit_distance_sum,
                n_buggy_commits: t.n_buggy_commits,
            }]
        }
    }
}

fn status_of(e: &StatsError) -> &'static str {
    match e {
        StatsError::TooFewSamples { .. } | StatsError::EmptySample => "insufficient samples",
        StatsError::ConstantInput => "constant input",
        StatsError::Degenerate => "degenerate",
        StatsError::NonFinite => "non-finite input",
        StatsError::LengthMismatch(..) => "length mismatch",
    }
}

pub const CATEGORY_PAIRS: [(SizeCategory, SizeCategory); 3] = [
    (SizeCategory::Small, SizeCategory::Medium),
    (SizeCategory::Medium, SizeCategory::Large),
    (SizeCategory::Large, SizeCategory::VeryLarge),
];

/// Kendall's tau between version SLOC and each indicator, per project.
pub fn correlation_rows(versions: &BTreeMap<String, Vec<MethodVersion>>, config: &StatsConfig) -> Vec<ReportRow> {
    let per_project: Vec<Vec<ReportRow>> = versions
        .par_iter()
        .map(|(project, vs)| {
            let x: Vec<f64> = vs.iter().map(|v| v.sloc as f64).collect();
            Indicator::ALL
                .iter()
                .map(|&ind| {
                    let y: Vec<f64> = vs.iter().map(|v| v.get(ind) as f64).collect();
                    let n = (vs.len(), vs.len());
                    match kendall_tau(&x, &y, config) {
                        Ok(res) => ReportRow::from_result(project, "correlation", ind.as_str(), n, &res),
                        Err(e) => ReportRow::skipped(project, "correlation", ind.as_str(), n, status_of(&e)),
                    }
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<ReportRow> = per_project.into_iter().flatten().collect();
    sort_rows(&mut rows);
    rows
}

/// Rank-sum test and Cliff's delta between adjacent size categories, per
/// project and indicator. Each side needs at least two versions.
pub fn category_rows(versions: &BTreeMap<String, Vec<MethodVersion>>, thresholds: &SizeThresholds, config: &StatsConfig) -> Vec<ReportRow> {
    let per_project: Vec<Vec<ReportRow>> = versions
        .par_iter()
        .map(|(project, vs)| {
            let mut rows = Vec::new();
            for (lo, hi) in CATEGORY_PAIRS {
                let grouping = format!("{lo}-{hi}");
                let side = |c: SizeCategory| -> Vec<&MethodVersion> { vs.iter().filter(|v| categorize(v.sloc.max(1), thresholds) == c).collect() };
                let (a, b) = (side(lo), side(hi));
                for ind in Indicator::ALL {
                    let n = (a.len(), b.len());
                    if a.len() < 2 || b.len() < 2 {
                        rows.push(ReportRow::skipped(project, &grouping, ind.as_str(), n, "insufficient samples"));
                        continue;
                    }
                    let xa: Vec<f64> = a.iter().map(|v| v.get(ind) as f64).collect();
                    let xb: Vec<f64> = b.iter().map(|v| v.get(ind) as f64).collect();
                    rows.push(match compare_samples(&xa, &xb, config) {
                        Ok(res) => ReportRow::from_result(project, &grouping, ind.as_str(), n, &res),
                        Err(e) => ReportRow::skipped(project, &grouping, ind.as_str(), n, status_of(&e)),
                    });
                }
            }
            rows
        })
        .collect();
    let mut rows: Vec<ReportRow> = per_project.into_iter().flatten().collect();
    sort_rows(&mut rows);
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub correlations: Vec<ReportRow>,
    pub comparisons: Vec<ReportRow>,
}

pub fn analyze(
    records: &[MethodRecord],
    histories: &[MethodHistory],
    thresholds: &SizeThresholds,
    config: &PipelineConfig,
) -> (Analysis, JoinReport) {
    let (observed, join) = join_and_normalize(records, histories, config.window_years, config.exclude_accessors);
    let versions: BTreeMap<String, Vec<MethodVersion>> = observed
        .iter()
        .map(|(p, ms)| (p.clone(), ms.iter().flat_map(|m| method_versions(m, config.sloc_mode)).collect()))
        .collect();
    let analysis = Analysis {
        correlations: correlation_rows(&versions, &config.stats),
        comparisons: category_rows(&versions, thresholds, &config.stats),
    };
    (analysis, join)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectCandidate {
    pub project_id: String,
    #[serde(flatten)]
    pub candidate: MergeCandidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectIndividual {
    pub project_id: String,
    #[serde(flatten)]
    pub individual: IndividualMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectComparison {
    pub project_id: String,
    #[serde(flatten)]
    pub comparison: GroupComparison,
}

#[derive(Debug, Clone, Default)]
pub struct Decomposition {
    pub candidates: Vec<ProjectCandidate>,
    pub individuals: Vec<ProjectIndividual>,
    pub comparisons: Vec<ProjectComparison>,
    pub diagnostics: BTreeMap<String, CallDiagnostics>,
    pub cycles: BTreeMap<String, Vec<Vec<String>>>,
}

struct ProjectDecomposition {
    project: String,
    merged: Vec<MergeCandidate>,
    individuals: Vec<IndividualMethod>,
    comparisons: Vec<GroupComparison>,
    diagnostics: CallDiagnostics,
    cycles: Vec<Vec<String>>,
}

/// Per project: call graph over all records, indicator totals over the
/// age-normalized histories, merge chains, SLOC matching and comparisons.
pub fn decompose(records: &[MethodRecord], histories: &[MethodHistory], config: &PipelineConfig) -> Decomposition {
    let (observed, _) = join_and_normalize(records, histories, config.window_years, config.exclude_accessors);
    let mut by_project: BTreeMap<&str, Vec<MethodRecord>> = BTreeMap::new();
    for r in records {
        by_project.entry(&r.project_id).or_default().push(r.clone());
    }
    let projects: Vec<ProjectDecomposition> = by_project
        .into_par_iter()
        .map(|(project, recs)| {
            let graph = build_call_graph(&recs);
            let stats: BTreeMap<String, MethodStats> = observed
                .get(project)
                .map(|ms| {
                    ms.iter()
                        .map(|m| {
                            let totals: IndicatorTotals = compute_indicators(&m.history);
                            (m.record.method_id.clone(), MethodStats { sloc: m.record.sloc(config.sloc_mode), totals })
                        })
                        .collect()
                })
                .unwrap_or_default();
            let found = enumerate_merge_candidates(&graph, &stats, config.size_limit);
            let mut merged = found.candidates;
            let mut individuals = individuals_above(&stats, config.size_limit);
            sloc_match_filter(&mut individuals, &mut merged);
            let comparisons = Indicator::ALL.iter().map(|&i| compare_groups(&individuals, &merged, i, &config.stats)).collect();
            ProjectDecomposition { project: project.to_string(), merged, individuals, comparisons, diagnostics: graph.diagnostics, cycles: found.cycles }
        })
        .collect();
    let mut out = Decomposition::default();
    for p in projects {
        let id = p.project;
        out.candidates.extend(p.merged.into_iter().map(|candidate| ProjectCandidate { project_id: id.clone(), candidate }));
        out.individuals.extend(p.individuals.into_iter().map(|individual| ProjectIndividual { project_id: id.clone(), individual }));
        out.comparisons.extend(p.comparisons.into_iter().map(|comparison| ProjectComparison { project_id: id.clone(), comparison }));
        out.diagnostics.insert(id.clone(), p.diagnostics);
        out.cycles.insert(id, p.cycles);
    }
    out
}

pub fn emit_group_comparisons(rows: &[ProjectComparison], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => to_jsonl(rows),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["project", "indicator", "n_individual", "n_merged", "p_value", "delta", "class", "direction"])
                .expect("in-memory write");
            for r in rows {
                let c = &r.comparison;
                let result = c.result.as_ref();
                w.write_record([
                    r.project_id.as_str(),
                    c.indicator.as_str(),
                    &c.individual.len().to_string(),
                    &c.merged.len().to_string(),
                    &report::fixed4(result.and_then(|r| r.p_value)),
                    &report::fixed4(result.and_then(|r| r.effect_size)),
                    c.effect_class().map(|e| e.as_str()).unwrap_or(""),
                    c.direction.map(|d| d.as_str()).unwrap_or(c.status()),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}
