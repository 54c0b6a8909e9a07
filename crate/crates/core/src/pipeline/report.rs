use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use super::io::read_jsonl;
use super::OutputFormat;
use crate::stats::{EffectClass, StatResult};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// One statistical result for a project: a correlation (grouping
/// `correlation`) or a comparison between two size categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub project_id: String,
    pub grouping: String,
    pub indicator: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
    pub effect_class: Option<EffectClass>,
    pub n_a: usize,
    pub n_b: usize,
    pub status: String,
}

impl ReportRow {
    pub fn from_result(project_id: &str, grouping: &str, indicator: &str, n: (usize, usize), result: &StatResult) -> Self {
        ReportRow {
            project_id: project_id.to_string(),
            grouping: grouping.to_string(),
            indicator: indicator.to_string(),
            statistic: Some(result.statistic),
            p_value: result.p_value,
            effect_size: result.effect_size,
            effect_class: result.effect_class,
            n_a: n.0,
            n_b: n.1,
            status: "ok".into(),
        }
    }

    pub fn skipped(project_id: &str, grouping: &str, indicator: &str, n: (usize, usize), status: impl Into<String>) -> Self {
        ReportRow {
            project_id: project_id.to_string(),
            grouping: grouping.to_string(),
            indicator: indicator.to_string(),
            statistic: None,
            p_value: None,
            effect_size: None,
            effect_class: None,
            n_a: n.0,
            n_b: n.1,
            status: status.into(),
        }
    }
}

/// Known groupings in presentation order; anything else sorts after them.
const GROUPING_ORDER: &[&str] = &["correlation", "Small-Medium", "Medium-Large", "Large-VeryLarge"];

fn grouping_rank(g: &str) -> usize {
    GROUPING_ORDER.iter().position(|k| *k == g).unwrap_or(GROUPING_ORDER.len())
}

fn indicator_rank(i: &str) -> usize {
    crate::history::Indicator::ALL.iter().position(|k| k.as_str() == i).unwrap_or(usize::MAX)
}

pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        (&a.project_id, grouping_rank(&a.grouping), &a.grouping, indicator_rank(&a.indicator), &a.indicator).cmp(&(
            &b.project_id,
            grouping_rank(&b.grouping),
            &b.grouping,
            indicator_rank(&b.indicator),
            &b.indicator,
        ))
    });
}

pub(crate) fn fixed4(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_default()
}

/// CSV with four decimals for floats, or JSON lines with full precision.
/// Rows are written in the order given; see [`sort_rows`].
pub fn emit_report(rows: &[ReportRow], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut out = Vec::new();
            for row in rows {
                serde_json::to_writer(&mut out, row).expect("report rows serialize");
                out.push(b'\n');
            }
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["project_id", "grouping", "indicator", "statistic", "p_value", "effect_size", "effect_class", "n_a", "n_b", "status"])
                .expect("in-memory write");
            for r in rows {
                w.write_record([
                    r.project_id.as_str(),
                    &r.grouping,
                    &r.indicator,
                    &fixed4(r.statistic),
                    &fixed4(r.p_value),
                    &fixed4(r.effect_size),
                    r.effect_class.map(EffectClass::as_str).unwrap_or(""),
                    &r.n_a.to_string(),
                    &r.n_b.to_string(),
                    &r.status,
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}

/// Reads rows written by [`emit_report`] in either format, chosen by extension
/// (`.csv`, anything else is JSON lines).
pub fn read_report(path: &Path) -> anyhow::Result<Vec<ReportRow>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        reader
            .deserialize()
            .enumerate()
            .map(|(i, row)| row.with_context(|| format!("{}: row {}", path.display(), i + 1)))
            .collect()
    } else {
        read_jsonl(path)
    }
}

/// Share of significant results and the effect-size class distribution for
/// one grouping and indicator across projects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub grouping: String,
    pub indicator: String,
    pub n_projects: usize,
    pub pct_significant: f64,
    pub pct_negligible: f64,
    pub pct_small: f64,
    pub pct_medium: f64,
    pub pct_large: f64,
}

/// Aggregates over rows with status `ok`. Correlation rows have no effect
/// class; their class columns stay at zero.
pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, String, usize, String), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == "ok") {
        let key = (grouping_rank(&r.grouping), r.grouping.clone(), indicator_rank(&r.indicator), r.indicator.clone());
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((_, grouping, _, indicator), rows)| {
            let n = rows.len();
            let pct = |count: usize| if n == 0 { 0.0 } else { 100.0 * count as f64 / n as f64 };
            let significant = rows.iter().filter(|r| r.p_value.is_some_and(|p| p <= SIGNIFICANCE_LEVEL)).count();
            let class = |c: EffectClass| pct(rows.iter().filter(|r| r.effect_class == Some(c)).count());
            SummaryRow {
                grouping,
                indicator,
                n_projects: n,
                pct_significant: pct(significant),
                pct_negligible: class(EffectClass::Negligible),
                pct_small: class(EffectClass::Small),
                pct_medium: class(EffectClass::Medium),
                pct_large: class(EffectClass::Large),
            }
        })
        .collect()
}

pub fn emit_summary(rows: &[SummaryRow], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut out = Vec::new();
            for row in rows {
                serde_json::to_writer(&mut out, row).expect("summary rows serialize");
                out.push(b'\n');
            }
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["grouping", "indicator", "n_projects", "pct_significant", "pct_negligible", "pct_small", "pct_medium", "pct_large"])
                .expect("in-memory write");
            for r in rows {
                w.write_record([
                    r.grouping.as_str(),
                    &r.indicator,
                    &r.n_projects.to_string(),
                    &format!("{:.2}", r.pct_significant),
                    &format!("{:.2}", r.pct_negligible),
                    &format!("{:.2}", r.pct_small),
                    &format!("{:.2}", r.pct_medium),
                    &format!("{:.2}", r.pct_large),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}
