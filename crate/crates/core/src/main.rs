use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use maintlens::extractor::{MethodRecord, SlocMode};
use maintlens::history::{load_histories, BugKeywords, MethodHistory, TraceOptions};
use maintlens::metrics::{MetricOptions, ReadabilityWeights};
use maintlens::pipeline::{
    self, emit_report, emit_summary, read_jsonl, read_report, to_jsonl, write_output, OutputFormat, PipelineConfig,
    ProjectConfig, ThresholdReport,
};
use maintlens::thresholds::{SizeThresholds, ThresholdMode};

#[derive(Parser)]
#[command(name = "maintlens", version, about = "Method-level maintainability mining for Java repositories")]
struct Cli {
    /// TOML pipeline configuration; command-line flags take precedence.
    #[arg(long, global = true, env = "MAINTLENS_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract method records from a source tree or a Git snapshot.
    Extract(ExtractArgs),
    /// Add McCabe, McClure, Halstead volume, MI and readability to records.
    Metrics(MetricsArgs),
    /// Trace method histories in Git, or ingest precomputed ones.
    History(HistoryArgs),
    /// Derive SLOC thresholds or apply a fixed triple.
    Thresholds(ThresholdsArgs),
    /// Correlations with SLOC and comparisons between size categories.
    Analyze(AnalyzeArgs),
    /// Merge candidates and individual-versus-merged comparisons.
    Decompose(DecomposeArgs),
    /// Summarize analysis rows: share of significant results and effect sizes.
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, conflicts_with = "repo")]
    src: Option<PathBuf>,
    #[arg(long)]
    repo: Option<PathBuf>,
    /// Commit to read from `--repo`.
    #[arg(long, default_value = "HEAD", requires = "repo")]
    snapshot: String,
    /// Project id; defaults to the source directory name.
    #[arg(long)]
    project: Option<String>,
    /// Keep getters and setters.
    #[arg(long)]
    include_accessors: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    records: PathBuf,
    /// Annotated records (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a metric table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    extended_mccabe: bool,
    /// SLOC flavour for the MI line term.
    #[arg(long)]
    mi_lines: Option<SlocMode>,
    #[arg(long)]
    readability_weights: Option<PathBuf>,
}

#[derive(Args)]
struct HistoryArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, conflicts_with = "history_in")]
    repo: Option<PathBuf>,
    #[arg(long, requires = "repo")]
    snapshot: Option<String>,
    /// Follow methods past the snapshot up to this commit.
    #[arg(long, requires = "repo")]
    until: Option<String>,
    /// Only trace records of this project.
    #[arg(long)]
    project: Option<String>,
    /// One bug keyword per line.
    #[arg(long)]
    keywords_file: Option<PathBuf>,
    /// Precomputed histories (JSON lines or a JSON array) to validate and pass on.
    #[arg(long)]
    history_in: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    /// `derive` or `fixed:A,B,C`.
    #[arg(long)]
    thresholds: Option<ThresholdMode>,
    #[arg(long)]
    sloc_mode: Option<SlocMode>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-method size categories (CSV).
    #[arg(long)]
    categories: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    histories: PathBuf,
    #[arg(long)]
    window_years: Option<f64>,
    #[arg(long)]
    sloc_mode: Option<SlocMode>,
    #[arg(long)]
    include_accessors: bool,
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// `derive` or `fixed:A,B,C`.
    #[arg(long, conflicts_with = "thresholds_file")]
    thresholds: Option<ThresholdMode>,
    /// Output of the `thresholds` command.
    #[arg(long)]
    thresholds_file: Option<PathBuf>,
    #[arg(long)]
    correlations: Option<PathBuf>,
    #[arg(long)]
    comparisons: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long)]
    size_limit: Option<usize>,
    /// Merge candidates (JSON lines).
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Individual large methods with their selection (JSON lines).
    #[arg(long)]
    individuals: Option<PathBuf>,
    #[arg(long)]
    comparisons: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Rows written by `analyze` (CSV or JSON lines).
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Success, or success with some inputs skipped.
enum Outcome {
    Complete,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Extract(a) => extract(a, &config),
        Command::Metrics(a) => metrics(a, &config),
        Command::History(a) => history(a, &config),
        Command::Thresholds(a) => thresholds(a, &config),
        Command::Analyze(a) => analyze(a, config),
        Command::Decompose(a) => decompose(a, config),
        Command::Report(a) => report(a, &config),
    }
}

fn warn_all(messages: &[String]) {
    for m in messages {
        eprintln!("warning: {m}");
    }
}

fn extract(a: ExtractArgs, config: &PipelineConfig) -> anyhow::Result<Outcome> {
    let exclude = config.exclude_accessors && !a.include_accessors;
    let projects: Vec<ProjectConfig> = match (&a.src, &a.repo) {
        (None, None) if config.projects.is_empty() => bail!("nothing to extract: pass --src or --repo, or list projects in the config"),
        (None, None) => config.projects.clone(),
        (src, repo) => {
            let dir = src.as_ref().or(repo.as_ref()).expect("one is set");
            let id = match &a.project {
                Some(id) => id.clone(),
                None => dir
                    .canonicalize()
                    .with_context(|| format!("resolving {}", dir.display()))?
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "project".into()),
            };
            let snapshot = repo.as_ref().map(|_| a.snapshot.clone());
            vec![ProjectConfig { id, src: src.clone(), repo: repo.clone(), snapshot, until: None }]
        }
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for p in &projects {
        let outcome = pipeline::extract_project(p, exclude).with_context(|| format!("project `{}`", p.id))?;
        records.extend(outcome.records);
        failures.extend(outcome.failures.into_iter().map(|f| format!("{}: {f}", p.id)));
    }
    write_output(a.out.as_deref(), &to_jsonl(&records))?;
    warn_all(&failures);
    Ok(if failures.is_empty() { Outcome::Complete } else { Outcome::Partial })
}

fn metrics(a: MetricsArgs, config: &PipelineConfig) -> anyhow::Result<Outcome> {
    let weights_path = a.readability_weights.as_ref().or(config.readability_weights.as_ref());
    let options = MetricOptions {
        extended_mccabe: a.extended_mccabe || config.extended_mccabe,
        mi_lines: a.mi_lines.unwrap_or(config.mi_lines),
        readability: match weights_path {
            Some(p) => ReadabilityWeights::from_file(p)?,
            None => ReadabilityWeights::default(),
        },
    };
    let mut records: Vec<MethodRecord> = read_jsonl(&a.records)?;
    let failures = pipeline::annotate_records(&mut records, &options);
    write_output(a.out.as_deref(), &to_jsonl(&records))?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["project_id", "method_id", "file_path", "name", "sloc", "mccabe", "mcclure", "halstead_volume", "maintainability_index", "readability"])?;
        for r in &records {
            let Some(m) = &r.metrics else { continue };
            w.write_record([
                r.project_id.as_str(),
                &r.method_id,
                &r.file_path,
                &r.name,
                &r.sloc(config.sloc_mode).to_string(),
                &m.mccabe.to_string(),
                &m.mcclure.to_string(),
                &format!("{:.4}", m.halstead_volume),
                &format!("{:.4}", m.maintainability_index),
                &format!("{:.4}", m.readability),
            ])?;
        }
        write_output(Some(path), &w.into_inner()?)?;
    }
    warn_all(&failures);
    Ok(if failures.is_empty() { Outcome::Complete } else { Outcome::Partial })
}

fn history(a: HistoryArgs, config: &PipelineConfig) -> anyhow::Result<Outcome> {
    if let Some(path) = &a.history_in {
        let histories = load_histories(path)?;
        write_output(a.out.as_deref(), &to_jsonl(&histories))?;
        return Ok(Outcome::Complete);
    }
    let records_path = a.records.as_ref().context("--records is required unless --history-in is given")?;
    let records: Vec<MethodRecord> = read_jsonl(records_path)?;
    let keywords = match a.keywords_file.as_ref().or(config.keywords.as_ref()) {
        Some(p) => BugKeywords::from_file(p).with_context(|| format!("reading keywords {}", p.display()))?,
        None => BugKeywords::default(),
    };
    let sources: Vec<ProjectConfig> = match &a.repo {
        Some(repo) => vec![ProjectConfig {
            id: a.project.clone().unwrap_or_default(),
            src: None,
            repo: Some(repo.clone()),
            snapshot: a.snapshot.clone(),
            until: a.until.clone(),
        }],
        None => config.projects.iter().filter(|p| p.repo.is_some()).cloned().collect(),
    };
    if sources.is_empty() {
        bail!("no repository to trace: pass --repo or --history-in, or list repo projects in the config");
    }
    let mut histories: Vec<MethodHistory> = Vec::new();
    for source in &sources {
        let selected: Vec<MethodRecord> = records
            .iter()
            .filter(|r| source.id.is_empty() || r.project_id == source.id)
            .filter(|r| a.project.as_ref().is_none_or(|p| &r.project_id == p))
            .cloned()
            .collect();
        let repo = source.repo.as_ref().expect("filtered to repo sources");
        let options = TraceOptions { until: source.until.clone(), rename_similarity: config.rename_similarity, keywords: keywords.clone() };
        let snapshot = source.snapshot.as_deref().unwrap_or("HEAD");
        let traced = pipeline::trace_histories(repo, snapshot, &selected, &options)
            .with_context(|| format!("tracing {} at {snapshot}", repo.display()))?;
        histories.extend(traced);
    }
    let truncated = histories.iter().filter(|h| h.truncated).count();
    if truncated > 0 {
        eprintln!("warning: {truncated} histories stop at a rename that could not be bridged");
    }
    write_output(a.out.as_deref(), &to_jsonl(&histories))?;
    Ok(Outcome::Complete)
}

fn read_records(path: &Path, exclude_accessors: bool) -> anyhow::Result<Vec<MethodRecord>> {
    let mut records: Vec<MethodRecord> = read_jsonl(path)?;
    if exclude_accessors {
        records.retain(|r| !r.is_accessor);
    }
    Ok(records)
}

fn thresholds(a: ThresholdsArgs, config: &PipelineConfig) -> anyhow::Result<Outcome> {
    let mode = a.thresholds.unwrap_or(config.thresholds);
    let sloc_mode = a.sloc_mode.unwrap_or(config.sloc_mode);
    let records = match &a.records {
        Some(p) => read_records(p, config.exclude_accessors)?,
        None => Vec::new(),
    };
    let report = match mode {
        ThresholdMode::Fixed(t) => pipeline::fixed_report(t),
        ThresholdMode::Derive if a.records.is_none() => bail!("--records is required to derive thresholds"),
        ThresholdMode::Derive => pipeline::derive_report(&records, sloc_mode)?,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_output(a.out.as_deref(), &json)?;
    if let Some(path) = &a.categories {
        let rows = pipeline::categorize_records(&records, sloc_mode, &report.thresholds());
        write_output(Some(path), &pipeline::emit_categories(&rows))?;
    }
    Ok(Outcome::Complete)
}

fn apply_study(study: &StudyArgs, config: &mut PipelineConfig) -> anyhow::Result<(Vec<MethodRecord>, Vec<MethodHistory>)> {
    if let Some(w) = study.window_years {
        config.window_years = w;
    }
    if let Some(m) = study.sloc_mode {
        config.sloc_mode = m;
    }
    if let Some(f) = study.format {
        config.format = f;
    }
    config.exclude_accessors &= !study.include_accessors;
    config.validate()?;
    let records: Vec<MethodRecord> = read_jsonl(&study.records)?;
    let histories = load_histories(&study.histories)?;
    Ok((records, histories))
}

fn analyze(a: AnalyzeArgs, mut config: PipelineConfig) -> anyhow::Result<Outcome> {
    let (records, histories) = apply_study(&a.study, &mut config)?;
    let thresholds: SizeThresholds = if let Some(path) = &a.thresholds_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let report: ThresholdReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        SizeThresholds::new(report.t70, report.t80, report.t90)?
    } else {
        match a.thresholds.unwrap_or(config.thresholds) {
            ThresholdMode::Fixed(t) => t,
            ThresholdMode::Derive => {
                let kept: Vec<MethodRecord> = records.iter().filter(|r| !(config.exclude_accessors && r.is_accessor)).cloned().collect();
                pipeline::derive_report(&kept, config.sloc_mode)?.thresholds()
            }
        }
    };
    let (analysis, join) = pipeline::analyze(&records, &histories, &thresholds, &config);
    if join.without_history > 0 {
        eprintln!("warning: {} records have no history and were skipped", join.without_history);
    }
    write_output(a.correlations.as_deref(), &emit_report(&analysis.correlations, config.format))?;
    match &a.comparisons {
        Some(path) => write_output(Some(path), &emit_report(&analysis.comparisons, config.format))?,
        None if a.correlations.is_some() => write_output(None, &emit_report(&analysis.comparisons, config.format))?,
        None => {}
    }
    Ok(Outcome::Complete)
}

fn decompose(a: DecomposeArgs, mut config: PipelineConfig) -> anyhow::Result<Outcome> {
    if let Some(limit) = a.size_limit {
        config.size_limit = limit;
    }
    let (records, histories) = apply_study(&a.study, &mut config)?;
    let result = pipeline::decompose(&records, &histories, &config);
    for (project, d) in &result.diagnostics {
        if !d.issues.is_empty() {
            eprintln!("note: {project}: {} ambiguous or unparsable call sites", d.issues.len());
        }
    }
    for (project, cycles) in &result.cycles {
        for c in cycles {
            eprintln!("note: {project}: call cycle {}", c.join(" -> "));
        }
    }
    write_output(a.candidates.as_deref(), &to_jsonl(&result.candidates))?;
    if let Some(path) = &a.individuals {
        write_output(Some(path), &to_jsonl(&result.individuals))?;
    }
    if let Some(path) = &a.comparisons {
        write_output(Some(path), &pipeline::emit_group_comparisons(&result.comparisons, config.format))?;
    }
    Ok(Outcome::Complete)
}

fn report(a: ReportArgs, config: &PipelineConfig) -> anyhow::Result<Outcome> {
    let mut rows = Vec::new();
    for path in &a.input {
        rows.extend(read_report(path)?);
    }
    let summary = pipeline::summarize(&rows);
    write_output(a.out.as_deref(), &emit_summary(&summary, a.format.unwrap_or(config.format)))?;
    Ok(Outcome::Complete)
}
