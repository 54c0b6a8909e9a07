use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::Deserialize;

use crate::extractor::SlocMode;
use crate::stats::StatsConfig;
use crate::thresholds::ThresholdMode;

pub const CONFIG_ENV: &str = "MAINTLENS_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}`; expected csv or json")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Where one project's methods come from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub id: String,
    /// A plain source tree.
    pub src: Option<PathBuf>,
    /// A Git repository, read at `snapshot`.
    pub repo: Option<PathBuf>,
    pub snapshot: Option<String>,
    /// Commit up to which histories are followed past the snapshot.
    pub until: Option<String>,
}

impl ProjectConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.id.trim().is_empty() {
            bail!("project id must not be empty");
        }
        match (&self.src, &self.repo) {
            (Some(_), Some(_)) => bail!("project `{}`: set exactly one of `src` and `repo`, not both", self.id),
            (None, None) => bail!("project `{}`: one of `src` or `repo` is required", self.id),
            (Some(_), None) if self.snapshot.is_some() || self.until.is_some() => {
                bail!("project `{}`: `snapshot` and `until` apply only to `repo` sources", self.id)
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub projects: Vec<ProjectConfig>,
    pub sloc_mode: SlocMode,
    pub window_years: f64,
    pub keywords: Option<PathBuf>,
    #[serde(deserialize_with = "threshold_mode")]
    pub thresholds: ThresholdMode,
    pub exclude_accessors: bool,
    pub format: OutputFormat,
    pub extended_mccabe: bool,
    pub mi_lines: SlocMode,
    pub readability_weights: Option<PathBuf>,
    pub size_limit: usize,
    pub rename_similarity: f64,
    pub stats: StatsConfig,
}

fn threshold_mode<'de, D: serde::Deserializer<'de>>(d: D) -> Result<ThresholdMode, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            projects: Vec::new(),
            sloc_mode: SlocMode::Standard,
            window_years: 2.0,
            keywords: None,
            thresholds: ThresholdMode::Derive,
            exclude_accessors: true,
            format: OutputFormat::Csv,
            extended_mccabe: false,
            mi_lines: SlocMode::Standard,
            readability_weights: None,
            size_limit: crate::decomposition::DEFAULT_SIZE_LIMIT,
            rename_similarity: 0.6,
            stats: StatsConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: PipelineConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate().with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    /// The file named by `MAINTLENS_CONFIG`, or defaults.
    pub fn from_env() -> anyhow::Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => PipelineConfig::from_file(Path::new(&path)),
            _ => Ok(PipelineConfig::default()),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for p in &self.projects {
            p.validate()?;
        }
        let mut ids: Vec<&str> = self.projects.iter().map(|p| p.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            bail!("project `{}` is listed more than once", w[0]);
        }
        if !(self.window_years.is_finite() && self.window_years > 0.0) {
            bail!("window_years must be positive, got {}", self.window_years);
        }
        if !(0.0..=1.0).contains(&self.rename_similarity) {
            bail!("rename_similarity must lie in [0, 1], got {}", self.rename_similarity);
        }
        if self.size_limit == 0 {
            bail!("size_limit must be at least 1");
        }
        Ok(())
    }
}
