//! Static quality metrics for a single method.

mod complexity;
pub mod halstead;
pub mod readability;

use serde::{Deserialize, Serialize};

use crate::extractor::{compute_sloc, ExtractError, MethodRecord, ParsedMethod, SlocMode};

pub use complexity::{mccabe, mcclure};
pub use halstead::{halstead_volume, HalsteadCounts};
pub use readability::{readability_features, readability_score, ReadabilityFeatures, ReadabilityWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub mccabe: u32,
    pub mcclure: u32,
    pub halstead_volume: f64,
    pub maintainability_index: f64,
    pub readability: f64,
}

/// `171 - 5.2 ln(V) - 0.23 CC - 16.2 ln(LOC)`. A zero volume is read as one so
/// the logarithm vanishes.
pub fn maintainability_index(halstead_volume: f64, cyclomatic: u32, sloc: usize) -> f64 {
    let volume = if halstead_volume <= 0.0 { 1.0 } else { halstead_volume };
    maintainability_index_real(volume, cyclomatic as f64, sloc.max(1) as f64)
}

/// Same formula over reals, for callers that feed non-integral inputs.
pub fn maintainability_index_real(halstead_volume: f64, cyclomatic: f64, sloc: f64) -> f64 {
    171.0 - 5.2 * halstead_volume.ln() - 0.23 * cyclomatic - 16.2 * sloc.ln()
}

#[derive(Debug, Clone, Default)]
pub struct MetricOptions {
    /// Count `&&` and `||` as McCabe predicate points.
    pub extended_mccabe: bool,
    /// Which SLOC flavour feeds the MI line term.
    pub mi_lines: SlocMode,
    pub readability: ReadabilityWeights,
}

pub fn compute_metrics(body: &str, options: &MetricOptions) -> Result<MetricVector, ExtractError> {
    let parsed = ParsedMethod::parse(body)?;
    let sloc_err = |source| ExtractError::Sloc { file_path: "<method body>".into(), source };
    let mccabe = mccabe(&parsed, options.extended_mccabe);
    let volume = halstead_volume(&parsed);
    let lines = compute_sloc(body, options.mi_lines).map_err(sloc_err)?;
    Ok(MetricVector {
        mccabe,
        mcclure: mcclure(&parsed),
        halstead_volume: volume,
        maintainability_index: maintainability_index(volume, mccabe, lines),
        readability: readability_score(body, &options.readability).map_err(sloc_err)?,
    })
}

pub fn annotate(record: &mut MethodRecord, options: &MetricOptions) -> Result<(), ExtractError> {
    record.metrics = Some(compute_metrics(&record.body_text, options)?);
    Ok(())
}
