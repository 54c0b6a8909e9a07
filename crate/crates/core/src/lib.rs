//! Method-level maintainability mining for Java code: extraction, metrics,
//! change histories, size thresholds, decomposition analysis and the
//! non-parametric statistics they rely on.

pub mod decomposition;
pub mod extractor;
pub mod history;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod thresholds;
