//! Exact similarity search in metric spaces over a flattened pivot tree.

pub mod cost;
pub mod error;
pub mod format;
pub mod index;
pub mod metric;
pub mod oracle;
pub mod query;
pub mod runtime;
pub mod synth;
pub mod update;
pub mod workload;

pub use error::{Error, Result};

/// Stable object identity within a dataset.
pub type ObjectId = u32;
