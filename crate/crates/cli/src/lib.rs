//! Reproducible experiments over `cdsim`: compile, post-select, the depth-3
//! oracle, the set-size game and the acceptance criteria. Every experiment
//! produces a [`ResultRecord`]; the binary prints them as JSON lines.

pub mod criteria;
pub mod experiments;
pub mod fixtures;
pub mod record;

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

pub use record::{Check, Relation, ResultRecord};

/// Reads and parses a JSON file; parse errors carry line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
