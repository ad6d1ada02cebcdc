//! Instance files.
//!
//! ```json
//! {
//!   "format": "qjump-instance",
//!   "version": 1,
//!   "n": 3,
//!   "edges": [[0, 1, 1.0], [1, 2, -0.5]],
//!   "h": [0.1, 0.0, 0.0],
//!   "metadata": {"seed": 7}
//! }
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting so a
//! save/load cycle is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{InstanceMeta, IsingInstance};

pub const INSTANCE_FORMAT: &str = "qjump-instance";
pub const INSTANCE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format: String,
    version: u32,
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    h: Vec<f64>,
    #[serde(default)]
    metadata: InstanceMeta,
}

pub fn instance_to_json(inst: &IsingInstance<f64>) -> Result<String> {
    let file = InstanceFile {
        format: INSTANCE_FORMAT.into(),
        version: INSTANCE_VERSION,
        n: inst.n(),
        edges: inst.edges().to_vec(),
        h: inst.fields().to_vec(),
        metadata: inst.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

/// Parses an instance document. `context` names the source in error messages.
pub fn instance_from_json(text: &str, context: &str) -> Result<IsingInstance<f64>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("{context}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let parse_err = |message: String| Error::Parse {
        context: context.to_string(),
        message,
    };
    if file.format != INSTANCE_FORMAT {
        return Err(parse_err(format!(
            "field `format`: expected {INSTANCE_FORMAT:?}, found {:?}",
            file.format
        )));
    }
    if file.version != INSTANCE_VERSION {
        return Err(parse_err(format!(
            "field `version`: unsupported version {}",
            file.version
        )));
    }
    IsingInstance::new(file.n, file.edges, file.h)
        .map(|inst| inst.with_meta(file.metadata))
        .map_err(|e| parse_err(format!("field `edges`/`h`: {e}")))
}

pub fn save_instance(inst: &IsingInstance<f64>, path: &Path) -> Result<()> {
    fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<IsingInstance<f64>> {
    let text = fs::read_to_string(path)?;
    instance_from_json(&text, &path.display().to_string())
}
