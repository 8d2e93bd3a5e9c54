//! JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "d": 2,
//!   "a": 1,
//!   "attributes": ["smile"],
//!   "lambda": 2.0,
//!   "b": [0.5],
//!   "m_columns": [[0.1, -0.2]],
//!   "meta": {"iterations": 900, "final_total_loss": 0.01, "final_mse": 0.008,
//!            "final_penalty": 0.001, "seed": 0, "schedule": "constant"}
//! }
//! ```
//!
//! `m_columns` holds the direction columns, so it is `M` in column-major
//! order. `meta` is `null` for maps with no recorded provenance.

use std::fs;
use std::path::Path;

use latentmap_core::{AttributeSchema, LinearMap, Matrix, TrainMeta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    d: usize,
    a: usize,
    attributes: Vec<String>,
    lambda: f64,
    b: Vec<f64>,
    m_columns: Vec<Vec<f64>>,
    meta: Option<MetaFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    iterations: usize,
    final_total_loss: f64,
    final_mse: f64,
    final_penalty: f64,
    seed: u64,
    schedule: String,
}

/// Serializes `map`. The output depends only on the map, so equal maps give
/// byte-identical files.
pub fn to_json(map: &LinearMap) -> String {
    let meta = map.meta();
    let file = ModelFile {
        version: FORMAT_VERSION,
        d: map.dim(),
        a: map.attrs(),
        attributes: map.schema().names().to_vec(),
        lambda: meta.map_or(0.0, |m| m.lambda),
        b: map.b().to_vec(),
        m_columns: map.m().columns(),
        meta: meta.map(|m| MetaFile {
            iterations: m.iterations,
            final_total_loss: m.final_total_loss,
            final_mse: m.final_mse,
            final_penalty: m.final_penalty,
            seed: m.seed,
            schedule: m.schedule.clone(),
        }),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

/// Parses a model document; `path` is only used in error messages.
pub fn from_json(text: &str, path: &Path) -> Result<LinearMap> {
    let bad = |reason: String| Error::format(path, reason);
    let file: ModelFile = serde_json::from_str(text).map_err(|e| bad(format!("invalid model file: {e}")))?;
    if file.version != FORMAT_VERSION {
        return Err(bad(format!(
            "unsupported model version {} (expected {FORMAT_VERSION})",
            file.version
        )));
    }
    let count = |field: &str, expected: usize, actual: usize| {
        if expected == actual {
            Ok(())
        } else {
            Err(bad(format!("`{field}` has {actual} entries, expected {expected}")))
        }
    };
    count("attributes", file.a, file.attributes.len())?;
    count("b", file.a, file.b.len())?;
    count("m_columns", file.a, file.m_columns.len())?;
    for (i, c) in file.m_columns.iter().enumerate() {
        count(&format!("m_columns[{i}]"), file.d, c.len())?;
    }
    let schema = AttributeSchema::new(file.attributes).map_err(|e| bad(e.to_string()))?;
    let m = Matrix::from_columns(&file.m_columns)?;
    let map = LinearMap::new(m, file.b, schema).map_err(|e| bad(e.to_string()))?;
    Ok(match file.meta {
        Some(meta) => map.with_meta(TrainMeta {
            lambda: file.lambda,
            iterations: meta.iterations,
            final_total_loss: meta.final_total_loss,
            final_mse: meta.final_mse,
            final_penalty: meta.final_penalty,
            seed: meta.seed,
            schedule: meta.schedule,
        }),
        None => map,
    })
}

pub fn save_model(path: &Path, map: &LinearMap) -> Result<()> {
    fs::write(path, to_json(map)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<LinearMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text, path)
}
