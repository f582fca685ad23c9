//! Layered tracing configuration.
//!
//! `infer` resolves its predictor and discovery knobs from four layers, each
//! overriding the one before it:
//!
//! 1. built-in defaults,
//! 2. the JSON defaults file named by the `TOOL_CONFIG` environment variable,
//! 3. the JSON file passed as `--config`,
//! 4. individual command-line flags (`--step-px`, `--roi`, ...).
//!
//! The JSON shape is `{"header": {...}, "inference": {...}}`; both sections
//! are optional and partial (missing fields keep the previous layer's
//! values), but unknown sections and unknown fields are rejected so a typo
//! cannot silently fall back to defaults.

use crate::Failure;
use lanetrace::headers::HeaderConfig;
use lanetrace::inference::InferenceConfig;
use lanetrace::store;
use lanetrace::Error;
use serde_json::{Map, Value};
use std::path::Path;

/// Environment variable naming the machine-wide defaults file.
pub const ENV_DEFAULTS: &str = "TOOL_CONFIG";

/// The merged result, with the layer names that contributed (for the run
/// manifest).
pub struct Resolved {
    pub header: HeaderConfig,
    pub inference: InferenceConfig,
    pub sources: Vec<String>,
}

/// Resolves layers 1–3; flag overrides (layer 4) are applied by the caller,
/// which knows its own flags.
pub fn resolve(config_flag: Option<&Path>) -> Result<Resolved, Failure> {
    let mut merged = Map::new();
    let mut sources = vec!["builtin".to_string()];
    if let Some(path) = std::env::var_os(ENV_DEFAULTS) {
        let path = Path::new(&path);
        merge_file(&mut merged, path)?;
        sources.push(format!("env {ENV_DEFAULTS}={}", path.display()));
    }
    if let Some(path) = config_flag {
        merge_file(&mut merged, path)?;
        sources.push(format!("--config {}", path.display()));
    }
    for key in merged.keys() {
        if key != "header" && key != "inference" {
            return Err(Error::Format {
                what: "tracing configuration",
                message: format!("unknown section \"{key}\" (expected \"header\" or \"inference\")"),
            }
            .into());
        }
    }
    Ok(Resolved {
        header: section(&merged, "header")?,
        inference: section(&merged, "inference")?,
        sources,
    })
}

/// Reads one JSON layer and merges it over what is already collected.
fn merge_file(into: &mut Map<String, Value>, path: &Path) -> Result<(), Failure> {
    let value = store::read_json(path)?;
    let Value::Object(object) = value else {
        return Err(Error::Format {
            what: "tracing configuration",
            message: format!("{} does not hold a JSON object", path.display()),
        }
        .into());
    };
    merge_objects(into, object);
    Ok(())
}

/// Key-wise union; nested objects merge recursively, anything else replaces.
fn merge_objects(into: &mut Map<String, Value>, from: Map<String, Value>) {
    for (key, value) in from {
        match (into.get_mut(&key), value) {
            (Some(Value::Object(dst)), Value::Object(src)) => merge_objects(dst, src),
            (_, value) => {
                into.insert(key, value);
            }
        }
    }
}

/// Deserializes one section of the merged map (defaults when absent); field
/// typos surface here thanks to the config types' strict schemas.
fn section<T>(merged: &Map<String, Value>, name: &'static str) -> Result<T, Failure>
where
    T: Default + serde::de::DeserializeOwned,
{
    match merged.get(name) {
        None => Ok(T::default()),
        Some(value) => serde_json::from_value(value.clone()).map_err(|err| {
            Failure::Input(Error::Format {
                what: "tracing configuration",
                message: format!("section \"{name}\": {err}"),
            })
        }),
    }
}
