//! Command-line harness: one subcommand per solver plus reproducible suites.
//!
//! Every command produces an [`Outcome`]: a printed summary, artifact files that
//! are written once at the end, and a pass flag. The process exit code is
//! [`EXIT_OK`] iff every asserted inequality held beyond its error bar.

pub mod commands;
pub mod format;
pub mod inputs;
pub mod suites;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
/// An asserted inequality failed or could not be verified.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// A solver or I/O error stopped the run.
pub const EXIT_ERROR: i32 = 3;

/// Bad flags, config keys, input files or parameter values.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Exit code for an error that stopped a command.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    use shellspec_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidInput(_) | E::Domain(_) | E::Geometry(_) | E::Convexity(_) | E::Json(_)) => EXIT_USAGE,
        Some(E::Membership(_) | E::SectionMismatch(_)) => EXIT_FAILED,
        _ => EXIT_ERROR,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// Printed to stdout.
    pub summary: String,
    pub artifacts: Vec<Artifact>,
    pub passed: bool,
}

impl Outcome {
    pub fn new(summary: String, passed: bool) -> Self {
        Outcome { summary, artifacts: Vec::new(), passed }
    }

    pub fn with_artifact(mut self, path: impl Into<PathBuf>, contents: String) -> Self {
        self.artifacts.push(Artifact { path: path.into(), contents });
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }

    /// Single writer for all artifacts, creating parent directories.
    pub fn write_artifacts(&self) -> anyhow::Result<()> {
        for a in &self.artifacts {
            if let Some(dir) = a.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&a.path, &a.contents)?;
        }
        Ok(())
    }
}

/// Overlay the keys of a JSON object onto serialized flags. Keys are the flag
/// names, with `-` or `_`; unknown keys are a usage error.
pub fn apply_config<T: Serialize + DeserializeOwned>(args: T, config: &Value) -> anyhow::Result<T> {
    let Value::Object(overrides) = config else {
        return usage("config file must hold a JSON object");
    };
    let mut v = serde_json::to_value(args)?;
    let fields = v.as_object_mut().expect("flag structs serialize to objects");
    for (k, val) in overrides {
        let key = k.replace('-', "_");
        if !fields.contains_key(&key) {
            let mut known: Vec<&String> = fields.keys().collect();
            known.sort();
            return usage(format!("unknown config key '{k}' (known: {known:?})"));
        }
        fields.insert(key, val.clone());
    }
    serde_json::from_value(v).map_err(|e| UsageError(format!("bad config value: {e}")).into())
}

pub fn read_config(path: &Path) -> anyhow::Result<Value> {
    let text = inputs::read_file(path)?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

/// Size the global rayon pool from `SHELLSPEC_THREADS`.
pub fn configure_threads(var: Option<&str>) -> anyhow::Result<()> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return usage(format!("SHELLSPEC_THREADS must be a positive integer, got '{v}'")),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}
