//! Versioned JSON checkpoints.
//!
//! Every file is an envelope
//!
//! ```json
//! { "format": "faultlab-checkpoint", "version": 1, "kind": "task3",
//!   "training": { ... }, "model": { ... } }
//! ```
//!
//! `model` is the serialised model: network layers as objects holding their weight
//! matrices (`rows`, `cols`, row-major `data`) and sizes; the change-point detector adds its
//! scaler and threshold; classifiers add their class list and per-kind parameters.
//! `training` holds the hyperparameters the model was fitted with, including the optimiser
//! settings, and is informational. Floats are written in shortest round-trip form, so
//! save-then-load is bit-exact.
//!
//! A cascade is a directory: `manifest.json` (variant, prior and Task 2 scope) plus one file
//! per stage, see [`save_cascade`].

use std::fs;
use std::path::{Path, PathBuf};

use faultlab_core::cascade::{CascadeModels, PriorConfig, Task2Model, Task2Scope, Task3Model, Variant};
use faultlab_core::changepoint::ChangePointDetector;
use faultlab_core::segclass::ClassifierModel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "faultlab-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing model file")]
    Missing { path: String },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: expected format `{FORMAT}` version {VERSION}, found `{format}` version {version}")]
    Format { path: String, format: String, version: u32 },
    #[error("{path}: expected a `{expected}` checkpoint, found `{found}`")]
    Kind {
        path: String,
        expected: &'static str,
        found: String,
    },
}

/// A model type with its own checkpoint kind.
pub trait Checkpoint: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Checkpoint for ChangePointDetector {
    const KIND: &'static str = "changepoint";
}

impl Checkpoint for ClassifierModel {
    const KIND: &'static str = "segclass";
}

impl Checkpoint for Task2Model {
    const KIND: &'static str = "task2";
}

impl Checkpoint for Task3Model {
    const KIND: &'static str = "task3";
}

/// What a cascade directory holds besides the stage models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeManifest {
    pub variant: Variant,
    pub prior: PriorConfig,
    pub task2_scope: Task2Scope,
}

impl Checkpoint for CascadeManifest {
    const KIND: &'static str = "cascade";
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<serde_json::Value>,
    model: T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
}

fn json_error(path: &Path) -> impl FnOnce(serde_json::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Json {
        path: path.display().to_string(),
        source,
    }
}

pub fn to_json<T: Checkpoint, S: Serialize>(model: &T, training: Option<&S>) -> Result<String, serde_json::Error> {
    let env = Envelope {
        format: FORMAT.to_string(),
        version: VERSION,
        kind: T::KIND.to_string(),
        training: training.map(serde_json::to_value).transpose()?,
        model,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    Ok(text)
}

/// Parses a checkpoint; `path` only labels errors.
pub fn from_json<T: Checkpoint>(text: &str, path: &Path) -> Result<T, CheckpointError> {
    let header: Header = serde_json::from_str(text).map_err(json_error(path))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(CheckpointError::Format {
            path: path.display().to_string(),
            format: header.format,
            version: header.version,
        });
    }
    if header.kind != T::KIND {
        return Err(CheckpointError::Kind {
            path: path.display().to_string(),
            expected: T::KIND,
            found: header.kind,
        });
    }
    let env: Envelope<T> = serde_json::from_str(text).map_err(json_error(path))?;
    Ok(env.model)
}

pub fn save<T: Checkpoint, S: Serialize>(model: &T, training: Option<&S>, path: &Path) -> Result<(), CheckpointError> {
    let text = to_json(model, training).map_err(json_error(path))?;
    fs::write(path, text).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load<T: Checkpoint>(path: &Path) -> Result<T, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CheckpointError::Missing {
                path: path.display().to_string(),
            }
        } else {
            CheckpointError::Io {
                path: path.display().to_string(),
                source,
            }
        }
    })?;
    from_json(&text, path)
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHANGEPOINT_FILE: &str = "changepoint.json";
pub const SEGCLASS_FILE: &str = "segclass.json";
pub const TASK2_FILE: &str = "task2.json";
pub const TASK3_FILE: &str = "task3.json";

/// Writes a cascade into `dir` (created if needed). Stages the variant does not use get no
/// file. `training` is stored in every stage file.
pub fn save_cascade<S: Serialize>(models: &CascadeModels, training: Option<&S>, dir: &Path) -> Result<(), CheckpointError> {
    fs::create_dir_all(dir).map_err(|source| CheckpointError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let manifest = CascadeManifest {
        variant: models.variant,
        prior: models.prior,
        task2_scope: models.task2_scope,
    };
    save(&manifest, training, &dir.join(MANIFEST_FILE))?;
    if let Some(d) = &models.detector {
        save(d, training, &dir.join(CHANGEPOINT_FILE))?;
    }
    if let Some(s) = &models.segclass {
        save(s, training, &dir.join(SEGCLASS_FILE))?;
    }
    save(&models.task2, training, &dir.join(TASK2_FILE))?;
    save(&models.task3, training, &dir.join(TASK3_FILE))
}

/// Reads a cascade directory; a stage file the manifest's variant needs must exist.
pub fn load_cascade(dir: &Path) -> Result<CascadeModels, CheckpointError> {
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let manifest: CascadeManifest = load(&path(MANIFEST_FILE))?;
    let detector = if manifest.variant.uses_changepoints() {
        Some(load(&path(CHANGEPOINT_FILE))?)
    } else {
        None
    };
    let segclass = if manifest.variant.uses_segclass() {
        Some(load(&path(SEGCLASS_FILE))?)
    } else {
        None
    };
    Ok(CascadeModels {
        variant: manifest.variant,
        detector,
        segclass,
        prior: manifest.prior,
        task2_scope: manifest.task2_scope,
        task2: load(&path(TASK2_FILE))?,
        task3: load(&path(TASK3_FILE))?,
    })
}
