//! Experiment orchestration behind the `singlet-frame` binary.
//!
//! Output conventions:
//! - CSV: UTF-8, LF line endings, one header row, reals written with 17
//!   significant digits in `{:.16e}` form (e.g. `1.0000000000000000e0`).
//! - JSON: `serde_json` output, pretty-printed, reals in shortest
//!   round-trip form, trailing LF.
//! - Every output file is written to `<path>.tmp` and renamed into place.
//!   Timings and timestamps go to a sidecar `<path>.log`, never into the
//!   output itself, so reruns produce byte-identical files.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{
    bayes_from_input, mi_curve_csv, mi_surface_csv, posterior_family_csv, BayesInput, FamilyPreset,
};
pub use config::{ExperimentConfig, Mode};
pub use report::{run_experiment, RunReport};

/// Environment variable naming the directory for outputs given without `--out`.
pub const OUT_DIR_ENV: &str = "SINGLET_FRAME_OUT_DIR";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Runtime(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// 1 validation, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation { .. } | HarnessError::Parse { .. } => 1,
            HarnessError::Runtime(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

pub type HarnessResult<T> = Result<T, HarnessError>;

/// A real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins reals into one CSV row (without the newline).
pub(crate) fn csv_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", fmt_real(*v));
    }
}

/// Writes `contents` to `<path>.tmp`, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> HarnessResult<()> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|source| HarnessError::Io {
        path: tmp.clone(),
        source,
    })?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Sidecar log next to an output file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".log");
    PathBuf::from(p)
}

pub fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
