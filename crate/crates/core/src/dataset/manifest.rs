//! JSON index of subjects and their recordings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{load_recording, LoadOptions, SignalFormat};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::Recording;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingEntry {
    /// Relative paths are resolved against the manifest's directory.
    pub signal_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation_path: Option<PathBuf>,
    pub sample_rate: f64,
    pub channel_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub id: String,
    pub recordings: Vec<RecordingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: SignalFormat,
    pub subjects: Vec<SubjectEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(format: SignalFormat, subjects: Vec<SubjectEntry>) -> Self {
        Self {
            format,
            subjects,
            base_dir: PathBuf::new(),
        }
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::invalid("manifest lists no subjects"));
        }
        for s in &self.subjects {
            let Some(first) = s.recordings.first() else {
                return Err(Error::invalid(format!("subject {} has no recordings", s.id)));
            };
            for r in &s.recordings {
                if !(r.sample_rate > 0.0) {
                    return Err(Error::invalid(format!(
                        "subject {}: {} has non-positive sample rate",
                        s.id,
                        r.signal_path.display()
                    )));
                }
                if r.channel_names != first.channel_names {
                    return Err(Error::invalid(format!(
                        "subject {}: {} has different channels than {}",
                        s.id,
                        r.signal_path.display(),
                        first.signal_path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| {
            Error::parse(path, format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let m = m.with_base_dir(path.parent().unwrap_or(Path::new("")));
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn subject(&self, id: &str) -> Result<&SubjectEntry> {
        self.subjects
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::invalid(format!("no subject {id:?} in manifest")))
    }

    /// Loads every recording of a subject and checks it against its entry.
    pub fn load_subject<T: Scalar>(&self, subject: &SubjectEntry) -> Result<Vec<Recording<T>>> {
        subject
            .recordings
            .iter()
            .map(|entry| {
                let signal = self.resolve(&entry.signal_path);
                let opts = LoadOptions {
                    format: self.format,
                    sample_rate: Some(entry.sample_rate),
                    ..LoadOptions::default()
                };
                let ann = entry.annotation_path.as_ref().map(|p| self.resolve(p));
                let rec = load_recording(&signal, ann.as_deref(), &opts)?;
                if rec.channels() != entry.channel_names.as_slice() {
                    return Err(Error::parse(
                        &signal,
                        "channel table",
                        "channel names differ from the manifest",
                    ));
                }
                Ok(rec)
            })
            .collect()
    }
}
