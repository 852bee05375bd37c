//! Run configuration: config file (or an earlier run manifest) merged with
//! command-line flags, flags winning.

use std::fs;
use std::path::{Path, PathBuf};

use hdenc::analysis::Strategy;
use hdenc::dataset::SynthSpec;
use hdenc::evaluation::{Metric, DEFAULT_POSTPROCESS_WINDOW_S};
use hdenc::pipeline::{HdSettings, PreprocessConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const RUN_MANIFEST_FILE: &str = "run-manifest.json";
const TOOL: &str = "hdenc";

/// Dimensions used by `cost` when no feature set is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSettings {
    pub num_feat: usize,
    pub num_ch: usize,
}

impl Default for CostSettings {
    fn default() -> Self {
        Self {
            num_feat: 19,
            num_ch: 18,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset manifest read by `features`.
    pub dataset: Option<PathBuf>,
    /// Feature directory read by `train`, `eval`, `select` and `compare`.
    pub features: Option<PathBuf>,
    /// Subjects to process; empty means all.
    pub subjects: Vec<String>,
    pub synth: SynthSpec,
    pub preprocess: PreprocessConfig,
    pub hd: HdSettings,
    pub postprocess_window_s: f64,
    /// `None` runs every strategy.
    pub strategy: Option<Strategy>,
    pub metric: Metric,
    /// Encoder seeds per scheme in `compare`, counted up from `hd.seed`.
    pub compare_seeds: usize,
    pub cost: CostSettings,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            features: None,
            subjects: Vec::new(),
            synth: SynthSpec::default(),
            preprocess: PreprocessConfig::default(),
            hd: HdSettings::default(),
            postprocess_window_s: DEFAULT_POSTPROCESS_WINDOW_S,
            strategy: None,
            metric: Metric::F1de,
            compare_seeds: 5,
            cost: CostSettings::default(),
            jobs: None,
        }
    }
}

/// A flag that replaced a value from the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Override {
    pub key: String,
    pub file_value: Value,
    pub flag_value: Value,
}

/// Written into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub overrides: Vec<Override>,
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        write_json(&out_dir.join(RUN_MANIFEST_FILE), self)
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::usage(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Builds the merged configuration. Keys are JSON pointers into
/// [`RunConfig`]; `None` flag values leave the file value in place.
pub struct ConfigBuilder {
    value: Value,
    overrides: Vec<Override>,
}

impl ConfigBuilder {
    pub fn new(file: Option<&Path>) -> Result<Self, CliError> {
        let value = match file {
            None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::config_io(path, e))?;
                let mut v: Value = serde_json::from_str(&text).map_err(|e| {
                    CliError::usage(format!(
                        "{}: line {}, column {}: {e}",
                        path.display(),
                        e.line(),
                        e.column()
                    ))
                })?;
                // accept an earlier run manifest in place of a config file
                if v.get("tool").and_then(Value::as_str) == Some(TOOL) {
                    v = v.get("config").cloned().unwrap_or(Value::Null);
                }
                // normalize through the typed config so missing keys get defaults
                let cfg: RunConfig = serde_json::from_value(v)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                serde_json::to_value(cfg).expect("config serializes")
            }
        };
        Ok(Self {
            value,
            overrides: Vec::new(),
        })
    }

    pub fn set<S: Serialize>(&mut self, key: &str, flag: Option<S>) -> &mut Self {
        let Some(flag) = flag else {
            return self;
        };
        let flag_value = serde_json::to_value(flag).expect("flag value serializes");
        let slot = self
            .value
            .pointer_mut(key)
            .unwrap_or_else(|| panic!("unknown config key {key}"));
        if *slot != flag_value {
            self.overrides.push(Override {
                key: key.to_string(),
                file_value: slot.clone(),
                flag_value: flag_value.clone(),
            });
            *slot = flag_value;
        }
        self
    }

    pub fn finish(self, command: &str) -> Result<RunManifest, CliError> {
        let config: RunConfig =
            serde_json::from_value(self.value).map_err(|e| CliError::usage(e.to_string()))?;
        Ok(RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            overrides: self.overrides,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_wins_and_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"hd": {"dim": 5000}, "metric": "f1e"}"#).unwrap();
        let mut b = ConfigBuilder::new(Some(&path)).unwrap();
        b.set("/hd/dim", Some(8000usize)).set("/hd/num_bins", None::<usize>);
        let m = b.finish("eval").unwrap();
        assert_eq!(m.config.hd.dim, 8000);
        assert_eq!(m.config.metric, Metric::F1e);
        assert_eq!(m.overrides.len(), 1);
        assert_eq!(m.overrides[0].file_value, serde_json::json!(5000));
    }

    #[test]
    fn run_manifest_replays_as_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = ConfigBuilder::new(None).unwrap();
        b.set("/hd/dim", Some(3000usize));
        let m = b.finish("train").unwrap();
        m.write(dir.path()).unwrap();
        let again = ConfigBuilder::new(Some(&dir.path().join(RUN_MANIFEST_FILE)))
            .unwrap()
            .finish("train")
            .unwrap();
        assert_eq!(again.config, m.config);
        assert!(again.overrides.is_empty());
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"dimension": 5}"#).unwrap();
        assert!(ConfigBuilder::new(Some(&path)).is_err());
    }
}
