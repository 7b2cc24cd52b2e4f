//! Config-file overlay: flags beat file values beat defaults. The file is a
//! flat JSON object using the long flag names with underscores.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub atoms: Option<usize>,
    pub contrast: Option<f64>,
    pub tolerance: Option<f64>,
    pub pulses: Option<usize>,
    pub q_tilde: Option<serde_json::Value>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub gamma: Option<f64>,
    pub max_iterations: Option<usize>,
    pub kind: Option<String>,
    pub state: Option<String>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub phases: Option<String>,
    pub readout: Option<String>,
    pub pre_rotation: Option<f64>,
    pub husimi: Option<String>,
}

impl FileConfig {
    pub fn q_tilde_number(&self) -> Option<f64> {
        self.q_tilde.as_ref().and_then(|v| v.as_f64())
    }

    pub fn q_tilde_spec(&self) -> Option<String> {
        match self.q_tilde.as_ref() {
            Some(serde_json::Value::String(s)) => Some(s.clone()),
            Some(v) => v.as_f64().map(|x| x.to_string()),
            None => None,
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
}

/// First of (flag, file value, default).
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] but the setting is mandatory.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Validation(format!("missing required parameter --{name}")))
}
