//! Result envelope: config echo, tool version, wall-clock duration, and the
//! command payload. The payload is the only part compared for reproducibility
//! (duration varies run to run).

use std::path::Path;

use serde::Serialize;

use crate::output::write_atomic;
use crate::CliError;

pub const SEED_SCHEME: &str =
    "chacha12(seed) with one counter stream per restart; sweep rows derive sub-seeds via splitmix64(seed ^ row tag)";

#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub seed_scheme: &'static str,
    pub duration_seconds: f64,
    pub payload: P,
}

pub fn emit<C: Serialize, P: Serialize>(
    command: &'static str,
    config: C,
    payload: P,
    started: std::time::Instant,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let envelope = Envelope {
        tool: "xsqueeze",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        seed_scheme: SEED_SCHEME,
        duration_seconds: started.elapsed().as_secs_f64(),
        payload,
    };
    let json = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    println!("{json}");
    if let Some(path) = out {
        write_atomic(path, json.as_bytes())?;
    }
    Ok(())
}
