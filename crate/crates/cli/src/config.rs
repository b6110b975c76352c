//! YAML run configuration.
//!
//! ```yaml
//! spec_path: rover.csp
//! entry_process: MAIN
//! mode: permissive
//! mapping_path: rover_mapping.json
//! input:
//!   trace_file: rover_pass.trace
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use cspmon_core::lts::SynthesisLimits;
use cspmon_core::syntax::parse_entry;
use cspmon_core::Mode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {key}: {reason}", file.display())]
    Invalid {
        file: PathBuf,
        key: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Tcp,
    Websocket,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Tcp => "tcp",
            Protocol::Websocket => "websocket",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    TraceFile(PathBuf),
    Listen {
        protocol: Protocol,
        host: String,
        port: u16,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub spec_path: PathBuf,
    /// Entry call text, e.g. `MAIN` or `ROVER({0..4}, Green)`.
    pub entry_process: String,
    pub mode: Mode,
    /// Event texts, or bare channel names standing for all their events.
    pub observable_events: Option<Vec<String>>,
    pub mapping_path: Option<PathBuf>,
    pub input: Input,
    pub limits: SynthesisLimits,
    pub report_path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spec_path: PathBuf,
    entry_process: String,
    #[serde(default)]
    mode: RawMode,
    observable_events: Option<Vec<String>>,
    mapping_path: Option<PathBuf>,
    input: RawInput,
    #[serde(default)]
    limits: RawLimits,
    report_path: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    #[default]
    Strict,
    Permissive,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    trace_file: Option<PathBuf>,
    listen: Option<RawListen>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawListen {
    protocol: Protocol,
    #[serde(default = "default_host")]
    host: String,
    port: u16,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    max_states: Option<usize>,
    max_transitions: Option<usize>,
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

/// Parses config text; `path` locates relative paths and names the file in
/// errors.
pub fn parse_config(text: &str, path: &Path) -> Result<Config, ConfigError> {
    let invalid = |key: &str, reason: String| ConfigError::Invalid {
        file: path.to_path_buf(),
        key: key.to_string(),
        reason,
    };
    let de = serde_yaml::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." { "(top level)".to_string() } else { key };
        invalid(&key, e.into_inner().to_string())
    })?;

    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

    let spec_path = resolve(raw.spec_path);
    if !spec_path.is_file() {
        return Err(invalid("spec_path", format!("{} does not exist", spec_path.display())));
    }
    parse_entry(&raw.entry_process).map_err(|e| invalid("entry_process", e.to_string()))?;

    let input = match (raw.input.trace_file, raw.input.listen) {
        (Some(p), None) => Input::TraceFile(resolve(p)),
        (None, Some(l)) => Input::Listen {
            protocol: l.protocol,
            host: l.host,
            port: l.port,
        },
        _ => {
            return Err(invalid(
                "input",
                "exactly one of `trace_file` or `listen` must be given".into(),
            ))
        }
    };

    let defaults = SynthesisLimits::default();
    let limits = SynthesisLimits::new(
        raw.limits.max_states.unwrap_or(defaults.max_states),
        raw.limits.max_transitions.unwrap_or(defaults.max_transitions),
    )
    .map_err(|e| invalid("limits", e.to_string()))?;

    Ok(Config {
        spec_path,
        entry_process: raw.entry_process,
        mode: match raw.mode {
            RawMode::Strict => Mode::Strict,
            RawMode::Permissive => Mode::Permissive,
        },
        observable_events: raw.observable_events,
        mapping_path: raw.mapping_path.map(resolve),
        input,
        limits,
        report_path: raw.report_path.map(resolve),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_spec(yaml: &str) -> (tempfile::TempDir, Result<Config, ConfigError>) {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.csp"), "channel a\nP = a -> P\n").unwrap();
        let path = dir.path().join("run.yaml");
        fs::write(&path, yaml).unwrap();
        let cfg = load_config(&path);
        (dir, cfg)
    }

    #[test]
    fn minimal_config_defaults_to_strict() {
        let (dir, cfg) = with_spec("spec_path: m.csp\nentry_process: P\ninput:\n  trace_file: t.trace\n");
        let cfg = cfg.unwrap();
        assert_eq!(cfg.mode, Mode::Strict);
        assert_eq!(cfg.spec_path, dir.path().join("m.csp"));
        assert_eq!(cfg.input, Input::TraceFile(dir.path().join("t.trace")));
        assert_eq!(cfg.limits, SynthesisLimits::default());
        assert_eq!(cfg.observable_events, None);
    }

    #[test]
    fn listen_input() {
        let (_dir, cfg) = with_spec(
            "spec_path: m.csp\nentry_process: P\nmode: permissive\ninput:\n  listen: {protocol: websocket, port: 9000}\n",
        );
        let cfg = cfg.unwrap();
        assert_eq!(cfg.mode, Mode::Permissive);
        assert_eq!(
            cfg.input,
            Input::Listen {
                protocol: Protocol::Websocket,
                host: "127.0.0.1".into(),
                port: 9000
            }
        );
    }

    #[test]
    fn both_inputs_rejected() {
        let (_dir, cfg) = with_spec(
            "spec_path: m.csp\nentry_process: P\ninput:\n  trace_file: t\n  listen: {protocol: tcp, port: 1}\n",
        );
        let err = cfg.unwrap_err().to_string();
        assert!(err.contains("input: exactly one"), "{err}");
    }

    #[test]
    fn unknown_key_reported_with_path() {
        let (_dir, cfg) = with_spec(
            "spec_path: m.csp\nentry_process: P\ninput:\n  trace_file: t\nlimits:\n  max_state: 3\n",
        );
        let err = cfg.unwrap_err().to_string();
        assert!(err.contains("limits"), "{err}");
        assert!(err.contains("max_state"), "{err}");
    }

    #[test]
    fn bad_mode() {
        let (_dir, cfg) = with_spec("spec_path: m.csp\nentry_process: P\nmode: lax\ninput:\n  trace_file: t\n");
        assert!(cfg.unwrap_err().to_string().contains("mode"));
    }

    #[test]
    fn missing_spec_file() {
        let (_dir, cfg) = with_spec("spec_path: nope.csp\nentry_process: P\ninput:\n  trace_file: t\n");
        assert!(cfg.unwrap_err().to_string().contains("spec_path: "));
    }

    #[test]
    fn zero_limit() {
        let (_dir, cfg) = with_spec(
            "spec_path: m.csp\nentry_process: P\ninput:\n  trace_file: t\nlimits: {max_states: 0}\n",
        );
        assert!(cfg.unwrap_err().to_string().contains("limits"));
    }

    #[test]
    fn malformed_entry() {
        let (_dir, cfg) = with_spec("spec_path: m.csp\nentry_process: \"P(\"\ninput:\n  trace_file: t\n");
        assert!(cfg.unwrap_err().to_string().contains("entry_process"));
    }
}
