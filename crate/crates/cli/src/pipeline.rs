//! From spec text to a monitor-ready oracle.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use cspmon_core::lts::{
    check_determinism, determinize, hide, synthesize_lts, LtsError, SynthesisLimits, Witness,
};
use cspmon_core::syntax::{parse_entry, parse_spec, validate_spec, ParseError, ResolveError};
use cspmon_core::{Event, Lts};

use crate::config::ConfigError;
use crate::mapping::MappingError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("{}: {source}", file.display())]
    Parse { file: PathBuf, source: ParseError },
    #[error("{}: {source}", file.display())]
    Resolve { file: PathBuf, source: ResolveError },
    #[error("entry `{entry}`: {reason}")]
    Entry { entry: String, reason: String },
    #[error("observable_events: {0}")]
    Observable(String),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("oracle is not deterministic: {0}")]
    Nondeterministic(Witness),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: io::Error) -> CliError {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Nondeterministic(_) => 2,
            CliError::Lts(LtsError::LimitExceeded { .. })
            | CliError::Io { .. }
            | CliError::Mapping(MappingError::Io { .. }) => 4,
            _ => 3,
        }
    }
}

/// What to build: the spec file, the entry call and the SUA-visible events.
#[derive(Debug, Clone)]
pub struct OracleRequest<'a> {
    pub spec_path: &'a Path,
    pub entry: &'a str,
    pub observable: Option<&'a [String]>,
    pub limits: SynthesisLimits,
}

#[derive(Debug, Clone)]
pub struct Oracle {
    /// Determinized, with non-observable events hidden.
    pub lts: Arc<Lts>,
    /// Full model alphabet, before hiding.
    pub alphabet: BTreeSet<Event>,
    /// The raw synthesized LTS.
    pub synthesized: Lts,
    /// Parse to determinize, including the gate.
    pub synth_time: Duration,
}

/// Result of the stages up to and including the determinism gate.
#[derive(Debug, Clone)]
pub struct Gated {
    pub synthesized: Lts,
    pub hidden: Lts,
    pub witness: Option<Witness>,
}

fn load_source(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))
}

/// Parses, validates and synthesizes, then hides and runs the gate.
pub fn gate(req: &OracleRequest) -> Result<Gated, CliError> {
    let source = load_source(req.spec_path)?;
    let spec = parse_spec(&source).map_err(|source| CliError::Parse {
        file: req.spec_path.to_path_buf(),
        source,
    })?;
    let spec = validate_spec(spec).map_err(|source| CliError::Resolve {
        file: req.spec_path.to_path_buf(),
        source,
    })?;
    let entry_err = |reason: String| CliError::Entry {
        entry: req.entry.to_string(),
        reason,
    };
    let entry = parse_entry(req.entry).map_err(|e| entry_err(e.to_string()))?;
    let entry = spec.resolve_entry(&entry).map_err(|e| entry_err(e.to_string()))?;
    let synthesized = synthesize_lts(&spec, &entry, &req.limits)?;
    let hidden_events = match req.observable {
        None => BTreeSet::new(),
        Some(list) => {
            let visible = expand_observable(list, synthesized.alphabet())?;
            synthesized
                .alphabet()
                .iter()
                .filter(|e| !visible.contains(e))
                .cloned()
                .collect()
        }
    };
    let hidden = hide(&synthesized, &hidden_events)?;
    let report = check_determinism(&hidden, &req.limits)?;
    Ok(Gated {
        synthesized,
        hidden,
        witness: report.witness,
    })
}

/// Runs the whole pipeline; a non-deterministic oracle is an error.
pub fn build_oracle(req: &OracleRequest) -> Result<Oracle, CliError> {
    let start = Instant::now();
    let gated = gate(req)?;
    if let Some(w) = gated.witness {
        return Err(CliError::Nondeterministic(w));
    }
    let lts = determinize(&gated.hidden, &req.limits)?;
    let synth_time = start.elapsed();
    Ok(Oracle {
        lts: Arc::new(lts),
        alphabet: gated.synthesized.alphabet().iter().cloned().collect(),
        synthesized: gated.synthesized,
        synth_time,
    })
}

/// Reads each entry as an event text; a bare name that is not itself an
/// event but is the channel of some events stands for all of them.
pub fn expand_observable(list: &[String], alphabet: &[Event]) -> Result<BTreeSet<Event>, CliError> {
    let mut out = BTreeSet::new();
    for text in list {
        let e: Event = text
            .parse()
            .map_err(|e: cspmon_core::event::EventParseError| CliError::Observable(e.to_string()))?;
        if alphabet.contains(&e) {
            out.insert(e);
            continue;
        }
        let before = out.len();
        if e.values.is_empty() {
            out.extend(alphabet.iter().filter(|a| a.channel == e.channel).cloned());
        }
        if out.len() == before {
            return Err(CliError::Observable(format!("`{text}` is not in the alphabet")));
        }
    }
    Ok(out)
}
