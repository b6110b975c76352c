//! Command-line runtime verification against CSP specifications.
//!
//! Offline checking of trace files, online checking over sockets, the
//! determinism gate and the timing harness. The monitor itself lives in
//! `cspmon-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod mapping;
pub mod pipeline;
pub mod report;
pub mod server;
pub mod trace;

pub use cli::{run_cli, run_cli_with};
pub use config::{load_config, Config, ConfigError, Input, Protocol};
pub use mapping::{load_mapping, Mapping, MappingError};
pub use pipeline::{build_oracle, CliError, Oracle, OracleRequest};
