//! Command-line front end: configuration files, CSV rendering and the
//! experiment runner used by the `mmwave-ia` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{emit_config, load_config, parse_config, LoadedConfig};
pub use run::{run, Command, ProcedureSelection, RunSpec};
