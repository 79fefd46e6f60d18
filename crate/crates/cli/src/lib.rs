//! Configuration, simulation driver and CSV output for the `quench` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod figures;
pub mod run;
pub mod sweep;
pub mod table;
pub mod verify;

pub use config::{load_config, parse_config, Job, RunConfig};
pub use error::{CliError, Result};
pub use figures::{write_figure, Figure};
pub use run::run;
pub use table::ResultTable;
