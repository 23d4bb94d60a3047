//! Command-line front end and benchmark harness for `idbp-core`.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod bench;
pub mod config;
pub mod error;
pub mod trace_csv;
pub mod verify;

pub use app::run;
pub use error::{CliError, Result};
