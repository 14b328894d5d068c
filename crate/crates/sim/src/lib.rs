//! File formats, batch replay, benchmarking and the live session server for
//! the pneutouch simulator.

pub mod calib_file;
pub mod cli;
pub mod diag;
pub mod live;
pub mod run;
pub mod scene_file;
pub mod telemetry;
pub mod trace_file;
pub mod wire;

pub use diag::{Diagnostic, FormatError};
