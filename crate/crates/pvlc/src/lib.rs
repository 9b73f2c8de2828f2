//! File formats and the command-line front end for [`pvlc_core`].
//!
//! * [`scenario`]: JSON scenario files.
//! * [`trace_file`]: trace CSV files.
//! * [`templates`]: DTW template directories.
//! * [`sweep`]: sweep CSV files and parallel sweeps.
//! * [`cli`]: the `pvlc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod scenario;
pub mod sweep;
pub mod templates;
pub mod trace_file;

pub use error::Error;
pub use pvlc_core as core;
