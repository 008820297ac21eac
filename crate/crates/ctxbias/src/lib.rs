//! Gender-bias audits of contextualized word embeddings.
//!
//! The numeric core lives in [`ctxbias_core`]; this crate adds file formats,
//! word-list loading, the repeat-and-aggregate harness and the CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod lists;
pub mod manifest;
pub mod report;
pub mod source;

pub use ctxbias_core as core;
pub use error::{AuditError, Result};
