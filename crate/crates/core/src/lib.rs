//! Numerical core for auditing gender bias in word embeddings.
//!
//! Everything here is `no_std` with `alloc`: corpora arrive as text, embedding
//! files as byte slices, and randomness through caller-owned seeded
//! generators. File IO, configuration and the CLI live in the `ctxbias` crate.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod embformat;
mod error;
pub mod linalg;
pub mod metrics;
pub mod planted;
pub mod seed;

pub use error::{Error, Result};
