//! Training-free style control for autoregressive decoders.
//!
//! The crate is `no_std` (with `alloc`) and contains the whole engine:
//! dense numerics, a toy contextual prompt encoder with direction-vector
//! interpolation, a KV-cached decoder with sliding-window masking, the
//! dual-decoder transition procedure, and a hand-constructed toy model whose
//! style attribute can be read back exactly from the emitted tokens.
//!
//! IO, command-line handling and file formats live in the `stylekv` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod attention;
pub mod decoder;
pub mod diagnostics;
pub mod embedding;
mod error;
pub mod numerics;
pub mod sampler;
pub mod toymodel;
pub mod transition;

pub use error::{Error, Result};

/// Engine version recorded in run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
