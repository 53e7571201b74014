//! Near-duplicate detection pipeline over [`neardup_core`]: an on-disk band
//! store in two layouts, corpus and report files, parameter sweeps, and the
//! `neardup` command line.

pub mod band_store;
pub mod bench;
pub mod commands;
pub mod config;
mod error;
pub mod extsort;
pub mod io;
pub mod kv;
pub mod pipeline;

pub use band_store::{BandSource, BandStore, InMemoryBands, StoreMeta, WriteStats};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use neardup_core as core;
