//! Configuration files, vehicle traces, CSV outputs, multi-threaded
//! evaluation and the command-line front end for `risvec-core`.

#![deny(missing_docs)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod parallel;
pub mod trace;

pub use config::Config;
pub use error::{Error, Result};
