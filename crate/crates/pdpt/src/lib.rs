//! Instance formats, benchmark harness and command-line front end for
//! [`pdpt_core`].

pub mod augment;
pub mod bench;
pub mod cli;
mod error;
pub mod generate;
pub mod lilim;
pub mod methods;
pub mod solution_io;

pub use error::{Error, Result};
