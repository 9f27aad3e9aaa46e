//! File formats and the `shocksynth` command-line tool on top of
//! [`shocksynth_core`], which is re-exported here.

pub mod cli;
pub mod io;
pub mod report;

pub use shocksynth_core::*;
