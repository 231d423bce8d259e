//! Standard-library companion to `graphbank-core`: text and JSON file
//! formats, seeded random streams, experiment drivers and the `graphbank`
//! command-line tool.

pub mod cli;
pub mod commands;
pub mod experiments;
pub mod formats;
pub mod io;
pub mod streams;

pub use graphbank_core as core;
