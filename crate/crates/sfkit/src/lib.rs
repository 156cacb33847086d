//! Command-line front end for `sfkit-core`.
//!
//! Inputs are JSON, tabular outputs are CSV (header row, `\n`, '.' decimal),
//! figures are plain SVG. Every run writes a [`manifest::RunManifest`] listing its
//! outputs and checks; the exit code is 0 when every required check passes,
//! 1 on a failed check or computation, 2 on bad input and 3 on I/O errors.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod svg;
