//! Std companion to the core descriptor library: file formats, dataset
//! assembly, synthetic data, report writing, and the CLI commands.

pub mod cli;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod report;
pub mod synth;
