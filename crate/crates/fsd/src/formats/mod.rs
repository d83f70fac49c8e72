//! File formats: landmark files, dataset manifests, feature CSVs, model
//! JSON, region map configs, and PGM mask dumps.

pub mod features;
pub mod landmarks;
pub mod manifest;
pub mod model;
pub mod pgm;
pub mod regionmap;

pub(crate) use manifest::ManifestEntry;

use std::path::Path;

use crate::error::CliError;

/// Shared csv-crate error mapping (I/O vs parse, with line info).
pub(crate) fn manifest_csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!("is_io_error guarantees the Io kind"),
        }
    } else {
        let line = match e.position() {
            Some(p) => p.line() as usize,
            None => 0,
        };
        CliError::format(path, line, e.to_string())
    }
}
