//! Binary PGM (P5) dumps of region masks for visual debugging.

use std::path::Path;

use fsd_core::mask::BinaryMask;

use crate::error::{CliError, Result};

pub fn write_pgm(path: &Path, mask: &BinaryMask) -> Result<()> {
    let mut bytes =
        format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    bytes.extend(mask.data().iter().map(|&v| if v != 0 { 255u8 } else { 0 }));
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
