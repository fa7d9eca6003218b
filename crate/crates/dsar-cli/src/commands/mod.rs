pub mod analyze;
pub mod image;
pub mod simulate;
pub mod verify;

use std::path::Path;

use crate::CliError;

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create output directory {}: {e}", dir.display())))
}
