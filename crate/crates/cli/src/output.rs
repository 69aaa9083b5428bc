//! Output-file management: every artifact is tracked so a failing command
//! removes its partial outputs, and numeric formatting uses the shortest
//! round-trip decimal representation (Rust's default `f64` display), so
//! identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Default)]
pub struct OutputTracker {
    files: Vec<PathBuf>,
}

impl OutputTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
        }
        fs::write(path, contents)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    /// Removes everything written so far (failure path).
    pub fn cleanup(&self) {
        for path in &self.files {
            let _ = fs::remove_file(path);
        }
    }
}
