use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};

/// Shortest round-trip scientific form; '.' decimal, no locale.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> HarnessResult<Self> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> HarnessResult<()> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_path(&path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        w.write_record(header)?;
        for r in rows {
            if r.len() != header.len() {
                return Err(HarnessError::Numerical(format!("{name}: row of {} cells under {} columns", r.len(), header.len())));
            }
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> HarnessResult<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }
}
