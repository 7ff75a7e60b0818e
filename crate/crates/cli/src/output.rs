use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn output_error(path: &Path, e: impl Into<std::io::Error>) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(dir: &Path) -> Result<OutDir> {
        std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
        Ok(OutDir(dir.to_path_buf()))
    }

    pub fn csv<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.0.join(name);
        let err = |e: csv::Error| output_error(&path, std::io::Error::other(e));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        w.flush().map_err(|e| output_error(&path, e))?;
        Ok(path)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let path = self.0.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| output_error(&path, e))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| output_error(&path, e))?;
        Ok(path)
    }
}
