use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::sim::{Checkpoint, SimState};

/// Version written as the first comment line of every CSV file.
pub const SCHEMA_VERSION: u32 = 1;

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// for very small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV file with a `# schema_version` comment line and one header row.
pub struct CsvSink {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl CsvSink {
    /// Creates `path`, or appends to it when `append` is set and the file
    /// exists. The header is written only for new files.
    pub fn open(path: &Path, header: &[String], append: bool) -> Result<Self> {
        let exists = append && path.exists();
        let file = if exists {
            OpenOptions::new().append(true).open(path)
        } else {
            File::create(path)
        }
        .map_err(|e| Error::io(path, e))?;
        let mut sink = CsvSink {
            path: path.to_path_buf(),
            writer: BufWriter::new(file),
        };
        if !exists {
            sink.line(&format!("# schema_version={SCHEMA_VERSION}"))?;
            sink.record(header.iter().cloned())?;
        }
        Ok(sink)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.writer, "{text}").map_err(|e| Error::io(&self.path, e))
    }

    /// Writes one row. Fields are numbers or identifiers, so no quoting
    /// is needed.
    pub fn record(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        let row = fields.into_iter().collect::<Vec<_>>().join(",");
        self.line(&row)
    }

    /// Writes a `# ...` line between records.
    pub fn comment(&mut self, text: &str) -> Result<()> {
        self.line(&format!("# {}", text.replace('\n', " ")))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Configuration(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if cp.schema_version != SCHEMA_VERSION {
        return Err(Error::validation(
            "schema_version",
            format!(
                "checkpoint has version {}, expected {SCHEMA_VERSION}",
                cp.schema_version
            ),
        ));
    }
    Ok(cp)
}

/// Writes `snapshots/snapshot_{step:06}.csv` with one row per node.
pub fn write_snapshot(dir: &Path, step: usize, state: &SimState, labels: &[String]) -> Result<()> {
    let path = dir.join(format!("snapshot_{step:06}.csv"));
    let mut header = vec!["x".to_string()];
    header.extend(state.columns(labels));
    let mut sink = CsvSink::open(&path, &header, false)?;
    let grid = state.grid();
    for n in 0..grid.n_nodes {
        let row = std::iter::once(grid.x(n)).chain(state.row(n, labels));
        sink.record(row.map(fmt_f64))?;
    }
    sink.finish()
}
