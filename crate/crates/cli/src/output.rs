//! Result files: JSON documents and CSV tables, both carrying provenance.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance<'a> {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: &'a RunConfig,
}

impl<'a> Provenance<'a> {
    pub fn new(command: &'static str, config: &'a RunConfig) -> Self {
        Self { command, version: VERSION, seed: config.seed, config }
    }
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(io::stdout())),
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io { path: p.to_path_buf(), source: e })?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

fn io_err(path: Option<&Path>, source: io::Error) -> CliError {
    CliError::Io { path: path.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>")), source }
}

/// Pretty JSON to `path`, or stdout when unset.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

/// CSV table with a `#` provenance line above the header. Rows are flushed as written.
pub struct CsvSink {
    path: Option<PathBuf>,
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvSink {
    pub fn create(path: Option<&Path>, provenance: &Provenance<'_>, header: &[String]) -> Result<Self, CliError> {
        let mut w = open(path)?;
        let line = serde_json::to_string(provenance)?;
        writeln!(w, "# {line}").map_err(|e| io_err(path, e))?;
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(header)?;
        writer.flush().map_err(|e| io_err(path, e))?;
        Ok(Self { path: path.map(Path::to_path_buf), writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields)?;
        let path = self.path.clone();
        self.writer.flush().map_err(|e| io_err(path.as_deref(), e))
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
