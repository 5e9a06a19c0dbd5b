//! Artifact writers. Every file starts with a header naming the command and the
//! config hash; floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    /// Command-line parameters that override the config.
    pub parameters: String,
}

impl Header {
    pub fn new(command: &str, config_hash: &str, parameters: String) -> Self {
        Self {
            tool: "wavebands",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            parameters,
        }
    }

    fn comment(&self) -> String {
        let mut line =
            format!("# {} {} command={} config_hash={}", self.tool, self.version, self.command, self.config_hash);
        if !self.parameters.is_empty() {
            let _ = write!(line, " {}", self.parameters);
        }
        line
    }
}

pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Float(v) => format!("{v:.16e}"),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }
}

fn write_file(path: &Path, contents: String) -> Result<PathBuf, CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

pub fn write_csv(
    path: &Path,
    header: &Header,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<Cell>>,
) -> Result<PathBuf, CliError> {
    let mut out = header.comment();
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path, out)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

/// JSON object whose first field is `header`.
pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(&Document { header, body })
        .map_err(|e| CliError::Module { module: "output", message: e.to_string() })?;
    write_file(path, text + "\n")
}
