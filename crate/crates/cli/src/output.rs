//! Output sinks: artifact files in an output directory and stdout.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

/// Formats a float with 17 significant digits, enough for a lossless round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV table with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        Self {
            text: cols.join(",") + "\n",
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    /// Row with leading text cells followed by numbers.
    pub fn mixed_row(&mut self, labels: &[String], values: &[f64]) {
        let mut cells = labels.to_vec();
        cells.extend(values.iter().map(|v| fmt_f64(*v)));
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize to JSON") + "\n"
}

/// Where artifacts go: files under `dir` when set.
pub struct Sink {
    pub dir: Option<PathBuf>,
    pub json: bool,
}

impl Sink {
    /// Writes `name` under the output directory; a no-op without one.
    pub fn artifact(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }
}
