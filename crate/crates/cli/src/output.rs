//! CSV tables with a `# key=value` metadata preamble.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QDL_OUTPUT_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column-major numeric table plus metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.header.push(name.to_string());
        self.columns.push(values);
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Metadata lines, header, then rows in shortest round-trip `{:e}` form.
    pub fn render(&self) -> Result<String, CliError> {
        let rows = self.rows();
        if self.columns.iter().any(|c| c.len() != rows) {
            return Err(CliError::Io("columns have different lengths".into()));
        }
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in 0..rows {
            w.write_record(self.columns.iter().map(|c| format!("{:e}", c[r]))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = self.render()?;
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

/// `explicit` if given, else `name` inside `$QDL_OUTPUT_DIR` (or the
/// working directory).
pub fn output_path(explicit: Option<&Path>, name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
            _ => PathBuf::from(name),
        },
    }
}

/// `dir/stem_suffix.csv` beside `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}
