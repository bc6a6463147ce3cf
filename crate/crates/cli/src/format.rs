//! CSV and JSON emission. Numbers carry 17 significant digits; rows end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub const GIT_DESCRIBE: &str = env!("NONCOLLIDING_GIT_DESCRIBE");

/// Scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Comment line `# key=value ...` leading every table.
pub fn metadata_line(pairs: &[(&str, String)]) -> String {
    let mut s = format!("# noncolliding {GIT_DESCRIBE}");
    for (k, v) in pairs {
        let _ = write!(s, " {k}={v}");
    }
    s.push('\n');
    s
}

#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &[(&str, String)], columns: &[&str]) -> Self {
        let mut text = metadata_line(meta);
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Row led by a text label.
    pub fn labelled_row(&mut self, label: &str, values: &[f64]) {
        self.text.push_str(label);
        for &v in values {
            self.text.push(',');
            self.text.push_str(&num(v));
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, contents).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
