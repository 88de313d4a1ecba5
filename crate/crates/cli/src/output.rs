//! CSV and JSON emission. CSV goes to `output` (or stdout); the JSON summary
//! goes to `summary` (or stdout, after the CSV).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::Value;

use crate::CliError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_json(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

#[derive(Debug, Clone)]
pub struct Table {
    header: &'static str,
    body: String,
}

impl Table {
    pub fn new(header: &'static str) -> Self {
        Self { header, body: String::new() }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for c in cells {
            if !first {
                self.body.push(',');
            }
            first = false;
            self.body.push_str(&c);
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        let mut s = String::with_capacity(self.header.len() + self.body.len() + 1);
        let _ = writeln!(s, "{}", self.header);
        s.push_str(&self.body);
        s
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub struct Emitter {
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl Emitter {
    pub fn emit(&self, table: Option<&Table>, summary: &Value) -> Result<(), CliError> {
        let mut stdout = String::new();
        if let Some(t) = table {
            match &self.output {
                Some(p) => write_file(p, &t.render())?,
                None => stdout.push_str(&t.render()),
            }
        }
        let json = serde_json::to_string(summary).expect("JSON values always serialize") + "\n";
        match &self.summary {
            Some(p) => write_file(p, &json)?,
            None => stdout.push_str(&json),
        }
        print!("{stdout}");
        Ok(())
    }
}
