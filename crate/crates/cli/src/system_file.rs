//! JSON system documents.
//!
//! ```json
//! { "schema_version": 1, "n": 2, "m": 1,
//!   "a": [0, 1, -1, 0], "b": [0, 1], "label": "oscillator" }
//! ```
//!
//! `a` and `b` are row-major. Entries may also be the strings `"NaN"`,
//! `"inf"`, `"-inf"`; those are read so that they can be rejected as
//! non-finite rather than as malformed.

use nalgebra::DMatrix;
use rapidstab::LtiSystem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: u32,
    pub n: usize,
    pub m: usize,
    pub a: Vec<Entry>,
    pub b: Vec<Entry>,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "nan" | "+nan" | "-nan" => Ok(f64::NAN),
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                _ => s.trim().parse::<f64>().map_err(|_| s.clone()),
            },
        }
    }
}

impl SystemFile {
    pub fn from_system(sys: &LtiSystem) -> Self {
        let row_major = |m: &DMatrix<f64>| -> Vec<Entry> {
            let mut out = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(Entry::Number(m[(i, j)]));
                }
            }
            out
        };
        SystemFile {
            schema_version: SCHEMA_VERSION,
            n: sys.n(),
            m: sys.m(),
            a: row_major(sys.a()),
            b: row_major(sys.b()),
            label: sys.label().to_string(),
        }
    }

    pub fn to_system(&self) -> Result<LtiSystem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(self.schema_version));
        }
        if self.n == 0 || self.m == 0 {
            return Err(CliError::Dimension(format!(
                "n and m must be positive (n = {}, m = {})",
                self.n, self.m
            )));
        }
        check_len("a", self.a.len(), self.n, self.n)?;
        check_len("b", self.b.len(), self.n, self.m)?;
        let a = matrix("a", &self.a, self.n, self.n)?;
        let b = matrix("b", &self.b, self.n, self.m)?;
        Ok(LtiSystem::new(a, b, self.label.clone())?)
    }
}

fn check_len(what: &str, got: usize, rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(want) if want == got => Ok(()),
        _ => Err(CliError::Dimension(format!(
            "`{what}` has {got} entries, expected {rows}×{cols} = {}",
            rows.saturating_mul(cols)
        ))),
    }
}

fn matrix(what: &str, entries: &[Entry], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let mut values = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let (i, j) = (k / cols, k % cols);
        let x = e.value().map_err(|s| {
            CliError::Malformed(format!("`{what}[{i}][{j}]` is not a number: {s:?}"))
        })?;
        if !x.is_finite() {
            return Err(CliError::NonFinite(format!("`{what}[{i}][{j}]` = {x}")));
        }
        values.push(x);
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Parses a document. Bare `NaN`/`Infinity` tokens and out-of-range numbers,
/// which plain JSON rejects, are reported as non-finite entries.
pub fn parse_system(bytes: &[u8]) -> Result<LtiSystem> {
    parse_document(bytes)?.to_system()
}

pub fn parse_document(bytes: &[u8]) -> Result<SystemFile> {
    match serde_json::from_slice::<SystemFile>(bytes) {
        Ok(doc) => Ok(doc),
        Err(e) => {
            if let Some(token) = bare_non_finite_token(bytes) {
                return Err(CliError::NonFinite(format!("bare `{token}` token ({e})")));
            }
            if e.to_string().contains("number out of range") {
                return Err(CliError::NonFinite(e.to_string()));
            }
            Err(CliError::Malformed(e.to_string()))
        }
    }
}

fn bare_non_finite_token(bytes: &[u8]) -> Option<&'static str> {
    let text = std::str::from_utf8(bytes).ok()?;
    let mut in_string = false;
    let mut escaped = false;
    let mut word = String::new();
    let check = |word: &mut String| -> Option<&'static str> {
        let hit = match word.as_str() {
            "NaN" | "nan" => Some("NaN"),
            "Infinity" | "inf" | "infinity" => Some("Infinity"),
            _ => None,
        };
        word.clear();
        hit
    };
    for c in text.chars() {
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            word.push(c);
            continue;
        }
        if let Some(hit) = check(&mut word) {
            return Some(hit);
        }
        if c == '"' {
            in_string = true;
        }
    }
    check(&mut word)
}

pub fn write_system(sys: &LtiSystem) -> String {
    let mut out = serde_json::to_string_pretty(&SystemFile::from_system(sys))
        .expect("system documents always serialize");
    out.push('\n');
    out
}

pub fn read_system_file(path: &std::path::Path) -> Result<LtiSystem> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&bytes)
}
