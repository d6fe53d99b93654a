//! Output rendering and the exit-code contract.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid request.
    #[error("{0}")]
    Input(String),
    /// A computation ran but its verification failed.
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verification(_) => 2,
        }
    }
}

/// Result of one command in every supported format.
pub struct Output {
    pub json: Value,
    pub text: String,
    /// Header row plus data rows; `None` for non-tabular output.
    pub csv: Option<Vec<Vec<String>>>,
    pub verified: bool,
}

impl Output {
    pub fn new(json: Value, text: String) -> Self {
        Output { json, text, csv: None, verified: true }
    }

    pub fn with_csv(mut self, rows: Vec<Vec<String>>) -> Self {
        self.csv = Some(rows);
        self
    }

    pub fn verified(mut self, ok: bool) -> Self {
        self.verified = ok;
        self
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(out: &Output, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| CliError::Input(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = out.text.clone();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
        Format::Csv => {
            let rows = out.csv.as_ref().ok_or_else(|| CliError::Input("csv output is not available for this command".into()))?;
            rows.iter().map(|r| r.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",") + "\n").collect()
        }
    })
}

pub fn emit(out: &Output, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let s = render(out, format)?;
    match path {
        Some(p) => fs::write(p, s).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}
