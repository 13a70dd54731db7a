use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const SCHEMA: &str = "hyperfree-report/1";
const TABLE_MARK: &str = "[table]";
const CERT_MARK: &str = "[certificate]";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, value: impl Serialize) -> Self {
        Check {
            name: name.into(),
            value: serde_json::to_value(value).expect("check values serialize"),
        }
    }
}

/// One sweep point: its inputs by value and the verdicts computed from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub key: String,
    pub input: Value,
    pub complete: bool,
    pub checks: Vec<Check>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub kind: String,
    pub config: ExperimentConfig,
    pub complete: bool,
    pub points: Vec<PointRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub certificate: Certificate,
}

impl Report {
    pub fn complete(&self) -> bool {
        self.certificate.complete
    }

    pub fn table(&self) -> String {
        let rows: Vec<&Vec<String>> = self.certificate.points.iter().flat_map(|p| &p.rows).collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row.iter()) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:>w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&line(self.header.clone()));
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&line(rule.iter().map(String::as_str).collect()));
        out.push('\n');
        for row in rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let cert = serde_json::to_string_pretty(&self.certificate).expect("certificate serializes");
        format!(
            "hyperfree report\nschema: {SCHEMA}\nkind: {}\ncomplete: {}\n\n{TABLE_MARK}\n{}\n{CERT_MARK}\n{cert}\n",
            self.certificate.kind,
            self.certificate.complete,
            self.table()
        )
    }
}

/// Extracts the certificate from a rendered report, or parses bare JSON.
pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let json = match text.find(CERT_MARK) {
        Some(i) => &text[i + CERT_MARK.len()..],
        None => text,
    };
    let raw: Value = serde_json::from_str(json.trim()).context("certificate is not valid JSON")?;
    match raw.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        Some(other) => bail!("schema version mismatch: found {other:?}, this tool reads {SCHEMA:?}"),
        None => bail!("certificate has no schema field"),
    }
    serde_json::from_value(raw).context("certificate does not match the schema")
}
