//! Check reports and their serialized forms.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params_digest: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub elapsed_ms: u64,
}

impl CheckReport {
    /// `passed` is `max_residual < tolerance`. A NaN or infinite residual
    /// fails and is stored as `f64::MAX` so the json stays numeric.
    pub fn new(check_id: impl Into<String>, params_digest: String, samples: usize, max_residual: f64, tolerance: f64) -> Self {
        Self {
            check_id: check_id.into(),
            params_digest,
            samples,
            max_residual: if max_residual.is_finite() { max_residual } else { f64::MAX },
            tolerance,
            passed: max_residual < tolerance,
            elapsed_ms: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Short hex digest of any serializable parameter record.
pub fn digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).unwrap_or_default();
    let hash = Sha256::digest(&bytes);
    hash[..8].iter().fold(String::with_capacity(16), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

pub fn render(reports: &[CheckReport], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(reports)?),
        Format::Table => Ok(table(reports)),
    }
}

fn table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.check_id.len()).max().unwrap_or(8).max(8);
    let mut out = format!("{:<width$}  {:>7}  {:>10}  {:>10}  {:>6}  status\n", "check", "samples", "residual", "tol", "ms");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>10.3e}  {:>10.1e}  {:>6}  {}",
            r.check_id,
            r.samples,
            r.max_residual,
            r.tolerance,
            r.elapsed_ms,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    out
}

pub fn emit_report(reports: &[CheckReport], format: Format, out: &mut impl Write) -> Result<()> {
    let text = render(reports, format)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}
