//! Disentanglement report CSV: one row per attribute, raw (unclamped)
//! predictions, rows in report order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use latentmap_core::DisentanglementReport;

use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "attribute,original,tfm_no_reg,abs_diff_no_reg,tfm_reg,abs_diff_reg";

pub fn report_csv(report: &DisentanglementReport) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.attribute, r.original, r.tfm_no_reg, r.abs_diff_no_reg, r.tfm_reg, r.abs_diff_reg
        )
        .unwrap();
    }
    out
}

pub fn save_report(path: &Path, report: &DisentanglementReport) -> Result<()> {
    fs::write(path, report_csv(report)).map_err(|e| Error::io(path, e))
}

/// Fixed-width table of the display (clamped) report.
pub fn report_table(report: &DisentanglementReport) -> String {
    let shown = report.clamped();
    let width = shown
        .rows
        .iter()
        .map(|r| r.attribute.len())
        .max()
        .unwrap_or(0)
        .max("attribute".len());
    let mut out = String::new();
    writeln!(
        out,
        "edit {} by alpha {} (reg map alpha {:.6})",
        report.attribute, report.alpha, report.alpha_reg
    )
    .unwrap();
    writeln!(
        out,
        "{:<width$}  {:>9}  {:>10}  {:>15}  {:>9}  {:>12}",
        "attribute", "original", "tfm_no_reg", "abs_diff_no_reg", "tfm_reg", "abs_diff_reg"
    )
    .unwrap();
    for r in &shown.rows {
        writeln!(
            out,
            "{:<width$}  {:>9.6}  {:>10.6}  {:>15.6}  {:>9.6}  {:>12.6}",
            r.attribute, r.original, r.tfm_no_reg, r.abs_diff_no_reg, r.tfm_reg, r.abs_diff_reg
        )
        .unwrap();
    }
    out
}
