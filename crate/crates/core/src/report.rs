//! Plain-text report tables: UTF-8, LF line endings, reals as 6-decimal
//! fixed point.

use std::io::Write;

use crate::error::Result;

/// Formats a real the way every emitted table does.
pub fn fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    // avoid "-0.000000"
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Writes a header row and data rows joined with tabs.
pub fn write_tsv<W: Write>(mut out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{}", header.join("\t"))?;
    for r in rows {
        writeln!(out, "{}", r.join("\t"))?;
    }
    Ok(())
}
