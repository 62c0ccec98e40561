//! Fixed-format text output shared by every table writer.

use std::io::Write;

use crate::error::Result;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes each header line prefixed with `# `.
pub fn write_header<W: Write>(w: &mut W, header: &str) -> Result<()> {
    for line in header.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}
