//! Rendering of rows as JSON, CSV or an aligned text table.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Float with at most 15 significant digits, shortest form; exponent
/// notation for magnitudes below `1e-4` or from `1e16`.
pub fn sig15(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e16).contains(&mag) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

/// Tabular data: a header and string cells.
pub struct Rows {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Rows {
    pub fn new(header: Vec<&'static str>) -> Self {
        Rows { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_table(&self, out: &mut dyn Write) -> Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(self.header.clone()))?;
        writeln!(out, "{}", line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()))?;
        for r in &self.rows {
            writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// JSON from `value`, otherwise the tabular view.
pub fn emit<T: Serialize + ?Sized>(format: Format, value: &T, rows: impl FnOnce() -> Rows, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => write_json(value, out),
        Format::Csv => rows().write_csv(out),
        Format::Table => rows().write_table(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig15(0.5), "0.5");
        assert_eq!(sig15(2.0 / 3.0), "0.666666666666667");
        assert_eq!(sig15((2.0 + 3f64.sqrt()) / 8.0), "0.46650635094611");
        assert_eq!(sig15(1e-20 / 3.0), "3.33333333333333e-21");
        assert_eq!(sig15(1e20), "1e20");
        assert_eq!(sig15(0.0), "0");
    }

    #[test]
    fn csv_and_table() {
        let mut rows = Rows::new(vec!["a", "bb"]);
        rows.push(vec!["1".into(), "x,y".into()]);
        let mut buf = Vec::new();
        rows.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,bb\n1,\"x,y\"\n");
        let mut buf = Vec::new();
        rows.write_table(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a  bb\n-  ---\n1  x,y\n");
    }
}
