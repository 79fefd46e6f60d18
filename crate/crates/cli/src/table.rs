//! Entropy tables and their CSV form.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rows of `(t, xi_1..xi_m, S_alpha..)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Canonical JSON of the run configuration.
    pub config: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `value` in scientific notation with `digits` significant digits.
pub fn format_sig(value: f64, digits: usize) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{:.*e}", digits.saturating_sub(1), v)
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Two comment lines (config echo, version), the column header, then rows.
    pub fn write_csv<W: Write>(&self, mut w: W, digits: usize) -> std::io::Result<()> {
        writeln!(w, "# config: {}", self.config)?;
        writeln!(w, "# version: quench {VERSION}")?;
        writeln!(w, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format_sig(*v, digits));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, digits).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &Path, digits: usize) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CliError::write(path, e))?;
        self.write_csv(std::io::BufWriter::new(file), digits)
            .map_err(|e| CliError::write(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.4865078666749618, 12), "4.86507866675e-1");
        assert_eq!(format_sig(-0.0, 12), "0.00000000000e0");
        assert_eq!(format_sig(100.0, 3), "1.00e2");
    }

    #[test]
    fn csv_layout() {
        let t = ResultTable {
            config: "{}".into(),
            columns: vec!["t".into(), "S_1".into()],
            rows: vec![vec![0.0, 0.5], vec![0.1, 0.25]],
        };
        let csv = t.to_csv(3);
        let lines: Vec<_> = csv.split('\n').collect();
        assert_eq!(lines[0], "# config: {}");
        assert!(lines[1].starts_with("# version: "));
        assert_eq!(lines[2], "t,S_1");
        assert_eq!(lines[3], "0.00e0,5.00e-1");
        assert_eq!(lines[4], "1.00e-1,2.50e-1");
        assert_eq!(lines[5], "");
        assert!(!csv.contains('\r'));
        assert_eq!(t.column("S_1").unwrap(), vec![0.5, 0.25]);
    }
}
