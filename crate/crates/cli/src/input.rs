//! Readers for the files and values the command line accepts.

use std::fs;
use std::path::Path;

use selfnorm_core::contfrac::BigRational;
use selfnorm_core::Error;
use serde::de::DeserializeOwned;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

/// A decimal, or a fraction `p/q` evaluated as `p as f64 / q as f64`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

/// Exact rational `p/q` (or an integer).
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|_| CliError::Usage(format!("not a rational p/q: {s:?}")))
}

fn parse_value(line_no: usize, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line_no}: not a number: {s:?}")).into())
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn value_lines(text: &str) -> Result<Vec<f64>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, l)| parse_value(i + 1, l))
        .collect()
}

/// The named column of a CSV file with a header line.
pub fn csv_column(text: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines.next().unwrap_or_default();
    let col = header
        .split(',')
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Usage(format!("no column {name:?} in header {header:?}")))?;
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let field = l
                .split(',')
                .nth(col)
                .ok_or_else(|| Error::Parse(format!("line {}: missing column {name:?}", i + 2)))?;
            parse_value(i + 2, field)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("x").is_err());
    }

    #[test]
    fn columns() {
        let csv = "gap,psi\n1,0.5\n2,0.25\n";
        assert_eq!(csv_column(csv, "psi").unwrap(), vec![0.5, 0.25]);
        assert!(csv_column(csv, "nope").is_err());
        assert_eq!(value_lines("# data\n1\n\n2.5\n").unwrap(), vec![1.0, 2.5]);
        assert!(value_lines("1\nx\n").is_err());
    }
}
