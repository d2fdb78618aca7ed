//! Plain-text matrix files: dense CSV and 1-based sparse triplets.

use std::fmt::Write as _;
use std::path::Path;

use crate::covmodel::SymMatrix;
use crate::error::{Error, Result};

/// Parses CSV rows. Empty fields and `NA`/`NaN` become `None`.
pub fn parse_csv_rows(text: &str, header: bool) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if header && idx == 0 {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let f = field.trim();
            if f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
                row.push(None);
            } else {
                let v: f64 =
                    f.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("not a number: {f:?}") })?;
                row.push(Some(v));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::input("file contains no data rows"));
    }
    Ok(rows)
}

/// Rejects missing values.
pub fn require_complete(rows: Vec<Vec<Option<f64>>>) -> Result<Vec<Vec<f64>>> {
    rows.into_iter()
        .enumerate()
        .map(|(r, row)| {
            row.into_iter()
                .enumerate()
                .map(|(c, v)| {
                    v.ok_or_else(|| Error::input(format!("missing value at row {}, column {}", r + 1, c + 1)))
                })
                .collect()
        })
        .collect()
}

/// Replaces missing values by the mean of the observed values in their column.
pub fn impute_column_means(rows: Vec<Vec<Option<f64>>>) -> Result<Vec<Vec<f64>>> {
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::input("ragged data matrix"));
    }
    let mut means = vec![0.0; p];
    for (c, mean) in means.iter_mut().enumerate() {
        let observed: Vec<f64> = rows.iter().filter_map(|r| r[c]).collect();
        if observed.is_empty() {
            return Err(Error::input(format!("column {} has no observed values", c + 1)));
        }
        *mean = observed.iter().sum::<f64>() / observed.len() as f64;
    }
    Ok(rows.into_iter().map(|r| r.into_iter().zip(&means).map(|(v, m)| v.unwrap_or(*m)).collect()).collect())
}

/// Square symmetric matrix from CSV text; asymmetry up to `1e-12` is averaged away.
pub fn parse_sym_matrix(text: &str, header: bool) -> Result<SymMatrix> {
    let rows = require_complete(parse_csv_rows(text, header)?)?;
    SymMatrix::from_rows_symmetrized(&rows, 1e-12)
}

pub fn read_sym_matrix(path: &Path, header: bool) -> Result<SymMatrix> {
    parse_sym_matrix(&std::fs::read_to_string(path)?, header)
}

/// One row per line, shortest round-trip float formatting.
pub fn format_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `i j value` lines (1-based) for the upper triangle and diagonal, zeros skipped.
pub fn format_triplets(m: &SymMatrix) -> String {
    let mut out = String::new();
    let p = m.dim();
    writeln!(out, "# p {p}").unwrap();
    for i in 0..p {
        for j in i..p {
            let v = m.get(i, j);
            if v != 0.0 {
                writeln!(out, "{} {} {v:?}", i + 1, j + 1).unwrap();
            }
        }
    }
    out
}

/// Reads triplets written by [`format_triplets`]; entries are mirrored.
pub fn parse_triplets(text: &str) -> Result<SymMatrix> {
    let mut p = None;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: idx + 1, msg };
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("p") {
                let v = it.next().ok_or_else(|| err("missing dimension".into()))?;
                p = Some(v.parse::<usize>().map_err(|_| err(format!("bad dimension {v:?}")))?);
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(format!("expected `i j value`, got {line:?}")));
        }
        let i: usize = parts[0].parse().map_err(|_| err(format!("bad row index {:?}", parts[0])))?;
        let j: usize = parts[1].parse().map_err(|_| err(format!("bad column index {:?}", parts[1])))?;
        let v: f64 = parts[2].parse().map_err(|_| err(format!("bad value {:?}", parts[2])))?;
        if i == 0 || j == 0 {
            return Err(err("indices are 1-based".into()));
        }
        entries.push((i - 1, j - 1, v));
    }
    let p = match p {
        Some(p) => p,
        None => entries.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    };
    if p == 0 {
        return Err(Error::input("empty triplet file"));
    }
    let mut m = SymMatrix::zeros(p);
    for (i, j, v) in entries {
        if i >= p || j >= p {
            return Err(Error::input(format!("triplet ({}, {}) outside p = {p}", i + 1, j + 1)));
        }
        m.set(i, j, v);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_and_symmetrization() {
        let text = "a,b\n1.0, 0.5\n0.5000000000001,2\n";
        let m = parse_sym_matrix(text, true).unwrap();
        assert_eq!(m.get(1, 1), 2.0);
        assert!((m.get(0, 1) - 0.5).abs() < 1e-12);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_sym_matrix("1,2\n3\n", false), Err(Error::NotSquare { .. })));
        assert!(matches!(parse_sym_matrix("1,2,3\n4,5,6\n", false), Err(Error::NotSquare { .. })));
        assert!(matches!(parse_sym_matrix("1,x\n0,1\n", false), Err(Error::Parse { line: 1, .. })));
        assert!(parse_sym_matrix("1,0.5\n0.4,1\n", false).is_err());
        assert!(parse_sym_matrix("1,\n0,1\n", false).is_err());
    }

    #[test]
    fn imputation_uses_column_means() {
        let rows = parse_csv_rows("1,NA\n3,4\n,8\n", false).unwrap();
        let filled = impute_column_means(rows).unwrap();
        assert_eq!(filled, vec![vec![1.0, 6.0], vec![3.0, 4.0], vec![2.0, 8.0]]);
    }

    #[test]
    fn triplets_round_trip_with_trailing_zero_rows() {
        let mut m = SymMatrix::zeros(4);
        m.set(0, 0, 1.0 / 3.0);
        m.set(0, 2, -2.5e-9);
        let back = parse_triplets(&format_triplets(&m)).unwrap();
        assert_eq!(back, m);
    }
}
