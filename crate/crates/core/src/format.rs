//! Text formats.
//!
//! Distance matrices: a first line holding `n`, then `n` lines of `n`
//! comma-separated decimals (`[0-9]+(\.[0-9]+)?`). No spaces, no trailing
//! commas; a single final newline is allowed.
//!
//! Radii schedules: one decimal per line, starting with `1`, strictly
//! decreasing.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::radii::{custom_schedule, RadiiSchedule};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn is_decimal(s: &str) -> bool {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

fn parse_decimal(field: &str, line: usize, column: usize) -> Result<f64> {
    if !is_decimal(field) {
        return Err(parse_err(line, column, format!("`{field}` is not a decimal")));
    }
    field.parse().map_err(|_| parse_err(line, column, format!("`{field}` is not a decimal")))
}

fn split_lines(text: &str) -> Vec<&str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').collect()
}

/// Parses a distance matrix and validates it as a metric.
pub fn parse_matrix(text: &str) -> Result<FiniteMetricSpace> {
    let lines = split_lines(text);
    let header = lines[0];
    if header.is_empty() || !header.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(1, 1, format!("expected point count, got `{header}`")));
    }
    let n: usize = header.parse().map_err(|_| parse_err(1, 1, "point count out of range"))?;
    if n == 0 {
        return Err(parse_err(1, 1, "point count must be positive"));
    }
    if lines.len() != n + 1 {
        let line = lines.len().min(n + 1) + 1;
        return Err(parse_err(line, 1, format!("expected {n} matrix rows, found {}", lines.len() - 1)));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (row, line) in lines[1..].iter().enumerate() {
        let line_no = row + 2;
        let mut column = 1;
        let mut count = 0;
        for field in line.split(',') {
            count += 1;
            if count > n {
                return Err(parse_err(line_no, column, format!("row has more than {n} entries")));
            }
            flat.push(parse_decimal(field, line_no, column)?);
            column += field.len() + 1;
        }
        if count < n {
            return Err(parse_err(
                line_no,
                line.len() + 1,
                format!("row has {count} entries, expected {n}"),
            ));
        }
    }
    FiniteMetricSpace::from_flat(n, flat)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<FiniteMetricSpace> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// Writes a space in the matrix format. Values use the shortest
/// round-tripping decimal representation, so parsing restores them exactly.
pub fn format_matrix(space: &FiniteMetricSpace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", space.len());
    for i in 0..space.len() {
        let row: Vec<String> = space.row(i).iter().map(|d| format!("{d}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn parse_schedule(text: &str) -> Result<RadiiSchedule> {
    let mut radii = Vec::new();
    for (i, line) in split_lines(text).iter().enumerate() {
        let r = parse_decimal(line, i + 1, 1)?;
        if i == 0 && r != 1.0 {
            return Err(parse_err(1, 1, "first radius must be 1"));
        }
        if i > 0 && r >= radii[i - 1] {
            return Err(parse_err(i + 1, 1, "radii must be strictly decreasing"));
        }
        if r <= 0.0 {
            return Err(parse_err(i + 1, 1, "radii must be positive"));
        }
        radii.push(r);
    }
    custom_schedule(radii)
}

pub fn read_schedule_file(path: impl AsRef<Path>) -> Result<RadiiSchedule> {
    parse_schedule(&std::fs::read_to_string(path)?)
}
