//! CSV serialization of sweep rows.
//!
//! The schema is fixed: one header line, twelve columns, `\n` line endings,
//! reals printed with twelve digits after the decimal point, optional fields
//! left empty. Identical rows always produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::sweep::SweepRow;

pub const CSV_HEADER: &str = "policy,rho1,rho2,mu,delta1,delta2,sum_aoi,jain,method,ci_low,ci_high,seed";

const COLUMNS: usize = 12;

/// Fixed-point rendering used for every real in the CSV.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.12}");
    // -0.000000000000 and 0.000000000000 must not differ.
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn format_row(row: &SweepRow) -> String {
    let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    [
        row.policy.to_string(),
        format_real(row.rho1),
        format_real(row.rho2),
        format_real(row.mu),
        format_real(row.delta1),
        format_real(row.delta2),
        format_real(row.sum_aoi),
        format_real(row.jain),
        row.method.to_string(),
        opt(row.ci_low),
        opt(row.ci_high),
        row.seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
    .join(",")
}

/// Renders rows to CSV text. Zero rows is an error.
pub fn to_csv_string(rows: &[SweepRow]) -> Result<String, Error> {
    if rows.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut out = String::with_capacity(CSV_HEADER.len() + 1 + rows.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<(), Error> {
    let text = to_csv_string(rows)?;
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stream>", e))
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), Error> {
    let text = to_csv_string(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T, Error> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} '{s}'")))
}

fn parse_optional<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<Option<T>, Error> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(line, name, s).map(Some)
    }
}

/// Parses text produced by [`to_csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, Error> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((_, h)) => return Err(Error::Parse(format!("unexpected header '{h}'"))),
        None => return Err(Error::EmptySweep),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != COLUMNS {
            return Err(Error::Parse(format!("line {n}: expected {COLUMNS} fields, got {}", f.len())));
        }
        rows.push(SweepRow {
            policy: f[0].parse()?,
            rho1: parse_field(n, "rho1", f[1])?,
            rho2: parse_field(n, "rho2", f[2])?,
            mu: parse_field(n, "mu", f[3])?,
            delta1: parse_field(n, "delta1", f[4])?,
            delta2: parse_field(n, "delta2", f[5])?,
            sum_aoi: parse_field(n, "sum_aoi", f[6])?,
            jain: parse_field(n, "jain", f[7])?,
            method: f[8].parse()?,
            ci_low: parse_optional(n, "ci_low", f[9])?,
            ci_high: parse_optional(n, "ci_high", f[10])?,
            seed: parse_optional(n, "seed", f[11])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
