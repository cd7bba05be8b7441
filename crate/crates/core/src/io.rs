//! CSV files for sampled functions and certificate tables.
//!
//! Numbers are written with 17 significant digits (`%.17g`), enough to
//! reproduce every `f64` exactly when read back.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::stability::StabilityCertificate;
use crate::timescale::{Grid, TOL_MEMBER};

/// Formats like C's `%.17g`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let trim = |s: &str| s.trim_end_matches('0').to_string();

    if !(-5..17).contains(&exp) {
        let rest = trim(&digits[1..]);
        let dot = if rest.is_empty() { "" } else { "." };
        format!("{sign}{}{dot}{rest}e{exp:+03}", &digits[..1])
    } else if exp >= 0 {
        let split = exp as usize + 1;
        let frac = trim(&digits[split..]);
        let dot = if frac.is_empty() { "" } else { "." };
        format!("{sign}{}{dot}{frac}", &digits[..split])
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", trim(&digits))
    }
}

/// Writes `t,value` rows.
pub fn write_grid_function<W: Write>(out: W, g: &GridFunction) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    for (t, v) in g.iter() {
        w.write_record([fmt_f64(t), fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `t,value` rows; the `t` column must reproduce the grid within
/// [`TOL_MEMBER`].
pub fn read_grid_function<R: Read>(input: R, grid: Arc<Grid>) -> Result<GridFunction> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
        return Err(Error::Invalid(format!(
            "expected header `t,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let parse = |field: &str| -> Result<f64> {
            field
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("row {}: `{field}` is not a number", row + 1)))
        };
        let t = parse(&record[0])?;
        let v = parse(&record[1])?;
        match grid.points().get(row) {
            Some(&expected) if (expected - t).abs() <= TOL_MEMBER => values.push(v),
            Some(&expected) => {
                return Err(Error::GridMismatch(format!(
                    "row {} has t = {t}, grid point is {expected}",
                    row + 1
                )))
            }
            None => {
                return Err(Error::GridMismatch(format!(
                    "more rows than the {} grid points",
                    grid.len()
                )))
            }
        }
    }
    GridFunction::new(grid, values)
}

/// Writes `t,deviation,bound,margin` rows for a certificate.
pub fn write_certificate_table<W: Write>(out: W, cert: &StabilityCertificate) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "deviation", "bound", "margin"])?;
    let rows = cert
        .deviations
        .iter()
        .zip(cert.bounds.values())
        .zip(cert.margins.values());
    for (((t, d), b), m) in rows {
        w.write_record([fmt_f64(t), fmt_f64(d), fmt_f64(*b), fmt_f64(*m)])?;
    }
    w.flush()?;
    Ok(())
}
