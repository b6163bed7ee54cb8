//! CSV formats shared with the command line tool. Floats are written with
//! 17 significant digits so every file parses back to the same values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex;

use crate::dynamics::WordStats;
use crate::eig::ScanRow;
use crate::error::{Error, Result};
use crate::kernels::{Autocorrelation, KernelLimitRow, Normalization};
use crate::measures::{Atom, SpectralMeasure, TrigPolynomial};
use crate::scalar::Real;

pub const COEFFICIENT_HEADER: [&str; 3] = ["k", "re", "im"];
pub const ATOM_HEADER: [&str; 2] = ["location", "mass"];
pub const GRID_HEADER: [&str; 2] = ["x", "value"];
pub const WORD_HEADER: [&str; 3] = ["word", "count", "frequency"];
pub const SCAN_HEADER: [&str; 5] = ["N", "lambda_min", "residual", "iterations", "converged"];
pub const LIMIT_HEADER: [&str; 5] = ["j", "location", "predicted", "empirical", "pass"];
pub const AUTOCORRELATION_HEADER: [&str; 2] = ["k", "gamma"];

/// `x` with 17 significant digits.
pub fn fmt_float<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn parse_float<T: Real>(field: &str, line: u64) -> Result<T> {
    field.trim().parse::<f64>().map(T::lit).map_err(|_| Error::Parse(format!("line {line}: {field:?} is not a number")))
}

fn parse_int<I: std::str::FromStr>(field: &str, line: u64) -> Result<I> {
    field.trim().parse::<I>().map_err(|_| Error::Parse(format!("line {line}: {field:?} is not an integer")))
}

fn parse_bool(field: &str, line: u64) -> Result<bool> {
    match field.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::Parse(format!("line {line}: {other:?} is not a boolean"))),
    }
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// Reads all data rows after checking the header.
fn records<R: Read>(input: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse(format!("expected header {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::Parse(format!("line {line}: expected {} fields, found {}", header.len(), rec.len())));
        }
        rows.push((line, rec));
    }
    Ok(rows)
}

/// Coefficient rows `k, re, im`, sorted by `k`.
pub fn write_coefficients<W: Write, T: Real>(
    out: W,
    coeffs: impl IntoIterator<Item = (i64, Complex<T>)>,
) -> Result<()> {
    let mut w = writer(out, &COEFFICIENT_HEADER)?;
    for (k, c) in coeffs {
        w.write_record([k.to_string(), fmt_float(c.re), fmt_float(c.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Coefficient rows as a map; repeated frequencies are rejected.
pub fn read_coefficients<R: Read, T: Real>(input: R) -> Result<BTreeMap<i64, Complex<T>>> {
    let mut map = BTreeMap::new();
    for (line, rec) in records(input, &COEFFICIENT_HEADER)? {
        let k: i64 = parse_int(&rec[0], line)?;
        let c = Complex::new(parse_float(&rec[1], line)?, parse_float(&rec[2], line)?);
        if map.insert(k, c).is_some() {
            return Err(Error::Parse(format!("line {line}: frequency {k} appears twice")));
        }
    }
    Ok(map)
}

pub fn write_measure<W: Write, T: Real>(out: W, mu: &SpectralMeasure<T>) -> Result<()> {
    match mu {
        SpectralMeasure::Trig(t) => write_coefficients(out, t.iter()),
        SpectralMeasure::Atomic(atoms) => write_atoms(out, atoms),
    }
}

/// Reads Fourier coefficients into a trigonometric measure.
pub fn read_measure<R: Read, T: Real>(input: R) -> Result<SpectralMeasure<T>> {
    let map = read_coefficients(input)?;
    if map.is_empty() {
        return Err(Error::Parse("coefficient file has no rows".into()));
    }
    Ok(SpectralMeasure::from_map(&map))
}

pub fn write_polynomial<W: Write, T: Real>(out: W, p: &TrigPolynomial<T>) -> Result<()> {
    write_coefficients(out, p.iter())
}

pub fn read_polynomial<R: Read, T: Real>(input: R) -> Result<TrigPolynomial<T>> {
    Ok(TrigPolynomial::new(read_coefficients(input)?))
}

pub fn write_atoms<W: Write, T: Real>(out: W, atoms: &[Atom<T>]) -> Result<()> {
    let mut w = writer(out, &ATOM_HEADER)?;
    for a in atoms {
        w.write_record([fmt_float(a.location), fmt_float(a.mass)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_atoms<R: Read, T: Real>(input: R) -> Result<Vec<Atom<T>>> {
    records(input, &ATOM_HEADER)?
        .into_iter()
        .map(|(line, rec)| Ok(Atom { location: parse_float(&rec[0], line)?, mass: parse_float(&rec[1], line)? }))
        .collect()
}

pub fn write_grid<W: Write, T: Real>(out: W, samples: &[(T, T)]) -> Result<()> {
    let mut w = writer(out, &GRID_HEADER)?;
    for &(x, v) in samples {
        w.write_record([fmt_float(x), fmt_float(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read, T: Real>(input: R) -> Result<Vec<(T, T)>> {
    records(input, &GRID_HEADER)?
        .into_iter()
        .map(|(line, rec)| Ok((parse_float(&rec[0], line)?, parse_float(&rec[1], line)?)))
        .collect()
}

pub fn write_word_stats<W: Write>(out: W, stats: &WordStats) -> Result<()> {
    let mut w = writer(out, &WORD_HEADER)?;
    for (word, &count) in &stats.counts {
        w.write_record([word.clone(), count.to_string(), fmt_float(stats.frequency(word))])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `(word, count, frequency)`.
pub fn read_word_stats<R: Read>(input: R) -> Result<Vec<(String, u64, f64)>> {
    records(input, &WORD_HEADER)?
        .into_iter()
        .map(|(line, rec)| Ok((rec[0].to_string(), parse_int(&rec[1], line)?, parse_float(&rec[2], line)?)))
        .collect()
}

pub fn write_scan<W: Write, T: Real>(out: W, rows: &[ScanRow<T>]) -> Result<()> {
    let mut w = writer(out, &SCAN_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_float(r.lambda_min),
            fmt_float(r.residual),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Scan rows; the operator dimension is not stored and reads back as 0.
pub fn read_scan<R: Read, T: Real>(input: R) -> Result<Vec<ScanRow<T>>> {
    records(input, &SCAN_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(ScanRow {
                n: parse_int(&rec[0], line)?,
                dim: 0,
                lambda_min: parse_float(&rec[1], line)?,
                residual: parse_float(&rec[2], line)?,
                iterations: parse_int(&rec[3], line)?,
                converged: parse_bool(&rec[4], line)?,
            })
        })
        .collect()
}

pub fn write_limit_report<W: Write, T: Real>(out: W, rows: &[KernelLimitRow<T>]) -> Result<()> {
    let mut w = writer(out, &LIMIT_HEADER)?;
    for r in rows {
        w.write_record([
            r.j.to_string(),
            fmt_float(r.location),
            fmt_float(r.predicted),
            fmt_float(r.empirical),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_limit_report<R: Read, T: Real>(input: R) -> Result<Vec<KernelLimitRow<T>>> {
    records(input, &LIMIT_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(KernelLimitRow {
                j: parse_int(&rec[0], line)?,
                location: parse_float(&rec[1], line)?,
                predicted: parse_float(&rec[2], line)?,
                empirical: parse_float(&rec[3], line)?,
                pass: parse_bool(&rec[4], line)?,
            })
        })
        .collect()
}

pub fn write_autocorrelation<W: Write, T: Real>(out: W, gamma: &Autocorrelation<T>) -> Result<()> {
    let mut w = writer(out, &AUTOCORRELATION_HEADER)?;
    for (k, &g) in gamma.values().iter().enumerate() {
        w.write_record([k.to_string(), fmt_float(g)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads lags `0..=L` in order.
pub fn read_autocorrelation<R: Read, T: Real>(input: R, normalization: Normalization) -> Result<Autocorrelation<T>> {
    let mut values = Vec::new();
    for (line, rec) in records(input, &AUTOCORRELATION_HEADER)? {
        let k: usize = parse_int(&rec[0], line)?;
        if k != values.len() {
            return Err(Error::Parse(format!("line {line}: expected lag {}, found {k}", values.len())));
        }
        values.push(parse_float(&rec[1], line)?);
    }
    Autocorrelation::new(values, normalization)
}

/// Even real symbol from a coefficient file: `gamma(k) = Re mu_hat(k)` for
/// `k >= 0`, missing lags are zero. Fails when the input is not even and real.
pub fn symbol_from_coefficients<T: Real>(map: &BTreeMap<i64, Complex<T>>) -> Result<Autocorrelation<T>> {
    let top = map.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0) as usize;
    let mut values = vec![T::zero(); top + 1];
    let scale = map.values().map(|c| c.norm()).fold(T::zero(), T::max);
    let tol = T::lit(1e-12) * scale;
    for (&k, &c) in map {
        let mirror = map.get(&-k).copied().unwrap_or_default();
        if num_traits::Float::abs(c.im) > tol || (c - mirror).norm() > tol {
            return Err(Error::InvalidArgument(format!("symbol is not even and real at k = {k}")));
        }
        values[k.unsigned_abs() as usize] = c.re;
    }
    Autocorrelation::new(values, Normalization::Kernel)
}
