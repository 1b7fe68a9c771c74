//! File formats: text matrices and vectors (`CMAT` / `CVEC`), the raw binary
//! `CMATB` variant and `SCHMIDT-TERMS` term files.
//!
//! Text numbers are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix, ComplexVector};
use crate::tree::{Decomposition, DecompositionMode, PathTerm, ThresholdSpec};

pub const CMATB_MAGIC: &[u8; 8] = b"CMATB\0\0\x01";

/// Contents of a matrix or vector file.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Matrix(ComplexMatrix),
    Vector(ComplexVector),
}

impl Payload {
    /// Flattened row-major data.
    pub fn into_vector(self) -> ComplexVector {
        match self {
            Payload::Matrix(m) => crate::linalg::vec(&m),
            Payload::Vector(v) => v,
        }
    }
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `a`, `a+bi` or `a-bi`.
pub fn format_complex(z: Complex) -> String {
    if z.im == 0.0 {
        format_real(z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{sign}{}i", format_real(z.re), format_real(z.im.abs()))
    }
}

fn bad_number(tok: &str) -> String {
    format!("bad complex number {tok:?}")
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(tok: &str) -> std::result::Result<Complex, String> {
    let finite = |x: f64| if x.is_finite() { Ok(x) } else { Err(bad_number(tok)) };
    let Some(body) = tok.strip_suffix('i') else {
        let re: f64 = tok.parse().map_err(|_| bad_number(tok))?;
        return Ok(Complex::new(finite(re)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "+" | "" => "1",
        "-" => "-1",
        s => s.strip_prefix('+').unwrap_or(s),
    };
    let re: f64 = re.parse().map_err(|_| bad_number(tok))?;
    let im: f64 = im.parse().map_err(|_| bad_number(tok))?;
    Ok(Complex::new(finite(re)?, finite(im)?))
}

fn write_values(out: &mut String, values: &[Complex], per_line: usize) {
    for row in values.chunks(per_line.max(1)) {
        let line: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

pub fn matrix_to_string(m: &ComplexMatrix) -> String {
    let mut out = format!("CMAT {} {}\n", m.rows(), m.cols());
    write_values(&mut out, m.data(), m.cols());
    out
}

pub fn vector_to_string(v: &ComplexVector) -> String {
    let mut out = format!("CVEC {}\n", v.dim());
    write_values(&mut out, v.data(), 1);
    out
}

pub fn write_matrix(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_string(m))?;
    Ok(())
}

pub fn write_vector(v: &ComplexVector, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, vector_to_string(v))?;
    Ok(())
}

pub fn matrix_to_bytes(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * m.data().len());
    out.extend_from_slice(CMATB_MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for z in m.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn write_matrix_binary(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_bytes(m))?;
    Ok(())
}

pub fn matrix_from_bytes(bytes: &[u8]) -> Result<ComplexMatrix> {
    let bad = |msg: &str| Error::parse(0, format!("CMATB: {msg}"));
    let header = bytes.get(..24).ok_or_else(|| bad("truncated header"))?;
    if &header[..8] != CMATB_MAGIC {
        return Err(bad("bad magic"));
    }
    let word = |k: usize| u64::from_le_bytes(header[k..k + 8].try_into().unwrap());
    let (rows, cols) = (word(8), word(16));
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| bad("size overflow"))?;
    let body = &bytes[24..];
    if body.len() != count {
        return Err(bad(&format!("expected {count} payload bytes, got {}", body.len())));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::new(rows as usize, cols as usize, data)
}

/// Parses a `CMAT` or `CVEC` text file.
pub fn parse_payload(text: &str) -> Result<Payload> {
    let mut header: Option<(usize, Vec<usize>)> = None;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if header.is_none() {
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let dims = |toks: &[&str]| {
                toks.iter()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::parse(line, format!("bad size {t:?}"))))
                    .collect::<Result<Vec<_>>>()
            };
            header = Some(match tokens.as_slice() {
                ["CMAT", r, c] => (line, dims(&[r, c])?),
                ["CVEC", d] => (line, dims(&[d])?),
                _ => return Err(Error::parse(line, "expected `CMAT <rows> <cols>` or `CVEC <dim>`")),
            });
            continue;
        }
        for tok in content.split_whitespace() {
            values.push(parse_complex(tok).map_err(|m| Error::parse(line, m))?);
        }
    }
    let (line, dims) = header.ok_or_else(|| Error::parse(1, "empty file"))?;
    let expected: usize = dims.iter().product();
    if values.len() != expected {
        return Err(Error::parse(
            line,
            format!("header promises {expected} values, found {}", values.len()),
        ));
    }
    match dims.as_slice() {
        [r, c] => Ok(Payload::Matrix(ComplexMatrix::new(*r, *c, values)?)),
        _ => Ok(Payload::Vector(ComplexVector::new(values)?)),
    }
}

/// Reads any of the three formats, detected from the first bytes.
pub fn read_payload(path: impl AsRef<Path>) -> Result<Payload> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(&CMATB_MAGIC[..5]) {
        return matrix_from_bytes(&bytes).map(Payload::Matrix);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::parse(0, "file is neither text nor CMATB"))?;
    parse_payload(&text)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    match read_payload(path)? {
        Payload::Matrix(m) => Ok(m),
        Payload::Vector(v) => Err(Error::InvalidArgument(format!(
            "expected a matrix, found a vector of dim {}",
            v.dim()
        ))),
    }
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<ComplexVector> {
    Ok(read_payload(path)?.into_vector())
}

/// `SCHMIDT-TERMS` text: a header, then per term the coefficient followed by
/// every factor's components.
pub fn terms_to_string(d: &Decomposition) -> String {
    let mut out = format!(
        "SCHMIDT-TERMS mode={} factors={} terms={} norm={}\n",
        d.mode(),
        d.factor_count(),
        d.terms().len(),
        format_real(d.input_norm())
    );
    for t in d.terms() {
        out.push_str(&format_real(t.coefficient));
        for f in &t.factors {
            for z in f.data() {
                let _ = write!(out, " {}", format_complex(*z));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_terms(d: &Decomposition, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, terms_to_string(d))?;
    Ok(())
}

pub fn read_terms(path: impl AsRef<Path>) -> Result<Decomposition> {
    parse_terms(&std::fs::read_to_string(path)?)
}

/// Parses a term file. A complex coefficient has its phase moved into the
/// first factor.
pub fn parse_terms(text: &str) -> Result<Decomposition> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty term file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("SCHMIDT-TERMS") {
        return Err(Error::parse(hline, "expected SCHMIDT-TERMS header"));
    }
    let (mut mode, mut factors, mut count, mut norm) = (None, None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(hline, format!("bad header field {tok:?}")))?;
        let bad = || Error::parse(hline, format!("bad value for {key}: {value:?}"));
        match key {
            "mode" => mode = Some(value.parse::<DecompositionMode>().map_err(|_| bad())?),
            "factors" => factors = Some(value.parse::<usize>().map_err(|_| bad())?),
            "terms" => count = Some(value.parse::<usize>().map_err(|_| bad())?),
            "norm" => norm = Some(value.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0).ok_or_else(bad)?),
            _ => return Err(Error::parse(hline, format!("unknown header field {key:?}"))),
        }
    }
    let missing = |k| Error::parse(hline, format!("header lacks {k}="));
    let mode = mode.ok_or_else(|| missing("mode"))?;
    let n = factors.ok_or_else(|| missing("factors"))?;
    let count = count.ok_or_else(|| missing("terms"))?;
    let norm = norm.ok_or_else(|| missing("norm"))?;
    let radix = mode.radix();

    let mut terms = Vec::with_capacity(count);
    for (line, content) in lines {
        let values = content
            .split_whitespace()
            .map(|t| parse_complex(t).map_err(|m| Error::parse(line, m)))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 1 + n * radix {
            return Err(Error::parse(
                line,
                format!("expected {} numbers, got {}", 1 + n * radix, values.len()),
            ));
        }
        let coefficient = values[0];
        let magnitude = coefficient.norm();
        let phase = if magnitude > 0.0 { coefficient / magnitude } else { Complex::new(1.0, 0.0) };
        let factors = values[1..]
            .chunks(radix)
            .enumerate()
            .map(|(k, c)| {
                let data = if k == 0 { c.iter().map(|z| z * phase).collect() } else { c.to_vec() };
                ComplexVector::new(data)
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push(PathTerm {
            coefficient: magnitude,
            factors,
            path: Vec::new(),
        });
    }
    if terms.len() != count {
        return Err(Error::parse(
            hline,
            format!("header promises {count} terms, found {}", terms.len()),
        ));
    }
    Decomposition::from_terms(mode, norm, terms, ThresholdSpec::none())
}
