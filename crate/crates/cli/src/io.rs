//! Series files (text or `MMDSIG01` binary) and CSV tables.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 8] = b"MMDSIG01";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Text,
    Binary,
}

impl SeriesFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SeriesFormat::Text => "txt",
            SeriesFormat::Binary => "bin",
        }
    }

    pub fn from_flag(binary: bool) -> Self {
        if binary {
            SeriesFormat::Binary
        } else {
            SeriesFormat::Text
        }
    }
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    if !path.exists() {
        return Err(CliError::Validation(format!("{} does not exist", path.display())));
    }
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Reads a series, detecting the binary format by its magic header.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(MAGIC) {
        return decode_binary(&bytes[MAGIC.len()..]).map_err(|m| CliError::Parse(format!("{}: {m}", path.display())));
    }
    let text = String::from_utf8(bytes).map_err(|_| CliError::Parse(format!("{}: not UTF-8 text", path.display())))?;
    parse_text(&text).map_err(|m| CliError::Parse(format!("{}: {m}", path.display())))
}

fn decode_binary(body: &[u8]) -> Result<Vec<f64>, String> {
    if body.len() % 8 != 0 {
        return Err(format!("binary payload of {} bytes is not a whole number of f64", body.len()));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// One value per line; blank lines are skipped.
pub fn parse_text(text: &str) -> Result<Vec<f64>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| format!("line {}: {e}", i + 1))
        })
        .collect()
}

pub fn encode_text(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        out.push_str(&format!("{v:e}\n"));
    }
    out
}

pub fn encode_binary(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(MAGIC.len() + 8 * values.len());
    out.extend_from_slice(MAGIC);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_series(path: &Path, values: &[f64], format: SeriesFormat) -> CliResult<()> {
    let bytes = match format {
        SeriesFormat::Text => encode_text(values).into_bytes(),
        SeriesFormat::Binary => encode_binary(values),
    };
    write_file(path, &bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes a CSV table with a one-line header.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let wrap = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Parse(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads every row of a CSV table into `T`.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let bytes = read_bytes(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| CliError::Parse(format!("{} row {}: {e}", path.display(), i + 1))))
        .collect()
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}
