//! Plain-text tensor format.
//!
//! ```text
//! dims: 2 3
//! 1.0000000000000000e0 0.0000000000000000e0 ...
//! ```
//!
//! Values follow the dims line in storage order (last index fastest),
//! separated by arbitrary whitespace.

use std::io::{BufRead, Write};

use super::dense::{DenseTensor, Shape};
use crate::error::{Error, Result};

/// Values written per line; purely cosmetic.
const VALUES_PER_LINE: usize = 8;

pub fn write_tnsr<W: Write>(tensor: &DenseTensor, mut out: W) -> Result<()> {
    let dims: Vec<String> = tensor.dims().iter().map(|n| n.to_string()).collect();
    writeln!(out, "dims: {}", dims.join(" "))?;
    for chunk in tensor.values().chunks(VALUES_PER_LINE) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_tnsr<R: BufRead>(input: R) -> Result<DenseTensor> {
    let mut lines = input.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Parse("empty tensor file".into())),
        }
    };
    let rest = header
        .trim()
        .strip_prefix("dims:")
        .ok_or_else(|| Error::Parse(format!("expected 'dims:' header, found {header:?}")))?;
    let dims = rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad extent {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let shape = Shape::new(dims)?;
    let expected = shape.numel()?;
    let mut values = Vec::with_capacity(expected);
    for line in lines {
        for tok in line?.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad value {tok:?}")))?;
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} values, found {}",
            values.len()
        )));
    }
    DenseTensor::new(shape, values)
}

pub fn save_tnsr(tensor: &DenseTensor, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_tnsr(tensor, std::io::BufWriter::new(file))
}

pub fn load_tnsr(path: &std::path::Path) -> Result<DenseTensor> {
    let file = std::fs::File::open(path)?;
    read_tnsr(std::io::BufReader::new(file))
}
