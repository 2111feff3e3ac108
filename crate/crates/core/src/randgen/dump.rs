//! Sample dumps: one JSON header line, then little-endian `f64` matrices.
//!
//! Each matrix is `dim²` complex entries in row-major order, real part
//! first. Scalar observables go to a separate CSV file.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{CMat, C64};

pub const DUMP_FORMAT: &str = "qmap-samples/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format: String,
    pub body: String,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub chains: usize,
    /// `"hit-and-run"` or `"induced"`; induced ensembles are not uniform.
    pub measure: String,
}

impl DumpHeader {
    pub fn new(body: impl Into<String>, dim: usize, count: usize, seed: u64) -> Self {
        Self {
            format: DUMP_FORMAT.to_string(),
            body: body.into(),
            dim,
            count,
            seed,
            chains: 1,
            measure: "hit-and-run".to_string(),
        }
    }
}

pub fn write_sample_dump(
    out: &mut impl Write,
    header: &DumpHeader,
    samples: &[CMat],
) -> Result<()> {
    if samples.len() != header.count {
        return Err(Error::InvalidParams(format!(
            "header announces {} samples, got {}",
            header.count,
            samples.len()
        )));
    }
    serde_json::to_writer(&mut *out, header)?;
    out.write_all(b"\n")?;
    for m in samples {
        if m.dim() != header.dim {
            return Err(Error::DimensionMismatch {
                expected: header.dim,
                got: m.dim(),
            });
        }
        for z in m.data() {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_sample_dump(input: &mut impl BufRead) -> Result<(DumpHeader, Vec<CMat>)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader = serde_json::from_str(line.trim_end())?;
    if header.format != DUMP_FORMAT {
        return Err(Error::InvalidParams(format!(
            "unknown dump format {}",
            header.format
        )));
    }
    let d = header.dim;
    let mut buf = vec![0u8; 16 * d * d];
    let mut out = Vec::with_capacity(header.count);
    for _ in 0..header.count {
        input.read_exact(&mut buf)?;
        let data: Vec<C64> = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect();
        out.push(CMat::from_vec(d, data)?);
    }
    Ok((header, out))
}

/// One row per sample, one column per observable.
pub fn write_sample_csv(out: impl Write, names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names).map_err(csv_err)?;
    for r in rows {
        if r.len() != names.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: r.len(),
            });
        }
        w.write_record(r.iter().map(|v| format!("{v:e}")))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
