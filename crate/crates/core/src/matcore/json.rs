//! `{"dim": d, "re": [[...]], "im": [[...]]}` matrix files.

use serde::{Deserialize, Serialize};

use super::{CMat, C64};
use crate::error::{Error, Result};

/// Wire form of a dense complex matrix, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMat> for MatrixJson {
    fn from(m: &CMat) -> Self {
        let d = m.dim();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..d)
                .map(|i| (0..d).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: d,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<MatrixJson> for CMat {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<CMat> {
        let d = j.dim;
        if j.re.len() != d || j.im.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: j.re.len().min(j.im.len()),
            });
        }
        let mut data = Vec::with_capacity(d * d);
        for (r, i) in j.re.iter().zip(&j.im) {
            if r.len() != d || i.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len().min(i.len()),
                });
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        CMat::from_vec(d, data)
    }
}

fn write_rows(out: &mut String, m: &CMat, f: fn(&C64) -> f64) {
    let d = m.dim();
    out.push('[');
    for i in 0..d {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", f(&m[(i, j)])));
        }
        out.push(']');
    }
    out.push(']');
}

/// Serializes with 17 significant digits per entry.
pub fn matrix_to_json(m: &CMat) -> String {
    let mut out = format!("{{\"dim\":{},\"re\":", m.dim());
    write_rows(&mut out, m, |z| z.re);
    out.push_str(",\"im\":");
    write_rows(&mut out, m, |z| z.im);
    out.push('}');
    out
}

pub fn matrix_from_json(s: &str) -> Result<CMat> {
    let j: MatrixJson = serde_json::from_str(s)?;
    CMat::try_from(j)
}
