//! Matrix Market exchange format for dense complex matrices.
//!
//! Reading accepts `array` and `coordinate` layouts with `real`, `integer`
//! or `complex` fields and `general`, `symmetric`, `hermitian` or
//! `skew-symmetric` symmetry. Writing emits `coordinate complex general`
//! (or `hermitian` on request), skipping exact zeros.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

pub fn read_matrix<T: Real>(path: impl AsRef<Path>) -> Result<CMatrix<T>> {
    parse(&fs::read_to_string(path)?)
}

pub fn parse<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(bad(format!("unrecognised header: {header}")));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(bad(format!("unsupported layout {other}"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(bad(format!("unsupported field {other}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(bad(format!("unsupported symmetry {other}"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(bad("hermitian symmetry requires a complex field"));
    }

    let mut data = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = data.next().ok_or_else(|| bad("missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| bad(format!("bad size line: {size_line}")))
        })
        .collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, sizes.as_slice()) {
        (true, [r, c, _]) | (false, [r, c]) => (*r, *c),
        _ => return Err(bad(format!("bad size line: {size_line}"))),
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(bad("symmetric storage requires a square matrix"));
    }

    let parse_num = |t: &str| -> Result<T> {
        let x: f64 = t.parse().map_err(|_| bad(format!("bad number {t}")))?;
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(T::lit(x))
    };
    let parse_value = |parts: &[&str]| -> Result<Complex<T>> {
        match (field, parts) {
            (Field::Real, [re]) => Ok(Complex::new(parse_num(re)?, T::zero())),
            (Field::Complex, [re, im]) => Ok(Complex::new(parse_num(re)?, parse_num(im)?)),
            _ => Err(bad(format!("wrong number of values: {}", parts.join(" ")))),
        }
    };

    let mut m = CMatrix::<T>::zeros(rows, cols);
    let mut set = |i: usize, j: usize, v: Complex<T>| {
        m[(i, j)] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::Hermitian => m[(j, i)] = v.conj(),
                Symmetry::SkewSymmetric => m[(j, i)] = -v,
            }
        }
    };

    if coordinate {
        let nnz = sizes[2];
        for _ in 0..nnz {
            let line = data
                .next()
                .ok_or_else(|| bad("fewer entries than declared"))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() < 3 {
                return Err(bad(format!("bad entry line: {line}")));
            }
            let i: usize = parts[0]
                .parse()
                .map_err(|_| bad(format!("bad index in {line}")))?;
            let j: usize = parts[1]
                .parse()
                .map_err(|_| bad(format!("bad index in {line}")))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(bad(format!("index out of range in {line}")));
            }
            set(i - 1, j - 1, parse_value(&parts[2..])?);
        }
    } else {
        // Column-major; symmetric variants store only the lower triangle.
        for j in 0..cols {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::SkewSymmetric => j + 1,
                _ => j,
            };
            for i in start..rows {
                let line = data
                    .next()
                    .ok_or_else(|| bad("fewer entries than declared"))?;
                let parts: Vec<&str> = line.split_whitespace().collect();
                set(i, j, parse_value(&parts)?);
            }
        }
    }
    if data.next().is_some() {
        return Err(bad("more entries than declared"));
    }
    Ok(m)
}

/// Serialize `m`. With `hermitian = true` only the lower triangle is
/// written; the caller is responsible for `m` actually being Hermitian.
pub fn format_matrix<T: Real>(m: &CMatrix<T>, hermitian: bool) -> String {
    let mut entries = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if hermitian && i < j {
                continue;
            }
            let z = m[(i, j)];
            if z.re != T::zero() || z.im != T::zero() {
                entries.push(format!(
                    "{} {} {:e} {:e}",
                    i + 1,
                    j + 1,
                    z.re.as_f64(),
                    z.im.as_f64()
                ));
            }
        }
    }
    let sym = if hermitian { "hermitian" } else { "general" };
    let mut out = format!("%%MatrixMarket matrix coordinate complex {sym}\n");
    out.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), entries.len()));
    for e in entries {
        out.push_str(&e);
        out.push('\n');
    }
    out
}

pub fn write_matrix<T: Real>(
    path: impl AsRef<Path>,
    m: &CMatrix<T>,
    hermitian: bool,
) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix(m, hermitian).as_bytes())?;
    Ok(())
}
