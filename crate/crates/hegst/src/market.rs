//! Matrix Market file exchange for dense matrices: array and coordinate
//! formats, real and complex fields, general/symmetric/hermitian symmetry.
//! Symmetric storage holds the lower triangle; reading mirrors it into the
//! full square buffer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::triangular::HermitianMatrix;

/// A parsed file: the field is decided by the banner.
pub enum MarketMatrix {
    Real(DenseMatrix<f64>),
    Complex(DenseMatrix<Complex64>),
}

impl MarketMatrix {
    pub fn rows(&self) -> usize {
        match self {
            MarketMatrix::Real(m) => m.rows(),
            MarketMatrix::Complex(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            MarketMatrix::Real(m) => m.cols(),
            MarketMatrix::Complex(m) => m.cols(),
        }
    }

    /// Promote to a complex matrix regardless of the stored field.
    pub fn to_complex(&self) -> DenseMatrix<Complex64> {
        match self {
            MarketMatrix::Complex(m) => m.clone(),
            MarketMatrix::Real(m) => {
                let mut out = DenseMatrix::zeros(m.rows(), m.cols());
                for j in 0..m.cols() {
                    for i in 0..m.rows() {
                        out.set(i, j, Complex64::new(m.at(i, j), 0.0));
                    }
                }
                out
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

pub fn read_matrix_market(path: &Path) -> Result<MarketMatrix> {
    let file = File::open(path)?;
    read_matrix_market_from(BufReader::new(file))
}

pub fn read_matrix_market_from(reader: impl BufRead) -> Result<MarketMatrix> {
    let mut lines = reader.lines();
    let banner = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let tokens: Vec<String> = banner.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() < 4 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad banner: {banner}")));
    }
    let format = match tokens[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(Error::Parse(format!("unsupported format: {other}"))),
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(Error::Parse(format!("unsupported field: {other}"))),
    };
    let symmetry = match tokens.get(4).map(|s| s.as_str()).unwrap_or("general") {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(Error::Parse(format!("unsupported symmetry: {other}"))),
    };

    // Data lines with comments and blanks stripped.
    let mut data_lines = Vec::new();
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        data_lines.push(trimmed.to_string());
    }
    let mut it = data_lines.iter();
    let size_line = it
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
        .collect::<Result<_>>()?;

    match field {
        Field::Complex => {
            let m = read_entries::<Complex64>(format, symmetry, &sizes, it)?;
            Ok(MarketMatrix::Complex(m))
        }
        _ => {
            let m = read_entries::<f64>(format, symmetry, &sizes, it)?;
            Ok(MarketMatrix::Real(m))
        }
    }
}

trait MarketScalar: Scalar {
    /// Number of floating-point tokens per value.
    const WIDTH: usize;
    fn parse_tokens(tokens: &[&str]) -> std::result::Result<Self, String>;
}

impl MarketScalar for f64 {
    const WIDTH: usize = 1;

    fn parse_tokens(tokens: &[&str]) -> std::result::Result<Self, String> {
        tokens[0].parse::<f64>().map_err(|e| e.to_string())
    }
}

impl MarketScalar for Complex64 {
    const WIDTH: usize = 2;

    fn parse_tokens(tokens: &[&str]) -> std::result::Result<Self, String> {
        let re = tokens[0].parse::<f64>().map_err(|e| e.to_string())?;
        let im = tokens[1].parse::<f64>().map_err(|e| e.to_string())?;
        Ok(Complex64::new(re, im))
    }
}

fn read_entries<'a, T: MarketScalar>(
    format: Format,
    symmetry: Symmetry,
    sizes: &[usize],
    mut it: std::slice::Iter<'a, String>,
) -> Result<DenseMatrix<T>> {
    let mirror = |m: &mut DenseMatrix<T>, i: usize, j: usize, v: T| {
        m.set(i, j, v);
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m.set(j, i, v),
                Symmetry::Hermitian => m.set(j, i, v.conj()),
            }
        }
    };
    match format {
        Format::Array => {
            if sizes.len() != 2 {
                return Err(Error::Parse("array size line must be 'rows cols'".into()));
            }
            let (rows, cols) = (sizes[0], sizes[1]);
            let mut m = DenseMatrix::zeros(rows, cols);
            let mut values = Vec::new();
            for line in it.by_ref() {
                for tok in line.split_whitespace() {
                    values.push(tok);
                }
            }
            let mut pos = 0;
            let take = |pos: &mut usize| -> Result<T> {
                if *pos + T::WIDTH > values.len() {
                    return Err(Error::Parse("too few array entries".into()));
                }
                let v = T::parse_tokens(&values[*pos..*pos + T::WIDTH])
                    .map_err(Error::Parse)?;
                *pos += T::WIDTH;
                Ok(v)
            };
            match symmetry {
                Symmetry::General => {
                    for j in 0..cols {
                        for i in 0..rows {
                            let v = take(&mut pos)?;
                            m.set(i, j, v);
                        }
                    }
                }
                _ => {
                    if rows != cols {
                        return Err(Error::Parse("symmetric array must be square".into()));
                    }
                    for j in 0..cols {
                        for i in j..rows {
                            let v = take(&mut pos)?;
                            mirror(&mut m, i, j, v);
                        }
                    }
                }
            }
            Ok(m)
        }
        Format::Coordinate => {
            if sizes.len() != 3 {
                return Err(Error::Parse(
                    "coordinate size line must be 'rows cols nnz'".into(),
                ));
            }
            let (rows, cols, nnz) = (sizes[0], sizes[1], sizes[2]);
            let mut m = DenseMatrix::zeros(rows, cols);
            let mut seen = 0;
            for line in it.by_ref() {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != 2 + T::WIDTH {
                    return Err(Error::Parse(format!("bad coordinate entry: {line}")));
                }
                let i: usize = tokens[0]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let j: usize = tokens[1]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("entry out of range: {line}")));
                }
                let v = T::parse_tokens(&tokens[2..]).map_err(Error::Parse)?;
                mirror(&mut m, i - 1, j - 1, v);
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
            }
            Ok(m)
        }
    }
}

/// Write a full dense matrix in array/general format.
pub fn write_dense<T: Scalar>(path: &Path, m: &DenseMatrix<T>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_dense_to(&mut w, m)
}

pub fn write_dense_to<T: Scalar>(w: &mut impl Write, m: &DenseMatrix<T>) -> Result<()> {
    let field = field_name::<T>();
    writeln!(w, "%%MatrixMarket matrix array {field} general")?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(w, "{}", format_scalar(m.at(i, j)))?;
        }
    }
    Ok(())
}

/// Write a Hermitian matrix in array format with lower-triangle storage
/// (symmetric for real data, hermitian for complex).
pub fn write_hermitian_lower<T: Scalar>(path: &Path, h: &HermitianMatrix<T>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_hermitian_lower_to(&mut w, h)
}

pub fn write_hermitian_lower_to<T: Scalar>(w: &mut impl Write, h: &HermitianMatrix<T>) -> Result<()> {
    let field = field_name::<T>();
    let symmetry = if field == "complex" { "hermitian" } else { "symmetric" };
    let n = h.dim();
    writeln!(w, "%%MatrixMarket matrix array {field} {symmetry}")?;
    writeln!(w, "{n} {n}")?;
    for j in 0..n {
        for i in j..n {
            let v = if i == j {
                T::from_re(h.base().at(i, j).re())
            } else {
                h.base().at(i, j)
            };
            writeln!(w, "{}", format_scalar(v))?;
        }
    }
    Ok(())
}

fn field_name<T: Scalar>() -> &'static str {
    if T::FIELD_NAME == "complex" {
        "complex"
    } else {
        "real"
    }
}

fn format_scalar<T: Scalar>(v: T) -> String {
    if T::FIELD_NAME == "complex" {
        format!("{:?} {:?}", v.re(), v.im())
    } else {
        format!("{:?}", v.re())
    }
}
