//! Matrix Market I/O for symmetric matrices and the CSV-to-covariance
//! pipeline for tabular data.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SymMatrix;

/// On-disk layout of a matrix file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    MatrixMarketCoordinate,
    MatrixMarketArray,
    CensusCsv,
}

/// Where to load a matrix from and how.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSource {
    pub path: PathBuf,
    pub format: MatrixFormat,
    /// Replace a general matrix by `(M + M^T) / 2` instead of rejecting it.
    #[serde(default)]
    pub symmetrize: bool,
}

impl MatrixSource {
    /// Guesses the format from the extension (`.csv` or Matrix Market).
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::CensusCsv,
            _ => MatrixFormat::MatrixMarketCoordinate,
        };
        Self {
            path,
            format,
            symmetrize: false,
        }
    }

    pub fn load(&self) -> Result<SymMatrix> {
        match self.format {
            MatrixFormat::CensusCsv => census_covariance(&self.path),
            MatrixFormat::MatrixMarketCoordinate | MatrixFormat::MatrixMarketArray => {
                read_matrix_market_with(&self.path, self.symmetrize)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Reads a real symmetric Matrix Market file (coordinate or array).
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SymMatrix> {
    read_matrix_market_with(path, false)
}

/// Reads a Matrix Market file; general matrices are symmetrized on request.
pub fn read_matrix_market_with(path: impl AsRef<Path>, symmetrize: bool) -> Result<SymMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, symmetrize)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses Matrix Market text.
pub fn parse_matrix_market(text: &str, symmetrize: bool) -> Result<SymMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "missing '%%MatrixMarket matrix' banner"));
    }
    let layout = match fields[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown layout '{other}'"))),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(1, format!("non-real field '{other}'"))),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let expected = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(size_line, "wrong number of size fields"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows != cols {
        return Err(parse_err(size_line, format!("dimension mismatch: {rows}x{cols}")));
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    let n = rows;
    let mut m = Mat::<f64>::zeros(n, n);

    let parse_value = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| parse_err(line, format!("bad value '{t}'")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(line, "non-finite value"))
        }
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0usize;
            for (ln, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(parse_err(ln, "expected 'row col value'"));
                }
                let idx = |s: &str| -> Result<usize> {
                    let i: usize = s.parse().map_err(|_| parse_err(ln, format!("bad index '{s}'")))?;
                    if i == 0 || i > n {
                        Err(parse_err(ln, format!("index {i} outside 1..={n}")))
                    } else {
                        Ok(i - 1)
                    }
                };
                let (i, j, v) = (idx(t[0])?, idx(t[1])?, parse_value(ln, t[2])?);
                m.write(i, j, m.read(i, j) + v);
                if symmetry == Symmetry::Symmetric && i != j {
                    m.write(j, i, m.read(j, i) + v);
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            let mut values = Vec::new();
            for (ln, l) in data {
                for t in l.split_whitespace() {
                    values.push(parse_value(ln, t)?);
                }
            }
            let want = match symmetry {
                Symmetry::Symmetric => n * (n + 1) / 2,
                Symmetry::General => n * n,
            };
            if values.len() != want {
                return Err(parse_err(
                    size_line,
                    format!("expected {want} values, found {}", values.len()),
                ));
            }
            let mut it = values.into_iter();
            for j in 0..n {
                let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                for i in start..n {
                    let v = it.next().unwrap_or(0.0);
                    m.write(i, j, v);
                    if symmetry == Symmetry::Symmetric {
                        m.write(j, i, v);
                    }
                }
            }
        }
    }

    if symmetry == Symmetry::General && symmetrize {
        Ok(SymMatrix::symmetrized(m.as_ref()))
    } else {
        SymMatrix::new(m)
    }
}

/// Writes the lower triangle in array layout with 17 significant digits.
pub fn write_matrix_market(m: &SymMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = m.n();
    writeln!(w, "%%MatrixMarket matrix array real symmetric")?;
    writeln!(w, "{n} {n}")?;
    for j in 0..n {
        for i in j..n {
            writeln!(w, "{:.16e}", m.get(i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a diagonal matrix in coordinate layout (non-zero entries only).
pub fn write_diagonal_matrix_market(diag: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = diag.len();
    let nnz = diag.iter().filter(|&&v| v != 0.0).count();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {nnz}")?;
    for (i, &v) in diag.iter().enumerate() {
        if v != 0.0 {
            writeln!(w, "{} {} {:.16e}", i + 1, i + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sample covariance (mean-centered, divisor `m - 1`) of a CSV table after
/// dropping the header row and the leading index column. Fields that do not
/// parse as numbers count as 0.
pub fn census_covariance(csv_path: impl AsRef<Path>) -> Result<SymMatrix> {
    let reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(csv_path)?;
    covariance_from_reader(reader)
}

/// As [`census_covariance`], from in-memory CSV text.
pub fn census_covariance_from_str(text: &str) -> Result<SymMatrix> {
    let reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    covariance_from_reader(reader)
}

fn covariance_from_reader<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<SymMatrix> {
    let mut d = 0usize;
    let mut m = 0usize;
    // Shifted accumulation (by the first row) keeps cancellation small.
    let mut shift: Vec<f64> = Vec::new();
    let mut sum: Vec<f64> = Vec::new();
    let mut cross: Vec<f64> = Vec::new();
    let mut row = Vec::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        if m == 0 {
            d = record.len().saturating_sub(1);
            if d == 0 {
                return Err(Error::InvalidArgument(
                    "CSV has no data columns after the index column".into(),
                ));
            }
            shift = vec![0.0; d];
            sum = vec![0.0; d];
            cross = vec![0.0; d * (d + 1) / 2];
            row = vec![0.0; d];
        }
        for (c, field) in record.iter().skip(1).enumerate() {
            let v = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .unwrap_or(0.0);
            if m == 0 {
                shift[c] = v;
            }
            row[c] = v - shift[c];
        }
        let mut at = 0;
        for i in 0..d {
            sum[i] += row[i];
            for j in i..d {
                cross[at] += row[i] * row[j];
                at += 1;
            }
        }
        m += 1;
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 data rows, found {m}")));
    }
    let mf = m as f64;
    let offset = |i: usize, j: usize| i * d - i * (i + 1) / 2 + j;
    Ok(SymMatrix::from_upper(d, |i, j| {
        (cross[offset(i, j)] - sum[i] * sum[j] / mf) / (mf - 1.0)
    }))
}
