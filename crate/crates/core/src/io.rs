//! On-disk formats for matrices and tensors.
//!
//! Text matrix `.dmt`: line 1 is the literal `DMT1`, line 2 is
//! `rows cols`, then `rows` lines of `cols` space-separated decimal floats
//! printed with 17 significant digits (lossless for f64). Binary matrix
//! `.dmb`: magic bytes `DMB1`, `rows` and `cols` as unsigned 64-bit
//! little-endian, then `rows*cols` IEEE-754 binary64 little-endian values
//! in column-major order. Tensor `.dtt`/`.dtb` mirror those with three
//! dimensions and the mode-1 linearization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::Tensor3;

fn fmt_err(path: &Path, format: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        format,
        reason: reason.into(),
    }
}

fn write_float(out: &mut impl Write, v: f64) -> std::io::Result<()> {
    // 17 significant digits: exact round trip for every finite f64
    write!(out, "{v:.16e}")
}

fn parse_float(tok: &str, path: &Path, format: &'static str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| fmt_err(path, format, format!("bad float literal {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("{}: entry {tok:?}", path.display())));
    }
    Ok(v)
}

pub fn write_matrix_text(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "DMT1")?;
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                write!(out, " ")?;
            }
            write_float(&mut out, m[(i, j)])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_text(path: impl AsRef<Path>) -> Result<Matrix> {
    const F: &str = "dmt";
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let magic = lines.next().transpose()?.ok_or_else(|| fmt_err(path, F, "empty file"))?;
    if magic.trim() != "DMT1" {
        return Err(fmt_err(path, F, format!("bad magic {magic:?}")));
    }
    let dims = lines.next().transpose()?.ok_or_else(|| fmt_err(path, F, "missing dims line"))?;
    let mut it = dims.split_whitespace();
    let rows: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| fmt_err(path, F, "bad rows"))?;
    let cols: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| fmt_err(path, F, "bad cols"))?;
    if rows == 0 || cols == 0 {
        return Err(fmt_err(path, F, "dimensions must be positive"));
    }
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| fmt_err(path, F, format!("missing data row {i}")))?;
        let mut toks = line.split_whitespace();
        for j in 0..cols {
            let tok = toks
                .next()
                .ok_or_else(|| fmt_err(path, F, format!("row {i} has fewer than {cols} values")))?;
            m[(i, j)] = parse_float(tok, path, F)?;
        }
        if toks.next().is_some() {
            return Err(fmt_err(path, F, format!("row {i} has more than {cols} values")));
        }
    }
    Ok(m)
}

fn write_binary_payload(out: &mut impl Write, magic: &[u8; 4], dims: &[u64], data: &[f64]) -> std::io::Result<()> {
    out.write_all(magic)?;
    for d in dims {
        out.write_all(&d.to_le_bytes())?;
    }
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_binary_payload(
    path: &Path,
    format: &'static str,
    magic: &[u8; 4],
    ndims: usize,
) -> Result<(Vec<u64>, Vec<f64>)> {
    let mut file = BufReader::new(File::open(path)?);
    let mut got = [0u8; 4];
    file.read_exact(&mut got)
        .map_err(|_| fmt_err(path, format, "truncated magic"))?;
    if &got != magic {
        return Err(fmt_err(path, format, format!("bad magic {got:?}")));
    }
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        let mut b = [0u8; 8];
        file.read_exact(&mut b)
            .map_err(|_| fmt_err(path, format, "truncated dimensions"))?;
        dims.push(u64::from_le_bytes(b));
    }
    let count = dims.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d)).ok_or_else(|| {
        fmt_err(path, format, "dimension product overflows")
    })?;
    if dims.iter().any(|&d| d == 0) {
        return Err(fmt_err(path, format, "dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(count as usize);
    let mut buf = [0u8; 8];
    for idx in 0..count {
        file.read_exact(&mut buf)
            .map_err(|_| fmt_err(path, format, format!("truncated payload at entry {idx}")))?;
        let v = f64::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{}: entry {idx}", path.display())));
        }
        data.push(v);
    }
    if file.read(&mut buf[..1])? != 0 {
        return Err(fmt_err(path, format, "trailing bytes after payload"));
    }
    Ok((dims, data))
}

pub fn write_matrix_binary(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    write_binary_payload(&mut out, b"DMB1", &[m.nrows() as u64, m.ncols() as u64], m.as_slice())?;
    out.flush()?;
    Ok(())
}

pub fn read_matrix_binary(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let (dims, data) = read_binary_payload(path, "dmb", b"DMB1", 2)?;
    Ok(Matrix::from_vec(dims[0] as usize, dims[1] as usize, data))
}

pub fn write_tensor_text(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let path = path.as_ref();
    let (n1, n2, n3) = t.dims();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "DTT1")?;
    writeln!(out, "{n1} {n2} {n3}")?;
    // rows of the mode-1 unfolding
    for i in 0..n1 {
        for c in 0..n2 * n3 {
            if c > 0 {
                write!(out, " ")?;
            }
            write_float(&mut out, t.data()[i + n1 * c])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_tensor_text(path: impl AsRef<Path>) -> Result<Tensor3> {
    const F: &str = "dtt";
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let magic = lines.next().transpose()?.ok_or_else(|| fmt_err(path, F, "empty file"))?;
    if magic.trim() != "DTT1" {
        return Err(fmt_err(path, F, format!("bad magic {magic:?}")));
    }
    let dims = lines.next().transpose()?.ok_or_else(|| fmt_err(path, F, "missing dims line"))?;
    let parsed: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| fmt_err(path, F, "bad dimensions"))?;
    let [n1, n2, n3] = parsed[..] else {
        return Err(fmt_err(path, F, "expected three dimensions"));
    };
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(fmt_err(path, F, "dimensions must be positive"));
    }
    let mut data = vec![0.0; n1 * n2 * n3];
    for i in 0..n1 {
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| fmt_err(path, F, format!("missing data row {i}")))?;
        let mut toks = line.split_whitespace();
        for c in 0..n2 * n3 {
            let tok = toks
                .next()
                .ok_or_else(|| fmt_err(path, F, format!("row {i} too short")))?;
            data[i + n1 * c] = parse_float(tok, path, F)?;
        }
        if toks.next().is_some() {
            return Err(fmt_err(path, F, format!("row {i} too long")));
        }
    }
    Tensor3::new((n1, n2, n3), data)
}

pub fn write_tensor_binary(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let (n1, n2, n3) = t.dims();
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    write_binary_payload(&mut out, b"DTB1", &[n1 as u64, n2 as u64, n3 as u64], t.data())?;
    out.flush()?;
    Ok(())
}

pub fn read_tensor_binary(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    let (dims, data) = read_binary_payload(path, "dtb", b"DTB1", 3)?;
    Tensor3::new((dims[0] as usize, dims[1] as usize, dims[2] as usize), data)
}

/// Reads a matrix, picking the format from the extension
/// (`.dmt` text, `.dmb` binary).
pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("dmt") => read_matrix_text(path),
        Some("dmb") => read_matrix_binary(path),
        other => Err(Error::Param(format!(
            "unknown matrix extension {other:?} for {} (expected .dmt or .dmb)",
            path.display()
        ))),
    }
}

/// Writes a matrix, picking the format from the extension.
pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("dmt") => write_matrix_text(path, m),
        Some("dmb") => write_matrix_binary(path, m),
        other => Err(Error::Param(format!(
            "unknown matrix extension {other:?} for {} (expected .dmt or .dmb)",
            path.display()
        ))),
    }
}

/// Reads a tensor, picking the format from the extension
/// (`.dtt` text, `.dtb` binary).
pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("dtt") => read_tensor_text(path),
        Some("dtb") => read_tensor_binary(path),
        other => Err(Error::Param(format!(
            "unknown tensor extension {other:?} for {} (expected .dtt or .dtb)",
            path.display()
        ))),
    }
}

/// Writes a tensor, picking the format from the extension.
pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("dtt") => write_tensor_text(path, t),
        Some("dtb") => write_tensor_binary(path, t),
        other => Err(Error::Param(format!(
            "unknown tensor extension {other:?} for {} (expected .dtt or .dtb)",
            path.display()
        ))),
    }
}
