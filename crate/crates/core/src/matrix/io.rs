//! Plain-text CSV for matrices and data files.
//!
//! One row per line, comma-separated decimal values, no header, `.` decimal
//! separator, LF line endings. Dimension is inferred from the file.

use std::fmt::Display;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{DataMatrix, Mat, MatrixError, SymMatrix};
use crate::scalar::Scalar;

fn write_rows<T: Display>(
    w: &mut impl Write,
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> T,
) -> Result<(), MatrixError> {
    let mut line = String::new();
    for r in 0..rows {
        line.clear();
        for c in 0..cols {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&get(r, c).to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_sym_csv<T: Scalar>(path: &Path, s: &SymMatrix<T>) -> Result<(), MatrixError> {
    let mut f = std::fs::File::create(path)?;
    write_rows(&mut f, s.dim(), s.dim(), |r, c| s.get(r, c))
}

pub fn write_mat_csv<T: Scalar>(path: &Path, m: &Mat<T>) -> Result<(), MatrixError> {
    let mut f = std::fs::File::create(path)?;
    write_rows(&mut f, m.rows(), m.cols(), |r, c| m.get(r, c))
}

pub fn write_data_csv<T: Scalar>(path: &Path, d: &DataMatrix<T>) -> Result<(), MatrixError> {
    let mut f = std::fs::File::create(path)?;
    write_rows(&mut f, d.n_samples(), d.dim(), |r, c| d.sample(r)[c])
}

fn parse_rows<T>(reader: impl Read) -> Result<Vec<Vec<T>>, MatrixError>
where
    T: FromStr,
    <T as FromStr>::Err: Display,
{
    let reader = BufReader::new(reader);
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|tok| {
                tok.trim().parse::<T>().map_err(|e| MatrixError::Parse {
                    line: idx + 1,
                    message: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<T>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(MatrixError::Empty("csv file has no rows"));
    }
    Ok(rows)
}

pub fn read_matrix_csv<T>(path: &Path) -> Result<Mat<T>, MatrixError>
where
    T: Scalar + FromStr,
    <T as FromStr>::Err: Display,
{
    let rows = parse_rows(std::fs::File::open(path)?)?;
    Mat::from_rows(&rows)
}

/// Reads a square matrix and symmetrizes it, rejecting files whose asymmetry
/// exceeds `1e-8` relative to the largest entry.
pub fn read_sym_csv<T>(path: &Path) -> Result<SymMatrix<T>, MatrixError>
where
    T: Scalar + FromStr,
    <T as FromStr>::Err: Display,
{
    let m = read_matrix_csv::<T>(path)?;
    if m.rows() != m.cols() {
        return Err(MatrixError::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let mut max_abs = T::zero();
    for v in m.as_slice() {
        max_abs = max_abs.max(v.abs());
    }
    let tol = T::from_f64(1e-8).unwrap() * max_abs.max(T::one());
    for a in 0..m.rows() {
        for b in (a + 1)..m.cols() {
            if (m.get(a, b) - m.get(b, a)).abs() > tol {
                return Err(MatrixError::NotSymmetric { row: a, col: b });
            }
        }
    }
    SymMatrix::symmetrize(&m)
}

pub fn read_data_csv<T>(path: &Path) -> Result<DataMatrix<T>, MatrixError>
where
    T: Scalar + FromStr,
    <T as FromStr>::Err: Display,
{
    let rows = parse_rows(std::fs::File::open(path)?)?;
    let m = Mat::from_rows(&rows)?;
    DataMatrix::new(m.rows(), m.cols(), m.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_roundtrip_is_exact() {
        let dir = std::env::temp_dir().join("qkp_io_test_sym");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.csv");
        let s = SymMatrix::try_from_rows(&[
            vec![1.25, -0.33333333333333331, 0.0],
            vec![-0.33333333333333331, 2.0, 1e-12],
            vec![0.0, 1e-12, 0.5],
        ])
        .unwrap();
        write_sym_csv(&path, &s).unwrap();
        let back = read_sym_csv::<f64>(&path).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn asymmetric_rejected() {
        let dir = std::env::temp_dir().join("qkp_io_test_asym");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.csv");
        std::fs::write(&path, "1.0,0.5\n0.4,1.0\n").unwrap();
        assert!(matches!(
            read_sym_csv::<f64>(&path),
            Err(MatrixError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn parse_error_reports_line() {
        let dir = std::env::temp_dir().join("qkp_io_test_parse");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "1.0,2.0\nxyz,1.0\n").unwrap();
        match read_matrix_csv::<f64>(&path) {
            Err(MatrixError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
