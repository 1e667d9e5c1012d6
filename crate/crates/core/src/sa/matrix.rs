use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitmath::{check_width, SignedWord};
use crate::error::{Error, Result};

/// Row-major rectangular grid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i / cols, i % cols, v))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T: Clone> Grid<T> {
    /// Top-left `rows x cols` window.
    pub fn sub_grid(&self, rows: usize, cols: usize) -> Grid<T> {
        Grid::from_fn(rows, cols, |r, c| self.get(r, c).clone())
    }
}

/// Operand matrix whose entries share one two's-complement width.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    width: u32,
    values: Grid<i64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, width: u32, values: Vec<i64>) -> Result<Self> {
        check_width(width)?;
        if values.len() != rows * cols {
            return Err(Error::Config(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        for &v in &values {
            SignedWord::new(v, width)?;
        }
        Ok(Self {
            width,
            values: Grid {
                rows,
                cols,
                data: values,
            },
        })
    }

    pub fn zeros(rows: usize, cols: usize, width: u32) -> Result<Self> {
        Self::new(rows, cols, width, vec![0; rows * cols])
    }

    /// Identity matrix; needs `width >= 2` so that `+1` is representable.
    pub fn identity(n: usize, width: u32) -> Result<Self> {
        let values = Grid::from_fn(n, n, |r, c| (r == c) as i64).data;
        Self::new(n, n, width, values)
    }

    /// Uniformly random entries over the full signed range of `width`.
    pub fn random<R: Rng>(rng: &mut R, rows: usize, cols: usize, width: u32) -> Result<Self> {
        check_width(width)?;
        let lo = SignedWord::min_value(width);
        let hi = SignedWord::max_value(width);
        let values = (0..rows * cols)
            .map(|_| rng.random_range(lo..=hi))
            .collect();
        Self::new(rows, cols, width, values)
    }

    pub fn rows(&self) -> usize {
        self.values.rows
    }

    pub fn cols(&self) -> usize {
        self.values.cols
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn value(&self, r: usize, c: usize) -> i64 {
        *self.values.get(r, c)
    }

    pub fn word(&self, r: usize, c: usize) -> SignedWord {
        // entries were range-checked on construction
        SignedWord::new(self.value(r, c), self.width).expect("validated entry")
    }

    pub fn values(&self) -> &Grid<i64> {
        &self.values
    }

    /// Reads the plain-CSV format: a `width,<bits>` header line followed by
    /// one comma-separated row of integers per line.
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        let width = parse_header(header.trim())?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            if cols.is_some_and(|c| c != record.len()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} columns, found {}", cols.unwrap(), record.len()),
                });
            }
            cols = Some(record.len());
            for field in record.iter() {
                let v: i64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{field}` is not an integer"),
                })?;
                values.push(v);
            }
            rows += 1;
        }
        let cols = cols.ok_or(Error::Parse {
            line: 2,
            msg: "matrix has no rows".into(),
        })?;
        Self::new(rows, cols, width, values)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "width,{}", self.width)?;
        let mut writer = csv::WriterBuilder::new().from_writer(out);
        for r in 0..self.rows() {
            writer.write_record((0..self.cols()).map(|c| self.value(r, c).to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn parse_header(line: &str) -> Result<u32> {
    let bad = || Error::Parse {
        line: 1,
        msg: format!("expected `width,<bits>` header, found `{line}`"),
    };
    let (key, value) = line.split_once(',').ok_or_else(bad)?;
    if key.trim() != "width" {
        return Err(bad());
    }
    value.trim().parse().map_err(|_| bad())
}

/// Exact integer matrix product.
pub fn oracle_matmul(a: &Matrix, b: &Matrix) -> Result<Grid<i128>> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            a_rows: a.rows(),
            a_cols: a.cols(),
            b_rows: b.rows(),
            b_cols: b.cols(),
        });
    }
    Ok(Grid::from_fn(a.rows(), b.cols(), |r, c| {
        (0..a.cols())
            .map(|k| a.value(r, k) as i128 * b.value(k, c) as i128)
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_small() {
        let a = Matrix::new(2, 2, 4, vec![1, 2, 3, 4]).unwrap();
        let b = Matrix::new(2, 1, 4, vec![-1, 2]).unwrap();
        let c = oracle_matmul(&a, &b).unwrap();
        assert_eq!(c.as_slice(), &[3, 5]);
        assert!(oracle_matmul(&b, &b).is_err());
    }

    #[test]
    fn entries_are_range_checked() {
        assert!(Matrix::new(1, 1, 2, vec![2]).is_err());
        assert!(Matrix::new(1, 2, 2, vec![1]).is_err());
        assert!(Matrix::identity(3, 1).is_err());
        assert!(Matrix::identity(3, 2).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let m = Matrix::new(2, 3, 5, vec![-16, 0, 15, 3, -2, 1]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "width,5\n-16,0,15\n3,-2,1\n"
        );
        assert_eq!(Matrix::read_csv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            Matrix::read_csv(&b"bits,4\n1\n"[..]),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Matrix::read_csv(&b"width,4\n1,2\n3\n"[..]),
            Err(Error::Csv(_)) | Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Matrix::read_csv(&b"width,4\n1,x\n"[..]),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Matrix::read_csv(&b"width,4\n9\n"[..]),
            Err(Error::ValueOutOfRange { .. })
        ));
    }
}
