//! Dense row-major matrices and their fixture file formats.
//!
//! Binary format (all integers little-endian):
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `b"CMAT"`                        |
//! | 4      | 1    | format version, currently 1            |
//! | 5      | 1    | element code: 1 = i8, 2 = i32, 3 = i64 |
//! | 6      | 2    | reserved, zero                         |
//! | 8      | 4    | rows (u32)                             |
//! | 12     | 4    | cols (u32)                             |
//! | 16     | ...  | rows * cols elements, row-major, two's complement |
//!
//! CSV format: one matrix row per line, comma-separated decimal integers,
//! no header.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                format!("{rows}x{cols} = {} elements", rows * cols),
                data.len(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Copy + Default>(&self, f: impl FnMut(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Integer element types storable in fixture files.
pub trait Element: Copy + Default + FromStr + ToString {
    const CODE: u8;
    const BYTES: usize;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(b: &[u8]) -> Self;
}

macro_rules! element {
    ($t:ty, $code:expr) => {
        impl Element for $t {
            const CODE: u8 = $code;
            const BYTES: usize = std::mem::size_of::<$t>();
            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_le(b: &[u8]) -> Self {
                <$t>::from_le_bytes(b.try_into().unwrap())
            }
        }
    };
}

element!(i8, 1);
element!(i32, 2);
element!(i64, 3);

const MAGIC: &[u8; 4] = b"CMAT";
const VERSION: u8 = 1;
const HEADER: usize = 16;

pub fn encode_binary<T: Element>(m: &Matrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + m.data.len() * T::BYTES);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(T::CODE);
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(m.rows as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols as u32).to_le_bytes());
    for &v in &m.data {
        v.write_le(&mut out);
    }
    out
}

pub fn decode_binary<T: Element>(bytes: &[u8]) -> std::result::Result<Matrix<T>, String> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err("not a CMAT matrix file".into());
    }
    if bytes[4] != VERSION {
        return Err(format!("unsupported version {}", bytes[4]));
    }
    if bytes[5] != T::CODE {
        return Err(format!("element code {} does not match expected {}", bytes[5], T::CODE));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[HEADER..];
    if body.len() != rows * cols * T::BYTES {
        return Err(format!(
            "payload is {} bytes, expected {} for {rows}x{cols}",
            body.len(),
            rows * cols * T::BYTES
        ));
    }
    let data = body.chunks_exact(T::BYTES).map(T::read_le).collect();
    Ok(Matrix { rows, cols, data })
}

pub fn write_binary<T: Element>(m: &Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_binary(m)).map_err(|e| Error::io(path, e))
}

pub fn read_binary<T: Element>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes).map_err(|m| Error::parse(path, m))
}

pub fn write_csv<T: Element>(m: &Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::parse(path, e))?;
    for i in 0..m.rows {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: Element>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e))?;
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::parse(path, format!("row {rows} has {} fields", rec.len())));
        }
        for field in rec.iter() {
            let v = field
                .parse::<T>()
                .map_err(|_| Error::parse(path, format!("row {rows}: bad integer '{field}'")))?;
            data.push(v);
        }
        rows += 1;
    }
    Matrix::new(rows, cols.unwrap_or(0), data)
}
