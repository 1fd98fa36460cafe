//! Symmetric per-tensor quantization to the `camp` element ranges.

use crate::campunit::CampMode;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    scale: f64,
    mode: CampMode,
}

impl QuantParams {
    pub fn new(scale: f64, mode: CampMode) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!("scale must be positive and finite, got {scale}")));
        }
        Ok(QuantParams { scale, mode })
    }

    /// Scale mapping the largest magnitude of `x` onto the top of the range.
    pub fn fit(x: &Matrix<f64>, mode: CampMode) -> Result<Self> {
        let max_abs = x.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max_abs.is_finite() {
            return Err(Error::Input("non-finite value in matrix".into()));
        }
        let top = mode.element_range().1 as f64;
        Self::new(if max_abs == 0.0 { 1.0 } else { max_abs / top }, mode)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mode(&self) -> CampMode {
        self.mode
    }
}

/// `clamp(round_half_even(x / scale))`.
pub fn quantize(x: &Matrix<f64>, q: &QuantParams) -> Result<Matrix<i8>> {
    if let Some(bad) = x.data().iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite value {bad}")));
    }
    let (lo, hi) = q.mode.element_range();
    Ok(x.map(|v| (v / q.scale).round_ties_even().clamp(lo as f64, hi as f64) as i8))
}

pub fn dequantize(y: &Matrix<i8>, q: &QuantParams) -> Matrix<f64> {
    y.map(|v| v as f64 * q.scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_boundary() {
        let q = QuantParams::new(0.25, CampMode::Int8).unwrap();
        let z = Matrix::<f64>::zeros(3, 3);
        assert_eq!(quantize(&z, &q).unwrap(), Matrix::zeros(3, 3));
        let edge = Matrix::new(1, 3, vec![127.0 * 0.25, 1e9, -1e9]).unwrap();
        assert_eq!(quantize(&edge, &q).unwrap().data(), &[127, 127, -128]);
        let q4 = QuantParams::new(1.0, CampMode::Int4).unwrap();
        assert_eq!(quantize(&edge, &q4).unwrap().data(), &[7, 7, -8]);
    }

    #[test]
    fn ties_go_to_even() {
        let q = QuantParams::new(1.0, CampMode::Int8).unwrap();
        let x = Matrix::new(1, 4, vec![0.5, 1.5, 2.5, -2.5]).unwrap();
        assert_eq!(quantize(&x, &q).unwrap().data(), &[0, 2, 2, -2]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(QuantParams::new(0.0, CampMode::Int8).is_err());
        assert!(QuantParams::new(f64::NAN, CampMode::Int8).is_err());
        let q = QuantParams::new(1.0, CampMode::Int8).unwrap();
        let x = Matrix::new(1, 2, vec![1.0, f64::INFINITY]).unwrap();
        assert!(matches!(quantize(&x, &q), Err(Error::Input(_))));
    }

    #[test]
    fn fit_uses_full_range() {
        let x = Matrix::new(1, 3, vec![-3.5, 0.0, 1.0]).unwrap();
        let q = QuantParams::fit(&x, CampMode::Int4).unwrap();
        assert_eq!(q.scale(), 0.5);
        assert_eq!(quantize(&x, &q).unwrap().data(), &[-7, 0, 2]);
    }
}
