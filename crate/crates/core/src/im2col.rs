//! Convolution lowering to GeMM.
//!
//! Inputs are `H x W x C` tensors stored height-major, channels innermost.
//! `im2col` turns every output pixel's receptive field into one matrix row,
//! column index `(kh * K + kw) * C + c`. Filters are stored
//! `[out_channel][kh][kw][c]` and reshape into the matching
//! `(K*K*C) x out_channels` matrix, so `im2col(x) * W` is the convolution
//! output with pixels as rows.

use crate::campunit::OverflowPolicy;
use crate::error::{Error, Result};
use crate::gemm::{gemm_blocked, Backend, BlockingParams};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub height: usize,
    pub width: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Input("conv extents must be positive".into()));
        }
        if self.kernel == 0 || self.stride == 0 {
            return Err(Error::Input("kernel and stride must be positive".into()));
        }
        if self.kernel > self.height + 2 * self.padding || self.kernel > self.width + 2 * self.padding {
            return Err(Error::Input(format!(
                "kernel {} larger than padded input {}x{}",
                self.kernel,
                self.height + 2 * self.padding,
                self.width + 2 * self.padding
            )));
        }
        Ok(())
    }

    pub fn out_height(&self) -> usize {
        (self.height + 2 * self.padding - self.kernel) / self.stride + 1
    }

    pub fn out_width(&self) -> usize {
        (self.width + 2 * self.padding - self.kernel) / self.stride + 1
    }

    /// Columns of the lowered matrix (and rows of the filter matrix).
    pub fn patch_len(&self) -> usize {
        self.kernel * self.kernel * self.in_channels
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor3<T> {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Tensor3<T> {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::shape(format!("{height}x{width}x{channels} tensor"), data.len()));
        }
        Ok(Tensor3 {
            height,
            width,
            channels,
            data,
        })
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }
}

fn check_input<T>(input: &Tensor3<T>, spec: &ConvSpec) -> Result<()> {
    spec.validate()?;
    if (input.height, input.width, input.channels) != (spec.height, spec.width, spec.in_channels) {
        return Err(Error::Input(format!(
            "tensor is {}x{}x{}, conv expects {}x{}x{}",
            input.height, input.width, input.channels, spec.height, spec.width, spec.in_channels
        )));
    }
    Ok(())
}

pub fn im2col<T: Copy + Default>(input: &Tensor3<T>, spec: &ConvSpec) -> Result<Matrix<T>> {
    check_input(input, spec)?;
    let (oh, ow) = (spec.out_height(), spec.out_width());
    let (kk, ch) = (spec.kernel, spec.in_channels);
    let mut out = Matrix::zeros(oh * ow, spec.patch_len());
    for oy in 0..oh {
        for ox in 0..ow {
            let r = oy * ow + ox;
            for ky in 0..kk {
                // signed arithmetic keeps the padding test simple
                let y = (oy * spec.stride + ky) as isize - spec.padding as isize;
                if y < 0 || y >= spec.height as isize {
                    continue;
                }
                for kx in 0..kk {
                    let x = (ox * spec.stride + kx) as isize - spec.padding as isize;
                    if x < 0 || x >= spec.width as isize {
                        continue;
                    }
                    for c in 0..ch {
                        out.set(r, (ky * kk + kx) * ch + c, input.get(y as usize, x as usize, c));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Reshape `[out][kh][kw][c]` filters into a `(K*K*C) x out` matrix.
pub fn filter_matrix<T: Copy + Default>(filters: &[T], spec: &ConvSpec) -> Result<Matrix<T>> {
    let patch = spec.patch_len();
    if filters.len() != patch * spec.out_channels {
        return Err(Error::shape(
            format!("{} filter weights", patch * spec.out_channels),
            filters.len(),
        ));
    }
    Ok(Matrix::from_fn(patch, spec.out_channels, |p, o| filters[o * patch + p]))
}

/// Convolution as `im2col(input) * filter_matrix(filters)` through a
/// blocked GeMM backend. Output rows are pixels, columns output channels.
pub fn conv2d_gemm(
    input: &Tensor3<i8>,
    filters: &[i8],
    spec: &ConvSpec,
    backend: Backend,
    params: &BlockingParams,
) -> Result<Matrix<i32>> {
    let cols = im2col(input, spec)?;
    let w = filter_matrix(filters, spec)?;
    Ok(gemm_blocked(&cols, &w, params, backend, OverflowPolicy::Strict)?.c)
}
