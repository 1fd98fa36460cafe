//! Panel packing with zero padding.
//!
//! A panels are cut into 4-row slivers stored column-major (`[kk * 4 + i]`),
//! B panels into 4-column slivers stored row-major (`[kk * 4 + j]`). One
//! 16-deep (int8) or 32-deep (int4) chunk of a sliver is therefore exactly
//! the register image of a `camp` operand. Rows, columns and k-depth past
//! the matrix edge are zero.

use crate::campunit::TILE_DIM;
use crate::matrix::Matrix;

/// A rectangular window of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub row0: usize,
    pub rows: usize,
    pub col0: usize,
    pub cols: usize,
}

impl Window {
    pub fn new(row0: usize, rows: usize, col0: usize, cols: usize) -> Self {
        Window { row0, rows, col0, cols }
    }
}

pub(crate) fn round_up(x: usize, to: usize) -> usize {
    x.div_ceil(to) * to
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPanelA {
    pub data: Vec<i8>,
    /// Logical rows (m extent) of the window.
    pub rows: usize,
    /// Logical k extent of the window.
    pub depth: usize,
    /// k extent after padding to the kernel's step.
    pub depth_padded: usize,
}

impl PackedPanelA {
    pub fn slivers(&self) -> usize {
        self.rows.div_ceil(TILE_DIM)
    }

    pub fn sliver(&self, s: usize) -> &[i8] {
        let len = self.depth_padded * TILE_DIM;
        &self.data[s * len..(s + 1) * len]
    }

    /// Zero-fill count.
    pub fn pad(&self) -> usize {
        self.data.len() - self.rows * self.depth
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPanelB {
    pub data: Vec<i8>,
    pub depth: usize,
    pub depth_padded: usize,
    /// Logical columns (n extent) of the window.
    pub cols: usize,
}

impl PackedPanelB {
    pub fn slivers(&self) -> usize {
        self.cols.div_ceil(TILE_DIM)
    }

    pub fn sliver(&self, s: usize) -> &[i8] {
        let len = self.depth_padded * TILE_DIM;
        &self.data[s * len..(s + 1) * len]
    }

    pub fn pad(&self) -> usize {
        self.data.len() - self.cols * self.depth
    }
}

/// Pack `a[win.row0.., win.col0..]` (rows = m, cols = k) into 4-row slivers.
pub fn pack_a(a: &Matrix<i8>, win: Window, k_step: usize) -> PackedPanelA {
    let depth_padded = round_up(win.cols, k_step.max(1));
    let slivers = win.rows.div_ceil(TILE_DIM);
    let mut data = vec![0i8; slivers * depth_padded * TILE_DIM];
    for s in 0..slivers {
        let base = s * depth_padded * TILE_DIM;
        let live_rows = (win.rows - s * TILE_DIM).min(TILE_DIM);
        for i in 0..live_rows {
            let row = a.row(win.row0 + s * TILE_DIM + i);
            for kk in 0..win.cols {
                data[base + kk * TILE_DIM + i] = row[win.col0 + kk];
            }
        }
    }
    PackedPanelA {
        data,
        rows: win.rows,
        depth: win.cols,
        depth_padded,
    }
}

/// Pack `b[win.row0.., win.col0..]` (rows = k, cols = n) into 4-column slivers.
pub fn pack_b(b: &Matrix<i8>, win: Window, k_step: usize) -> PackedPanelB {
    let depth_padded = round_up(win.rows, k_step.max(1));
    let slivers = win.cols.div_ceil(TILE_DIM);
    let mut data = vec![0i8; slivers * depth_padded * TILE_DIM];
    for kk in 0..win.rows {
        let row = b.row(win.row0 + kk);
        for s in 0..slivers {
            let live_cols = (win.cols - s * TILE_DIM).min(TILE_DIM);
            let dst = s * depth_padded * TILE_DIM + kk * TILE_DIM;
            let src = win.col0 + s * TILE_DIM;
            data[dst..dst + live_cols].copy_from_slice(&row[src..src + live_cols]);
        }
    }
    PackedPanelB {
        data,
        depth: win.rows,
        depth_padded,
        cols: win.cols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(rows: usize, cols: usize) -> Matrix<i8> {
        Matrix::from_fn(rows, cols, |i, j| (((i * 31 + j * 7) % 255) as i16 - 126) as i8)
    }

    #[test]
    fn exact_a_tile_is_column_major() {
        let a = sample(4, 16);
        let p = pack_a(&a, Window::new(0, 4, 0, 16), 16);
        assert_eq!(p.pad(), 0);
        let want: Vec<i8> = (0..16)
            .flat_map(|k| (0..4).map(move |i| (i, k)))
            .map(|(i, k)| a.get(i, k))
            .collect();
        assert_eq!(p.data, want);
    }

    #[test]
    fn ragged_a_pads_fourth_row() {
        let a = sample(3, 16);
        let p = pack_a(&a, Window::new(0, 3, 0, 16), 16);
        for kk in 0..16 {
            assert_eq!(p.sliver(0)[kk * 4 + 3], 0);
        }
        assert_eq!(p.pad(), 16);
    }

    #[test]
    fn exact_b_tile_is_identity_layout() {
        let b = sample(16, 4);
        let p = pack_b(&b, Window::new(0, 16, 0, 4), 16);
        assert_eq!(p.data, b.data());
    }

    #[test]
    fn b_depth_rounds_to_step() {
        let b = Matrix::from_fn(20, 4, |_, _| 1i8);
        let p = pack_b(&b, Window::new(0, 20, 0, 4), 16);
        assert_eq!(p.depth_padded, 32);
        assert!(p.data[20 * 4..].iter().all(|&v| v == 0));
        assert!(p.data[..20 * 4].iter().all(|&v| v == 1));
    }

    // Independent unpackers: walk the documented offsets, not the packer's loops.
    fn unpack_a(p: &PackedPanelA) -> Vec<Vec<i8>> {
        (0..p.rows)
            .map(|r| {
                (0..p.depth)
                    .map(|kk| p.data[(r / 4) * p.depth_padded * 4 + kk * 4 + r % 4])
                    .collect()
            })
            .collect()
    }

    fn unpack_b(p: &PackedPanelB) -> Vec<Vec<i8>> {
        (0..p.depth)
            .map(|kk| {
                (0..p.cols)
                    .map(|c| p.data[(c / 4) * p.depth_padded * 4 + kk * 4 + c % 4])
                    .collect()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn a_window_round_trips(m in 1usize..20, k in 1usize..40, r0 in 0usize..5, c0 in 0usize..5, step in prop::sample::select(vec![1usize, 16, 32])) {
            let a = sample(m + r0, k + c0);
            let p = pack_a(&a, Window::new(r0, m, c0, k), step);
            let got = unpack_a(&p);
            for (i, row) in got.iter().enumerate() {
                for (kk, &v) in row.iter().enumerate() {
                    prop_assert_eq!(v, a.get(r0 + i, c0 + kk));
                }
            }
            prop_assert_eq!(p.data.iter().filter(|&&v| v != 0).count(),
                (0..m).flat_map(|i| (0..k).map(move |kk| (i, kk))).filter(|&(i, kk)| a.get(r0 + i, c0 + kk) != 0).count());
        }

        #[test]
        fn b_window_round_trips(k in 1usize..40, n in 1usize..20, r0 in 0usize..5, c0 in 0usize..5, step in prop::sample::select(vec![1usize, 16, 32])) {
            let b = sample(k + r0, n + c0);
            let p = pack_b(&b, Window::new(r0, k, c0, n), step);
            let got = unpack_b(&p);
            for (kk, row) in got.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    prop_assert_eq!(v, b.get(r0 + kk, c0 + j));
                }
            }
            prop_assert_eq!(p.data.iter().filter(|&&v| v != 0).count(),
                (0..k).flat_map(|kk| (0..n).map(move |j| (kk, j))).filter(|&(kk, j)| b.get(r0 + kk, c0 + j) != 0).count());
        }
    }
}
