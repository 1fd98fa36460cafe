//! GotoBLAS-style blocked GeMM over quantized operands.
//!
//! `C (m x n) = A (m x k) * B (k x n)` runs as five loops around a 4x4
//! micro-kernel:
//!
//! ```text
//! for jc in 0..n step nc            // B/C column panels
//!   for pc in 0..k step kc          // pack kc x nc panel of B
//!     for ic in 0..m step mc        // pack mc x kc panel of A
//!       for jr in 0..nc step nR     // B sliver
//!         for ir in 0..mc step mR   // A sliver -> micro-kernel -> C tile
//! ```
//!
//! Ragged edges are zero-padded during packing so every micro-kernel call
//! sees a full 4x4 tile and a k-depth that is a multiple of its step. The
//! `ic` loop runs in parallel on the current rayon pool; each worker owns a
//! disjoint band of C rows.

mod kernel;
mod pack;
mod quant;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::campunit::{CampMode, OverflowPolicy, TILE, TILE_DIM};
use crate::costmodel::InstructionCounts;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use kernel::{
    camp_kernel_counts, micro_kernel_camp, micro_kernel_generic, micro_kernel_generic_model, micro_kernel_scalar,
    scalar_kernel_counts, TileOutput,
};
pub use pack::{pack_a, pack_b, PackedPanelA, PackedPanelB, Window};
pub use quant::{dequantize, quantize, QuantParams};

use pack::round_up;

/// Cache and register blocking. `mr` and `nr` are fixed at 4 by the `camp`
/// tile; `kc` is rounded up to the kernel's k-step, `mc` and `nc` to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingParams {
    pub nc: usize,
    pub kc: usize,
    pub mc: usize,
    pub mr: usize,
    pub nr: usize,
}

impl Default for BlockingParams {
    fn default() -> Self {
        BlockingParams {
            nc: 4096,
            kc: 256,
            mc: 128,
            mr: TILE_DIM,
            nr: TILE_DIM,
        }
    }
}

impl BlockingParams {
    pub fn new(nc: usize, kc: usize, mc: usize) -> Result<Self> {
        let p = BlockingParams {
            nc,
            kc,
            mc,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mr != TILE_DIM || self.nr != TILE_DIM {
            return Err(Error::Config(format!(
                "mR = nR = {TILE_DIM} is required, got {}x{}",
                self.mr, self.nr
            )));
        }
        if self.nc == 0 || self.kc == 0 || self.mc == 0 {
            return Err(Error::Config("nc, kc and mc must be positive".into()));
        }
        Ok(())
    }

    pub fn kc_for(&self, k_step: usize) -> usize {
        round_up(self.kc, k_step)
    }

    fn mc_eff(&self) -> usize {
        round_up(self.mc, self.mr)
    }

    fn nc_eff(&self) -> usize {
        round_up(self.nc, self.nr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    CampI8,
    CampI4,
    NaiveI32,
    GenericVecModel,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::CampI8,
        Backend::CampI4,
        Backend::NaiveI32,
        Backend::GenericVecModel,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Backend::CampI8 => "camp_i8",
            Backend::CampI4 => "camp_i4",
            Backend::NaiveI32 => "naive_i32",
            Backend::GenericVecModel => "generic_vec_model",
        }
    }

    pub const fn k_step(self) -> usize {
        match self {
            Backend::CampI8 => CampMode::Int8.k_step(),
            Backend::CampI4 => CampMode::Int4.k_step(),
            Backend::NaiveI32 | Backend::GenericVecModel => 1,
        }
    }

    /// Operand width the backend accepts.
    pub const fn operand_mode(self) -> CampMode {
        match self {
            Backend::CampI4 => CampMode::Int4,
            _ => CampMode::Int8,
        }
    }

    pub const fn is_camp(self) -> bool {
        matches!(self, Backend::CampI8 | Backend::CampI4)
    }

    pub fn kernel_counts(self, kc: usize) -> InstructionCounts {
        match self {
            Backend::CampI8 => camp_kernel_counts(kc, CampMode::Int8),
            Backend::CampI4 => camp_kernel_counts(kc, CampMode::Int4),
            Backend::NaiveI32 => scalar_kernel_counts(kc),
            Backend::GenericVecModel => micro_kernel_generic_model(kc),
        }
    }

    fn run_kernel(self, pa: &[i8], pb: &[i8], kc: usize, policy: OverflowPolicy) -> Result<TileOutput> {
        match self {
            Backend::CampI8 => micro_kernel_camp(pa, pb, kc, CampMode::Int8, policy),
            Backend::CampI4 => micro_kernel_camp(pa, pb, kc, CampMode::Int4, policy),
            Backend::NaiveI32 => micro_kernel_scalar(pa, pb, kc, policy),
            Backend::GenericVecModel => micro_kernel_generic(pa, pb, kc, policy),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "backend",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GemmOutput {
    pub c: Matrix<i32>,
    pub counts: InstructionCounts,
    pub overflow: bool,
}

fn check_shapes<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()>
where
    T: Copy + Default,
{
    if a.cols() != b.rows() {
        return Err(Error::shape(
            format!("B with {} rows", a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    Ok(())
}

fn check_range(m: &Matrix<i8>, mode: CampMode, which: &str) -> Result<()> {
    let (lo, hi) = mode.element_range();
    if let Some(&v) = m.data().iter().find(|v| !(lo..=hi).contains(*v)) {
        return Err(Error::Input(format!(
            "{which} holds {v}, outside the {mode} range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

#[inline]
fn accumulate(dst: &mut i32, v: i32, overflow: &mut bool) {
    let exact = *dst as i64 + v as i64;
    *overflow |= exact != exact as i32 as i64;
    *dst = exact as i32;
}

/// Blocked GeMM through the chosen micro-kernel.
pub fn gemm_blocked(
    a: &Matrix<i8>,
    b: &Matrix<i8>,
    params: &BlockingParams,
    backend: Backend,
    policy: OverflowPolicy,
) -> Result<GemmOutput> {
    params.validate()?;
    check_shapes(a, b)?;
    check_range(a, backend.operand_mode(), "A")?;
    check_range(b, backend.operand_mode(), "B")?;
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    let mut c = Matrix::<i32>::zeros(m, n);
    let mut counts = InstructionCounts::default();
    let mut overflow = false;
    if m == 0 || n == 0 || k == 0 {
        return Ok(GemmOutput { c, counts, overflow });
    }

    let step = backend.k_step();
    let (nc, kc, mc) = (params.nc_eff(), params.kc_for(step), params.mc_eff());
    for jc in (0..n).step_by(nc) {
        let nc_cur = nc.min(n - jc);
        for pc in (0..k).step_by(kc) {
            let kc_cur = kc.min(k - pc);
            let pb = pack_b(b, Window::new(pc, kc_cur, jc, nc_cur), step);
            let bands: Vec<Result<(InstructionCounts, bool)>> = c
                .data_mut()
                .par_chunks_mut(mc * n)
                .enumerate()
                .map(|(band, c_rows)| {
                    let ic = band * mc;
                    let mc_cur = mc.min(m - ic);
                    let pa = pack_a(a, Window::new(ic, mc_cur, pc, kc_cur), step);
                    let mut counts = InstructionCounts::default();
                    let mut overflow = false;
                    for jr in 0..pb.slivers() {
                        for ir in 0..pa.slivers() {
                            let out = backend.run_kernel(pa.sliver(ir), pb.sliver(jr), pa.depth_padded, policy)?;
                            counts += out.counts;
                            overflow |= out.overflow;
                            let rows = (mc_cur - ir * TILE_DIM).min(TILE_DIM);
                            let cols = (nc_cur - jr * TILE_DIM).min(TILE_DIM);
                            for i in 0..rows {
                                let row = &mut c_rows[(ir * TILE_DIM + i) * n..][..n];
                                for j in 0..cols {
                                    accumulate(
                                        &mut row[jc + jr * TILE_DIM + j],
                                        out.tile[i * TILE_DIM + j],
                                        &mut overflow,
                                    );
                                }
                            }
                        }
                    }
                    if overflow && policy == OverflowPolicy::Strict {
                        return Err(Error::Overflow(format!("C rows {ic}..{}", ic + mc_cur)));
                    }
                    Ok((counts, overflow))
                })
                .collect();
            for band in bands {
                let (cnt, ovf) = band?;
                counts += cnt;
                overflow |= ovf;
            }
        }
    }
    Ok(GemmOutput { c, counts, overflow })
}

/// Instruction tally of [`gemm_blocked`] without touching data.
pub fn blocked_counts(
    m: usize,
    n: usize,
    k: usize,
    params: &BlockingParams,
    backend: Backend,
) -> Result<InstructionCounts> {
    params.validate()?;
    if m == 0 || n == 0 || k == 0 {
        return Ok(InstructionCounts::default());
    }
    let step = backend.k_step();
    let kc = params.kc_for(step);
    // mc and nc are multiples of 4, so the slivers over all ic/jc blocks
    // tile C exactly once.
    let tiles = (m.div_ceil(TILE_DIM) * n.div_ceil(TILE_DIM)) as u64;
    let per_tile: InstructionCounts = (0..k)
        .step_by(kc)
        .map(|pc| backend.kernel_counts(round_up(kc.min(k - pc), step)))
        .sum();
    Ok(per_tile * tiles)
}

/// Selected 4x4 output tiles, computed through the same packing and
/// micro-kernel path as [`gemm_blocked`]. Tile `(tr, tc)` covers rows
/// `4tr..4tr+4` and columns `4tc..4tc+4`; cells past the edge are zero.
pub fn gemm_tiles(
    a: &Matrix<i8>,
    b: &Matrix<i8>,
    params: &BlockingParams,
    backend: Backend,
    policy: OverflowPolicy,
    tiles: &[(usize, usize)],
) -> Result<Vec<[i32; TILE]>> {
    params.validate()?;
    check_shapes(a, b)?;
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    let step = backend.k_step();
    let kc = params.kc_for(step);
    let mode = backend.operand_mode();
    tiles
        .iter()
        .map(|&(tr, tc)| {
            let (r0, c0) = (tr * TILE_DIM, tc * TILE_DIM);
            if r0 >= m || c0 >= n {
                return Err(Error::Index {
                    index: if r0 >= m { tr } else { tc },
                    limit: if r0 >= m {
                        m.div_ceil(TILE_DIM)
                    } else {
                        n.div_ceil(TILE_DIM)
                    },
                });
            }
            let rows = TILE_DIM.min(m - r0);
            let cols = TILE_DIM.min(n - c0);
            let mut tile = [0i32; TILE];
            let mut overflow = false;
            for pc in (0..k).step_by(kc) {
                let kc_cur = kc.min(k - pc);
                let pa = pack_a(a, Window::new(r0, rows, pc, kc_cur), step);
                let pb = pack_b(b, Window::new(pc, kc_cur, c0, cols), step);
                check_sliver_range(&pa.data, mode)?;
                check_sliver_range(&pb.data, mode)?;
                let out = backend.run_kernel(pa.sliver(0), pb.sliver(0), pa.depth_padded, policy)?;
                for (t, &v) in tile.iter_mut().zip(&out.tile) {
                    accumulate(t, v, &mut overflow);
                }
            }
            if overflow && policy == OverflowPolicy::Strict {
                return Err(Error::Overflow(format!("tile ({tr}, {tc})")));
            }
            Ok(tile)
        })
        .collect()
}

fn check_sliver_range(data: &[i8], mode: CampMode) -> Result<()> {
    let (lo, hi) = mode.element_range();
    match data.iter().find(|v| !(lo..=hi).contains(*v)) {
        Some(&v) => Err(Error::Input(format!("operand {v} outside the {mode} range"))),
        None => Ok(()),
    }
}

/// Extract tile `(tr, tc)` of a full result, zero past the edges.
pub fn tile_of<T: Copy + Default + Into<i64>>(c: &Matrix<T>, tr: usize, tc: usize) -> [i64; TILE] {
    let mut t = [0i64; TILE];
    for i in 0..TILE_DIM {
        for j in 0..TILE_DIM {
            let (r, col) = (tr * TILE_DIM + i, tc * TILE_DIM + j);
            if r < c.rows() && col < c.cols() {
                t[i * TILE_DIM + j] = c.get(r, col).into();
            }
        }
    }
    t
}

/// Textbook `i, j, k` triple loop in exact 64-bit arithmetic.
pub fn gemm_naive<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<i64>>
where
    T: Copy + Default + Into<i64>,
{
    check_shapes(a, b)?;
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    Ok(Matrix::from_fn(m, n, |i, j| {
        let mut s = 0i64;
        for kk in 0..k {
            s += a.get(i, kk).into() * b.get(kk, j).into();
        }
        s
    }))
}

/// The naive product restricted to one 4x4 output tile.
pub fn naive_tile<T>(a: &Matrix<T>, b: &Matrix<T>, tr: usize, tc: usize) -> [i64; TILE]
where
    T: Copy + Default + Into<i64>,
{
    let mut t = [0i64; TILE];
    for i in 0..TILE_DIM {
        for j in 0..TILE_DIM {
            let (r, c) = (tr * TILE_DIM + i, tc * TILE_DIM + j);
            if r < a.rows() && c < b.cols() {
                t[i * TILE_DIM + j] = (0..a.cols()).map(|kk| a.get(r, kk).into() * b.get(kk, c).into()).sum();
            }
        }
    }
    t
}
