//! Functional model of the `camp` outer-product instruction.
//!
//! `camp(vr0, vr1, vr2, mode)` computes `vr0 += A * B` where `vr1` holds a
//! 4 x K tile of A in column-major order and `vr2` a K x 4 tile of B in
//! row-major order (K = 16 for int8, 32 for int4). The result is a 4 x 4
//! row-major tile of 32-bit accumulators.
//!
//! Each of the 8 lanes sees one 64-bit slice of both operands. Because the
//! element distribution is sequential, lane `w` owns k-columns
//! `{2w, 2w+1}` in int8 mode and `{4w .. 4w+3}` in int4 mode. A lane forms
//! the outer products of its k-columns with hybrid multipliers, its 16
//! intra-lane adders sum them per output index, and the 16 shared inter-lane
//! accumulators fold the eight lane partials into the destination.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybridmul::{hybrid_mul8, quad_products_packed};
use crate::vecreg::{pack_i32, unpack_i32, LaneWord, VecReg512, LANES};

/// Tile outputs per instruction (4 x 4).
pub const TILE: usize = 16;
/// Rows of A / columns of B per tile (mR = nR).
pub const TILE_DIM: usize = 4;

/// Element width selector of the `camp` instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CampMode {
    Int8,
    Int4,
}

impl CampMode {
    /// k-extent consumed by one instruction.
    pub const fn k_step(self) -> usize {
        match self {
            CampMode::Int8 => 16,
            CampMode::Int4 => 32,
        }
    }

    /// k-columns owned by each lane.
    pub const fn k_per_lane(self) -> usize {
        self.k_step() / LANES
    }

    pub const fn element_range(self) -> (i8, i8) {
        match self {
            CampMode::Int8 => (i8::MIN, i8::MAX),
            CampMode::Int4 => (-8, 7),
        }
    }

    /// Hybrid multipliers active per lane, counted in 8-bit blocks for
    /// int8 and 4-bit blocks for int4.
    pub const fn multipliers_per_lane(self) -> u32 {
        match self {
            CampMode::Int8 => 32,
            CampMode::Int4 => 128,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            CampMode::Int8 => "int8",
            CampMode::Int4 => "int4",
        }
    }
}

impl fmt::Display for CampMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CampMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int8" | "i8" => Ok(CampMode::Int8),
            "int4" | "i4" => Ok(CampMode::Int4),
            _ => Err(Error::Unknown {
                kind: "mode",
                name: s.to_string(),
            }),
        }
    }
}

/// What to do when a 32-bit accumulator overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// Wrap modulo 2^32 and raise the advisory flag.
    #[default]
    Wrap,
    /// Treat overflow as an error.
    Strict,
}

/// Datapath activity of one lane during one instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LaneTrace {
    pub lane: u8,
    pub multipliers_used: u32,
    /// Products folded into the intra-lane adders.
    pub intra_adds: u32,
    /// k-columns whose outer products the lane formed.
    pub outer_product_pairs: u32,
    /// int4 cross-k products that the grid computes but the adders ignore.
    pub masked_products: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampResult {
    pub vr0: VecReg512,
    pub traces: [LaneTrace; LANES],
    pub overflow: bool,
}

/// Output index for row `i`, column `j` of the 4 x 4 tile.
#[inline]
const fn out_idx(i: usize, j: usize) -> usize {
    i * TILE_DIM + j
}

/// One lane's outer products and intra-lane sums.
pub fn lane_outer(lane: usize, lane_a: &LaneWord, lane_b: &LaneWord, mode: CampMode) -> ([i64; TILE], LaneTrace) {
    let mut acc = [0i32; TILE];
    let mut trace = LaneTrace {
        lane: lane as u8,
        multipliers_used: mode.multipliers_per_lane(),
        outer_product_pairs: mode.k_per_lane() as u32,
        ..Default::default()
    };
    match mode {
        CampMode::Int8 => {
            for half in 0..2 {
                let col = &lane_a[4 * half..4 * half + 4];
                let row = &lane_b[4 * half..4 * half + 4];
                for (i, &a) in col.iter().enumerate() {
                    for (j, &b) in row.iter().enumerate() {
                        acc[out_idx(i, j)] += hybrid_mul8(a as i8, b as i8).composed;
                        trace.intra_adds += 1;
                    }
                }
            }
        }
        CampMode::Int4 => {
            // Byte p holds a same-k pair of rows (2p mod 4, 2p mod 4 + 1) of
            // k-column p / 2; B bytes likewise hold column pairs.
            for half in 0..2 {
                let base = 4 * half;
                for (p, &a) in lane_a.iter().enumerate().skip(base).take(4) {
                    for (q, &b) in lane_b.iter().enumerate().skip(base).take(4) {
                        let quad = quad_products_packed(a, b);
                        if p / 2 != q / 2 {
                            trace.masked_products += 4;
                            continue;
                        }
                        let (i_lo, j_lo) = ((2 * p) % 4, (2 * q) % 4);
                        let (i_hi, j_hi) = (i_lo + 1, j_lo + 1);
                        acc[out_idx(i_hi, j_hi)] += quad[0] as i32;
                        acc[out_idx(i_hi, j_lo)] += quad[1] as i32;
                        acc[out_idx(i_lo, j_hi)] += quad[2] as i32;
                        acc[out_idx(i_lo, j_lo)] += quad[3] as i32;
                        trace.intra_adds += 4;
                    }
                }
            }
        }
    }
    (acc.map(i64::from), trace)
}

/// The 16 shared inter-lane accumulators.
pub fn interlane_reduce(partials: &[[i64; TILE]; LANES]) -> [i64; TILE] {
    let mut out = [0i64; TILE];
    for lane in partials {
        for (o, p) in out.iter_mut().zip(lane) {
            *o += p;
        }
    }
    out
}

/// Execute `camp` with wrapping accumulation; `overflow` flags any output
/// whose exact value left the signed 32-bit range.
pub fn camp_exec(vr0: &VecReg512, vr1: &VecReg512, vr2: &VecReg512, mode: CampMode) -> CampResult {
    let mut partials = [[0i64; TILE]; LANES];
    let mut traces = [LaneTrace::default(); LANES];
    for lane in 0..LANES {
        let (p, t) = lane_outer(lane, &vr1.lane(lane), &vr2.lane(lane), mode);
        partials[lane] = p;
        traces[lane] = t;
    }
    let sums = interlane_reduce(&partials);
    let acc = unpack_i32(vr0);
    let mut out = [0i32; TILE];
    let mut overflow = false;
    for ((o, &a), &s) in out.iter_mut().zip(&acc).zip(&sums) {
        let exact = a as i64 + s;
        overflow |= exact != exact as i32 as i64;
        *o = exact as i32;
    }
    CampResult {
        vr0: pack_i32(&out).expect("16 accumulators"),
        traces,
        overflow,
    }
}

/// [`camp_exec`] under an explicit overflow policy.
pub fn camp_exec_with(
    vr0: &VecReg512,
    vr1: &VecReg512,
    vr2: &VecReg512,
    mode: CampMode,
    policy: OverflowPolicy,
) -> Result<CampResult> {
    let r = camp_exec(vr0, vr1, vr2, mode);
    if r.overflow && policy == OverflowPolicy::Strict {
        return Err(Error::Overflow(format!("camp {mode} accumulate")));
    }
    Ok(r)
}
