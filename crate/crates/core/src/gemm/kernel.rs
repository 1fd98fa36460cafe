//! 4x4 micro-kernels over packed slivers.

use crate::campunit::{camp_exec_with, CampMode, OverflowPolicy, TILE, TILE_DIM};
use crate::costmodel::InstructionCounts;
use crate::error::{Error, Result};
use crate::vecreg::{pack_i4, pack_i8, unpack_i32, VecReg512};

/// One micro-kernel invocation: a 4x4 row-major tile and what it issued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileOutput {
    pub tile: [i32; TILE],
    pub counts: InstructionCounts,
    pub overflow: bool,
}

fn check_slivers(pa: &[i8], pb: &[i8], kc: usize) -> Result<()> {
    let need = kc * TILE_DIM;
    if pa.len() < need || pb.len() < need {
        return Err(Error::shape(
            format!("slivers of at least {need} elements"),
            format!("{} and {}", pa.len(), pb.len()),
        ));
    }
    Ok(())
}

/// Tally of [`micro_kernel_camp`]: per iteration two 512-bit loads and one
/// `camp`, then one store of the accumulated tile.
pub fn camp_kernel_counts(kc: usize, mode: CampMode) -> InstructionCounts {
    let iters = (kc / mode.k_step()) as u64;
    InstructionCounts {
        vec_loads: 2 * iters,
        camp_ops: iters,
        vec_stores: 1,
        ..Default::default()
    }
}

/// `camp` micro-kernel: `kc / k_step` iterations, each loading one register
/// of A and one of B straight from the packed slivers and accumulating into
/// the auxiliary register `vr0`.
pub fn micro_kernel_camp(
    pa: &[i8],
    pb: &[i8],
    kc: usize,
    mode: CampMode,
    policy: OverflowPolicy,
) -> Result<TileOutput> {
    let step = mode.k_step();
    if !kc.is_multiple_of(step) {
        return Err(Error::Config(format!("kc {kc} is not a multiple of {step}")));
    }
    check_slivers(pa, pb, kc)?;
    let chunk = step * TILE_DIM;
    let load = match mode {
        CampMode::Int8 => pack_i8,
        CampMode::Int4 => pack_i4,
    };
    let mut vr0 = VecReg512::zero();
    let mut overflow = false;
    for it in 0..kc / step {
        let vr1 = load(&pa[it * chunk..(it + 1) * chunk])?;
        let vr2 = load(&pb[it * chunk..(it + 1) * chunk])?;
        let r = camp_exec_with(&vr0, &vr1, &vr2, mode, policy)?;
        overflow |= r.overflow;
        vr0 = r.vr0;
    }
    Ok(TileOutput {
        tile: unpack_i32(&vr0),
        counts: camp_kernel_counts(kc, mode),
        overflow,
    })
}

/// Element-wise vector baseline, counts only. Per k-step: one load of the A
/// column, four broadcasts of the B row elements, four multiply-adds into
/// the four accumulator registers; then four accumulator stores.
pub fn micro_kernel_generic_model(kc: usize) -> InstructionCounts {
    let kc = kc as u64;
    InstructionCounts {
        vec_loads: kc,
        broadcast_ops: 4 * kc,
        vec_alu_ops: 4 * kc,
        vec_stores: TILE_DIM as u64,
        ..Default::default()
    }
}

fn finish(acc: [i64; TILE], policy: OverflowPolicy, what: &str) -> Result<([i32; TILE], bool)> {
    let mut tile = [0i32; TILE];
    let mut overflow = false;
    for (t, &a) in tile.iter_mut().zip(&acc) {
        overflow |= a != a as i32 as i64;
        *t = a as i32;
    }
    if overflow && policy == OverflowPolicy::Strict {
        return Err(Error::Overflow(what.to_string()));
    }
    Ok((tile, overflow))
}

/// Element-wise vector baseline executed on data: accumulator register `j`
/// holds column `j` of the tile and receives `a_col * broadcast(b[k][j])`.
pub fn micro_kernel_generic(pa: &[i8], pb: &[i8], kc: usize, policy: OverflowPolicy) -> Result<TileOutput> {
    check_slivers(pa, pb, kc)?;
    let mut acc = [[0i64; TILE_DIM]; TILE_DIM];
    for kk in 0..kc {
        let col = &pa[kk * TILE_DIM..(kk + 1) * TILE_DIM];
        for (j, reg) in acc.iter_mut().enumerate() {
            let bj = pb[kk * TILE_DIM + j] as i64;
            for (lane, &a) in reg.iter_mut().zip(col) {
                *lane += a as i64 * bj;
            }
        }
    }
    let mut flat = [0i64; TILE];
    for (j, reg) in acc.iter().enumerate() {
        for (i, &v) in reg.iter().enumerate() {
            flat[i * TILE_DIM + j] = v;
        }
    }
    let (tile, overflow) = finish(flat, policy, "generic kernel accumulate")?;
    Ok(TileOutput {
        tile,
        counts: micro_kernel_generic_model(kc),
        overflow,
    })
}

/// Scalar 32-bit kernel: one multiply-add per output per k, plus 16 stores.
pub fn scalar_kernel_counts(kc: usize) -> InstructionCounts {
    InstructionCounts {
        scalar_ops: (kc * TILE + TILE) as u64,
        ..Default::default()
    }
}

pub fn micro_kernel_scalar(pa: &[i8], pb: &[i8], kc: usize, policy: OverflowPolicy) -> Result<TileOutput> {
    check_slivers(pa, pb, kc)?;
    let mut acc = [0i64; TILE];
    for kk in 0..kc {
        for i in 0..TILE_DIM {
            let a = pa[kk * TILE_DIM + i] as i64;
            for j in 0..TILE_DIM {
                acc[i * TILE_DIM + j] += a * pb[kk * TILE_DIM + j] as i64;
            }
        }
    }
    let (tile, overflow) = finish(acc, policy, "scalar kernel accumulate")?;
    Ok(TileOutput {
        tile,
        counts: scalar_kernel_counts(kc),
        overflow,
    })
}
