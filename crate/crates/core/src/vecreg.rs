//! 512-bit vector register images.
//!
//! A [`VecReg512`] is the raw byte image of one architectural vector
//! register. Byte 0 is the lowest address. Lane `w` of the 8-lane datapath
//! sees bytes `[8w, 8w + 8)`.
//!
//! Element layouts:
//!
//! * `i8`: element `i` is byte `i` (two's complement).
//! * `i4`: element `2j` is the low nibble of byte `j`, element `2j + 1` the
//!   high nibble.
//! * `i32`: element `i` is bytes `[4i, 4i + 4)`, little-endian.

use std::fmt;

use crate::campunit::CampMode;
use crate::error::{Error, Result};

pub const REG_BYTES: usize = 64;
pub const LANES: usize = 8;
pub const LANE_BYTES: usize = REG_BYTES / LANES;

pub const I4_MIN: i8 = -8;
pub const I4_MAX: i8 = 7;

/// One lane's 64-bit segment of a register.
pub type LaneWord = [u8; LANE_BYTES];

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct VecReg512([u8; REG_BYTES]);

impl Default for VecReg512 {
    fn default() -> Self {
        Self::zero()
    }
}

impl VecReg512 {
    pub const fn zero() -> Self {
        VecReg512([0; REG_BYTES])
    }

    pub const fn from_bytes(bytes: [u8; REG_BYTES]) -> Self {
        VecReg512(bytes)
    }

    pub fn bytes(&self) -> &[u8; REG_BYTES] {
        &self.0
    }

    /// The 64-bit segment routed to `lane`.
    pub fn lane_slice(&self, lane: usize) -> Result<LaneWord> {
        if lane >= LANES {
            return Err(Error::Index {
                index: lane,
                limit: LANES,
            });
        }
        Ok(self.lane(lane))
    }

    #[inline]
    pub(crate) fn lane(&self, lane: usize) -> LaneWord {
        let mut w = [0u8; LANE_BYTES];
        w.copy_from_slice(&self.0[lane * LANE_BYTES..(lane + 1) * LANE_BYTES]);
        w
    }

    pub fn from_lanes(lanes: &[LaneWord; LANES]) -> Self {
        let mut bytes = [0u8; REG_BYTES];
        for (chunk, lane) in bytes.chunks_exact_mut(LANE_BYTES).zip(lanes) {
            chunk.copy_from_slice(lane);
        }
        VecReg512(bytes)
    }

    /// Lowercase hex, byte 0 first.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != REG_BYTES * 2 {
            return Err(Error::shape(format!("{} hex digits", REG_BYTES * 2), s.len()));
        }
        let mut bytes = [0u8; REG_BYTES];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::Input(format!("bad hex at byte {i}: {e}")))?;
        }
        Ok(VecReg512(bytes))
    }
}

impl fmt::Debug for VecReg512 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VecReg512({})", self.to_hex())
    }
}

/// How many elements of a given width one register holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementLayout {
    pub mode: CampMode,
    pub elements_per_register: usize,
}

impl ElementLayout {
    pub const fn for_mode(mode: CampMode) -> Self {
        let elements_per_register = match mode {
            CampMode::Int8 => 64,
            CampMode::Int4 => 128,
        };
        ElementLayout {
            mode,
            elements_per_register,
        }
    }

    pub const fn element_bits(&self) -> usize {
        512 / self.elements_per_register
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::shape(format!("{expected} elements"), got));
    }
    Ok(())
}

pub fn pack_i8(elems: &[i8]) -> Result<VecReg512> {
    check_len(elems.len(), REG_BYTES)?;
    let mut bytes = [0u8; REG_BYTES];
    for (b, &e) in bytes.iter_mut().zip(elems) {
        *b = e as u8;
    }
    Ok(VecReg512(bytes))
}

pub fn unpack_i8(reg: &VecReg512) -> [i8; REG_BYTES] {
    reg.0.map(|b| b as i8)
}

pub fn pack_i4(elems: &[i8]) -> Result<VecReg512> {
    check_len(elems.len(), 2 * REG_BYTES)?;
    let mut bytes = [0u8; REG_BYTES];
    for (b, pair) in bytes.iter_mut().zip(elems.chunks_exact(2)) {
        for &e in pair {
            check_i4(e)?;
        }
        *b = (pair[0] as u8 & 0x0f) | ((pair[1] as u8 & 0x0f) << 4);
    }
    Ok(VecReg512(bytes))
}

pub fn unpack_i4(reg: &VecReg512) -> [i8; 2 * REG_BYTES] {
    let mut out = [0i8; 2 * REG_BYTES];
    for (j, &b) in reg.0.iter().enumerate() {
        let (lo, hi) = split_nibbles(b);
        out[2 * j] = lo;
        out[2 * j + 1] = hi;
    }
    out
}

pub fn pack_i32(elems: &[i32]) -> Result<VecReg512> {
    check_len(elems.len(), REG_BYTES / 4)?;
    let mut bytes = [0u8; REG_BYTES];
    for (chunk, &e) in bytes.chunks_exact_mut(4).zip(elems) {
        chunk.copy_from_slice(&e.to_le_bytes());
    }
    Ok(VecReg512(bytes))
}

pub fn unpack_i32(reg: &VecReg512) -> [i32; REG_BYTES / 4] {
    let mut out = [0i32; REG_BYTES / 4];
    for (o, chunk) in out.iter_mut().zip(reg.0.chunks_exact(4)) {
        *o = i32::from_le_bytes(chunk.try_into().unwrap());
    }
    out
}

/// Sign-extended (low, high) nibbles of one byte.
#[inline]
pub fn split_nibbles(b: u8) -> (i8, i8) {
    (((b << 4) as i8) >> 4, (b as i8) >> 4)
}

pub(crate) fn check_i4(v: i8) -> Result<()> {
    if !(I4_MIN..=I4_MAX).contains(&v) {
        return Err(Error::Range {
            value: v as i64,
            lo: I4_MIN as i64,
            hi: I4_MAX as i64,
        });
    }
    Ok(())
}
