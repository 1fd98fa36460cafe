//! Divide-and-conquer ("hybrid") integer multiplier built from 4-bit blocks.
//!
//! A `2N`-bit operand is split as `A = a1 * 2^N + a0`, with `a1` carrying the
//! operand's sign and `a0` always unsigned. The product is then
//!
//! ```text
//! A * B = a1*b1 * 2^(2N) + (a1*b0 + a0*b1) * 2^N + a0*b0
//! ```
//!
//! Applied recursively this reduces any power-of-two width to 4-bit
//! multiplies. The same four 4-bit blocks that form one 8-bit product can
//! instead deliver four independent signed 4-bit products, which is how the
//! int4 mode of the datapath gets four times the products for free.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signedness {
    Signed,
    Unsigned,
}

impl Signedness {
    const fn range(self) -> (i8, i8) {
        match self {
            Signedness::Signed => (-8, 7),
            Signedness::Unsigned => (0, 15),
        }
    }
}

/// A 4-bit multiplier input, signed `[-8, 7]` or unsigned `[0, 15]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NibbleOperand {
    value: i8,
    signedness: Signedness,
}

impl NibbleOperand {
    pub fn new(value: i8, signedness: Signedness) -> Result<Self> {
        let (lo, hi) = signedness.range();
        if !(lo..=hi).contains(&value) {
            return Err(Error::Range {
                value: value as i64,
                lo: lo as i64,
                hi: hi as i64,
            });
        }
        Ok(NibbleOperand { value, signedness })
    }

    pub fn signed(value: i8) -> Result<Self> {
        Self::new(value, Signedness::Signed)
    }

    pub fn unsigned(value: i8) -> Result<Self> {
        Self::new(value, Signedness::Unsigned)
    }

    pub fn value(&self) -> i8 {
        self.value
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }

    #[inline]
    fn bits(&self) -> usize {
        (self.value as u8 & 0x0f) as usize
    }
}

/// Gate-level 4x4 partial-product array. Bit 3 of a signed operand has
/// weight -8; every other bit has its positional weight.
const fn mul4_array(a: u8, a_signed: bool, b: u8, b_signed: bool) -> i16 {
    let mut acc = 0i16;
    let mut i = 0;
    while i < 4 {
        let mut j = 0;
        while j < 4 {
            if (a >> i) & 1 == 1 && (b >> j) & 1 == 1 {
                let wa: i16 = if a_signed && i == 3 { -8 } else { 1 << i };
                let wb: i16 = if b_signed && j == 3 { -8 } else { 1 << j };
                acc += wa * wb;
            }
            j += 1;
        }
        i += 1;
    }
    acc
}

const fn build_table(a_signed: bool, b_signed: bool) -> [[i16; 16]; 16] {
    let mut t = [[0i16; 16]; 16];
    let mut a = 0;
    while a < 16 {
        let mut b = 0;
        while b < 16 {
            t[a][b] = mul4_array(a as u8, a_signed, b as u8, b_signed);
            b += 1;
        }
        a += 1;
    }
    t
}

// Indexed [a_signed][b_signed][a_bits][b_bits].
static MUL4: [[[[i16; 16]; 16]; 2]; 2] = [
    [build_table(false, false), build_table(false, true)],
    [build_table(true, false), build_table(true, true)],
];

#[inline]
fn mul4_raw(a_bits: usize, a_signed: bool, b_bits: usize, b_signed: bool) -> i16 {
    MUL4[a_signed as usize][b_signed as usize][a_bits][b_bits]
}

/// The 4-bit building block. Exact, never wraps.
#[inline]
pub fn mul4(a: NibbleOperand, b: NibbleOperand) -> i16 {
    mul4_raw(
        a.bits(),
        a.signedness == Signedness::Signed,
        b.bits(),
        b.signedness == Signedness::Signed,
    )
}

/// Split a signed `2N`-bit value into a signed high half and an unsigned
/// low half so that `a == hi * 2^N + lo`.
pub fn decompose(a: i32, half_width: u32) -> Result<(i32, u32)> {
    if !(1..=15).contains(&half_width) {
        return Err(Error::Config(format!("unsupported half width {half_width}")));
    }
    let lo_lim = -(1i64 << (2 * half_width - 1));
    let hi_lim = (1i64 << (2 * half_width - 1)) - 1;
    if !(lo_lim..=hi_lim).contains(&(a as i64)) {
        return Err(Error::Range {
            value: a as i64,
            lo: lo_lim,
            hi: hi_lim,
        });
    }
    Ok((a >> half_width, (a as u32) & ((1u32 << half_width) - 1)))
}

/// The four sub-products of one 8-bit hybrid multiply and their composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HybridProduct8 {
    pub hi_hi: i32,
    pub hi_lo: i32,
    pub lo_hi: i32,
    pub lo_lo: i32,
    pub composed: i32,
}

impl HybridProduct8 {
    #[inline]
    pub fn compose(hi_hi: i32, hi_lo: i32, lo_hi: i32, lo_lo: i32) -> i32 {
        (hi_hi << 8) + ((hi_lo + lo_hi) << 4) + lo_lo
    }
}

/// Signed 8x8 multiply through four 4-bit blocks.
#[inline]
pub fn hybrid_mul8(a: i8, b: i8) -> HybridProduct8 {
    let (ab, bb) = (a as u8, b as u8);
    let (a1, a0) = ((ab >> 4) as usize, (ab & 0x0f) as usize);
    let (b1, b0) = ((bb >> 4) as usize, (bb & 0x0f) as usize);
    let hi_hi = mul4_raw(a1, true, b1, true) as i32;
    let hi_lo = mul4_raw(a1, true, b0, false) as i32;
    let lo_hi = mul4_raw(a0, false, b1, true) as i32;
    let lo_lo = mul4_raw(a0, false, b0, false) as i32;
    HybridProduct8 {
        hi_hi,
        hi_lo,
        lo_hi,
        lo_lo,
        composed: HybridProduct8::compose(hi_hi, hi_lo, lo_hi, lo_lo),
    }
}

/// One 8-bit hybrid block used as a 2x2 grid of signed 4-bit multipliers.
///
/// Returns `[a1*b1, a1*b0, a0*b1, a0*b0]` with no shifting applied.
pub fn quad_products(a_pair: (i8, i8), b_pair: (i8, i8)) -> Result<[i16; 4]> {
    let a1 = NibbleOperand::signed(a_pair.0)?;
    let a0 = NibbleOperand::signed(a_pair.1)?;
    let b1 = NibbleOperand::signed(b_pair.0)?;
    let b0 = NibbleOperand::signed(b_pair.1)?;
    Ok([mul4(a1, b1), mul4(a1, b0), mul4(a0, b1), mul4(a0, b0)])
}

/// Quad products straight from packed bytes: the high nibble is element
/// `a1`, the low nibble `a0`. Every nibble pattern is a valid signed value.
#[inline]
pub(crate) fn quad_products_packed(a: u8, b: u8) -> [i16; 4] {
    let (a1, a0) = ((a >> 4) as usize, (a & 0x0f) as usize);
    let (b1, b0) = ((b >> 4) as usize, (b & 0x0f) as usize);
    [
        mul4_raw(a1, true, b1, true),
        mul4_raw(a1, true, b0, true),
        mul4_raw(a0, true, b1, true),
        mul4_raw(a0, true, b0, true),
    ]
}

fn hybrid_rec(a: i64, a_signed: bool, b: i64, b_signed: bool, width: u32) -> i64 {
    if width == 4 {
        return mul4_raw((a & 0xf) as usize, a_signed, (b & 0xf) as usize, b_signed) as i64;
    }
    let n = width / 2;
    let mask = (1i64 << n) - 1;
    let (a1, a0) = (a >> n, a & mask);
    let (b1, b0) = (b >> n, b & mask);
    let hh = hybrid_rec(a1, a_signed, b1, b_signed, n);
    let hl = hybrid_rec(a1, a_signed, b0, false, n);
    let lh = hybrid_rec(a0, false, b1, b_signed, n);
    let ll = hybrid_rec(a0, false, b0, false, n);
    (hh << (2 * n)) + ((hl + lh) << n) + ll
}

/// Signed `2N`-bit multiply built recursively from 4-bit blocks.
///
/// `half_width` is `N`; 4 gives the 8-bit hybrid, 8 a 16-bit multiplier
/// whose four sub-multipliers are themselves 8-bit hybrids.
pub fn compose2n(a: i32, b: i32, half_width: u32) -> Result<i64> {
    if half_width != 4 && half_width != 8 {
        return Err(Error::Config(format!(
            "half width {half_width} not supported (expected 4 or 8)"
        )));
    }
    decompose(a, half_width)?;
    decompose(b, half_width)?;
    if half_width == 4 {
        return Ok(hybrid_mul8(a as i8, b as i8).composed as i64);
    }
    Ok(hybrid_rec(a as i64, true, b as i64, true, 2 * half_width))
}
