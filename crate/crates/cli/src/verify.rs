//! Self-checks run by `campsim verify`, each against plain integer arithmetic.

use campsim_core::campunit::{camp_exec, CampMode};
use campsim_core::hybridmul::{hybrid_mul8, mul4, quad_products, NibbleOperand, Signedness};
use campsim_core::vecreg::{unpack_i32, unpack_i4, unpack_i8, VecReg512};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }
}

pub fn hybrid_exhaustive() -> Check {
    let mut c = Check::new("hybrid_mul8 (all int8 pairs)");
    for a in i8::MIN..=i8::MAX {
        for b in i8::MIN..=i8::MAX {
            let got = hybrid_mul8(a, b).composed;
            c.record(got == a as i32 * b as i32, || format!("{a} * {b} gave {got}"));
        }
    }
    c
}

pub fn nibble_blocks() -> Check {
    let mut c = Check::new("4-bit block (all signedness combinations)");
    let values = |s: Signedness| match s {
        Signedness::Signed => -8i8..=7,
        Signedness::Unsigned => 0i8..=15,
    };
    for sa in [Signedness::Signed, Signedness::Unsigned] {
        for sb in [Signedness::Signed, Signedness::Unsigned] {
            for a in values(sa) {
                for b in values(sb) {
                    let got = mul4(NibbleOperand::new(a, sa).unwrap(), NibbleOperand::new(b, sb).unwrap());
                    c.record(got as i32 == a as i32 * b as i32, || {
                        format!("{a:?}{sa:?} * {b}{sb:?} gave {got}")
                    });
                }
            }
        }
    }
    c
}

pub fn quad_exhaustive() -> Check {
    let mut c = Check::new("int4 quad products (all 16^4 combinations)");
    for a1 in -8i8..=7 {
        for a0 in -8i8..=7 {
            for b1 in -8i8..=7 {
                for b0 in -8i8..=7 {
                    let got = quad_products((a1, a0), (b1, b0)).unwrap();
                    let want = [a1 * b1, a1 * b0, a0 * b1, a0 * b0].map(i16::from);
                    c.record(got == want, || format!("({a1},{a0}) x ({b1},{b0}) gave {got:?}"));
                }
            }
        }
    }
    c
}

fn random_reg(rng: &mut ChaCha8Rng) -> VecReg512 {
    let mut b = [0u8; 64];
    rng.fill(&mut b[..]);
    VecReg512::from_bytes(b)
}

/// `vr0 + A x B` with A column-major and B row-major, wrapped to 32 bits.
fn camp_oracle(vr0: &VecReg512, a: &[i8], b: &[i8], depth: usize) -> ([i32; 16], bool) {
    let acc = unpack_i32(vr0);
    let mut out = [0i32; 16];
    let mut overflow = false;
    for i in 0..4 {
        for j in 0..4 {
            let s: i64 = (0..depth).map(|k| a[k * 4 + i] as i64 * b[k * 4 + j] as i64).sum();
            let exact = acc[i * 4 + j] as i64 + s;
            overflow |= exact < i32::MIN as i64 || exact > i32::MAX as i64;
            out[i * 4 + j] = exact as i32;
        }
    }
    (out, overflow)
}

pub fn camp_random(mode: CampMode, triples: u64, seed: u64) -> Check {
    let mut c = Check::new(match mode {
        CampMode::Int8 => "camp int8 (random register triples)",
        CampMode::Int4 => "camp int4 (random register triples)",
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..triples {
        let (vr0, vr1, vr2) = (random_reg(&mut rng), random_reg(&mut rng), random_reg(&mut rng));
        let (want, overflow) = match mode {
            CampMode::Int8 => camp_oracle(&vr0, &unpack_i8(&vr1), &unpack_i8(&vr2), 16),
            CampMode::Int4 => camp_oracle(&vr0, &unpack_i4(&vr1), &unpack_i4(&vr2), 32),
        };
        let r = camp_exec(&vr0, &vr1, &vr2, mode);
        let ok = unpack_i32(&r.vr0) == want && r.overflow == overflow;
        c.record(ok, || {
            format!("vr0={} vr1={} vr2={}", vr0.to_hex(), vr1.to_hex(), vr2.to_hex())
        });
    }
    c
}

pub fn run_all(exhaustive: bool, seed: u64) -> Vec<Check> {
    let triples = if exhaustive { 100_000 } else { 10_000 };
    let mut checks = vec![nibble_blocks(), hybrid_exhaustive()];
    if exhaustive {
        checks.push(quad_exhaustive());
    }
    checks.push(camp_random(CampMode::Int8, triples, seed));
    checks.push(camp_random(CampMode::Int4, triples, seed ^ 0x5bd1_e995));
    checks
}
