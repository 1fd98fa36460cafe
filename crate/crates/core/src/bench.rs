//! Benchmark suite runner.
//!
//! Every shape x backend job draws uniform in-range operands from a seeded
//! ChaCha stream, runs the blocked GeMM and checks it against the naive
//! oracle. Shapes up to `verify_threshold` MACs are checked in full; larger
//! ones compute and check a deterministic sample of 4x4 output tiles through
//! the same packing and micro-kernel path, while their instruction counts
//! come from the analytic tally.
//!
//! Operand row `r` of matrix `X` in layer `l` of suite `s` comes from a
//! ChaCha8 stream keyed by `sha256(seed, s, l, X)` at stream index `r`, so
//! any row can be regenerated alone and results never depend on scheduling.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::campunit::{CampMode, OverflowPolicy, TILE, TILE_DIM};
use crate::costmodel::{model_cycles, render_cost_configs, CostConfig, InstructionCounts};
use crate::error::{Error, Result};
use crate::gemm::{blocked_counts, gemm_blocked, gemm_naive, gemm_tiles, naive_tile, Backend, BlockingParams};
use crate::matrix::Matrix;
use crate::shapes::{builtin_shapes, LayerShape, DEFAULT_SEQ_LEN};

pub const DEFAULT_VERIFY_THRESHOLD: u64 = 1 << 24;
pub const DEFAULT_SAMPLE_TILES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub suites: Vec<String>,
    pub backends: Vec<Backend>,
    pub configs: Vec<CostConfig>,
    pub seed: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Largest MAC count verified in full.
    pub verify_threshold: u64,
    pub sample_tiles: usize,
    pub seq_len: usize,
    pub params: BlockingParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            suites: Vec::new(),
            backends: Vec::new(),
            configs: CostConfig::presets(),
            seed: 0,
            threads: None,
            verify_threshold: DEFAULT_VERIFY_THRESHOLD,
            sample_tiles: DEFAULT_SAMPLE_TILES,
            seq_len: DEFAULT_SEQ_LEN,
            params: BlockingParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verification {
    Full,
    Sampled,
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verification::Full => "full",
            Verification::Sampled => "sampled",
        })
    }
}

impl FromStr for Verification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Verification::Full),
            "sampled" => Ok(Verification::Sampled),
            _ => Err(Error::Unknown {
                kind: "verification",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeledCycles {
    pub config: String,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub benchmark: String,
    pub layer_index: usize,
    pub label: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub backend: Backend,
    pub verification: Verification,
    /// 4x4 output tiles compared against the oracle.
    pub verified_tiles: u64,
    pub checksum: String,
    pub oracle_checksum: String,
    pub counts: InstructionCounts,
    pub modeled_cycles: Vec<ModeledCycles>,
    /// Baseline vector instructions over this backend's; `camp` backends only.
    pub reduction_ratio: Option<f64>,
}

impl BenchRecord {
    pub fn shape(&self) -> LayerShape {
        LayerShape::new(&self.benchmark, self.layer_index, &self.label, self.m, self.n, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMeta {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub seq_len: usize,
    pub suites: Vec<String>,
    pub backends: Vec<Backend>,
    pub configs: Vec<String>,
    pub config_hash: String,
    pub blocking: BlockingParams,
    pub verify_threshold: u64,
    pub sample_tiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub meta: BenchMeta,
    pub records: Vec<BenchRecord>,
}

fn hex16(digest: &[u8]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Truncated SHA-256 of the cost configurations as rendered to TOML.
pub fn config_hash(configs: &[CostConfig]) -> String {
    if configs.is_empty() {
        return hex16(&Sha256::digest(b""));
    }
    hex16(&Sha256::digest(render_cost_configs(configs).as_bytes()))
}

/// Truncated SHA-256 of 32-bit little-endian values.
pub fn checksum_i32<'a>(values: impl IntoIterator<Item = &'a i32>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex16(&h.finalize())
}

fn stream_key(seed: u64, benchmark: &str, layer: usize, what: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [benchmark.as_bytes(), &(layer as u64).to_le_bytes(), what.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.finalize().into()
}

/// Seeded operand source for one layer.
#[derive(Debug, Clone)]
pub struct OperandGen {
    key_a: [u8; 32],
    key_b: [u8; 32],
    lo: i8,
    hi: i8,
}

impl OperandGen {
    pub fn new(seed: u64, shape: &LayerShape, mode: CampMode) -> Self {
        let (lo, hi) = mode.element_range();
        OperandGen {
            key_a: stream_key(seed, &shape.benchmark, shape.layer_index, "A"),
            key_b: stream_key(seed, &shape.benchmark, shape.layer_index, "B"),
            lo,
            hi,
        }
    }

    fn rows(&self, key: &[u8; 32], row0: usize, rows: usize, cols: usize) -> Matrix<i8> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in row0..row0 + rows {
            let mut rng = ChaCha8Rng::from_seed(*key);
            rng.set_stream(r as u64);
            data.extend((0..cols).map(|_| rng.gen_range(self.lo..=self.hi)));
        }
        Matrix::new(rows, cols, data).expect("generated extent")
    }

    /// Rows `row0..row0 + rows` of the `m x k` operand A.
    pub fn a_rows(&self, row0: usize, rows: usize, k: usize) -> Matrix<i8> {
        self.rows(&self.key_a, row0, rows, k)
    }

    /// The full `k x n` operand B.
    pub fn b(&self, k: usize, n: usize) -> Matrix<i8> {
        self.rows(&self.key_b, 0, k, n)
    }
}

/// Output tiles checked for a sampled shape: the four corner tiles plus
/// seeded random ones, sorted row-major. Every tile when the grid is small.
pub fn sample_tiles(seed: u64, shape: &LayerShape, count: usize) -> Vec<(usize, usize)> {
    let (tr, tc) = (shape.m.div_ceil(TILE_DIM), shape.n.div_ceil(TILE_DIM));
    if tr * tc <= count {
        return (0..tr).flat_map(|r| (0..tc).map(move |c| (r, c))).collect();
    }
    let mut picked: BTreeSet<(usize, usize)> = [(0, 0), (0, tc - 1), (tr - 1, 0), (tr - 1, tc - 1)]
        .into_iter()
        .take(count)
        .collect();
    let mut rng = ChaCha8Rng::from_seed(stream_key(seed, &shape.benchmark, shape.layer_index, "tiles"));
    while picked.len() < count {
        picked.insert((rng.gen_range(0..tr), rng.gen_range(0..tc)));
    }
    picked.into_iter().collect()
}

fn to_i32(v: i64, what: &dyn Fn() -> String) -> Result<i32> {
    i32::try_from(v).map_err(|_| Error::Overflow(format!("{}: oracle value {v} exceeds 32 bits", what())))
}

struct Checked {
    verification: Verification,
    tiles: u64,
    checksum: String,
    oracle_checksum: String,
}

fn describe(shape: &LayerShape, backend: Backend) -> String {
    format!(
        "{} layer {} ({}x{}x{}) on {backend}",
        shape.benchmark, shape.layer_index, shape.m, shape.n, shape.k
    )
}

fn verify_full(cfg: &BenchConfig, shape: &LayerShape, backend: Backend, gen: &OperandGen) -> Result<Checked> {
    let what = || describe(shape, backend);
    let a = gen.a_rows(0, shape.m, shape.k);
    let b = gen.b(shape.k, shape.n);
    let out = gemm_blocked(&a, &b, &cfg.params, backend, OverflowPolicy::Strict)?;
    let want = gemm_naive(&a, &b)?;
    let oracle: Vec<i32> = want.data().iter().map(|&v| to_i32(v, &what)).collect::<Result<_>>()?;
    if let Some(i) = out.c.data().iter().zip(&oracle).position(|(g, w)| g != w) {
        return Err(Error::Verification(format!(
            "{}: C[{}][{}] = {}, oracle {}",
            what(),
            i / shape.n,
            i % shape.n,
            out.c.data()[i],
            oracle[i]
        )));
    }
    let tally = blocked_counts(shape.m, shape.n, shape.k, &cfg.params, backend)?;
    if out.counts != tally {
        return Err(Error::Verification(format!(
            "{}: executed counts differ from tally",
            what()
        )));
    }
    Ok(Checked {
        verification: Verification::Full,
        tiles: (shape.m.div_ceil(TILE_DIM) * shape.n.div_ceil(TILE_DIM)) as u64,
        checksum: checksum_i32(out.c.data()),
        oracle_checksum: checksum_i32(&oracle),
    })
}

fn verify_sampled(cfg: &BenchConfig, shape: &LayerShape, backend: Backend, gen: &OperandGen) -> Result<Checked> {
    let what = || describe(shape, backend);
    let tiles = sample_tiles(cfg.seed, shape, cfg.sample_tiles.max(1));
    let b = gen.b(shape.k, shape.n);
    let mut got: Vec<i32> = Vec::with_capacity(tiles.len() * TILE);
    let mut oracle: Vec<i32> = Vec::with_capacity(tiles.len() * TILE);
    let mut start = 0;
    while start < tiles.len() {
        let tr = tiles[start].0;
        let end = start + tiles[start..].iter().take_while(|t| t.0 == tr).count();
        let row0 = tr * TILE_DIM;
        let a = gen.a_rows(row0, TILE_DIM.min(shape.m - row0), shape.k);
        let local: Vec<(usize, usize)> = tiles[start..end].iter().map(|&(_, tc)| (0, tc)).collect();
        let computed = gemm_tiles(&a, &b, &cfg.params, backend, OverflowPolicy::Strict, &local)?;
        for (&(_, tc), tile) in local.iter().zip(&computed) {
            let want = naive_tile(&a, &b, 0, tc);
            for (cell, (&g, &w)) in tile.iter().zip(&want).enumerate() {
                if g as i64 != w {
                    return Err(Error::Verification(format!(
                        "{}: C[{}][{}] = {g}, oracle {w}",
                        what(),
                        row0 + cell / TILE_DIM,
                        tc * TILE_DIM + cell % TILE_DIM
                    )));
                }
                oracle.push(to_i32(w, &what)?);
            }
            got.extend_from_slice(tile);
        }
        start = end;
    }
    Ok(Checked {
        verification: Verification::Sampled,
        tiles: tiles.len() as u64,
        checksum: checksum_i32(&got),
        oracle_checksum: checksum_i32(&oracle),
    })
}

/// Run and verify one shape on one backend.
pub fn run_shape(cfg: &BenchConfig, shape: &LayerShape, backend: Backend) -> Result<BenchRecord> {
    shape.validate()?;
    let gen = OperandGen::new(cfg.seed, shape, backend.operand_mode());
    let checked = if shape.macs() <= cfg.verify_threshold {
        verify_full(cfg, shape, backend, &gen)?
    } else {
        verify_sampled(cfg, shape, backend, &gen)?
    };
    let counts = blocked_counts(shape.m, shape.n, shape.k, &cfg.params, backend)?;
    let reduction_ratio = if backend.is_camp() {
        let base = blocked_counts(shape.m, shape.n, shape.k, &cfg.params, Backend::GenericVecModel)?;
        Some(base.vector_total() as f64 / counts.vector_total() as f64)
    } else {
        None
    };
    Ok(BenchRecord {
        benchmark: shape.benchmark.clone(),
        layer_index: shape.layer_index,
        label: shape.label.clone(),
        m: shape.m,
        n: shape.n,
        k: shape.k,
        backend,
        verification: checked.verification,
        verified_tiles: checked.tiles,
        checksum: checked.checksum,
        oracle_checksum: checked.oracle_checksum,
        counts,
        modeled_cycles: cfg
            .configs
            .iter()
            .map(|c| ModeledCycles {
                config: c.name.clone(),
                cycles: model_cycles(&counts, c),
            })
            .collect(),
        reduction_ratio,
    })
}

pub fn bench_meta(cfg: &BenchConfig) -> BenchMeta {
    BenchMeta {
        tool: "campsim".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        seq_len: cfg.seq_len,
        suites: cfg.suites.clone(),
        backends: cfg.backends.clone(),
        configs: cfg.configs.iter().map(|c| c.name.clone()).collect(),
        config_hash: config_hash(&cfg.configs),
        blocking: cfg.params,
        verify_threshold: cfg.verify_threshold,
        sample_tiles: cfg.sample_tiles,
    }
}

/// Run every shape of every suite on every backend. Records come out in
/// suite, layer, backend order whatever the thread count.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.params.validate()?;
    let mut jobs = Vec::new();
    for suite in &cfg.suites {
        for shape in builtin_shapes(suite, cfg.seq_len)? {
            for &backend in &cfg.backends {
                jobs.push((shape.clone(), backend));
            }
        }
    }
    let run = || -> Result<Vec<BenchRecord>> {
        jobs.par_iter()
            .map(|(shape, backend)| run_shape(cfg, shape, *backend))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    };
    let records = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(BenchReport {
        meta: bench_meta(cfg),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(suites: &[&str], backends: &[Backend]) -> BenchConfig {
        BenchConfig {
            suites: suites.iter().map(|s| s.to_string()).collect(),
            backends: backends.to_vec(),
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn rows_regenerate_independently() {
        let shape = LayerShape::new("t", 3, "x", 9, 5, 40);
        let gen = OperandGen::new(7, &shape, CampMode::Int8);
        let all = gen.a_rows(0, 9, 40);
        let tail = gen.a_rows(6, 3, 40);
        assert_eq!(&all.data()[6 * 40..], tail.data());
        let g4 = OperandGen::new(7, &shape, CampMode::Int4);
        assert!(g4.b(40, 5).data().iter().all(|v| (-8..=7).contains(v)));
        let other = OperandGen::new(8, &shape, CampMode::Int8);
        assert_ne!(other.a_rows(0, 9, 40), all);
    }

    #[test]
    fn sample_tiles_cover_corners() {
        let shape = LayerShape::new("t", 1, "x", 50176, 64, 576);
        let t = sample_tiles(1, &shape, 10);
        assert_eq!(t.len(), 10);
        assert!(t.contains(&(0, 0)) && t.contains(&(12543, 15)));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t, sample_tiles(1, &shape, 10));
        let small = LayerShape::new("t", 1, "x", 5, 5, 1);
        assert_eq!(sample_tiles(1, &small, 10).len(), 4);
    }

    #[test]
    fn smm_naive_has_no_ratio() {
        let mut c = cfg(&["smm"], &[Backend::NaiveI32]);
        c.verify_threshold = 1 << 18;
        let r = run_bench(&c).unwrap();
        assert_eq!(r.records.len(), 6);
        for rec in &r.records {
            assert_eq!(rec.checksum, rec.oracle_checksum);
            assert!(rec.reduction_ratio.is_none());
        }
        assert_eq!(r.records[0].verification, Verification::Full);
        assert_eq!(r.records[5].verification, Verification::Sampled);
    }

    #[test]
    fn int8_backends_share_operands() {
        let c = cfg(
            &["smm"],
            &[Backend::CampI8, Backend::NaiveI32, Backend::GenericVecModel],
        );
        let shape = LayerShape::new("smm", 2, "square", 64, 64, 64);
        let sums: Vec<String> = c
            .backends
            .iter()
            .map(|&b| run_shape(&c, &shape, b).unwrap().checksum)
            .collect();
        assert!(sums.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn unknown_suite_fails() {
        assert!(run_bench(&cfg(&["lenet"], &[Backend::CampI8])).is_err());
    }

    #[test]
    fn meta_has_no_thread_count() {
        let mut a = cfg(&["smm"], &[Backend::CampI8]);
        let mut b = a.clone();
        a.threads = Some(1);
        b.threads = Some(3);
        assert_eq!(bench_meta(&a), bench_meta(&b));
    }
}
