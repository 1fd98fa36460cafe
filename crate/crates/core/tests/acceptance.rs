//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always
//! printed. Every oracle here is written from the documented data layouts
//! and does not call the library's own reference paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use campsim_core::bench::{BenchConfig, OperandGen};
use campsim_core::campunit::{camp_exec, CampMode, OverflowPolicy};
use campsim_core::costmodel::{design_space_report, reduction_ratio, CostConfig, REFERENCE_SPEEDUPS};
use campsim_core::gemm::{
    blocked_counts, dequantize, gemm_blocked, gemm_tiles, micro_kernel_camp, quantize, Backend, BlockingParams,
    QuantParams,
};
use campsim_core::hybridmul::{hybrid_mul8, mul4, quad_products, NibbleOperand, Signedness};
use campsim_core::im2col::{conv2d_gemm, ConvSpec, Tensor3};
use campsim_core::matrix::Matrix;
use campsim_core::report::{render, ReportFormat};
use campsim_core::run_bench;
use campsim_core::shapes::{builtin_shapes, LayerShape, CNN_SUITES};
use campsim_core::vecreg::VecReg512;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_hybrid_exhaustive() -> Outcome {
    let t = Instant::now();
    let mut cases = 0u32;
    for a in i8::MIN..=i8::MAX {
        for b in i8::MIN..=i8::MAX {
            let p = hybrid_mul8(a, b);
            ensure(p.composed == a as i32 * b as i32, || {
                format!("{a} * {b} -> {}", p.composed)
            })?;
            cases += 1;
        }
    }
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(5), || format!("took {dt:?}"))?;
    Ok(format!("{cases} pairs, 0 failures, {:.1} ms", dt.as_secs_f64() * 1e3))
}

fn c2_nibble_blocks() -> Outcome {
    let range = |s| match s {
        Signedness::Signed => -8i32..=7,
        Signedness::Unsigned => 0i32..=15,
    };
    let mut block = 0;
    for sa in [Signedness::Signed, Signedness::Unsigned] {
        for sb in [Signedness::Signed, Signedness::Unsigned] {
            for a in range(sa) {
                for b in range(sb) {
                    let got = mul4(
                        NibbleOperand::new(a as i8, sa).unwrap(),
                        NibbleOperand::new(b as i8, sb).unwrap(),
                    );
                    ensure(got as i32 == a * b, || format!("{a}{sa:?} * {b}{sb:?} -> {got}"))?;
                    block += 1;
                }
            }
        }
    }
    let mut quad = 0;
    for a1 in -8i32..=7 {
        for a0 in -8i32..=7 {
            for b1 in -8i32..=7 {
                for b0 in -8i32..=7 {
                    let got = quad_products((a1 as i8, a0 as i8), (b1 as i8, b0 as i8)).unwrap();
                    let want = [a1 * b1, a1 * b0, a0 * b1, a0 * b0];
                    ensure(got.map(i32::from) == want, || {
                        format!("({a1},{a0})x({b1},{b0}) -> {got:?}")
                    })?;
                    quad += 1;
                }
            }
        }
    }
    Ok(format!("{block} block cases, {quad} quad cases, 0 failures"))
}

/// Elements of a register image, packed as documented.
fn elements(bytes: &[u8; 64], mode: CampMode) -> Vec<i64> {
    match mode {
        CampMode::Int8 => bytes.iter().map(|&b| b as i8 as i64).collect(),
        CampMode::Int4 => bytes
            .iter()
            .flat_map(|&b| [b & 0x0f, b >> 4])
            .map(|n| if n > 7 { n as i64 - 16 } else { n as i64 })
            .collect(),
    }
}

fn camp_reference(vr0: &[u8; 64], vr1: &[u8; 64], vr2: &[u8; 64], mode: CampMode) -> ([u8; 64], bool) {
    let (a, b) = (elements(vr1, mode), elements(vr2, mode));
    let depth = a.len() / 4;
    let mut out = [0u8; 64];
    let mut overflow = false;
    for i in 0..4 {
        for j in 0..4 {
            let cell = i * 4 + j;
            let acc = i32::from_le_bytes(vr0[cell * 4..cell * 4 + 4].try_into().unwrap()) as i64;
            let exact = acc + (0..depth).map(|k| a[k * 4 + i] * b[k * 4 + j]).sum::<i64>();
            overflow |= exact < i32::MIN as i64 || exact > i32::MAX as i64;
            out[cell * 4..cell * 4 + 4].copy_from_slice(&(exact as i32).to_le_bytes());
        }
    }
    (out, overflow)
}

fn c3_camp_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let per_mode = 10_000;
    let mut overflows = 0;
    for mode in [CampMode::Int8, CampMode::Int4] {
        for t in 0..per_mode {
            let mut regs = [[0u8; 64]; 3];
            for r in regs.iter_mut() {
                rng.fill(&mut r[..]);
            }
            // push some accumulators to the edge so wrapping is exercised
            if t % 10 == 0 {
                let edge = if t % 20 == 0 { i32::MAX - 1000 } else { i32::MIN + 1000 };
                regs[0][..4].copy_from_slice(&edge.to_le_bytes());
            }
            let (want, ovf) = camp_reference(&regs[0], &regs[1], &regs[2], mode);
            let r = camp_exec(
                &VecReg512::from_bytes(regs[0]),
                &VecReg512::from_bytes(regs[1]),
                &VecReg512::from_bytes(regs[2]),
                mode,
            );
            ensure(*r.vr0.bytes() == want && r.overflow == ovf, || {
                format!("{mode} triple {t} differs")
            })?;
            overflows += ovf as u32;
        }
    }
    Ok(format!("{per_mode} triples per mode, 0 failures ({overflows} wrapped)"))
}

fn dot_tile(a: &Matrix<i8>, b: &Matrix<i8>, r: usize, c: usize) -> i64 {
    (0..a.cols()).map(|kk| a.get(r, kk) as i64 * b.get(kk, c) as i64).sum()
}

fn check_full(a: &Matrix<i8>, b: &Matrix<i8>, p: &BlockingParams, be: Backend) -> Result<(), String> {
    let out = gemm_blocked(a, b, p, be, OverflowPolicy::Strict).map_err(|e| e.to_string())?;
    for r in 0..a.rows() {
        for c in 0..b.cols() {
            let want = dot_tile(a, b, r, c);
            ensure(out.c.get(r, c) as i64 == want, || {
                format!("{be} {}x{}x{} C[{r}][{c}]", a.rows(), b.cols(), a.cols())
            })?;
        }
    }
    Ok(())
}

fn c4_gemm_end_to_end() -> Outcome {
    let cfg = BenchConfig::default();
    let p = cfg.params;
    let (mut full, mut sampled, mut tiles_checked) = (0, 0, 0);
    for suite in CNN_SUITES {
        for shape in builtin_shapes(suite, 0).map_err(|e| e.to_string())? {
            for be in [Backend::CampI8, Backend::CampI4] {
                let gen = OperandGen::new(77, &shape, be.operand_mode());
                let b = gen.b(shape.k, shape.n);
                if shape.macs() <= cfg.verify_threshold {
                    check_full(&gen.a_rows(0, shape.m, shape.k), &b, &p, be)?;
                    full += 1;
                    continue;
                }
                let tiles = campsim_core::bench::sample_tiles(77, &shape, cfg.sample_tiles);
                for &(tr, tc) in &tiles {
                    let r0 = tr * 4;
                    let a = gen.a_rows(r0, 4.min(shape.m - r0), shape.k);
                    let got =
                        gemm_tiles(&a, &b, &p, be, OverflowPolicy::Strict, &[(0, tc)]).map_err(|e| e.to_string())?;
                    for i in 0..a.rows() {
                        for j in 0..4.min(shape.n - tc * 4) {
                            let want = dot_tile(&a, &b, i, tc * 4 + j);
                            ensure(got[0][i * 4 + j] as i64 == want, || {
                                format!("{} layer {} {be} tile ({tr},{tc})", shape.benchmark, shape.layer_index)
                            })?;
                        }
                    }
                }
                tiles_checked += tiles.len();
                sampled += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let (m, n, k) = (rng.gen_range(1..=70), rng.gen_range(1..=70), rng.gen_range(1..=200));
        let params = BlockingParams::new(rng.gen_range(1..=80), rng.gen_range(1..=220), rng.gen_range(1..=80))
            .map_err(|e| e.to_string())?;
        for be in [Backend::CampI8, Backend::CampI4] {
            let (lo, hi) = be.operand_mode().element_range();
            let a = Matrix::from_fn(m, k, |_, _| rng.gen_range(lo..=hi));
            let b = Matrix::from_fn(k, n, |_, _| rng.gen_range(lo..=hi));
            check_full(&a, &b, &params, be)?;
        }
    }
    Ok(format!(
        "table shapes: {full} full, {sampled} sampled ({tiles_checked} tiles); 500 ragged shapes x 2 backends"
    ))
}

fn c5_structural_counts() -> Outcome {
    let z = vec![0i8; 64 * 4];
    let t = micro_kernel_camp(&z, &z, 16, CampMode::Int8, OverflowPolicy::Wrap).map_err(|e| e.to_string())?;
    let c = t.counts;
    ensure(
        (
            c.vec_loads,
            c.camp_ops,
            c.vec_stores,
            c.vec_alu_ops + c.broadcast_ops + c.scalar_ops,
        ) == (2, 1, 1, 0),
        || format!("kc=16 tally {c:?}"),
    )?;
    for kc in [32usize, 64] {
        let c = micro_kernel_camp(&z, &z, kc, CampMode::Int8, OverflowPolicy::Wrap)
            .map_err(|e| e.to_string())?
            .counts;
        let it = (kc / 16) as u64;
        ensure((c.vec_loads, c.camp_ops, c.vec_stores) == (2 * it, it, 1), || {
            format!("kc={kc} tally {c:?}")
        })?;
    }
    // whole GeMM at kc = 16: one iteration per tile per k-block
    let p = BlockingParams::new(64, 16, 32).map_err(|e| e.to_string())?;
    let (m, n, k): (usize, usize, usize) = (37, 22, 100);
    let blocks = k.div_ceil(16) as u64;
    let tiles = (m.div_ceil(4) * n.div_ceil(4)) as u64;
    let c = blocked_counts(m, n, k, &p, Backend::CampI8).map_err(|e| e.to_string())?;
    ensure(
        (c.vec_loads, c.camp_ops, c.vec_stores) == (2 * blocks * tiles, blocks * tiles, blocks * tiles),
        || format!("blocked tally {c:?}"),
    )?;
    Ok("kc=16: 2 loads + 1 camp + 1 store; kc/16 iterations per call".into())
}

fn c6_reduction_ratio() -> Outcome {
    let p = BlockingParams::default();
    let mut seen = Vec::new();
    for shape in builtin_shapes("smm", 0).map_err(|e| e.to_string())? {
        let r = reduction_ratio(&shape, &p).map_err(|e| e.to_string())?;
        // independent count: per tile and k-block, the baseline issues
        // 9 per k plus 4 stores; camp issues 3 per 16 k plus 1 store
        let blocks = shape.k.div_ceil(p.kc) as f64;
        let kpad: f64 = (0..shape.k)
            .step_by(p.kc)
            .map(|pc| (p.kc.min(shape.k - pc)).div_ceil(16) as f64)
            .sum();
        let want = (9.0 * shape.k as f64 + 4.0 * blocks) / (3.0 * kpad + blocks);
        ensure((r - want).abs() < 1e-9, || {
            format!("smm {} ratio {r} vs {want}", shape.k)
        })?;
        if shape.k >= 128 {
            ensure(r > 8.0, || format!("smm {} ratio {r:.2} not above 8", shape.k))?;
            seen.push(format!("{}:{r:.1}", shape.k));
        }
    }
    Ok(format!("ratios {}", seen.join(" ")))
}

fn c7_design_space() -> Outcome {
    let shape = LayerShape::new("smm", 5, "square", 512, 512, 512);
    let rows =
        design_space_report(&shape, &BlockingParams::default(), &CostConfig::presets()).map_err(|e| e.to_string())?;
    let names: Vec<&str> = rows.iter().map(|r| r.config.as_str()).collect();
    ensure(names == ["64clk", "32clk", "16clk", "8clk", "4clk"], || {
        format!("order {names:?}")
    })?;
    ensure(rows.windows(2).all(|w| w[0].cycles > w[1].cycles), || {
        "cycles not strictly decreasing".into()
    })?;
    let refs: Vec<f64> = rows.iter().filter_map(|r| r.reference_speedup).collect();
    ensure(refs == [1.0, 1.8, 3.1, 4.5, 5.8] && refs == REFERENCE_SPEEDUPS, || {
        format!("reference column {refs:?}")
    })?;
    let modeled: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.speedup)).collect();
    Ok(format!("modeled {} (reference {:?})", modeled.join("/"), refs))
}

fn direct_conv(x: &Tensor3<i8>, w: &[i8], s: &ConvSpec) -> Vec<i64> {
    let (oh, ow) = (s.out_height(), s.out_width());
    let mut out = vec![0i64; oh * ow * s.out_channels];
    for oy in 0..oh {
        for ox in 0..ow {
            for o in 0..s.out_channels {
                let mut acc = 0i64;
                for ky in 0..s.kernel {
                    for kx in 0..s.kernel {
                        let y = (oy * s.stride + ky) as i64 - s.padding as i64;
                        let xx = (ox * s.stride + kx) as i64 - s.padding as i64;
                        if y < 0 || xx < 0 || y >= s.height as i64 || xx >= s.width as i64 {
                            continue;
                        }
                        for c in 0..s.in_channels {
                            let wi = ((o * s.kernel + ky) * s.kernel + kx) * s.in_channels + c;
                            acc += x.get(y as usize, xx as usize, c) as i64 * w[wi] as i64;
                        }
                    }
                }
                out[(oy * ow + ox) * s.out_channels + o] = acc;
            }
        }
    }
    out
}

fn c8_im2col() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 50 {
        let s = ConvSpec {
            height: rng.gen_range(1..=14),
            width: rng.gen_range(1..=14),
            in_channels: rng.gen_range(1..=6),
            out_channels: rng.gen_range(1..=7),
            kernel: rng.gen_range(1..=5),
            stride: rng.gen_range(1..=3),
            padding: rng.gen_range(0..=2),
        };
        if s.validate().is_err() {
            continue;
        }
        let be = if done % 2 == 0 {
            Backend::CampI8
        } else {
            Backend::CampI4
        };
        let (lo, hi) = be.operand_mode().element_range();
        let x: Vec<i8> = (0..s.height * s.width * s.in_channels)
            .map(|_| rng.gen_range(lo..=hi))
            .collect();
        let w: Vec<i8> = (0..s.patch_len() * s.out_channels)
            .map(|_| rng.gen_range(lo..=hi))
            .collect();
        let x = Tensor3::new(s.height, s.width, s.in_channels, x).unwrap();
        let got = conv2d_gemm(&x, &w, &s, be, &BlockingParams::new(16, 32, 8).unwrap()).map_err(|e| e.to_string())?;
        let want = direct_conv(&x, &w, &s);
        let got: Vec<i64> = got.data().iter().map(|&v| v as i64).collect();
        ensure(got == want, || format!("{s:?} on {be}"))?;
        done += 1;
    }
    Ok("50 random conv specs equal direct convolution".into())
}

fn c9_determinism() -> Outcome {
    let cfg = |threads| BenchConfig {
        suites: vec!["smm".into(), "mobilenet".into(), "gpt3-small".into()],
        backends: vec![Backend::CampI8, Backend::CampI4, Backend::NaiveI32],
        seed: 0xC0FFEE,
        threads: Some(threads),
        verify_threshold: 1 << 20,
        sample_tiles: 12,
        ..Default::default()
    };
    let mut outputs = Vec::new();
    for t in [1, 2, 4, 1] {
        let r = run_bench(&cfg(t)).map_err(|e| e.to_string())?;
        outputs.push((render(&r, ReportFormat::Json), render(&r, ReportFormat::Csv)));
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "reports differ between runs".into()
    })?;
    Ok(format!(
        "4 runs (threads 1,2,4,1), {} JSON bytes identical",
        outputs[0].0.len()
    ))
}

fn c10_quantization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for t in 0..100 {
        let mode = if t % 2 == 0 { CampMode::Int8 } else { CampMode::Int4 };
        let (rows, cols) = (rng.gen_range(1..=24), rng.gen_range(1..=24));
        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
        let x = Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-mag..=mag));
        let q = QuantParams::fit(&x, mode).map_err(|e| e.to_string())?;
        let back = dequantize(&quantize(&x, &q).map_err(|e| e.to_string())?, &q);
        let half = q.scale() / 2.0;
        for (a, b) in x.data().iter().zip(back.data()) {
            let err = (a - b).abs();
            // a few ulps of slack for the divide and multiply
            ensure(err <= half + 4.0 * f64::EPSILON * a.abs().max(half), || {
                format!("matrix {t}: |{a} - {b}| = {err} > {half}")
            })?;
            worst = worst.max(err / q.scale());
        }
    }
    Ok(format!("100 matrices, worst error {worst:.6} x scale"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exhaustive hybrid multiplier", c1_hybrid_exhaustive),
        ("exhaustive 4-bit block and quad products", c2_nibble_blocks),
        ("camp oracle equivalence", c3_camp_random),
        ("gemm end-to-end", c4_gemm_end_to_end),
        ("micro-kernel structural counts", c5_structural_counts),
        ("instruction reduction ratio", c6_reduction_ratio),
        ("design-space consistency", c7_design_space),
        ("im2col correctness", c8_im2col),
        ("determinism", c9_determinism),
        ("quantization round trip", c10_quantization),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
