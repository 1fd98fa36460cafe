//! Functional simulator for an outer-product matrix-multiply vector
//! extension (`camp`) and the GotoBLAS-style quantized GeMM built on it.
//!
//! Module map:
//!
//! * [`vecreg`]: 512-bit register images and element packing.
//! * [`hybridmul`]: the 4-bit-block divide-and-conquer multiplier.
//! * [`campunit`]: semantics of the `camp` instruction over 8 lanes.
//! * [`gemm`]: panel packing, micro-kernels and the five-loop blocked GeMM.
//! * [`costmodel`]: instruction tallies and cycle estimates.
//! * [`shapes`], [`im2col`], [`bench`], [`report`]: benchmark layer tables,
//!   convolution lowering, the suite runner and report files.
//! * [`matrix`]: the dense row-major matrix type and its file formats.

pub mod bench;
pub mod campunit;
pub mod costmodel;
pub mod error;
pub mod gemm;
pub mod hybridmul;
pub mod im2col;
pub mod matrix;
pub mod report;
pub mod shapes;
pub mod vecreg;

pub use bench::{run_bench, BenchConfig, BenchRecord, BenchReport};
pub use campunit::{camp_exec, camp_exec_with, CampMode, CampResult, LaneTrace, OverflowPolicy};
pub use costmodel::{CostConfig, InstructionCounts};
pub use error::{Error, Result};
pub use gemm::{gemm_blocked, gemm_naive, Backend, BlockingParams, GemmOutput};
pub use hybridmul::{hybrid_mul8, HybridProduct8, NibbleOperand, Signedness};
pub use im2col::{ConvSpec, Tensor3};
pub use matrix::Matrix;
pub use report::{emit_report, ReportFormat};
pub use shapes::LayerShape;
pub use vecreg::{ElementLayout, VecReg512};
