//! Instruction tallies and a linear cycle model.
//!
//! Cycles are `Σ count × cost` with no overlap between instruction classes.
//! A `camp` instruction costs its configuration's latency; the five presets
//! are the register-array variants that finish one instruction in 64, 32,
//! 16, 8 or 4 clocks. Each preset also carries the speedup reported for it
//! on real hardware, purely as labeled reference data.

use std::ops::{Add, AddAssign, Mul};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gemm::{blocked_counts, Backend, BlockingParams};
use crate::shapes::LayerShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct InstructionCounts {
    pub vec_loads: u64,
    pub vec_stores: u64,
    pub camp_ops: u64,
    pub vec_alu_ops: u64,
    pub broadcast_ops: u64,
    pub scalar_ops: u64,
}

impl InstructionCounts {
    /// All vector-unit instructions (R, W and ALU classes, `camp` included).
    pub fn vector_total(&self) -> u64 {
        self.vec_loads + self.vec_stores + self.vector_alu_total()
    }

    /// Vector ALU work: `camp`, element-wise arithmetic and broadcasts.
    pub fn vector_alu_total(&self) -> u64 {
        self.camp_ops + self.vec_alu_ops + self.broadcast_ops
    }

    pub fn total(&self) -> u64 {
        self.vector_total() + self.scalar_ops
    }
}

impl Add for InstructionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        InstructionCounts {
            vec_loads: self.vec_loads + o.vec_loads,
            vec_stores: self.vec_stores + o.vec_stores,
            camp_ops: self.camp_ops + o.camp_ops,
            vec_alu_ops: self.vec_alu_ops + o.vec_alu_ops,
            broadcast_ops: self.broadcast_ops + o.broadcast_ops,
            scalar_ops: self.scalar_ops + o.scalar_ops,
        }
    }
}

impl AddAssign for InstructionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<u64> for InstructionCounts {
    type Output = Self;

    fn mul(self, k: u64) -> Self {
        InstructionCounts {
            vec_loads: self.vec_loads * k,
            vec_stores: self.vec_stores * k,
            camp_ops: self.camp_ops * k,
            vec_alu_ops: self.vec_alu_ops * k,
            broadcast_ops: self.broadcast_ops * k,
            scalar_ops: self.scalar_ops * k,
        }
    }
}

impl std::iter::Sum for InstructionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub name: String,
    pub camp_latency_cycles: u64,
    #[serde(default = "one")]
    pub load_cost: u64,
    #[serde(default = "one")]
    pub store_cost: u64,
    #[serde(default = "one")]
    pub alu_cost: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_speedup: Option<f64>,
}

pub const PRESET_NAMES: [&str; 5] = ["64clk", "32clk", "16clk", "8clk", "4clk"];
const PRESET_LATENCIES: [u64; 5] = [64, 32, 16, 8, 4];
/// Measured speedups of the five register-array variants, relative to 64clk.
pub const REFERENCE_SPEEDUPS: [f64; 5] = [1.0, 1.8, 3.1, 4.5, 5.8];

impl CostConfig {
    pub fn preset(name: &str) -> Result<CostConfig> {
        let i = PRESET_NAMES
            .iter()
            .position(|&n| n == name)
            .ok_or_else(|| Error::Unknown {
                kind: "cost config",
                name: name.to_string(),
            })?;
        Ok(CostConfig {
            name: name.to_string(),
            camp_latency_cycles: PRESET_LATENCIES[i],
            load_cost: 1,
            store_cost: 1,
            alu_cost: 1,
            reference_speedup: Some(REFERENCE_SPEEDUPS[i]),
        })
    }

    pub fn presets() -> Vec<CostConfig> {
        PRESET_NAMES.iter().map(|n| Self::preset(n).unwrap()).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.camp_latency_cycles == 0 {
            return Err(Error::Config(format!(
                "{}: camp_latency_cycles must be positive",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ConfigFile {
    config: Vec<CostConfig>,
}

/// Parse a TOML list of `[[config]]` tables.
pub fn parse_cost_configs(text: &str) -> std::result::Result<Vec<CostConfig>, String> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
    if file.config.is_empty() {
        return Err("no [[config]] entries".into());
    }
    for c in &file.config {
        c.validate().map_err(|e| e.to_string())?;
    }
    Ok(file.config)
}

pub fn load_cost_configs(path: impl AsRef<Path>) -> Result<Vec<CostConfig>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cost_configs(&text).map_err(|m| Error::parse(path, m))
}

pub fn render_cost_configs(configs: &[CostConfig]) -> String {
    toml::to_string(&ConfigFile {
        config: configs.to_vec(),
    })
    .expect("cost configs serialize")
}

pub fn model_cycles(counts: &InstructionCounts, cfg: &CostConfig) -> u64 {
    counts.vec_loads * cfg.load_cost
        + counts.vec_stores * cfg.store_cost
        + counts.camp_ops * cfg.camp_latency_cycles
        + (counts.vec_alu_ops + counts.broadcast_ops + counts.scalar_ops) * cfg.alu_cost
}

/// Vector instructions of the element-wise baseline divided by those of the
/// int8 `camp` kernel, over the whole blocked GeMM.
pub fn reduction_ratio(shape: &LayerShape, params: &BlockingParams) -> Result<f64> {
    let generic = blocked_counts(shape.m, shape.n, shape.k, params, Backend::GenericVecModel)?;
    let camp = blocked_counts(shape.m, shape.n, shape.k, params, Backend::CampI8)?;
    Ok(generic.vector_total() as f64 / camp.vector_total() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpaceRow {
    pub config: String,
    pub camp_latency_cycles: u64,
    pub cycles: u64,
    /// Modeled speedup over the 64clk row (or the first row if absent).
    pub speedup: f64,
    pub reference_speedup: Option<f64>,
}

pub fn design_space_report(
    shape: &LayerShape,
    params: &BlockingParams,
    configs: &[CostConfig],
) -> Result<Vec<DesignSpaceRow>> {
    if configs.is_empty() {
        return Ok(Vec::new());
    }
    let counts = blocked_counts(shape.m, shape.n, shape.k, params, Backend::CampI8)?;
    let cycles: Vec<u64> = configs.iter().map(|c| model_cycles(&counts, c)).collect();
    let base = configs
        .iter()
        .position(|c| c.name == "64clk")
        .map_or(cycles[0], |i| cycles[i]);
    Ok(configs
        .iter()
        .zip(&cycles)
        .map(|(c, &cy)| DesignSpaceRow {
            config: c.name.clone(),
            camp_latency_cycles: c.camp_latency_cycles,
            cycles: cy,
            speedup: base as f64 / cy as f64,
            reference_speedup: c.reference_speedup,
        })
        .collect())
}
