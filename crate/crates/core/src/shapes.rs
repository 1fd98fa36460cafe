//! Benchmark GeMM shapes.
//!
//! CNN and square-matrix suites list the `(m, n, k)` of every layer as
//! published. LLM suites are derived from each model's hidden size `h` and
//! head count at a sequence length `seq`:
//!
//! | layer | label      | m   | n       | k       |
//! |-------|------------|-----|---------|---------|
//! | 1     | sa-proj    | seq | h       | h       |
//! | 2     | sa-score   | seq | seq     | h/heads |
//! | 3     | sa-context | seq | h/heads | seq     |
//! | 4     | ff-up      | seq | 4h      | h       |
//! | 5     | ff-down    | seq | h       | 4h      |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SEQ_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub benchmark: String,
    pub layer_index: usize,
    pub label: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl LayerShape {
    pub fn new(benchmark: &str, layer_index: usize, label: &str, m: usize, n: usize, k: usize) -> Self {
        LayerShape {
            benchmark: benchmark.to_string(),
            layer_index,
            label: label.to_string(),
            m,
            n,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.k == 0 {
            return Err(Error::Input(format!(
                "{} layer {}: extents must be positive, got {}x{}x{}",
                self.benchmark, self.layer_index, self.m, self.n, self.k
            )));
        }
        Ok(())
    }

    pub fn macs(&self) -> u64 {
        self.m as u64 * self.n as u64 * self.k as u64
    }
}

pub const CNN_SUITES: [&str; 5] = ["alexnet", "smm", "resnet", "vgg", "mobilenet"];
pub const LLM_SUITES: [&str; 4] = ["bert-base", "bert-large", "gpt2-large", "gpt3-small"];

const ALEXNET: &[(usize, usize, usize)] = &[
    (169, 256, 3456),
    (169, 384, 2304),
    (169, 384, 3456),
    (3025, 96, 363),
    (729, 256, 2400),
];

const SMM: &[(usize, usize, usize)] = &[
    (32, 32, 32),
    (64, 64, 64),
    (128, 128, 128),
    (256, 256, 256),
    (512, 512, 512),
    (1024, 1024, 1024),
];

const RESNET: &[(usize, usize, usize)] = &[
    (12544, 64, 147),
    (196, 256, 1152),
    (196, 256, 2304),
    (3136, 64, 576),
    (49, 512, 2304),
    (49, 512, 4608),
    (784, 128, 1152),
    (784, 128, 576),
];

const VGG: &[(usize, usize, usize)] = &[
    (12544, 128, 1152),
    (12544, 128, 576),
    (196, 512, 4608),
    (3136, 256, 1152),
    (3136, 256, 2304),
    (50176, 64, 27),
    (50176, 64, 576),
    (784, 512, 2304),
    (784, 512, 4608),
];

// Row 1 is kept exactly as published (m = 2544).
const MOBILENET: &[(usize, usize, usize)] = &[
    (2544, 32, 27),
    (12544, 64, 32),
    (196, 512, 256),
    (196, 512, 512),
    (3136, 128, 128),
    (3136, 128, 64),
    (49, 1024, 1024),
    (49, 1024, 512),
    (784, 256, 128),
    (784, 256, 256),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LlmDims {
    pub hidden: usize,
    pub heads: usize,
}

pub fn llm_dims(suite: &str) -> Option<LlmDims> {
    let (hidden, heads) = match suite {
        "bert-base" => (768, 12),
        "bert-large" => (1024, 16),
        "gpt2-large" => (1280, 20),
        "gpt3-small" => (768, 12),
        _ => return None,
    };
    Some(LlmDims { hidden, heads })
}

pub fn llm_shapes(suite: &str, dims: LlmDims, seq: usize) -> Vec<LayerShape> {
    let h = dims.hidden;
    let d = h / dims.heads;
    [
        ("sa-proj", seq, h, h),
        ("sa-score", seq, seq, d),
        ("sa-context", seq, d, seq),
        ("ff-up", seq, 4 * h, h),
        ("ff-down", seq, h, 4 * h),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(label, m, n, k))| LayerShape::new(suite, i + 1, label, m, n, k))
    .collect()
}

/// Layers of a named suite. `seq_len` only affects LLM suites.
pub fn builtin_shapes(suite: &str, seq_len: usize) -> Result<Vec<LayerShape>> {
    let table = match suite {
        "alexnet" => ALEXNET,
        "smm" => SMM,
        "resnet" => RESNET,
        "vgg" => VGG,
        "mobilenet" => MOBILENET,
        _ => {
            let dims = llm_dims(suite).ok_or_else(|| Error::Unknown {
                kind: "suite",
                name: suite.to_string(),
            })?;
            if seq_len == 0 {
                return Err(Error::Config("sequence length must be positive".into()));
            }
            return Ok(llm_shapes(suite, dims, seq_len));
        }
    };
    let label = if suite == "smm" { "square" } else { "conv" };
    Ok(table
        .iter()
        .enumerate()
        .map(|(i, &(m, n, k))| LayerShape::new(suite, i + 1, label, m, n, k))
        .collect())
}

pub fn all_suites() -> impl Iterator<Item = &'static str> {
    CNN_SUITES.into_iter().chain(LLM_SUITES)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mnk(s: &LayerShape) -> (usize, usize, usize) {
        (s.m, s.n, s.k)
    }

    #[test]
    fn published_rows() {
        let resnet = builtin_shapes("resnet", DEFAULT_SEQ_LEN).unwrap();
        assert_eq!(mnk(&resnet[0]), (12544, 64, 147));
        assert_eq!(resnet[0].layer_index, 1);
        let smm = builtin_shapes("smm", DEFAULT_SEQ_LEN).unwrap();
        assert_eq!(smm.len(), 6);
        assert!(smm.iter().all(|s| s.m == s.n && s.n == s.k));
        assert_eq!(mnk(&smm[0]), (32, 32, 32));
        assert_eq!(mnk(&smm[5]), (1024, 1024, 1024));
        let counts: Vec<usize> = CNN_SUITES.iter().map(|s| builtin_shapes(s, 1).unwrap().len()).collect();
        assert_eq!(counts, vec![5, 6, 8, 9, 10]);
        assert_eq!(mnk(&builtin_shapes("vgg", 1).unwrap()[6]), (50176, 64, 576));
    }

    #[test]
    fn llm_formulas() {
        let bert = builtin_shapes("bert-base", 128).unwrap();
        let ff = bert.iter().find(|s| s.label == "ff-up").unwrap();
        assert_eq!(mnk(ff), (128, 3072, 768));
        assert_eq!(mnk(&bert[1]), (128, 128, 64));
        assert_eq!(mnk(&builtin_shapes("gpt2-large", 256).unwrap()[4]), (256, 1280, 5120));
        assert!(builtin_shapes("bert-base", 0).is_err());
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(builtin_shapes("lenet", 128), Err(Error::Unknown { .. })));
    }

    #[test]
    fn every_builtin_shape_is_valid() {
        for suite in all_suites() {
            for s in builtin_shapes(suite, DEFAULT_SEQ_LEN).unwrap() {
                s.validate().unwrap();
            }
        }
        assert!(LayerShape::new("x", 1, "", 0, 1, 1).validate().is_err());
    }
}
