//! Report files.
//!
//! JSON holds the whole [`BenchReport`] as `{"meta": ..., "records": [...]}`.
//! CSV holds records only, one per row under [`CSV_HEADER`]; the per-config
//! cycles share one column as `name=cycles` pairs joined by `;`, and the
//! ratio column is empty for backends without one.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::{BenchRecord, BenchReport, ModeledCycles, Verification};
use crate::costmodel::InstructionCounts;
use crate::error::{Error, Result};
use crate::gemm::Backend;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Unknown {
                kind: "report format",
                name: s.to_string(),
            }),
        }
    }
}

pub const CSV_HEADER: [&str; 21] = [
    "benchmark",
    "layer_index",
    "label",
    "m",
    "n",
    "k",
    "backend",
    "verification",
    "verified_tiles",
    "checksum",
    "oracle_checksum",
    "vec_loads",
    "vec_stores",
    "camp_ops",
    "vec_alu_ops",
    "broadcast_ops",
    "scalar_ops",
    "vector_instructions",
    "total_instructions",
    "modeled_cycles",
    "reduction_ratio",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    benchmark: String,
    layer_index: usize,
    label: String,
    m: usize,
    n: usize,
    k: usize,
    backend: Backend,
    verification: Verification,
    verified_tiles: u64,
    checksum: String,
    oracle_checksum: String,
    vec_loads: u64,
    vec_stores: u64,
    camp_ops: u64,
    vec_alu_ops: u64,
    broadcast_ops: u64,
    scalar_ops: u64,
    vector_instructions: u64,
    total_instructions: u64,
    modeled_cycles: String,
    reduction_ratio: Option<f64>,
}

impl From<&BenchRecord> for CsvRow {
    fn from(r: &BenchRecord) -> Self {
        let c = r.counts;
        CsvRow {
            benchmark: r.benchmark.clone(),
            layer_index: r.layer_index,
            label: r.label.clone(),
            m: r.m,
            n: r.n,
            k: r.k,
            backend: r.backend,
            verification: r.verification,
            verified_tiles: r.verified_tiles,
            checksum: r.checksum.clone(),
            oracle_checksum: r.oracle_checksum.clone(),
            vec_loads: c.vec_loads,
            vec_stores: c.vec_stores,
            camp_ops: c.camp_ops,
            vec_alu_ops: c.vec_alu_ops,
            broadcast_ops: c.broadcast_ops,
            scalar_ops: c.scalar_ops,
            vector_instructions: c.vector_total(),
            total_instructions: c.total(),
            modeled_cycles: r
                .modeled_cycles
                .iter()
                .map(|mc| format!("{}={}", mc.config, mc.cycles))
                .collect::<Vec<_>>()
                .join(";"),
            reduction_ratio: r.reduction_ratio,
        }
    }
}

impl TryFrom<CsvRow> for BenchRecord {
    type Error = String;

    fn try_from(row: CsvRow) -> std::result::Result<Self, String> {
        let counts = InstructionCounts {
            vec_loads: row.vec_loads,
            vec_stores: row.vec_stores,
            camp_ops: row.camp_ops,
            vec_alu_ops: row.vec_alu_ops,
            broadcast_ops: row.broadcast_ops,
            scalar_ops: row.scalar_ops,
        };
        if counts.vector_total() != row.vector_instructions || counts.total() != row.total_instructions {
            return Err(format!(
                "{} layer {}: instruction totals disagree with their parts",
                row.benchmark, row.layer_index
            ));
        }
        let modeled_cycles = row
            .modeled_cycles
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|pair| {
                let (config, cycles) = pair
                    .split_once('=')
                    .ok_or_else(|| format!("bad cycles entry '{pair}'"))?;
                let cycles = cycles.parse().map_err(|e| format!("bad cycles entry '{pair}': {e}"))?;
                Ok(ModeledCycles {
                    config: config.to_string(),
                    cycles,
                })
            })
            .collect::<std::result::Result<_, String>>()?;
        Ok(BenchRecord {
            benchmark: row.benchmark,
            layer_index: row.layer_index,
            label: row.label,
            m: row.m,
            n: row.n,
            k: row.k,
            backend: row.backend,
            verification: row.verification,
            verified_tiles: row.verified_tiles,
            checksum: row.checksum,
            oracle_checksum: row.oracle_checksum,
            counts,
            modeled_cycles,
            reduction_ratio: row.reduction_ratio,
        })
    }
}

pub fn write_json<W: Write>(report: &BenchReport, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.serialize(CsvRow::from(r))?;
    }
    out.flush()
}

pub fn render(report: &BenchReport, format: ReportFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        ReportFormat::Json => write_json(report, &mut buf),
        ReportFormat::Csv => write_csv(&report.records, &mut buf),
    }
    .expect("in-memory write");
    buf
}

pub fn emit_report(report: &BenchReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        ReportFormat::Json => write_json(report, &mut w),
        ReportFormat::Csv => write_csv(&report.records, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn load_json_report(path: impl AsRef<Path>) -> Result<BenchReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::parse(path, e))
}

pub fn parse_csv_records(text: &[u8]) -> std::result::Result<Vec<BenchRecord>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!(
            "unexpected header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    rdr.deserialize::<CsvRow>()
        .map(|row| row.map_err(|e| e.to_string()).and_then(BenchRecord::try_from))
        .collect()
}

pub fn load_csv_records(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv_records(&bytes).map_err(|m| Error::parse(path, m))
}
