//! Result records and their CSV / JSON encodings.
//!
//! Both encodings are byte-identical across runs with the same config and
//! seed. Wall-clock time is only recorded when asked for.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use collapse_core::observables::ProjectionHistogram;
use collapse_core::{Method, ObservableSeries};
use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::runner::EngineDiagnostics;

pub const CSV_HEADER: [&str; 11] = [
    "t", "p_up", "p_down", "p_q", "method", "n_samples", "seed", "N", "delta", "h_spec", "epsilon",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRecord {
    pub t: f64,
    pub histogram: ProjectionHistogram,
}

/// One finished experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub preset_defaults: Vec<String>,
    pub series: ObservableSeries,
    /// First grid time with `p_q < 0.01`, if any.
    pub collapse_time: Option<f64>,
    pub histograms: Vec<HistogramRecord>,
    pub diagnostics: EngineDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    t: f64,
    p_up: f64,
    p_down: f64,
    p_q: f64,
    method: &'a str,
    n_samples: usize,
    seed: u64,
    #[serde(rename = "N")]
    n: usize,
    delta: f64,
    h_spec: &'a str,
    epsilon: f64,
}

pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        let cfg = &rec.config;
        let h_spec = cfg.couplings.describe();
        let n_samples = if cfg.method == Method::Sampled { cfg.samples } else { 0 };
        let s = &rec.series;
        for i in 0..s.len() {
            w.serialize(CsvRow {
                t: s.times[i],
                p_up: s.p_up[i],
                p_down: s.p_down[i],
                p_q: s.p_q[i],
                method: cfg.method.as_str(),
                n_samples,
                seed: cfg.seed,
                n: cfg.env_size(),
                delta: cfg.delta,
                h_spec: &h_spec,
                epsilon: cfg.epsilon,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")
}

/// Writes `records` to `path`, or stdout when `path` is `None`.
pub fn emit(records: &[ResultRecord], format: OutputFormat, path: Option<&Path>) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        OutputFormat::Csv => write_csv(records, sink)?,
        OutputFormat::Json => write_json(records, sink)?,
    }
    Ok(())
}
