//! CSV and JSON manifest output.
//!
//! Floats are written with 17 significant digits so they read back exactly.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::histogram::{HistogramConfig, HistogramExperiment};
use super::{SweepConfig, SweepRecord};
use crate::error::Result;

pub const SWEEP_CSV_HEADER: &str = "seed,config_hash,snr_db,n,q,t,detector,trials,total_bits,bit_errors,ber,ber_ci95,raw_bit_errors,raw_ber,total_symbols,symbol_errors,ser,ser_ci95,raw_symbol_errors,raw_ser,avg_ils_iterations,avg_eils_executions,majority_stop_fraction,failed_runs";

pub const HISTOGRAM_CSV_HEADER: &str = "seed,config_hash,kind,bin,bin_lo,bin_hi,count";

/// The experiment a file was produced by, with everything that determines
/// its contents.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    SweepSnr {
        config: SweepConfig,
    },
    SweepN {
        config: SweepConfig,
        n_grid: Vec<usize>,
    },
    SweepQ {
        config: SweepConfig,
        q_grid: Vec<usize>,
    },
    Histogram {
        config: HistogramConfig,
    },
}

impl Experiment {
    pub fn seed(&self) -> u64 {
        match self {
            Experiment::SweepSnr { config }
            | Experiment::SweepN { config, .. }
            | Experiment::SweepQ { config, .. } => config.seed,
            Experiment::Histogram { config } => config.seed,
        }
    }
}

/// First 16 hex digits of the SHA-256 of the experiment's JSON form.
pub fn config_hash(experiment: &Experiment) -> String {
    let bytes = serde_json::to_vec(experiment).expect("experiment serializes");
    Sha256::digest(&bytes)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(flatten)]
    pub experiment: Experiment,
    pub config_hash: String,
    pub rows: usize,
    pub output: Option<String>,
    pub created_unix: u64,
}

impl Manifest {
    pub fn new(experiment: Experiment, rows: usize, output: Option<String>) -> Self {
        let config_hash = config_hash(&experiment);
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            config_hash,
            rows,
            output,
            created_unix,
        }
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(
    mut w: W,
    experiment: &Experiment,
    records: &[SweepRecord],
) -> Result<()> {
    let seed = experiment.seed();
    let hash = config_hash(experiment);
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{seed},{hash},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.snr_db),
            r.blocks,
            r.max_executions,
            r.majority,
            r.detector,
            r.trials,
            r.total_bits,
            r.bit_errors,
            num(r.ber),
            num(r.ber_ci95),
            r.raw_bit_errors,
            num(r.raw_ber),
            r.total_symbols,
            r.symbol_errors,
            num(r.ser),
            num(r.ser_ci95),
            r.raw_symbol_errors,
            num(r.raw_ser),
            opt(r.avg_ils_iterations),
            opt(r.avg_eils_executions),
            opt(r.majority_stop_fraction),
            r.failures,
        )?;
    }
    Ok(())
}

pub fn write_histogram_csv<W: Write>(
    mut w: W,
    experiment: &Experiment,
    result: &HistogramExperiment,
) -> Result<()> {
    let seed = experiment.seed();
    let hash = config_hash(experiment);
    writeln!(w, "{HISTOGRAM_CSV_HEADER}")?;
    for h in [&result.residual, &result.errors] {
        for (i, count) in h.counts.iter().enumerate() {
            writeln!(
                w,
                "{seed},{hash},{},{i},{},{},{count}",
                h.kind.as_str(),
                num(h.bin_edges[i]),
                num(h.bin_edges[i + 1]),
            )?;
        }
    }
    Ok(())
}
