use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::in_pool;
use crate::channel::{
    db_to_linear, draw_channel, transmit, ChannelRealization, RngStream, StreamPurpose,
};
use crate::constellation::Modulation;
use crate::detect::{ils, DEFAULT_MAX_ILS_ITERATIONS};
use crate::error::{Error, Result};
use crate::stbc::{AmbiguityGroup, SymbolMatrix};

/// Many ILS runs with independent initializations on one fixed burst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub modulation: Modulation,
    pub blocks: usize,
    /// Transmit power P in dB.
    pub power_db: f64,
    pub noise_var: f64,
    pub runs: usize,
    /// Equal-width bins spanning the observed residual range.
    pub residual_bins: usize,
    pub seed: u64,
    pub max_ils_iterations: usize,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl HistogramConfig {
    /// BPSK, N = 20, P = 8 dB, σ² = 1, 10 000 runs, 50 bins.
    pub fn standard() -> Self {
        Self {
            modulation: Modulation::Bpsk,
            blocks: 20,
            power_db: 8.0,
            noise_var: 1.0,
            runs: 10_000,
            residual_bins: 50,
            seed: 1,
            max_ils_iterations: DEFAULT_MAX_ILS_ITERATIONS,
            workers: None,
        }
    }

    /// `standard` with P = 6 dB.
    pub fn low_power() -> Self {
        Self {
            power_db: 6.0,
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0
            || self.runs == 0
            || self.residual_bins == 0
            || self.max_ils_iterations == 0
        {
            return Err(Error::InvalidConfig(
                "N, runs, bins and the iteration cap must be at least 1".into(),
            ));
        }
        if self.noise_var.is_nan() || self.noise_var < 0.0 || !self.power_db.is_finite() {
            return Err(Error::InvalidConfig(
                "invalid power or noise variance".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistogramKind {
    #[serde(rename = "residual")]
    Residual,
    #[serde(rename = "error_count")]
    ErrorCount,
}

impl HistogramKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HistogramKind::Residual => "residual",
            HistogramKind::ErrorCount => "error_count",
        }
    }
}

/// `bin_edges.len() == counts.len() + 1`; bins are half-open except the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub kind: HistogramKind,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl HistogramRecord {
    fn from_edges(
        kind: HistogramKind,
        bin_edges: Vec<f64>,
        values: impl Iterator<Item = f64>,
    ) -> Self {
        let mut h = Self {
            kind,
            counts: vec![0; bin_edges.len() - 1],
            bin_edges,
        };
        for v in values {
            let b = h.bin_of(v);
            h.counts[b] += 1;
        }
        h
    }

    /// Bin index of `x`, clamped to the outer bins.
    pub fn bin_of(&self, x: f64) -> usize {
        let nb = self.counts.len();
        // first edge strictly greater than x, minus one
        let pos = self.bin_edges.partition_point(|&e| e <= x);
        pos.saturating_sub(1).min(nb - 1)
    }

    /// Fullest bin; the lowest such bin on ties.
    pub fn modal_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSample {
    pub residual: f64,
    /// Symbol errors after the best ambiguity transform.
    pub symbol_errors: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramExperiment {
    pub residual: HistogramRecord,
    pub errors: HistogramRecord,
    pub runs: Vec<RunSample>,
}

impl HistogramExperiment {
    /// Runs whose residual falls in the modal residual bin.
    pub fn modal_runs(&self) -> impl Iterator<Item = &RunSample> {
        let modal = self.residual.modal_bin();
        self.runs
            .iter()
            .filter(move |r| self.residual.bin_of(r.residual) == modal)
    }
}

pub fn histogram_experiment(cfg: &HistogramConfig) -> Result<HistogramExperiment> {
    cfg.validate()?;
    let cons = cfg.modulation.constellation();
    let group = AmbiguityGroup::new(&cons);
    let seed = cfg.seed;

    let g = draw_channel(&mut RngStream::derive(seed, 0, StreamPurpose::Channel));
    let ch = ChannelRealization::new(g, db_to_linear(cfg.power_db), cfg.noise_var);
    let s = SymbolMatrix::random(
        &cons,
        cfg.blocks,
        &mut RngStream::derive(seed, 0, StreamPurpose::Symbols),
    )?;
    let rx = transmit(
        &s,
        &ch,
        &mut RngStream::derive(seed, 0, StreamPurpose::Noise),
    );

    let runs: Vec<RunSample> = in_pool(cfg.workers, || {
        (0..cfg.runs as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = RngStream::derive(seed, r, StreamPurpose::HistogramInit);
                loop {
                    let init = SymbolMatrix::random(&cons, cfg.blocks, &mut rng)?;
                    match ils(&rx, &cons, &init, cfg.max_ils_iterations) {
                        Ok(run) => {
                            return Ok(RunSample {
                                residual: run.residual,
                                symbol_errors: group.align(&cons, &run.s_hat, &s).symbol_errors,
                                iterations: run.iterations,
                                converged: run.converged,
                            })
                        }
                        Err(Error::Singular(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let (lo, hi) = runs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.residual), hi.max(r.residual))
        });
    // a spread at rounding level means every run found the same residual
    let spread = hi - lo > 1e-9 * hi.abs().max(1.0);
    let width = if spread {
        (hi - lo) / cfg.residual_bins as f64
    } else {
        1.0
    };
    let mut edges: Vec<f64> = (0..=cfg.residual_bins)
        .map(|i| lo + width * i as f64)
        .collect();
    if spread {
        *edges.last_mut().unwrap() = hi;
    }
    let residual = HistogramRecord::from_edges(
        HistogramKind::Residual,
        edges,
        runs.iter().map(|r| r.residual),
    );

    let max_errors = 2 * cfg.blocks;
    let error_edges: Vec<f64> = (0..=max_errors + 1).map(|k| k as f64 - 0.5).collect();
    let errors = HistogramRecord::from_edges(
        HistogramKind::ErrorCount,
        error_edges,
        runs.iter().map(|r| r.symbol_errors as f64),
    );

    Ok(HistogramExperiment {
        residual,
        errors,
        runs,
    })
}
