//! Monte Carlo engine: trials, SNR / block-count / restart-count sweeps and
//! the residual histogram experiment.
//!
//! Every random draw of trial `t` comes from streams keyed by
//! `(seed, t, purpose)`, and per-trial tallies are reduced in trial order, so
//! a sweep is a pure function of its configuration whatever the worker count.
//! The same trial index reuses its channel, symbols and normalized noise
//! across grid points (common random numbers).

mod histogram;
mod output;
pub mod stats;

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_channel, transmit, ChannelRealization, RngStream, StreamPurpose};
use crate::constellation::{Constellation, Modulation};
use crate::detect::{
    coherent_ml, eils, exhaustive_ls, ils, EilsConfig, DEFAULT_ENUMERATION_CAP,
    DEFAULT_MAX_ILS_ITERATIONS, DEFAULT_RESIDUAL_MATCH_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::stbc::{raw_errors, AmbiguityGroup, SymbolMatrix};

pub use histogram::{
    histogram_experiment, HistogramConfig, HistogramExperiment, HistogramKind, HistogramRecord,
    RunSample,
};
pub use output::{
    config_hash, write_histogram_csv, write_sweep_csv, Experiment, Manifest, SWEEP_CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "ml_csi")]
    MlCsi,
    #[serde(rename = "ils")]
    Ils,
    #[serde(rename = "eils")]
    Eils,
    #[serde(rename = "oracle")]
    Oracle,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::MlCsi => "ml_csi",
            DetectorKind::Ils => "ils",
            DetectorKind::Eils => "eils",
            DetectorKind::Oracle => "oracle",
        }
    }

    pub fn is_blind(self) -> bool {
        !matches!(self, DetectorKind::MlCsi)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml_csi" | "ml" => Ok(DetectorKind::MlCsi),
            "ils" => Ok(DetectorKind::Ils),
            "eils" => Ok(DetectorKind::Eils),
            "oracle" => Ok(DetectorKind::Oracle),
            other => Err(Error::InvalidConfig(format!(
                "unknown detector '{other}' (expected ml_csi, ils, eils or oracle)"
            ))),
        }
    }
}

/// Parameters of one sweep. SNR is `P/σ²` with `σ² = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub modulation: Modulation,
    /// Alamouti blocks per burst (N).
    pub blocks: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    /// Maximum ILS executions (Q).
    pub max_executions: usize,
    /// Majority threshold (T).
    pub majority: usize,
    pub seed: u64,
    pub detectors: Vec<DetectorKind>,
    pub max_ils_iterations: usize,
    pub residual_match_tol: f64,
    pub enumeration_cap: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            modulation: Modulation::Bpsk,
            blocks: 20,
            snr_grid_db: (0..=6).map(|i| 2.0 * i as f64).collect(),
            trials: 10_000,
            max_executions: 20,
            majority: 2,
            seed: 1,
            detectors: vec![DetectorKind::MlCsi, DetectorKind::Ils, DetectorKind::Eils],
            max_ils_iterations: DEFAULT_MAX_ILS_ITERATIONS,
            residual_match_tol: DEFAULT_RESIDUAL_MATCH_TOL,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            workers: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.blocks == 0 {
            return bad("N must be at least 1".into());
        }
        if self.snr_grid_db.is_empty() {
            return bad("SNR grid is empty".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid contains a non-finite value".into());
        }
        if self.detectors.is_empty() {
            return bad("no detectors selected".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        self.eils_config().validate()?;
        if self.detectors.contains(&DetectorKind::Oracle) {
            let candidates = (self.modulation.constellation().len() as u128)
                .checked_pow(2 * self.blocks as u32)
                .unwrap_or(u128::MAX);
            if candidates > self.enumeration_cap as u128 {
                return Err(Error::EnumerationTooLarge {
                    candidates,
                    cap: self.enumeration_cap,
                });
            }
        }
        Ok(())
    }

    pub fn eils_config(&self) -> EilsConfig {
        EilsConfig {
            max_executions: self.max_executions,
            majority: self.majority,
            residual_match_tol: self.residual_match_tol,
            max_ils_iterations: self.max_ils_iterations,
        }
    }

    pub fn bits_per_trial(&self) -> u64 {
        2 * self.blocks as u64 * self.modulation.constellation().bits_per_symbol() as u64
    }
}

/// Error counts and run diagnostics of one detector, summable over trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectorTally {
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub raw_bit_errors: u64,
    pub raw_symbol_errors: u64,
    pub ils_runs: u64,
    pub ils_iterations: u64,
    pub eils_executions: u64,
    pub majority_stops: u64,
    /// Trials where the detector produced no decision (all symbols charged).
    pub failures: u64,
}

impl AddAssign for DetectorTally {
    fn add_assign(&mut self, o: Self) {
        self.bit_errors += o.bit_errors;
        self.symbol_errors += o.symbol_errors;
        self.raw_bit_errors += o.raw_bit_errors;
        self.raw_symbol_errors += o.raw_symbol_errors;
        self.ils_runs += o.ils_runs;
        self.ils_iterations += o.ils_iterations;
        self.eils_executions += o.eils_executions;
        self.majority_stops += o.majority_stops;
        self.failures += o.failures;
    }
}

/// Per-detector tallies of one trial, in the configured detector order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub tallies: Vec<(DetectorKind, DetectorTally)>,
}

impl TrialOutcome {
    pub fn get(&self, kind: DetectorKind) -> Option<&DetectorTally> {
        self.tallies
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, t)| t)
    }
}

/// Everything a trial needs that does not change between trials.
#[derive(Debug, Clone)]
pub struct TrialContext {
    cfg: SweepConfig,
    cons: Constellation,
    group: AmbiguityGroup,
}

impl TrialContext {
    pub fn new(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let cons = cfg.modulation.constellation();
        let group = AmbiguityGroup::new(&cons);
        Ok(Self {
            cfg: cfg.clone(),
            cons,
            group,
        })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    /// Draws channel, symbols and noise for `trial_index` and runs every
    /// configured detector on the same received burst.
    pub fn run_trial(&self, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let seed = cfg.seed;
        let g = draw_channel(&mut RngStream::derive(
            seed,
            trial_index,
            StreamPurpose::Channel,
        ));
        let ch = ChannelRealization::with_snr_db(g, snr_db);
        let s = SymbolMatrix::random(
            &self.cons,
            cfg.blocks,
            &mut RngStream::derive(seed, trial_index, StreamPurpose::Symbols),
        )?;
        let rx = transmit(
            &s,
            &ch,
            &mut RngStream::derive(seed, trial_index, StreamPurpose::Noise),
        );

        let mut tallies = Vec::with_capacity(cfg.detectors.len());
        for &kind in &cfg.detectors {
            let tally = match kind {
                DetectorKind::MlCsi => {
                    let s_hat = coherent_ml(&rx.y, &ch.effective_h(), &self.cons)?;
                    let (sym, bits) = raw_errors(&self.cons, &s_hat, &s);
                    DetectorTally {
                        bit_errors: bits as u64,
                        symbol_errors: sym as u64,
                        raw_bit_errors: bits as u64,
                        raw_symbol_errors: sym as u64,
                        ..Default::default()
                    }
                }
                DetectorKind::Ils => {
                    let mut rng =
                        RngStream::derive(seed, trial_index, StreamPurpose::SingleIlsInit);
                    let mut tally = DetectorTally::default();
                    let mut decision = None;
                    // a singular fit only happens on degenerate inits; redraw
                    for _ in 0..10 {
                        let init = SymbolMatrix::random(&self.cons, cfg.blocks, &mut rng)?;
                        tally.ils_runs += 1;
                        match ils(&rx, &self.cons, &init, cfg.max_ils_iterations) {
                            Ok(run) => {
                                tally.ils_iterations += run.iterations as u64;
                                decision = Some(run.s_hat);
                                break;
                            }
                            Err(Error::Singular(_)) => continue,
                            Err(e) => return Err(e),
                        }
                    }
                    self.score_blind(decision.as_ref(), &s, tally)
                }
                DetectorKind::Eils => {
                    let mut rng = RngStream::derive(seed, trial_index, StreamPurpose::DetectorInit);
                    match eils(&rx, &self.cons, &cfg.eils_config(), &mut rng) {
                        Ok(res) => {
                            let tally = DetectorTally {
                                ils_runs: res.attempts as u64,
                                ils_iterations: res.total_iterations as u64,
                                eils_executions: res.executions as u64,
                                majority_stops: res.stopped_by_majority as u64,
                                ..Default::default()
                            };
                            self.score_blind(Some(&res.best.s_hat), &s, tally)
                        }
                        Err(Error::NoConvergedRun(attempts)) => {
                            let tally = DetectorTally {
                                ils_runs: attempts as u64,
                                ..Default::default()
                            };
                            self.score_blind(None, &s, tally)
                        }
                        Err(e) => return Err(e),
                    }
                }
                DetectorKind::Oracle => {
                    let (s_star, _) = exhaustive_ls(&rx, &self.cons, cfg.enumeration_cap)?;
                    self.score_blind(Some(&s_star), &s, DetectorTally::default())
                }
            };
            tallies.push((kind, tally));
        }
        Ok(TrialOutcome { tallies })
    }

    fn score_blind(
        &self,
        s_hat: Option<&SymbolMatrix>,
        truth: &SymbolMatrix,
        mut tally: DetectorTally,
    ) -> DetectorTally {
        match s_hat {
            Some(s_hat) => {
                let aligned = self.group.align(&self.cons, s_hat, truth);
                let (raw_sym, raw_bits) = raw_errors(&self.cons, s_hat, truth);
                tally.bit_errors = aligned.bit_errors as u64;
                tally.symbol_errors = aligned.symbol_errors as u64;
                tally.raw_bit_errors = raw_bits as u64;
                tally.raw_symbol_errors = raw_sym as u64;
            }
            None => {
                let symbols = 2 * truth.blocks() as u64;
                let bits = self.cfg.bits_per_trial();
                tally.bit_errors = bits;
                tally.symbol_errors = symbols;
                tally.raw_bit_errors = bits;
                tally.raw_symbol_errors = symbols;
                tally.failures = 1;
            }
        }
        tally
    }

    /// Runs all trials of one grid point and aggregates them per detector.
    pub fn run_point(&self, snr_db: f64) -> Result<Vec<SweepRecord>> {
        let outcomes: Vec<TrialOutcome> = in_pool(self.cfg.workers, || {
            (0..self.cfg.trials as u64)
                .into_par_iter()
                .map(|t| self.run_trial(snr_db, t))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(self.aggregate(snr_db, &outcomes))
    }

    fn aggregate(&self, snr_db: f64, outcomes: &[TrialOutcome]) -> Vec<SweepRecord> {
        let cfg = &self.cfg;
        let trials = outcomes.len() as u64;
        let total_symbols = trials * 2 * cfg.blocks as u64;
        let total_bits = trials * cfg.bits_per_trial();
        cfg.detectors
            .iter()
            .enumerate()
            .map(|(i, &kind)| {
                let mut sum = DetectorTally::default();
                for o in outcomes {
                    sum += o.tallies[i].1;
                }
                let per_run = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
                SweepRecord {
                    snr_db,
                    blocks: cfg.blocks,
                    max_executions: cfg.max_executions,
                    majority: cfg.majority,
                    detector: kind,
                    trials,
                    total_bits,
                    bit_errors: sum.bit_errors,
                    ber: sum.bit_errors as f64 / total_bits as f64,
                    ber_ci95: stats::ci95_half_width(sum.bit_errors, total_bits),
                    raw_bit_errors: sum.raw_bit_errors,
                    raw_ber: sum.raw_bit_errors as f64 / total_bits as f64,
                    total_symbols,
                    symbol_errors: sum.symbol_errors,
                    ser: sum.symbol_errors as f64 / total_symbols as f64,
                    ser_ci95: stats::ci95_half_width(sum.symbol_errors, total_symbols),
                    raw_symbol_errors: sum.raw_symbol_errors,
                    raw_ser: sum.raw_symbol_errors as f64 / total_symbols as f64,
                    avg_ils_iterations: match kind {
                        DetectorKind::Ils | DetectorKind::Eils => {
                            per_run(sum.ils_iterations, sum.ils_runs)
                        }
                        _ => None,
                    },
                    avg_eils_executions: (kind == DetectorKind::Eils)
                        .then(|| sum.eils_executions as f64 / trials as f64),
                    majority_stop_fraction: (kind == DetectorKind::Eils)
                        .then(|| sum.majority_stops as f64 / trials as f64),
                    failures: sum.failures,
                }
            })
            .collect()
    }
}

/// One row of sweep output: a (grid point, detector) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub blocks: usize,
    pub max_executions: usize,
    pub majority: usize,
    pub detector: DetectorKind,
    pub trials: u64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ber_ci95: f64,
    pub raw_bit_errors: u64,
    pub raw_ber: f64,
    pub total_symbols: u64,
    pub symbol_errors: u64,
    pub ser: f64,
    pub ser_ci95: f64,
    pub raw_symbol_errors: u64,
    pub raw_ser: f64,
    pub avg_ils_iterations: Option<f64>,
    pub avg_eils_executions: Option<f64>,
    pub majority_stop_fraction: Option<f64>,
    pub failures: u64,
}

impl SweepRecord {
    pub fn bit_counts(&self) -> (u64, u64) {
        (self.bit_errors, self.total_bits)
    }

    pub fn symbol_counts(&self) -> (u64, u64) {
        (self.symbol_errors, self.total_symbols)
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Convenience wrapper: builds the context and runs a single trial.
pub fn run_trial(cfg: &SweepConfig, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
    TrialContext::new(cfg)?.run_trial(snr_db, trial_index)
}

/// One record per (SNR, detector).
pub fn sweep_snr(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let ctx = TrialContext::new(cfg)?;
    let mut out = Vec::new();
    for &snr in &cfg.snr_grid_db {
        out.extend(ctx.run_point(snr)?);
    }
    Ok(out)
}

/// One record per (SNR, N, detector).
pub fn sweep_samples(cfg: &SweepConfig, n_grid: &[usize]) -> Result<Vec<SweepRecord>> {
    if n_grid.is_empty() {
        return Err(Error::InvalidConfig("N grid is empty".into()));
    }
    let mut out = Vec::new();
    for &snr in &cfg.snr_grid_db {
        for &n in n_grid {
            let sub = SweepConfig {
                blocks: n,
                ..cfg.clone()
            };
            out.extend(TrialContext::new(&sub)?.run_point(snr)?);
        }
    }
    Ok(out)
}

/// Majority threshold used when Q varies: `T = min(4, Q − 1)`, at least 1.
pub fn majority_for(q: usize) -> usize {
    q.saturating_sub(1).clamp(1, 4)
}

/// One record per (SNR, Q, detector), with `T` tied to `Q`.
pub fn sweep_q(cfg: &SweepConfig, q_grid: &[usize]) -> Result<Vec<SweepRecord>> {
    if q_grid.is_empty() {
        return Err(Error::InvalidConfig("Q grid is empty".into()));
    }
    let mut out = Vec::new();
    for &snr in &cfg.snr_grid_db {
        for &q in q_grid {
            let sub = SweepConfig {
                max_executions: q,
                majority: majority_for(q),
                ..cfg.clone()
            };
            out.extend(TrialContext::new(&sub)?.run_point(snr)?);
        }
    }
    Ok(out)
}

/// Blind decoding of one received `4×N` matrix with enhanced ILS.
pub fn decode_burst(
    y: &ComplexMatrix,
    modulation: Modulation,
    cfg: &EilsConfig,
    seed: u64,
) -> Result<crate::detect::EilsResult> {
    let rx = crate::stbc::ReceivedBurst::from_equivalent(y.clone())?;
    let cons = modulation.constellation();
    let mut rng = RngStream::derive(seed, 0, StreamPurpose::DetectorInit);
    eils(&rx, &cons, cfg, &mut rng)
}
