//! Detectors: coherent ML with known channel, iterative least squares (ILS),
//! enhanced ILS with residual-based restarts, and the exhaustive LS search.
//!
//! The blind detectors never see the transmit power. They fit the model
//! `Y = H·S + N` directly, so the channel they return is the effective one,
//! `√(P/2)·G`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{inverse_2x2, solve_normal_eq, ComplexMatrix};
use crate::stbc::{equivalent_channel, stack_codes, ReceivedBurst, SymbolMatrix};

pub const DEFAULT_MAX_ILS_ITERATIONS: usize = 50;
pub const DEFAULT_RESIDUAL_MATCH_TOL: f64 = 1e-9;
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub s_hat: SymbolMatrix,
    /// Effective channel estimate, includes the `√(P/2)` scale.
    pub g_hat: ComplexMatrix,
    pub h_hat: ComplexMatrix,
    /// `‖Y − Ĥ·Ŝ‖²_F`
    pub residual: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before a symbol fixed point.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EilsConfig {
    /// Maximum number of ILS executions (Q).
    pub max_executions: usize,
    /// Majority threshold (T).
    pub majority: usize,
    pub residual_match_tol: f64,
    pub max_ils_iterations: usize,
}

impl EilsConfig {
    pub fn new(max_executions: usize, majority: usize) -> Result<Self> {
        let cfg = Self {
            max_executions,
            majority,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_executions == 0 {
            return Err(Error::InvalidConfig("Q must be at least 1".into()));
        }
        if self.majority == 0 {
            return Err(Error::InvalidConfig("T must be at least 1".into()));
        }
        if self.residual_match_tol.is_nan() || self.residual_match_tol < 0.0 {
            return Err(Error::InvalidConfig(
                "residual match tolerance must be >= 0".into(),
            ));
        }
        if self.max_ils_iterations == 0 {
            return Err(Error::InvalidConfig(
                "ILS iteration cap must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Whether two residuals count as "the same value" for the majority test.
    #[inline]
    pub fn residuals_match(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.residual_match_tol * a.max(b).max(1.0)
    }
}

impl Default for EilsConfig {
    fn default() -> Self {
        Self {
            max_executions: 20,
            majority: 2,
            residual_match_tol: DEFAULT_RESIDUAL_MATCH_TOL,
            max_ils_iterations: DEFAULT_MAX_ILS_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EilsResult {
    pub best: DetectionResult,
    /// Converged ILS executions that entered the residual history.
    pub executions: usize,
    pub stopped_by_majority: bool,
    pub residual_history: Vec<f64>,
    /// ILS attempts including the discarded ones.
    pub attempts: usize,
    /// Iterations summed over all attempts.
    pub total_iterations: usize,
}

/// `‖Y − Ĥ·Ŝ‖²_F`
pub fn residual(y: &ComplexMatrix, h_hat: &ComplexMatrix, s_hat: &SymbolMatrix) -> Result<f64> {
    Ok(y.sub(&h_hat.matmul(s_hat.as_matrix())?)?.frobenius_sq())
}

/// Hard decisions with a known effective channel `√(P/2)·H`.
///
/// `HᴴH` is a multiple of the identity, so the sliced LS estimate is the
/// per-symbol matched filter and hence exact ML.
pub fn coherent_ml(
    y: &ComplexMatrix,
    h_eff: &ComplexMatrix,
    cons: &Constellation,
) -> Result<SymbolMatrix> {
    let soft = solve_normal_eq(h_eff, y)?;
    SymbolMatrix::new(cons.slice_matrix(&soft))
}

/// LS channel for fixed symbols: `Ĝ = (CᴴC)⁻¹CᴴỸ`.
pub fn estimate_channel(y_tilde: &ComplexMatrix, s: &SymbolMatrix) -> Result<ComplexMatrix> {
    solve_normal_eq(&stack_codes(s), y_tilde)
}

/// LS symbols for a fixed channel estimate, sliced onto the alphabet.
pub fn detect_symbols(
    y: &ComplexMatrix,
    g_hat: &ComplexMatrix,
    cons: &Constellation,
) -> Result<SymbolMatrix> {
    coherent_ml(y, &equivalent_channel(g_hat), cons)
}

/// Single ILS run from `init`.
pub fn ils(
    rx: &ReceivedBurst,
    cons: &Constellation,
    init: &SymbolMatrix,
    max_iter: usize,
) -> Result<DetectionResult> {
    run_ils(rx, cons, init, max_iter, None)
}

/// Like [`ils`], also returning `‖Y − H⁽ᵈ⁾S⁽ᵈ⁾‖²` after every iteration.
pub fn ils_traced(
    rx: &ReceivedBurst,
    cons: &Constellation,
    init: &SymbolMatrix,
    max_iter: usize,
) -> Result<(DetectionResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let res = run_ils(rx, cons, init, max_iter, Some(&mut trace))?;
    Ok((res, trace))
}

fn run_ils(
    rx: &ReceivedBurst,
    cons: &Constellation,
    init: &SymbolMatrix,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<DetectionResult> {
    if init.blocks() != rx.blocks() {
        return Err(Error::DimensionMismatch {
            op: "ils",
            lhs: init.as_matrix().shape(),
            rhs: rx.y.shape(),
        });
    }
    let mut prev = init.clone();
    let mut d = 0;
    loop {
        d += 1;
        let g = estimate_channel(&rx.y_tilde, &prev)?;
        let h = equivalent_channel(&g);
        let s = coherent_ml(&rx.y, &h, cons)?;
        let converged = s == prev;
        if let Some(t) = trace.as_deref_mut() {
            t.push(residual(&rx.y, &h, &s)?);
        }
        if converged || d >= max_iter {
            let r = residual(&rx.y, &h, &s)?;
            return Ok(DetectionResult {
                s_hat: s,
                g_hat: g,
                h_hat: h,
                residual: r,
                iterations: d,
                converged,
            });
        }
        prev = s;
    }
}

/// Enhanced ILS: restart from fresh uniform initializations, keep the
/// minimum-residual pair, stop early once the current residual is minimal
/// and already seen `T` times before.
///
/// Runs that fail (singular fit or no fixed point within the iteration cap)
/// are discarded and retried. Gives up after `10·Q` attempts without a
/// single converged run.
pub fn eils<R: RngCore + ?Sized>(
    rx: &ReceivedBurst,
    cons: &Constellation,
    cfg: &EilsConfig,
    rng: &mut R,
) -> Result<EilsResult> {
    cfg.validate()?;
    let max_attempts = 10 * cfg.max_executions;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_executions);
    let mut best: Option<DetectionResult> = None;
    let mut r_min = f64::INFINITY;
    let mut attempts = 0;
    let mut total_iterations = 0;
    let mut stopped_by_majority = false;

    while history.len() < cfg.max_executions && attempts < max_attempts {
        attempts += 1;
        let init = SymbolMatrix::random(cons, rx.blocks(), rng)?;
        let run = match ils(rx, cons, &init, cfg.max_ils_iterations) {
            Ok(run) => run,
            Err(Error::Singular(_)) => continue,
            Err(e) => return Err(e),
        };
        total_iterations += run.iterations;
        if !run.converged {
            continue;
        }

        let rq = run.residual;
        let is_min = rq <= r_min || cfg.residuals_match(rq, r_min);
        let matches = history
            .iter()
            .filter(|&&ri| cfg.residuals_match(rq, ri))
            .count();
        history.push(rq);
        if rq < r_min {
            r_min = rq;
            best = Some(run);
        }
        if is_min && matches >= cfg.majority {
            stopped_by_majority = true;
            break;
        }
    }

    let best = best.ok_or(Error::NoConvergedRun(attempts))?;
    Ok(EilsResult {
        best,
        executions: history.len(),
        stopped_by_majority,
        residual_history: history,
        attempts,
        total_iterations,
    })
}

/// Global minimizer of `min_G ‖Ỹ − C(S)·G‖²` over every `S ∈ A^{2×N}`.
///
/// Ties keep the first candidate in enumeration order.
pub fn exhaustive_ls(
    rx: &ReceivedBurst,
    cons: &Constellation,
    cap: u64,
) -> Result<(SymbolMatrix, f64)> {
    let n = rx.blocks();
    let digits = 2 * n;
    let base = cons.len();
    let candidates = (base as u128)
        .checked_pow(digits as u32)
        .unwrap_or(u128::MAX);
    if candidates > cap as u128 {
        return Err(Error::EnumerationTooLarge { candidates, cap });
    }

    let pts = cons.points();
    let mut idx = vec![0usize; digits];
    let mut best: Option<(SymbolMatrix, f64)> = None;
    loop {
        let stream: Vec<_> = idx.iter().map(|&i| pts[i]).collect();
        let s = SymbolMatrix::from_stream(&stream)?;
        match estimate_channel(&rx.y_tilde, &s) {
            Ok(g) => {
                let r = residual(&rx.y, &equivalent_channel(&g), &s)?;
                if best.as_ref().is_none_or(|(_, b)| r < *b) {
                    best = Some((s, r));
                }
            }
            Err(Error::Singular(_)) => {}
            Err(e) => return Err(e),
        }

        // odometer increment
        let mut k = 0;
        loop {
            if k == digits {
                return best.ok_or(Error::Singular(0.0));
            }
            idx[k] += 1;
            if idx[k] < base {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `‖Y·P⊥‖²_F` with `P⊥ = I_N − Sᴴ(SSᴴ)⁻¹S`, the residual of the best
/// unconstrained `4×2` channel for `S`.
pub fn projection_criterion(y: &ComplexMatrix, s: &SymbolMatrix) -> Result<f64> {
    let sm = s.as_matrix();
    let sh = sm.hermitian();
    let gram_inv = inverse_2x2(&sm.matmul(&sh)?)?;
    let proj = sh.matmul(&gram_inv)?.matmul(sm)?;
    let p_perp = ComplexMatrix::identity(sm.cols()).sub(&proj)?;
    Ok(y.matmul(&p_perp)?.frobenius_sq())
}

/// Unconstrained LS channel `Ĥ = Y·Sᴴ(SSᴴ)⁻¹` for fixed symbols.
pub fn unstructured_channel(y: &ComplexMatrix, s: &SymbolMatrix) -> Result<ComplexMatrix> {
    // Ĥᴴ solves the normal equations of Sᴴ·X ≈ Yᴴ
    Ok(solve_normal_eq(&s.as_matrix().hermitian(), &y.hermitian())?.hermitian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit, ChannelRealization, RngStream};
    use crate::constellation::Modulation;
    use crate::stbc::AmbiguityGroup;

    fn burst(
        m: Modulation,
        n: usize,
        snr_db: f64,
        seed: u64,
    ) -> (ReceivedBurst, SymbolMatrix, ChannelRealization) {
        let cons = m.constellation();
        let mut rng = RngStream::from_seed(seed);
        let g = crate::channel::draw_channel(&mut rng);
        let ch = ChannelRealization::with_snr_db(g, snr_db);
        let s = SymbolMatrix::random(&cons, n, &mut rng).unwrap();
        let rx = transmit(&s, &ch, &mut rng);
        (rx, s, ch)
    }

    fn noiseless(
        m: Modulation,
        n: usize,
        seed: u64,
    ) -> (ReceivedBurst, SymbolMatrix, ChannelRealization) {
        let cons = m.constellation();
        let mut rng = RngStream::from_seed(seed);
        let ch = ChannelRealization::random(2.0, 0.0, &mut rng);
        let s = SymbolMatrix::random(&cons, n, &mut rng).unwrap();
        let rx = transmit(&s, &ch, &mut rng);
        (rx, s, ch)
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn coherent_ml_noiseless_and_scale_invariant() {
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16] {
            let cons = m.constellation();
            let (rx, s, ch) = noiseless(m, 20, 41);
            assert_eq!(coherent_ml(&rx.y, &ch.effective_h(), &cons).unwrap(), s);

            let (rx, _, ch) = burst(m, 20, 5.0, 42);
            let a = coherent_ml(&rx.y, &ch.effective_h(), &cons).unwrap();
            let b = coherent_ml(
                &rx.y.scale_real(3.7),
                &ch.effective_h().scale_real(3.7),
                &cons,
            )
            .unwrap();
            assert_eq!(a, b);
        }
        let cons = Modulation::Bpsk.constellation();
        let y = ComplexMatrix::zeros(4, 3);
        assert!(matches!(
            coherent_ml(&y, &ComplexMatrix::zeros(4, 2), &cons),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn estimate_channel_cases() {
        let (rx, s, ch) = noiseless(Modulation::Qpsk, 10, 43);
        let g = estimate_channel(&rx.y_tilde, &s).unwrap();
        assert!(max_diff(&g, &ch.effective_g()) < 1e-10);

        // N = 1, S = [1, 1]ᵀ, G = I, P = 2 gives back the identity
        let ch = ChannelRealization::new(ComplexMatrix::identity(2), 2.0, 0.0);
        let s = SymbolMatrix::new(ComplexMatrix::from_real_rows(&[[1.0], [1.0]])).unwrap();
        let rx = transmit(&s, &ch, &mut RngStream::from_seed(0));
        let g = estimate_channel(&rx.y_tilde, &s).unwrap();
        assert!(max_diff(&g, &ComplexMatrix::identity(2)) < 1e-15);

        let zero = SymbolMatrix::new(ComplexMatrix::zeros(2, 1)).unwrap();
        assert!(matches!(
            estimate_channel(&rx.y_tilde, &zero),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn estimate_channel_matches_diagonal_shortcut() {
        let cons = Modulation::Qam16.constellation();
        let mut rng = RngStream::from_seed(44);
        for _ in 0..50 {
            let (rx, _, _) = burst(Modulation::Qam16, 7, 10.0, rng.next_u64());
            let s = SymbolMatrix::random(&cons, 7, &mut rng).unwrap();
            let cm = stack_codes(&s);
            let shortcut = cm
                .hermitian()
                .matmul(&rx.y_tilde)
                .unwrap()
                .scale_real(1.0 / s.as_matrix().frobenius_sq());
            assert!(max_diff(&estimate_channel(&rx.y_tilde, &s).unwrap(), &shortcut) < 1e-12);
        }
    }

    #[test]
    fn detect_symbols_with_true_channel() {
        let cons = Modulation::Qpsk.constellation();
        let (rx, s, ch) = noiseless(Modulation::Qpsk, 12, 45);
        assert_eq!(detect_symbols(&rx.y, &ch.effective_g(), &cons).unwrap(), s);
        assert!(detect_symbols(&rx.y, &ComplexMatrix::zeros(2, 2), &cons).is_err());
    }

    #[test]
    fn ils_from_truth_is_a_fixed_point() {
        let cons = Modulation::Bpsk.constellation();
        let (rx, s, _) = noiseless(Modulation::Bpsk, 20, 46);
        let res = ils(&rx, &cons, &s, 50).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(res.residual < 1e-20);
        assert_eq!(res.s_hat, s);
    }

    #[test]
    fn ils_residual_is_monotone_and_fixed_point_sound() {
        let cons = Modulation::Qpsk.constellation();
        let mut rng = RngStream::from_seed(47);
        for t in 0..300 {
            let (rx, _, _) = burst(Modulation::Qpsk, 20, 6.0, 1000 + t);
            let init = SymbolMatrix::random(&cons, 20, &mut rng).unwrap();
            let (res, trace) = ils_traced(&rx, &cons, &init, 50).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{trace:?}");
            }
            if res.converged {
                let again = ils(&rx, &cons, &res.s_hat, 50).unwrap();
                assert_eq!(again.s_hat, res.s_hat);
                assert_eq!(again.iterations, 1);
            }
            let recomputed = residual(&rx.y, &res.h_hat, &res.s_hat).unwrap();
            assert!((recomputed - res.residual).abs() <= 1e-9 * res.residual.max(1.0));
            assert_eq!(res.h_hat, equivalent_channel(&res.g_hat));
        }
    }

    #[test]
    fn residual_cases() {
        let (rx, s, ch) = noiseless(Modulation::Bpsk, 6, 48);
        assert!(residual(&rx.y, &ch.effective_h(), &s).unwrap() < 1e-24);

        let (rx, _, _) = burst(Modulation::Qpsk, 6, 8.0, 49);
        let cons = Modulation::Qpsk.constellation();
        let s = SymbolMatrix::random(&cons, 6, &mut RngStream::from_seed(50)).unwrap();
        let g = estimate_channel(&rx.y_tilde, &s).unwrap();
        let via_y = residual(&rx.y, &equivalent_channel(&g), &s).unwrap();
        let via_tilde = rx
            .y_tilde
            .sub(&stack_codes(&s).matmul(&g).unwrap())
            .unwrap()
            .frobenius_sq();
        assert!((via_y - via_tilde).abs() <= 1e-9 * via_y);
        assert!(via_y > 0.0);
    }

    #[test]
    fn eils_with_single_execution_equals_ils() {
        let cons = Modulation::Qpsk.constellation();
        let (rx, _, _) = burst(Modulation::Qpsk, 20, 10.0, 51);
        let cfg = EilsConfig::new(1, 1).unwrap();
        let e = eils(&rx, &cons, &cfg, &mut RngStream::from_seed(52)).unwrap();
        let init = SymbolMatrix::random(&cons, 20, &mut RngStream::from_seed(52)).unwrap();
        let single = ils(&rx, &cons, &init, cfg.max_ils_iterations).unwrap();
        assert!(single.converged);
        assert_eq!(e.executions, 1);
        assert_eq!(e.best, single);
    }

    #[test]
    fn eils_noiseless_recovers_symbols() {
        let cons = Modulation::Bpsk.constellation();
        let group = AmbiguityGroup::new(&cons);
        let cfg = EilsConfig::new(20, 2).unwrap();
        let mut ok = 0;
        for t in 0..200 {
            let (rx, s, _) = noiseless(Modulation::Bpsk, 20, 2000 + t);
            let res = eils(&rx, &cons, &cfg, &mut RngStream::from_seed(t)).unwrap();
            if res.best.residual <= 1e-18
                && group.align(&cons, &res.best.s_hat, &s).symbol_errors == 0
            {
                ok += 1;
            }
        }
        assert!(ok >= 198, "{ok}/200");
    }

    #[test]
    fn eils_bookkeeping() {
        let cons = Modulation::Qpsk.constellation();
        let cfg = EilsConfig::new(20, 4).unwrap();
        for t in 0..50 {
            let (rx, _, _) = burst(Modulation::Qpsk, 20, 6.0, 3000 + t);
            let res = eils(&rx, &cons, &cfg, &mut RngStream::from_seed(t)).unwrap();
            let min = res
                .residual_history
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(res.best.residual, min);
            assert_eq!(res.executions, res.residual_history.len());
            assert!(res.executions <= cfg.max_executions);
            if !res.stopped_by_majority {
                assert_eq!(res.executions, cfg.max_executions);
            }
        }
    }

    #[test]
    fn eils_min_is_order_independent_without_majority() {
        // With T > Q the whole history is used, so the minimum cannot depend
        // on the order in which the same initializations are tried.
        let cons = Modulation::Bpsk.constellation();
        let (rx, _, _) = burst(Modulation::Bpsk, 10, 4.0, 53);
        let inits: Vec<SymbolMatrix> = (0..15)
            .map(|i| SymbolMatrix::random(&cons, 10, &mut RngStream::from_seed(100 + i)).unwrap())
            .collect();
        let min_over = |order: &[usize]| {
            order
                .iter()
                .map(|&i| ils(&rx, &cons, &inits[i], 50).unwrap())
                .filter(|r| r.converged)
                .map(|r| r.residual)
                .fold(f64::INFINITY, f64::min)
        };
        let forward: Vec<usize> = (0..15).collect();
        let backward: Vec<usize> = (0..15).rev().collect();
        assert_eq!(min_over(&forward), min_over(&backward));
    }

    #[test]
    fn exhaustive_noiseless_and_dominance() {
        let cons = Modulation::Bpsk.constellation();
        let group = AmbiguityGroup::new(&cons);
        let (rx, s, _) = noiseless(Modulation::Bpsk, 4, 54);
        let (s_star, r_star) = exhaustive_ls(&rx, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(r_star < 1e-20);
        assert_eq!(group.align(&cons, &s_star, &s).symbol_errors, 0);

        let cfg = EilsConfig::new(10, 3).unwrap();
        for t in 0..30 {
            let (rx, _, _) = burst(Modulation::Bpsk, 4, 3.0, 4000 + t);
            let (_, r_star) = exhaustive_ls(&rx, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
            let e = eils(&rx, &cons, &cfg, &mut RngStream::from_seed(t)).unwrap();
            assert!(r_star <= e.best.residual * (1.0 + 1e-12));
            for &r in &e.residual_history {
                assert!(e.best.residual <= r);
            }
        }
    }

    #[test]
    fn exhaustive_respects_cap() {
        let cons = Modulation::Qpsk.constellation();
        let (rx, _, _) = burst(Modulation::Qpsk, 20, 10.0, 55);
        assert!(matches!(
            exhaustive_ls(&rx, &cons, DEFAULT_ENUMERATION_CAP),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    /// Independent brute force over the stacked layout using the explicit
    /// `2N×2N` projector onto the complement of `range(C(S))`.
    fn projector_brute_force(rx: &ReceivedBurst, cons: &Constellation) -> f64 {
        let n = rx.blocks();
        let pts = cons.points();
        let total = pts.len().pow(2 * n as u32);
        let mut best = f64::INFINITY;
        for code in 0..total {
            let mut rem = code;
            let stream: Vec<_> = (0..2 * n)
                .map(|_| {
                    let p = pts[rem % pts.len()];
                    rem /= pts.len();
                    p
                })
                .collect();
            let s = SymbolMatrix::from_stream(&stream).unwrap();
            let cm = stack_codes(&s);
            let ch = cm.hermitian();
            let gram_inv = inverse_2x2(&ch.matmul(&cm).unwrap()).unwrap();
            let p = ComplexMatrix::identity(2 * n)
                .sub(&cm.matmul(&gram_inv).unwrap().matmul(&ch).unwrap())
                .unwrap();
            let r = p.matmul(&rx.y_tilde).unwrap().frobenius_sq();
            best = best.min(r);
        }
        best
    }

    #[test]
    fn exhaustive_matches_projector_brute_force() {
        let cons = Modulation::Bpsk.constellation();
        for t in 0..10 {
            let (rx, _, _) = burst(Modulation::Bpsk, 3, 5.0, 5000 + t);
            let (_, r) = exhaustive_ls(&rx, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
            let oracle = projector_brute_force(&rx, &cons);
            assert!(
                (r - oracle).abs() <= 1e-9 * oracle.max(1.0),
                "{r} vs {oracle}"
            );
        }
    }

    #[test]
    fn projection_criterion_matches_unstructured_fit() {
        let cons = Modulation::Bpsk.constellation();
        let mut rng = RngStream::from_seed(56);
        let mut checked = 0;
        while checked < 100 {
            let n = 2 + (rng.next_u32() % 5) as usize;
            let (rx, _, _) = burst(Modulation::Bpsk, n, 6.0, rng.next_u64());
            let s = SymbolMatrix::random(&cons, n, &mut rng).unwrap();
            let Ok(h) = unstructured_channel(&rx.y, &s) else {
                continue;
            };
            let direct = residual(&rx.y, &h, &s).unwrap();
            let proj = projection_criterion(&rx.y, &s).unwrap();
            // exact fits (square S) leave only rounding noise on both sides
            let scale = direct.max(proj).max(f64::EPSILON * rx.y.frobenius_sq());
            assert!(
                (direct - proj).abs() <= 1e-9 * scale,
                "n={n}: {direct:e} vs {proj:e}"
            );
            checked += 1;
        }
    }

    #[test]
    fn config_validation() {
        assert!(EilsConfig::new(0, 2).is_err());
        assert!(EilsConfig::new(5, 0).is_err());
        let cfg = EilsConfig::default();
        assert!(cfg.residuals_match(1.0, 1.0 + 1e-12));
        assert!(!cfg.residuals_match(1.0, 1.001));
        assert!(cfg.residuals_match(1e-20, 2e-20));
    }
}
