//! Quasi-static flat Rayleigh channel, AWGN, and seeded random streams.
//!
//! Gaussian samples come from `rand_distr::StandardNormal` (ziggurat).
//! Reproducibility is statistical plus per-stream: a given
//! `(seed, index, purpose)` always yields the same draws, regardless of which
//! thread consumes them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, Complex, ComplexMatrix};
use crate::stbc::{equivalent_channel, stack_codes, ReceivedBurst, SymbolMatrix};

/// What a derived stream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamPurpose {
    Channel = 1,
    Symbols = 2,
    Noise = 3,
    DetectorInit = 4,
    SingleIlsInit = 5,
    HistogramInit = 6,
    Generic = 7,
}

/// A ChaCha8 stream with `2^64` independent sub-streams per key.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self::derive(seed, 0, StreamPurpose::Generic)
    }

    /// Stream keyed by `(seed, purpose)` and positioned on sub-stream `index`.
    pub fn derive(seed: u64, index: u64, purpose: StreamPurpose) -> Self {
        let key = splitmix64(seed ^ splitmix64(purpose as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        Self(rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly-symmetric complex Gaussian with `E|z|² = var`.
pub fn complex_gaussian<R: RngCore + ?Sized>(var: f64, rng: &mut R) -> Complex {
    let sigma = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(sigma * re, sigma * im)
}

/// 2×2 channel with i.i.d. unit-variance Rayleigh entries.
pub fn draw_channel<R: RngCore + ?Sized>(rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |_, _| complex_gaussian(1.0, rng))
}

pub fn draw_noise<R: RngCore + ?Sized>(
    rows: usize,
    cols: usize,
    noise_var: f64,
    rng: &mut R,
) -> ComplexMatrix {
    assert!(noise_var >= 0.0, "noise variance must be nonnegative");
    if noise_var == 0.0 {
        return ComplexMatrix::zeros(rows, cols);
    }
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(noise_var, rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    g: ComplexMatrix,
    h: ComplexMatrix,
    power: f64,
    noise_var: f64,
}

impl ChannelRealization {
    pub fn new(g: ComplexMatrix, power: f64, noise_var: f64) -> Self {
        assert_eq!(g.shape(), (2, 2));
        assert!(power >= 0.0 && noise_var >= 0.0);
        let h = equivalent_channel(&g);
        Self {
            g,
            h,
            power,
            noise_var,
        }
    }

    pub fn random<R: RngCore + ?Sized>(power: f64, noise_var: f64, rng: &mut R) -> Self {
        Self::new(draw_channel(rng), power, noise_var)
    }

    /// Builds the realization for a given `P/σ²` in dB with unit noise power.
    pub fn with_snr_db(g: ComplexMatrix, snr_db: f64) -> Self {
        Self::new(g, db_to_linear(snr_db), 1.0)
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise_var
    }

    /// `√(P/2)`, the per-antenna amplitude.
    pub fn amplitude(&self) -> f64 {
        (self.power / 2.0).sqrt()
    }

    /// The channel the detectors can at best estimate, `√(P/2)·G`.
    pub fn effective_g(&self) -> ComplexMatrix {
        self.g.scale_real(self.amplitude())
    }

    pub fn effective_h(&self) -> ComplexMatrix {
        self.h.scale_real(self.amplitude())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Sends a burst through the channel. One noise draw `Z` feeds both layouts,
/// the equivalent-channel form is its conjugate-stacked reshape.
pub fn transmit<R: RngCore + ?Sized>(
    s: &SymbolMatrix,
    ch: &ChannelRealization,
    rng: &mut R,
) -> ReceivedBurst {
    let clean = stack_codes(s)
        .matmul(&ch.effective_g())
        .expect("2Nx2 by 2x2 product");
    let z = draw_noise(clean.rows(), 2, ch.noise_var(), rng);
    let y_tilde = clean.add(&z).expect("same shape");
    ReceivedBurst::from_stacked(y_tilde).expect("well-formed stack")
}
