//! Blind detection of Alamouti-coded 2×2 MIMO bursts by iterative least
//! squares, plus the Monte Carlo machinery used to evaluate it.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: small complex matrices and the two-column LS solver.
//! * [`constellation`]: BPSK/QPSK/16-QAM alphabets, slicer, Gray labels.
//! * [`stbc`]: Alamouti encoding, signal layouts, blind ambiguity group.
//! * [`channel`]: Rayleigh channel, AWGN and reproducible random streams.
//! * [`detect`]: coherent ML, ILS, enhanced ILS and the exhaustive search.
//! * [`harness`]: trials, sweeps, histograms, CSV and manifest output.
//! * [`textio`]: the plain-text complex matrix format.

pub mod channel;
pub mod constellation;
pub mod detect;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod stbc;
pub mod textio;

pub use channel::{ChannelRealization, RngStream, StreamPurpose};
pub use constellation::{Constellation, Modulation};
pub use detect::{DetectionResult, EilsConfig, EilsResult};
pub use error::{Error, Result};
pub use harness::{DetectorKind, HistogramConfig, SweepConfig, SweepRecord};
pub use linalg::{Complex, ComplexMatrix};
pub use stbc::{AmbiguityGroup, ReceivedBurst, SymbolMatrix};
