//! Link-level simulation of turbo and convolutional codes over quasi-static
//! Rayleigh fading channels, with and without orthogonal space-time block
//! coding, plus a closed-form convergence-threshold FER predictor.
//!
//! The crate is organized around the transmit/receive chain:
//!
//! * [`trellis`] — rate-1/2 recursive systematic convolutional codes as
//!   trellises, shared by the turbo and convolutional paths;
//! * [`interleaver`] — seeded random permutations;
//! * [`bcjr`] — exact log-MAP soft-in/soft-out decoding of one constituent;
//! * [`turbo`] — parallel-concatenated encoding with alternate parity
//!   puncturing and iterative decoding;
//! * [`viterbi`] — soft-input ML sequence decoding of the stand-alone code;
//! * [`modem`] — Gray-coded QPSK mapping and the single-antenna demapper;
//! * [`stbc`] — G2/G3/G4 orthogonal space-time block codes and their
//!   soft demappers, including an exact-marginalization reference;
//! * [`channel`] — quasi-static Rayleigh MIMO channel and Eb/N0 accounting;
//! * [`analytic`] — closed-form FER prediction from the iterative-decoder
//!   convergence threshold, plus an empirical threshold estimator;
//! * [`sim`] — Monte Carlo frame simulation, Eb/N0 sweeps, paired code
//!   comparisons, and CSV/plot-data emission.

pub mod analytic;
pub mod bcjr;
pub mod channel;
mod error;
pub mod interleaver;
pub mod mat;
pub mod modem;
pub mod rng;
pub mod sim;
pub mod stbc;
pub mod trellis;
pub mod turbo;
pub mod viterbi;

pub use analytic::{fer_analytic, fer_semi_analytic, pdf_gamma, ThresholdSpec};
pub use channel::{draw_channel, instantaneous_gamma_b, transmit, ChannelRealization, LinkBudget};
pub use error::{Error, Result};
pub use interleaver::Interleaver;
pub use mat::CxMat;
pub use sim::{CodeConfig, SimConfig, SweepResult};
pub use stbc::{StbcScheme, TxBlock};
pub use trellis::{build_trellis, rsc_encode, CodeSpec, Trellis};
pub use turbo::{turbo_decode, turbo_encode, LlrFrame, TurboConfig};
pub use viterbi::{conv_encode, viterbi_decode, ViterbiConfig};

/// A single bit, stored as `0` or `1`.
pub type Bit = u8;

/// Magnitude bound applied to LLRs inside the decoders; `exp(±300)` still
/// evaluates safely in double precision.
pub const LLR_CLAMP: f64 = 300.0;

pub(crate) fn clamp_llr(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}
