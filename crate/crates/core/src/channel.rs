//! Quasi-static frequency-flat Rayleigh MIMO channel with complex AWGN,
//! and the Eb/N0 accounting bridge.
//!
//! Channel gains are i.i.d. circularly symmetric complex Gaussian with zero
//! mean and unit variance, drawn once per frame and reused for every block
//! in the frame. The noise added by [`transmit`] has total variance
//! `N_T / snr` per complex sample (`N_T / (2 snr)` per real component),
//! where `snr` is the signal-to-noise ratio per receive antenna; unit-power
//! symbols on `N_T` antennas then arrive at exactly that SNR with no extra
//! per-antenna rescaling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::mat::CxMat;
use crate::rng::standard_complex;
use crate::stbc::TxBlock;

/// One frame's channel matrix (receive antennas x transmit antennas).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub gains: CxMat,
}

impl ChannelRealization {
    pub fn n_r(&self) -> usize {
        self.gains.rows()
    }

    pub fn n_t(&self) -> usize {
        self.gains.cols()
    }

    /// Total power gain `sum |h_ji|^2`.
    pub fn power_gain(&self) -> f64 {
        self.gains.norm_sq()
    }
}

/// Draws one quasi-static realization; deterministic under a fixed stream.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, n_r: usize, n_t: usize) -> ChannelRealization {
    assert!(n_r >= 1 && n_t >= 1, "antenna counts must be positive");
    let mut gains = CxMat::zeros(n_r, n_t);
    for i in 0..n_r {
        for j in 0..n_t {
            gains[(i, j)] = standard_complex(rng);
        }
    }
    ChannelRealization { gains }
}

/// Propagates one space-time block: `r = h * block^T + n`, returning the
/// (N_R x K) receive block. An infinite `snr` disables the noise entirely.
pub fn transmit<R: Rng + ?Sized>(
    block: &TxBlock,
    h: &ChannelRealization,
    snr: f64,
    rng: &mut R,
) -> CxMat {
    assert_eq!(
        h.n_t(),
        block.as_mat().cols(),
        "channel and block transmit-antenna counts must agree"
    );
    assert!(snr > 0.0, "snr must be positive");
    let mut r = h.gains.mul_transpose(block.as_mat());
    if snr.is_finite() {
        let sigma = (h.n_t() as f64 / (2.0 * snr)).sqrt();
        for i in 0..r.rows() {
            for k in 0..r.cols() {
                let n_re: f64 = rng.sample(StandardNormal);
                let n_im: f64 = rng.sample(StandardNormal);
                r[(i, k)] += Complex64::new(n_re * sigma, n_im * sigma);
            }
        }
    }
    r
}

/// Eb/N0 bookkeeping for one link configuration.
///
/// The conversion is `snr = ebno_linear * code_rate * bits_per_symbol *
/// stbc_rate` — SNR per receive antenna equals average Eb/N0 times the
/// information bits per channel use. Tail-bit overhead is excluded from
/// `code_rate` and reported separately by the harness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub ebno_db: f64,
    pub code_rate: f64,
    pub bits_per_symbol: f64,
    pub stbc_rate: f64,
}

impl LinkBudget {
    pub fn new(ebno_db: f64, code_rate: f64, stbc_rate: f64) -> Self {
        Self {
            ebno_db,
            code_rate,
            bits_per_symbol: 2.0,
            stbc_rate,
        }
    }

    /// Average Eb/N0 in linear units.
    pub fn gamma_b_bar(&self) -> f64 {
        10f64.powf(self.ebno_db / 10.0)
    }

    /// Linear SNR per receive antenna.
    pub fn snr(&self) -> f64 {
        self.gamma_b_bar() * self.code_rate * self.bits_per_symbol * self.stbc_rate
    }
}

/// Instantaneous Eb/N0 of one realization,
/// `gamma_b = gamma_b_bar * sum |h_ji|^2 / (N_T N_R)`,
/// normalized so its mean is the average Eb/N0.
pub fn instantaneous_gamma_b(h: &ChannelRealization, budget: &LinkBudget) -> f64 {
    budget.gamma_b_bar() * h.power_gain() / (h.n_t() * h.n_r()) as f64
}
