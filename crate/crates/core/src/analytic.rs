//! Closed-form threshold-based FER prediction and the empirical threshold
//! estimator.
//!
//! The model: iterative decoding fails exactly when the instantaneous Eb/N0
//! `gamma_b` of the quasi-static frame falls at or below the code's
//! convergence threshold `gamma_th`. Over Rayleigh fading with maximal
//! ratio combining, `gamma_b` is Gamma-distributed with shape
//! `m = N_T * N_R` and mean `gamma_b_bar`, so the predicted FER is the CDF
//! at the threshold:
//!
//! ```text
//! P_f = 1 - exp(-x) * sum_{k<m} x^k / k!,   x = gamma_th / (gamma_b_bar/m)
//! ```
//!
//! Thresholds are stored and displayed in dB but applied in linear units;
//! the conversion happens at the boundary only. The model deliberately
//! ignores distance-spectrum effects, so gaps below FER 1e-3 are out of
//! model scope.

use rand::Rng;

use crate::channel::LinkBudget;
use crate::interleaver::Interleaver;
use crate::modem::{demap_siso_stream, map_bit_pairs};
use crate::rng::{frame_rng, standard_complex, Lane};
use crate::trellis::CodeSpec;
use crate::turbo::{LlrFrame, TurboCodec, TurboConfig};
use crate::{Bit, Error, Result};
use num_complex::Complex64;

/// A convergence threshold together with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSpec {
    pub gamma_th_db: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Quoted from the literature threshold table.
    Literature,
    /// Estimated empirically by [`estimate_threshold`].
    Estimated,
}

impl ThresholdSpec {
    /// Builds a spec, warning on stderr for values outside the range
    /// typical of the codes studied here.
    pub fn new(gamma_th_db: f64, provenance: Provenance) -> Result<Self> {
        if !gamma_th_db.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if !(-1.0..=5.0).contains(&gamma_th_db) {
            eprintln!(
                "warning: convergence threshold {gamma_th_db} dB is outside the \
                 [-1, 5] dB range typical of rate-1/2 turbo codes"
            );
        }
        Ok(Self {
            gamma_th_db,
            provenance,
        })
    }

    pub fn gamma_th_linear(&self) -> f64 {
        10f64.powf(self.gamma_th_db / 10.0)
    }
}

/// Built-in threshold table (shipped as `data/thresholds.txt`).
const THRESHOLD_TABLE: &str = include_str!("../data/thresholds.txt");

/// Looks the constituent polynomials up in the shipped threshold table.
pub fn lookup_threshold(spec: &CodeSpec) -> Option<ThresholdSpec> {
    for line in THRESHOLD_TABLE.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            continue;
        }
        let (Ok(ff), Ok(fb)) = (
            u32::from_str_radix(fields[0], 8),
            u32::from_str_radix(fields[1], 8),
        ) else {
            continue;
        };
        if ff == spec.feedforward() && fb == spec.feedback() {
            let gamma_th_db: f64 = fields[3].parse().ok()?;
            return ThresholdSpec::new(gamma_th_db, Provenance::Literature).ok();
        }
    }
    None
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::Usage("fading order must be at least 1".into()));
    }
    Ok(())
}

/// Density of the instantaneous Eb/N0 at `gamma`, for fading order
/// `m = N_T * N_R` and mean `gamma_b_bar`.
pub fn pdf_gamma(gamma: f64, gamma_b_bar: f64, order: usize) -> Result<f64> {
    check_order(order)?;
    if gamma < 0.0 || gamma_b_bar <= 0.0 {
        return Err(Error::Usage(format!(
            "pdf_gamma needs gamma >= 0 and gamma_b_bar > 0 (got {gamma}, {gamma_b_bar})"
        )));
    }
    let m = order as f64;
    let gamma_c = gamma_b_bar / m;
    let factorial: f64 = (1..order).map(|k| k as f64).product();
    Ok(gamma.powi(order as i32 - 1) * (-gamma / gamma_c).exp()
        / (factorial * gamma_c.powi(order as i32)))
}

/// Closed-form FER: probability that the instantaneous Eb/N0 falls at or
/// below `gamma_th` (both arguments linear). Strictly decreasing in
/// `gamma_b_bar`, strictly increasing in `gamma_th`.
pub fn fer_analytic(gamma_b_bar: f64, gamma_th: f64, order: usize) -> Result<f64> {
    check_order(order)?;
    if gamma_b_bar <= 0.0 || gamma_th <= 0.0 {
        return Err(Error::Usage(format!(
            "fer_analytic needs positive gamma_b_bar and gamma_th (got {gamma_b_bar}, {gamma_th})"
        )));
    }
    let x = gamma_th * order as f64 / gamma_b_bar;
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..order {
        term *= x / k as f64;
        series += term;
    }
    Ok(1.0 - (-x).exp() * series)
}

/// Monte Carlo estimate of the same probability from raw channel draws;
/// converges to [`fer_analytic`] as `n_draws` grows.
pub fn fer_semi_analytic<R: Rng + ?Sized>(
    gamma_b_bar: f64,
    gamma_th: f64,
    order: usize,
    rng: &mut R,
    n_draws: u64,
) -> Result<f64> {
    check_order(order)?;
    if gamma_b_bar <= 0.0 || gamma_th < 0.0 {
        return Err(Error::Usage(
            "fer_semi_analytic needs positive gamma_b_bar and nonnegative gamma_th".into(),
        ));
    }
    let m = order as f64;
    let mut hits = 0u64;
    for _ in 0..n_draws {
        // sum of `order` unit-mean exponential gains, one per antenna pair
        let gain: f64 = (0..order).map(|_| standard_complex(rng).norm_sqr()).sum();
        let gamma_b = gamma_b_bar * gain / m;
        if gamma_b <= gamma_th {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_draws as f64)
}

/// Search configuration for the empirical threshold estimator: bisection on
/// AWGN-channel Eb/N0 for the waterfall point where the post-iteration BER
/// falls below `target_ber`.
#[derive(Clone, Debug)]
pub struct ThresholdSearch {
    pub constituent: CodeSpec,
    pub frame_len: usize,
    pub iterations: usize,
    pub interleaver_seed: u64,
    pub target_ber: f64,
    pub window_db: (f64, f64),
    pub tol_db: f64,
    pub frames_per_probe: u64,
    pub master_seed: u64,
}

impl ThresholdSearch {
    pub fn new(constituent: CodeSpec, frame_len: usize) -> Self {
        Self {
            constituent,
            frame_len,
            iterations: 7,
            interleaver_seed: 1,
            target_ber: 1e-3,
            window_db: (0.0, 2.0),
            tol_db: 0.05,
            frames_per_probe: 150,
            master_seed: 1,
        }
    }
}

/// One BER probe of the search.
#[derive(Clone, Copy, Debug)]
pub struct ProbePoint {
    pub ebno_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

/// Estimator result: the threshold, the bisection tolerance, and every
/// Monte Carlo probe taken along the way.
#[derive(Clone, Debug)]
pub struct ThresholdEstimate {
    pub threshold: ThresholdSpec,
    pub tol_db: f64,
    pub frames_per_probe: u64,
    pub target_ber: f64,
    pub probes: Vec<ProbePoint>,
}

/// Turbo BER on the AWGN channel (unit gain, no fading) at one Eb/N0.
/// Stops early once the budgeted bit-error target can no longer be met.
fn awgn_ber_probe(
    codec: &mut TurboCodec,
    ebno_db: f64,
    frames: u64,
    target_ber: f64,
    master_seed: u64,
    probe_id: u32,
) -> Result<ProbePoint> {
    let frame_len = codec.cfg().frame_len();
    let memory = codec.cfg().memory();
    let snr = LinkBudget::new(ebno_db, 0.5, 1.0).snr();
    let h = Complex64::new(1.0, 0.0);
    let sigma = (1.0 / (2.0 * snr)).sqrt();
    let budget_errors = (target_ber * (frames * frame_len as u64) as f64).ceil() as u64;

    let mut bit_errors = 0u64;
    let mut frames_run = 0u64;
    for frame_idx in 0..frames {
        let mut msg_rng = frame_rng(master_seed, probe_id, frame_idx, Lane::Message);
        let mut noise_rng = frame_rng(master_seed, probe_id, frame_idx, Lane::Noise);
        let msg: Vec<Bit> = (0..frame_len)
            .map(|_| msg_rng.random_range(0..2) as Bit)
            .collect();
        let codeword = codec.encode(&msg);
        let symbols = map_bit_pairs(&codeword);
        let received: Vec<Complex64> = symbols
            .iter()
            .map(|&x| x + standard_complex(&mut noise_rng) * (sigma * std::f64::consts::SQRT_2))
            .collect();
        let llrs = demap_siso_stream(&received, h, snr);
        let frame = LlrFrame::from_codeword_llrs(&llrs, frame_len, memory)?;
        let out = codec.decode(&frame)?;
        bit_errors += out
            .decisions
            .iter()
            .zip(&msg)
            .filter(|(&d, &b)| d != b)
            .count() as u64;
        frames_run += 1;
        if bit_errors > budget_errors {
            break; // already above target no matter what follows
        }
    }
    // When stopped early the probe is summarized over the full budget; the
    // early stop only fires when the verdict is already decided.
    let denom = (frames * frame_len as u64) as f64;
    Ok(ProbePoint {
        ebno_db,
        frames: frames_run,
        bit_errors,
        ber: bit_errors as f64 / denom,
    })
}

/// Bisects the AWGN waterfall of a turbo code. The window must bracket it:
/// BER above target at the low edge, below target at the high edge.
pub fn estimate_threshold(search: &ThresholdSearch) -> Result<ThresholdEstimate> {
    if search.window_db.0 >= search.window_db.1 {
        return Err(Error::Config("search window must be increasing".into()));
    }
    if search.target_ber <= 0.0 || search.tol_db <= 0.0 {
        return Err(Error::Config(
            "target BER and tolerance must be positive".into(),
        ));
    }
    let cfg = TurboConfig::new(
        search.constituent,
        Interleaver::random(search.frame_len, search.interleaver_seed),
        search.iterations,
    )?;
    let mut codec = TurboCodec::new(cfg);
    let mut probes = Vec::new();
    let mut probe_id = 0u32;
    let mut probe = |ebno_db: f64, probes: &mut Vec<ProbePoint>, codec: &mut TurboCodec| {
        let p = awgn_ber_probe(
            codec,
            ebno_db,
            search.frames_per_probe,
            search.target_ber,
            search.master_seed,
            probe_id,
        )?;
        probe_id += 1;
        probes.push(p);
        Ok::<f64, Error>(p.ber)
    };

    let (mut lo, mut hi) = search.window_db;
    let ber_lo = probe(lo, &mut probes, &mut codec)?;
    let ber_hi = probe(hi, &mut probes, &mut codec)?;
    if ber_lo <= search.target_ber || ber_hi > search.target_ber {
        return Err(Error::SearchFailure(format!(
            "window [{lo}, {hi}] dB does not bracket the waterfall: \
             BER({lo} dB) = {ber_lo:.3e}, BER({hi} dB) = {ber_hi:.3e}, target {:.3e}",
            search.target_ber
        )));
    }
    while hi - lo > search.tol_db {
        let mid = 0.5 * (lo + hi);
        let ber_mid = probe(mid, &mut probes, &mut codec)?;
        if ber_mid > search.target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdEstimate {
        threshold: ThresholdSpec::new(0.5 * (lo + hi), Provenance::Estimated)?,
        tol_db: search.tol_db,
        frames_per_probe: search.frames_per_probe,
        target_ber: search.target_ber,
        probes,
    })
}
