//! Orthogonal space-time block codes G2/G3/G4 and their soft demappers.
//!
//! `stbc_encode` lays K' modulation symbols onto a (K time slots x N_T
//! antennas) block following the orthogonal designs for two, three and four
//! transmit antennas; `None` passes single symbols through unchanged.
//!
//! Two demapper routes are provided and cross-checked against each other:
//!
//! * [`demap_generic`] — exact bitwise marginalization of the block
//!   likelihood over all `4^{K'}` QPSK candidates (log-sum-exp stabilized).
//!   It serves as the production demapper for G3/G4, where the orthogonal
//!   combining collapses less conveniently, and as the oracle for the
//!   closed forms.
//! * [`demap_g2`] — closed-form combining for the two-antenna design:
//!   `y1 = sum_nr conj(h_{1,nr}) r_nr(1) + h_{2,nr} conj(r_nr(2))` (and the
//!   x2 analogue with the swapped/negated pattern), each split into real and
//!   imaginary parts per bit and scaled to the exact LLR.
//!
//! Scale factors: symbols enter the generator matrices at unit power and the
//! noise carries the N_T/SNR variance convention, so the matched per-bit
//! LLR scale is `4 * (1/sqrt(2)) * snr / N_T`, i.e. `2*sqrt(2)*snr` for one
//! antenna and `sqrt(2)*snr` for G2.

use num_complex::Complex64;

use crate::mat::CxMat;
use crate::modem::map_bits;
use crate::{Bit, Error, Result};

/// Orthogonal design selector with its `(N_T, K, K', rate)` signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StbcScheme {
    None,
    G2,
    G3,
    G4,
}

impl StbcScheme {
    pub fn n_t(&self) -> usize {
        match self {
            Self::None => 1,
            Self::G2 => 2,
            Self::G3 => 3,
            Self::G4 => 4,
        }
    }

    /// Time slots K spanned by one block.
    pub fn time_slots(&self) -> usize {
        match self {
            Self::None => 1,
            Self::G2 => 2,
            Self::G3 | Self::G4 => 8,
        }
    }

    /// Input symbols K' consumed by one block.
    pub fn input_symbols(&self) -> usize {
        match self {
            Self::None => 1,
            Self::G2 => 2,
            Self::G3 | Self::G4 => 4,
        }
    }

    /// Space-time rate K'/K.
    pub fn rate(&self) -> f64 {
        self.input_symbols() as f64 / self.time_slots() as f64
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::G2 => "g2",
            Self::G3 => "g3",
            Self::G4 => "g4",
        }
    }
}

/// One transmitted block: K rows (time slots) x N_T columns (antennas).
#[derive(Clone, Debug, PartialEq)]
pub struct TxBlock(pub CxMat);

impl TxBlock {
    pub fn as_mat(&self) -> &CxMat {
        &self.0
    }
}

/// Evaluates the generator matrix of `scheme` at `symbols`.
pub fn stbc_encode(scheme: StbcScheme, symbols: &[Complex64]) -> Result<TxBlock> {
    if symbols.len() != scheme.input_symbols() {
        return Err(Error::Usage(format!(
            "{} expects {} input symbols, got {}",
            scheme.label(),
            scheme.input_symbols(),
            symbols.len()
        )));
    }
    let mat = match scheme {
        StbcScheme::None => CxMat::from_rows(&[vec![symbols[0]]]),
        StbcScheme::G2 => {
            let (x1, x2) = (symbols[0], symbols[1]);
            CxMat::from_rows(&[vec![x1, x2], vec![-x2.conj(), x1.conj()]])
        }
        StbcScheme::G3 => {
            let (x1, x2, x3, x4) = (symbols[0], symbols[1], symbols[2], symbols[3]);
            CxMat::from_rows(&[
                vec![x1, x2, x3],
                vec![-x2, x1, -x4],
                vec![-x3, x4, x1],
                vec![-x4, -x3, x2],
                vec![x1.conj(), x2.conj(), x3.conj()],
                vec![-x2.conj(), x1.conj(), -x4.conj()],
                vec![-x3.conj(), x4.conj(), x1.conj()],
                vec![-x4.conj(), -x3.conj(), x2.conj()],
            ])
        }
        StbcScheme::G4 => {
            let (x1, x2, x3, x4) = (symbols[0], symbols[1], symbols[2], symbols[3]);
            CxMat::from_rows(&[
                vec![x1, x2, x3, x4],
                vec![-x2, x1, -x4, x3],
                vec![-x3, x4, x1, -x2],
                vec![-x4, -x3, x2, x1],
                vec![x1.conj(), x2.conj(), x3.conj(), x4.conj()],
                vec![-x2.conj(), x1.conj(), -x4.conj(), x3.conj()],
                vec![-x3.conj(), x4.conj(), x1.conj(), -x2.conj()],
                vec![-x4.conj(), -x3.conj(), x2.conj(), x1.conj()],
            ])
        }
    };
    Ok(TxBlock(mat))
}

/// Closed-form G2 soft demapper. `r` is the (N_R x 2) receive block, `h`
/// the (N_R x 2) channel; returns the four LLRs
/// `[b1(x1), b2(x1), b1(x2), b2(x2)]`. An all-zero channel yields zero
/// LLRs (erasure).
pub fn demap_g2(r: &CxMat, h: &CxMat, snr: f64) -> Result<[f64; 4]> {
    if h.cols() != 2 || r.cols() != 2 || r.rows() != h.rows() || h.rows() == 0 {
        return Err(Error::Usage(format!(
            "G2 demapper dimensions: r is {}x{}, h is {}x{}",
            r.rows(),
            r.cols(),
            h.rows(),
            h.cols()
        )));
    }
    debug_assert!(snr > 0.0);
    let mut y1 = Complex64::ZERO;
    let mut y2 = Complex64::ZERO;
    for nr in 0..h.rows() {
        y1 += h[(nr, 0)].conj() * r[(nr, 0)] + h[(nr, 1)] * r[(nr, 1)].conj();
        y2 += h[(nr, 1)].conj() * r[(nr, 0)] - h[(nr, 0)] * r[(nr, 1)].conj();
    }
    let scale = std::f64::consts::SQRT_2 * snr;
    Ok([
        scale * y1.re,
        scale * y1.im,
        scale * y2.re,
        scale * y2.im,
    ])
}

/// Exact-marginalization demapper with per-frame candidate caching: the
/// noiseless receive matrix `h * B(s)^T` of every QPSK candidate tuple is
/// precomputed once per channel realization.
#[derive(Clone, Debug)]
pub struct GenericDemapper {
    scheme: StbcScheme,
    snr_over_nt: f64,
    n_r: usize,
    candidates: Vec<CxMat>,
    num_bits: usize,
}

impl GenericDemapper {
    pub fn new(scheme: StbcScheme, h: &CxMat, snr: f64) -> Result<Self> {
        if h.cols() != scheme.n_t() || h.rows() == 0 {
            return Err(Error::Usage(format!(
                "channel is {}x{} but {} uses {} transmit antennas",
                h.rows(),
                h.cols(),
                scheme.label(),
                scheme.n_t()
            )));
        }
        if !(snr > 0.0) {
            return Err(Error::Usage("snr must be positive".into()));
        }
        let num_bits = 2 * scheme.input_symbols();
        let candidates = (0..1usize << num_bits)
            .map(|word| {
                let symbols = symbols_of_word(scheme, word);
                let block = stbc_encode(scheme, &symbols).expect("candidate arity is fixed");
                h.mul_transpose(block.as_mat())
            })
            .collect();
        Ok(Self {
            scheme,
            snr_over_nt: snr / scheme.n_t() as f64,
            n_r: h.rows(),
            candidates,
            num_bits,
        })
    }

    /// Per-bit LLRs `[b1(x1), b2(x1), b1(x2), ...]` for one receive block
    /// (N_R x K), by log-sum-exp marginalization over the candidate set.
    pub fn demap(&self, r: &CxMat) -> Result<Vec<f64>> {
        if r.rows() != self.n_r || r.cols() != self.scheme.time_slots() {
            return Err(Error::Usage(format!(
                "receive block is {}x{}, expected {}x{}",
                r.rows(),
                r.cols(),
                self.n_r,
                self.scheme.time_slots()
            )));
        }
        let mut plus = vec![f64::NEG_INFINITY; self.num_bits];
        let mut minus = vec![f64::NEG_INFINITY; self.num_bits];
        let mut logliks = Vec::with_capacity(self.candidates.len());
        let mut max_ll = f64::NEG_INFINITY;
        for cand in &self.candidates {
            let mut dist = 0.0;
            for (a, b) in r.data().iter().zip(cand.data()) {
                dist += (a - b).norm_sqr();
            }
            let ll = -dist * self.snr_over_nt;
            max_ll = max_ll.max(ll);
            logliks.push(ll);
        }
        // Stable two-pass log-sum-exp accumulation per bit.
        let mut plus_sum = vec![0.0f64; self.num_bits];
        let mut minus_sum = vec![0.0f64; self.num_bits];
        for (word, ll) in logliks.iter().enumerate() {
            let e = (ll - max_ll).exp();
            for bit in 0..self.num_bits {
                if word >> bit & 1 == 1 {
                    plus_sum[bit] += e;
                } else {
                    minus_sum[bit] += e;
                }
            }
        }
        for bit in 0..self.num_bits {
            plus[bit] = max_ll + plus_sum[bit].ln();
            minus[bit] = max_ll + minus_sum[bit].ln();
        }
        Ok((0..self.num_bits).map(|b| plus[b] - minus[b]).collect())
    }
}

/// One-shot exact marginalization; see [`GenericDemapper`].
pub fn demap_generic(scheme: StbcScheme, r: &CxMat, h: &CxMat, snr: f64) -> Result<Vec<f64>> {
    GenericDemapper::new(scheme, h, snr)?.demap(r)
}

/// Candidate symbol tuple for a bit word; bit `2k'+m` is bit `m+1` of
/// symbol `k'`, matching the stream order the modem produces.
fn symbols_of_word(scheme: StbcScheme, word: usize) -> Vec<Complex64> {
    (0..scheme.input_symbols())
        .map(|k| {
            map_bits(
                (word >> (2 * k) & 1) as Bit,
                (word >> (2 * k + 1) & 1) as Bit,
            )
        })
        .collect()
}
