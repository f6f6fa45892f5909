//! Gray-coded QPSK mapping and the single-antenna closed-form soft demapper.
//!
//! Bit-to-axis convention: the first bit of a pair drives the real axis and
//! the second the imaginary axis, with bit 1 mapping to the positive level.
//! Symbols are unit power (levels ±1/√2 per axis), so adjacent constellation
//! points differ in exactly one bit.
//!
//! The demapper LLR is the exact marginalization of the unit-power QPSK
//! likelihood under the N_T/SNR complex noise convention, which for the
//! single-antenna case collapses to
//!
//! ```text
//! llr_b1 = 2*sqrt(2) * snr * Re{ conj(h) * r }
//! llr_b2 = 2*sqrt(2) * snr * Im{ conj(h) * r }
//! ```
//!
//! `conj(h) = |h| e^{-j arg h}`, so this is the usual matched rotate-and-
//! scale combining; a zero channel gain yields zero LLRs (an erasure), not
//! an error. The a-priori input of the demapper is identically zero: there
//! is no demapper/decoder outer iteration.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::Bit;

/// Demapper scale for one receive observation at unit symbol power and
/// noise variance `1/snr`: `4 * (1/sqrt(2)) = 2*sqrt(2)` per unit snr.
pub(crate) const QPSK_LLR_SCALE: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Maps one bit pair to a unit-power Gray-coded QPSK symbol.
#[inline]
pub fn map_bits(b1: Bit, b2: Bit) -> Complex64 {
    debug_assert!(b1 <= 1 && b2 <= 1);
    Complex64::new(
        (2.0 * f64::from(b1) - 1.0) * FRAC_1_SQRT_2,
        (2.0 * f64::from(b2) - 1.0) * FRAC_1_SQRT_2,
    )
}

/// Maps an even-length bit sequence pairwise onto symbols.
pub fn map_bit_pairs(bits: &[Bit]) -> Vec<Complex64> {
    assert!(bits.len() % 2 == 0, "QPSK needs an even number of bits");
    bits.chunks_exact(2).map(|p| map_bits(p[0], p[1])).collect()
}

/// Closed-form single-antenna soft demapper; returns `(llr_b1, llr_b2)`.
#[inline]
pub fn demap_siso(r: Complex64, h: Complex64, snr: f64) -> (f64, f64) {
    debug_assert!(snr > 0.0);
    let z = h.conj() * r;
    (QPSK_LLR_SCALE * snr * z.re, QPSK_LLR_SCALE * snr * z.im)
}

/// Demaps a whole symbol stream over one scalar channel gain.
pub fn demap_siso_stream(received: &[Complex64], h: Complex64, snr: f64) -> Vec<f64> {
    let mut llrs = Vec::with_capacity(received.len() * 2);
    for &r in received {
        let (l1, l2) = demap_siso(r, h, snr);
        llrs.push(l1);
        llrs.push(l2);
    }
    llrs
}
