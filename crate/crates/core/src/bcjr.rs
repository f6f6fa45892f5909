//! Exact log-MAP (BCJR) soft-in/soft-out decoding of one RSC constituent.
//!
//! All LLRs use natural log with positive values favoring bit 1. The
//! combining kernel is the exact `max*` form `max(a,b) + ln(1 + e^{-|a-b|})`,
//! not the max-log approximation. Input LLR magnitudes are clamped at
//! [`crate::LLR_CLAMP`] before entering the metric recursions.

use crate::trellis::Trellis;
use crate::{clamp_llr, Error, Result};

/// Exact `max*`; treats `-inf` as an absent path.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Channel and a-priori observations for one constituent code.
///
/// `systematic` and `parity` cover the message section followed by
/// `tail_len` tail positions; `apriori` covers the message section only
/// (tail steps carry no a-priori by construction). Punctured parity
/// positions carry exact-zero LLRs.
#[derive(Clone, Copy, Debug)]
pub struct SisoInput<'a> {
    pub systematic: &'a [f64],
    pub parity: &'a [f64],
    pub apriori: &'a [f64],
    pub tail_len: usize,
}

/// Per-message-bit soft outputs of one SISO pass.
#[derive(Clone, Debug, Default)]
pub struct SisoOutput {
    /// A-posteriori LLR minus a-priori minus channel systematic, computed
    /// from parity-only branch completion.
    pub extrinsic: Vec<f64>,
    /// Full a-posteriori LLR of each message bit.
    pub aposteriori: Vec<f64>,
}

/// Reusable workspace for log-MAP passes over one trellis; one instance per
/// worker (the trellis itself is shared and immutable).
#[derive(Clone, Debug)]
pub struct SisoDecoder {
    trellis: Trellis,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_next: Vec<f64>,
}

impl SisoDecoder {
    pub fn new(trellis: Trellis) -> Self {
        Self {
            trellis,
            beta: Vec::new(),
            alpha: Vec::new(),
            alpha_next: Vec::new(),
        }
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Runs one full forward/backward pass, appending nothing: `out` is
    /// cleared and refilled with one extrinsic and one a-posteriori value
    /// per message bit.
    pub fn decode(&mut self, input: &SisoInput, out: &mut SisoOutput) -> Result<()> {
        let n_steps = input.systematic.len();
        let msg_len = input
            .apriori
            .len()
            .min(n_steps.saturating_sub(input.tail_len));
        if input.parity.len() != n_steps
            || input.apriori.len() != n_steps - input.tail_len
            || n_steps == 0
        {
            return Err(Error::Usage(format!(
                "inconsistent SISO input lengths: systematic {}, parity {}, apriori {}, tail {}",
                input.systematic.len(),
                input.parity.len(),
                input.apriori.len(),
                input.tail_len
            )));
        }
        for (name, seq) in [
            ("systematic", input.systematic),
            ("parity", input.parity),
            ("apriori", input.apriori),
        ] {
            if seq.iter().any(|x| !x.is_finite()) {
                return Err(Error::NumericalInput(format!(
                    "non-finite {name} LLR passed to the SISO decoder"
                )));
            }
        }

        let num_states = self.trellis.num_states();
        let terminated = input.tail_len > 0;

        // Half-metric pairs per step: a couples to the input/systematic bit,
        // b to the parity bit.
        let half_metrics = |k: usize| -> (f64, f64) {
            let apriori = if k < msg_len {
                clamp_llr(input.apriori[k])
            } else {
                0.0
            };
            let a = (apriori + clamp_llr(input.systematic[k])) / 2.0;
            let b = clamp_llr(input.parity[k]) / 2.0;
            (a, b)
        };

        // Backward pass: beta[k*num_states + s] for k in 0..=n_steps.
        self.beta.clear();
        self.beta.resize((n_steps + 1) * num_states, f64::NEG_INFINITY);
        if terminated {
            self.beta[n_steps * num_states] = 0.0;
        } else {
            self.beta[n_steps * num_states..].fill(0.0);
        }
        for k in (0..n_steps).rev() {
            let (a, b) = half_metrics(k);
            let (head, tail) = self.beta.split_at_mut((k + 1) * num_states);
            let row = &mut head[k * num_states..];
            let next_row = &tail[..num_states];
            for (s, value) in row.iter_mut().enumerate() {
                let mut acc = f64::NEG_INFINITY;
                for input_bit in 0..2u8 {
                    let br = self.trellis.branch(s, input_bit);
                    let gamma = if input_bit == 1 { a } else { -a }
                        + if br.parity == 1 { b } else { -b };
                    acc = max_star(acc, gamma + next_row[br.next as usize]);
                }
                *value = acc;
            }
            // Recentre on state 0 to keep magnitudes bounded.
            let pivot = row[0];
            if pivot.is_finite() {
                row.iter_mut().for_each(|x| *x -= pivot);
            }
        }

        // Forward pass with on-the-fly completion.
        self.alpha.clear();
        self.alpha.resize(num_states, f64::NEG_INFINITY);
        self.alpha[0] = 0.0;
        self.alpha_next.clear();
        self.alpha_next.resize(num_states, f64::NEG_INFINITY);

        out.extrinsic.clear();
        out.aposteriori.clear();
        out.extrinsic.reserve(msg_len);
        out.aposteriori.reserve(msg_len);

        for k in 0..n_steps {
            let (a, b) = half_metrics(k);
            let beta_next = &self.beta[(k + 1) * num_states..(k + 2) * num_states];
            self.alpha_next.fill(f64::NEG_INFINITY);
            let mut ext = [f64::NEG_INFINITY; 2];
            let mut app = [f64::NEG_INFINITY; 2];
            for s in 0..num_states {
                let alpha_s = self.alpha[s];
                if alpha_s == f64::NEG_INFINITY {
                    continue;
                }
                for input_bit in 0..2usize {
                    let br = self.trellis.branch(s, input_bit as u8);
                    let parity_part = if br.parity == 1 { b } else { -b };
                    let input_part = if input_bit == 1 { a } else { -a };
                    let next = br.next as usize;
                    self.alpha_next[next] = max_star(
                        self.alpha_next[next],
                        alpha_s + input_part + parity_part,
                    );
                    if k < msg_len {
                        let trunk = alpha_s + beta_next[next] + parity_part;
                        ext[input_bit] = max_star(ext[input_bit], trunk);
                        app[input_bit] = max_star(app[input_bit], trunk + input_part);
                    }
                }
            }
            if k < msg_len {
                out.extrinsic.push(ext[1] - ext[0]);
                out.aposteriori.push(app[1] - app[0]);
            }
            std::mem::swap(&mut self.alpha, &mut self.alpha_next);
            let pivot = self.alpha[0];
            if pivot.is_finite() {
                self.alpha.iter_mut().for_each(|x| *x -= pivot);
            }
        }
        Ok(())
    }
}

/// One-shot wrapper over [`SisoDecoder::decode`].
pub fn bcjr_siso_decode(
    trellis: &Trellis,
    systematic_llrs: &[f64],
    parity_llrs: &[f64],
    apriori_llrs: &[f64],
    tail_len: usize,
) -> Result<SisoOutput> {
    let mut decoder = SisoDecoder::new(trellis.clone());
    let mut out = SisoOutput::default();
    decoder.decode(
        &SisoInput {
            systematic: systematic_llrs,
            parity: parity_llrs,
            apriori: apriori_llrs,
            tail_len,
        },
        &mut out,
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::{build_trellis, rsc_encode, CodeSpec};
    use crate::Bit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn lse(values: &[f64]) -> f64 {
        let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }

    /// Exhaustive bitwise-MAP posterior over all 2^L terminated messages.
    fn exhaustive_posteriors(
        trellis: &crate::trellis::Trellis,
        sys: &[f64],
        par: &[f64],
        apriori: &[f64],
    ) -> Vec<f64> {
        let msg_len = apriori.len();
        let mut num = vec![Vec::new(); msg_len];
        let mut den = vec![Vec::new(); msg_len];
        for m in 0..(1u32 << msg_len) {
            let msg: Vec<Bit> = (0..msg_len).map(|k| (m >> k & 1) as Bit).collect();
            let cw = rsc_encode(trellis, &msg, true);
            let mut loglik = 0.0;
            for (k, (&s, &p)) in cw.systematic.iter().zip(&cw.parity).enumerate() {
                loglik += if s == 1 { sys[k] } else { -sys[k] } / 2.0;
                loglik += if p == 1 { par[k] } else { -par[k] } / 2.0;
            }
            for (k, &bit) in msg.iter().enumerate() {
                loglik += if bit == 1 { apriori[k] } else { -apriori[k] } / 2.0;
            }
            for (k, &bit) in msg.iter().enumerate() {
                if bit == 1 {
                    num[k].push(loglik);
                } else {
                    den[k].push(loglik);
                }
            }
        }
        (0..msg_len).map(|k| lse(&num[k]) - lse(&den[k])).collect()
    }

    fn random_frame(
        trellis: &crate::trellis::Trellis,
        len: usize,
        noise: f64,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<Bit>, Vec<f64>, Vec<f64>) {
        let msg: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
        let cw = rsc_encode(trellis, &msg, true);
        let llr = |bit: Bit, rng: &mut ChaCha8Rng| {
            let centre = if bit == 1 { 2.0 } else { -2.0 };
            centre + noise * (rng.random::<f64>() - 0.5) * 4.0
        };
        let sys: Vec<f64> = cw.systematic.iter().map(|&b| llr(b, rng)).collect();
        let par: Vec<f64> = cw.parity.iter().map(|&b| llr(b, rng)).collect();
        (msg, sys, par)
    }

    #[test]
    fn noiseless_limit_recovers_the_message() {
        let trellis = build_trellis(&CodeSpec::new(0o5, 0o7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg: Vec<Bit> = (0..32).map(|_| rng.random_range(0..2) as Bit).collect();
        let cw = rsc_encode(&trellis, &msg, true);
        let big = 50.0;
        let sys: Vec<f64> = cw.systematic.iter().map(|&b| big * (2.0 * b as f64 - 1.0)).collect();
        let par: Vec<f64> = cw.parity.iter().map(|&b| big * (2.0 * b as f64 - 1.0)).collect();
        let apriori = vec![0.0; msg.len()];
        let out = bcjr_siso_decode(&trellis, &sys, &par, &apriori, trellis.memory()).unwrap();
        for (k, &bit) in msg.iter().enumerate() {
            assert_eq!(out.extrinsic[k] > 0.0, bit == 1, "bit {k}");
            assert_eq!(out.aposteriori[k] > 0.0, bit == 1, "bit {k}");
        }
    }

    #[test]
    fn matches_exhaustive_map_oracle_on_l8_frames() {
        let trellis = build_trellis(&CodeSpec::new(0o5, 0o7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..20 {
            let (_, sys, par) = random_frame(&trellis, 8, 1.5, &mut rng);
            let apriori: Vec<f64> = (0..8).map(|_| 2.0 * (rng.random::<f64>() - 0.5)).collect();
            let out = bcjr_siso_decode(&trellis, &sys, &par, &apriori, 2).unwrap();
            let oracle = exhaustive_posteriors(&trellis, &sys, &par, &apriori);
            for k in 0..8 {
                assert!(
                    rel_close(out.aposteriori[k], oracle[k], 1e-9),
                    "trial {trial} bit {k}: {} vs oracle {}",
                    out.aposteriori[k],
                    oracle[k]
                );
            }
        }
    }

    #[test]
    fn llr_decomposition_holds_exactly() {
        // a-posteriori = a-priori + channel systematic + extrinsic.
        let trellis = build_trellis(&CodeSpec::new(0o21, 0o37).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (_, sys, par) = random_frame(&trellis, 24, 2.0, &mut rng);
            let apriori: Vec<f64> = (0..24).map(|_| 6.0 * (rng.random::<f64>() - 0.5)).collect();
            let out = bcjr_siso_decode(&trellis, &sys, &par, &apriori, 4).unwrap();
            for k in 0..24 {
                let reconstructed = apriori[k] + sys[k] + out.extrinsic[k];
                assert!(
                    rel_close(out.aposteriori[k], reconstructed, 1e-9),
                    "bit {k}: {} vs {}",
                    out.aposteriori[k],
                    reconstructed
                );
            }
        }
    }

    /// Channel symmetry of a linear code: flipping input LLR signs on the
    /// support of a valid codeword negates the outputs exactly at message
    /// positions where that codeword's message bit is 1.
    #[test]
    fn codeword_indexed_sign_symmetry() {
        let trellis = build_trellis(&CodeSpec::new(0o5, 0o7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let len = 12;
            let (_, sys, par) = random_frame(&trellis, len, 2.5, &mut rng);
            let apriori: Vec<f64> = (0..len).map(|_| 3.0 * (rng.random::<f64>() - 0.5)).collect();
            let flips: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
            let flip_cw = rsc_encode(&trellis, &flips, true);
            let sign = |bit: Bit| if bit == 1 { -1.0 } else { 1.0 };
            let sys_f: Vec<f64> = sys
                .iter()
                .zip(&flip_cw.systematic)
                .map(|(&x, &b)| x * sign(b))
                .collect();
            let par_f: Vec<f64> = par
                .iter()
                .zip(&flip_cw.parity)
                .map(|(&x, &b)| x * sign(b))
                .collect();
            let apriori_f: Vec<f64> = apriori
                .iter()
                .zip(&flips)
                .map(|(&x, &b)| x * sign(b))
                .collect();
            let base = bcjr_siso_decode(&trellis, &sys, &par, &apriori, 2).unwrap();
            let flipped = bcjr_siso_decode(&trellis, &sys_f, &par_f, &apriori_f, 2).unwrap();
            for k in 0..len {
                assert!(
                    rel_close(flipped.aposteriori[k], sign(flips[k]) * base.aposteriori[k], 1e-9),
                    "bit {k}"
                );
                assert!(
                    rel_close(flipped.extrinsic[k], sign(flips[k]) * base.extrinsic[k], 1e-9),
                    "bit {k}"
                );
            }
        }
    }

    #[test]
    fn all_zero_llrs_give_all_zero_outputs() {
        let trellis = build_trellis(&CodeSpec::new(0o5, 0o7).unwrap());
        let out = bcjr_siso_decode(&trellis, &[0.0; 10], &[0.0; 10], &[0.0; 8], 2).unwrap();
        assert!(out.extrinsic.iter().all(|&x| x.abs() < 1e-12));
        assert!(out.aposteriori.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let trellis = build_trellis(&CodeSpec::new(0o5, 0o7).unwrap());
        let mut sys = vec![0.0; 10];
        sys[3] = f64::NAN;
        let err = bcjr_siso_decode(&trellis, &sys, &[0.0; 10], &[0.0; 8], 2).unwrap_err();
        assert!(matches!(err, crate::Error::NumericalInput(_)));
        let mut par = vec![0.0; 10];
        par[0] = f64::INFINITY;
        let err = bcjr_siso_decode(&trellis, &[0.0; 10], &par, &[0.0; 8], 2).unwrap_err();
        assert!(matches!(err, crate::Error::NumericalInput(_)));
    }

    #[test]
    fn max_star_matches_direct_evaluation() {
        for (a, b) in [(0.0, 0.0), (1.0, -1.0), (-3.5, 2.25), (10.0, 10.0)] {
            let direct = (f64::exp(a) + f64::exp(b)).ln();
            assert!((max_star(a, b) - direct).abs() < 1e-12);
        }
        assert_eq!(max_star(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(max_star(1.5, f64::NEG_INFINITY), 1.5);
        assert_eq!(max_star(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
}
