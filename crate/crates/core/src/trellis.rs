//! Binary rate-1/2 recursive systematic convolutional codes as trellises.
//!
//! Polynomials are octal-coded with the convention that octal digits read
//! left to right map to taps from highest degree down to degree 0, so octal
//! `7` is `1 + D + D^2` and octal `5` is `1 + D^2`. Equivalently, bit `i` of
//! the parsed integer is the coefficient of `D^i`. The encoder state packs
//! the feedback shift register with the newest value in bit 0.

use crate::{Bit, Error, Result};

/// Generator polynomials of one rate-1/2 RSC code, e.g. `(1, 5/7)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    feedback: u32,
    feedforward: u32,
    constraint_length: u32,
}

impl CodeSpec {
    /// Largest supported memory order (states = `2^memory`).
    pub const MAX_MEMORY: usize = 12;

    /// Builds a spec from integer polynomials (use `0o` literals for octal).
    pub fn new(feedforward: u32, feedback: u32) -> Result<Self> {
        if feedback == 0 || feedforward == 0 {
            return Err(Error::Config(
                "generator polynomials must be nonzero".into(),
            ));
        }
        if feedback & 1 == 0 {
            return Err(Error::Config(format!(
                "feedback polynomial {feedback:#o} lacks a constant term"
            )));
        }
        let degree = |p: u32| 31 - p.leading_zeros();
        let constraint_length = 1 + degree(feedback).max(degree(feedforward));
        if constraint_length as usize > Self::MAX_MEMORY + 1 {
            return Err(Error::Config(format!(
                "constraint length {constraint_length} exceeds supported maximum {}",
                Self::MAX_MEMORY + 1
            )));
        }
        Ok(Self {
            feedback,
            feedforward,
            constraint_length,
        })
    }

    /// Parses octal text as accepted in config files and on the CLI.
    pub fn from_octal(feedforward: &str, feedback: &str) -> Result<Self> {
        let parse = |s: &str| {
            u32::from_str_radix(s.trim(), 8)
                .map_err(|e| Error::Config(format!("bad octal polynomial {s:?}: {e}")))
        };
        Self::new(parse(feedforward)?, parse(feedback)?)
    }

    pub fn feedback(&self) -> u32 {
        self.feedback
    }

    pub fn feedforward(&self) -> u32 {
        self.feedforward
    }

    /// Number of taps, `1 + memory`.
    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    /// Shift-register memory order.
    pub fn memory(&self) -> usize {
        self.constraint_length as usize - 1
    }

    /// `(feedforward, feedback)` in octal text, e.g. `"5/7"`.
    pub fn octal_label(&self) -> String {
        format!("{:o}/{:o}", self.feedforward, self.feedback)
    }
}

/// One trellis branch: taking `input` from some state emits
/// `(systematic, parity)` and moves to `next`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub next: u32,
    pub systematic: Bit,
    pub parity: Bit,
}

/// Reverse edge: state `prev` reaches the indexed state under `input`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncomingEdge {
    pub prev: u32,
    pub input: Bit,
}

/// State/transition table of one RSC code, immutable after construction and
/// freely shareable across workers.
#[derive(Clone, Debug)]
pub struct Trellis {
    spec: CodeSpec,
    num_states: usize,
    memory: usize,
    branches: Vec<[Branch; 2]>,
    incoming: Vec<[IncomingEdge; 2]>,
    termination_inputs: Vec<Vec<Bit>>,
}

/// Builds the trellis realizing `spec` as a feedback shift register.
pub fn build_trellis(spec: &CodeSpec) -> Trellis {
    let memory = spec.memory();
    let num_states = 1usize << memory;
    let mask = (num_states - 1) as u32;
    let fb_taps = spec.feedback() >> 1;
    let ff_taps = spec.feedforward() >> 1;
    let ff_const = (spec.feedforward() & 1) as u8;

    let parity_of = |x: u32| (x.count_ones() & 1) as u8;
    let step = |state: u32, input: Bit| -> Branch {
        let w = input ^ parity_of(state & fb_taps);
        let parity = (ff_const & w) ^ parity_of(state & ff_taps);
        Branch {
            next: ((state << 1) | u32::from(w)) & mask,
            systematic: input,
            parity,
        }
    };

    let branches: Vec<[Branch; 2]> = (0..num_states as u32)
        .map(|s| [step(s, 0), step(s, 1)])
        .collect();

    let mut incoming = vec![[IncomingEdge { prev: 0, input: 0 }; 2]; num_states];
    let mut seen = vec![0usize; num_states];
    for (s, pair) in branches.iter().enumerate() {
        for br in pair {
            let slot = &mut seen[br.next as usize];
            incoming[br.next as usize][*slot] = IncomingEdge {
                prev: s as u32,
                input: br.systematic,
            };
            *slot += 1;
        }
    }
    debug_assert!(seen.iter().all(|&n| n == 2));

    // Feeding the feedback value cancels the recursion and shifts zeros in,
    // so every state reaches zero in exactly `memory` steps.
    let termination_inputs: Vec<Vec<Bit>> = (0..num_states as u32)
        .map(|mut s| {
            (0..memory)
                .map(|_| {
                    let input = parity_of(s & fb_taps);
                    s = branches[s as usize][input as usize].next;
                    input
                })
                .collect()
        })
        .collect();

    Trellis {
        spec: *spec,
        num_states,
        memory,
        branches,
        incoming,
        termination_inputs,
    }
}

impl Trellis {
    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Branch taken from `state` under `input`.
    #[inline]
    pub fn branch(&self, state: usize, input: Bit) -> Branch {
        self.branches[state][input as usize]
    }

    /// The two edges entering `state`.
    #[inline]
    pub fn incoming(&self, state: usize) -> [IncomingEdge; 2] {
        self.incoming[state]
    }

    /// Input sequence of length `memory` that drives `state` to zero.
    pub fn termination_inputs(&self, state: usize) -> &[Bit] {
        &self.termination_inputs[state]
    }
}

/// Output of [`rsc_encode`]: per-stream code bits with any tail appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RscCodeword {
    /// Input bits verbatim, then `tail_len` tail inputs.
    pub systematic: Vec<Bit>,
    /// Parity bits aligned with `systematic`.
    pub parity: Vec<Bit>,
    /// Number of tail positions appended to each stream (0 or `memory`).
    pub tail_len: usize,
}

/// Encodes `message` on `trellis`, optionally flushing the register back to
/// the all-zero state.
pub fn rsc_encode(trellis: &Trellis, message: &[Bit], terminate: bool) -> RscCodeword {
    assert!(!message.is_empty(), "message must be nonempty");
    let tail_len = if terminate { trellis.memory() } else { 0 };
    let mut systematic = Vec::with_capacity(message.len() + tail_len);
    let mut parity = Vec::with_capacity(message.len() + tail_len);
    let mut state = 0usize;
    for &bit in message {
        debug_assert!(bit <= 1);
        let br = trellis.branch(state, bit);
        systematic.push(br.systematic);
        parity.push(br.parity);
        state = br.next as usize;
    }
    if terminate {
        let tail: Vec<Bit> = trellis.termination_inputs(state).to_vec();
        for input in tail {
            let br = trellis.branch(state, input);
            systematic.push(br.systematic);
            parity.push(br.parity);
            state = br.next as usize;
        }
        debug_assert_eq!(state, 0);
    }
    RscCodeword {
        systematic,
        parity,
        tail_len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Reference shift-register encoder, written against the polynomial
    /// recursion directly (no trellis tables): w_k = u_k + sum q_i w_{k-i},
    /// y_k = sum p_i w_{k-i}.
    fn reference_encode(ff: u32, fb: u32, message: &[Bit], terminate: bool) -> (Vec<Bit>, Vec<Bit>) {
        let degree = |p: u32| (31 - p.leading_zeros()) as usize;
        let memory = degree(fb).max(degree(ff));
        let mut w_hist = vec![0u8; memory]; // w_hist[i] = w_{k-1-i}
        let mut sys = Vec::new();
        let mut par = Vec::new();
        let push = |u: Bit, w_hist: &mut Vec<u8>, forced_w: Option<u8>| {
            let mut acc = u;
            for i in 1..=memory {
                if fb >> i & 1 == 1 {
                    acc ^= w_hist[i - 1];
                }
            }
            let w = forced_w.unwrap_or(acc);
            let mut y = if ff & 1 == 1 { w } else { 0 };
            for i in 1..=memory {
                if ff >> i & 1 == 1 {
                    y ^= w_hist[i - 1];
                }
            }
            w_hist.insert(0, w);
            w_hist.pop();
            (y, acc)
        };
        for &u in message {
            let (y, _) = push(u, &mut w_hist, None);
            sys.push(u);
            par.push(y);
        }
        if terminate {
            for _ in 0..memory {
                // The tail input equals the feedback value, i.e. the input
                // that makes the new register value zero.
                let mut fb_val = 0u8;
                for i in 1..=memory {
                    if fb >> i & 1 == 1 {
                        fb_val ^= w_hist[i - 1];
                    }
                }
                let (y, _) = push(fb_val, &mut w_hist, Some(0));
                sys.push(fb_val);
                par.push(y);
            }
            assert!(w_hist.iter().all(|&w| w == 0));
        }
        (sys, par)
    }

    #[test]
    fn state_counts_for_named_codes() {
        for (ff, fb, states) in [(0o5, 0o7, 4usize), (0o21, 0o37, 16), (0o753, 0o561, 256)] {
            let spec = CodeSpec::new(ff, fb).unwrap();
            let trellis = build_trellis(&spec);
            assert_eq!(trellis.num_states(), states);
            assert_eq!(trellis.memory(), states.trailing_zeros() as usize);
        }
    }

    #[test]
    fn golden_vector_5_7_impulse() {
        // Frozen from the shift-register recursion: message 1000, terminated.
        let spec = CodeSpec::new(0o5, 0o7).unwrap();
        let trellis = build_trellis(&spec);
        let cw = rsc_encode(&trellis, &[1, 0, 0, 0], true);
        assert_eq!(cw.systematic, vec![1, 0, 0, 0, 1, 1]);
        assert_eq!(cw.parity, vec![1, 1, 1, 0, 0, 1]);
        assert_eq!(cw.tail_len, 2);
    }

    #[test]
    fn matches_reference_encoder_on_random_messages() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (ff, fb) in [(0o5u32, 0o7u32), (0o21, 0o37), (0o753, 0o561)] {
            let spec = CodeSpec::new(ff, fb).unwrap();
            let trellis = build_trellis(&spec);
            for _ in 0..50 {
                let len = rng.random_range(1..40);
                let msg: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
                for terminate in [false, true] {
                    let cw = rsc_encode(&trellis, &msg, terminate);
                    let (sys, par) = reference_encode(ff, fb, &msg, terminate);
                    assert_eq!(cw.systematic, sys);
                    assert_eq!(cw.parity, par);
                }
            }
        }
    }

    #[test]
    fn all_zero_message_stays_at_zero() {
        let spec = CodeSpec::new(0o21, 0o37).unwrap();
        let trellis = build_trellis(&spec);
        let cw = rsc_encode(&trellis, &[0; 12], true);
        assert!(cw.systematic.iter().all(|&b| b == 0));
        assert!(cw.parity.iter().all(|&b| b == 0));
    }

    #[test]
    fn unterminated_length_is_message_length() {
        let spec = CodeSpec::new(0o5, 0o7).unwrap();
        let trellis = build_trellis(&spec);
        let cw = rsc_encode(&trellis, &[1, 1, 0, 1, 0], false);
        assert_eq!(cw.systematic.len(), 5);
        assert_eq!(cw.parity.len(), 5);
        assert_eq!(cw.tail_len, 0);
    }

    #[test]
    fn systematic_property_and_termination_on_random_messages() {
        let spec = CodeSpec::new(0o5, 0o7).unwrap();
        let trellis = build_trellis(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let len = rng.random_range(1..64);
            let msg: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
            let cw = rsc_encode(&trellis, &msg, true);
            assert_eq!(&cw.systematic[..len], &msg[..]);
            // Re-walk the trellis with the emitted systematic bits as inputs;
            // the final state must be zero.
            let mut state = 0usize;
            for (&s, &p) in cw.systematic.iter().zip(&cw.parity) {
                let br = trellis.branch(state, s);
                assert_eq!(br.parity, p);
                state = br.next as usize;
            }
            assert_eq!(state, 0);
        }
    }

    #[test]
    fn linearity_over_gf2_unterminated() {
        let spec = CodeSpec::new(0o21, 0o37).unwrap();
        let trellis = build_trellis(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let len = rng.random_range(1..48);
            let a: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
            let b: Vec<Bit> = (0..len).map(|_| rng.random_range(0..2) as Bit).collect();
            let ab: Vec<Bit> = a.iter().zip(&b).map(|(&x, &y)| x ^ y).collect();
            let ca = rsc_encode(&trellis, &a, false);
            let cb = rsc_encode(&trellis, &b, false);
            let cab = rsc_encode(&trellis, &ab, false);
            for k in 0..len {
                assert_eq!(cab.parity[k], ca.parity[k] ^ cb.parity[k]);
                assert_eq!(cab.systematic[k], ca.systematic[k] ^ cb.systematic[k]);
            }
        }
    }

    #[test]
    fn every_state_has_two_in_and_two_out_edges() {
        for (ff, fb) in [(0o5u32, 0o7u32), (0o21, 0o37), (0o753, 0o561)] {
            let trellis = build_trellis(&CodeSpec::new(ff, fb).unwrap());
            let mut in_count = vec![0usize; trellis.num_states()];
            for s in 0..trellis.num_states() {
                let b0 = trellis.branch(s, 0);
                let b1 = trellis.branch(s, 1);
                assert_ne!(b0.next, b1.next);
                assert_eq!(b0.systematic, 0);
                assert_eq!(b1.systematic, 1);
                in_count[b0.next as usize] += 1;
                in_count[b1.next as usize] += 1;
            }
            assert!(in_count.iter().all(|&n| n == 2));
        }
    }

    #[test]
    fn termination_inputs_reach_zero_from_every_state() {
        let trellis = build_trellis(&CodeSpec::new(0o753, 0o561).unwrap());
        for s in 0..trellis.num_states() {
            let mut state = s;
            let inputs = trellis.termination_inputs(s).to_vec();
            assert_eq!(inputs.len(), trellis.memory());
            for input in inputs {
                state = trellis.branch(state, input).next as usize;
            }
            assert_eq!(state, 0);
        }
    }

    #[test]
    fn malformed_polynomials_are_rejected() {
        assert!(matches!(CodeSpec::new(0, 0o7), Err(Error::Config(_))));
        assert!(matches!(CodeSpec::new(0o5, 0), Err(Error::Config(_))));
        // Feedback without a constant term.
        assert!(matches!(CodeSpec::new(0o5, 0o6), Err(Error::Config(_))));
        assert!(CodeSpec::from_octal("5", "7").is_ok());
        assert!(CodeSpec::from_octal("9", "7").is_err());
    }

    #[test]
    fn octal_parsing_matches_literals() {
        let a = CodeSpec::from_octal("753", "561").unwrap();
        let b = CodeSpec::new(0o753, 0o561).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.octal_label(), "753/561");
        assert_eq!(a.constraint_length(), 9);
    }
}
