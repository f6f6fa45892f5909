//! Soft-input Viterbi (ML sequence) decoding of the stand-alone rate-1/2
//! RSC code, with full-frame traceback on the terminated trellis.
//!
//! Codeword layout: `[ systematic(L) | parity(L) | tail(2m) ]` with the tail
//! holding `m` systematic/parity pairs, matching the shared frame
//! conventions. The path metric is the LLR correlation
//! `sum_i llr_i * (2 c_i - 1)`, so decisions are invariant to positive
//! scaling of the input. On equal path metrics the lower-numbered
//! predecessor state survives, which resolves the all-zero-input case to
//! the all-zero message.

use crate::trellis::{build_trellis, rsc_encode, CodeSpec, Trellis};
use crate::{Bit, Error, Result};

/// Configuration of the stand-alone convolutional code. The default is the
/// 256-state code whose Viterbi decoding cost matches the 4-state turbo
/// code at 7 log-MAP iterations.
#[derive(Clone, Copy, Debug)]
pub struct ViterbiConfig {
    pub spec: CodeSpec,
}

impl ViterbiConfig {
    pub fn new(spec: CodeSpec) -> Self {
        Self { spec }
    }
}

impl Default for ViterbiConfig {
    fn default() -> Self {
        Self {
            spec: CodeSpec::new(0o753, 0o561).expect("valid built-in polynomials"),
        }
    }
}

/// Decoder instance holding the built trellis and survivor storage; one per
/// worker.
#[derive(Clone, Debug)]
pub struct ViterbiCodec {
    trellis: Trellis,
    metrics: Vec<f64>,
    metrics_next: Vec<f64>,
    survivors: Vec<u8>,
}

impl ViterbiCodec {
    pub fn new(cfg: ViterbiConfig) -> Self {
        Self {
            trellis: build_trellis(&cfg.spec),
            metrics: Vec::new(),
            metrics_next: Vec::new(),
            survivors: Vec::new(),
        }
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Terminated encoding into the `[sys | parity | tail]` layout.
    pub fn encode(&self, message: &[Bit]) -> Vec<Bit> {
        let cw = rsc_encode(&self.trellis, message, true);
        let frame_len = message.len();
        let memory = self.trellis.memory();
        let mut out = Vec::with_capacity(2 * (frame_len + memory));
        out.extend_from_slice(&cw.systematic[..frame_len]);
        out.extend_from_slice(&cw.parity[..frame_len]);
        for t in 0..memory {
            out.push(cw.systematic[frame_len + t]);
            out.push(cw.parity[frame_len + t]);
        }
        out
    }

    /// ML sequence decision over the terminated trellis.
    pub fn decode(&mut self, llrs: &[f64]) -> Result<Vec<Bit>> {
        let memory = self.trellis.memory();
        if llrs.len() % 2 != 0 || llrs.len() / 2 <= memory {
            return Err(Error::Usage(format!(
                "LLR length {} does not fit the [sys|parity|tail] layout of a terminated frame",
                llrs.len()
            )));
        }
        debug_assert!(llrs.iter().all(|x| x.is_finite()));
        let n_steps = llrs.len() / 2;
        let frame_len = n_steps - memory;
        let num_states = self.trellis.num_states();

        // Per-step (systematic, parity) LLR pair in trellis order.
        let step_llrs = |t: usize| -> (f64, f64) {
            if t < frame_len {
                (llrs[t], llrs[frame_len + t])
            } else {
                let base = 2 * frame_len + 2 * (t - frame_len);
                (llrs[base], llrs[base + 1])
            }
        };

        self.metrics.clear();
        self.metrics.resize(num_states, f64::NEG_INFINITY);
        self.metrics[0] = 0.0;
        self.metrics_next.clear();
        self.metrics_next.resize(num_states, 0.0);
        self.survivors.clear();
        self.survivors.resize(n_steps * num_states, 0);

        for t in 0..n_steps {
            let (lam_s, lam_p) = step_llrs(t);
            let survivors = &mut self.survivors[t * num_states..(t + 1) * num_states];
            for (state, slot) in survivors.iter_mut().enumerate() {
                let edges = self.trellis.incoming(state);
                let mut best = f64::NEG_INFINITY;
                let mut pick = 0u8;
                for (idx, edge) in edges.iter().enumerate() {
                    let branch = self.trellis.branch(edge.prev as usize, edge.input);
                    debug_assert_eq!(branch.next as usize, state);
                    let gain = if branch.systematic == 1 { lam_s } else { -lam_s }
                        + if branch.parity == 1 { lam_p } else { -lam_p };
                    let cand = self.metrics[edge.prev as usize] + gain;
                    // Strict comparison keeps the lower-indexed (smaller
                    // predecessor) edge on ties.
                    if cand > best {
                        best = cand;
                        pick = idx as u8;
                    }
                }
                self.metrics_next[state] = best;
                *slot = pick;
            }
            std::mem::swap(&mut self.metrics, &mut self.metrics_next);
        }

        // Traceback from the all-zero terminal state.
        let mut state = 0usize;
        let mut inputs = vec![0u8; n_steps];
        for t in (0..n_steps).rev() {
            let edge = self.trellis.incoming(state)[self.survivors[t * num_states + state] as usize];
            inputs[t] = edge.input;
            state = edge.prev as usize;
        }
        inputs.truncate(frame_len);
        Ok(inputs)
    }
}

/// One-shot encode; see [`ViterbiCodec::encode`].
pub fn conv_encode(cfg: &ViterbiConfig, message: &[Bit]) -> Vec<Bit> {
    ViterbiCodec::new(*cfg).encode(message)
}

/// One-shot decode; see [`ViterbiCodec::decode`].
pub fn viterbi_decode(cfg: &ViterbiConfig, llrs: &[f64]) -> Result<Vec<Bit>> {
    ViterbiCodec::new(*cfg).decode(llrs)
}
