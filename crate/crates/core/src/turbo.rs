//! Parallel-concatenated turbo coding with alternate parity puncturing and
//! iterative exact log-MAP decoding.
//!
//! Frame layout (bit order within a codeword) is fixed:
//!
//! ```text
//! [ systematic(L) | punctured parity(L) | tail1(2m) | tail2(2m) ]
//! ```
//!
//! Punctured parity position `k` carries encoder 1's parity bit for even `k`
//! and encoder 2's for odd `k` (each indexed in its own stream order), which
//! turns the rate-1/3 mother code into rate 1/2 before tail overhead. Each
//! tail block holds the `m` systematic/parity pairs `s0 p0 s1 p1 ...` that
//! flush its own constituent encoder; both constituents are independently
//! terminated (encoder 2's tail is computed on the interleaved stream). The
//! modem consumes codewords in exactly this order.

use crate::bcjr::{SisoDecoder, SisoInput, SisoOutput};
use crate::interleaver::Interleaver;
use crate::trellis::{build_trellis, rsc_encode, CodeSpec, Trellis};
use crate::{Bit, Error, Result};

/// Configuration of one turbo code: constituent RSC, interleaver, and the
/// (fixed) number of full decoding iterations. Parity puncturing is always
/// the alternating mask described in the module docs.
#[derive(Clone, Debug)]
pub struct TurboConfig {
    pub constituent: CodeSpec,
    pub interleaver: Interleaver,
    pub iterations: usize,
}

impl TurboConfig {
    pub fn new(constituent: CodeSpec, interleaver: Interleaver, iterations: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Config("iteration count must be positive".into()));
        }
        if interleaver.is_empty() {
            return Err(Error::Config("interleaver length must be positive".into()));
        }
        Ok(Self {
            constituent,
            interleaver,
            iterations,
        })
    }

    /// Interleaver size `L` (message bits per frame).
    pub fn frame_len(&self) -> usize {
        self.interleaver.len()
    }

    pub fn memory(&self) -> usize {
        self.constituent.memory()
    }

    /// Codeword length `2L + 4m` under the dual-terminated layout.
    pub fn coded_len(&self) -> usize {
        2 * self.frame_len() + 4 * self.memory()
    }

    /// Information rate including tail overhead, `L / (2L + 4m)`.
    pub fn effective_rate(&self) -> f64 {
        self.frame_len() as f64 / self.coded_len() as f64
    }
}

/// Channel LLRs of one received turbo frame, in decoder-ready form: parity
/// streams are length `L` with exact zeros at punctured positions.
#[derive(Clone, Debug)]
pub struct LlrFrame {
    pub systematic: Vec<f64>,
    pub parity1: Vec<f64>,
    pub parity2: Vec<f64>,
    pub tail1_sys: Vec<f64>,
    pub tail1_par: Vec<f64>,
    pub tail2_sys: Vec<f64>,
    pub tail2_par: Vec<f64>,
}

impl LlrFrame {
    /// Splits a codeword-ordered LLR sequence (same order the modem emitted
    /// bits) into the decoder's view, zero-filling punctured positions.
    pub fn from_codeword_llrs(llrs: &[f64], frame_len: usize, memory: usize) -> Result<Self> {
        let expected = 2 * frame_len + 4 * memory;
        if llrs.len() != expected {
            return Err(Error::Usage(format!(
                "codeword LLR length {} does not match layout length {expected}",
                llrs.len()
            )));
        }
        if llrs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalInput(
                "non-finite LLR in received frame".into(),
            ));
        }
        let systematic = llrs[..frame_len].to_vec();
        let mut parity1 = vec![0.0; frame_len];
        let mut parity2 = vec![0.0; frame_len];
        for (k, &llr) in llrs[frame_len..2 * frame_len].iter().enumerate() {
            if k % 2 == 0 {
                parity1[k] = llr;
            } else {
                parity2[k] = llr;
            }
        }
        let mut tail = llrs[2 * frame_len..].chunks_exact(2);
        let mut tail1_sys = Vec::with_capacity(memory);
        let mut tail1_par = Vec::with_capacity(memory);
        let mut tail2_sys = Vec::with_capacity(memory);
        let mut tail2_par = Vec::with_capacity(memory);
        for _ in 0..memory {
            let pair = tail.next().expect("length checked above");
            tail1_sys.push(pair[0]);
            tail1_par.push(pair[1]);
        }
        for _ in 0..memory {
            let pair = tail.next().expect("length checked above");
            tail2_sys.push(pair[0]);
            tail2_par.push(pair[1]);
        }
        Ok(Self {
            systematic,
            parity1,
            parity2,
            tail1_sys,
            tail1_par,
            tail2_sys,
            tail2_par,
        })
    }
}

/// Per-iteration extrinsic magnitudes, one entry per full iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationDiagnostics {
    pub mean_abs_extrinsic_first: f64,
    pub mean_abs_extrinsic_second: f64,
}

/// Output of a turbo decode: hard decisions, final a-posteriori LLRs in
/// natural order, and per-iteration diagnostics.
#[derive(Clone, Debug)]
pub struct TurboDecodeOutput {
    pub decisions: Vec<Bit>,
    pub aposteriori: Vec<f64>,
    pub iterations: Vec<IterationDiagnostics>,
}

/// Encoder/decoder pair holding the built trellis and decoder scratch
/// state; create one per worker and share nothing mutable.
#[derive(Clone, Debug)]
pub struct TurboCodec {
    cfg: TurboConfig,
    siso1: SisoDecoder,
    siso2: SisoDecoder,
    out1: SisoOutput,
    out2: SisoOutput,
}

impl TurboCodec {
    pub fn new(cfg: TurboConfig) -> Self {
        let trellis = build_trellis(&cfg.constituent);
        Self {
            cfg,
            siso1: SisoDecoder::new(trellis.clone()),
            siso2: SisoDecoder::new(trellis),
            out1: SisoOutput::default(),
            out2: SisoOutput::default(),
        }
    }

    pub fn cfg(&self) -> &TurboConfig {
        &self.cfg
    }

    pub fn trellis(&self) -> &Trellis {
        self.siso1.trellis()
    }

    /// Encodes `message` (length `L`) into the fixed codeword layout.
    pub fn encode(&self, message: &[Bit]) -> Vec<Bit> {
        assert_eq!(
            message.len(),
            self.cfg.frame_len(),
            "message length must equal the interleaver size"
        );
        let trellis = self.trellis();
        let interleaved = self
            .cfg
            .interleaver
            .interleave(message)
            .expect("length checked above");
        let enc1 = rsc_encode(trellis, message, true);
        let enc2 = rsc_encode(trellis, &interleaved, true);
        let frame_len = message.len();
        let memory = trellis.memory();

        let mut codeword = Vec::with_capacity(self.cfg.coded_len());
        codeword.extend_from_slice(&enc1.systematic[..frame_len]);
        for k in 0..frame_len {
            codeword.push(if k % 2 == 0 {
                enc1.parity[k]
            } else {
                enc2.parity[k]
            });
        }
        for t in 0..memory {
            codeword.push(enc1.systematic[frame_len + t]);
            codeword.push(enc1.parity[frame_len + t]);
        }
        for t in 0..memory {
            codeword.push(enc2.systematic[frame_len + t]);
            codeword.push(enc2.parity[frame_len + t]);
        }
        codeword
    }

    /// Runs exactly `cfg.iterations` full iterations (first SISO then second
    /// SISO), exchanging extrinsics through the interleaver. Deterministic;
    /// a zero final LLR decides bit 0.
    pub fn decode(&mut self, frame: &LlrFrame) -> Result<TurboDecodeOutput> {
        let frame_len = self.cfg.frame_len();
        let memory = self.cfg.memory();
        if frame.systematic.len() != frame_len
            || frame.parity1.len() != frame_len
            || frame.parity2.len() != frame_len
            || frame.tail1_sys.len() != memory
            || frame.tail1_par.len() != memory
            || frame.tail2_sys.len() != memory
            || frame.tail2_par.len() != memory
        {
            return Err(Error::Usage(
                "LLR frame dimensions do not match the turbo configuration".into(),
            ));
        }
        let il = &self.cfg.interleaver;

        let mut sys1 = frame.systematic.clone();
        sys1.extend_from_slice(&frame.tail1_sys);
        let mut par1 = frame.parity1.clone();
        par1.extend_from_slice(&frame.tail1_par);
        let mut sys2 = il.interleave(&frame.systematic)?;
        sys2.extend_from_slice(&frame.tail2_sys);
        let mut par2 = frame.parity2.clone();
        par2.extend_from_slice(&frame.tail2_par);

        let mut apriori1 = vec![0.0; frame_len];
        let mut diagnostics = Vec::with_capacity(self.cfg.iterations);
        for _ in 0..self.cfg.iterations {
            self.siso1.decode(
                &SisoInput {
                    systematic: &sys1,
                    parity: &par1,
                    apriori: &apriori1,
                    tail_len: memory,
                },
                &mut self.out1,
            )?;
            let apriori2 = il.interleave(&self.out1.extrinsic)?;
            self.siso2.decode(
                &SisoInput {
                    systematic: &sys2,
                    parity: &par2,
                    apriori: &apriori2,
                    tail_len: memory,
                },
                &mut self.out2,
            )?;
            apriori1 = il.deinterleave(&self.out2.extrinsic)?;
            let mean_abs = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
            diagnostics.push(IterationDiagnostics {
                mean_abs_extrinsic_first: mean_abs(&self.out1.extrinsic),
                mean_abs_extrinsic_second: mean_abs(&self.out2.extrinsic),
            });
        }
        let aposteriori = il.deinterleave(&self.out2.aposteriori)?;
        let decisions = aposteriori.iter().map(|&x| Bit::from(x > 0.0)).collect();
        Ok(TurboDecodeOutput {
            decisions,
            aposteriori,
            iterations: diagnostics,
        })
    }
}

/// One-shot encode; see [`TurboCodec::encode`].
pub fn turbo_encode(cfg: &TurboConfig, message: &[Bit]) -> Vec<Bit> {
    TurboCodec::new(cfg.clone()).encode(message)
}

/// One-shot decode; see [`TurboCodec::decode`].
pub fn turbo_decode(cfg: &TurboConfig, frame: &LlrFrame) -> Result<TurboDecodeOutput> {
    TurboCodec::new(cfg.clone()).decode(frame)
}
