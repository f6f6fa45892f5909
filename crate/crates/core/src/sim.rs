//! End-to-end Monte Carlo frame simulation: Eb/N0 sweeps with stop rules and
//! Wilson confidence intervals, analytic overlays, paired code comparisons
//! with common random numbers, and CSV/plot-data emission.
//!
//! Reproducibility contract: every frame consumes RNG streams keyed only by
//! `(master_seed, sweep point, frame index)`, frames are dispatched in
//! fixed-size batches, and aggregation folds outcomes in frame order, so a
//! run's outputs are byte-identical for any worker count. The worker count
//! is therefore an execution parameter and deliberately kept out of the
//! emitted metadata.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::fer_analytic;
use crate::channel::{draw_channel, instantaneous_gamma_b, transmit, LinkBudget};
use crate::modem::{demap_siso, map_bit_pairs, map_bits};
use crate::rng::{frame_rng, Lane};
use crate::stbc::{demap_g2, stbc_encode, GenericDemapper, StbcScheme};
use crate::turbo::{LlrFrame, TurboCodec, TurboConfig};
use crate::viterbi::{ViterbiCodec, ViterbiConfig};
use crate::{Bit, Error, Result};

/// Punctured code rate shared by both code families (tail overhead excluded
/// and reported separately).
pub const CODE_RATE: f64 = 0.5;

/// Frames dispatched between stop-rule evaluations. Fixed so that stopping
/// points do not depend on the worker count.
const BATCH: u64 = 64;

/// Code selection for one simulation.
#[derive(Clone, Debug)]
pub enum CodeConfig {
    Turbo(TurboConfig),
    Convolutional { cfg: ViterbiConfig, frame_len: usize },
}

impl CodeConfig {
    pub fn frame_len(&self) -> usize {
        match self {
            Self::Turbo(cfg) => cfg.frame_len(),
            Self::Convolutional { frame_len, .. } => *frame_len,
        }
    }

    /// Information rate including tail bits.
    pub fn effective_rate(&self) -> f64 {
        match self {
            Self::Turbo(cfg) => cfg.effective_rate(),
            Self::Convolutional { cfg, frame_len } => {
                *frame_len as f64 / (2.0 * (*frame_len + cfg.spec.memory()) as f64)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Turbo(cfg) => format!(
                "turbo {} L={} iterations={} interleaver_seed={}",
                cfg.constituent.octal_label(),
                cfg.frame_len(),
                cfg.iterations,
                cfg.interleaver.seed()
            ),
            Self::Convolutional { cfg, frame_len } => {
                format!("convolutional {} L={}", cfg.spec.octal_label(), frame_len)
            }
        }
    }
}

/// Full configuration of one sweep.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub code: CodeConfig,
    pub scheme: StbcScheme,
    pub n_r: usize,
    pub sweep_ebno_db: Vec<f64>,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
    pub workers: usize,
    /// Convergence threshold driving the analytic overlay, when known.
    pub gamma_th_db: Option<f64>,
    /// Disable channel noise entirely (pipeline checks).
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(code: CodeConfig, scheme: StbcScheme, n_r: usize, sweep_ebno_db: Vec<f64>) -> Self {
        Self {
            code,
            scheme,
            n_r,
            sweep_ebno_db,
            min_frame_errors: 100,
            max_frames: 200_000,
            master_seed: 1,
            workers: 0,
            gamma_th_db: None,
            noiseless: false,
        }
    }

    /// Fading order `N_T * N_R` of the analytic model.
    pub fn order(&self) -> usize {
        self.scheme.n_t() * self.n_r
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep_ebno_db.is_empty() {
            return Err(Error::Config("sweep must contain at least one point".into()));
        }
        if self.sweep_ebno_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep points must be strictly increasing".into()));
        }
        if !self.sweep_ebno_db.iter().all(|x| x.is_finite()) {
            return Err(Error::Config("sweep points must be finite".into()));
        }
        if self.n_r == 0 {
            return Err(Error::Config("at least one receive antenna is required".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::Config("max_frames must be positive".into()));
        }
        if self.min_frame_errors < 20 {
            eprintln!(
                "warning: min_frame_errors = {} gives wide confidence intervals; \
                 20 or more is recommended",
                self.min_frame_errors
            );
        }
        if self.code.frame_len() == 0 {
            return Err(Error::Config("frame length must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one simulated frame.
#[derive(Clone, Copy, Debug)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub frame_error: bool,
    /// Instantaneous Eb/N0 of the frame's channel realization (linear).
    pub gamma_b: f64,
}

/// Per-worker codec state.
enum Codec {
    Turbo(TurboCodec),
    Conv(ViterbiCodec),
}

impl Codec {
    fn build(code: &CodeConfig) -> Self {
        match code {
            CodeConfig::Turbo(cfg) => Self::Turbo(TurboCodec::new(cfg.clone())),
            CodeConfig::Convolutional { cfg, .. } => Self::Conv(ViterbiCodec::new(*cfg)),
        }
    }

    fn encode(&mut self, message: &[Bit]) -> Vec<Bit> {
        match self {
            Self::Turbo(codec) => codec.encode(message),
            Self::Conv(codec) => codec.encode(message),
        }
    }

    fn decode(&mut self, llrs: &[f64]) -> Vec<Bit> {
        match self {
            Self::Turbo(codec) => {
                let cfg_len = codec.cfg().frame_len();
                let memory = codec.cfg().memory();
                let frame = LlrFrame::from_codeword_llrs(llrs, cfg_len, memory)
                    .expect("frame layout is fixed by the encoder");
                codec
                    .decode(&frame)
                    .expect("validated configuration cannot fail to decode")
                    .decisions
            }
            Self::Conv(codec) => codec
                .decode(llrs)
                .expect("validated configuration cannot fail to decode"),
        }
    }
}

/// Runs the full pipeline for one frame: message, encode, map, space-time
/// encode, quasi-static channel (one realization per frame), demap, decode,
/// compare. Dimension mismatches are defects and panic.
fn simulate_frame(cfg: &SimConfig, codec: &mut Codec, point: u32, ebno_db: f64, frame: u64) -> FrameOutcome {
    let budget = LinkBudget::new(ebno_db, CODE_RATE, cfg.scheme.rate());
    let snr = budget.snr();
    let tx_snr = if cfg.noiseless { f64::INFINITY } else { snr };
    let frame_len = cfg.code.frame_len();
    let k_prime = cfg.scheme.input_symbols();

    let mut channel_rng = frame_rng(cfg.master_seed, point, frame, Lane::Channel);
    let h = draw_channel(&mut channel_rng, cfg.n_r, cfg.scheme.n_t());
    let gamma_b = instantaneous_gamma_b(&h, &budget);

    let mut message_rng = frame_rng(cfg.master_seed, point, frame, Lane::Message);
    let message: Vec<Bit> = (0..frame_len)
        .map(|_| message_rng.random_range(0..2) as Bit)
        .collect();

    let codeword = codec.encode(&message);
    let mut symbols = map_bit_pairs(&codeword);
    while symbols.len() % k_prime != 0 {
        symbols.push(map_bits(0, 0)); // filler, dropped after demapping
    }

    let mut noise_rng = frame_rng(cfg.master_seed, point, frame, Lane::Noise);
    let mut llrs: Vec<f64> = Vec::with_capacity(2 * symbols.len());
    match cfg.scheme {
        StbcScheme::None if cfg.n_r == 1 => {
            let h00 = h.gains[(0, 0)];
            for chunk in symbols.chunks_exact(1) {
                let block = stbc_encode(StbcScheme::None, chunk).expect("arity fixed");
                let r = transmit(&block, &h, tx_snr, &mut noise_rng);
                let (l1, l2) = demap_siso(r[(0, 0)], h00, snr);
                llrs.push(l1);
                llrs.push(l2);
            }
        }
        StbcScheme::G2 => {
            for chunk in symbols.chunks_exact(2) {
                let block = stbc_encode(StbcScheme::G2, chunk).expect("arity fixed");
                let r = transmit(&block, &h, tx_snr, &mut noise_rng);
                llrs.extend(demap_g2(&r, &h.gains, snr).expect("dimensions fixed"));
            }
        }
        scheme => {
            let demapper =
                GenericDemapper::new(scheme, &h.gains, snr).expect("dimensions fixed");
            for chunk in symbols.chunks_exact(k_prime) {
                let block = stbc_encode(scheme, chunk).expect("arity fixed");
                let r = transmit(&block, &h, tx_snr, &mut noise_rng);
                llrs.extend(demapper.demap(&r).expect("dimensions fixed"));
            }
        }
    }
    llrs.truncate(codeword.len());

    let decisions = codec.decode(&llrs);
    let bit_errors = decisions
        .iter()
        .zip(&message)
        .filter(|(&d, &m)| d != m)
        .count() as u64;
    FrameOutcome {
        bit_errors,
        frame_error: bit_errors > 0,
        gamma_b,
    }
}

/// One-shot frame simulation (tests and diagnostics).
pub fn run_frame(cfg: &SimConfig, point: u32, ebno_db: f64, frame: u64) -> FrameOutcome {
    let mut codec = Codec::build(&cfg.code);
    simulate_frame(cfg, &mut codec, point, ebno_db, frame)
}

/// One sweep point's tallies and derived rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub ebno_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub info_bits: u64,
    pub fer_sim: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    pub fer_analytic: Option<f64>,
    pub ber_sim: f64,
}

/// Result of one sweep plus enough metadata to reproduce it (the worker
/// count is excluded: it cannot affect the numbers).
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub code_label: String,
    pub scheme_label: String,
    pub n_r: usize,
    pub master_seed: u64,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub effective_rate: f64,
    pub gamma_th_db: Option<f64>,
}

/// Two-sided Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

const WILSON_Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, Default)]
struct PointAccum {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
}

impl PointAccum {
    fn fold(&mut self, outcome: &FrameOutcome) {
        self.frames += 1;
        self.frame_errors += u64::from(outcome.frame_error);
        self.bit_errors += outcome.bit_errors;
    }

    fn stopped(&self, cfg: &SimConfig) -> bool {
        self.frame_errors >= cfg.min_frame_errors || self.frames >= cfg.max_frames
    }

    fn into_point(self, cfg: &SimConfig, ebno_db: f64) -> SweepPoint {
        let fer = self.frame_errors as f64 / self.frames as f64;
        let (lo, hi) = wilson_interval(self.frame_errors, self.frames, WILSON_Z95);
        let info_bits = self.frames * cfg.code.frame_len() as u64;
        let analytic = cfg.gamma_th_db.map(|th_db| {
            fer_analytic(
                10f64.powf(ebno_db / 10.0),
                10f64.powf(th_db / 10.0),
                cfg.order(),
            )
            .expect("validated configuration")
        });
        SweepPoint {
            ebno_db,
            frames: self.frames,
            frame_errors: self.frame_errors,
            bit_errors: self.bit_errors,
            info_bits,
            fer_sim: fer,
            fer_ci_lo: lo,
            fer_ci_hi: hi,
            fer_analytic: analytic,
            ber_sim: self.bit_errors as f64 / info_bits as f64,
        }
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

fn batch_outcomes(
    pool: &rayon::ThreadPool,
    cfg: &SimConfig,
    point: u32,
    ebno_db: f64,
    start: u64,
    count: u64,
) -> Vec<FrameOutcome> {
    pool.install(|| {
        (start..start + count)
            .into_par_iter()
            .map_init(
                || Codec::build(&cfg.code),
                |codec, frame| simulate_frame(cfg, codec, point, ebno_db, frame),
            )
            .collect()
    })
}

/// Simulates every sweep point until the stop rule triggers (checked at a
/// fixed batch granularity of 64 frames).
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = build_pool(cfg.workers)?;
    let mut points = Vec::with_capacity(cfg.sweep_ebno_db.len());
    for (pi, &ebno_db) in cfg.sweep_ebno_db.iter().enumerate() {
        let mut accum = PointAccum::default();
        while !accum.stopped(cfg) {
            let count = BATCH.min(cfg.max_frames - accum.frames);
            for outcome in batch_outcomes(&pool, cfg, pi as u32, ebno_db, accum.frames, count) {
                accum.fold(&outcome);
            }
        }
        points.push(accum.into_point(cfg, ebno_db));
    }
    Ok(SweepResult {
        points,
        code_label: cfg.code.label(),
        scheme_label: cfg.scheme.label().to_string(),
        n_r: cfg.n_r,
        master_seed: cfg.master_seed,
        min_frame_errors: cfg.min_frame_errors,
        max_frames: cfg.max_frames,
        effective_rate: cfg.code.effective_rate(),
        gamma_th_db: cfg.gamma_th_db,
    })
}

/// Paired sweeps under common random numbers: both codes see the same
/// channel realization and message stream at every `(point, frame index)`,
/// sharpening curve comparisons. Both configurations must share the
/// space-time scheme, receive antenna count, sweep grid, and frame length;
/// the shared seed overrides both master seeds.
pub fn compare_codes(
    cfg_a: &SimConfig,
    cfg_b: &SimConfig,
    shared_seed: u64,
) -> Result<(SweepResult, SweepResult)> {
    let mut cfg_a = cfg_a.clone();
    let mut cfg_b = cfg_b.clone();
    cfg_a.master_seed = shared_seed;
    cfg_b.master_seed = shared_seed;
    cfg_a.validate()?;
    cfg_b.validate()?;
    if cfg_a.scheme != cfg_b.scheme || cfg_a.n_r != cfg_b.n_r {
        return Err(Error::Usage(
            "paired comparison requires a common space-time scheme and antenna count".into(),
        ));
    }
    if cfg_a.sweep_ebno_db != cfg_b.sweep_ebno_db {
        return Err(Error::Usage(
            "paired comparison requires identical sweep grids".into(),
        ));
    }
    if cfg_a.code.frame_len() != cfg_b.code.frame_len() {
        return Err(Error::Usage(
            "paired comparison requires equal frame lengths so messages can be shared".into(),
        ));
    }
    let pool_a = build_pool(cfg_a.workers)?;
    let pool_b = build_pool(cfg_b.workers)?;
    let mut points_a = Vec::new();
    let mut points_b = Vec::new();
    let max_frames = cfg_a.max_frames.min(cfg_b.max_frames);
    for (pi, &ebno_db) in cfg_a.sweep_ebno_db.iter().enumerate() {
        let mut acc_a = PointAccum::default();
        let mut acc_b = PointAccum::default();
        while !(acc_a.stopped(&cfg_a) && acc_b.stopped(&cfg_b)) && acc_a.frames < max_frames {
            let count = BATCH.min(max_frames - acc_a.frames);
            let out_a = batch_outcomes(&pool_a, &cfg_a, pi as u32, ebno_db, acc_a.frames, count);
            let out_b = batch_outcomes(&pool_b, &cfg_b, pi as u32, ebno_db, acc_b.frames, count);
            out_a.iter().for_each(|o| acc_a.fold(o));
            out_b.iter().for_each(|o| acc_b.fold(o));
        }
        points_a.push(acc_a.into_point(&cfg_a, ebno_db));
        points_b.push(acc_b.into_point(&cfg_b, ebno_db));
    }
    let finish = |cfg: &SimConfig, points: Vec<SweepPoint>| SweepResult {
        points,
        code_label: cfg.code.label(),
        scheme_label: cfg.scheme.label().to_string(),
        n_r: cfg.n_r,
        master_seed: cfg.master_seed,
        min_frame_errors: cfg.min_frame_errors,
        max_frames: cfg.max_frames,
        effective_rate: cfg.code.effective_rate(),
        gamma_th_db: cfg.gamma_th_db,
    };
    Ok((finish(&cfg_a, points_a), finish(&cfg_b, points_b)))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes one sweep as CSV with the fixed column set
/// `ebno_db,frames,frame_errors,fer_sim,fer_ci_lo,fer_ci_hi,fer_analytic,ber_sim`;
/// metadata rides in `#` comment lines above the header, and the analytic
/// column is empty when no threshold is known.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# code: {}\n", result.code_label));
    out.push_str(&format!(
        "# scheme: {} n_r: {}\n",
        result.scheme_label, result.n_r
    ));
    out.push_str(&format!("# master_seed: {}\n", result.master_seed));
    out.push_str(&format!(
        "# stop_rule: min_frame_errors={} max_frames={}\n",
        result.min_frame_errors, result.max_frames
    ));
    out.push_str(&format!(
        "# effective_rate_with_tails: {}\n",
        result.effective_rate
    ));
    out.push_str(&format!(
        "# gamma_th_db: {}\n",
        fmt_opt(result.gamma_th_db)
    ));
    out.push_str("ebno_db,frames,frame_errors,fer_sim,fer_ci_lo,fer_ci_hi,fer_analytic,ber_sim\n");
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.ebno_db,
            p.frames,
            p.frame_errors,
            p.fer_sim,
            p.fer_ci_lo,
            p.fer_ci_hi,
            fmt_opt(p.fer_analytic),
            p.ber_sim
        ));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Numeric fields of one parsed CSV row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsvRow {
    pub ebno_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer_sim: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    pub fer_analytic: Option<f64>,
    pub ber_sim: f64,
}

/// Parses a CSV written by [`emit_csv`] back into its numeric fields.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("ebno_db") || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Usage(format!("malformed CSV row: {line:?}")));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Usage(format!("bad number {s:?}: {e}")))
        };
        let int = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|e| Error::Usage(format!("bad count {s:?}: {e}")))
        };
        rows.push(CsvRow {
            ebno_db: num(fields[0])?,
            frames: int(fields[1])?,
            frame_errors: int(fields[2])?,
            fer_sim: num(fields[3])?,
            fer_ci_lo: num(fields[4])?,
            fer_ci_hi: num(fields[5])?,
            fer_analytic: if fields[6].is_empty() {
                None
            } else {
                Some(num(fields[6])?)
            },
            ber_sim: num(fields[7])?,
        });
    }
    Ok(rows)
}

/// Writes plain-text plot data: one series per block, blank-line separated,
/// each starting with `# series <name>` followed by whitespace-separated
/// rows (`ebno_db fer ci_lo ci_hi` for the simulation series, `ebno_db fer`
/// for the analytic series).
pub fn emit_plotdata(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# series fer_sim {}\n", result.code_label));
    for p in &result.points {
        out.push_str(&format!(
            "{} {} {} {}\n",
            p.ebno_db, p.fer_sim, p.fer_ci_lo, p.fer_ci_hi
        ));
    }
    if result.points.iter().any(|p| p.fer_analytic.is_some()) {
        out.push('\n');
        out.push_str("# series fer_analytic\n");
        for p in &result.points {
            if let Some(a) = p.fer_analytic {
                out.push_str(&format!("{} {}\n", p.ebno_db, a));
            }
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleaver::Interleaver;
    use crate::trellis::CodeSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_turbo(frame_len: usize) -> CodeConfig {
        CodeConfig::Turbo(
            TurboConfig::new(
                CodeSpec::new(0o5, 0o7).unwrap(),
                Interleaver::random(frame_len, 1),
                7,
            )
            .unwrap(),
        )
    }

    fn small_cfg(scheme: StbcScheme, n_r: usize, sweep: Vec<f64>) -> SimConfig {
        let mut cfg = SimConfig::new(small_turbo(64), scheme, n_r, sweep);
        cfg.min_frame_errors = 25;
        cfg.max_frames = 400;
        cfg
    }

    #[test]
    fn noiseless_runs_have_zero_errors() {
        for scheme in [StbcScheme::None, StbcScheme::G2, StbcScheme::G3, StbcScheme::G4] {
            let mut cfg = small_cfg(scheme, 2, vec![2.0]);
            cfg.noiseless = true;
            for frame in 0..4 {
                let outcome = run_frame(&cfg, 0, 2.0, frame);
                assert_eq!(outcome.bit_errors, 0, "{}", scheme.label());
                assert!(!outcome.frame_error);
            }
        }
    }

    #[test]
    fn frames_are_deterministic() {
        let cfg = small_cfg(StbcScheme::G2, 1, vec![4.0]);
        let a = run_frame(&cfg, 0, 4.0, 17);
        let b = run_frame(&cfg, 0, 4.0, 17);
        assert_eq!(a.bit_errors, b.bit_errors);
        assert_eq!(a.gamma_b, b.gamma_b);
    }

    #[test]
    fn frame_errors_concentrate_below_the_threshold() {
        // Mid-SNR diagnostic: conditional FER given gamma_b <= gamma_th
        // should dwarf the conditional FER above it.
        let cfg = small_cfg(StbcScheme::None, 1, vec![7.0]);
        let gamma_th = 10f64.powf(0.77 / 10.0);
        let mut below = (0u64, 0u64);
        let mut above = (0u64, 0u64);
        for frame in 0..600 {
            let outcome = run_frame(&cfg, 0, 7.0, frame);
            let slot = if outcome.gamma_b <= gamma_th {
                &mut below
            } else {
                &mut above
            };
            slot.0 += u64::from(outcome.frame_error);
            slot.1 += 1;
        }
        assert!(below.1 > 20 && above.1 > 20);
        let fer_below = below.0 as f64 / below.1 as f64;
        let fer_above = above.0 as f64 / above.1 as f64;
        assert!(
            fer_below > 5.0 * fer_above.max(1e-3),
            "below {fer_below} vs above {fer_above}"
        );
    }

    #[test]
    fn empty_or_unsorted_sweeps_are_rejected() {
        let cfg = small_cfg(StbcScheme::None, 1, vec![]);
        assert!(matches!(run_sweep(&cfg), Err(Error::Config(_))));
        let cfg = small_cfg(StbcScheme::None, 1, vec![4.0, 3.0]);
        assert!(matches!(run_sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn wilson_interval_contains_the_estimate_and_covers() {
        // Coverage on a synthetic Bernoulli error process.
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let p = 0.07;
        let n = 400u64;
        let mut covered = 0u32;
        let reps = 1000;
        for _ in 0..reps {
            let errors = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(errors, n, WILSON_Z95);
            let fer = errors as f64 / n as f64;
            assert!(lo <= fer && fer <= hi);
            if lo <= p && p <= hi {
                covered += 1;
            }
        }
        assert!(
            covered as f64 / reps as f64 >= 0.93,
            "coverage {covered}/{reps}"
        );
    }

    #[test]
    fn estimator_is_unbiased_on_synthetic_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let p = 0.11;
        let reps = 1000;
        let n = 500u64;
        let mean: f64 = (0..reps)
            .map(|_| (0..n).filter(|_| rng.random::<f64>() < p).count() as f64 / n as f64)
            .sum::<f64>()
            / reps as f64;
        let sigma = (p * (1.0 - p) / (n * reps as u64) as f64).sqrt();
        assert!((mean - p).abs() < 4.0 * sigma, "{mean} vs {p}");
    }

    #[test]
    fn sweep_respects_stop_rules_and_attaches_analytic() {
        let mut cfg = small_cfg(StbcScheme::None, 1, vec![2.0, 6.0]);
        cfg.gamma_th_db = Some(0.77);
        cfg.min_frame_errors = 25;
        cfg.max_frames = 192;
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.points.len(), 2);
        for p in &result.points {
            assert!(p.frames <= 192);
            assert!(p.frame_errors >= 25 || p.frames == 192);
            assert!(p.fer_ci_lo <= p.fer_sim && p.fer_sim <= p.fer_ci_hi);
            let analytic = p.fer_analytic.unwrap();
            assert!(analytic > 0.0 && analytic < 1.0);
            assert_eq!(p.info_bits, p.frames * 64);
        }
        // Lower Eb/N0 must not have fewer errors per frame.
        assert!(result.points[0].fer_sim >= result.points[1].fer_sim);
    }

    #[test]
    fn compare_requires_matching_grids_and_schemes() {
        let a = small_cfg(StbcScheme::None, 1, vec![2.0, 4.0]);
        let mut b = small_cfg(StbcScheme::None, 1, vec![2.0, 5.0]);
        assert!(matches!(
            compare_codes(&a, &b, 9).unwrap_err(),
            Error::Usage(_)
        ));
        b = small_cfg(StbcScheme::G2, 1, vec![2.0, 4.0]);
        assert!(matches!(
            compare_codes(&a, &b, 9).unwrap_err(),
            Error::Usage(_)
        ));
    }

    #[test]
    fn identical_configs_give_identical_curves() {
        let cfg = small_cfg(StbcScheme::None, 1, vec![3.0, 6.0]);
        let (a, b) = compare_codes(&cfg, &cfg, 33).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn paired_runs_share_channel_realizations() {
        let turbo = small_cfg(StbcScheme::None, 1, vec![5.0]);
        let mut conv = turbo.clone();
        conv.code = CodeConfig::Convolutional {
            cfg: ViterbiConfig::default(),
            frame_len: 64,
        };
        let gamma_turbo = run_frame(&turbo, 0, 5.0, 3).gamma_b;
        let gamma_conv = run_frame(&conv, 0, 5.0, 3).gamma_b;
        assert_eq!(gamma_turbo, gamma_conv);
    }

    #[test]
    fn csv_round_trip_preserves_numeric_fields() {
        let mut cfg = small_cfg(StbcScheme::None, 1, vec![2.0, 5.0]);
        cfg.gamma_th_db = Some(0.77);
        cfg.min_frame_errors = 20;
        cfg.max_frames = 128;
        let result = run_sweep(&cfg).unwrap();
        let dir = std::env::temp_dir().join("fadelink_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round_trip.csv");
        emit_csv(&result, &path).unwrap();
        let rows = read_csv(&path).unwrap();
        assert_eq!(rows.len(), result.points.len());
        for (row, p) in rows.iter().zip(&result.points) {
            assert_eq!(row.ebno_db, p.ebno_db);
            assert_eq!(row.frames, p.frames);
            assert_eq!(row.frame_errors, p.frame_errors);
            assert_eq!(row.fer_sim, p.fer_sim);
            assert_eq!(row.fer_ci_lo, p.fer_ci_lo);
            assert_eq!(row.fer_ci_hi, p.fer_ci_hi);
            assert_eq!(row.fer_analytic, p.fer_analytic);
            assert_eq!(row.ber_sim, p.ber_sim);
        }
        // The text uses '.' decimal points regardless of locale settings.
        let text = std::fs::read_to_string(&path).unwrap();
        let data = text.lines().last().unwrap();
        assert!(data.contains('.'));
        assert!(data.chars().all(|c| c.is_ascii_digit() || matches!(c, ',' | '.' | 'e' | '-' | '+')), "{data}");
    }

    #[test]
    fn analytic_column_is_empty_without_a_threshold() {
        let mut cfg = small_cfg(StbcScheme::None, 1, vec![4.0]);
        cfg.code = CodeConfig::Convolutional {
            cfg: ViterbiConfig::default(),
            frame_len: 64,
        };
        cfg.min_frame_errors = 20;
        cfg.max_frames = 128;
        let result = run_sweep(&cfg).unwrap();
        let dir = std::env::temp_dir().join("fadelink_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("no_analytic.csv");
        emit_csv(&result, &path).unwrap();
        let rows = read_csv(&path).unwrap();
        assert!(rows.iter().all(|r| r.fer_analytic.is_none()));
        let text = std::fs::read_to_string(&path).unwrap();
        let data_line = text.lines().find(|l| l.starts_with('4')).unwrap();
        assert!(data_line.contains(",,"), "analytic column empty: {data_line}");
    }

    #[test]
    fn plotdata_has_one_block_per_series() {
        let mut cfg = small_cfg(StbcScheme::None, 1, vec![3.0]);
        cfg.gamma_th_db = Some(0.77);
        cfg.min_frame_errors = 20;
        cfg.max_frames = 128;
        let result = run_sweep(&cfg).unwrap();
        let dir = std::env::temp_dir().join("fadelink_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("series.txt");
        emit_plotdata(&result, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# series fer_sim"));
        assert!(text.contains("# series fer_analytic"));
        assert_eq!(text.matches("# series").count(), 2);
    }

    #[test]
    fn csv_identical_across_worker_counts() {
        let mut texts = Vec::new();
        for workers in [1usize, 2, 4] {
            let mut cfg = small_cfg(StbcScheme::None, 1, vec![3.0, 6.0]);
            cfg.workers = workers;
            cfg.min_frame_errors = 20;
            cfg.max_frames = 192;
            let result = run_sweep(&cfg).unwrap();
            let dir = std::env::temp_dir().join("fadelink_csv_test");
            std::fs::create_dir_all(&dir).unwrap();
            let path = dir.join(format!("workers_{workers}.csv"));
            emit_csv(&result, &path).unwrap();
            texts.push(std::fs::read_to_string(&path).unwrap());
        }
        assert_eq!(texts[0], texts[1]);
        assert_eq!(texts[0], texts[2]);
    }
}
