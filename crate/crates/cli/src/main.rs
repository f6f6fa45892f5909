//! Command-line front end: Eb/N0 sweeps, closed-form curves, paired code
//! comparisons, and empirical threshold estimation, all emitting CSV.
//!
//! Exit codes: 0 on success, 2 for configuration/usage errors, 3 for I/O
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fadelink::analytic::{estimate_threshold, fer_analytic, lookup_threshold, ThresholdSearch};
use fadelink::interleaver::Interleaver;
use fadelink::sim::{compare_codes, emit_csv, emit_plotdata, run_sweep, CodeConfig, SimConfig};
use fadelink::stbc::StbcScheme;
use fadelink::trellis::CodeSpec;
use fadelink::turbo::TurboConfig;
use fadelink::viterbi::ViterbiConfig;
use fadelink::Error;

#[derive(Parser)]
#[command(
    name = "fadelink",
    about = "Turbo and convolutional codes over quasi-static Rayleigh fading: \
             simulation, analysis, and comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo FER/BER sweep for one link configuration.
    Simulate(SimulateArgs),
    /// Closed-form FER curve from a convergence threshold.
    Analytic(AnalyticArgs),
    /// Paired turbo-vs-convolutional sweep with common random numbers.
    Compare(CompareArgs),
    /// Estimate the iterative-decoder convergence threshold on AWGN.
    EstimateThreshold(EstimateArgs),
}

/// Flags shared by every subcommand; all have defaults so scripts can rely
/// on them being present.
#[derive(Args, Clone)]
struct RunArgs {
    /// Master seed for all random streams.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output path.
    #[arg(long, default_value = "fadelink.csv")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Configuration file (TOML); explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code family: turbo | convolutional.
    #[arg(long)]
    code: Option<String>,
    /// Feedforward polynomial, octal text.
    #[arg(long)]
    feedforward: Option<String>,
    /// Feedback polynomial, octal text.
    #[arg(long)]
    feedback: Option<String>,
    /// Information bits per frame (the turbo interleaver size).
    #[arg(long)]
    frame_len: Option<usize>,
    /// Turbo decoding iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Interleaver construction seed.
    #[arg(long)]
    interleaver_seed: Option<u64>,
}

#[derive(Args, Clone)]
struct LinkArgs {
    /// Space-time scheme: none | g2 | g3 | g4.
    #[arg(long)]
    scheme: Option<String>,
    /// Receive antennas.
    #[arg(long)]
    n_r: Option<usize>,
    /// Sweep points, comma-separated average Eb/N0 in dB.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
    /// Stop rule: minimum frame errors per point.
    #[arg(long)]
    min_frame_errors: Option<u64>,
    /// Stop rule: maximum frames per point.
    #[arg(long)]
    max_frames: Option<u64>,
    /// Convergence threshold (dB) for the analytic overlay; turbo codes in
    /// the shipped table get it automatically.
    #[arg(long)]
    gamma_th_db: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    link: LinkArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Also write gnuplot-style series data here.
    #[arg(long)]
    plotdata: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Convergence threshold in dB (looked up from the shipped table when
    /// polynomials are given instead).
    #[arg(long)]
    gamma_th_db: Option<f64>,
    #[arg(long)]
    feedforward: Option<String>,
    #[arg(long)]
    feedback: Option<String>,
    /// Space-time scheme: none | g2 | g3 | g4.
    #[arg(long, default_value = "none")]
    scheme: String,
    #[arg(long, default_value_t = 1)]
    n_r: usize,
    /// Sweep points, comma-separated average Eb/N0 in dB.
    #[arg(long, value_delimiter = ',', required = true)]
    sweep: Vec<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Configuration file for side A (conventionally the turbo code).
    #[arg(long)]
    config_a: PathBuf,
    /// Configuration file for side B (conventionally the convolutional code).
    #[arg(long)]
    config_b: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, default_value = "5")]
    feedforward: String,
    #[arg(long, default_value = "7")]
    feedback: String,
    #[arg(long, default_value_t = 4096)]
    frame_len: usize,
    /// Decoder iterations for the probes (the threshold is a many-iteration
    /// limit, so this defaults high).
    #[arg(long, default_value_t = 28)]
    iterations: usize,
    /// Residual BER defining the waterfall crossing.
    #[arg(long, default_value_t = 1e-3)]
    target_ber: f64,
    /// Bisection window in dB, as lo:hi.
    #[arg(long, default_value = "0:2")]
    window_db: String,
    #[arg(long, default_value_t = 0.05)]
    tol_db: f64,
    #[arg(long, default_value_t = 120)]
    frames_per_probe: u64,
    #[command(flatten)]
    run: RunArgs,
}

/// Structured key-value configuration file, mirroring the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    code: FileCode,
    #[serde(default)]
    link: FileLink,
    #[serde(default)]
    analytic: FileAnalytic,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileCode {
    kind: Option<String>,
    feedforward: Option<String>,
    feedback: Option<String>,
    frame_len: Option<usize>,
    iterations: Option<usize>,
    interleaver_seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileLink {
    scheme: Option<String>,
    n_r: Option<usize>,
    sweep_ebno_db: Option<Vec<f64>>,
    min_frame_errors: Option<u64>,
    max_frames: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileAnalytic {
    gamma_th_db: Option<f64>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, Error> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn parse_scheme(name: &str) -> Result<StbcScheme, Error> {
    match name.to_ascii_lowercase().as_str() {
        "none" | "siso" => Ok(StbcScheme::None),
        "g2" => Ok(StbcScheme::G2),
        "g3" => Ok(StbcScheme::G3),
        "g4" => Ok(StbcScheme::G4),
        other => Err(Error::Config(format!(
            "unknown space-time scheme {other:?} (use none, g2, g3, g4)"
        ))),
    }
}

/// Merges file values and flags (flags win) into a full simulation config.
fn build_sim_config(
    code_args: &CodeArgs,
    link_args: &LinkArgs,
    run: &RunArgs,
) -> Result<SimConfig, Error> {
    let file = load_file_config(code_args.config.as_deref())?;

    let kind = code_args
        .code
        .clone()
        .or(file.code.kind)
        .unwrap_or_else(|| "turbo".to_string());
    let frame_len = code_args.frame_len.or(file.code.frame_len).unwrap_or(1024);
    let ff = code_args
        .feedforward
        .clone()
        .or(file.code.feedforward.clone());
    let fb = code_args.feedback.clone().or(file.code.feedback.clone());

    let code = match kind.to_ascii_lowercase().as_str() {
        "turbo" => {
            let spec = CodeSpec::from_octal(
                ff.as_deref().unwrap_or("5"),
                fb.as_deref().unwrap_or("7"),
            )?;
            let iterations = code_args.iterations.or(file.code.iterations).unwrap_or(7);
            let il_seed = code_args
                .interleaver_seed
                .or(file.code.interleaver_seed)
                .unwrap_or(1);
            CodeConfig::Turbo(TurboConfig::new(
                spec,
                Interleaver::random(frame_len, il_seed),
                iterations,
            )?)
        }
        "convolutional" | "conv" => {
            let cfg = match (&ff, &fb) {
                (None, None) => ViterbiConfig::default(),
                _ => ViterbiConfig::new(CodeSpec::from_octal(
                    ff.as_deref().unwrap_or("753"),
                    fb.as_deref().unwrap_or("561"),
                )?),
            };
            CodeConfig::Convolutional { cfg, frame_len }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown code family {other:?} (use turbo or convolutional)"
            )))
        }
    };

    let scheme = parse_scheme(
        &link_args
            .scheme
            .clone()
            .or(file.link.scheme)
            .unwrap_or_else(|| "none".to_string()),
    )?;
    let sweep = if link_args.sweep.is_empty() {
        file.link.sweep_ebno_db.unwrap_or_default()
    } else {
        link_args.sweep.clone()
    };

    let mut cfg = SimConfig::new(
        code,
        scheme,
        link_args.n_r.or(file.link.n_r).unwrap_or(1),
        sweep,
    );
    if let Some(v) = link_args.min_frame_errors.or(file.link.min_frame_errors) {
        cfg.min_frame_errors = v;
    }
    if let Some(v) = link_args.max_frames.or(file.link.max_frames) {
        cfg.max_frames = v;
    }
    cfg.master_seed = run.seed;
    cfg.workers = run.workers;
    cfg.gamma_th_db = link_args.gamma_th_db.or(file.analytic.gamma_th_db);
    if cfg.gamma_th_db.is_none() {
        if let CodeConfig::Turbo(turbo) = &cfg.code {
            cfg.gamma_th_db = lookup_threshold(&turbo.constituent).map(|t| t.gamma_th_db);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let cfg = build_sim_config(&args.code, &args.link, &args.run)?;
    eprintln!("simulating: {}", cfg.code.label());
    let result = run_sweep(&cfg)?;
    emit_csv(&result, &args.run.out)?;
    if let Some(plot) = &args.plotdata {
        emit_plotdata(&result, plot)?;
    }
    for p in &result.points {
        eprintln!(
            "  {:>6.2} dB: fer {:.4e} ({} errors / {} frames)",
            p.ebno_db, p.fer_sim, p.frame_errors, p.frames
        );
    }
    println!("wrote {}", args.run.out.display());
    Ok(())
}

fn cmd_analytic(args: &AnalyticArgs) -> Result<(), Error> {
    let gamma_th_db = match args.gamma_th_db {
        Some(v) => v,
        None => {
            let (Some(ff), Some(fb)) = (&args.feedforward, &args.feedback) else {
                return Err(Error::Config(
                    "no threshold available: pass --gamma-th-db, or turbo polynomials \
                     present in the shipped table (an empirical threshold from \
                     `estimate-threshold` also works)"
                        .into(),
                ));
            };
            let spec = CodeSpec::from_octal(ff, fb)?;
            lookup_threshold(&spec)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "no tabulated threshold for {}; pass --gamma-th-db",
                        spec.octal_label()
                    ))
                })?
                .gamma_th_db
        }
    };
    if args.sweep.is_empty() || args.sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "sweep must be nonempty and strictly increasing".into(),
        ));
    }
    let scheme = parse_scheme(&args.scheme)?;
    let order = scheme.n_t() * args.n_r;
    let gamma_th = 10f64.powf(gamma_th_db / 10.0);
    let mut out = String::from("ebno_db,fer_analytic\n");
    for &db in &args.sweep {
        let fer = fer_analytic(10f64.powf(db / 10.0), gamma_th, order)?;
        out.push_str(&format!("{db},{fer}\n"));
    }
    std::fs::write(&args.run.out, out)?;
    println!("wrote {}", args.run.out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Error> {
    let load = |path: &PathBuf| -> Result<SimConfig, Error> {
        let code = CodeArgs {
            config: Some(path.clone()),
            code: None,
            feedforward: None,
            feedback: None,
            frame_len: None,
            iterations: None,
            interleaver_seed: None,
        };
        let link = LinkArgs {
            scheme: None,
            n_r: None,
            sweep: Vec::new(),
            min_frame_errors: None,
            max_frames: None,
            gamma_th_db: None,
        };
        build_sim_config(&code, &link, &args.run)
    };
    let cfg_a = load(&args.config_a)?;
    let cfg_b = load(&args.config_b)?;
    eprintln!(
        "comparing (common random numbers):\n  A: {}\n  B: {}",
        cfg_a.code.label(),
        cfg_b.code.label()
    );
    let (res_a, res_b) = compare_codes(&cfg_a, &cfg_b, args.run.seed)?;
    let stem = args.run.out.to_string_lossy();
    let stem = stem.strip_suffix(".csv").unwrap_or(&stem).to_string();
    let path_a = PathBuf::from(format!("{stem}_a.csv"));
    let path_b = PathBuf::from(format!("{stem}_b.csv"));
    emit_csv(&res_a, &path_a)?;
    emit_csv(&res_b, &path_b)?;
    for (pa, pb) in res_a.points.iter().zip(&res_b.points) {
        eprintln!(
            "  {:>6.2} dB: A fer {:.4e}, B fer {:.4e}",
            pa.ebno_db, pa.fer_sim, pb.fer_sim
        );
    }
    println!("wrote {} and {}", path_a.display(), path_b.display());
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), Error> {
    let (lo, hi) = args
        .window_db
        .split_once(':')
        .ok_or_else(|| Error::Config("window must be lo:hi in dB".into()))?;
    let parse = |s: &str| -> Result<f64, Error> {
        s.trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad window bound {s:?}: {e}")))
    };
    let mut search = ThresholdSearch::new(
        CodeSpec::from_octal(&args.feedforward, &args.feedback)?,
        args.frame_len,
    );
    search.window_db = (parse(lo)?, parse(hi)?);
    search.iterations = args.iterations;
    search.target_ber = args.target_ber;
    search.tol_db = args.tol_db;
    search.frames_per_probe = args.frames_per_probe;
    search.master_seed = args.run.seed;
    let est = estimate_threshold(&search)?;
    println!(
        "estimated gamma_th = {:.3} dB (+- {} dB search tolerance, {} frames/probe, \
         target BER {:.1e}, {} iterations)",
        est.threshold.gamma_th_db, est.tol_db, est.frames_per_probe, est.target_ber, args.iterations
    );
    let mut out = String::from("ebno_db,frames,bit_errors,ber\n");
    for p in &est.probes {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.ebno_db, p.frames, p.bit_errors, p.ber
        ));
    }
    std::fs::write(&args.run.out, out)?;
    println!("wrote probe log to {}", args.run.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Compare(args) => cmd_compare(args),
        Command::EstimateThreshold(args) => cmd_estimate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
