//! Command-line front end: tighten and certify matrices, compute
//! theoretical error probabilities, run Monte-Carlo sweeps, and check the
//! tightening inequality on random instances.
//!
//! Exit codes: 0 success, 2 parse error, 3 numerical precondition,
//! 4 sweep abort, 5 property violation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use compclass::classifier::ClassifierKind;
use compclass::error::Error;
use compclass::frames::MeasurementMatrix;
use compclass::montecarlo::{ExperimentConfig, FrameMode, SweepRow};
use compclass::signals::{HypothesisSet, SparseSignal};
use compclass::{io, seeding};

#[derive(Parser)]
#[command(name = "compclass", version, about = "Compressive classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Row-orthogonalize a matrix and print certificates for input and output.
    Tighten(TightenArgs),
    /// Print the tightness / equi-norm certificate of a matrix file.
    Certify(CertifyArgs),
    /// Theoretical separation ratio and error probability for given signals.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo error-rate sweep over (n, SNR) grids; writes CSV.
    Simulate(SimulateArgs),
    /// Verify the tightening inequality on random instances.
    Check(CheckArgs),
}

#[derive(Args)]
struct TightenArgs {
    /// Input matrix file (`n N` header then rows).
    #[arg(long)]
    input: PathBuf,
    /// Output matrix file.
    #[arg(long)]
    output: PathBuf,
    /// Frame constant; the output satisfies Phi*Phi^T = c*I.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Pick c = (N/n)*psi^2 from the input's mean column norm instead.
    #[arg(long, conflicts_with = "c")]
    energy_preserving: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Measurement matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Signal vector files (`1 N` header), one per hypothesis; two files
    /// give the exact 2-ary probability, more give the union bound.
    #[arg(long, num_args = 2.., required = true)]
    signals: Vec<PathBuf>,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: f64,
    /// True hypothesis (1-based) for the union bound.
    #[arg(long, default_value_t = 1)]
    true_index: usize,
    /// Optional CSV output path for the computed quantities.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Measurement counts n, comma separated.
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    /// Ambient dimension N.
    #[arg(long)]
    cols: Option<usize>,
    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    /// Sparsity k of each hypothesis signal.
    #[arg(long)]
    sparsity: Option<usize>,
    /// Number of hypotheses m.
    #[arg(long)]
    hypotheses: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// non-tight, tightened, or both.
    #[arg(long)]
    frame_mode: Option<String>,
    /// correlation or matched-filter.
    #[arg(long)]
    classifier: Option<String>,
    /// Redraw the Gaussian matrix every trial instead of per grid point.
    #[arg(long)]
    redraw_per_trial: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Number of random (matrix, signal pair) instances.
    #[arg(long, default_value_t = 1000)]
    instances: u64,
    #[arg(long)]
    seed: u64,
    /// Tighten each instance first, so equality should hold throughout.
    #[arg(long)]
    pre_tightened: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn print_certificate(label: &str, m: &MeasurementMatrix) {
    let cert = m.certify();
    println!("{label}: {} x {}", m.rows(), m.cols());
    println!("  is_tight            = {}", cert.is_tight);
    println!("  tightness_residual  = {:.6e}", cert.tightness_residual);
    match cert.frame_constant_c {
        Some(c) => println!("  frame_constant_c    = {c:.12}"),
        None => println!("  frame_constant_c    = (not tight)"),
    }
    println!("  is_equinorm         = {}", cert.is_equinorm);
    match cert.column_norm_psi {
        Some(psi) => println!("  column_norm_psi     = {psi:.12}"),
        None => println!("  column_norm_psi     = (not equi-norm)"),
    }
}

fn cmd_tighten(args: &TightenArgs) -> Result<(), (u8, String)> {
    let input = io::read_matrix(&args.input).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    print_certificate("input", &input);
    let tightened = if args.energy_preserving {
        input.tighten_energy_preserving()
    } else {
        input.tighten(args.c)
    }
    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    print_certificate("output", &tightened);
    io::write_matrix(&args.output, &tightened)
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn cmd_certify(args: &CertifyArgs) -> Result<(), (u8, String)> {
    let input = io::read_matrix(&args.input).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    print_certificate("matrix", &input);
    if let Some(ok) = input
        .certify()
        .frame_constant_matches_column_norms(input.rows(), input.cols())
    {
        println!("  c = (N/n)*psi^2     = {ok}");
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), (u8, String)> {
    let matrix = io::read_matrix(&args.matrix).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let mut signals = Vec::new();
    for path in &args.signals {
        let v = io::read_vector(path).map_err(|e| (exit_code_for(&e), e.to_string()))?;
        let k = v.iter().filter(|x| **x != 0.0).count().max(1);
        signals.push(SparseSignal::new(v, k).map_err(|e| (exit_code_for(&e), e.to_string()))?);
    }
    if args.true_index == 0 || args.true_index > signals.len() {
        return Err((2, format!("--true-index must be in 1..={}", signals.len())));
    }
    let mut lines = Vec::new();
    if signals.len() == 2 {
        let ratio = compclass::separation_ratio(&matrix, &signals[0], &signals[1])
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        let err = compclass::error_probability_2ary(&matrix, &signals[0], &signals[1], args.sigma)
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        println!("separation_ratio = {ratio:.12e}");
        println!("q_argument       = {:.12e}", err.argument.unwrap());
        println!("probability      = {:.12e}", err.probability);
        lines.push(format!(
            "kind,separation_ratio,q_argument,probability\n2-ary,{},{},{}",
            io::fmt_sig10(ratio),
            io::fmt_sig10(err.argument.unwrap()),
            io::fmt_sig10(err.probability)
        ));
    } else {
        let set =
            HypothesisSet::new(signals).map_err(|e| (exit_code_for(&e), e.to_string()))?;
        let bound =
            compclass::union_bound_mary(&matrix, &set, args.sigma, args.true_index - 1)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        println!("union_bound (raw)     = {:.12e}", bound.unclamped);
        println!("union_bound (clamped) = {:.12e}", bound.probability);
        lines.push(format!(
            "kind,union_bound_raw,union_bound\nm-ary,{},{}",
            io::fmt_sig10(bound.unclamped),
            io::fmt_sig10(bound.probability)
        ));
    }
    if let Some(path) = &args.csv {
        fs::write(path, lines.join("\n") + "\n").map_err(|e| (2, e.to_string()))?;
    }
    Ok(())
}

/// Returns whether the file set a seed.
fn parse_config_file(
    path: &PathBuf,
    config: &mut ExperimentConfig,
) -> Result<bool, (u8, String)> {
    let text = fs::read_to_string(path).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    let mut seed_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| (2u8, format!("line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: String| (2u8, format!("line {}: {e}", lineno + 1));
        match key {
            "cols" => config.cols = value.parse().map_err(|e| bad(format!("{e}")))?,
            "sparsity" => config.sparsity_k = value.parse().map_err(|e| bad(format!("{e}")))?,
            "hypotheses" => {
                config.num_hypotheses = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            "rows" => {
                config.n_values = value
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|e| bad(format!("{e}"))))
                    .collect::<Result<_, _>>()?
            }
            "snr_db" => {
                config.snr_db_values = value
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|e| bad(format!("{e}"))))
                    .collect::<Result<_, _>>()?
            }
            "trials" => config.trials = value.parse().map_err(|e| bad(format!("{e}")))?,
            "seed" => {
                config.seed = value.parse().map_err(|e| bad(format!("{e}")))?;
                seed_seen = true;
            }
            "frame_mode" => config.frame_modes = parse_frame_modes(value).map_err(bad2)?,
            "classifier" => config.classifier_kind = parse_classifier(value).map_err(bad2)?,
            "redraw_per_trial" => {
                config.redraw_matrix_per_trial =
                    value.parse().map_err(|e| bad(format!("{e}")))?
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(seed_seen)
}

fn bad2(e: String) -> (u8, String) {
    (2, e)
}

fn parse_frame_modes(value: &str) -> Result<Vec<FrameMode>, String> {
    match value {
        "both" => Ok(vec![FrameMode::NonTight, FrameMode::Tightened]),
        other => other
            .parse::<FrameMode>()
            .map(|m| vec![m])
            .map_err(|e| e.to_string()),
    }
}

fn parse_classifier(value: &str) -> Result<ClassifierKind, String> {
    match value {
        "correlation" => Ok(ClassifierKind::Correlation),
        "matched-filter" => Ok(ClassifierKind::MatchedFilter),
        other => Err(format!("unknown classifier {other:?}")),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), (u8, String)> {
    let mut config = ExperimentConfig::desk_scale(0);
    let mut seed_set = false;
    if let Some(path) = &args.config {
        seed_set = parse_config_file(path, &mut config)?;
    }
    if let Some(v) = &args.rows {
        config.n_values = v.clone();
    }
    if let Some(v) = args.cols {
        config.cols = v;
    }
    if let Some(v) = &args.snr_db {
        config.snr_db_values = v.clone();
    }
    if let Some(v) = args.sparsity {
        config.sparsity_k = v;
    }
    if let Some(v) = args.hypotheses {
        config.num_hypotheses = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
        seed_set = true;
    }
    if !seed_set {
        return Err((2, "--seed is required (no wall-clock seeding)".into()));
    }
    if let Some(v) = &args.frame_mode {
        config.frame_modes = parse_frame_modes(v).map_err(bad2)?;
    }
    if let Some(v) = &args.classifier {
        config.classifier_kind = parse_classifier(v).map_err(bad2)?;
    }
    config.redraw_matrix_per_trial |= args.redraw_per_trial;

    let run = || compclass::run_sweep(&config);
    let result = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| (4u8, e.to_string()))?
            .install(run),
        None => run(),
    }
    .map_err(|e| (4, e.to_string()))?;

    fs::write(&args.output, result.to_csv()).map_err(|e| (2, e.to_string()))?;
    println!("wrote {} rows to {}", result.rows.len(), args.output.display());

    // Per-grid-point ordering verdict: tightened vs non-tight.
    let tight: Vec<&SweepRow> = result
        .rows
        .iter()
        .filter(|r| r.frame_mode == FrameMode::Tightened)
        .collect();
    let loose: Vec<&SweepRow> = result
        .rows
        .iter()
        .filter(|r| r.frame_mode == FrameMode::NonTight)
        .collect();
    if !tight.is_empty() && tight.len() == loose.len() {
        let mut ok = 0;
        for (t, l) in tight.iter().zip(&loose) {
            if t.estimate.rate <= l.estimate.rate + l.estimate.half_width() {
                ok += 1;
            }
        }
        println!(
            "tightened <= non-tight (within non-tight CI half-width) at {ok}/{} points",
            tight.len()
        );
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), (u8, String)> {
    let slack = 1e-10;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut violations = 0u64;
    for i in 0..args.instances {
        let k = [1usize, 5, 10][(i % 3) as usize];
        let n = 20 + 10 * ((i % 4) as usize);
        let cols = 100;
        let mseed = seeding::derive_seed(args.seed, 10, i, 0);
        let hseed = seeding::derive_seed(args.seed, 11, i, 0);
        let matrix = MeasurementMatrix::generate_gaussian(n, cols, mseed)
            .map_err(|e| (3u8, e.to_string()))?;
        let matrix = if args.pre_tightened {
            matrix.tighten(1.0).map_err(|e| (3u8, e.to_string()))?
        } else {
            matrix
        };
        let h = HypothesisSet::generate(cols, k, 2, 1.0, hseed)
            .map_err(|e| (3u8, e.to_string()))?;
        let gap = compclass::theorem2_gap(&matrix, &h.signals()[0], &h.signals()[1])
            .map_err(|e| (3u8, e.to_string()))?;
        let excess = (gap.ratio_before - gap.ratio_after) / gap.ratio_after;
        worst = worst.max(excess);
        if !gap.holds(slack) {
            violations += 1;
        }
    }
    if args.instances == 0 {
        println!("0 instances: vacuously satisfied");
        return Ok(());
    }
    println!(
        "checked {} instances; worst relative excess of ratio_before over ratio_after = {worst:.3e}",
        args.instances
    );
    if violations > 0 {
        return Err((
            5,
            format!("{violations} instances violate the tightening inequality"),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Tighten(args) => cmd_tighten(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
