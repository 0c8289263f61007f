//! Command-line surface: synthetic sequence generation, the exact
//! multi-realization test, the single-realization test, and power tables.
//!
//! Exit codes of the test subcommands encode the verdict for scripted
//! pipelines: 0 = renewal not rejected, 1 = renewal rejected, 2+ = error.

mod outputs;
mod resolve;

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use xalab_core::events::{parse_sequence, ParsedSequence, SequenceKind};
use xalab_core::generators::GeneratorSpec;
use xalab_core::meta::{power_lower_tailed, Calibration, GeoNull};
use xalab_core::plot::{render_power_svg, PowerCurve};
use xalab_core::single::{run_single, Adjustment, SingleConfig};
use xalab_core::xa::{
    default_config, run_exact, run_exact_on_samples, MethodChoice, SourceSummary, XAConfig,
    XAResult,
};
use xalab_core::{EventSequence, InterArrivalSequence, RngHandle};

use outputs::{digest_hex, write_run_outputs, RunFiles};
use resolve::{env_seed, Layered};

#[derive(Parser)]
#[command(
    name = "xalab",
    version,
    about = "Detect memory between events via latency/aging experiments on inter-event times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic event or waiting-time sequence.
    Generate(GenerateArgs),
    /// Exact test: repeated aged-original vs aged-shuffle comparisons over
    /// independent realization pairs.
    Xa(XaArgs),
    /// Approximated test for one observed sequence (windows + bootstrap).
    XaSingle(XaSingleArgs),
    /// Analytic power of the lower-tailed z-test, optionally swept.
    Power(PowerArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator kind: poisson | pareto_renewal | abs_ar1 | exp_ar1 |
    /// stoch_vol | hawkes | polya_urn (superposition needs --spec).
    #[arg(long)]
    kind: Option<String>,
    /// Compact spec string, e.g. "poisson:lambda=1,n=3000"; overrides --kind.
    #[arg(long)]
    spec: Option<String>,
    /// Rate (poisson).
    #[arg(long)]
    lambda: Option<f64>,
    /// Tail exponent (pareto_renewal).
    #[arg(long)]
    mu: Option<f64>,
    /// Scale (pareto_renewal).
    #[arg(long)]
    theta: Option<f64>,
    /// AR(1) coefficient (abs_ar1, exp_ar1) or decay rate (hawkes).
    #[arg(long)]
    beta: Option<f64>,
    /// Time-unit scale (exp_ar1).
    #[arg(long)]
    scale: Option<f64>,
    /// Volatility persistence (stoch_vol).
    #[arg(long)]
    b: Option<f64>,
    /// Volatility noise scale (stoch_vol).
    #[arg(long)]
    s: Option<f64>,
    /// Baseline rate (hawkes).
    #[arg(long)]
    lambda0: Option<f64>,
    /// Excitation jump (hawkes).
    #[arg(long)]
    alpha: Option<f64>,
    /// Initial balls of color A (polya_urn).
    #[arg(long)]
    a0: Option<u64>,
    /// Initial balls of color B (polya_urn).
    #[arg(long)]
    b0: Option<u64>,
    /// Number of waiting times or draws.
    #[arg(long)]
    n: Option<usize>,
    /// Time horizon (hawkes).
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file for the sequence (a manifest side-file is written too).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct XaArgs {
    /// Generator spec string or a file containing one.
    #[arg(long)]
    spec: Option<String>,
    /// Recorded realizations, one file per realization.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// How input files are read: timestamps | taus.
    #[arg(long, default_value = "taus")]
    input_mode: String,
    /// Break duplicate timestamps by adding uniform noise in (0, eps).
    #[arg(long)]
    jitter: Option<f64>,
    /// Flat key=value config file (flags override it).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trials (realization pairs) per age.
    #[arg(long = "N")]
    n_trials: Option<usize>,
    /// Number of ages on the grid.
    #[arg(long = "Ta")]
    t_a_count: Option<usize>,
    #[arg(long = "ta-min")]
    t_a_min: Option<f64>,
    #[arg(long = "ta-max")]
    t_a_max: Option<f64>,
    /// Two-sample engine: ks | permutation.
    #[arg(long)]
    method: Option<String>,
    /// Permutation budget per cell.
    #[arg(long)]
    smax: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Z calibration: stripe_calibrated | paper_literal.
    #[arg(long)]
    calibration: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Also render plot.svg.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct XaSingleArgs {
    /// The observed sequence.
    #[arg(long)]
    input: PathBuf,
    /// How the input file is read: timestamps | taus.
    #[arg(long, default_value = "taus")]
    input_mode: String,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Waiting times per window.
    #[arg(long)]
    tw: Option<usize>,
    #[arg(long = "Ta")]
    t_a_count: Option<usize>,
    #[arg(long = "ta-min")]
    t_a_min: Option<f64>,
    #[arg(long = "ta-max")]
    t_a_max: Option<f64>,
    #[arg(long)]
    smax: Option<usize>,
    /// Multiple-testing adjustment: bonferroni | none.
    #[arg(long)]
    adjust: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    calibration: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct PowerArgs {
    /// Alternative mean of the geometric means.
    #[arg(long)]
    mu1: f64,
    #[arg(long = "N", default_value_t = 100)]
    n_trials: usize,
    #[arg(long = "Ta", default_value_t = 100)]
    t_a_count: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "stripe_calibrated")]
    calibration: String,
    /// Sweep variable: n | ta (prints one row per grid point).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value_t = 10)]
    sweep_from: usize,
    #[arg(long, default_value_t = 500)]
    sweep_to: usize,
    #[arg(long, default_value_t = 25)]
    sweep_steps: usize,
    /// Render the sweep as an SVG curve.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Xa(args) => cmd_xa(args),
        Command::XaSingle(args) => cmd_xa_single(args),
        Command::Power(args) => cmd_power(args),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

type CmdResult = Result<ExitCode, String>;

fn build_generate_spec(args: &GenerateArgs) -> Result<GeneratorSpec, String> {
    if let Some(spec) = &args.spec {
        return GeneratorSpec::parse(spec).map_err(|e| e.to_string());
    }
    let kind = args
        .kind
        .as_deref()
        .ok_or("either --kind or --spec is required")?;
    let need_f = |name: &str, v: Option<f64>| v.ok_or(format!("{kind} requires --{name}"));
    let need_n = |v: Option<usize>| v.ok_or(format!("{kind} requires --n"));
    let spec = match kind {
        "poisson" => GeneratorSpec::Poisson {
            lambda: need_f("lambda", args.lambda)?,
            n: need_n(args.n)?,
        },
        "pareto_renewal" => GeneratorSpec::ParetoRenewal {
            mu: need_f("mu", args.mu)?,
            theta: need_f("theta", args.theta)?,
            n: need_n(args.n)?,
        },
        "abs_ar1" => GeneratorSpec::AbsAr1 {
            beta: need_f("beta", args.beta)?,
            n: need_n(args.n)?,
        },
        "exp_ar1" => GeneratorSpec::ExpAr1 {
            beta: need_f("beta", args.beta)?,
            scale: args.scale.unwrap_or(1.0),
            n: need_n(args.n)?,
        },
        "stoch_vol" => GeneratorSpec::StochVol {
            b: need_f("b", args.b)?,
            s: need_f("s", args.s)?,
            n: need_n(args.n)?,
        },
        "hawkes" => GeneratorSpec::Hawkes {
            lambda0: need_f("lambda0", args.lambda0)?,
            alpha: need_f("alpha", args.alpha)?,
            beta: need_f("beta", args.beta)?,
            horizon: need_f("horizon", args.horizon)?,
        },
        "polya_urn" => GeneratorSpec::PolyaUrn {
            a0: args.a0.ok_or("polya_urn requires --a0")?,
            b0: args.b0.ok_or("polya_urn requires --b0")?,
            n: need_n(args.n)?,
        },
        "superposition" => {
            return Err("superposition is specified via --spec, e.g. \
                        --spec \"superposition:a=(poisson:lambda=8,n=1000),b=(...)\""
                .into())
        }
        other => return Err(format!("unknown generator kind {other:?}")),
    };
    Ok(spec)
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let spec = build_generate_spec(&args)?;
    let warnings = spec.validate().map_err(|e| e.to_string())?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let seed = args.seed.or_else(env_seed).unwrap_or(0);
    let rng = RngHandle::new(seed);
    let values = spec.generate_values(&rng).map_err(|e| e.to_string())?;
    let kind_line = match spec.natural_output() {
        SequenceKind::Timestamps => "mode: timestamps",
        SequenceKind::InterArrivals => "mode: taus",
    };
    let header = format!("{}\n{}", spec.to_spec_string(), kind_line);
    let text = xalab_core::events::format_sequence(&values, Some(&header));
    std::fs::write(&args.out, &text)
        .map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;

    let manifest = xalab_core::report::manifest_text(&[
        ("command".into(), "generate".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("spec".into(), spec.to_spec_string()),
        ("seed".into(), seed.to_string()),
        ("values".into(), values.len().to_string()),
        ("output".into(), args.out.display().to_string()),
        ("output_digest".into(), digest_hex(text.as_bytes())),
        ("created_unix".into(), outputs::unix_now().to_string()),
    ]);
    let manifest_path = args.out.with_extension("manifest.txt");
    std::fs::write(&manifest_path, manifest)
        .map_err(|e| format!("cannot write {}: {e}", manifest_path.display()))?;
    println!("wrote {} values to {}", values.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_mode(s: &str) -> Result<SequenceKind, String> {
    match s {
        "timestamps" => Ok(SequenceKind::Timestamps),
        "taus" => Ok(SequenceKind::InterArrivals),
        other => Err(format!(
            "unknown input mode {other:?} (want timestamps | taus)"
        )),
    }
}

/// Integer tick data is legal but discreteness makes the KS test
/// conservative; surface that once per file.
fn warn_if_tick_data(path: &Path, values: &[f64]) {
    if !values.is_empty() && values.iter().all(|v| v.fract() == 0.0) {
        eprintln!(
            "warning: {} contains integer ticks only; discreteness makes the KS test \
             conservative (consider --jitter or the permutation method)",
            path.display()
        );
    }
}

fn read_taus_file(
    path: &PathBuf,
    mode: SequenceKind,
    jitter: Option<f64>,
    seed: u64,
) -> Result<(InterArrivalSequence, String), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = digest_hex(text.as_bytes());
    let jitter_handle = RngHandle::new(seed).child(u64::MAX);
    let parsed = parse_sequence(&text, mode, jitter.map(|eps| (eps, &jitter_handle)))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let taus = match parsed {
        ParsedSequence::InterArrivals(t) => t,
        ParsedSequence::Events(e) => {
            warn_if_tick_data(path, e.times());
            xalab_core::events::to_interarrivals(&e).map_err(|e| e.to_string())?
        }
    };
    Ok((taus, digest))
}

fn verdict_exit(result: &XAResult) -> ExitCode {
    if result.reject_renewal {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

enum Source {
    Spec(GeneratorSpec),
    Recorded(Vec<EventSequence>),
}

fn cmd_xa(args: XaArgs) -> CmdResult {
    let layered = Layered::from_config_file(args.config.as_deref())?;
    let seed = args
        .seed
        .or(layered.get_parsed::<u64>("seed")?)
        .or_else(env_seed)
        .unwrap_or(0);
    let mode = parse_mode(&args.input_mode)?;

    let mut manifest: Vec<(String, String)> = vec![
        ("command".into(), "xa".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ];
    let mut run_warnings: Vec<String> = Vec::new();

    let spec_arg = args
        .spec
        .clone()
        .or(layered.get("spec").map(str::to_string));
    let source = if let Some(spec_str) = spec_arg {
        let spec_text = {
            let p = PathBuf::from(&spec_str);
            if p.is_file() {
                let body = std::fs::read_to_string(&p)
                    .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                body.lines()
                    .map(str::trim)
                    .find(|l| !l.is_empty() && !l.starts_with('#'))
                    .unwrap_or("")
                    .to_string()
            } else {
                spec_str
            }
        };
        let spec = GeneratorSpec::parse(&spec_text).map_err(|e| e.to_string())?;
        run_warnings.extend(spec.validate().map_err(|e| e.to_string())?);
        manifest.push(("spec".into(), spec.to_spec_string()));
        manifest.push((
            "input_digest".into(),
            digest_hex(spec.to_spec_string().as_bytes()),
        ));
        Source::Spec(spec)
    } else if !args.input.is_empty() {
        let mut events = Vec::new();
        let mut digests = Vec::new();
        let jitter_handle = RngHandle::new(seed).child(u64::MAX);
        for path in &args.input {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            digests.push(digest_hex(text.as_bytes()));
            let parsed = parse_sequence(&text, mode, args.jitter.map(|eps| (eps, &jitter_handle)))
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let seq = match parsed {
                ParsedSequence::Events(e) => {
                    warn_if_tick_data(path, e.times());
                    e
                }
                ParsedSequence::InterArrivals(t) => t.to_events_anchored(0.0),
            };
            events.push(seq);
        }
        manifest.push(("inputs".into(), args.input.len().to_string()));
        manifest.push((
            "input_digest".into(),
            digest_hex(digests.join(",").as_bytes()),
        ));
        Source::Recorded(events)
    } else {
        return Err("either --spec or --input is required".into());
    };

    let opt_t_a_min = args.t_a_min.or(layered.get_parsed::<f64>("ta-min")?);
    let opt_t_a_max = args.t_a_max.or(layered.get_parsed::<f64>("ta-max")?);

    // The span-derived default grid is probed only when some grid value is
    // actually missing, so fully specified runs work on any input length.
    let mut default_warnings = Vec::new();
    let defaults = if opt_t_a_min.is_none() || opt_t_a_max.is_none() {
        let summary_taus = match &source {
            Source::Spec(spec) => xalab_core::events::to_interarrivals(
                &spec
                    .generate_events(&RngHandle::new(seed).child(u64::MAX - 1))
                    .map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?,
            Source::Recorded(events) => {
                xalab_core::events::to_interarrivals(&events[0]).map_err(|e| e.to_string())?
            }
        };
        let summary = SourceSummary::from_taus(&summary_taus).map_err(|e| e.to_string())?;
        let (d, w) = default_config(&summary, seed).map_err(|e| e.to_string())?;
        default_warnings = w;
        Some(d)
    } else {
        None
    };
    let default = |f: fn(&XAConfig) -> f64| defaults.as_ref().map(f);

    let config = XAConfig {
        t_a_min: opt_t_a_min
            .or_else(|| default(|d| d.t_a_min))
            .expect("defaults computed when missing"),
        t_a_max: opt_t_a_max
            .or_else(|| default(|d| d.t_a_max))
            .expect("defaults computed when missing"),
        t_a_count: args
            .t_a_count
            .or(layered.get_parsed::<usize>("Ta")?)
            .unwrap_or(20),
        trials: args
            .n_trials
            .or(layered.get_parsed::<usize>("N")?)
            .unwrap_or(100),
        method: args
            .method
            .as_deref()
            .or(layered.get("method"))
            .map(str::parse::<MethodChoice>)
            .transpose()
            .map_err(|e| e.to_string())?
            .unwrap_or(MethodChoice::Ks),
        s_max: args
            .smax
            .or(layered.get_parsed::<usize>("smax")?)
            .unwrap_or(1000),
        alpha: args
            .alpha
            .or(layered.get_parsed::<f64>("alpha")?)
            .unwrap_or(0.05),
        calibration: args
            .calibration
            .as_deref()
            .or(layered.get("calibration"))
            .map(str::parse::<Calibration>)
            .transpose()
            .map_err(|e| e.to_string())?
            .unwrap_or(Calibration::StripeCalibrated),
        seed,
    };
    // The sizing advisory applies only when the default grid is in use.
    if opt_t_a_max.is_none() {
        run_warnings.extend(default_warnings);
    }

    let mut result = match &source {
        Source::Spec(spec) => run_exact(spec, &config).map_err(|e| e.to_string())?,
        Source::Recorded(events) => {
            run_exact_on_samples(events, &config).map_err(|e| e.to_string())?
        }
    };
    result.warnings.splice(0..0, run_warnings);

    for (k, v) in resolve::config_echo(&result.config) {
        manifest.push((format!("config.{k}"), v));
    }
    manifest.push(("created_unix".into(), outputs::unix_now().to_string()));

    let files = RunFiles {
        out_dir: args.out_dir.clone(),
        plot: args.plot,
        title: "xa".into(),
    };
    write_run_outputs(&result, &files, manifest)?;
    print_verdict(&result);
    Ok(verdict_exit(&result))
}

fn cmd_xa_single(args: XaSingleArgs) -> CmdResult {
    let layered = Layered::from_config_file(args.config.as_deref())?;
    let seed = args
        .seed
        .or(layered.get_parsed::<u64>("seed")?)
        .or_else(env_seed)
        .unwrap_or(0);
    let mode = parse_mode(&args.input_mode)?;
    let (taus, digest) = read_taus_file(&args.input, mode, args.jitter, seed)?;

    let defaults = SingleConfig::default();
    let config = SingleConfig {
        t_w: args
            .tw
            .or(layered.get_parsed::<usize>("tw")?)
            .unwrap_or(defaults.t_w),
        t_a_count: args
            .t_a_count
            .or(layered.get_parsed::<usize>("Ta")?)
            .unwrap_or(defaults.t_a_count),
        s_max: args
            .smax
            .or(layered.get_parsed::<usize>("smax")?)
            .unwrap_or(defaults.s_max),
        alpha: args
            .alpha
            .or(layered.get_parsed::<f64>("alpha")?)
            .unwrap_or(defaults.alpha),
        seed,
        adjust: args
            .adjust
            .as_deref()
            .or(layered.get("adjust"))
            .map(str::parse::<Adjustment>)
            .transpose()
            .map_err(|e| e.to_string())?
            .unwrap_or(defaults.adjust),
        calibration: args
            .calibration
            .as_deref()
            .or(layered.get("calibration"))
            .map(str::parse::<Calibration>)
            .transpose()
            .map_err(|e| e.to_string())?
            .unwrap_or(defaults.calibration),
        t_a_min: args.t_a_min.or(layered.get_parsed::<f64>("ta-min")?),
        t_a_max: args.t_a_max.or(layered.get_parsed::<f64>("ta-max")?),
    };

    let result = run_single(&taus, &config).map_err(|e| e.to_string())?;

    let mut manifest: Vec<(String, String)> = vec![
        ("command".into(), "xa-single".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("input".into(), args.input.display().to_string()),
        ("input_digest".into(), digest),
        ("tw".into(), config.t_w.to_string()),
        ("adjust".into(), config.adjust.as_str().into()),
    ];
    for (k, v) in resolve::config_echo(&result.config) {
        manifest.push((format!("config.{k}"), v));
    }
    manifest.push(("created_unix".into(), outputs::unix_now().to_string()));

    let files = RunFiles {
        out_dir: args.out_dir.clone(),
        plot: args.plot,
        title: "xa-single".into(),
    };
    write_run_outputs(&result, &files, manifest)?;
    print_verdict(&result);
    Ok(verdict_exit(&result))
}

fn print_verdict(result: &XAResult) {
    let verdict = if result.reject_renewal {
        "renewal REJECTED (memory between events detected)"
    } else {
        "renewal not rejected"
    };
    println!(
        "z_g = {:.4}, {} of {} ages in the 95% stripe: {verdict}",
        result.z_g,
        result.ages.iter().filter(|a| a.in_stripe).count(),
        result.ages.len()
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_power(args: PowerArgs) -> CmdResult {
    let calibration: Calibration = args
        .calibration
        .parse()
        .map_err(|e: xalab_core::Error| e.to_string())?;
    let grid = |from: usize, to: usize, steps: usize| -> Vec<usize> {
        if steps <= 1 || from >= to {
            return vec![from.max(2)];
        }
        let mut out: Vec<usize> = (0..steps)
            .map(|i| {
                let f = i as f64 / (steps - 1) as f64;
                (from as f64 * (to as f64 / from as f64).powf(f)).round() as usize
            })
            .collect();
        out.dedup();
        out
    };
    println!("n,t_a_count,alpha,mu1,power");
    let mut rows: Vec<(f64, f64)> = Vec::new();
    match args.sweep.as_deref() {
        None => {
            let p = power_lower_tailed(
                args.mu1,
                args.n_trials,
                args.t_a_count,
                args.alpha,
                calibration,
            )
            .map_err(|e| e.to_string())?;
            println!(
                "{},{},{},{},{}",
                args.n_trials, args.t_a_count, args.alpha, args.mu1, p
            );
        }
        Some("n") => {
            for n in grid(args.sweep_from.max(2), args.sweep_to, args.sweep_steps) {
                let p = power_lower_tailed(args.mu1, n, args.t_a_count, args.alpha, calibration)
                    .map_err(|e| e.to_string())?;
                println!("{},{},{},{},{}", n, args.t_a_count, args.alpha, args.mu1, p);
                rows.push((n as f64, p));
            }
        }
        Some("ta") => {
            for t in grid(args.sweep_from.max(2), args.sweep_to, args.sweep_steps) {
                let p = power_lower_tailed(args.mu1, args.n_trials, t, args.alpha, calibration)
                    .map_err(|e| e.to_string())?;
                println!("{},{},{},{},{}", args.n_trials, t, args.alpha, args.mu1, p);
                rows.push((t as f64, p));
            }
        }
        Some(other) => return Err(format!("unknown sweep variable {other:?} (want n | ta)")),
    }
    if let Some(path) = &args.plot {
        if rows.is_empty() {
            return Err("--plot needs --sweep".into());
        }
        let (label, x_label) = match args.sweep.as_deref() {
            Some("n") => (format!("T_a = {}", args.t_a_count), "N (trials per age)"),
            _ => (format!("N = {}", args.n_trials), "T_a (number of ages)"),
        };
        let svg = render_power_svg(
            &format!("power of the lower-tailed z-test (mu1 = {})", args.mu1),
            x_label,
            &[PowerCurve {
                label,
                points: rows,
            }],
        )
        .map_err(|e| e.to_string())?;
        std::fs::write(path, svg).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let mu0 = GeoNull::new(args.n_trials)
        .map_err(|e| e.to_string())?
        .mu0();
    eprintln!(
        "note: null mean mu0(N={}) = {mu0:.6}; power at mu1 = mu0 equals alpha",
        args.n_trials
    );
    Ok(ExitCode::SUCCESS)
}
