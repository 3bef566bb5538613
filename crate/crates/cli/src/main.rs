//! `magicproj`: run magic-vs-randomness experiments from the command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 verification failure,
//! 3 resource guard.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magicproj::ensemble::NormKind;
use magicproj::exper::{
    fit_curves, parse_depths, parse_theta_spec, run_decay, run_linear, run_theory, run_variance, run_verify,
    sidecar_path, write_csv, write_csv_file, write_sidecar, ExperimentConfig, ExperimentKind, ThetaSpec,
};
use magicproj::parallel::Execution;
use magicproj::{Error, NumericPolicy};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "magicproj", version, about = "Magic versus projected-ensemble randomness experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean design distance versus circuit depth.
    Decay(Opts),
    /// Extrapolated distance versus magic, with the closed-form prediction.
    Linear(Opts),
    /// Sample variance of the distance across subsystem sizes.
    Variance(Opts),
    /// Closed-form coefficients, ε estimate and unmeasured distance, as JSON.
    Theory(Opts),
    /// Run the oracle and invariant checks.
    Verify(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Unmeasured qubits.
    #[arg(long = "na")]
    n_a: Option<usize>,
    /// Measured qubits.
    #[arg(long = "nb")]
    n_b: Option<usize>,
    /// Angles (`0,pi/8,pi/4`), `linspace:0:pi/4:5`, or `magic:0,0.25,0.5`.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Depths and ranges: `1,2,5`, `1..=100`, `0..200:10`.
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    /// Moment order.
    #[arg(long)]
    t: Option<usize>,
    /// trace, hs or hs2.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the JSON sidecar goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "prob-floor")]
    prob_floor: Option<f64>,
    /// Use diag(1, e^{iπ/4}) as the phase gate.
    #[arg(long = "literal-paper-s")]
    literal_paper_s: bool,
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subsystem sizes for the variance sweep, e.g. `2,3,4`.
    #[arg(long = "na-sweep", value_delimiter = ',')]
    na_sweep: Option<Vec<usize>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    Config(String),
    Verification(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource(_) => Failure::Resource(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn load_config(kind: ExperimentKind, opts: &Opts) -> Result<ExperimentConfig, Failure> {
    let mut doc = serde_json::to_value(ExperimentConfig::defaults_for(kind)).map_err(Error::from)?;
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("bad config file {}: {e}", path.display())))?;
        let Value::Object(fields) = file else {
            return Err(Failure::Config("config file must hold a JSON object".into()));
        };
        for (k, v) in fields {
            doc[k] = v;
        }
    }
    doc["experiment"] = serde_json::to_value(kind).map_err(Error::from)?;
    let mut cfg = ExperimentConfig::from_json(&doc.to_string())?;

    if let Some(v) = opts.n_a {
        cfg.n_a = v;
    }
    if let Some(v) = opts.n_b {
        cfg.n_b = v;
    }
    if let Some(spec) = &opts.theta {
        match parse_theta_spec(spec)? {
            ThetaSpec::Angles(v) => {
                cfg.theta_list = v;
                cfg.magic_targets = None;
            }
            ThetaSpec::Magic(v) => cfg.magic_targets = Some(v),
        }
    }
    if let Some(spec) = &opts.depths {
        cfg.depths = parse_depths(spec)?;
    }
    if let Some(v) = opts.reps {
        cfg.reps = v;
    }
    if let Some(v) = opts.t {
        cfg.t = v;
    }
    if let Some(v) = &opts.norm {
        cfg.norm_kind = v.parse::<NormKind>()?;
    }
    if let Some(v) = opts.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = opts.prob_floor {
        cfg.prob_floor = v;
    }
    if let Some(v) = &opts.out {
        cfg.out_path = Some(v.display().to_string());
    }
    if opts.literal_paper_s {
        cfg.literal_paper_s = true;
    }
    if let Some(v) = &opts.na_sweep {
        cfg.na_sweep = v.clone();
    }
    Ok(cfg)
}

fn emit<T: serde::Serialize>(
    cfg: &ExperimentConfig,
    records: &[magicproj::exper::ExperimentRecord],
    results: &T,
) -> Result<(), Failure> {
    match &cfg.out_path {
        Some(path) => {
            let path = Path::new(path);
            write_csv_file(path, records)?;
            write_sidecar(&sidecar_path(path), cfg, results)?;
        }
        None => write_csv(std::io::stdout().lock(), records)?,
    }
    Ok(())
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
    Ok(())
}

fn run(kind: ExperimentKind, opts: &Opts) -> Result<(), Failure> {
    let cfg = load_config(kind, opts)?;
    let policy = NumericPolicy::default();
    let exec = if opts.sequential { Execution::Sequential } else { Execution::Parallel };
    match kind {
        ExperimentKind::Decay => {
            let records = run_decay(&cfg, exec, &policy)?;
            let fits = fit_curves(&records);
            for f in &fits {
                eprintln!(
                    "theta {:.6}  magic {:.6}  asymptote {:.6e} +/- {:.1e}  ({:?})",
                    f.theta, f.magic, f.fit.offset_c, f.fit.offset_std_err, f.fit.status
                );
            }
            emit(&cfg, &records, &fits)
        }
        ExperimentKind::Linear => {
            let out = run_linear(&cfg, exec, &policy)?;
            for p in &out.points {
                let mut line = format!("magic {:.6}  extrapolated {:.6e} +/- {:.1e}", p.magic, p.extrapolated, p.std_err);
                if let (Some(pred), Some(eps)) = (p.prediction, p.error_estimate) {
                    line += &format!("  prediction {pred:.6e}  epsilon {eps:.3e}");
                }
                eprintln!("{line}");
            }
            if let Some(l) = &out.line {
                eprintln!("slope {:.6e}  intercept {:.6e}  R^2 {:.4}", l.slope, l.intercept, l.r_squared);
            }
            let summary = serde_json::json!({ "points": out.points, "line": out.line, "coefficients": out.coefficients });
            emit(&cfg, &out.records, &summary)
        }
        ExperimentKind::Variance => {
            let out = run_variance(&cfg, exec, &policy)?;
            for p in &out.points {
                eprintln!("n_a {}  variance {:.6e}", p.n_a, p.variance);
                if let Some(w) = &p.warning {
                    eprintln!("warning: {w}");
                }
            }
            emit(&cfg, &out.records, &out.points)
        }
        ExperimentKind::Theory => {
            let report = run_theory(&cfg, &policy)?;
            if let Some(path) = &cfg.out_path {
                std::fs::write(path, serde_json::to_string_pretty(&report).map_err(Error::from)?).map_err(Error::from)?;
            }
            print_json(&report)
        }
        ExperimentKind::Verify => {
            let report = run_verify(cfg.literal_paper_s, exec, &policy)?;
            print!("{}", report.render());
            if let Some(path) = &cfg.out_path {
                std::fs::write(path, serde_json::to_string_pretty(&report).map_err(Error::from)?).map_err(Error::from)?;
            }
            if report.ok() {
                Ok(())
            } else {
                Err(Failure::Verification("one or more checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, opts) = match &cli.command {
        Command::Decay(o) => (ExperimentKind::Decay, o),
        Command::Linear(o) => (ExperimentKind::Linear, o),
        Command::Variance(o) => (ExperimentKind::Variance, o),
        Command::Theory(o) => (ExperimentKind::Theory, o),
        Command::Verify(o) => (ExperimentKind::Verify, o),
    };
    let result = match opts.threads {
        Some(0) => Err(Failure::Config("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(kind, opts)),
            Err(e) => Err(Failure::Resource(format!("cannot start thread pool: {e}"))),
        },
        None => run(kind, opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
