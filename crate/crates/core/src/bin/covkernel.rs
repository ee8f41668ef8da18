use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use covariant_kernel::bounds_check::{check_bounds_range, BoundsOptions};
use covariant_kernel::experiment::{
    run_experiment, ExperimentConfig, OutputFormat, QubitRange, Surface,
};
use covariant_kernel::noise::{NoiseConfig, NoiseKind};
use covariant_kernel::report::{export_heatmap, export_report, report_csv, report_json};
use covariant_kernel::theory::{self, VariancePrediction};
use covariant_kernel::Error;

#[derive(Parser)]
#[command(name = "covkernel", version, about = "Covariant quantum kernel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo trials and write a report.
    Simulate(SimulateArgs),
    /// Print closed-form moment predictions.
    Theory(TheoryArgs),
    /// Check noisy kernels against their worst-case envelopes.
    VerifyBounds(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inclusive qubit range, e.g. 2..10.
    #[arg(long)]
    qubits: Option<QubitRange>,
    /// Comma-separated coset counts, e.g. 2,3,5.
    #[arg(long, value_delimiter = ',')]
    cosets: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// none | fiducial | selection | representation
    #[arg(long)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// train | full
    #[arg(long)]
    surface: Option<Surface>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Writes the kernel of the first trial of the first (N, m) as CSV.
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    /// Number of cosets.
    #[arg(long)]
    m: usize,
    /// Subset size (defaults to N).
    #[arg(long)]
    n: Option<usize>,
    /// Number of qubits.
    #[arg(long = "N")]
    num_qubits: usize,
    /// Uniform overlap; defaults to 2^-N.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value = "2..8")]
    qubits: QubitRange,
    /// Restrict to one noise family; all three by default.
    #[arg(long)]
    noise: Option<NoiseKind>,
    #[arg(long, default_value_t = 2)]
    cosets: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn build_config(args: SimulateArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(q) = args.qubits {
        cfg.qubits = q;
    }
    if let Some(c) = args.cosets {
        cfg.cosets = c;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(k) = args.noise {
        cfg.noise.kind = k;
    }
    if let Some(e) = args.epsilon {
        cfg.noise.epsilon = e;
    }
    if let Some(s) = args.surface {
        cfg.surface = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if args.heatmap.is_some() {
        cfg.heatmap = args.heatmap;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let cfg = build_config(args)?;
    let outcome = run_experiment(&cfg)?;
    match &cfg.out {
        Some(path) => export_report(&outcome.report, path, cfg.format)?,
        None => match cfg.format {
            OutputFormat::Json => print!("{}", report_json(&outcome.report)?),
            OutputFormat::Csv => print!("{}", report_csv(&outcome.report)?),
        },
    }
    if let Some(path) = &cfg.heatmap {
        export_heatmap(&outcome.first_kernel, path)?;
    }
    Ok(())
}

fn theory_cmd(args: TheoryArgs) -> Result<(), Error> {
    let n = args.n.unwrap_or(args.num_qubits);
    let alpha = args.alpha.unwrap_or_else(|| theory::haar_alpha(args.num_qubits));
    let out = json!({
        "m": args.m,
        "n": n,
        "N": args.num_qubits,
        "alpha": alpha,
        "predictions": [
            VariancePrediction::uniform(args.m, n, alpha)?,
            VariancePrediction::asymptotic(args.m, n, args.num_qubits)?,
            VariancePrediction::limit(args.m)?,
        ],
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn verify_bounds(args: VerifyArgs) -> Result<(), Error> {
    NoiseConfig::new(NoiseKind::None, args.epsilon)?;
    let kinds = match args.noise {
        Some(k) => vec![k],
        None => vec![NoiseKind::Fiducial, NoiseKind::Selection, NoiseKind::Representation],
    };
    let opts = BoundsOptions {
        epsilon: args.epsilon,
        num_cosets: args.cosets,
        trials: args.trials,
        seed: args.seed,
    };
    let checks = check_bounds_range(&kinds, args.qubits, &opts)?;
    println!("{}", serde_json::to_string_pretty(&json!({ "epsilon": args.epsilon, "checks": checks }))?);
    let violations: usize = checks.iter().map(|c| c.violations).sum();
    if violations > 0 {
        return Err(Error::BoundViolation { violations });
    }
    Ok(())
}

fn error_record(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return error_record("usage", e.to_string().trim_end()),
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Theory(a) => theory_cmd(a),
        Command::VerifyBounds(a) => verify_bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => error_record(e.kind(), &e.to_string()),
    }
}
