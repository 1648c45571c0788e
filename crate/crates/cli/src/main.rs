use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use safe_lipschitz::harness::{
    bench, export_plot_data, read_trace, run, write_csv, InitialPoints, ProblemSpec, RunConfig,
    RunReport,
};
use safe_lipschitz::noise::NoiseKind;
use safe_lipschitz::testbed::problem_ids;
use safe_lipschitz::Error;

#[derive(Parser)]
#[command(
    name = "safe-lipschitz",
    version,
    about = "Safe global maximization of noisy Lipschitz functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run both phases on one problem.
    Run(RunArgs),
    /// Median counts over seeds for catalog problems, as CSV.
    Bench(BenchArgs),
    /// Plot data from a finished run's trace and report.
    Export(ExportArgs),
}

#[derive(Args)]
struct Overrides {
    /// Noise model: zero, uniform, clipped-gaussian, fixed-bias-plus,
    /// fixed-bias-minus, alternating-bias.
    #[arg(long)]
    noise: Option<NoiseKind>,
    /// Noise bound as a fraction of the objective's range.
    #[arg(long)]
    delta_frac: Option<f64>,
    /// Absolute safety threshold.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Threshold as min f + fraction * range.
    #[arg(long)]
    h_frac: Option<f64>,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    sigma_frac: Option<f64>,
    #[arg(long)]
    eps_expand: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    parallel_subregions: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(n) = self.noise {
            cfg.noise = n;
        }
        if let Some(v) = self.delta_frac {
            cfg.delta = None;
            cfg.delta_fraction = Some(v);
        }
        if let Some(v) = self.h {
            cfg.threshold = Some(v);
        }
        if let Some(v) = self.h_frac {
            cfg.threshold = None;
            cfg.threshold_fraction = Some(v);
        }
        if let Some(v) = self.nu {
            cfg.nu = v;
        }
        if let Some(v) = self.sigma_frac {
            cfg.sigma_fraction = v;
        }
        if let Some(v) = self.eps_expand {
            cfg.eps_expand = v;
        }
        if let Some(v) = self.eps_max {
            cfg.eps_max = v;
        }
        if self.parallel_subregions {
            cfg.parallel_subregions = true;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog problem id (1-18).
    #[arg(long)]
    problem: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated initial safe points, or "auto".
    #[arg(long, allow_hyphen_values = true)]
    init_points: Option<String>,
    /// Write the per-call trace here (one JSON object per line).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated catalog ids; all problems by default.
    #[arg(long, value_delimiter = ',')]
    problem: Vec<u32>,
    /// Number of seeds, 0..N.
    #[arg(long, default_value_t = 30)]
    seeds: u64,
    /// CSV output path; stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write medians, interquartile ranges and seeds as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Output path; stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_points(text: &str) -> Result<InitialPoints, Error> {
    if text.trim() == "auto" {
        return Ok(InitialPoints::default());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad initial point '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(InitialPoints::Explicit)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = match (&args.config, args.problem) {
        (Some(path), _) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(id)) => RunConfig::catalog(id),
        (None, None) => {
            return Err(Error::Config(
                "either --config or --problem is required".into(),
            ))
        }
    };
    if let (Some(_), Some(id)) = (&args.config, args.problem) {
        cfg.problem = ProblemSpec::Catalog(id);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = &args.init_points {
        cfg.initial_points = parse_points(p)?;
    }
    if args.trace.is_some() {
        cfg.trace = args.trace.clone();
    }
    if args.report.is_some() {
        cfg.report = args.report.clone();
    }
    args.overrides.apply(&mut cfg);

    let outcome = run(&cfg)?;
    if cfg.report.is_none() {
        write_output(None, &(outcome.report.to_json()? + "\n"))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let problems: Vec<u32> = if args.problem.is_empty() {
        problem_ids().collect()
    } else {
        args.problem.clone()
    };
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let mut template = RunConfig::catalog(problems.first().copied().unwrap_or(1));
    args.overrides.apply(&mut template);
    let summary = bench(&problems, &seeds, &template)?;

    let mut csv = Vec::new();
    write_csv(&summary.medians, &mut csv)?;
    write_output(args.out.as_ref(), &String::from_utf8_lossy(&csv))?;
    if let Some(path) = &args.summary {
        std::fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Error> {
    let trace = read_trace(BufReader::new(File::open(&args.trace)?))?;
    let report = RunReport::from_json(&std::fs::read_to_string(&args.report)?)?;
    let bundle = export_plot_data(&trace, &report);
    let text = serde_json::to_string_pretty(&bundle)? + "\n";
    match &args.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => write_output(None, &text)?,
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SafetyViolation { .. } => 3,
        Error::Config(_)
        | Error::UnknownProblem(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInput(_)
        | Error::InvalidProblem(_)
        | Error::OutsideDomain { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
