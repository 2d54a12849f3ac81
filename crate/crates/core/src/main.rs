#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quadbound::bounds::{self, BoundValue};
use quadbound::ensemble::{recovery_experiment, RecoveryConfig, RecoverySummary};
use quadbound::estimators::{self, budget_split, EstimateReport, Method};
use quadbound::harness::{self, compare_gq_sr, ExperimentConfig, Figure, Scale};
use quadbound::oracle::{OracleInstance, OracleKind, OracleSpec};
use quadbound::{Error, Polynomial, Region, Result};

#[derive(Parser)]
#[command(name = "quadbound", version, about = "Noisy-oracle quadrature estimators and their error bounds")]
struct Cli {
    /// Worker threads (overrides QUADBOUND_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one integral with Gauss quadrature or Simpson's rule.
    Integrate(IntegrateArgs),
    /// Evaluate closed-form bounds, optionally over a parameter sweep.
    Bounds(BoundsArgs),
    /// Run the packing-set identification experiment.
    Recovery(RecoveryArgs),
    /// Reproduce one of the error sweeps.
    Experiment(ExperimentArgs),
    /// Compare Gauss quadrature and Simpson's rule on the same cube.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputFormat {
    /// Emit JSON (default).
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long)]
    csv: bool,
}

impl OutputFormat {
    fn format(&self) -> Format {
        if self.csv {
            Format::Csv
        } else {
            Format::Json
        }
    }
}

#[derive(Args)]
struct IntegrateArgs {
    #[arg(long, default_value = "gq")]
    method: String,
    /// `cube:d:r` or `a1,b1;a2,b2;...`.
    #[arg(long)]
    region: String,
    /// Polynomial file: one `coeff k1 ... kd` term per line.
    #[arg(long)]
    poly: PathBuf,
    /// none | gaussian
    #[arg(long, default_value = "none")]
    oracle: String,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Queries per node.
    #[arg(long, conflicts_with = "budget")]
    m: Option<u64>,
    /// Total query budget, split evenly across nodes.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Which {
    Lower,
    GqUpper,
    GqGaussian,
    SrUpper,
    Kl,
    Fano,
    Packing,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "T", alias = "t", default_value_t = 1.0)]
    t: f64,
    #[arg(long = "K", alias = "k", default_value_t = 0.0)]
    k: f64,
    /// Side-length bound for Simpson's rule; defaults to 2r.
    #[arg(long = "B", alias = "b")]
    b: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Hermite constant for the K > 0 Gaussian-oracle formula; defaults to 8r^5/45.
    #[arg(long)]
    c: Option<f64>,
    /// `VAR=start:stop:step` with VAR one of d, r, sigma, T, K, B, delta.
    #[arg(long)]
    sweep: Option<String>,
    #[command(flatten)]
    output: OutputFormat,
}

#[derive(Args)]
struct RecoveryArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "T", alias = "t")]
    t: u64,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_attempts: u64,
    #[command(flatten)]
    output: OutputFormat,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    figure: String,
    #[arg(long, default_value = "desk")]
    scale: String,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot (requires --out).
    #[arg(long, requires = "out")]
    plot: bool,
    /// Polynomials per sweep point.
    #[arg(long, default_value_t = 100)]
    polys: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 4)]
    m: u64,
    #[arg(long = "K", alias = "k", default_value_t = 0.0)]
    k: f64,
    #[arg(long, default_value_t = 100)]
    polys: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            report_error("usage", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{line}");
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Integrate(args) => integrate(args, &mut out),
        Command::Bounds(args) => bounds_cmd(args, &mut out),
        Command::Recovery(args) => recovery(args, cli.workers, &mut out),
        Command::Experiment(args) => experiment(args, cli.workers, &mut out),
        Command::Compare(args) => {
            let report = compare_gq_sr(args.d, args.r, args.sigma, args.m, args.k, args.polys, args.seed, cli.workers)?;
            writeln!(out, "{}", to_json(&report))?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn integrate(args: IntegrateArgs, out: &mut impl Write) -> Result<()> {
    let method: Method = args.method.parse()?;
    let region: Region = args.region.parse()?;
    let poly: Polynomial = fs::read_to_string(&args.poly)?.parse()?;
    let spec = match args.oracle.parse::<OracleKind>()? {
        OracleKind::NoiseFree => OracleSpec::noise_free(),
        OracleKind::Gaussian => OracleSpec::gaussian(args.sigma, args.seed),
        OracleKind::CoordinateBernoulli => {
            return Err(Error::InvalidParameter(
                "the coordinate-Bernoulli oracle is only available through `recovery`".into(),
            ))
        }
    };
    let nodes = estimators::node_set(method, &region)?;
    let m = match (args.m, args.budget) {
        (_, Some(total)) => budget_split(total, nodes.len() as u64)?.per_node,
        (Some(m), None) => m,
        (None, None) => 1,
    };
    let mut oracle = OracleInstance::new(spec)?.with_budget(m * nodes.len() as u64);
    let report = estimators::estimate(&nodes, &mut oracle, &poly, m)?;
    match args.output.format() {
        Format::Json => writeln!(out, "{}", to_json(&report))?,
        Format::Csv => writeln!(out, "{}\n{}", EstimateReport::csv_header(), report.to_csv_line())?,
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct BoundParams {
    d: f64,
    r: f64,
    sigma: f64,
    t: f64,
    k: f64,
    b: Option<f64>,
    delta: f64,
    c: Option<f64>,
}

impl BoundParams {
    fn set(&mut self, var: &str, v: f64) -> Result<()> {
        match var {
            "d" => self.d = v,
            "r" => self.r = v,
            "sigma" => self.sigma = v,
            "T" | "t" => self.t = v,
            "K" | "k" => self.k = v,
            "B" | "b" => self.b = Some(v),
            "delta" => self.delta = v,
            other => return Err(Error::InvalidParameter(format!("cannot sweep {other:?}"))),
        }
        Ok(())
    }

    fn dim(&self) -> Result<usize> {
        if self.d >= 1.0 && self.d.fract() == 0.0 {
            Ok(self.d as usize)
        } else {
            Err(Error::InvalidParameter(format!("d must be a positive integer, got {}", self.d)))
        }
    }

    fn evaluate(&self, which: Which) -> Result<BoundValue> {
        let d = self.dim()?;
        Ok(match which {
            Which::Lower => bounds::lower_bound(d, self.r, self.t),
            Which::GqUpper => bounds::gq_upper_bound(d, self.r, self.sigma, self.t, self.k),
            Which::GqGaussian => bounds::gq_gaussian_error(d, self.r, self.sigma, self.t, self.k, self.c),
            Which::SrUpper => bounds::sr_upper_bound(d, self.b.unwrap_or(2.0 * self.r), self.sigma, self.t, self.k),
            Which::Kl => bounds::kl_bound(self.t, self.delta),
            Which::Fano => bounds::fano_lower(d, self.t, self.delta),
            Which::Packing => {
                BoundValue { name: "packing", value: bounds::packing_cardinality_bound(d), valid: true, note: None }
            }
        })
    }
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let bad = || Error::Parse { line: 1, msg: format!("expected VAR=start:stop:step, got {spec:?}") };
    let (var, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> =
        range.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || stop < start {
        return Err(Error::InvalidParameter("sweep needs step > 0 and stop >= start".into()));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((var.trim().to_owned(), (0..=n).map(|i| start + i as f64 * step).collect()))
}

fn bounds_cmd(args: BoundsArgs, out: &mut impl Write) -> Result<()> {
    let base = BoundParams {
        d: args.d,
        r: args.r,
        sigma: args.sigma,
        t: args.t,
        k: args.k,
        b: args.b,
        delta: args.delta,
        c: args.c,
    };
    let mut rows = Vec::new();
    match &args.sweep {
        None => rows.push((base, base.evaluate(args.which)?)),
        Some(spec) => {
            let (var, values) = parse_sweep(spec)?;
            for v in values {
                let mut p = base;
                p.set(&var, v)?;
                rows.push((p, p.evaluate(args.which)?));
            }
        }
    }
    match args.output.format() {
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(p, v)| {
                    serde_json::json!({
                        "d": p.d, "r": p.r, "sigma": p.sigma, "T": p.t, "K": p.k,
                        "B": p.b.unwrap_or(2.0 * p.r), "delta": p.delta, "bound": v,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&items).expect("json values serialize"))?;
        }
        Format::Csv => {
            writeln!(out, "which,d,r,sigma,T,K,B,delta,value,valid,note")?;
            for (p, v) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},\"{}\"",
                    v.name,
                    p.d,
                    p.r,
                    p.sigma,
                    p.t,
                    p.k,
                    p.b.unwrap_or(2.0 * p.r),
                    p.delta,
                    if v.valid { v.value.to_string() } else { "N/A".to_owned() },
                    v.valid,
                    v.note.as_deref().unwrap_or("").replace('"', "'")
                )?;
            }
        }
    }
    Ok(())
}

fn recovery(args: RecoveryArgs, workers: Option<usize>, out: &mut impl Write) -> Result<()> {
    let mut cfg = RecoveryConfig::new(args.d, args.delta, args.r, args.sigma, args.t, args.trials, args.seed);
    cfg.max_attempts = args.max_attempts;
    cfg.workers = workers;
    for note in
        OracleSpec::coordinate_bernoulli(quadbound::SignVector::all_positive(args.d), args.delta, args.r, args.sigma, 0)
            .validate()?
    {
        eprintln!("warning: {note}");
    }
    let summary = recovery_experiment(&cfg)?;
    match args.output.format() {
        Format::Json => writeln!(out, "{}", to_json(&summary))?,
        Format::Csv => writeln!(out, "{}\n{}", RecoverySummary::CSV_HEADER, summary.to_csv_row())?,
    }
    Ok(())
}

fn experiment(args: ExperimentArgs, workers: Option<usize>, out: &mut impl Write) -> Result<()> {
    let figure: Figure = args.figure.parse()?;
    let scale: Scale = args.scale.parse()?;
    let mut cfg = ExperimentConfig::preset(figure, scale);
    cfg.sigma = args.sigma;
    cfg.seed = args.seed;
    cfg.polynomials_per_point = args.polys;
    cfg.output_dir = args.out;
    cfg.emit_plot = args.plot;
    cfg.workers = workers;
    let rows = harness::run_experiment(&cfg)?;
    match cfg.csv_path() {
        Some(path) => {
            writeln!(out, "{}", path.display())?;
            if let Some(plot) = cfg.plot_path().filter(|_| cfg.emit_plot) {
                writeln!(out, "{}", plot.display())?;
            }
        }
        None => harness::write_csv(&rows, &mut *out)?,
    }
    Ok(())
}
