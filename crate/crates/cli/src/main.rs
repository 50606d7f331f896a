use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qpcocycle::gallery::parse_params;
use qpcocycle::harness::{format_checks, run, ExperimentConfig, HomologyOp, Operation, RunReport};

/// Output root when `--out` is not given; reports go to `<root>/<operation>`.
const OUT_ENV: &str = "QPCOCYCLE_OUT";

#[derive(Parser, Debug)]
#[command(name = "qpcocycle", version, about = "Quasi-periodic cocycle experiments")]
struct Cli {
    /// JSON or flat TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $QPCOCYCLE_OUT/<operation>, or ./qpcocycle-out/<operation>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Source {
    /// Gallery example name.
    #[arg(long)]
    example: Option<String>,
    /// Example parameter as key=value (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Cocycle interchange JSON file.
    #[arg(long = "cocycle")]
    cocycle_file: Option<PathBuf>,
    /// Frequency components, e.g. sqrt2m1 sqrt3m1 or decimals.
    #[arg(long, num_args = 1.., value_name = "W")]
    omega: Option<Vec<String>>,
}

#[derive(Args, Debug, Default)]
struct DominationFlags {
    #[arg(long)]
    k: Option<usize>,
    /// Phases per base dimension.
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated iterate lengths.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    #[arg(long)]
    angle_tol: Option<f64>,
    #[arg(long)]
    min_rate: Option<f64>,
    #[arg(long)]
    refute_angle: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a gallery cocycle and write its interchange file.
    Construct {
        name: String,
        /// Parameters as key=value.
        params: Vec<String>,
    },
    /// Lyapunov spectrum and Oseledets cluster dimensions.
    Lyapunov {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        phases: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        gap_tol: Option<f64>,
    },
    /// Certify or refute k-domination.
    Dominate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        flags: DominationFlags,
    },
    /// Domination tests along imaginary shifts y (each given as comma-separated components).
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        flags: DominationFlags,
        #[arg(long = "y", value_name = "Y1,Y2,..")]
        y: Vec<String>,
    },
    /// Degree of a sphere-valued field on T^2.
    Degree {
        /// Built-in field: constant, wrap, weierstrass, torus-rev, weierstrass-surface.
        field: Option<String>,
        /// CSV with columns x, y, f1, f2, f3.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Use the field [a : b] from the first column of a 2x2 cocycle.
        #[command(flatten)]
        source: Source,
        #[arg(long = "n")]
        resolution: Option<usize>,
    },
    /// Betti tables, Künneth products, exact splittings and the obstruction check.
    Homology {
        #[command(subcommand)]
        op: HomologyCommand,
        /// Coefficient field label.
        #[arg(long, global = true)]
        coefficients: Option<String>,
    },
    /// Run a bundled reproduction and print one line per check.
    Reproduce {
        /// thm1.1-spectrum, remark3.6-sweep, prop2.1-splitting, cor3.2-criterion or all.
        #[arg(default_value = "all")]
        claim: String,
    },
}

#[derive(Subcommand, Debug)]
enum HomologyCommand {
    /// Betti numbers of torus:D, grassmann:K:M or point.
    Betti { space: String },
    /// Betti numbers of a product of spaces.
    Kunneth {
        #[arg(required = true)]
        spaces: Vec<String>,
    },
    /// Exact splitting for a factor instance {"f":..,"pi":..,"h":..} with "p/q" entries.
    Split { file: PathBuf },
    /// No-invariant-section criterion.
    Obstruct {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Assert that the induced map on second homology is nonzero.
        #[arg(long)]
        nonzero: bool,
    },
}

fn apply_source(c: &mut ExperimentConfig, s: Source) -> Result<()> {
    c.example = s.example;
    c.cocycle_file = s.cocycle_file;
    if !s.params.is_empty() {
        c.params = Some(parse_params(&s.params)?);
    }
    c.omega = s
        .omega
        .map(|v| v.into_iter().map(serde_json::Value::String).collect());
    Ok(())
}

fn apply_domination(c: &mut ExperimentConfig, f: DominationFlags) {
    c.k = f.k;
    c.grid = f.grid;
    c.schedule = f.schedule;
    c.angle_tol = f.angle_tol;
    c.min_rate = f.min_rate;
    c.refute_angle = f.refute_angle;
}

fn parse_y(items: &[String]) -> Result<Vec<Vec<f64>>> {
    items
        .iter()
        .map(|s| {
            s.split(',')
                .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad shift component `{t}`")))
                .collect()
        })
        .collect()
}

fn overrides(command: Command) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::default();
    match command {
        Command::Construct { name, params } => {
            c.operation = Some(Operation::Construct);
            c.example = Some(name);
            if !params.is_empty() {
                c.params = Some(parse_params(&params)?);
            }
        }
        Command::Lyapunov { source, n, phases, seed, gap_tol } => {
            c.operation = Some(Operation::Lyapunov);
            apply_source(&mut c, source)?;
            c.n = n;
            c.phases = phases;
            c.seed = seed;
            c.gap_tol = gap_tol;
        }
        Command::Dominate { source, flags } => {
            c.operation = Some(Operation::Dominate);
            apply_source(&mut c, source)?;
            apply_domination(&mut c, flags);
        }
        Command::Sweep { source, flags, y } => {
            c.operation = Some(Operation::Sweep);
            apply_source(&mut c, source)?;
            apply_domination(&mut c, flags);
            if !y.is_empty() {
                c.y = Some(parse_y(&y)?);
            }
        }
        Command::Degree { field, file, source, resolution } => {
            c.operation = Some(Operation::Degree);
            apply_source(&mut c, source)?;
            c.field = field;
            c.field_file = file;
            c.resolution = resolution;
        }
        Command::Homology { op, coefficients } => {
            c.operation = Some(Operation::Homology);
            c.coefficients = coefficients;
            match op {
                HomologyCommand::Betti { space } => {
                    c.homology = Some(HomologyOp::Betti);
                    c.space = Some(space);
                }
                HomologyCommand::Kunneth { spaces } => {
                    c.homology = Some(HomologyOp::Kunneth);
                    c.spaces = Some(spaces);
                }
                HomologyCommand::Split { file } => {
                    c.homology = Some(HomologyOp::Split);
                    c.factor_file = Some(file);
                }
                HomologyCommand::Obstruct { d, k, m, nonzero } => {
                    c.homology = Some(HomologyOp::Obstruct);
                    c.d = Some(d);
                    c.k = Some(k);
                    c.m = Some(m);
                    c.nonzero = Some(nonzero);
                }
            }
        }
        Command::Reproduce { claim } => {
            c.operation = Some(Operation::Reproduce);
            c.claim = Some(claim);
        }
    }
    Ok(c)
}

fn output_dir(cfg: &ExperimentConfig, op: Operation) -> PathBuf {
    if let Some(dir) = &cfg.output {
        return dir.clone();
    }
    let root = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qpcocycle-out"));
    root.join(op.name())
}

fn headline(rep: &RunReport) -> String {
    let r = &rep.summary["result"];
    let op = rep.summary["operation"].as_str().unwrap_or_default();
    match op {
        "lyapunov" => format!("exponents {}", r["exponents"]),
        "dominate" => format!("verdict {} rate {}", r["verdict"], r["rate"]),
        "degree" => format!("degree {} raw {} residual {}", r["degree"], r["raw"], r["residual"]),
        "construct" => format!("certificate {}", r["certificate"]),
        _ => String::new(),
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => ExperimentConfig::read(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    let mut flags = overrides(cli.command)?;
    flags.output = cli.out;
    let cfg = file.overridden_by(&flags)?;
    let op = cfg.operation.context("no operation")?;
    let rep = run(&cfg)?;
    let dir = output_dir(&cfg, op);
    rep.write(&dir).with_context(|| format!("writing report to {}", dir.display()))?;
    print!("{}", format_checks(&rep));
    let head = headline(&rep);
    if !head.is_empty() {
        println!("{head}");
    }
    println!("status {:?}; report in {}", rep.status, dir.display());
    Ok(rep.status.exit_code())
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for inconclusive answers.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
