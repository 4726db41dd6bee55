//! Command-line front end.
//!
//! Every run resolves its options first, computes all outputs in memory and
//! only then writes them, together with `run_manifest.json`, into `--out`.
//! A failed run leaves no files behind. `replay` re-executes a manifest.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::agents::{fit_exponential, histogram, AgentEnsemble, FitRecord, InitialMoney};
use crate::error::{Error, Result};
use crate::families::{closed_form_t, contraction_check, lattice, sample_family, FamilySpec};
use crate::grid::{Density, Grid, DEFAULT_MEANS_PER_DOMAIN, DEFAULT_POINTS};
use crate::io;
use crate::operator::{run_iteration, ConvolutionMethod, IterationConfig};
use crate::verify::{self, VerifyConfig, VerifyReport};

pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const REPORT_FILE: &str = "report.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const FIT_FILE: &str = "fit.json";
pub const VERIFY_FILE: &str = "verify_report.json";
pub const FAMILIES_FILE: &str = "families.csv";
pub const FAMILIES_HEADER: [&str; 7] = [
    "family",
    "params",
    "d_before",
    "d_after",
    "contracted",
    "degenerate",
    "oracle_l1_gap",
];

pub const DEFAULT_STEPS: usize = 10;
pub const DEFAULT_AGENTS: usize = 100_000;
/// Transactions per agent when `--transactions` is omitted.
pub const DEFAULT_TRANSACTIONS_PER_AGENT: u64 = 100;
pub const DEFAULT_SIM_SEED: u64 = 7;
pub const DEFAULT_BINS: usize = 200;
/// Histogram range in units of the mean money when `--m-max` is omitted.
pub const DEFAULT_M_MAX_MEANS: f64 = 20.0;

#[derive(Debug, Parser)]
#[command(name = "kwealth", version, about = "Random-exchange wealth operator and agent simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the operator from a named or file initial condition.
    Iterate(IterateArgs),
    /// Run the agent market and fit the equilibrium.
    Simulate(SimulateArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
    /// Closed-form first iterates of the example families.
    Families(FamiliesArgs),
    /// Re-execute a run from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedFamily {
    Triangle,
    Exponential,
    Gamma,
    Mix,
    Epsmix,
}

#[derive(Debug, Args)]
pub struct FamilyParams {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Shape index of the gamma part.
    #[arg(long = "shape", short = 'n')]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[arg(long, value_enum, conflicts_with = "initial")]
    pub family: Option<NamedFamily>,
    /// Initial density CSV (`x,density`); fixes the grid.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[command(flatten)]
    pub params: FamilyParams,
    /// Mean of the triangle.
    #[arg(long, allow_negative_numbers = true)]
    pub mean: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = ConvolutionMethod::Fft)]
    pub method: ConvolutionMethod,
    /// Stop once successive iterates are this close in L1.
    #[arg(long)]
    pub early_stop: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = DEFAULT_AGENTS)]
    pub agents: usize,
    /// Defaults to 100 per agent.
    #[arg(long)]
    pub transactions: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SIM_SEED)]
    pub seed: u64,
    /// Initial money of every agent.
    #[arg(long, default_value_t = 1.0, conflicts_with = "initial")]
    pub m0: f64,
    /// Draw initial money from a density CSV instead.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Defaults to 20 times the mean money.
    #[arg(long)]
    pub m_max: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub n_points: usize,
    #[arg(long, default_value_t = ConvolutionMethod::Fft)]
    pub method: ConvolutionMethod,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeFamily {
    Gamma,
    Mix,
    Epsmix,
}

#[derive(Debug, Args)]
pub struct FamiliesArgs {
    /// Single family; the full lattice is swept when neither this nor any
    /// parameter is given. Parameters alone select `gamma`.
    #[arg(long, value_enum)]
    pub family: Option<LatticeFamily>,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub n_points: usize,
    #[arg(long, default_value_t = ConvolutionMethod::Fft)]
    pub method: ConvolutionMethod,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Initial condition of an `iterate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Triangle { mean: f64 },
    File { path: PathBuf },
    #[serde(untagged)]
    Family(FamilySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateOptions {
    pub initial: InitialSpec,
    pub n_points: usize,
    pub x_max: f64,
    pub steps: usize,
    pub method: ConvolutionMethod,
    pub early_stop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub agents: usize,
    pub transactions: u64,
    pub seed: u64,
    pub m0: Option<f64>,
    pub initial: Option<PathBuf>,
    pub bins: usize,
    pub m_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamiliesOptions {
    /// Empty means the full lattice.
    pub specs: Vec<FamilySpec>,
    pub n_points: usize,
    pub method: ConvolutionMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum RunOptions {
    Iterate(IterateOptions),
    Simulate(SimulateOptions),
    Verify(VerifyConfig),
    Families(FamiliesOptions),
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub options: RunOptions,
}

impl RunManifest {
    pub fn new(options: RunOptions) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            options,
        }
    }
}

pub fn read_manifest<R: Read>(input: R) -> Result<RunManifest> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_manifest<W: Write>(manifest: &RunManifest, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, manifest)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Files produced by a run, written only after everything succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Set when the run completed but a check failed.
    pub failed: Vec<String>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

fn named_family(family: NamedFamily, p: &FamilyParams) -> FamilySpec {
    let alpha = p.alpha.unwrap_or(1.0);
    match family {
        NamedFamily::Triangle => unreachable!("triangle is not a closed-form family"),
        NamedFamily::Exponential => FamilySpec::Exponential { alpha },
        NamedFamily::Gamma => FamilySpec::Gamma {
            alpha,
            n: p.n.unwrap_or(1),
        },
        NamedFamily::Mix => FamilySpec::TwoExponentialMix {
            alpha,
            beta: p.beta.unwrap_or(3.0),
        },
        NamedFamily::Epsmix => FamilySpec::EpsilonMix {
            epsilon: p.epsilon.unwrap_or(0.5),
            alpha,
            n: p.n.unwrap_or(1),
        },
    }
}

pub fn resolve_iterate(args: &IterateArgs) -> Result<IterateOptions> {
    if args.steps == 0 {
        return Err(invalid("steps", 0.0, "must be >= 1"));
    }
    let n_points = args.n_points.unwrap_or(DEFAULT_POINTS);
    let (initial, grid) = match &args.initial {
        Some(path) => {
            let y = io::read_density(fs::File::open(path)?)?;
            let grid = *y.grid();
            let requested = Grid::new(
                args.n_points.unwrap_or(grid.n_points()),
                args.x_max.unwrap_or(grid.x_max()),
            )?;
            grid.ensure_same(&requested)?;
            (InitialSpec::File { path: path.clone() }, grid)
        }
        None => {
            let family = args.family.unwrap_or(NamedFamily::Triangle);
            let (spec, mean) = if family == NamedFamily::Triangle {
                let mean = args.mean.unwrap_or(1.0);
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(invalid("mean", mean, "must be finite and > 0"));
                }
                (InitialSpec::Triangle { mean }, mean)
            } else {
                let spec = named_family(family, &args.params);
                spec.validate()?;
                (InitialSpec::Family(spec), spec.mean())
            };
            let x_max = args.x_max.unwrap_or(DEFAULT_MEANS_PER_DOMAIN * mean);
            (spec, Grid::new(n_points, x_max)?)
        }
    };
    Ok(IterateOptions {
        initial,
        n_points: grid.n_points(),
        x_max: grid.x_max(),
        steps: args.steps,
        method: args.method,
        early_stop: args.early_stop,
    })
}

fn initial_density(opts: &IterateOptions) -> Result<Density> {
    let grid = Grid::new(opts.n_points, opts.x_max)?;
    match &opts.initial {
        InitialSpec::Triangle { mean } => Density::triangle(grid, *mean),
        InitialSpec::Family(spec) => sample_family(spec, &grid),
        InitialSpec::File { path } => {
            let y = io::read_density(fs::File::open(path)?)?;
            y.grid().ensure_same(&grid)?;
            Ok(y)
        }
    }
}

pub fn density_file_name(step: usize) -> String {
    format!("density_{step:03}.csv")
}

pub fn run_iterate(opts: &IterateOptions) -> Result<Outputs> {
    let y0 = initial_density(opts)?;
    let config = IterationConfig {
        steps: opts.steps,
        method: opts.method,
        early_stop: opts.early_stop,
    };
    let traj = run_iteration(&y0, &config)?;
    let mut out = Outputs::default();
    for (step, y) in traj.densities.iter().enumerate() {
        let mut buf = Vec::new();
        io::write_density(y, &mut buf)?;
        out.add(density_file_name(step), buf);
    }
    let mut buf = Vec::new();
    io::write_reports(&traj.reports, &mut buf)?;
    out.add(REPORT_FILE, buf);
    Ok(out)
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<SimulateOptions> {
    if args.agents < 2 {
        return Err(Error::TooFewAgents(args.agents));
    }
    let (m0, mean) = match &args.initial {
        Some(path) => {
            let y = io::read_density(fs::File::open(path)?)?;
            (None, y.quad_mean()?)
        }
        None => {
            if !(args.m0 > 0.0 && args.m0.is_finite()) {
                return Err(invalid("m0", args.m0, "must be finite and > 0"));
            }
            (Some(args.m0), args.m0)
        }
    };
    Ok(SimulateOptions {
        agents: args.agents,
        transactions: args
            .transactions
            .unwrap_or(DEFAULT_TRANSACTIONS_PER_AGENT * args.agents as u64),
        seed: args.seed,
        m0,
        initial: args.initial.clone(),
        bins: args.bins,
        m_max: args.m_max.unwrap_or(DEFAULT_M_MAX_MEANS * mean),
    })
}

pub fn run_simulate(opts: &SimulateOptions) -> Result<Outputs> {
    let initial = match (&opts.initial, opts.m0) {
        (Some(path), _) => InitialMoney::FromDensity(io::read_density(fs::File::open(path)?)?),
        (None, Some(m0)) => InitialMoney::Equal(m0),
        (None, None) => return Err(invalid("m0", f64::NAN, "needs m0 or an initial density")),
    };
    let mut ens = AgentEnsemble::new(opts.agents, &initial, opts.seed)?;
    // validate the histogram before spending time on transactions
    histogram(&ens, opts.bins, opts.m_max)?;
    ens.run_transactions(opts.transactions);
    let hist = histogram(&ens, opts.bins, opts.m_max)?;
    let fit = FitRecord::new(&fit_exponential(&ens)?, &ens);
    let mut out = Outputs::default();
    let mut buf = Vec::new();
    io::write_ensemble(&ens, &mut buf)?;
    out.add(ENSEMBLE_FILE, buf);
    let mut buf = Vec::new();
    io::write_histogram(&hist, &mut buf)?;
    out.add(HISTOGRAM_FILE, buf);
    let mut buf = Vec::new();
    io::write_fit(&fit, &mut buf)?;
    out.add(FIT_FILE, buf);
    Ok(out)
}

pub fn resolve_verify(args: &VerifyArgs) -> VerifyConfig {
    VerifyConfig {
        n_points: args.n_points,
        method: args.method,
        seed: args.seed,
        samples: args.samples,
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<(Outputs, VerifyReport)> {
    let report = verify::run_all(cfg)?;
    let mut out = Outputs::default();
    let mut buf = serde_json::to_vec_pretty(&report)?;
    buf.push(b'\n');
    out.add(VERIFY_FILE, buf);
    out.failed = report.failures().map(|p| p.name.clone()).collect();
    Ok((out, report))
}

pub fn resolve_families(args: &FamiliesArgs) -> Result<FamiliesOptions> {
    let p = &args.params;
    let any_param = p.alpha.is_some() || p.beta.is_some() || p.n.is_some() || p.epsilon.is_some();
    let specs = match (args.family, any_param) {
        (None, false) => Vec::new(),
        (family, _) => {
            let named = match family.unwrap_or(LatticeFamily::Gamma) {
                LatticeFamily::Gamma => NamedFamily::Gamma,
                LatticeFamily::Mix => NamedFamily::Mix,
                LatticeFamily::Epsmix => NamedFamily::Epsmix,
            };
            let spec = named_family(named, p);
            spec.validate()?;
            vec![spec]
        }
    };
    Grid::new(args.n_points, 1.0)?;
    Ok(FamiliesOptions {
        specs,
        n_points: args.n_points,
        method: args.method,
    })
}

pub fn run_families(opts: &FamiliesOptions) -> Result<Outputs> {
    let specs = if opts.specs.is_empty() {
        lattice()
    } else {
        opts.specs.clone()
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FAMILIES_HEADER)?;
    for spec in &specs {
        spec.validate()?;
        let grid = Grid::new(opts.n_points, DEFAULT_MEANS_PER_DOMAIN * spec.mean())?;
        let report = contraction_check(spec, &grid)?;
        let numeric = crate::operator::apply_t(&sample_family(spec, &grid)?, opts.method);
        let gap = numeric.l1_distance(&closed_form_t(spec, &grid)?)?;
        w.write_record([
            spec.kind_name().to_string(),
            spec.params(),
            io::fmt_f64(report.d_before),
            io::fmt_f64(report.d_after),
            report.contracted.to_string(),
            report.degenerate.to_string(),
            io::fmt_f64(gap),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = Outputs::default();
    out.add(FAMILIES_FILE, bytes);
    Ok(out)
}

/// Runs resolved options; the manifest is part of the outputs.
pub fn execute(options: &RunOptions) -> Result<Outputs> {
    let mut out = match options {
        RunOptions::Iterate(o) => run_iterate(o)?,
        RunOptions::Simulate(o) => run_simulate(o)?,
        RunOptions::Verify(o) => run_verify(o)?.0,
        RunOptions::Families(o) => run_families(o)?,
    };
    let mut buf = Vec::new();
    write_manifest(&RunManifest::new(options.clone()), &mut buf)?;
    out.add(MANIFEST_FILE, buf);
    Ok(out)
}

/// Parses nothing; resolves a parsed command into options and an output
/// directory.
pub fn resolve(command: &Command) -> Result<(RunOptions, PathBuf)> {
    Ok(match command {
        Command::Iterate(a) => (RunOptions::Iterate(resolve_iterate(a)?), a.out.clone()),
        Command::Simulate(a) => (RunOptions::Simulate(resolve_simulate(a)?), a.out.clone()),
        Command::Verify(a) => (RunOptions::Verify(resolve_verify(a)), a.out.clone()),
        Command::Families(a) => (RunOptions::Families(resolve_families(a)?), a.out.clone()),
        Command::Replay(a) => {
            let manifest = read_manifest(fs::File::open(&a.manifest)?)?;
            if manifest.version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {}",
                    manifest.version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            (manifest.options, a.out.clone())
        }
    })
}

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ChecksFailed,
}

pub fn run(cli: &Cli) -> Result<Status> {
    let (options, dir) = resolve(&cli.command)?;
    let out = execute(&options)?;
    out.write_to(&dir)?;
    if out.failed.is_empty() {
        Ok(Status::Success)
    } else {
        eprintln!("failed properties: {}", out.failed.join(", "));
        Ok(Status::ChecksFailed)
    }
}
