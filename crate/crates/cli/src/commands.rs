use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmd_core::bench::bench_grid;
use mmd_core::dsa::effective_fundamental;
use mmd_core::model::{
    banded_approximation, ConvergenceTrace, DecompositionResult, MimfExpansion, Parity, PhaseTrack, ScaleTerm,
    ShapeTable, StopReason, UniformSignal,
};
use mmd_core::oracle::{equivalent_bins, rdbr_extract};
use mmd_core::rdsa::{convergence_mu, rdsa1, rdsa2};
use mmd_core::siggen::{add_noise, build_mixture, gen_ex2_default, gen_ex3, GroundTruth, Mixture, Shape, ShapeSpec};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Scheme};
use crate::error::{CliError, CliResult};
use crate::io::{self, num, SeriesFormat};
use crate::whiteness::whiteness;

#[derive(Debug, Parser)]
#[command(name = "mmd", version, about = "Multiresolution mode decomposition of oscillatory signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic mixture with its phases and ground truth.
    Generate(GenerateArgs),
    /// Decompose a signal given its phases.
    Decompose(DecomposeArgs),
    /// Banded approximations from stored coefficients and shapes.
    Approximate(ApproximateArgs),
    /// Convergence table of a run or a stored trace.
    Converge(ConvergeArgs),
    /// Time DSA against the regression oracle on a grid of lengths.
    Bench(BenchArgs),
    /// Autocorrelation of a residual against the white-noise band.
    Whiteness(WhitenessArgs),
    /// Bin-regression estimate of one product.
    Oracle(OracleArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Decompose(a) => decompose(&a),
        Command::Approximate(a) => approximate(&a),
        Command::Converge(a) => converge(&a),
        Command::Bench(a) => bench(&a),
        Command::Whiteness(a) => whiteness_cmd(&a),
        Command::Oracle(a) => oracle(&a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// Two piecewise-linear shapes with warped phases.
    Ex2,
    /// Two amplitude-modulated heartbeat-like shapes.
    Ex3,
    /// Components described by a TOML file (`--spec`).
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Cos,
    Sin,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Cos => Parity::Cos,
            ParityArg::Sin => Parity::Sin,
        }
    }
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    }
}

fn series_name(stem: &str, format: SeriesFormat) -> String {
    format!("{stem}.{}", format.extension())
}

fn load_signal(path: &Path) -> CliResult<UniformSignal> {
    UniformSignal::new(io::read_series(path)?).map_err(CliError::input)
}

/// Reads a phase; without an explicit `N` the rounded phase advance is used.
fn load_phase(path: &Path, fundamental: Option<f64>) -> CliResult<PhaseTrack> {
    let values = io::read_series(path)?;
    let provisional = PhaseTrack::new(values, 1.0).map_err(CliError::input)?;
    let n = match fundamental {
        Some(n) => n,
        None => effective_fundamental(&provisional).map_err(CliError::input)? as f64,
    };
    provisional.with_fundamental(n).map_err(CliError::input)
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub example: Example,
    /// Fundamental `N` of the two-piecewise-linear mixture.
    #[arg(long, default_value_t = 100.0)]
    pub fundamental: f64,
    /// Number of samples `L`.
    #[arg(long, default_value_t = 1 << 16)]
    pub len: usize,
    /// Component description for `--example custom`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per period of the ground-truth tables.
    #[arg(long, default_value_t = 2000)]
    pub shape_len: usize,
    /// Write series in the binary format.
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// One component of a custom mixture.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub fundamental: f64,
    pub shape: ShapeSpec,
    #[serde(default)]
    pub alpha_cos: f64,
    #[serde(default)]
    pub alpha_sin: f64,
    /// Phase `N (t + warp sin(2 pi t + warp_offset))`.
    #[serde(default)]
    pub warp: f64,
    #[serde(default)]
    pub warp_offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub component: Vec<ComponentSpec>,
}

fn custom_mixture(path: &Path, len: usize) -> CliResult<Mixture> {
    if !path.exists() {
        return Err(CliError::Validation(format!("{} does not exist", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: MixtureSpec = toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    if spec.component.is_empty() {
        return Err(CliError::Validation("mixture needs at least one component".into()));
    }
    let mut parts = Vec::with_capacity(spec.component.len());
    for c in &spec.component {
        let (w, off) = (c.warp, c.warp_offset);
        let phase = PhaseTrack::from_fn(len, c.fundamental, |t| t + w * (2.0 * PI * t + off).sin()).map_err(CliError::input)?;
        let truth = GroundTruth {
            shape: Shape::new(&c.shape).map_err(CliError::input)?,
            fundamental: c.fundamental,
            alpha_cos: c.alpha_cos,
            alpha_sin: c.alpha_sin,
        };
        parts.push((truth, phase));
    }
    build_mixture(len, parts).map_err(CliError::input)
}

fn truth_rows(truth: &GroundTruth, shape_len: usize) -> CliResult<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for n in -1..=1i64 {
        for parity in [Parity::Cos, Parity::Sin] {
            let values = truth.product(n, parity, shape_len).map_err(CliError::input)?;
            for (j, v) in values.iter().enumerate() {
                rows.push(vec![n.to_string(), parity_name(parity).into(), j.to_string(), num(*v)]);
            }
        }
    }
    Ok(rows)
}

pub fn generate(a: &GenerateArgs) -> CliResult<()> {
    let mix = match a.example {
        Example::Ex2 => gen_ex2_default(a.fundamental, a.len).map_err(CliError::input)?,
        Example::Ex3 => gen_ex3(a.len).map_err(CliError::input)?,
        Example::Custom => {
            let spec = a
                .spec
                .as_ref()
                .ok_or_else(|| CliError::Validation("--example custom needs --spec".into()))?;
            custom_mixture(spec, a.len)?
        }
    };
    let signal = add_noise(&mix.signal, a.noise, a.seed).map_err(CliError::input)?;
    let format = SeriesFormat::from_flag(a.binary);
    io::create_dir(&a.out)?;
    let signal_name = series_name("signal", format);
    io::write_series(&a.out.join(&signal_name), signal.samples(), format)?;
    let mut phase_names = Vec::new();
    for (k, ((phase, comp), truth)) in mix.phases.iter().zip(&mix.components).zip(&mix.truth).enumerate() {
        let name = series_name(&format!("phase_{k}"), format);
        io::write_series(&a.out.join(&name), phase.values(), format)?;
        io::write_series(&a.out.join(series_name(&format!("component_{k}"), format)), comp.samples(), format)?;
        io::write_csv(
            &a.out.join(format!("truth_{k}.csv")),
            &["n", "parity", "index", "value"],
            truth_rows(truth, a.shape_len)?,
        )?;
        phase_names.push(PathBuf::from(name));
    }
    let mut cfg = RunConfig::for_files(PathBuf::from(signal_name), phase_names);
    cfg.len = Some(a.len);
    cfg.fundamentals = Some(mix.phases.iter().map(PhaseTrack::fundamental).collect());
    cfg.binary = a.binary;
    if a.example == Example::Ex3 {
        cfg.m0 = 1;
        cfg.ls = 1000;
    }
    io::write_file(&a.out.join("run.toml"), cfg.to_toml().as_bytes())?;
    println!(
        "wrote {} components of length {} to {}",
        mix.components.len(),
        a.len,
        a.out.display()
    );
    Ok(())
}

// --------------------------------------------------------------- decompose

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loaded inputs of a run.
pub struct Problem {
    pub signal: UniformSignal,
    pub phases: Vec<PhaseTrack>,
}

pub fn load_problem(cfg: &RunConfig) -> CliResult<Problem> {
    cfg.algorithm()?;
    for p in std::iter::once(&cfg.signal).chain(&cfg.phases) {
        if !p.exists() {
            return Err(CliError::Validation(format!("{} does not exist", p.display())));
        }
    }
    let signal = load_signal(&cfg.signal)?;
    if let Some(len) = cfg.len {
        if len != signal.len() {
            return Err(CliError::Validation(format!("L = {len} but the signal has {} samples", signal.len())));
        }
    }
    let phases = cfg
        .phases
        .iter()
        .enumerate()
        .map(|(k, p)| load_phase(p, cfg.fundamentals.as_ref().map(|f| f[k])))
        .collect::<CliResult<Vec<_>>>()?;
    for (k, p) in phases.iter().enumerate() {
        if p.len() != signal.len() {
            return Err(CliError::Validation(format!(
                "phase {k} has {} samples, the signal {}",
                p.len(),
                signal.len()
            )));
        }
    }
    Ok(Problem { signal, phases })
}

pub fn solve(cfg: &RunConfig, problem: &Problem) -> CliResult<DecompositionResult> {
    let alg = cfg.algorithm()?;
    let result = match cfg.scheme {
        Scheme::Rdsa1 => rdsa1(&problem.signal, &problem.phases, &alg),
        Scheme::Rdsa2 => rdsa2(&problem.signal, &problem.phases, &alg),
    };
    result.map_err(CliError::run)
}

fn coefficient_rows(e: &MimfExpansion) -> Vec<Vec<String>> {
    e.terms.iter().map(|t| vec![t.n.to_string(), num(t.a), num(t.b)]).collect()
}

fn shape_rows(e: &MimfExpansion) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in &e.terms {
        for parity in [Parity::Cos, Parity::Sin] {
            for (j, v) in t.shape(parity).values().iter().enumerate() {
                rows.push(vec![t.n.to_string(), parity_name(parity).into(), j.to_string(), num(*v)]);
            }
        }
    }
    rows
}

fn write_trace(path: &Path, trace: &ConvergenceTrace) -> CliResult<()> {
    io::write_csv(
        path,
        &["iteration", "relative_residual"],
        trace
            .relative_residuals
            .iter()
            .enumerate()
            .map(|(j, r)| vec![j.to_string(), num(*r)]),
    )
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::ToleranceMet => "tolerance met",
        StopReason::Stagnated => "stagnated",
        StopReason::MaxIterations => "iteration cap",
    }
}

fn write_levels(
    dir: &Path,
    k: usize,
    e: &MimfExpansion,
    phase: &PhaseTrack,
    levels: &[usize],
    format: SeriesFormat,
) -> CliResult<()> {
    for &l in levels {
        let approx = banded_approximation(e, phase, l).map_err(CliError::input)?;
        io::write_series(&dir.join(series_name(&format!("approx_{k}_l{l}"), format)), approx.samples(), format)?;
    }
    Ok(())
}

pub fn decompose(a: &DecomposeArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Validation("no output directory (use --out or `output`)".into()))?;
    let problem = load_problem(&cfg)?;
    let result = solve(&cfg, &problem)?;
    let format = SeriesFormat::from_flag(cfg.binary);
    io::create_dir(&out)?;
    for (k, (e, comp)) in result.expansions.iter().zip(&result.components).enumerate() {
        io::write_csv(&out.join(format!("coefficients_{k}.csv")), &["n", "a", "b"], coefficient_rows(e))?;
        io::write_csv(
            &out.join(format!("shapes_{k}.csv")),
            &["n", "parity", "index", "value"],
            shape_rows(e),
        )?;
        io::write_series(&out.join(series_name(&format!("component_{k}"), format)), comp.samples(), format)?;
        write_levels(&out, k, e, &problem.phases[k], &cfg.levels, format)?;
    }
    io::write_series(&out.join(series_name("residual", format)), result.residual.samples(), format)?;
    write_trace(&out.join("trace.csv"), &result.trace)?;
    println!(
        "{} iterations ({}), relative residual {:.3e}",
        result.trace.iterations(),
        stop_name(result.trace.stop_reason),
        result.relative_residual(&problem.signal)
    );
    Ok(())
}

// ------------------------------------------------------------- approximate

#[derive(Debug, Args)]
pub struct ApproximateArgs {
    #[arg(long)]
    pub coefficients: PathBuf,
    #[arg(long)]
    pub shapes: PathBuf,
    #[arg(long)]
    pub phase: PathBuf,
    /// Nominal `N`; defaults to the rounded phase advance.
    #[arg(long)]
    pub fundamental: Option<f64>,
    /// Bands `l`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub levels: Vec<usize>,
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
struct CoefficientRow {
    n: i64,
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
struct ShapeRow {
    n: i64,
    parity: Parity,
    index: usize,
    value: f64,
}

/// Rebuilds an expansion from its coefficient and shape tables.
pub fn load_expansion(coefficients: &Path, shapes: &Path, fundamental: f64) -> CliResult<MimfExpansion> {
    let coeffs: Vec<CoefficientRow> = io::read_csv(coefficients)?;
    let rows: Vec<ShapeRow> = io::read_csv(shapes)?;
    let shape_len = rows.iter().map(|r| r.index + 1).max().unwrap_or(0);
    if shape_len == 0 {
        return Err(CliError::Validation(format!("{} holds no shape values", shapes.display())));
    }
    let mut tables: std::collections::HashMap<(i64, Parity), Vec<Option<f64>>> = Default::default();
    for r in rows {
        let slot = tables.entry((r.n, r.parity)).or_insert_with(|| vec![None; shape_len]);
        if slot.len() < shape_len {
            slot.resize(shape_len, None);
        }
        slot[r.index] = Some(r.value);
    }
    let table = |n: i64, parity: Parity| -> CliResult<ShapeTable> {
        match tables.get(&(n, parity)) {
            None => Ok(ShapeTable::zeros(shape_len)),
            Some(v) => {
                let values = v
                    .iter()
                    .map(|x| x.ok_or_else(|| CliError::Validation(format!("shape n={n} has missing samples"))))
                    .collect::<CliResult<Vec<f64>>>()?;
                ShapeTable::new(values).map_err(CliError::input)
            }
        }
    };
    let mut terms = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        terms.push(ScaleTerm {
            n: c.n,
            a: c.a,
            cos_shape: table(c.n, Parity::Cos)?,
            b: c.b,
            sin_shape: table(c.n, Parity::Sin)?,
        });
    }
    MimfExpansion::new(fundamental, terms).map_err(CliError::input)
}

pub fn approximate(a: &ApproximateArgs) -> CliResult<()> {
    let phase = load_phase(&a.phase, a.fundamental)?;
    let e = load_expansion(&a.coefficients, &a.shapes, phase.fundamental())?;
    let format = SeriesFormat::from_flag(a.binary);
    io::create_dir(&a.out)?;
    for &l in &a.levels {
        let approx = banded_approximation(&e, &phase, l).map_err(CliError::input)?;
        io::write_series(&a.out.join(series_name(&format!("approx_l{l}"), format)), approx.samples(), format)?;
    }
    println!("wrote {} approximations to {}", a.levels.len(), a.out.display());
    Ok(())
}

// ---------------------------------------------------------------- converge

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConvergeSource {
    /// Run the decomposition described by this config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use a stored trace instead.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub source: ConvergeSource,
    /// Table with `j, relative_residual, mu, eta`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    #[allow(dead_code)]
    iteration: usize,
    relative_residual: f64,
}

/// Rows `(j, eps_j, mu_j, eta_j)`; `mu` and `eta` are missing where the
/// sequence has been cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub j: usize,
    pub relative_residual: f64,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
}

pub fn convergence_table(trace: &ConvergenceTrace) -> CliResult<Vec<ConvergenceRow>> {
    let eta = trace.eta().map_err(CliError::run)?;
    let mu = convergence_mu(trace);
    Ok(trace
        .relative_residuals
        .iter()
        .enumerate()
        .map(|(j, r)| ConvergenceRow {
            j,
            relative_residual: *r,
            mu: j.checked_sub(1).and_then(|i| mu.get(i).copied()),
            eta: j.checked_sub(1).and_then(|i| eta.get(i).copied()),
        })
        .collect())
}

pub fn converge(a: &ConvergeArgs) -> CliResult<()> {
    let trace = match (&a.source.config, &a.source.trace) {
        (Some(c), _) => {
            let cfg = RunConfig::load(c)?;
            let problem = load_problem(&cfg)?;
            solve(&cfg, &problem)?.trace
        }
        (None, Some(t)) => {
            let rows: Vec<TraceRow> = io::read_csv(t)?;
            ConvergenceTrace {
                relative_residuals: rows.iter().map(|r| r.relative_residual).collect(),
                stop_reason: StopReason::MaxIterations,
            }
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let table = convergence_table(&trace)?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    println!("{:>4} {:>12} {:>10} {:>10}", "j", "residual", "mu", "eta");
    for r in &table {
        println!(
            "{:>4} {:>12.4e} {:>10} {:>10}",
            r.j,
            r.relative_residual,
            r.mu.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.eta.map(|v| format!("{v:.4}")).unwrap_or_default()
        );
    }
    if let Some(out) = &a.out {
        io::write_csv(
            out,
            &["j", "relative_residual", "mu", "eta"],
            table
                .iter()
                .map(|r| vec![r.j.to_string(), num(r.relative_residual), opt(r.mu), opt(r.eta)]),
        )?;
    }
    Ok(())
}

// ------------------------------------------------------------------- bench

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Exponents `e` of the lengths `2^e`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,11,12,13,14,15,16,17,18")]
    pub log_lengths: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub fundamentals: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub shape_len: usize,
    /// Repetitions per cell; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn bench(a: &BenchArgs) -> CliResult<()> {
    if a.reps < 5 {
        return Err(CliError::Validation(format!("need at least 5 repetitions, got {}", a.reps)));
    }
    if let Some(e) = a.log_lengths.iter().find(|&&e| !(4..=24).contains(&e)) {
        return Err(CliError::Validation(format!("length exponent {e} outside 4..=24")));
    }
    let lengths: Vec<usize> = a.log_lengths.iter().map(|&e| 1usize << e).collect();
    let m = bench_grid(&lengths, &a.fundamentals, a.shape_len, a.reps).map_err(CliError::run)?;
    println!("{:>8} {:>8} {:>12} {:>12} {:>8}", "N", "L", "dsa [s]", "oracle [s]", "speedup");
    for c in &m.cells {
        println!(
            "{:>8} {:>8} {:>12.4e} {:>12.4e} {:>8.2}",
            c.fundamental,
            c.len,
            c.dsa_seconds,
            c.oracle_seconds,
            c.speedup()
        );
    }
    for (row, n) in m.fundamentals.iter().enumerate() {
        match m.dsa_slope(row) {
            Ok(s) => println!("N = {n}: slope of log t_dsa against log L = {s:.3}"),
            Err(_) => println!("N = {n}: slope needs two or more lengths"),
        }
    }
    if let Some(out) = &a.out {
        io::write_csv(
            out,
            &["fundamental", "len", "dsa_seconds", "oracle_seconds", "speedup"],
            m.cells.iter().map(|c| {
                vec![
                    num(c.fundamental),
                    c.len.to_string(),
                    num(c.dsa_seconds),
                    num(c.oracle_seconds),
                    num(c.speedup()),
                ]
            }),
        )?;
    }
    Ok(())
}

// --------------------------------------------------------------- whiteness

#[derive(Debug, Args)]
pub struct WhitenessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub max_lag: usize,
    /// Table with `lag, acf`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn whiteness_cmd(a: &WhitenessArgs) -> CliResult<()> {
    let x = io::read_series(&a.input)?;
    let report = whiteness(&x, a.max_lag)?;
    if report.degenerate {
        println!("degenerate: the input has zero variance");
    } else {
        println!(
            "{:.1}% of lags 1..={} inside +-{:.4}",
            100.0 * report.fraction_in_band,
            a.max_lag,
            report.band
        );
    }
    if let Some(out) = &a.out {
        io::write_csv(
            out,
            &["lag", "acf"],
            report.acf.iter().enumerate().map(|(k, r)| vec![k.to_string(), num(*r)]),
        )?;
    }
    Ok(())
}

// ------------------------------------------------------------------ oracle

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub phase: PathBuf,
    #[arg(long)]
    pub fundamental: Option<f64>,
    /// Scale index `n`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub n: i64,
    #[arg(long, value_enum, default_value_t = ParityArg::Cos)]
    pub parity: ParityArg,
    /// Partition count; defaults to `L / N`.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn oracle(a: &OracleArgs) -> CliResult<()> {
    let signal = load_signal(&a.signal)?;
    let phase = load_phase(&a.phase, a.fundamental)?;
    let bins = match a.bins {
        Some(b) => b,
        None => equivalent_bins(signal.len(), effective_fundamental(&phase).map_err(CliError::input)?),
    };
    let est = rdbr_extract(&signal, &phase, phase.fundamental(), a.n, a.parity.into(), bins).map_err(CliError::run)?;
    let centered = est.centered();
    io::write_csv(
        &a.out,
        &["index", "value", "occupied", "count"],
        (0..bins).map(|k| {
            vec![
                k.to_string(),
                num(centered[k]),
                est.occupied[k].to_string(),
                est.counts[k].to_string(),
            ]
        }),
    )?;
    let empty = est.occupied.iter().filter(|o| !**o).count();
    println!("{bins} bins, {empty} empty");
    Ok(())
}
