//! Command-line front end for `puchain`.
//!
//! Exit codes: 0 on success, 2 when the input is invalid, 3 when a numerical
//! cross-check fails. Results go to stdout (or `--out`) as JSON; summaries
//! go to stderr.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use puchain::ermgm::{mle_density_stability, mle_from_companion, GraphChainKind};
use puchain::expfam::validate_cef;
use puchain::io::{
    parse_matrix, read_trajectory, to_json_string, write_trajectory, CefJson, FamilyJson, ModelJson,
    MultigraphJson,
};
use puchain::netstat::{
    degree_sequence, exchangeability_transfer, iso_classes, stat_density, stat_stability,
    stat_transitivity,
};
use puchain::oracle::brute_partition;
use puchain::puniform::{chain_to_iid, detect_puniform_detailed, iid_to_chain, DEFAULT_MATCH_TOL};
use puchain::rng::CounterRng;
use puchain::simulate::{convergence_report, sample_chain_replicate, sample_puniform_chain_replicate};
use puchain::space::dyad_count;
use puchain::{models, FamilyKind, Multigraph, PermutationFamily, Pmf, StateSpace, StochasticMatrix};

/// Relative tolerance for `partition --brute`.
const BRUTE_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "puchain", version, about = "Permutation-uniform Markov chains and graph exponential families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a chain and write its trajectory as JSONL.
    Simulate(SimulateArgs),
    /// Decide whether a transition matrix is p-uniform.
    Detect(DetectArgs),
    /// Map a trajectory to its iid companion sequence, or back.
    Transform(TransformArgs),
    /// Closed-form estimate of p for density and stability chains.
    Fit(FitArgs),
    /// Log-partition function of a multigraph model or a CEF.
    Partition(PartitionArgs),
    /// Running means of a transition statistic along a trajectory.
    Diagnose(DiagnoseArgs),
    /// Exchangeability of the common row and of every transition row.
    Exchangeability(ExchangeabilityArgs),
    /// Draw multigraphs from a dyadically independent model.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChainModel {
    Density,
    Stability,
    Modular,
    Custom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sampler {
    /// Inverse-CDF draws from the rows of the matrix.
    Matrix,
    /// Iid draws from the common row pushed through the family.
    Puniform,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyChoice {
    Identity,
    Density,
    Stability,
    Symdiff,
    Modular,
    Complement,
}

impl FamilyChoice {
    fn kind(self) -> FamilyKind {
        match self {
            Self::Identity | Self::Density => FamilyKind::Identity,
            Self::Stability => FamilyKind::Stability,
            Self::Symdiff => FamilyKind::Symdiff,
            Self::Modular => FamilyKind::Modular,
            Self::Complement => FamilyKind::Complement,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatName {
    Density,
    Stability,
    Transitivity,
    Degseq,
}

#[derive(Args)]
struct ChainSpec {
    #[arg(long, value_enum, default_value = "density")]
    model: ChainModel,
    /// Number of vertices (graph models) or states (modular).
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability of the density and stability models.
    #[arg(long)]
    p: Option<f64>,
    /// Matrix file for `--model custom` (JSON rows or CSV).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Normalize the rows of the custom matrix.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainSpec,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    x0: usize,
    #[arg(long, value_enum, default_value = "matrix")]
    sampler: Sampler,
    /// Add the decoded dyads of each multigraph state.
    #[arg(long)]
    expand: bool,
    /// Trajectory file; replicate `r > 0` goes to `<stem>.<r>.<ext>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = DEFAULT_MATCH_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    /// Chain states to companion states.
    Iid,
    /// Companion states to chain states, starting from `--x0`.
    Chain,
}

#[derive(Args)]
struct FamilySpec {
    /// Built-in family over `G(n, 1)` (or `0..n` for modular).
    #[arg(long, value_enum, conflicts_with = "family_file")]
    family: Option<FamilyChoice>,
    /// Family file: `{"sigma": [[...]]}`.
    #[arg(long)]
    family_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    traj: PathBuf,
    #[command(flatten)]
    family: FamilySpec,
    #[arg(long, value_enum, default_value = "iid")]
    to: Direction,
    #[arg(long)]
    x0: Option<usize>,
    #[arg(long)]
    expand: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_chain_kind, default_value = "density")]
    kind: GraphChainKind,
    /// The file holds the companion sequence produced by `transform`.
    #[arg(long)]
    companion: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    /// Multigraph model file.
    #[arg(long, required_unless_present = "cef", conflicts_with = "cef")]
    model: Option<PathBuf>,
    /// CEF file; prints the log-normalizer of every row.
    #[arg(long)]
    cef: Option<PathBuf>,
    /// Parameter vector, comma separated; repeat for several probes.
    #[arg(long, required = true, allow_negative_numbers = true)]
    theta: Vec<String>,
    /// Cross-check against exhaustive enumeration.
    #[arg(long)]
    brute: bool,
    /// Shift the fast value before the cross-check (negative control).
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "density")]
    stat: StatName,
    /// Edge probability; sets the default target.
    #[arg(long)]
    p: Option<f64>,
    /// Target mean, comma separated; overrides the one implied by `--p`.
    #[arg(long, allow_negative_numbers = true)]
    target: Option<String>,
    /// Family under which the statistic is checked for p-uniformity;
    /// defaults to the chain matching the statistic.
    #[arg(long, value_enum)]
    family: Option<FamilyChoice>,
    /// Report no standard error.
    #[arg(long)]
    no_family: bool,
    /// Write running means as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExchangeabilityArgs {
    #[command(flatten)]
    chain: ChainSpec,
    /// Family file for `--model custom`.
    #[arg(long)]
    family_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    theta: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_chain_kind(s: &str) -> Result<GraphChainKind, String> {
    s.parse().map_err(|e: puchain::Error| e.to_string())
}

/// A failed run and its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<puchain::Error>() {
            Some(puchain::Error::InvariantViolated(_) | puchain::Error::NoConvergence { .. }) => 3,
            _ => 2,
        };
        Self { code, error }
    }
}

impl From<puchain::Error> for Failure {
    fn from(e: puchain::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn numerical(msg: String) -> Failure {
    Failure {
        code: 3,
        error: anyhow!(msg),
    }
}

type Run = Result<(), Failure>;

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    // repeated flags are allowed so that --config values can override
    let command = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true));
    let cli = match command
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::Transform(a) => transform(a),
        Command::Fit(a) => fit(a),
        Command::Partition(a) => partition(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Exchangeability(a) => exchangeability(a),
        Command::Sample(a) => sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Run {
    let text = to_json_string(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_vector(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number {x:?}")))
        .collect()
}

fn require<T>(v: Option<T>, flag: &str, why: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("{flag} is required {why}"))
}

/// A chain matrix with its space and, for built-in models, its family.
struct Chain {
    space: StateSpace,
    matrix: StochasticMatrix,
    family: Option<PermutationFamily>,
}

fn build_chain(spec: &ChainSpec) -> anyhow::Result<Chain> {
    match spec.model {
        ChainModel::Density | ChainModel::Stability => {
            let n = require(spec.n, "--n", "for graph models")?;
            let p = require(spec.p, "--p", "for graph models")?;
            let kind = if spec.model == ChainModel::Density {
                FamilyKind::Identity
            } else {
                FamilyKind::Stability
            };
            let space = StateSpace::multigraph(n, 1)?;
            let matrix = models::density_or_stability_cef(n, kind)?.transition_matrix(&[p])?;
            let family = PermutationFamily::builtin(kind, &space)?;
            Ok(Chain { space, matrix, family: Some(family) })
        }
        ChainModel::Modular => {
            let n = require(spec.n, "--n", "for the modular chain")?;
            let (matrix, family, _) = models::modular_chain(n)?;
            Ok(Chain { space: StateSpace::modular(n)?, matrix, family: Some(family) })
        }
        ChainModel::Custom => {
            let path = require(spec.matrix.as_deref(), "--matrix", "for a custom chain")?;
            let matrix = parse_matrix(&read(path)?, spec.normalize)?;
            let space = match spec.n {
                Some(n) if StateSpace::multigraph(n, 1)?.size() == matrix.size() => StateSpace::multigraph(n, 1)?,
                Some(n) => bail!("matrix has {} states, G({n}, 1) has {}", matrix.size(), 1u64 << dyad_count(n)),
                None => StateSpace::indexed(matrix.size())?,
            };
            Ok(Chain { space, matrix, family: None })
        }
    }
}

/// `mu(c) = P(0, sigma_0^{-1} c)`.
fn common_row(p: &StochasticMatrix, family: &PermutationFamily) -> puchain::Result<Pmf> {
    Pmf::new((0..p.size()).map(|c| p.get(0, family.apply_inverse(0, c))).collect())
}

fn replicate_path(out: &Path, r: u64) -> PathBuf {
    if r == 0 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{r}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{r}"),
    };
    out.with_file_name(name)
}

fn thread_pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn simulate(a: SimulateArgs) -> Run {
    let chain = build_chain(&a.chain)?;
    if a.replicates == 0 {
        return Err(anyhow!("--replicates must be at least 1").into());
    }
    if a.replicates > 1 && a.out.is_none() {
        return Err(anyhow!("--out is required with several replicates").into());
    }
    let puniform = match a.sampler {
        Sampler::Matrix => None,
        Sampler::Puniform => {
            let family = match &chain.family {
                Some(f) => f.clone(),
                None => detect_puniform_detailed(&chain.matrix, DEFAULT_MATCH_TOL)
                    .map_err(|(x, y, z)| anyhow!("matrix is not p-uniform (violation at {x}, {y}, {z})"))?
                    .family()
                    .clone(),
            };
            let mu = common_row(&chain.matrix, &family)?;
            Some((family, mu))
        }
    };
    let rng = CounterRng::new(a.seed);
    let expand = a.expand && chain.space.multigraph_shape().is_some();
    let pool = thread_pool(a.jobs)?;
    let runs: Vec<anyhow::Result<Value>> = pool.install(|| {
        (0..a.replicates)
            .into_par_iter()
            .map(|r| {
                let x = match &puniform {
                    None => sample_chain_replicate(&chain.matrix, a.x0, a.steps, &rng, r)?,
                    Some((family, mu)) => sample_puniform_chain_replicate(mu, family, a.x0, a.steps, &rng, r)?,
                };
                let path = a.out.as_deref().map(|o| replicate_path(o, r));
                let mut buf = Vec::new();
                write_trajectory(&mut buf, &x, expand.then_some(&chain.space))?;
                match &path {
                    Some(p) => std::fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?,
                    None => std::io::stdout().lock().write_all(&buf)?,
                }
                Ok(json!({
                    "replicate": r,
                    "path": path.map(|p| p.display().to_string()),
                    "final_state": x.states().last(),
                }))
            })
            .collect()
    });
    let runs = runs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    eprintln!(
        "simulated {} replicate(s) of {} steps on {} states (seed {})",
        a.replicates,
        a.steps,
        chain.matrix.size(),
        a.seed
    );
    if a.out.is_some() {
        emit(
            &json!({"steps": a.steps, "seed": a.seed, "states": chain.matrix.size(), "replicates": runs}),
            None,
        )?;
    }
    Ok(())
}

fn detect(a: DetectArgs) -> Run {
    let p = parse_matrix(&read(&a.matrix)?, a.normalize)?;
    let value = match detect_puniform_detailed(&p, a.tol) {
        Ok(w) => {
            eprintln!("p-uniform: common row has {} states", w.common_row().len());
            json!({
                "puniform": true,
                "reference_state": w.reference_state(),
                "mu": w.common_row().as_slice(),
                "sigma": w.family().to_rows(),
            })
        }
        Err((x, y, z)) => {
            eprintln!("not p-uniform: rows {x} and {y} disagree at {z}");
            json!({"puniform": false, "violation": [x, y, z]})
        }
    };
    emit(&value, a.out.as_deref())
}

fn build_family(spec: &FamilySpec) -> anyhow::Result<(PermutationFamily, Option<StateSpace>)> {
    if let Some(path) = &spec.family_file {
        let f: FamilyJson = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let family = f.build()?;
        let space = match spec.n {
            Some(n) => Some(StateSpace::multigraph(n, 1)?).filter(|s| s.size() == family.size()),
            None => None,
        };
        return Ok((family, space));
    }
    let choice = require(spec.family, "--family or --family-file", "")?;
    let n = require(spec.n, "--n", "with a built-in family")?;
    let space = if choice == FamilyChoice::Modular {
        StateSpace::modular(n)?
    } else {
        StateSpace::multigraph(n, 1)?
    };
    let family = PermutationFamily::builtin(choice.kind(), &space)?;
    let graphs = space.multigraph_shape().is_some().then_some(space);
    Ok((family, graphs))
}

fn open_trajectory(path: &Path, size: usize) -> anyhow::Result<puchain::Trajectory> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_trajectory(BufReader::new(file), size)?)
}

fn transform(a: TransformArgs) -> Run {
    let (family, space) = build_family(&a.family)?;
    let x = open_trajectory(&a.traj, family.size())?;
    let y = match a.to {
        Direction::Iid => chain_to_iid(&x, &family)?,
        Direction::Chain => {
            let x0 = require(a.x0, "--x0", "to rebuild a chain")?;
            iid_to_chain(x0, &x, &family)?
        }
    };
    let expand = if a.expand { space.as_ref() } else { None };
    match &a.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_trajectory(&mut w, &y, expand)?;
            w.flush().context("flushing output")?;
        }
        None => write_trajectory(&mut std::io::stdout().lock(), &y, expand)?,
    }
    eprintln!("transformed {} states into {}", x.len(), y.len());
    Ok(())
}

fn fit(a: FitArgs) -> Run {
    let space = StateSpace::multigraph(a.n, 1)?;
    let x = open_trajectory(&a.traj, space.size())?;
    let est = if a.companion {
        mle_from_companion(&space, &x)?
    } else {
        mle_density_stability(&space, &x, a.kind)?
    };
    if est.boundary {
        eprintln!("warning: estimate {} lies on the boundary of (0, 1)", est.p_hat);
    }
    eprintln!("p_hat = {:.6} from {} transitions", est.p_hat, est.transitions);
    let eta_hat = (!est.boundary).then(|| (a.n as f64 - 1.0) * (est.p_hat / (1.0 - est.p_hat)).ln());
    emit(
        &json!({
            "p_hat": est.p_hat,
            "eta_hat": eta_hat,
            "boundary": est.boundary,
            "transitions": est.transitions,
        }),
        a.out.as_deref(),
    )
}

fn partition(a: PartitionArgs) -> Run {
    let probes = a.theta.iter().map(|t| parse_vector(t)).collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(path) = &a.cef {
        let spec: CefJson = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let cef = spec.build()?;
        let checks = validate_cef(&cef, &probes)?;
        let mut results = Vec::new();
        for (theta, check) in probes.iter().zip(&checks) {
            results.push(json!({
                "theta": theta,
                "row_psi": cef.row_log_partitions(theta)?,
                "shared_normalizer": check.shared_normalizer(),
            }));
        }
        eprintln!("{} probe(s) over {} rows", probes.len(), cef.rows());
        return emit(&Value::Array(results), a.out.as_deref());
    }
    let path = require(a.model.as_deref(), "--model", "")?;
    let spec: ModelJson = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let model = spec.build()?;
    let flat = if a.brute { Some(model.to_expfam()?) } else { None };
    let mut results = Vec::new();
    let mut mismatch = None;
    for theta in &probes {
        let (psi, terms) = model.fast_log_partition_counted(theta)?;
        let psi = psi + a.perturb;
        let mut row = json!({"theta": theta, "psi": psi, "terms": terms});
        if let Some(flat) = &flat {
            let brute = brute_partition(flat, theta)?;
            let rel = (psi - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
            row["brute"] = json!(brute);
            row["relative_error"] = json!(rel);
            if !(rel <= BRUTE_TOL) && mismatch.is_none() {
                mismatch = Some(format!("theta {theta:?}: fast {psi} vs brute {brute} (relative error {rel:e})"));
            }
        }
        results.push(row);
    }
    emit(&Value::Array(results), a.out.as_deref())?;
    match mismatch {
        Some(m) => Err(numerical(format!("partition cross-check failed at {m}"))),
        None => {
            eprintln!("{} probe(s){}", probes.len(), if a.brute { ", brute force agrees" } else { "" });
            Ok(())
        }
    }
}

fn diagnose(a: DiagnoseArgs) -> Run {
    let space = StateSpace::multigraph(a.n, 1)?;
    let x = open_trajectory(&a.traj, space.size())?;
    let graphs: Vec<Multigraph> = space.multigraphs()?.collect();
    let n = a.n as f64;
    let big_n = dyad_count(a.n) as f64;
    let implied = a.p.map(|p| match a.stat {
        StatName::Density | StatName::Stability => vec![p * big_n / (n - 1.0)],
        StatName::Degseq => vec![p * (n - 1.0); a.n],
        StatName::Transitivity => Vec::new(),
    });
    let target = match &a.target {
        Some(t) => parse_vector(t)?,
        None => implied
            .filter(|t| !t.is_empty())
            .ok_or_else(|| anyhow!("--target is required for this statistic without --p"))?,
    };
    let family = if a.no_family {
        None
    } else {
        let choice = a.family.or(match a.stat {
            StatName::Density | StatName::Degseq => Some(FamilyChoice::Identity),
            StatName::Stability => Some(FamilyChoice::Stability),
            StatName::Transitivity => None,
        });
        choice.map(|c| PermutationFamily::builtin(c.kind(), &space)).transpose()?
    };
    let stat = a.stat;
    let tau = |i: usize, j: usize| -> Vec<f64> {
        let (g, h) = (&graphs[i], &graphs[j]);
        match stat {
            StatName::Density => vec![stat_density(g, h).unwrap_or(f64::NAN)],
            StatName::Stability => vec![stat_stability(g, h).unwrap_or(f64::NAN)],
            StatName::Transitivity => vec![stat_transitivity(g, h).unwrap_or(f64::NAN)],
            StatName::Degseq => degree_sequence(h).into_iter().map(|d| d as f64).collect(),
        }
    };
    let report = convergence_report(&x, &tau, &target, family.as_ref())?;
    if let Some(path) = &a.csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        let header: Vec<String> = (0..target.len()).map(|k| format!("mean_{k}")).collect();
        writeln!(w, "step,{}", header.join(",")).context("writing CSV")?;
        for (i, m) in report.running_mean.iter().enumerate() {
            let cells: Vec<String> = m.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{},{}", i + 1, cells.join(",")).context("writing CSV")?;
        }
        w.flush().context("writing CSV")?;
    }
    match &report.stderr_estimate {
        Some(se) => eprintln!(
            "final mean {:?}, target {:?}, standard error {:?}",
            report.final_mean(),
            report.target,
            se
        ),
        None => eprintln!("final mean {:?}, target {:?}", report.final_mean(), report.target),
    }
    emit(&serde_json::to_value(&report).context("encoding report")?, a.out.as_deref())
}

fn exchangeability(a: ExchangeabilityArgs) -> Run {
    let chain = build_chain(&a.chain)?;
    if chain.space.multigraph_shape().is_none() {
        return Err(anyhow!("exchangeability needs a graph state space; pass --n").into());
    }
    let family = match (&chain.family, &a.family_file) {
        (_, Some(path)) => serde_json::from_str::<FamilyJson>(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?
            .build()?,
        (Some(f), None) => f.clone(),
        (None, None) => return Err(anyhow!("--family-file is required for a custom chain").into()),
    };
    let mu = common_row(&chain.matrix, &family)?;
    let classes = iso_classes(&chain.space)?;
    let report = exchangeability_transfer(&chain.matrix, &family, &mu, &classes)?;
    eprintln!(
        "{} isomorphism classes; common row {}exchangeable, {} of {} rows exchangeable",
        classes.len(),
        if report.mu_exchangeable { "" } else { "not " },
        report.rows_exchangeable.iter().filter(|&&b| b).count(),
        report.rows_exchangeable.len()
    );
    emit(&serde_json::to_value(&report).context("encoding report")?, a.out.as_deref())
}

fn sample(a: SampleArgs) -> Run {
    let spec: ModelJson = serde_json::from_str(&read(&a.model)?).with_context(|| format!("parsing {}", a.model.display()))?;
    let model = spec.build()?;
    let theta = parse_vector(&a.theta)?;
    if a.replicates == 0 {
        return Err(anyhow!("--replicates must be at least 1").into());
    }
    let rng = CounterRng::new(a.seed);
    let pool = thread_pool(a.jobs)?;
    let draws: Vec<puchain::Result<Multigraph>> = pool.install(|| {
        (0..a.replicates)
            .into_par_iter()
            .map(|r| model.sample_replicate(&theta, &rng, r))
            .collect()
    });
    let graphs = draws
        .into_iter()
        .map(|g| g.map(|g| MultigraphJson::from_graph(&g)))
        .collect::<puchain::Result<Vec<_>>>()?;
    eprintln!("sampled {} multigraph(s) from G({}, {})", graphs.len(), model.n(), model.t());
    let value = if a.replicates == 1 {
        serde_json::to_value(&graphs[0])
    } else {
        serde_json::to_value(&graphs)
    }
    .context("encoding multigraphs")?;
    emit(&value, a.out.as_deref())
}
