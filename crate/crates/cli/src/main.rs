use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use edgeid::builtin::{builtin, synthetic8_changes, BUILTIN_NAMES};
use edgeid::graph::{EdgeChangeSet, Network, NodePair};
use edgeid::matpower::{dc_laplacian_with, parse_case, DcMetadata, NegativeSusceptance};
use edgeid::metrics::{lambda_sweep, write_sweep_csv, zero_threshold, Scenario, SolverChoice, SweepConfig, SweepRow};
use edgeid::par::with_jobs;
use edgeid::simulate::{random_removal_scenario, simulate};
use edgeid::solvers::{EstimateReport, LambdaScale, LassoConfig, TlsConfig, TlsInit};
use edgeid::vectorize::DesignMode;
use edgeid::Execution;

#[derive(Parser, Debug)]
#[command(name = "edgeid", version, about = "Identify edge changes in equilibrium networks from noisy measurements")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate measurements of the changed network.
    Simulate(ScenarioArgs),
    /// Estimate the Laplacian change for one λ.
    Estimate(EstimateArgs),
    /// Score an estimator over a λ grid and repeated noise draws.
    Sweep(SweepArgs),
    /// Turn a sweep JSON into plotting columns.
    PlotData(PlotDataArgs),
    /// Convert a MATPOWER case into an edge list and metadata.
    Case(CaseArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScenarioArgs {
    /// Builtin network (synthetic8, ieee57, ieee118, ieee145) or edge-list file.
    #[arg(long, conflicts_with = "matpower")]
    network: Option<String>,
    /// MATPOWER case file.
    #[arg(long)]
    matpower: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NegativePolicy::Reject)]
    negative_susceptance: NegativePolicy,
    /// Removed node pairs, 1-based, e.g. "2-3,4-1".
    #[arg(long, conflicts_with = "random_remove")]
    remove: Option<String>,
    /// Remove K edges chosen uniformly with `--seed`.
    #[arg(long, value_name = "K")]
    random_remove: Option<usize>,
    /// Measurement horizon.
    #[arg(long = "T", value_name = "T", default_value_t = 30)]
    horizon: usize,
    #[arg(long, default_value_t = 0.1)]
    noise_var: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate only over the reference support (edges and diagonals).
    #[arg(long, overrides_with = "full")]
    reduced: bool,
    /// Estimate over every Vech coordinate (default).
    #[arg(long, overrides_with = "reduced")]
    full: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverName::Lasso)]
    solver: SolverName,
    #[arg(long, value_enum, default_value_t = ScaleName::Raw)]
    lambda_scale: ScaleName,
    /// Weight each penalty term by the column RMS (LASSO only).
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// TLS starting point.
    #[arg(long, value_enum, default_value_t = TlsStart::Zero)]
    tls_init: TlsStart,
}

#[derive(Args, Debug, Clone, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    lambda: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Evenly spaced grid `lo:hi:steps`, strictly increasing.
    #[arg(long)]
    lambda_grid: String,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug, Clone)]
struct PlotDataArgs {
    /// Sweep JSON written by `sweep`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "plot.csv")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CaseArgs {
    #[arg(long)]
    matpower: PathBuf,
    #[arg(long, value_enum, default_value_t = NegativePolicy::Reject)]
    negative_susceptance: NegativePolicy,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverName {
    Lasso,
    Tls,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScaleName {
    Raw,
    PerSample,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum TlsStart {
    Zero,
    Lasso,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum NegativePolicy {
    Reject,
    Magnitude,
}

impl From<NegativePolicy> for NegativeSusceptance {
    fn from(p: NegativePolicy) -> Self {
        match p {
            NegativePolicy::Reject => NegativeSusceptance::Reject,
            NegativePolicy::Magnitude => NegativeSusceptance::Magnitude,
        }
    }
}

impl From<ScaleName> for LambdaScale {
    fn from(s: ScaleName) -> Self {
        match s {
            ScaleName::Raw => LambdaScale::Raw,
            ScaleName::PerSample => LambdaScale::PerSample,
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// The network under study with the change applied to it.
struct Setup {
    network: Network,
    changes: EdgeChangeSet,
    source: String,
    bus_ids: Option<Vec<i64>>,
}

fn load_network(args: &ScenarioArgs) -> Result<(Network, String, Option<Vec<i64>>)> {
    if let Some(path) = &args.matpower {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let case = parse_case(&text).with_context(|| format!("parsing {}", path.display()))?;
        let (dc, _) = dc_laplacian_with(&case, args.negative_susceptance.into())?;
        return Ok((dc.network, path.display().to_string(), Some(dc.bus_ids)));
    }
    let name = args.network.as_deref().unwrap_or("synthetic8");
    if BUILTIN_NAMES.contains(&name) {
        return Ok((builtin(name)?, name.to_string(), None));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(usage(format!(
            "`{name}` is neither a builtin network ({}) nor an existing file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let net = Network::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((net, name.to_string(), None))
}

fn parse_pairs(spec: &str, n: usize) -> Result<EdgeChangeSet> {
    let mut pairs = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once('-')
            .ok_or_else(|| usage(format!("bad pair `{item}`, expected `a-b`")))?;
        let node = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                _ => Err(usage(format!("bad node `{s}` in `{item}`; nodes are 1..{n}"))),
            }
        };
        let (a, b) = (node(a)?, node(b)?);
        if a == b {
            return Err(usage(format!("`{item}` is a self-loop")));
        }
        pairs.push(NodePair::new(a, b));
    }
    if pairs.is_empty() {
        return Err(usage("--remove lists no pairs"));
    }
    Ok(EdgeChangeSet::removals(pairs))
}

fn setup(args: &ScenarioArgs) -> Result<Setup> {
    if args.horizon == 0 {
        return Err(usage("--T must be at least 1"));
    }
    if !(args.noise_var >= 0.0 && args.noise_var.is_finite()) {
        return Err(usage("--noise-var must be finite and non-negative"));
    }
    let (network, source, bus_ids) = load_network(args)?;
    let changes = match (&args.remove, args.random_remove) {
        (Some(spec), _) => parse_pairs(spec, network.node_count())?,
        (None, Some(k)) => random_removal_scenario(&network, k, args.seed).map_err(|e| usage(e.to_string()))?,
        (None, None) if source == "synthetic8" => synthetic8_changes(),
        (None, None) => return Err(usage("choose the change with --remove or --random-remove")),
    };
    changes.validate_against(&network).map_err(|e| usage(e.to_string()))?;
    Ok(Setup {
        network,
        changes,
        source,
        bus_ids,
    })
}

impl Setup {
    fn scenario(&self, args: &ScenarioArgs) -> Scenario {
        Scenario {
            network: self.network.clone(),
            changes: self.changes.clone(),
            horizon: args.horizon,
            noise_variance: args.noise_var,
            reduced: args.reduced,
            design_mode: DesignMode::Auto,
        }
    }

    fn removed(&self) -> Vec<[usize; 2]> {
        self.changes.removed.iter().map(|p| [p.lo() + 1, p.hi() + 1]).collect()
    }

    fn summary(&self) -> NetworkSummary {
        NetworkSummary {
            source: self.source.clone(),
            nodes: self.network.node_count(),
            edges: self.network.edge_count(),
            removed: self.removed(),
            bus_ids: self.bus_ids.clone(),
        }
    }
}

#[derive(Serialize)]
struct NetworkSummary {
    source: String,
    nodes: usize,
    edges: usize,
    /// 1-based node pairs.
    removed: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bus_ids: Option<Vec<i64>>,
}

fn solver_choice(args: &SolverArgs, lambda: f64) -> Result<SolverChoice> {
    let scale: LambdaScale = args.lambda_scale.into();
    let mut lasso = LassoConfig {
        lambda,
        standardize: args.standardize,
        scale,
        ..Default::default()
    };
    Ok(match args.solver {
        SolverName::Lasso => {
            if let Some(tol) = args.tol {
                lasso.tol = tol;
            }
            if let Some(it) = args.max_iters {
                lasso.max_iters = it;
            }
            SolverChoice::Lasso(lasso)
        }
        SolverName::Tls => {
            if args.standardize {
                return Err(usage("--standardize applies to the LASSO solver only"));
            }
            let mut cfg = TlsConfig {
                lambda,
                scale,
                init: match args.tls_init {
                    TlsStart::Zero => TlsInit::Zero,
                    TlsStart::Lasso => TlsInit::Lasso(lasso),
                },
                ..Default::default()
            };
            if let Some(tol) = args.tol {
                cfg.tol = tol;
            }
            if let Some(it) = args.max_iters {
                cfg.max_iters = it;
            }
            SolverChoice::Tls(cfg)
        }
    })
}

fn objective_convention(args: &SolverArgs) -> String {
    let scale: LambdaScale = args.lambda_scale.into();
    match args.solver {
        SolverName::Lasso => scale.describe(args.standardize),
        SolverName::Tls => {
            let lambda = match scale {
                LambdaScale::Raw => "lambda",
                LambdaScale::PerSample => "N*lambda",
            };
            format!("||X(b0 + b) - y||^2 / (1 + ||b0 + b||^2) + {lambda}*||b||_1")
        }
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("writing {}", path.display()))?;
    std::io::Write::write_all(&mut w, b"\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    config: &'a ScenarioArgs,
    network: NetworkSummary,
    measurements: &'a str,
}

fn cmd_simulate(args: &ScenarioArgs) -> Result<Outcome> {
    let s = setup(args)?;
    let truth = s.scenario(args).truth()?;
    let ms = simulate(&truth.l1, args.horizon, args.noise_var, args.seed)?;
    create_out(&args.out)?;
    let csv_path = args.out.join("measurements.csv");
    let file = File::create(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    ms.write_csv(BufWriter::new(file))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    write_json(
        &args.out.join("scenario.json"),
        &SimulateOutput {
            config: args,
            network: s.summary(),
            measurements: "measurements.csv",
        },
    )?;
    println!(
        "simulated {} nodes x {} steps, {} removed edges -> {}",
        ms.nodes(),
        ms.horizon(),
        s.changes.removed.len(),
        args.out.display()
    );
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct RecoveredEdge {
    /// 1-based, `a < b`.
    a: usize,
    b: usize,
    /// Estimated `ΔL_ab`.
    value: f64,
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    config: &'a EstimateArgs,
    objective: String,
    network: NetworkSummary,
    design_rows: usize,
    design_cols: usize,
    zero_threshold: f64,
    estimate: EstimateReport,
    recovered_edges: Vec<RecoveredEdge>,
}

fn cmd_estimate(args: &EstimateArgs) -> Result<Outcome> {
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(usage("--lambda must be finite and non-negative"));
    }
    let sa = &args.scenario;
    let s = setup(sa)?;
    let scenario = s.scenario(sa);
    let truth = scenario.truth()?;
    let ds = scenario.design(&truth, sa.seed)?;
    let choice = solver_choice(&args.solver, args.lambda)?;
    let est = choice
        .solve_all(&ds, &[args.lambda])?
        .pop()
        .expect("one estimate per lambda");
    let eps = zero_threshold(&est.beta);
    let report = est.report(&ds);
    let recovered: Vec<RecoveredEdge> = report
        .beta
        .iter()
        .filter(|e| e.row != e.col && e.value.abs() > eps)
        .map(|e| RecoveredEdge {
            a: e.col,
            b: e.row,
            value: e.value,
        })
        .collect();

    create_out(&sa.out)?;
    let mut edges = String::from("# a b delta_L\n");
    for e in &recovered {
        edges.push_str(&format!("{} {} {}\n", e.a, e.b, e.value));
    }
    let edges_path = sa.out.join("edges.txt");
    fs::write(&edges_path, edges).with_context(|| format!("writing {}", edges_path.display()))?;
    let listed: Vec<String> = recovered.iter().map(|e| format!("({},{})", e.a, e.b)).collect();
    let converged = est.converged;
    let iterations = est.iterations;
    write_json(
        &sa.out.join("estimate.json"),
        &EstimateOutput {
            config: args,
            objective: objective_convention(&args.solver),
            network: s.summary(),
            design_rows: ds.nrows(),
            design_cols: ds.ncols(),
            zero_threshold: eps,
            estimate: report,
            recovered_edges: recovered,
        },
    )?;
    println!("recovered {} changed edges: {}", listed.len(), listed.join(" "));
    if converged {
        Ok(Outcome::Done)
    } else {
        log::error!("solver stopped after {iterations} iterations without converging");
        Ok(Outcome::NotConverged)
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(usage(format!("bad --lambda-grid `{spec}`, expected lo:hi:steps")));
    };
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| usage(format!("bad λ `{s}` in --lambda-grid")))
    };
    let (lo, hi) = (num(lo)?, num(hi)?);
    let steps: usize = steps
        .trim()
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| usage(format!("bad step count `{steps}` in --lambda-grid")))?;
    if steps == 1 {
        if lo != hi {
            return Err(usage("a one-point --lambda-grid needs lo == hi"));
        }
        return Ok(vec![lo]);
    }
    if hi <= lo {
        return Err(usage("--lambda-grid must be strictly increasing (lo < hi)"));
    }
    Ok((0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect())
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config: &'a SweepArgs,
    objective: String,
    network: NetworkSummary,
    lambdas: &'a [f64],
    seeds: Vec<u64>,
    rows: &'a [SweepRow],
}

fn cmd_sweep(args: &SweepArgs) -> Result<Outcome> {
    let lambdas = parse_grid(&args.lambda_grid)?;
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let sa = &args.scenario;
    let s = setup(sa)?;
    let scenario = s.scenario(sa);
    let cfg = SweepConfig {
        lambdas: lambdas.clone(),
        runs: args.runs,
        seed0: sa.seed,
        solver: solver_choice(&args.solver, 0.0)?,
        execution: if args.jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let rows = with_jobs(args.jobs, || lambda_sweep(&scenario, &cfg))?;
    let nonconverged: usize = rows.iter().map(|r| r.nonconverged).sum();
    if nonconverged > 0 {
        log::warn!("{nonconverged} (lambda, run) cells did not converge");
    }

    create_out(&sa.out)?;
    let csv_path = sa.out.join("sweep.csv");
    let file = File::create(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    write_sweep_csv(&rows, BufWriter::new(file)).with_context(|| format!("writing {}", csv_path.display()))?;
    write_json(
        &sa.out.join("sweep.json"),
        &SweepOutput {
            config: args,
            objective: objective_convention(&args.solver),
            network: s.summary(),
            lambdas: &lambdas,
            seeds: (0..args.runs as u64).map(|r| sa.seed.wrapping_add(r)).collect(),
            rows: &rows,
        },
    )?;
    let best = rows.iter().max_by(|a, b| a.acc.total_cmp(&b.acc)).expect("nonempty grid");
    println!(
        "{} lambdas x {} runs; best acc {:.4} at lambda {} -> {}",
        rows.len(),
        args.runs,
        best.acc,
        best.lambda,
        sa.out.display()
    );
    Ok(Outcome::Done)
}

#[derive(serde::Deserialize)]
struct SweepInput {
    rows: Vec<SweepRow>,
}

fn cmd_plot_data(args: &PlotDataArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let input: SweepInput =
        serde_json::from_str(&text).map_err(|e| usage(format!("{} is not a sweep JSON: {e}", args.input.display())))?;
    let mut out = String::from("lambda,acc,tp,tn,fp,fn,tpr,tnr,acc_std\n");
    for r in &input.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.lambda, r.acc, r.tp, r.tn, r.fp, r.fn_, r.tpr, r.tnr, r.acc_std
        ));
    }
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_out(dir)?;
    }
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{} rows -> {}", input.rows.len(), args.out.display());
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct CaseOutput<'a> {
    config: &'a CaseArgs,
    #[serde(flatten)]
    meta: DcMetadata,
}

fn cmd_case(args: &CaseArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.matpower).with_context(|| format!("reading {}", args.matpower.display()))?;
    let case = parse_case(&text).with_context(|| format!("parsing {}", args.matpower.display()))?;
    let (dc, _) = dc_laplacian_with(&case, args.negative_susceptance.into())?;
    create_out(&args.out)?;
    let list_path = args.out.join("network.txt");
    fs::write(&list_path, dc.network.to_edge_list()).with_context(|| format!("writing {}", list_path.display()))?;
    let meta = dc.metadata();
    println!("{} buses, {} lines -> {}", meta.n, meta.m, args.out.display());
    write_json(
        &args.out.join("case.json"),
        &CaseOutput { config: args, meta },
    )?;
    Ok(Outcome::Done)
}

enum Outcome {
    Done,
    NotConverged,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<edgeid::Error>() {
            return match e {
                edgeid::Error::Parse { .. } | edgeid::Error::ZeroReactance { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::PlotData(a) => cmd_plot_data(a),
        Command::Case(a) => cmd_case(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
