use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hybridnet::estimation::{
    fit_integrated, fit_mh, fit_nelder_mead, summarize, EstimationResult, FitStatus, Method,
    MhConfig, NelderMeadConfig, ParamSummary, PointSummary, Prior, StepSizes, PARAM_NAMES,
};
use hybridnet::generator::{simulate_replicates, with_workers, SimulationConfig};
use hybridnet::io;
use hybridnet::likelihood::{replay, replay_observed, SufficientStats};
use hybridnet::limit::limit_pmf;
use hybridnet::{ccdf, classify_scenario, degree_counts, Direction, EdgeLog, HybridParams};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

type SummaryCell = fn(&ParamSummary) -> String;

#[derive(Parser)]
#[command(
    name = "hybridnet",
    version,
    about = "Simulate and fit directed hybrid PA/UA random networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicate networks and write their edge logs.
    Simulate(SimulateArgs),
    /// Fit parameters to an edge log.
    Fit(FitArgs),
    /// Estimate on many replicates and summarize mean, bias and spread.
    Table(TableArgs),
    /// Empirical degree CCDF of an edge log or a simulated network.
    Ccdf(CcdfArgs),
    /// Limit degree pmf implied by the parameters.
    LimitPmf(LimitPmfArgs),
    /// Label every edge of a log with its scenario.
    Classify(ClassifyArgs),
}

/// Model parameters; `--alpha --beta --p --din --dout` are required
/// wherever parameters are needed.
#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Defaults to 1 - alpha - beta - xi - eta.
    #[arg(long)]
    gamma: Option<f64>,
    /// Probability of a new self-looped node (0 when absent).
    #[arg(long)]
    xi: Option<f64>,
    /// Probability of a new pair of nodes (0 when absent).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    din: Option<f64>,
    #[arg(long)]
    dout: Option<f64>,
}

impl ParamArgs {
    fn given(&self) -> bool {
        self.alpha.is_some() || self.beta.is_some() || self.p.is_some()
    }

    fn params(&self) -> hybridnet::Result<HybridParams> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| hybridnet::Error::InvalidConfig(format!("missing --{flag}")))
        };
        let alpha = need(self.alpha, "alpha")?;
        let beta = need(self.beta, "beta")?;
        let xi = self.xi.unwrap_or(0.0);
        let eta = self.eta.unwrap_or(0.0);
        let gamma = self.gamma.unwrap_or(1.0 - alpha - beta - xi - eta);
        HybridParams::extended(
            alpha,
            beta,
            gamma,
            xi,
            eta,
            need(self.p, "p")?,
            need(self.din, "din")?,
            need(self.dout, "dout")?,
        )
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Steps at which to write degree-count snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Origin {
    /// The log was grown from a single self-looped node 1 not listed in it.
    Seed,
    /// The first record is the initial edge of an observed network.
    Observed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Nm,
    Mh,
    Integrated,
}

#[derive(Args, Clone)]
struct EstimatorArgs {
    /// Nelder-Mead iteration cap per run.
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 20_000)]
    iterations: u64,
    #[arg(long, default_value_t = 500)]
    thinning: u64,
    #[arg(long, default_value_t = 0.01)]
    step_scenario: f64,
    #[arg(long, default_value_t = 0.01)]
    step_p: f64,
    #[arg(long, default_value_t = 0.05)]
    step_log_delta: f64,
    /// Upper bound of the flat prior on each offset.
    #[arg(long, default_value_t = 100.0)]
    delta_max: f64,
    #[arg(long, value_enum, default_value_t = SummaryArg::Mean)]
    summary: SummaryArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SummaryArg {
    Mean,
    Median,
}

impl EstimatorArgs {
    fn nm(&self) -> NelderMeadConfig {
        NelderMeadConfig {
            max_iters: self.max_iters,
            ..NelderMeadConfig::default()
        }
    }

    fn mh(&self, seed: u64) -> MhConfig {
        MhConfig {
            burn_in: self.burn_in,
            iterations: self.iterations,
            thinning: self.thinning,
            step_sizes: StepSizes {
                scenario: self.step_scenario,
                p: self.step_p,
                log_delta_in: self.step_log_delta,
                log_delta_out: self.step_log_delta,
            },
            prior: Prior {
                delta_max: self.delta_max,
            },
            seed,
            start: None,
            summary: match self.summary {
                SummaryArg::Mean => PointSummary::Mean,
                SummaryArg::Median => PointSummary::Median,
            },
        }
    }

    fn fit(
        &self,
        method: MethodArg,
        stats: &SufficientStats,
        seed: u64,
    ) -> hybridnet::Result<EstimationResult> {
        match method {
            MethodArg::Nm => fit_nelder_mead(stats, &self.nm()),
            MethodArg::Mh => fit_mh(stats, &self.mh(seed)),
            MethodArg::Integrated => fit_integrated(stats, &self.mh(seed), &self.nm()),
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Nm)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = Origin::Seed)]
    origin: Origin,
    /// Keep records with time >= this (inclusive); implies relabeling.
    #[arg(long)]
    t_start: Option<i64>,
    /// Keep records with time <= this (inclusive); implies relabeling.
    #[arg(long)]
    t_end: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    /// Parameters to simulate from; omit when using --manifest.
    #[command(flatten)]
    params: ParamArgs,
    /// Reuse the edge logs and truth recorded by `simulate`.
    #[arg(long, conflicts_with_all = ["n", "replicates"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nm")]
    methods: Vec<MethodArg>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CcdfArgs {
    /// Edge log to read; otherwise a network is simulated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Origin::Seed)]
    origin: Origin,
    /// Also write the limit CCDF implied by the parameters.
    #[arg(long)]
    with_limit: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LimitPmfArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 50)]
    m_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Origin::Seed)]
    origin: Origin,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool_version: String,
    params: HybridParams,
    n: u64,
    replicates: usize,
    master_seed: u64,
    seeds: Vec<u64>,
    edge_logs: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Table(a) => cmd_table(&a),
        Command::Ccdf(a) => cmd_ccdf(&a),
        Command::LimitPmf(a) => cmd_limit_pmf(&a),
        Command::Classify(a) => cmd_classify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .chain()
                .find_map(|c| c.downcast_ref::<hybridnet::Error>())
                .is_some_and(|h| h.is_validation());
            ExitCode::from(if validation { EXIT_VALIDATION } else { 1 })
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => io::write_text(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let params = a.params.params()?;
    let config = SimulationConfig {
        log_scenarios: false,
        snapshot_steps: a.snapshots.clone(),
        ..SimulationConfig::new(params, a.n, a.seed)
    };
    let sims = simulate_replicates(&config, a.replicates, a.workers)?;
    let mut edge_logs = Vec::with_capacity(sims.len());
    for (i, sim) in sims.iter().enumerate() {
        let name = format!("replicate_{i:04}.txt");
        io::write_text(a.out_dir.join(&name), &io::format_edge_log(&sim.log))?;
        io::write_text(
            a.out_dir.join(format!("replicate_{i:04}_degrees.csv")),
            &io::degree_counts_csv(&degree_counts(&sim.state)),
        )?;
        for snap in &sim.snapshots {
            io::write_text(
                a.out_dir
                    .join(format!("replicate_{i:04}_step_{}.csv", snap.step)),
                &io::degree_counts_csv(&snap.counts),
            )?;
        }
        edge_logs.push(name);
    }
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        params,
        n: a.n,
        replicates: a.replicates,
        master_seed: a.seed,
        seeds: sims.iter().map(|s| s.seed).collect(),
        edge_logs,
    };
    io::write_json(a.out_dir.join("manifest.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn load_stats(
    path: &Path,
    origin: Origin,
    window: Option<(i64, i64)>,
) -> anyhow::Result<(SufficientStats, Option<io::Window>)> {
    let log = io::parse_edge_file(path)?;
    let (log, windowed) = match window {
        Some((start, end)) => {
            let w = io::window(&log, start, end)?;
            (w.log.clone(), Some(w))
        }
        None => (log, None),
    };
    let stats = match origin {
        Origin::Seed => replay(&log),
        Origin::Observed => replay_observed(&log),
    }
    .with_context(|| format!("replaying {}", path.display()))?;
    Ok((stats, windowed))
}

fn cmd_fit(a: &FitArgs) -> anyhow::Result<ExitCode> {
    let window = match (a.t_start, a.t_end) {
        (None, None) => None,
        (s, e) => Some((s.unwrap_or(i64::MIN), e.unwrap_or(i64::MAX))),
    };
    let (stats, windowed) = load_stats(&a.input, a.origin, window)?;
    let result = a.estimator.fit(a.method, &stats, a.seed)?;

    io::write_json(a.out_dir.join("estimate.json"), &result)?;
    if let Some(trace) = &result.trace {
        io::write_text(a.out_dir.join("trace.csv"), &io::trace_csv(trace))?;
    }
    if let Some(w) = windowed {
        let mut csv = String::from("original,relabeled\n");
        for (old, new) in &w.mapping {
            csv.push_str(&format!("{old},{new}\n"));
        }
        io::write_text(a.out_dir.join("node_mapping.csv"), &csv)?;
    }
    let t = result.point;
    eprintln!(
        "{}: alpha={:.6} beta={:.6} gamma={:.6} xi={:.6} eta={:.6} p={:.6} delta_in={:.6} delta_out={:.6} loglik={:.6} status={:?}",
        result.method.as_str(),
        t.alpha,
        t.beta,
        t.gamma,
        t.xi,
        t.eta,
        t.p,
        t.delta_in,
        t.delta_out,
        result.log_likelihood,
        result.status
    );
    if result.status != FitStatus::Sampled && !result.converged {
        eprintln!(
            "warning: Nelder-Mead did not converge ({:?})",
            result.status
        );
        return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(a: &TableArgs) -> anyhow::Result<ExitCode> {
    let (truth, logs, seeds): (HybridParams, Vec<EdgeLog>, Vec<u64>) = match &a.manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let m: Manifest = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let dir = path.parent().unwrap_or(Path::new("."));
            let logs = m
                .edge_logs
                .iter()
                .map(|f| io::parse_edge_file(dir.join(f)))
                .collect::<hybridnet::Result<Vec<_>>>()?;
            (m.params, logs, m.seeds)
        }
        None => {
            let params = &a.params;
            let (Some(n), Some(r)) = (a.n, a.replicates) else {
                bail!(hybridnet::Error::InvalidConfig(
                    "--n and --replicates are required when simulating".into()
                ));
            };
            let truth = params.params()?;
            let sims = simulate_replicates(&SimulationConfig::new(truth, n, a.seed), r, a.workers)?;
            let seeds = sims.iter().map(|s| s.seed).collect();
            (truth, sims.into_iter().map(|s| s.log).collect(), seeds)
        }
    };
    let stats = logs
        .iter()
        .map(replay)
        .collect::<hybridnet::Result<Vec<_>>>()?;

    let mut csv = format!("method,statistic,{}\n", PARAM_NAMES.join(","));
    for &method in &a.methods {
        let fits = with_workers(a.workers, || {
            stats
                .par_iter()
                .zip(&seeds)
                .map(|(s, &seed)| a.estimator.fit(method, s, seed))
                .collect::<hybridnet::Result<Vec<_>>>()
        })?;
        let points: Vec<HybridParams> = fits.iter().map(|f| f.point).collect();
        let summary = summarize(&points, Some(&truth))?;
        let name = match method {
            MethodArg::Nm => Method::Nm,
            MethodArg::Mh => Method::Mh,
            MethodArg::Integrated => Method::Integrated,
        }
        .as_str();
        let rows: [(&str, SummaryCell); 4] = [
            ("est", |s| format!("{:.6}", s.mean)),
            ("bias_pct", |s| {
                s.bias_pct
                    .map_or(String::new(), |b| format!("{:.4}", b.abs()))
            }),
            ("sd", |s| format!("{:.6}", s.sd)),
            ("se", |s| format!("{:.6}", s.se)),
        ];
        for (stat, cell) in rows {
            let cells: Vec<String> = summary.iter().map(cell).collect();
            csv.push_str(&format!("{name},{stat},{}\n", cells.join(",")));
        }
        let failed = fits
            .iter()
            .filter(|f| f.status != FitStatus::Sampled && !f.converged)
            .count();
        if failed > 0 {
            eprintln!("{name}: {failed} of {} fits did not converge", fits.len());
        }
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_ccdf(a: &CcdfArgs) -> anyhow::Result<ExitCode> {
    let params = a.params.given().then_some(&a.params);
    let counts = match (&a.input, params, a.n) {
        (Some(path), _, _) => {
            let log = io::parse_edge_file(path)?;
            // (in, out) per node, including the seed self-loop when present
            let mut degrees = std::collections::BTreeMap::<u64, (u64, u64)>::new();
            if a.origin == Origin::Seed {
                degrees.insert(1, (1, 1));
            }
            for r in &log {
                degrees.entry(r.source).or_default().1 += 1;
                degrees.entry(r.target).or_default().0 += 1;
            }
            let in_deg: Vec<u64> = degrees.values().map(|d| d.0).collect();
            let out_deg: Vec<u64> = degrees.values().map(|d| d.1).collect();
            hybridnet::DegreeCounts::from_degrees(&in_deg, &out_deg)?
        }
        (None, Some(p), Some(n)) => {
            let sims = simulate_replicates(&SimulationConfig::new(p.params()?, n, a.seed), 1, 1)?;
            degree_counts(&sims[0].state)
        }
        _ => bail!(hybridnet::Error::InvalidConfig(
            "give --input, or the parameter flags with --n".into()
        )),
    };
    for dir in [Direction::In, Direction::Out] {
        io::write_text(
            a.out_dir.join(format!("ccdf_{}.csv", dir.as_str())),
            &io::ccdf_csv(&ccdf(&counts, dir)),
        )?;
    }
    if a.with_limit {
        let Some(p) = params else {
            bail!(hybridnet::Error::InvalidConfig(
                "--with-limit needs the parameter flags".into()
            ));
        };
        let max = counts
            .max_degree(Direction::In)
            .max(counts.max_degree(Direction::Out)) as usize;
        let pmf = limit_pmf(&p.params()?, max.max(1))?;
        for dir in [Direction::In, Direction::Out] {
            let curve: Vec<(u64, f64)> = pmf.ccdf(dir).into_iter().take(max + 1).collect();
            io::write_text(
                a.out_dir.join(format!("limit_ccdf_{}.csv", dir.as_str())),
                &io::ccdf_csv(&curve),
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_limit_pmf(a: &LimitPmfArgs) -> anyhow::Result<ExitCode> {
    let pmf = limit_pmf(&a.params.params()?, a.m_max)?;
    let mut trimmed = pmf.clone();
    trimmed.psi_in.truncate(a.m_max + 1);
    trimmed.psi_out.truncate(a.m_max + 1);
    emit(a.out.as_deref(), &io::limit_pmf_csv(&trimmed))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(a: &ClassifyArgs) -> anyhow::Result<ExitCode> {
    let log = io::parse_edge_file(&a.input)?;
    let mut known = std::collections::HashSet::new();
    if a.origin == Origin::Seed {
        known.insert(1);
    }
    let mut csv = String::from("source,target,time,scenario\n");
    for (i, r) in log.iter().enumerate() {
        let label = if i == 0 && a.origin == Origin::Observed {
            String::from("initial")
        } else {
            classify_scenario(&known, r).label().to_string()
        };
        csv.push_str(&format!("{},{},{},{label}\n", r.source, r.target, r.time));
        known.insert(r.source);
        known.insert(r.target);
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}
