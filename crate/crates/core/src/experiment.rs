//! Monte Carlo sweeps behind the `fig1`, `fig2`, `fig3` and `trial`
//! subcommands.
//!
//! Each sweep point runs `trials` independent instances. Trial `i` at sweep
//! value `v` is seeded with `base_seed ^ splitmix64((v << 32) | i)`; if any
//! algorithm hits a rank-deficient projection the instance is discarded and
//! re-drawn with `seed ^ splitmix64(attempt + 0x9e37_79b9)`, and the discard is
//! counted in the `aborted` column. All algorithms in a trial see the same
//! instance. Trials may run on a thread pool, but results are gathered in
//! trial order, so output files do not depend on the worker count.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cost::{self, CostParams, TableAlgorithm};
use crate::linalg::IndexSet;
use crate::network::{NetworkError, Topology};
use crate::problem::{self, ProblemConfig, ProblemError, ProblemInstance};
use crate::pursuit::{self, Algorithm, PursuitError, RunResult};

/// Re-draws allowed per trial before giving up.
pub const MAX_ABORTS_PER_TRIAL: usize = 32;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pursuit(#[from] PursuitError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("trial {trial} at sweep value {value} was rank deficient {attempts} times in a row")]
    TooManyAborts { value: usize, trial: usize, attempts: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Success frequency versus measurements per node.
    Fig1,
    /// Transmitted scalars versus network size.
    Fig2,
    /// Iterations versus network size.
    Fig3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sweep {
    M(Vec<usize>),
    L(Vec<usize>),
}

impl Sweep {
    pub fn values(&self) -> &[usize] {
        match self {
            Sweep::M(v) | Sweep::L(v) => v,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Sweep::M(_) => "M",
            Sweep::L(_) => "L",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub figure: Figure,
    pub sweep: Sweep,
    pub n: usize,
    pub k: usize,
    /// Fixed `M` when sweeping `L`.
    pub m: usize,
    /// Fixed `L` when sweeping `M`.
    pub l: usize,
    /// DCSP neighborhood size; clamped to `L` at small network sizes.
    pub g: usize,
    /// Explicit DCSP neighborhoods, overriding the ring for a fixed `L`.
    pub adjacency: Option<Topology>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Worker threads; `None` lets the pool decide.
    pub jobs: Option<usize>,
    /// Defaults to `3K`.
    pub max_iters: Option<usize>,
    /// Iteration count assumed for the analytic DCOMP curve.
    pub t_dcomp: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// L = 6, N = 200, K = 10, g = 3, 500 trials, M ∈ {22, 24, …, 50}.
    pub fn fig1_defaults() -> Self {
        ExperimentConfig {
            figure: Figure::Fig1,
            sweep: Sweep::M((22..=50).step_by(2).collect()),
            n: 200,
            k: 10,
            m: 50,
            l: 6,
            g: 3,
            adjacency: None,
            trials: 500,
            seed: 1,
            algorithms: vec![Algorithm::Ssp, Algorithm::Dcsp],
            jobs: None,
            max_iters: None,
            t_dcomp: 10,
            out: None,
        }
    }

    /// M = 50, N = 200, K = 10, g = 3, 100 trials, L ∈ {5, 10, …, 40}.
    pub fn fig2_defaults() -> Self {
        ExperimentConfig {
            figure: Figure::Fig2,
            sweep: Sweep::L((5..=40).step_by(5).collect()),
            trials: 100,
            ..Self::fig1_defaults()
        }
    }

    pub fn fig3_defaults() -> Self {
        ExperimentConfig {
            figure: Figure::Fig3,
            ..Self::fig2_defaults()
        }
    }

    pub fn defaults(figure: Figure) -> Self {
        match figure {
            Figure::Fig1 => Self::fig1_defaults(),
            Figure::Fig2 => Self::fig2_defaults(),
            Figure::Fig3 => Self::fig3_defaults(),
        }
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters.unwrap_or_else(|| pursuit::default_max_iters(self.k))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.sweep.values().is_empty() {
            return bad("sweep range is empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.g < 2 {
            return bad(format!("g = {} must be at least 2", self.g));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.max_iters == Some(0) {
            return bad("max_iters must be at least 1".into());
        }
        if let Some(topo) = &self.adjacency {
            let fixed_l = match self.sweep {
                Sweep::M(_) => vec![self.l],
                Sweep::L(ref ls) => ls.clone(),
            };
            if fixed_l.iter().any(|&l| l != topo.nodes()) {
                return bad(format!(
                    "adjacency lists {} nodes but L = {:?}",
                    topo.nodes(),
                    fixed_l
                ));
            }
        }
        for point in self.sweep.values() {
            let (m, l) = self.point_dims(*point);
            ProblemConfig::new(self.n, m, self.k, l, self.seed)
                .validate()
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// `(M, L)` at a sweep value.
    pub fn point_dims(&self, value: usize) -> (usize, usize) {
        match self.sweep {
            Sweep::M(_) => (value, self.l),
            Sweep::L(_) => (self.m, value),
        }
    }

    /// DCSP topology for `l` nodes.
    pub fn topology(&self, l: usize) -> Result<Topology> {
        match &self.adjacency {
            Some(t) => Ok(t.clone()),
            None => {
                let g = self.g.min(l);
                if g < self.g {
                    log::warn!("g = {} exceeds L = {l}; using g = {g}", self.g);
                }
                Ok(Topology::ring(l, g)?)
            }
        }
    }
}

/// Outcome of one algorithm on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub support: IndexSet,
    pub success: bool,
    pub iterations: usize,
    /// Scalars covered by the closed-form cost formulas.
    pub messages: u64,
    /// Every scalar put on the wire, including the initial residual report.
    pub wire_total: u64,
    /// Closed-form cost at this run's iteration count.
    pub analytic: u64,
    pub hit_max_iters: bool,
}

impl TrialResult {
    fn from_run(
        algorithm: Algorithm,
        run: &RunResult,
        instance: &ProblemInstance,
        topology: &Topology,
    ) -> Self {
        TrialResult {
            algorithm,
            support: run.support.clone(),
            success: problem::success(&run.support, instance),
            iterations: run.iterations,
            messages: run.wire.accounted(),
            wire_total: run.wire.total(),
            analytic: analytic_cost(algorithm, instance, topology, run.iterations),
            hit_max_iters: run.hit_max_iters(),
        }
    }
}

/// Closed-form cost of `algorithm` on this instance's dimensions.
pub fn analytic_cost(
    algorithm: Algorithm,
    instance: &ProblemInstance,
    topology: &Topology,
    iterations: usize,
) -> u64 {
    let c = instance.config;
    let (n, k, l, t) = (c.n as u64, c.k as u64, c.l as u64, iterations as u64);
    match algorithm {
        Algorithm::Ssp => cost::cost_ssp(&CostParams::new(n, k, l, l, t)),
        Algorithm::Dcsp => cost::cost_dcsp_general(n, k, l, t, topology.neighbor_links() as u64),
    }
}

/// All algorithms on one sweep-point trial, re-drawing degenerate instances.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub results: Vec<TrialResult>,
    pub aborted: usize,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, value: usize, trial: usize) -> u64 {
    base ^ splitmix64(((value as u64) << 32) | trial as u64)
}

fn redraw_seed(seed: u64, attempt: usize) -> u64 {
    seed ^ splitmix64(attempt as u64 + 0x9e37_79b9)
}

pub fn run_point_trial(config: &ExperimentConfig, value: usize, trial: usize) -> Result<TrialOutcome> {
    let (m, l) = config.point_dims(value);
    let topology = config.topology(l)?;
    let base = trial_seed(config.seed, value, trial);
    for attempt in 0..=MAX_ABORTS_PER_TRIAL {
        let seed = if attempt == 0 { base } else { redraw_seed(base, attempt) };
        let instance = problem::generate(&ProblemConfig::new(config.n, m, config.k, l, seed))?;
        match run_algorithms(&config.algorithms, &instance, &topology, config.max_iters()) {
            Ok(results) => {
                return Ok(TrialOutcome {
                    results,
                    aborted: attempt,
                })
            }
            Err(e) if e.is_rank_deficient() => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(ExperimentError::TooManyAborts {
        value,
        trial,
        attempts: MAX_ABORTS_PER_TRIAL + 1,
    })
}

fn run_algorithms(
    algorithms: &[Algorithm],
    instance: &ProblemInstance,
    topology: &Topology,
    max_iters: usize,
) -> std::result::Result<Vec<TrialResult>, PursuitError> {
    algorithms
        .iter()
        .map(|&alg| {
            let run = pursuit::run(alg, instance, topology, max_iters)?;
            Ok(TrialResult::from_run(alg, &run, instance, topology))
        })
        .collect()
}

/// Maps `f` over `0..count` on the calling thread.
pub fn map_trials_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Maps `f` over `0..count` on a rayon pool, preserving order.
#[cfg(feature = "parallel")]
pub fn map_trials_parallel<T, F>(count: usize, jobs: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let work = || (0..count).into_par_iter().map(&f).collect();
    match jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                log::warn!("could not build a {j}-thread pool ({e}); using the global pool");
                work()
            }
        },
        None => work(),
    }
}

fn map_trials<T, F>(count: usize, jobs: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs == Some(1) {
            map_trials_sequential(count, f)
        } else {
            map_trials_parallel(count, jobs, f)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        if jobs.is_some_and(|j| j > 1) {
            log::warn!("built without the `parallel` feature; running trials sequentially");
        }
        map_trials_sequential(count, f)
    }
}

/// Aggregate statistics of one algorithm at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    pub success_frequency: f64,
    pub mean_iterations: f64,
    pub mean_messages: f64,
    pub mean_wire_total: f64,
    /// Mean of the closed-form cost at each trial's own iteration count.
    pub mean_analytic: f64,
    pub max_iter_hits: usize,
}

/// Closed-form costs of the baselines that are not simulated.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticBaselines {
    pub jsp_jomp: u64,
    pub somp: u64,
    pub dcomp: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub trials: usize,
    pub aborted: usize,
    pub stats: Vec<AlgorithmStats>,
    pub baselines: AnalyticBaselines,
}

impl SweepRow {
    pub fn stats_for(&self, algorithm: Algorithm) -> Option<&AlgorithmStats> {
        self.stats.iter().find(|s| s.algorithm == algorithm)
    }
}

fn aggregate(config: &ExperimentConfig, value: usize, outcomes: &[TrialOutcome]) -> Result<SweepRow> {
    let trials = outcomes.len();
    let denom = trials as f64;
    let stats = config
        .algorithms
        .iter()
        .enumerate()
        .map(|(i, &algorithm)| {
            let results = outcomes.iter().map(|o| &o.results[i]);
            let mean = |f: &dyn Fn(&TrialResult) -> f64| results.clone().map(f).sum::<f64>() / denom;
            AlgorithmStats {
                algorithm,
                success_frequency: mean(&|r| r.success as u8 as f64),
                mean_iterations: mean(&|r| r.iterations as f64),
                mean_messages: mean(&|r| r.messages as f64),
                mean_wire_total: mean(&|r| r.wire_total as f64),
                mean_analytic: mean(&|r| r.analytic as f64),
                max_iter_hits: results.clone().filter(|r| r.hit_max_iters).count(),
            }
        })
        .collect();

    let (_, l) = config.point_dims(value);
    let g = config.topology(l)?.neighborhood(1).len() as u64;
    let p = CostParams::new(config.n as u64, config.k as u64, l as u64, g, config.t_dcomp);
    Ok(SweepRow {
        value,
        trials,
        aborted: outcomes.iter().map(|o| o.aborted).sum(),
        stats,
        baselines: AnalyticBaselines {
            jsp_jomp: cost::cost_table1(TableAlgorithm::JspJomp, &p),
            somp: cost::cost_table1(TableAlgorithm::Somp, &p),
            dcomp: cost::cost_table1(TableAlgorithm::Dcomp, &p),
        },
    })
}

/// Evaluates one sweep point.
pub fn run_point(config: &ExperimentConfig, value: usize) -> Result<SweepRow> {
    let outcomes = map_trials(config.trials, config.jobs, |trial| {
        run_point_trial(config, value, trial)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    aggregate(config, value, &outcomes)
}

/// Runs the whole sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config
        .sweep
        .values()
        .iter()
        .map(|&value| {
            log::info!("{} {} = {value}", config.figure.name(), config.sweep.label());
            run_point(config, value)
        })
        .collect()
}

/// Success frequency versus `M`.
pub fn run_fig1(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_sweep(config, "M")?;
    run_sweep(config)
}

/// Transmitted scalars versus `L`.
pub fn run_fig2(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_sweep(config, "L")?;
    run_sweep(config)
}

/// Iterations versus `L`.
pub fn run_fig3(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_sweep(config, "L")?;
    run_sweep(config)
}

fn expect_sweep(config: &ExperimentConfig, label: &str) -> Result<()> {
    if config.sweep.label() != label {
        return Err(ExperimentError::Config(format!(
            "{} sweeps {label}, not {}",
            config.figure.name(),
            config.sweep.label()
        )));
    }
    Ok(())
}

fn columns(config: &ExperimentConfig) -> Vec<String> {
    let mut cols = vec![config.sweep.label().to_string(), "trials".into(), "aborted".into()];
    for alg in &config.algorithms {
        let a = alg.name();
        match config.figure {
            Figure::Fig1 => {
                cols.push(format!("{a}_success"));
                cols.push(format!("{a}_mean_iters"));
            }
            Figure::Fig2 => {
                cols.push(format!("{a}_messages"));
                cols.push(format!("{a}_analytic"));
                cols.push(format!("{a}_wire_total"));
            }
            Figure::Fig3 => {
                cols.push(format!("{a}_mean_iters"));
                cols.push(format!("{a}_success"));
            }
        }
        cols.push(format!("{a}_max_iter_hits"));
    }
    if config.figure == Figure::Fig2 {
        cols.extend(["somp_analytic", "dcomp_analytic", "jsp_jomp_analytic"].map(String::from));
    }
    cols
}

fn row_fields(config: &ExperimentConfig, row: &SweepRow) -> Vec<String> {
    let mut f = vec![row.value.to_string(), row.trials.to_string(), row.aborted.to_string()];
    for s in &row.stats {
        match config.figure {
            Figure::Fig1 => {
                f.push(format!("{:.6}", s.success_frequency));
                f.push(format!("{:.4}", s.mean_iterations));
            }
            Figure::Fig2 => {
                f.push(format!("{:.2}", s.mean_messages));
                f.push(format!("{:.2}", s.mean_analytic));
                f.push(format!("{:.2}", s.mean_wire_total));
            }
            Figure::Fig3 => {
                f.push(format!("{:.4}", s.mean_iterations));
                f.push(format!("{:.6}", s.success_frequency));
            }
        }
        f.push(s.max_iter_hits.to_string());
    }
    if config.figure == Figure::Fig2 {
        let b = &row.baselines;
        f.extend([b.somp, b.dcomp, b.jsp_jomp].map(|v| v.to_string()));
    }
    f
}

fn header_comment(config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# dcsp {}", config.figure.name());
    let _ = writeln!(
        s,
        "# N={} K={} {} g={} trials={} seed={} max_iters={} sweep {}={:?}",
        config.n,
        config.k,
        match config.sweep {
            Sweep::M(_) => format!("L={}", config.l),
            Sweep::L(_) => format!("M={}", config.m),
        },
        config.g,
        config.trials,
        config.seed,
        config.max_iters(),
        config.sweep.label(),
        config.sweep.values()
    );
    if config.adjacency.is_some() {
        let _ = writeln!(s, "# dcsp topology: explicit adjacency");
    } else {
        let _ = writeln!(s, "# dcsp topology: ring, g clamped to L");
    }
    let _ = writeln!(s, "# ssp: full mesh. messages = scalars covered by the closed-form costs;");
    let _ = writeln!(s, "# wire_total adds the initial residual-energy report, (L-1)L scalars.");
    let _ = writeln!(s, "# *_analytic for ssp/dcsp: mean closed-form cost at each trial's own T.");
    if config.figure == Figure::Fig2 {
        let _ = writeln!(
            s,
            "# somp/dcomp/jsp_jomp: closed-form only, not simulated; dcomp assumes T={}",
            config.t_dcomp
        );
    }
    s
}

/// Writes the CSV: `#` comment lines describing the run, then a header row.
pub fn write_csv<W: Write>(config: &ExperimentConfig, rows: &[SweepRow], mut out: W) -> Result<()> {
    out.write_all(header_comment(config).as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(config))?;
    for row in rows {
        w.write_record(row_fields(config, row))?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated companion for gnuplot and similar tools.
pub fn write_dat<W: Write>(config: &ExperimentConfig, rows: &[SweepRow], mut out: W) -> Result<()> {
    out.write_all(header_comment(config).as_bytes())?;
    writeln!(out, "# {}", columns(config).join(" "))?;
    for row in rows {
        writeln!(out, "{}", row_fields(config, row).join(" "))?;
    }
    Ok(())
}

/// Writes `<out>.csv` and the `.dat` companion next to it.
pub fn write_outputs(config: &ExperimentConfig, rows: &[SweepRow], out: &Path) -> Result<PathBuf> {
    let file = std::fs::File::create(out)?;
    write_csv(config, rows, std::io::BufWriter::new(file))?;
    let dat = out.with_extension("dat");
    let file = std::fs::File::create(&dat)?;
    write_dat(config, rows, std::io::BufWriter::new(file))?;
    Ok(dat)
}

/// One verbose run for debugging.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub result: TrialResult,
    pub run: RunResult,
    pub instance: ProblemInstance,
    pub transcript: String,
}

/// Runs one algorithm on one seeded instance and records a transcript of
/// per-iteration supports, residual energies and wire tallies.
pub fn run_single_trial(
    problem_config: &ProblemConfig,
    topology: &Topology,
    algorithm: Algorithm,
    max_iters: usize,
) -> Result<TrialReport> {
    let instance = problem::generate(problem_config)?;
    let run = pursuit::run(algorithm, &instance, topology, max_iters)?;
    let result = TrialResult::from_run(algorithm, &run, &instance, topology);

    let mut t = String::new();
    let c = problem_config;
    let _ = writeln!(
        t,
        "{} N={} M={} K={} L={} seed={} max_iters={max_iters}",
        algorithm.name(),
        c.n,
        c.m,
        c.k,
        c.l,
        c.seed
    );
    if algorithm == Algorithm::Dcsp {
        for node in 1..=topology.nodes() {
            let _ = writeln!(t, "G_{node} = {}", topology.neighborhood(node));
        }
    }
    let _ = writeln!(t, "true support  {}", instance.true_support);
    let _ = writeln!(
        t,
        "t=0 support {} residual_sum {:.6e}",
        run.initial_support, run.residual_trace[0]
    );
    for entry in &run.log {
        let _ = writeln!(
            t,
            "t={} support {} residual_sum {:.6e} candidates {:?} accounted {}{}",
            entry.iteration,
            entry.support,
            entry.residual_sum,
            entry.candidate_sizes,
            entry.accounted_scalars,
            if entry.reverted { " (no decrease, reverted)" } else { "" }
        );
        for (node, s) in entry.local_supports.iter().enumerate() {
            let _ = writeln!(t, "    Gamma_{} = {s}", node + 1);
        }
    }
    for round in &run.wire.rounds {
        let _ = writeln!(
            t,
            "wire t={} {} {:?} {}",
            round.iteration, round.step, round.class, round.scalars
        );
    }
    let _ = writeln!(
        t,
        "result support {} success {} iterations {} stop {:?}",
        result.support, result.success, result.iterations, run.stop
    );
    let _ = writeln!(
        t,
        "messages {} analytic {} wire_total {}",
        result.messages, result.analytic, result.wire_total
    );
    Ok(TrialReport {
        result,
        run,
        instance,
        transcript: t,
    })
}

/// Parses `7`, `22:50:2` (inclusive, step 2), `5:40` or `5,10,20`.
pub fn parse_range(spec: &str) -> std::result::Result<Vec<usize>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad number {s:?} in range {spec:?}"))
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (start, end, step) = match parts[..] {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("range {spec:?} must be start:end[:step]")),
        };
        if step == 0 {
            return Err("range step must be positive".into());
        }
        (start..=end).step_by(step).collect()
    } else {
        spec.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(format!("range {spec:?} is empty"));
    }
    Ok(values)
}

/// Settings that can come from a `key=value` file or command-line flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<String>,
    pub k: Option<usize>,
    pub l: Option<String>,
    pub g: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub algorithms: Option<String>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub max_iters: Option<usize>,
    pub t_dcomp: Option<u64>,
    pub adjacency: Option<String>,
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment. Keys match the long
    /// flag names (`N`, `M`, `K`, `L`, `g`, `trials`, `seed`, `algorithms`,
    /// `jobs`, `out`, `max_iters`, `t_dcomp`, `adjacency`).
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ExperimentError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim().to_string());
            let int = |v: &str| {
                v.parse::<usize>().map_err(|_| {
                    ExperimentError::Config(format!("line {}: {key} needs an integer", lineno + 1))
                })
            };
            match key {
                "N" => o.n = Some(int(&value)?),
                "M" => o.m = Some(value),
                "K" => o.k = Some(int(&value)?),
                "L" => o.l = Some(value),
                "g" => o.g = Some(int(&value)?),
                "trials" => o.trials = Some(int(&value)?),
                "seed" => o.seed = Some(int(&value)? as u64),
                "algorithms" => o.algorithms = Some(value),
                "jobs" => o.jobs = Some(int(&value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "max_iters" => o.max_iters = Some(int(&value)?),
                "t_dcomp" => o.t_dcomp = Some(int(&value)? as u64),
                "adjacency" => o.adjacency = Some(value),
                other => {
                    return Err(ExperimentError::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            k: self.k.or(base.k),
            l: self.l.or(base.l),
            g: self.g.or(base.g),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            algorithms: self.algorithms.or(base.algorithms),
            jobs: self.jobs.or(base.jobs),
            out: self.out.or(base.out),
            max_iters: self.max_iters.or(base.max_iters),
            t_dcomp: self.t_dcomp.or(base.t_dcomp),
            adjacency: self.adjacency.or(base.adjacency),
        }
    }

    /// Applies the overrides to a figure's defaults.
    pub fn into_config(self, figure: Figure) -> Result<ExperimentConfig> {
        let cfg_err = ExperimentError::Config;
        let mut c = ExperimentConfig::defaults(figure);
        let single = |spec: &str, name: &str| -> Result<usize> {
            match parse_range(spec).map_err(cfg_err)?[..] {
                [v] => Ok(v),
                _ => Err(ExperimentError::Config(format!(
                    "{name} is fixed for {}; give a single value",
                    figure.name()
                ))),
            }
        };
        match figure {
            Figure::Fig1 => {
                if let Some(m) = &self.m {
                    c.sweep = Sweep::M(parse_range(m).map_err(cfg_err)?);
                }
                if let Some(l) = &self.l {
                    c.l = single(l, "L")?;
                }
            }
            Figure::Fig2 | Figure::Fig3 => {
                if let Some(l) = &self.l {
                    c.sweep = Sweep::L(parse_range(l).map_err(cfg_err)?);
                }
                if let Some(m) = &self.m {
                    c.m = single(m, "M")?;
                }
            }
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.g {
            c.g = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.algorithms {
            c.algorithms = parse_algorithms(v)?;
        }
        c.jobs = self.jobs.or(c.jobs);
        c.out = self.out.or(c.out);
        c.max_iters = self.max_iters.or(c.max_iters);
        c.t_dcomp = self.t_dcomp.unwrap_or(c.k as u64);
        if let Some(adj) = &self.adjacency {
            c.adjacency = Some(Topology::parse_adjacency(adj)?);
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn parse_algorithms(spec: &str) -> Result<Vec<Algorithm>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(ExperimentError::Config))
        .collect()
}
