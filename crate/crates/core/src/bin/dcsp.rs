use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use dcsp::cost::{cost_table1, CostParams, TableAlgorithm};
use dcsp::experiment::{self, Figure, Overrides};
use dcsp::network::Topology;
use dcsp::problem::ProblemConfig;
use dcsp::pursuit::{self, Algorithm};

#[derive(Parser)]
#[command(name = "dcsp", version, about = "Decentralized joint sparsity-pattern recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success frequency vs measurements per node (sweeps M)
    Fig1(Common),
    /// Transmitted scalars vs network size (sweeps L)
    Fig2(Common),
    /// Iterations vs network size (sweeps L)
    Fig3(Common),
    /// One verbose run on a single seeded instance
    Trial(TrialArgs),
    /// Closed-form communication costs of every algorithm
    Cost(CostArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key=value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Single value, list (a,b,c) or inclusive range (start:end[:step])
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long = "K")]
    k: Option<usize>,
    /// Single value, list (a,b,c) or inclusive range (start:end[:step])
    #[arg(long = "L")]
    l: Option<String>,
    /// DCSP neighborhood size, including the node itself
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of ssp,dcsp
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV; a .dat companion is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    /// Iteration cap (default 3K)
    #[arg(long)]
    max_iters: Option<usize>,
    /// Iteration count assumed for the analytic DCOMP curve (default K)
    #[arg(long)]
    t_dcomp: Option<u64>,
    /// Explicit DCSP neighborhoods, e.g. "1:2,3;2:3;3:1"
    #[arg(long)]
    adjacency: Option<String>,
}

impl Common {
    fn overrides(&self) -> anyhow::Result<Overrides> {
        let flags = Overrides {
            n: self.n,
            m: self.m.clone(),
            k: self.k,
            l: self.l.clone(),
            g: self.g,
            trials: self.trials,
            seed: self.seed,
            algorithms: self.algorithms.clone(),
            jobs: self.jobs,
            out: self.out.clone(),
            max_iters: self.max_iters,
            t_dcomp: self.t_dcomp,
            adjacency: self.adjacency.clone(),
        };
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Overrides::parse_file(&text)?
            }
            None => Overrides::default(),
        };
        Ok(flags.over(file))
    }
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: Common,
    /// ssp or dcsp
    #[arg(long, default_value = "dcsp")]
    algorithm: String,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long = "N", default_value_t = 200)]
    n: u64,
    #[arg(long = "K", default_value_t = 10)]
    k: u64,
    #[arg(long = "L", default_value_t = 6)]
    l: u64,
    #[arg(long, default_value_t = 3)]
    g: u64,
    /// Iteration count for the iterative algorithms
    #[arg(long = "T", default_value_t = 3)]
    t: u64,
}

fn run_figure(figure: Figure, common: &Common) -> anyhow::Result<()> {
    let config = common.overrides()?.into_config(figure)?;
    let rows = match figure {
        Figure::Fig1 => experiment::run_fig1(&config)?,
        Figure::Fig2 => experiment::run_fig2(&config)?,
        Figure::Fig3 => experiment::run_fig3(&config)?,
    };
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", figure.name())));
    let dat = experiment::write_outputs(&config, &rows, &out)?;
    experiment::write_csv(&config, &rows, std::io::stdout().lock())?;
    eprintln!("wrote {} and {}", out.display(), dat.display());
    Ok(())
}

fn run_trial(args: &TrialArgs) -> anyhow::Result<()> {
    let algorithm: Algorithm = args.algorithm.parse().map_err(anyhow::Error::msg)?;
    let o = args.common.overrides()?;
    let single = |spec: Option<&String>, default: usize, name: &str| -> anyhow::Result<usize> {
        match spec {
            None => Ok(default),
            Some(s) => match experiment::parse_range(s).map_err(anyhow::Error::msg)?[..] {
                [v] => Ok(v),
                _ => bail!("trial takes a single {name}"),
            },
        }
    };
    let n = o.n.unwrap_or(200);
    let k = o.k.unwrap_or(10);
    let m = single(o.m.as_ref(), 50, "M")?;
    let l = single(o.l.as_ref(), 6, "L")?;
    let pc = ProblemConfig::new(n, m, k, l, o.seed.unwrap_or(1));
    let topology = match &o.adjacency {
        Some(adj) => Topology::parse_adjacency(adj)?,
        None => Topology::ring(l, o.g.unwrap_or(3).min(l))?,
    };
    let max_iters = o.max_iters.unwrap_or_else(|| pursuit::default_max_iters(k));
    let report = experiment::run_single_trial(&pc, &topology, algorithm, max_iters)?;
    print!("{}", report.transcript);
    Ok(())
}

fn run_cost(args: &CostArgs) {
    let p = CostParams::new(args.n, args.k, args.l, args.g, args.t);
    println!(
        "N={} K={} L={} g={} T={}",
        args.n, args.k, args.l, args.g, args.t
    );
    for alg in TableAlgorithm::ALL {
        println!("{:<9} {:>12}  {}", alg.to_string(), cost_table1(alg, &p), alg.formula());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fig1(c) => run_figure(Figure::Fig1, c),
        Command::Fig2(c) => run_figure(Figure::Fig2, c),
        Command::Fig3(c) => run_figure(Figure::Fig3, c),
        Command::Trial(t) => run_trial(t),
        Command::Cost(c) => {
            run_cost(c);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
