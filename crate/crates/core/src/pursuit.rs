//! Decentralized simultaneous subspace pursuit (SSP) and decentralized
//! collaborative subspace pursuit (DCSP).
//!
//! Both drivers simulate every node in lockstep. Each node only reads its own
//! data plus what arrived in its inbox, and every inter-node quantity travels
//! through [`Network`]. Sums over nodes are accumulated in ascending node-id
//! order, so nodes that see the same messages reach bit-identical decisions
//! and DCSP with `g = L` reproduces SSP exactly.
//!
//! Message frames: correlations `N`, projection coefficients `2K` (zero
//! padded), support estimates `K`, residual energies 1.

use thiserror::Error;

use crate::linalg::{self, IndexMultiset, IndexSet, LinalgError};
use crate::network::{Framed, Inboxes, Network, NetworkError, NodeId, Payload, Step, Topology, WireCounter};
use crate::problem::ProblemInstance;

/// Enumeration cap for [`exhaustive_decoder`].
pub const EXHAUSTIVE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PursuitError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{count} candidate supports exceed the enumeration cap of {cap}")]
    TooLarge { count: u64, cap: u64 },
}

impl PursuitError {
    /// A degenerate random draw; the trial should be discarded and re-drawn.
    pub fn is_rank_deficient(&self) -> bool {
        matches!(self, PursuitError::Linalg(LinalgError::RankDeficient { .. }))
    }
}

pub type Result<T> = std::result::Result<T, PursuitError>;

/// Default iteration cap: `3K`.
pub fn default_max_iters(k: usize) -> usize {
    3 * k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Ssp,
    Dcsp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ssp => "ssp",
            Algorithm::Dcsp => "dcsp",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ssp" => Ok(Algorithm::Ssp),
            "dcsp" => Ok(Algorithm::Dcsp),
            other => Err(format!("unknown algorithm {other:?} (expected ssp or dcsp)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The network-wide residual energy did not decrease; the previous
    /// support was restored.
    ResidualStalled,
    /// The iteration cap was reached while the residual was still decreasing.
    MaxIters,
}

/// One node's iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub support: IndexSet,
    pub residual: Vec<f64>,
    pub residual_sq_norm: f64,
    /// Local support estimate `Γ_l` (DCSP only).
    pub local_support: Option<IndexSet>,
}

impl NodeState {
    fn new(id: NodeId, support: IndexSet, residual: Vec<f64>) -> Self {
        let residual_sq_norm = linalg::sq_norm(&residual);
        NodeState {
            id,
            support,
            residual,
            residual_sq_norm,
            local_support: None,
        }
    }
}

/// What happened in one iteration, for transcripts and property checks.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    /// Support computed in this iteration (before any revert).
    pub support: IndexSet,
    /// Candidate-set size at each node.
    pub candidate_sizes: Vec<usize>,
    /// Per-node local support estimates (DCSP only).
    pub local_supports: Vec<IndexSet>,
    pub residual_sum: f64,
    pub accounted_scalars: u64,
    pub reverted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub support: IndexSet,
    /// Iterations executed, including the one that detected the stall.
    pub iterations: usize,
    pub wire: WireCounter,
    /// Network-wide residual energy after initialization and after every
    /// iteration.
    pub residual_trace: Vec<f64>,
    pub stop: StopReason,
    pub initial_support: IndexSet,
    pub log: Vec<IterationLog>,
}

impl RunResult {
    pub fn hit_max_iters(&self) -> bool {
        self.stop == StopReason::MaxIters
    }
}

/// Runs decentralized SSP over a full mesh of the instance's nodes.
pub fn ssp_run(instance: &ProblemInstance, max_iters: usize) -> Result<RunResult> {
    check_inputs(instance, max_iters)?;
    let cfg = instance.config;
    let (n, k, l) = (cfg.n, cfg.k, cfg.l);
    let mut net = Network::new(Topology::full(l));

    // Initialization: correlations to everyone, global top-K.
    let outgoing = (0..l)
        .map(|node| {
            let c = linalg::correlate(&instance.dictionaries[node], &instance.measurements[node]);
            Framed::new(Payload::Dense(c), n)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let inboxes = net.broadcast_all(Step::InitCorrelation, &outgoing)?;
    let mut states = (0..l)
        .map(|node| {
            let total = dense_sum(node + 1, &outgoing[node], &inboxes[node], n);
            let support = linalg::max_ind(&total, k);
            let residual = node_residual(instance, node, &support)?;
            Ok(NodeState::new(node + 1, support, residual))
        })
        .collect::<Result<Vec<_>>>()?;
    let initial_support = agreed_support(&states);
    let mut prev_sum = exchange_residuals(&mut net, Step::InitResidual, &states)?;

    let mut trace = vec![prev_sum];
    let mut log = Vec::new();
    for t in 1..=max_iters {
        net.set_iteration(t);

        let outgoing = (0..l)
            .map(|node| {
                let c = linalg::correlate(&instance.dictionaries[node], &states[node].residual);
                Framed::new(Payload::Dense(c), n)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let inboxes = net.broadcast_all(Step::Correlation, &outgoing)?;
        let candidates: Vec<IndexSet> = (0..l)
            .map(|node| {
                let total = dense_sum(node + 1, &outgoing[node], &inboxes[node], n);
                states[node].support.union(&linalg::max_ind(&total, k))
            })
            .collect();

        let outgoing = (0..l)
            .map(|node| projection_payload(instance, node, &candidates[node], 2 * k))
            .collect::<Result<Vec<_>>>()?;
        let inboxes = net.broadcast_all(Step::Projection, &outgoing)?;
        let mut next = Vec::with_capacity(l);
        for node in 0..l {
            let (total, union) = projection_sum(node + 1, &outgoing[node], &inboxes[node], n);
            let support = max_ind_within(&total, &union, k);
            let residual = node_residual(instance, node, &support)?;
            next.push(NodeState::new(node + 1, support, residual));
        }

        let sum = exchange_residuals(&mut net, Step::ResidualNorm, &next)?;
        trace.push(sum);
        let stalled = sum >= prev_sum;
        log.push(IterationLog {
            iteration: t,
            support: agreed_support(&next),
            candidate_sizes: candidates.iter().map(IndexSet::len).collect(),
            local_supports: Vec::new(),
            residual_sum: sum,
            accounted_scalars: net.counter().accounted(),
            reverted: stalled,
        });
        if stalled {
            return Ok(finish(states, t, net, trace, StopReason::ResidualStalled, initial_support, log));
        }
        states = next;
        prev_sum = sum;
    }
    Ok(finish(states, max_iters, net, trace, StopReason::MaxIters, initial_support, log))
}

/// Runs DCSP: correlations and projection coefficients are shared within
/// each node's neighborhood, local support estimates and residual energies
/// with the whole network, and the global support is fused by majority vote.
pub fn dcsp_run(instance: &ProblemInstance, topology: &Topology, max_iters: usize) -> Result<RunResult> {
    check_inputs(instance, max_iters)?;
    let cfg = instance.config;
    let (n, k, l) = (cfg.n, cfg.k, cfg.l);
    if topology.nodes() != l {
        return Err(PursuitError::InvalidInput(format!(
            "topology has {} nodes, instance has {l}",
            topology.nodes()
        )));
    }
    let mut net = Network::new(topology.clone());

    let outgoing = (0..l)
        .map(|node| {
            let c = linalg::correlate(&instance.dictionaries[node], &instance.measurements[node]);
            Framed::new(Payload::Dense(c), n)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let inboxes = net.exchange_neighbors(Step::InitCorrelation, &outgoing)?;
    let local: Vec<IndexSet> = (0..l)
        .map(|node| linalg::max_ind(&dense_sum(node + 1, &outgoing[node], &inboxes[node], n), k))
        .collect();
    let fused = fuse_supports(&mut net, Step::InitSupport, &local, k)?;
    let mut states = (0..l)
        .map(|node| {
            let residual = node_residual(instance, node, &fused[node])?;
            let mut state = NodeState::new(node + 1, fused[node].clone(), residual);
            state.local_support = Some(local[node].clone());
            Ok(state)
        })
        .collect::<Result<Vec<_>>>()?;
    let initial_support = agreed_support(&states);
    let mut prev_sum = exchange_residuals(&mut net, Step::InitResidual, &states)?;

    let mut trace = vec![prev_sum];
    let mut log = Vec::new();
    for t in 1..=max_iters {
        net.set_iteration(t);

        let outgoing = (0..l)
            .map(|node| {
                let c = linalg::correlate(&instance.dictionaries[node], &states[node].residual);
                Framed::new(Payload::Dense(c), n)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let inboxes = net.exchange_neighbors(Step::Correlation, &outgoing)?;
        let candidates: Vec<IndexSet> = (0..l)
            .map(|node| {
                let total = dense_sum(node + 1, &outgoing[node], &inboxes[node], n);
                states[node].support.union(&linalg::max_ind(&total, k))
            })
            .collect();

        let outgoing = (0..l)
            .map(|node| projection_payload(instance, node, &candidates[node], 2 * k))
            .collect::<Result<Vec<_>>>()?;
        let inboxes = net.exchange_neighbors(Step::Projection, &outgoing)?;
        let local: Vec<IndexSet> = (0..l)
            .map(|node| {
                let (total, union) = projection_sum(node + 1, &outgoing[node], &inboxes[node], n);
                max_ind_within(&total, &union, k)
            })
            .collect();

        let fused = fuse_supports(&mut net, Step::LocalSupport, &local, k)?;
        let mut next = Vec::with_capacity(l);
        for node in 0..l {
            let residual = node_residual(instance, node, &fused[node])?;
            let mut state = NodeState::new(node + 1, fused[node].clone(), residual);
            state.local_support = Some(local[node].clone());
            next.push(state);
        }

        let sum = exchange_residuals(&mut net, Step::ResidualNorm, &next)?;
        trace.push(sum);
        let stalled = sum >= prev_sum;
        log.push(IterationLog {
            iteration: t,
            support: agreed_support(&next),
            candidate_sizes: candidates.iter().map(IndexSet::len).collect(),
            local_supports: local,
            residual_sum: sum,
            accounted_scalars: net.counter().accounted(),
            reverted: stalled,
        });
        if stalled {
            return Ok(finish(states, t, net, trace, StopReason::ResidualStalled, initial_support, log));
        }
        states = next;
        prev_sum = sum;
    }
    Ok(finish(states, max_iters, net, trace, StopReason::MaxIters, initial_support, log))
}

/// Runs either algorithm. SSP ignores `topology` and uses the full mesh.
pub fn run(
    algorithm: Algorithm,
    instance: &ProblemInstance,
    topology: &Topology,
    max_iters: usize,
) -> Result<RunResult> {
    match algorithm {
        Algorithm::Ssp => ssp_run(instance, max_iters),
        Algorithm::Dcsp => dcsp_run(instance, topology, max_iters),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveResult {
    pub support: IndexSet,
    pub residual_sum: f64,
    pub scanned: u64,
}

/// Jointly optimal noiseless decoder: minimizes `Σ_l ‖resid(y_l, A_l(S))‖²`
/// over every `K`-subset `S`. Ties keep the lexicographically first subset.
pub fn exhaustive_decoder(instance: &ProblemInstance) -> Result<ExhaustiveResult> {
    let cfg = instance.config;
    let (n, k) = (cfg.n, cfg.k);
    let count = binomial(n as u64, k as u64).unwrap_or(u64::MAX);
    if count > EXHAUSTIVE_CAP {
        return Err(PursuitError::TooLarge {
            count,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let mut combo: Vec<usize> = (1..=k).collect();
    let mut best: Option<(f64, IndexSet)> = None;
    let mut scanned = 0u64;
    loop {
        let s = IndexSet::from_indices(combo.iter().copied());
        let mut total = 0.0;
        for node in 0..cfg.l {
            total += linalg::sq_norm(&node_residual(instance, node, &s)?);
        }
        scanned += 1;
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, s));
        }
        // Advance to the next combination in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&i| combo[i] < n - k + i + 1) else {
            break;
        };
        combo[pos] += 1;
        for i in pos + 1..k {
            combo[i] = combo[i - 1] + 1;
        }
    }
    let (residual_sum, support) = best.expect("at least one subset");
    Ok(ExhaustiveResult {
        support,
        residual_sum,
        scanned,
    })
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn check_inputs(instance: &ProblemInstance, max_iters: usize) -> Result<()> {
    if max_iters == 0 {
        return Err(PursuitError::InvalidInput("max_iters must be at least 1".into()));
    }
    let cfg = instance.config;
    if cfg.k == 0 || cfg.k > cfg.n || cfg.l < 2 || instance.dictionaries.len() != cfg.l {
        return Err(PursuitError::InvalidInput(format!("inconsistent instance {cfg:?}")));
    }
    Ok(())
}

fn node_residual(instance: &ProblemInstance, node: usize, support: &IndexSet) -> Result<Vec<f64>> {
    let sub = linalg::column_submatrix(&instance.dictionaries[node], support)?;
    Ok(linalg::resid(&instance.measurements[node], &sub)?)
}

fn projection_payload(
    instance: &ProblemInstance,
    node: usize,
    candidates: &IndexSet,
    frame: usize,
) -> Result<Framed> {
    let sub = linalg::column_submatrix(&instance.dictionaries[node], candidates)?;
    let values = linalg::lstsq(&sub, &instance.measurements[node])?;
    Ok(Framed::new(
        Payload::Projection {
            support: candidates.clone(),
            values,
        },
        frame,
    )?)
}

/// Own payload merged with the inbox, in ascending sender order.
fn in_id_order<'a>(me: NodeId, own: &'a Framed, inbox: &'a [crate::network::Message<'a>]) -> Vec<&'a Payload> {
    let split = inbox.partition_point(|m| m.sender < me);
    inbox[..split]
        .iter()
        .map(|m| m.payload)
        .chain(std::iter::once(own.payload()))
        .chain(inbox[split..].iter().map(|m| m.payload))
        .collect()
}

fn dense_sum(me: NodeId, own: &Framed, inbox: &[crate::network::Message<'_>], n: usize) -> Vec<f64> {
    let mut total = vec![0.0; n];
    for payload in in_id_order(me, own, inbox) {
        let Payload::Dense(v) = payload else {
            unreachable!("correlation rounds carry dense payloads")
        };
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    total
}

/// Accumulates `|x̄_j|` at ambient positions and returns the union of the
/// contributing candidate sets.
fn projection_sum(
    me: NodeId,
    own: &Framed,
    inbox: &[crate::network::Message<'_>],
    n: usize,
) -> (Vec<f64>, IndexSet) {
    let mut total = vec![0.0; n];
    let mut union = IndexSet::new();
    for payload in in_id_order(me, own, inbox) {
        let Payload::Projection { support, values } = payload else {
            unreachable!("projection rounds carry projection payloads")
        };
        for (idx, v) in support.iter().zip(values) {
            total[idx - 1] += v.abs();
        }
        union = union.union(support);
    }
    (total, union)
}

/// `max_ind` restricted to `candidates`; ties go to the smaller index.
fn max_ind_within(ambient: &[f64], candidates: &IndexSet, k: usize) -> IndexSet {
    let gathered: Vec<f64> = candidates.iter().map(|i| ambient[i - 1]).collect();
    let picked = linalg::max_ind(&gathered, k.min(gathered.len()));
    picked.iter().map(|p| candidates.as_slice()[p - 1]).collect()
}

/// Broadcasts local supports and fuses them at every node by majority vote.
fn fuse_supports(net: &mut Network, step: Step, local: &[IndexSet], k: usize) -> Result<Vec<IndexSet>> {
    let outgoing = local
        .iter()
        .map(|s| Framed::new(Payload::Support(s.clone()), k))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let inboxes: Inboxes<'_> = net.broadcast_all(step, &outgoing)?;
    (0..local.len())
        .map(|node| {
            let sets: Vec<&IndexSet> = in_id_order(node + 1, &outgoing[node], &inboxes[node])
                .into_iter()
                .map(|p| match p {
                    Payload::Support(s) => s,
                    _ => unreachable!("support rounds carry support payloads"),
                })
                .collect();
            Ok(linalg::max_occ(&IndexMultiset::from_sets(sets), k)?)
        })
        .collect()
}

/// Broadcasts residual energies; returns the network-wide sum (identical at
/// every node).
fn exchange_residuals(net: &mut Network, step: Step, states: &[NodeState]) -> Result<f64> {
    let outgoing: Vec<Framed> = states
        .iter()
        .map(|s| Framed::exact(Payload::Scalar(s.residual_sq_norm)))
        .collect();
    let inboxes = net.broadcast_all(step, &outgoing)?;
    let sums: Vec<f64> = (0..states.len())
        .map(|node| {
            in_id_order(node + 1, &outgoing[node], &inboxes[node])
                .into_iter()
                .map(|p| match p {
                    Payload::Scalar(v) => *v,
                    _ => unreachable!("residual rounds carry scalars"),
                })
                .sum()
        })
        .collect();
    debug_assert!(sums.iter().all(|s| s.to_bits() == sums[0].to_bits()));
    Ok(sums[0])
}

fn agreed_support(states: &[NodeState]) -> IndexSet {
    debug_assert!(states.iter().all(|s| s.support == states[0].support));
    states[0].support.clone()
}

fn finish(
    states: Vec<NodeState>,
    iterations: usize,
    net: Network,
    residual_trace: Vec<f64>,
    stop: StopReason,
    initial_support: IndexSet,
    log: Vec<IterationLog>,
) -> RunResult {
    RunResult {
        support: agreed_support(&states),
        iterations,
        wire: net.into_counter(),
        residual_trace,
        stop,
        initial_support,
        log,
    }
}
