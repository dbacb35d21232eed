//! Round-synchronous message passing with per-scalar wire accounting.
//!
//! Every send is a pairwise unicast; a payload delivered to `d` recipients is
//! charged `d · declared_length` scalars. Node ids are 1-based.
//!
//! Neighborhood exchanges deliver the payload of every `j ∈ G_l \ {l}` to node
//! `l`, so that node `l` can form sums over its own neighborhood. The total
//! charge is `Σ_l (|G_l| − 1) · declared_length` regardless of direction.

use std::fmt;

use thiserror::Error;

use crate::linalg::IndexSet;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("invalid degree g = {g} for L = {l} nodes (need 2 <= g <= L)")]
    InvalidDegree { g: usize, l: usize },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("payload of {actual} scalars does not fit the declared frame of {declared}")]
    Framing { declared: usize, actual: usize },
    #[error("expected one payload per node ({expected}), got {got}")]
    PayloadCount { expected: usize, got: usize },
}

/// Per-node neighborhoods `G_l`, each containing `l` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    neighbors: Vec<IndexSet>,
}

impl Topology {
    /// Ring-style neighborhood: `G_l = {l} ∪ {mod(l + i, L) + 1 : i = 1..g−1}`
    /// with 1-based `l`, i.e. nodes `l+2, …, l+g` cyclically.
    ///
    /// At `g = L` the last term wraps onto `l` itself, so that case is
    /// defined as the full mesh.
    pub fn ring(l: usize, g: usize) -> Result<Self, NetworkError> {
        if g < 2 || g > l {
            return Err(NetworkError::InvalidDegree { g, l });
        }
        if g == l {
            return Ok(Topology::full(l));
        }
        let neighbors = (1..=l)
            .map(|node| {
                let mut set = vec![node];
                set.extend((1..g).map(|i| (node + i) % l + 1));
                IndexSet::from_indices(set)
            })
            .collect();
        Ok(Topology { neighbors })
    }

    /// Every node neighbors every other node.
    pub fn full(l: usize) -> Self {
        Topology {
            neighbors: vec![IndexSet::full(l); l],
        }
    }

    /// Explicit neighborhoods; `l` is added to `G_l` if missing.
    pub fn from_neighbors(neighbors: Vec<IndexSet>) -> Result<Self, NetworkError> {
        let l = neighbors.len();
        if l < 2 {
            return Err(NetworkError::InvalidTopology("need at least 2 nodes".into()));
        }
        let neighbors = neighbors
            .into_iter()
            .enumerate()
            .map(|(i, set)| {
                set.check_bound(l)
                    .map_err(|e| NetworkError::InvalidTopology(e.to_string()))?;
                Ok(set.union(&IndexSet::from_indices([i + 1])))
            })
            .collect::<Result<_, NetworkError>>()?;
        Ok(Topology { neighbors })
    }

    /// Parses an adjacency listing of the form `1:3,4;2:4,5;...` where each
    /// entry lists the neighbors of one node. Nodes may appear in any order
    /// but all of `1..=L` must appear exactly once.
    pub fn parse_adjacency(spec: &str) -> Result<Self, NetworkError> {
        let bad = |msg: String| NetworkError::InvalidTopology(msg);
        let mut entries: Vec<(usize, IndexSet)> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (node, list) = part
                .split_once(':')
                .ok_or_else(|| bad(format!("entry {part:?} lacks ':'")))?;
            let node: usize = node
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad node id {node:?}")))?;
            let members = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| bad(format!("bad neighbor {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if node == 0 || members.contains(&0) {
                return Err(bad("node ids are 1-based".into()));
            }
            entries.push((node, IndexSet::from_indices(members)));
        }
        entries.sort_by_key(|(node, _)| *node);
        if entries.iter().enumerate().any(|(i, (node, _))| *node != i + 1) {
            return Err(bad("every node 1..=L must be listed exactly once".into()));
        }
        Topology::from_neighbors(entries.into_iter().map(|(_, s)| s).collect())
    }

    pub fn nodes(&self) -> usize {
        self.neighbors.len()
    }

    /// `G_l` for 1-based `node`.
    pub fn neighborhood(&self, node: NodeId) -> &IndexSet {
        &self.neighbors[node - 1]
    }

    /// `Σ_l (|G_l| − 1)`.
    pub fn neighbor_links(&self) -> usize {
        self.neighbors.iter().map(|s| s.len() - 1).sum()
    }

    pub fn is_full(&self) -> bool {
        let l = self.nodes();
        self.neighbors.iter().all(|s| s.len() == l)
    }
}

/// Payload contents. Indices carried alongside projection coefficients are
/// bookkeeping and are not charged separately.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Dense(Vec<f64>),
    Projection { support: IndexSet, values: Vec<f64> },
    Support(IndexSet),
    Scalar(f64),
}

impl Payload {
    /// Scalars of actual content.
    pub fn content_len(&self) -> usize {
        match self {
            Payload::Dense(v) => v.len(),
            Payload::Projection { values, .. } => values.len(),
            Payload::Support(s) => s.len(),
            Payload::Scalar(_) => 1,
        }
    }
}

/// A payload with the number of scalars it occupies on the wire.
#[derive(Clone, Debug, PartialEq)]
pub struct Framed {
    payload: Payload,
    declared_length: usize,
}

impl Framed {
    /// Projection payloads may be shorter than the frame (zero padding);
    /// every other payload must fill it exactly.
    pub fn new(payload: Payload, declared_length: usize) -> Result<Self, NetworkError> {
        let actual = payload.content_len();
        let fits = match payload {
            Payload::Projection { ref support, ref values } => {
                support.len() == values.len() && actual <= declared_length
            }
            _ => actual == declared_length,
        };
        if !fits {
            return Err(NetworkError::Framing {
                declared: declared_length,
                actual,
            });
        }
        Ok(Framed {
            payload,
            declared_length,
        })
    }

    /// Frame sized to the payload.
    pub fn exact(payload: Payload) -> Self {
        let declared_length = payload.content_len();
        Framed {
            payload,
            declared_length,
        }
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn declared_length(&self) -> usize {
        self.declared_length
    }
}

/// One delivered message.
#[derive(Clone, Copy, Debug)]
pub struct Message<'a> {
    pub sender: NodeId,
    pub recipient: NodeId,
    pub payload: &'a Payload,
    pub declared_length: usize,
}

/// Per-node received messages, ordered by sender id. Index 0 is node 1.
pub type Inboxes<'a> = Vec<Vec<Message<'a>>>;

/// Which protocol step a round belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// Initial correlations `|Aᵀy|`.
    InitCorrelation,
    /// Initial local support estimates.
    InitSupport,
    /// Initial residual energies, needed by the first stopping test.
    InitResidual,
    /// Correlations with the previous residual.
    Correlation,
    /// Projection coefficients over the candidate set.
    Projection,
    /// Local support estimates.
    LocalSupport,
    /// Residual energies.
    ResidualNorm,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Step::InitCorrelation => "init-correlation",
            Step::InitSupport => "init-support",
            Step::InitResidual => "init-residual",
            Step::Correlation => "correlation",
            Step::Projection => "projection",
            Step::LocalSupport => "local-support",
            Step::ResidualNorm => "residual-norm",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MessageClass {
    Neighbor,
    Broadcast,
    /// Initial residual energies. They fall outside the closed-form cost
    /// formulas, which start charging residual energies at iteration 1.
    Bootstrap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTally {
    pub iteration: usize,
    pub step: Step,
    pub class: MessageClass,
    pub scalars: u64,
}

/// Running tally of transmitted scalars.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WireCounter {
    pub neighbor_scalars: u64,
    pub broadcast_scalars: u64,
    pub bootstrap_scalars: u64,
    pub rounds: Vec<RoundTally>,
}

impl WireCounter {
    /// Scalars covered by the closed-form cost formulas.
    pub fn accounted(&self) -> u64 {
        self.neighbor_scalars + self.broadcast_scalars
    }

    /// Every scalar put on the wire.
    pub fn total(&self) -> u64 {
        self.accounted() + self.bootstrap_scalars
    }

    fn record(&mut self, iteration: usize, step: Step, class: MessageClass, scalars: u64) {
        match class {
            MessageClass::Neighbor => self.neighbor_scalars += scalars,
            MessageClass::Broadcast => self.broadcast_scalars += scalars,
            MessageClass::Bootstrap => self.bootstrap_scalars += scalars,
        }
        self.rounds.push(RoundTally {
            iteration,
            step,
            class,
            scalars,
        });
    }
}

/// The simulated fabric for one run.
#[derive(Clone, Debug)]
pub struct Network {
    topology: Topology,
    counter: WireCounter,
    iteration: usize,
}

impl Network {
    pub fn new(topology: Topology) -> Self {
        Network {
            topology,
            counter: WireCounter::default(),
            iteration: 0,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn counter(&self) -> &WireCounter {
        &self.counter
    }

    pub fn into_counter(self) -> WireCounter {
        self.counter
    }

    /// Iteration label attached to subsequent rounds.
    pub fn set_iteration(&mut self, iteration: usize) {
        self.iteration = iteration;
    }

    /// Delivers each `j ∈ G_l \ {l}`'s payload to node `l`.
    pub fn exchange_neighbors<'a>(
        &mut self,
        step: Step,
        outgoing: &'a [Framed],
    ) -> Result<Inboxes<'a>, NetworkError> {
        self.check_count(outgoing)?;
        let l = self.topology.nodes();
        let inboxes: Inboxes<'a> = (1..=l)
            .map(|recipient| {
                self.topology
                    .neighborhood(recipient)
                    .iter()
                    .filter(|&j| j != recipient)
                    .map(|sender| deliver(sender, recipient, &outgoing[sender - 1]))
                    .collect()
            })
            .collect();
        self.charge(step, MessageClass::Neighbor, &inboxes);
        Ok(inboxes)
    }

    /// Delivers each node's payload to every other node.
    pub fn broadcast_all<'a>(
        &mut self,
        step: Step,
        outgoing: &'a [Framed],
    ) -> Result<Inboxes<'a>, NetworkError> {
        self.check_count(outgoing)?;
        let l = self.topology.nodes();
        let inboxes: Inboxes<'a> = (1..=l)
            .map(|recipient| {
                (1..=l)
                    .filter(|&j| j != recipient)
                    .map(|sender| deliver(sender, recipient, &outgoing[sender - 1]))
                    .collect()
            })
            .collect();
        let class = if step == Step::InitResidual {
            MessageClass::Bootstrap
        } else {
            MessageClass::Broadcast
        };
        self.charge(step, class, &inboxes);
        Ok(inboxes)
    }

    fn check_count(&self, outgoing: &[Framed]) -> Result<(), NetworkError> {
        if outgoing.len() != self.topology.nodes() {
            return Err(NetworkError::PayloadCount {
                expected: self.topology.nodes(),
                got: outgoing.len(),
            });
        }
        Ok(())
    }

    fn charge(&mut self, step: Step, class: MessageClass, inboxes: &Inboxes<'_>) {
        let scalars: u64 = inboxes
            .iter()
            .flatten()
            .map(|m| m.declared_length as u64)
            .sum();
        self.counter.record(self.iteration, step, class, scalars);
    }
}

fn deliver(sender: NodeId, recipient: NodeId, framed: &Framed) -> Message<'_> {
    Message {
        sender,
        recipient,
        payload: &framed.payload,
        declared_length: framed.declared_length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(len: usize, nodes: usize) -> Vec<Framed> {
        (0..nodes)
            .map(|i| Framed::exact(Payload::Dense(vec![i as f64; len])))
            .collect()
    }

    #[test]
    fn ring_matches_index_formula() {
        let t = Topology::ring(6, 3).unwrap();
        assert_eq!(*t.neighborhood(1), IndexSet::from_indices([1, 3, 4]));
        assert_eq!(*t.neighborhood(5), IndexSet::from_indices([5, 1, 2]));
        assert_eq!(*t.neighborhood(6), IndexSet::from_indices([6, 2, 3]));
        for l in 1..=6 {
            assert_eq!(t.neighborhood(l).len(), 3);
            assert!(t.neighborhood(l).contains(l));
        }
        assert_eq!(t.neighbor_links(), 6 * 2);
    }

    #[test]
    fn ring_full_degree_is_full_mesh() {
        for l in 2..9 {
            assert_eq!(Topology::ring(l, l).unwrap(), Topology::full(l));
        }
        let t = Topology::ring(2, 2).unwrap();
        assert_eq!(*t.neighborhood(1), IndexSet::full(2));
        assert_eq!(*t.neighborhood(2), IndexSet::full(2));
    }

    #[test]
    fn ring_rejects_bad_degree() {
        assert_eq!(
            Topology::ring(5, 1),
            Err(NetworkError::InvalidDegree { g: 1, l: 5 })
        );
        assert!(Topology::ring(5, 6).is_err());
    }

    #[test]
    fn ring_link_count_identity() {
        for l in 2..30 {
            for g in 2..=l {
                assert_eq!(Topology::ring(l, g).unwrap().neighbor_links(), l * (g - 1));
            }
        }
    }

    #[test]
    fn neighbor_exchange_charges() {
        let mut net = Network::new(Topology::full(3));
        let out = dense(5, 3);
        net.exchange_neighbors(Step::Correlation, &out).unwrap();
        assert_eq!(net.counter().neighbor_scalars, 30);

        let mut net = Network::new(Topology::ring(6, 3).unwrap());
        let out = dense(200, 6);
        let inboxes = net.exchange_neighbors(Step::Correlation, &out).unwrap();
        assert_eq!(net.counter().neighbor_scalars, 2400);
        // Node 1 hears from nodes 3 and 4.
        let senders: Vec<_> = inboxes[0].iter().map(|m| m.sender).collect();
        assert_eq!(senders, vec![3, 4]);
        assert_eq!(inboxes[0][0].payload, &Payload::Dense(vec![2.0; 200]));
    }

    #[test]
    fn broadcast_charges() {
        let mut net = Network::new(Topology::ring(6, 3).unwrap());
        let out: Vec<Framed> = (0..6)
            .map(|i| Framed::exact(Payload::Support(IndexSet::from_indices(i + 1..i + 11))))
            .collect();
        net.broadcast_all(Step::LocalSupport, &out).unwrap();
        assert_eq!(net.counter().broadcast_scalars, 300);

        let scalars: Vec<Framed> = (0..6).map(|i| Framed::exact(Payload::Scalar(i as f64))).collect();
        net.broadcast_all(Step::ResidualNorm, &scalars).unwrap();
        assert_eq!(net.counter().broadcast_scalars, 330);

        let mut net = Network::new(Topology::full(2));
        let scalars: Vec<Framed> = (0..2).map(|_| Framed::exact(Payload::Scalar(1.0))).collect();
        net.broadcast_all(Step::ResidualNorm, &scalars).unwrap();
        assert_eq!(net.counter().accounted(), 2);
        net.broadcast_all(Step::InitResidual, &scalars).unwrap();
        assert_eq!(net.counter().accounted(), 2);
        assert_eq!(net.counter().bootstrap_scalars, 2);
        assert_eq!(net.counter().total(), 4);
    }

    #[test]
    fn conservation_per_round() {
        let topo = Topology::parse_adjacency("1:2;2:1,3;3:1;4:1,2,3").unwrap();
        let mut net = Network::new(topo);
        let out = dense(7, 4);
        let before = net.counter().total();
        let inboxes = net.exchange_neighbors(Step::Correlation, &out).unwrap();
        let received: u64 = inboxes.iter().flatten().map(|m| m.declared_length as u64).sum();
        assert_eq!(received, net.counter().total() - before);
        assert_eq!(received, 7 * (1 + 2 + 1 + 3));
    }

    #[test]
    fn framing_rules() {
        let proj = Payload::Projection {
            support: IndexSet::from_indices([1, 2, 3]),
            values: vec![1.0, 2.0, 3.0],
        };
        assert!(Framed::new(proj.clone(), 4).is_ok());
        assert_eq!(
            Framed::new(proj, 2),
            Err(NetworkError::Framing { declared: 2, actual: 3 })
        );
        assert!(Framed::new(Payload::Dense(vec![0.0; 3]), 4).is_err());
        assert!(Framed::new(Payload::Scalar(0.0), 1).is_ok());
    }

    #[test]
    fn payload_count_checked() {
        let mut net = Network::new(Topology::full(3));
        assert!(matches!(
            net.broadcast_all(Step::ResidualNorm, &dense(1, 2)),
            Err(NetworkError::PayloadCount { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn adjacency_parsing() {
        let t = Topology::parse_adjacency("2: 1 ; 1: 2").unwrap();
        assert_eq!(t, Topology::full(2));
        assert!(Topology::parse_adjacency("1:2;3:1").is_err());
        assert!(Topology::parse_adjacency("1:5;2:1").is_err());
        assert!(Topology::parse_adjacency("1").is_err());
    }
}
