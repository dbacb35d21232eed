//! Closed-form communication costs, in scalars transmitted pairwise.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostParams {
    pub n: u64,
    pub k: u64,
    pub l: u64,
    /// Neighborhood size, including the node itself.
    pub g: u64,
    /// Iteration count of the algorithm being costed.
    pub t: u64,
}

impl CostParams {
    pub fn new(n: u64, k: u64, l: u64, g: u64, t: u64) -> Self {
        CostParams { n, k, l, g, t }
    }

    pub fn with_t(self, t: u64) -> Self {
        CostParams { t, ..self }
    }

    fn pairs(&self) -> u64 {
        self.l * self.l.saturating_sub(1)
    }
}

/// Decentralized SSP: `[N + T(N + 2K + 1)](L − 1)L`.
pub fn cost_ssp(p: &CostParams) -> u64 {
    (p.n + p.t * (p.n + 2 * p.k + 1)) * p.pairs()
}

/// DCSP on a symmetric network with `g_l = g`:
/// `(g−1)NL + K(L−1)L + T·L[(g−1)(N+2K) + (K+1)(L−1)]`.
pub fn cost_dcsp(p: &CostParams) -> u64 {
    cost_dcsp_general(p.n, p.k, p.l, p.t, p.l * p.g.saturating_sub(1))
}

/// DCSP on an arbitrary topology, given `Σ_l (g_l − 1)` directly.
pub fn cost_dcsp_general(n: u64, k: u64, l: u64, t: u64, neighbor_links: u64) -> u64 {
    let pairs = l * l.saturating_sub(1);
    n * neighbor_links + k * pairs + t * ((n + 2 * k) * neighbor_links + (k + 1) * pairs)
}

/// Rows of the algorithm comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableAlgorithm {
    JspJomp,
    Somp,
    Dcomp,
    Ssp,
    Dcsp,
}

impl TableAlgorithm {
    pub const ALL: [TableAlgorithm; 5] = [
        TableAlgorithm::JspJomp,
        TableAlgorithm::Somp,
        TableAlgorithm::Dcomp,
        TableAlgorithm::Ssp,
        TableAlgorithm::Dcsp,
    ];

    /// Whether the row depends on an iteration count.
    pub fn uses_iterations(self) -> bool {
        matches!(self, TableAlgorithm::Dcomp | TableAlgorithm::Ssp | TableAlgorithm::Dcsp)
    }

    pub fn formula(self) -> &'static str {
        match self {
            TableAlgorithm::JspJomp => "K(L-1)L",
            TableAlgorithm::Somp => "KN(L-1)L",
            TableAlgorithm::Dcomp => "T((g-1)NL + (L-1)L)",
            TableAlgorithm::Ssp => "[N + T(N + 2K + 1)](L-1)L",
            TableAlgorithm::Dcsp => "(g-1)NL + K(L-1)L + TL((g-1)(N+2K) + (K+1)(L-1))",
        }
    }
}

impl fmt::Display for TableAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableAlgorithm::JspJomp => "JSP&JOMP",
            TableAlgorithm::Somp => "SOMP",
            TableAlgorithm::Dcomp => "DCOMP",
            TableAlgorithm::Ssp => "SSP",
            TableAlgorithm::Dcsp => "DCSP",
        })
    }
}

impl FromStr for TableAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsp" | "jomp" | "jsp_jomp" | "jsp&jomp" => Ok(TableAlgorithm::JspJomp),
            "somp" => Ok(TableAlgorithm::Somp),
            "dcomp" => Ok(TableAlgorithm::Dcomp),
            "ssp" => Ok(TableAlgorithm::Ssp),
            "dcsp" => Ok(TableAlgorithm::Dcsp),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

pub fn cost_table1(algorithm: TableAlgorithm, p: &CostParams) -> u64 {
    match algorithm {
        TableAlgorithm::JspJomp => p.k * p.pairs(),
        TableAlgorithm::Somp => p.k * p.n * p.pairs(),
        TableAlgorithm::Dcomp => p.t * (p.g.saturating_sub(1) * p.n * p.l + p.pairs()),
        TableAlgorithm::Ssp => cost_ssp(p),
        TableAlgorithm::Dcsp => cost_dcsp(p),
    }
}
