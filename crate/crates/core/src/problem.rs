//! Random joint-sparsity problem instances.
//!
//! Every node `l` observes `y_l = A_l x_l` where all `x_l` share one support of
//! size `K`. Randomness is drawn from ChaCha8 streams:
//!
//! * the generator for a stream is `ChaCha8Rng::seed_from_u64(seed)` with
//!   `set_stream((class << 32) | node)`, class 0 for dictionaries, 1 for
//!   signal amplitudes and 2 for the support (node 0);
//! * a uniform on `[0, 1)` is `(next_u64() >> 11) · 2⁻⁵³`;
//! * a standard normal is Box–Muller on two consecutive uniforms `u1, u2`:
//!   `sqrt(-2 ln(1 − u1)) · cos(2π u2)` (the sine branch is discarded);
//! * the support is the first `K` entries of a partial Fisher–Yates shuffle of
//!   `1..=N`, where position `i` swaps with `i + ⌊u · (N − i)⌋` computed as
//!   `(next_u64() as u128 · (N − i)) >> 64`.
//!
//! Dictionary entries are filled column by column. Because each node owns its
//! streams, growing `L` leaves the draws of existing nodes untouched.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::linalg::{self, IndexSet, LinalgError, Matrix};

const STREAM_DICTIONARY: u64 = 0;
const STREAM_SIGNAL: u64 = 1;
const STREAM_SUPPORT: u64 = 2;
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid problem configuration: {0}")]
    InvalidConfig(String),
    #[error("signal amplitude stayed exactly zero after {0} redraws")]
    DegenerateSignal(usize),
    #[error("malformed instance file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemConfig {
    /// Ambient dimension.
    pub n: usize,
    /// Measurements per node.
    pub m: usize,
    /// Sparsity.
    pub k: usize,
    /// Number of nodes.
    pub l: usize,
    pub seed: u64,
}

impl ProblemConfig {
    pub fn new(n: usize, m: usize, k: usize, l: usize, seed: u64) -> Self {
        ProblemConfig { n, m, k, l, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ProblemConfig { seed, ..self }
    }

    /// Hard constraints. `M < 2K` and `M ≥ N` are allowed with a warning so
    /// that stress tests can probe the boundary.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.k == 0 {
            return Err(ProblemError::InvalidConfig("K must be at least 1".into()));
        }
        if self.l < 2 {
            return Err(ProblemError::InvalidConfig("L must be at least 2".into()));
        }
        if self.k > self.n {
            return Err(ProblemError::InvalidConfig(format!(
                "K = {} exceeds N = {}",
                self.k, self.n
            )));
        }
        if self.m == 0 {
            return Err(ProblemError::InvalidConfig("M must be at least 1".into()));
        }
        if self.m < 2 * self.k {
            log::warn!("M = {} < 2K = {}; recovery is not expected to work", self.m, 2 * self.k);
        }
        if self.m > self.n {
            log::warn!("M = {} > N = {}; the problem is not compressive", self.m, self.n);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub config: ProblemConfig,
    pub dictionaries: Vec<Matrix>,
    pub signals: Vec<Vec<f64>>,
    pub measurements: Vec<Vec<f64>>,
    pub true_support: IndexSet,
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, class: u64, node: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((class << 32) | node as u64);
        Stream(rng)
    }

    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn below(&mut self, bound: usize) -> usize {
        ((self.0.next_u64() as u128 * bound as u128) >> 64) as usize
    }
}

/// Draws a fresh instance. Fully determined by `config`.
pub fn generate(config: &ProblemConfig) -> Result<ProblemInstance, ProblemError> {
    config.validate()?;
    let ProblemConfig { n, m, k, l, seed } = *config;

    let mut support_rng = Stream::new(seed, STREAM_SUPPORT, 0);
    let mut pool: Vec<usize> = (1..=n).collect();
    for i in 0..k {
        let j = i + support_rng.below(n - i);
        pool.swap(i, j);
    }
    let true_support = IndexSet::from_indices(pool[..k].iter().copied());

    let mut dictionaries = Vec::with_capacity(l);
    let mut signals = Vec::with_capacity(l);
    let mut measurements = Vec::with_capacity(l);
    for node in 0..l {
        let mut dict_rng = Stream::new(seed, STREAM_DICTIONARY, node);
        let data: Vec<f64> = (0..m * n).map(|_| dict_rng.gaussian()).collect();
        let a = Matrix::from_col_major(m, n, data)?;

        let mut sig_rng = Stream::new(seed, STREAM_SIGNAL, node);
        let mut x = vec![0.0; n];
        for idx in true_support.iter() {
            let mut value = sig_rng.gaussian();
            let mut redraws = 0;
            while value == 0.0 {
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(ProblemError::DegenerateSignal(MAX_REDRAWS));
                }
                value = sig_rng.gaussian();
            }
            x[idx - 1] = value;
        }
        measurements.push(a.mul_vec(&x));
        signals.push(x);
        dictionaries.push(a);
    }

    Ok(ProblemInstance {
        config: *config,
        dictionaries,
        signals,
        measurements,
        true_support,
    })
}

/// Whether `estimate` recovers the true support exactly.
pub fn success(estimate: &IndexSet, instance: &ProblemInstance) -> bool {
    *estimate == instance.true_support
}

impl ProblemInstance {
    pub fn nodes(&self) -> usize {
        self.config.l
    }

    /// Squared residual of node `l`'s measurements against the true support.
    pub fn oracle_residual(&self, node: usize) -> Result<f64, LinalgError> {
        let sub = linalg::column_submatrix(&self.dictionaries[node], &self.true_support)?;
        Ok(linalg::sq_norm(&linalg::resid(&self.measurements[node], &sub)?))
    }

    /// Writes the instance as text:
    ///
    /// ```text
    /// dcsp-instance v1
    /// N M K L seed
    /// <K support indices, 1-based>
    /// then, for each node: M lines of N dictionary entries (row-major),
    /// one line of N signal entries, one line of M measurements
    /// ```
    ///
    /// Floats use Rust's shortest round-trip formatting, so a dump reloads
    /// bit-identically.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), ProblemError> {
        let c = &self.config;
        writeln!(w, "dcsp-instance v1")?;
        writeln!(w, "{} {} {} {} {}", c.n, c.m, c.k, c.l, c.seed)?;
        writeln!(w, "{}", join(self.true_support.iter()))?;
        for node in 0..c.l {
            let a = &self.dictionaries[node];
            for i in 0..a.rows() {
                writeln!(w, "{}", join((0..a.cols()).map(|j| a.get(i, j))))?;
            }
            writeln!(w, "{}", join(self.signals[node].iter()))?;
            writeln!(w, "{}", join(self.measurements[node].iter()))?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, ProblemError> {
        let mut lines = r.lines();
        let mut next_line = |what: &str| -> Result<String, ProblemError> {
            lines
                .next()
                .ok_or_else(|| ProblemError::Format(format!("missing {what}")))?
                .map_err(ProblemError::from)
        };
        if next_line("magic")?.trim() != "dcsp-instance v1" {
            return Err(ProblemError::Format("bad magic line".into()));
        }
        let header: Vec<u64> = parse_all(&next_line("header")?)?;
        let [n, m, k, l, seed] = header[..] else {
            return Err(ProblemError::Format("header needs N M K L seed".into()));
        };
        let (n, m, k, l) = (n as usize, m as usize, k as usize, l as usize);
        let support: Vec<usize> = parse_all(&next_line("support")?)?;
        if support.len() != k {
            return Err(ProblemError::Format("support length differs from K".into()));
        }
        let true_support = IndexSet::from_indices(support);
        true_support.check_bound(n)?;

        let mut dictionaries = Vec::with_capacity(l);
        let mut signals = Vec::with_capacity(l);
        let mut measurements = Vec::with_capacity(l);
        for _ in 0..l {
            let mut rows = Vec::with_capacity(m);
            for _ in 0..m {
                let row: Vec<f64> = parse_all(&next_line("dictionary row")?)?;
                if row.len() != n {
                    return Err(ProblemError::Format("dictionary row length differs from N".into()));
                }
                rows.push(row);
            }
            dictionaries.push(Matrix::from_rows(&rows)?);
            let x: Vec<f64> = parse_all(&next_line("signal")?)?;
            let y: Vec<f64> = parse_all(&next_line("measurements")?)?;
            if x.len() != n || y.len() != m {
                return Err(ProblemError::Format("signal or measurement length mismatch".into()));
            }
            signals.push(x);
            measurements.push(y);
        }
        Ok(ProblemInstance {
            config: ProblemConfig { n, m, k, l, seed },
            dictionaries,
            signals,
            measurements,
            true_support,
        })
    }
}

fn join<T: std::fmt::Display, I: Iterator<Item = T>>(items: I) -> String {
    let mut s = String::new();
    for (i, v) in items.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn parse_all<T: std::str::FromStr>(line: &str) -> Result<Vec<T>, ProblemError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| ProblemError::Format(format!("cannot parse {tok:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sized_instance() {
        let inst = generate(&ProblemConfig::new(200, 50, 10, 6, 11)).unwrap();
        assert_eq!(inst.dictionaries.len(), 6);
        assert!(inst
            .dictionaries
            .iter()
            .all(|a| a.rows() == 50 && a.cols() == 200));
        assert_eq!(inst.true_support.len(), 10);
        for x in &inst.signals {
            for (i, &v) in x.iter().enumerate() {
                assert_eq!(v != 0.0, inst.true_support.contains(i + 1));
            }
        }
        for node in 0..6 {
            assert_eq!(inst.measurements[node], inst.dictionaries[node].mul_vec(&inst.signals[node]));
            let r = inst.oracle_residual(node).unwrap();
            assert!(r.sqrt() <= 1e-9 * linalg::norm2(&inst.measurements[node]));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = ProblemConfig::new(40, 12, 3, 4, 5);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        assert_ne!(
            generate(&cfg).unwrap().dictionaries[0],
            generate(&cfg.with_seed(6)).unwrap().dictionaries[0]
        );
    }

    #[test]
    fn full_support_when_k_equals_n() {
        let inst = generate(&ProblemConfig::new(8, 8, 8, 2, 1)).unwrap();
        assert_eq!(inst.true_support, IndexSet::full(8));
    }

    #[test]
    fn adding_nodes_keeps_earlier_draws() {
        let small = generate(&ProblemConfig::new(30, 10, 3, 3, 77)).unwrap();
        let large = generate(&ProblemConfig::new(30, 10, 3, 7, 77)).unwrap();
        assert_eq!(small.true_support, large.true_support);
        assert_eq!(small.dictionaries[..], large.dictionaries[..3]);
        assert_eq!(small.signals[..], large.signals[..3]);
    }

    #[test]
    fn gaussian_moments_are_standard() {
        let mut s = Stream::new(3, 0, 0);
        let draws: Vec<f64> = (0..200_000).map(|_| s.gaussian()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn support_is_uniform_enough() {
        // Each index of 1..=10 should appear in a K = 3 support with
        // probability 0.3.
        let mut hits = [0usize; 10];
        let trials = 4000;
        for seed in 0..trials {
            let inst = generate(&ProblemConfig::new(10, 6, 3, 2, seed)).unwrap();
            for i in inst.true_support.iter() {
                hits[i - 1] += 1;
            }
        }
        for h in hits {
            let p = h as f64 / trials as f64;
            assert!((p - 0.3).abs() < 0.04, "{p}");
        }
    }

    #[test]
    fn success_is_set_equality() {
        let inst = generate(&ProblemConfig::new(20, 8, 3, 2, 9)).unwrap();
        assert!(success(&inst.true_support.clone(), &inst));
        let reversed: IndexSet = inst.true_support.as_slice().iter().rev().copied().collect();
        assert!(success(&reversed, &inst));
        let missing = IndexSet::from_indices(inst.true_support.iter().skip(1));
        assert!(!success(&missing, &inst));
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(generate(&ProblemConfig::new(10, 5, 0, 2, 0)).is_err());
        assert!(generate(&ProblemConfig::new(10, 5, 2, 1, 0)).is_err());
        assert!(generate(&ProblemConfig::new(3, 5, 4, 2, 0)).is_err());
        // M < 2K only warns.
        assert!(generate(&ProblemConfig::new(20, 3, 2, 2, 0)).is_ok());
    }

    #[test]
    fn dump_load_round_trip() {
        let inst = generate(&ProblemConfig::new(9, 4, 2, 3, 21)).unwrap();
        let mut buf = Vec::new();
        inst.dump(&mut buf).unwrap();
        let back = ProblemInstance::load(&buf[..]).unwrap();
        assert_eq!(inst, back);
        assert!(ProblemInstance::load(&b"nope\n"[..]).is_err());
    }
}
