//! The spin–bond coupling of the Potts and random-cluster measures, its two
//! conditional kernels, and a Swendsen–Wang chain alternating them.
//!
//! Randomness comes from ChaCha8 streams: a chain with seed `s` and index
//! `i` uses `ChaCha8Rng::seed_from_u64(s)` with stream `i`, so parallel
//! chains never share a keystream.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{cap_exceeded, usage, Result};
use crate::graph::{EdgeSubset, Multigraph};
use crate::measures::{check_spin_cap, decode_spins, ConfigSpace, MeasureTable, DEFAULT_SPIN_CAP};
use crate::poly::{int, powi, Rational};

/// Largest joint space (`q^|V| 2^|E|`) tabulated exactly.
pub const JOINT_TABLE_CAP: usize = 1 << 16;

pub type SpinConfig = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointConfig {
    pub spins: SpinConfig,
    pub bonds: EdgeSubset,
}

impl JointConfig {
    /// Spins are constant across every open edge.
    pub fn is_compatible(&self, g: &Multigraph) -> bool {
        self.bonds.iter().all(|e| {
            let (x, y) = g.edges()[e];
            self.spins[x] == self.spins[y]
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub burn_in: usize,
    pub samples: usize,
    pub thinning: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { seed: 0, burn_in: 1000, samples: 10_000, thinning: 1 }
    }
}

impl SamplerConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        Self { seed, samples, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.thinning == 0 {
            return usage("sample count and thinning must be positive");
        }
        Ok(())
    }
}

/// Independent generator for chain `stream` under `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `mu(sigma, omega)` proportional to `p^|omega| (1-p)^(|E|-|omega|)` on the
/// compatible pairs; the uniform spin factor is constant and drops out.
pub fn joint_table(g: &Multigraph, p: &Rational, q: usize) -> Result<MeasureTable> {
    if q < 2 {
        return usage(format!("coupling needs integer q >= 2, got {q}"));
    }
    let n_spins = check_spin_cap(g, q, DEFAULT_SPIN_CAP)?;
    let m = g.n_edges();
    let size = n_spins.checked_shl(m as u32).unwrap_or(usize::MAX);
    if m >= 32 || size > JOINT_TABLE_CAP {
        return cap_exceeded("joint table", format!("{q}^{} * 2^{m}", g.n_vertices()), JOINT_TABLE_CAP);
    }
    let one_minus_p = Rational::one() - p;
    let bond_w: Vec<Rational> = (0..1u64 << m)
        .map(|w| {
            let a = w.count_ones() as i64;
            powi(p, a) * powi(&one_minus_p, m as i64 - a)
        })
        .collect();
    let mut weights = vec![Rational::zero(); size];
    for s in 0..n_spins {
        let spins = decode_spins(s, g.n_vertices(), q);
        let agree: u64 = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(_, &(x, y))| spins[x] == spins[y])
            .fold(0, |acc, (e, _)| acc | 1 << e);
        for (w, bw) in bond_w.iter().enumerate() {
            if w as u64 & !agree == 0 {
                weights[(s << m) | w] = bw.clone();
            }
        }
    }
    MeasureTable::from_weights(ConfigSpace::Joint { vertices: g.n_vertices(), q, edges: m }, weights)
}

/// Uniform independent spin per open cluster.
pub fn spins_given_bonds<R: Rng + ?Sized>(g: &Multigraph, bonds: &EdgeSubset, q: usize, rng: &mut R) -> SpinConfig {
    let (_, mut dsu) = g.components(bonds.mask());
    let (labels, k) = dsu.labels();
    let cluster_spins: Vec<usize> = (0..k).map(|_| rng.random_range(0..q)).collect();
    labels.into_iter().map(|c| cluster_spins[c]).collect()
}

/// Closes disagreeing edges; opens agreeing edges independently with probability `p`.
pub fn bonds_given_spins<R: Rng + ?Sized>(g: &Multigraph, spins: &[usize], p: f64, rng: &mut R) -> EdgeSubset {
    let mut bonds = g.empty_subset();
    for (e, &(x, y)) in g.edges().iter().enumerate() {
        if spins[x] == spins[y] && rng.random::<f64>() < p {
            bonds.insert(e);
        }
    }
    bonds
}

/// Swendsen–Wang chain: each sweep draws bonds given spins, then spins given bonds.
pub struct SwChain<'g> {
    graph: &'g Multigraph,
    p: f64,
    q: usize,
    rng: ChaCha8Rng,
    state: JointConfig,
    thinning: usize,
    remaining: usize,
}

impl<'g> SwChain<'g> {
    fn sweep(&mut self) {
        let bonds = bonds_given_spins(self.graph, &self.state.spins, self.p, &mut self.rng);
        let spins = spins_given_bonds(self.graph, &bonds, self.q, &mut self.rng);
        self.state = JointConfig { spins, bonds };
    }
}

impl Iterator for SwChain<'_> {
    type Item = JointConfig;

    fn next(&mut self) -> Option<JointConfig> {
        if self.remaining == 0 {
            return None;
        }
        for _ in 0..self.thinning {
            self.sweep();
        }
        self.remaining -= 1;
        Some(self.state.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

/// Starts a chain from uniform random spins and discards `burn_in` sweeps.
pub fn sw_sample<'g>(g: &'g Multigraph, p: f64, q: usize, cfg: &SamplerConfig) -> Result<SwChain<'g>> {
    sw_sample_stream(g, p, q, cfg, 0)
}

pub fn sw_sample_stream<'g>(
    g: &'g Multigraph,
    p: f64,
    q: usize,
    cfg: &SamplerConfig,
    stream: u64,
) -> Result<SwChain<'g>> {
    if !(0.0..=1.0).contains(&p) {
        return usage(format!("p = {p} must lie in [0,1]"));
    }
    if q < 2 {
        return usage(format!("Swendsen–Wang needs integer q >= 2, got {q}"));
    }
    cfg.validate()?;
    let mut rng = chain_rng(cfg.seed, stream);
    let spins = (0..g.n_vertices()).map(|_| rng.random_range(0..q)).collect();
    let mut chain = SwChain {
        graph: g,
        p,
        q,
        rng,
        state: JointConfig { spins, bonds: g.empty_subset() },
        thinning: cfg.thinning,
        remaining: cfg.samples,
    };
    for _ in 0..cfg.burn_in {
        chain.sweep();
    }
    Ok(chain)
}

/// Sample mean with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Self {
        batch_means(values, 50)
    }

    /// `|mean - target| <= k * std_err`, with a floor for zero-variance runs.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err + 1e-12
    }
}

/// Mean and standard error from `batches` contiguous batch means.
pub fn batch_means(values: &[f64], batches: usize) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate { mean: f64::NAN, std_err: f64::NAN, samples: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = batches.min(n).max(1);
    let size = n / b;
    if b < 2 || size == 0 {
        return Estimate { mean, std_err: f64::INFINITY, samples: n };
    }
    let means: Vec<f64> = (0..b)
        .map(|i| values[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate { mean, std_err: (var / b as f64).sqrt(), samples: n }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoPointEstimate {
    /// `tau(x,y) = P(sigma_x = sigma_y) - 1/q`.
    pub tau: Estimate,
    /// `P(x <-> y)` in the bond configuration.
    pub connection: Estimate,
}

pub fn estimate_two_point(
    g: &Multigraph,
    stream: impl IntoIterator<Item = JointConfig>,
    q: usize,
    x: usize,
    y: usize,
) -> Result<TwoPointEstimate> {
    if x >= g.n_vertices() || y >= g.n_vertices() {
        return usage(format!("vertices ({x},{y}) out of range 0..{}", g.n_vertices()));
    }
    let mut taus = Vec::new();
    let mut conns = Vec::new();
    let inv_q = 1.0 / q as f64;
    for c in stream {
        let same = if c.spins[x] == c.spins[y] { 1.0 } else { 0.0 };
        taus.push(same - inv_q);
        let connected = x == y || {
            let (_, mut dsu) = g.components(c.bonds.mask());
            dsu.find(x) == dsu.find(y)
        };
        conns.push(if connected { 1.0 } else { 0.0 });
    }
    if taus.is_empty() {
        return usage("cannot estimate from an empty stream");
    }
    Ok(TwoPointEstimate {
        tau: Estimate::from_values(&taus),
        connection: Estimate::from_values(&conns),
    })
}

/// Runs `chains` independent chains on scoped threads and pools their
/// per-chain two-point estimates in chain order.
pub fn parallel_two_point(
    g: &Multigraph,
    p: f64,
    q: usize,
    cfg: &SamplerConfig,
    chains: usize,
    x: usize,
    y: usize,
) -> Result<TwoPointEstimate> {
    if chains == 0 {
        return usage("need at least one chain");
    }
    let results: Vec<Result<TwoPointEstimate>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains as u64)
            .map(|i| {
                scope.spawn(move || {
                    let chain = sw_sample_stream(g, p, q, cfg, i)?;
                    estimate_two_point(g, chain, q, x, y)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampler thread")).collect()
    });
    let ests = results.into_iter().collect::<Result<Vec<_>>>()?;
    let pool = |f: fn(&TwoPointEstimate) -> Estimate| {
        let k = ests.len() as f64;
        let mean = ests.iter().map(|e| f(e).mean).sum::<f64>() / k;
        let var = ests.iter().map(|e| f(e).std_err.powi(2)).sum::<f64>() / (k * k);
        Estimate { mean, std_err: var.sqrt(), samples: ests.iter().map(|e| f(e).samples).sum() }
    };
    Ok(TwoPointEstimate { tau: pool(|e| e.tau), connection: pool(|e| e.connection) })
}

/// One exact bonds-given-spins step applied to a joint table.
pub fn apply_bond_kernel(table: &MeasureTable, g: &Multigraph, p: &Rational) -> Result<MeasureTable> {
    let ConfigSpace::Joint { vertices, q, edges } = table.space() else {
        return usage("bond kernel needs a joint table");
    };
    let one_minus_p = Rational::one() - p;
    let n_spins = q.pow(vertices as u32);
    let mut out = vec![Rational::zero(); table.len()];
    for s in 0..n_spins {
        let spins = decode_spins(s, vertices, q);
        let agree: u64 = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(_, &(x, y))| spins[x] == spins[y])
            .fold(0, |acc, (e, _)| acc | 1 << e);
        let n_agree = agree.count_ones() as i64;
        let mass: Rational = (0..1usize << edges).map(|w| table.prob((s << edges) | w)).sum();
        if mass.is_zero() {
            continue;
        }
        for w in 0..1u64 << edges {
            if w & !agree != 0 {
                continue;
            }
            let open = w.count_ones() as i64;
            let k = powi(p, open) * powi(&one_minus_p, n_agree - open);
            out[(s << edges) | w as usize] += &mass * k;
        }
    }
    Ok(MeasureTable::from_parts_unchecked(table.space(), out))
}

/// One exact spins-given-bonds step applied to a joint table.
pub fn apply_spin_kernel(table: &MeasureTable, g: &Multigraph) -> Result<MeasureTable> {
    let ConfigSpace::Joint { vertices, q, edges } = table.space() else {
        return usage("spin kernel needs a joint table");
    };
    let bonds = table.bond_marginal()?;
    let n_spins = q.pow(vertices as u32);
    let mut out = vec![Rational::zero(); table.len()];
    for w in 0..1usize << edges {
        let mass = bonds.prob(w);
        if mass.is_zero() {
            continue;
        }
        let k = g.components_of_mask(w as u64);
        let share = mass / powi(&int(q as i64), k as i64);
        for s in 0..n_spins {
            let spins = decode_spins(s, vertices, q);
            let ok = (0..edges).all(|e| {
                w >> e & 1 == 0 || {
                    let (x, y) = g.edges()[e];
                    spins[x] == spins[y]
                }
            });
            if ok {
                out[(s << edges) | w] = share.clone();
            }
        }
    }
    Ok(MeasureTable::from_parts_unchecked(table.space(), out))
}
