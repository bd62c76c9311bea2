//! Mod-q flows, Poisson thickenings of a graph, and Monte Carlo estimators
//! for the flow representations of Potts and random-cluster connectivity.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::coupling::{chain_rng, Estimate, SamplerConfig};
use crate::error::{cap_exceeded, usage, Error, Result};
use crate::graph::{GraphKey, Multigraph};
use crate::measures::{
    connection_matrix_general, potts_two_point, rc_connection_prob, PottsParams, RcParams,
};
use crate::poly::{fmt_rational, to_f64, Rational};
use crate::polynomials::{size_component_histogram, TutteComputer, DEFAULT_ENUMERATION_CAP};

/// Cap on `(q-1)^|E|` for brute-force flow enumeration.
pub const FLOW_BRUTE_FORCE_CAP: u64 = 100_000_000;

/// Largest separating set checked by [`simon_check`] beyond the minimal ones.
pub const SIMON_SET_CAP: usize = 4;

/// Number of independent RNG streams a Monte Carlo estimate is split across.
pub const MC_STREAMS: usize = 4;

/// Target for the truncation error of [`compflow_identity`].
pub const COMPFLOW_TAIL_TARGET: f64 = 1e-8;

/// A multigraph with a direction per edge. Edge `(u, v)` points `u -> v`
/// unless its reversal bit is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedMultigraph {
    base: Multigraph,
    reversed: Vec<bool>,
}

impl OrientedMultigraph {
    pub fn new(base: Multigraph, reversed: Vec<bool>) -> Result<Self> {
        if reversed.len() != base.n_edges() {
            return usage(format!(
                "{} direction bits for {} edges",
                reversed.len(),
                base.n_edges()
            ));
        }
        Ok(Self { base, reversed })
    }

    pub fn natural(base: Multigraph) -> Self {
        let reversed = vec![false; base.n_edges()];
        Self { base, reversed }
    }

    pub fn random<R: Rng + ?Sized>(base: Multigraph, rng: &mut R) -> Self {
        let reversed = (0..base.n_edges()).map(|_| rng.random()).collect();
        Self { base, reversed }
    }

    pub fn base(&self) -> &Multigraph {
        &self.base
    }

    pub fn reversed(&self) -> &[bool] {
        &self.reversed
    }

    /// `(tail, head)` of edge `e`.
    pub fn arc(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.base.edges()[e];
        if self.reversed[e] {
            (v, u)
        } else {
            (u, v)
        }
    }

    /// Nowhere-zero `Z_q` flows by enumeration, subject to `cap` on `(q-1)^|E|`.
    pub fn count_flows_capped(&self, q: u64, cap: u64) -> Result<u64> {
        if q < 2 {
            return usage(format!("flows need q >= 2, got {q}"));
        }
        let m = self.base.n_edges() as u32;
        match (q - 1).checked_pow(m) {
            Some(total) if total <= cap => {}
            _ => return cap_exceeded("flow enumeration", format!("{}^{m}", q - 1), cap),
        }
        let arcs: Vec<(usize, usize)> = (0..m as usize)
            .filter(|&e| !self.base.is_loop(e))
            .map(|e| self.arc(e))
            .collect();
        let loops = m - arcs.len() as u32;
        let mut values = vec![1u64; arcs.len()];
        let mut net = vec![0u64; self.base.n_vertices()];
        for &(t, h) in &arcs {
            net[t] = (net[t] + 1) % q;
            net[h] = (net[h] + q - 1) % q;
        }
        let mut count = 0u64;
        loop {
            if net.iter().all(|&v| v == 0) {
                count += 1;
            }
            // odometer over {1..q-1}^arcs, updating vertex excesses in place
            let mut i = 0;
            loop {
                if i == arcs.len() {
                    return Ok(count * (q - 1).pow(loops));
                }
                let (t, h) = arcs[i];
                let (old, new) = if values[i] == q - 1 { (q - 1, 1) } else { (values[i], values[i] + 1) };
                values[i] = new;
                let delta = (new + q - old) % q;
                net[t] = (net[t] + delta) % q;
                net[h] = (net[h] + q - delta) % q;
                if new != 1 {
                    break;
                }
                i += 1;
            }
        }
    }
}

/// `C_G(q)` under the natural orientation.
pub fn count_flows(g: &Multigraph, q: u64) -> Result<u64> {
    OrientedMultigraph::natural(g.clone()).count_flows_capped(q, FLOW_BRUTE_FORCE_CAP)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrientationReport {
    pub q: u64,
    pub seed: u64,
    /// Natural orientation first, then the random ones.
    pub counts: Vec<u64>,
    pub pass: bool,
}

/// Counts flows under the natural and 20 random orientations.
pub fn orientation_invariance_check(g: &Multigraph, q: u64, seed: u64) -> Result<OrientationReport> {
    let mut rng = chain_rng(seed, 0);
    let mut counts = vec![count_flows(g, q)?];
    for _ in 0..20 {
        let og = OrientedMultigraph::random(g.clone(), &mut rng);
        counts.push(og.count_flows_capped(q, FLOW_BRUTE_FORCE_CAP)?);
    }
    let pass = counts.iter().all(|&c| c == counts[0]);
    Ok(OrientationReport { q, seed, counts, pass })
}

/// Memoized deletion–contraction for `C_G(q)` at a fixed integer `q`:
/// loops give a factor `q-1`, a bridge gives zero, otherwise
/// `C(G) = C(G/e) - C(G-e)`.
#[derive(Debug)]
pub struct FlowCounter {
    q: u64,
    memo: HashMap<GraphKey, BigInt>,
}

impl FlowCounter {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return usage(format!("flows need q >= 2, got {q}"));
        }
        Ok(Self { q, memo: HashMap::new() })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn count(&mut self, g: &Multigraph) -> BigInt {
        let loops = (0..g.n_edges()).filter(|&e| g.is_loop(e)).count();
        let core = Multigraph::new(
            g.n_vertices(),
            g.edges().iter().copied().filter(|&(u, v)| u != v).collect(),
        )
        .expect("same vertex set");
        let factor = BigInt::from(self.q - 1).pow(loops as u32);
        if core.n_edges() == 0 {
            return factor;
        }
        factor * self.count_loopless(&core)
    }

    fn count_loopless(&mut self, g: &Multigraph) -> BigInt {
        let key = g.canonical_key();
        if let Some(c) = self.memo.get(&key) {
            return c.clone();
        }
        let c = if !g.bridges().is_empty() {
            BigInt::zero()
        } else {
            let contracted = g.contract(0).expect("edge 0 exists");
            let deleted = g.delete(0).expect("edge 0 exists");
            self.count(&contracted) - self.count(&deleted)
        };
        self.memo.insert(key, c.clone());
        c
    }
}

/// Multiplicities of a Poisson thickening, optionally with one extra edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoissonGraphSample {
    pub multiplicities: Vec<u64>,
    pub extra: Option<(usize, usize)>,
}

impl PoissonGraphSample {
    /// `m_e` parallel copies of every base edge `e`, then the extra edge.
    pub fn realize(&self, base: &Multigraph) -> Multigraph {
        let mut edges = Vec::with_capacity(self.total_edges() as usize);
        for (&(u, v), &m) in base.edges().iter().zip(&self.multiplicities) {
            edges.extend(std::iter::repeat_n((u, v), m as usize));
        }
        edges.extend(self.extra);
        Multigraph::new(base.n_vertices(), edges).expect("endpoints come from the base graph")
    }

    pub fn total_edges(&self) -> u64 {
        self.multiplicities.iter().sum::<u64>() + u64::from(self.extra.is_some())
    }
}

pub fn poisson_sample<R: Rng + ?Sized>(
    g: &Multigraph,
    lambda: f64,
    rng: &mut R,
    attach: Option<(usize, usize)>,
) -> Result<PoissonGraphSample> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return usage(format!("Poisson intensity must be finite and >= 0, got {lambda}"));
    }
    if let Some((x, y)) = attach {
        if x >= g.n_vertices() || y >= g.n_vertices() {
            return usage(format!("attached edge ({x},{y}) out of range"));
        }
    }
    let multiplicities = if lambda == 0.0 {
        vec![0; g.n_edges()]
    } else {
        let dist = Poisson::new(lambda).map_err(|e| Error::Numerical(e.to_string()))?;
        (0..g.n_edges()).map(|_| dist.sample(rng) as u64).collect()
    };
    Ok(PoissonGraphSample { multiplicities, extra: attach })
}

/// Ratio of two sample means with a delta-method standard error.
#[derive(Clone, Debug, Serialize)]
pub struct RatioEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub numerator_mean: f64,
    pub denominator_mean: f64,
    pub samples: usize,
    pub seed: u64,
    pub lambda: f64,
}

impl RatioEstimate {
    fn from_pairs(pairs: &[(f64, f64)], seed: u64, lambda: f64) -> Result<Self> {
        let n = pairs.len() as f64;
        let mn = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let md = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        if md == 0.0 {
            return Err(Error::Numerical("denominator sample mean is zero".into()));
        }
        let r = mn / md;
        let (mut vn, mut vd, mut cnd) = (0.0, 0.0, 0.0);
        for &(a, b) in pairs {
            vn += (a - mn) * (a - mn);
            vd += (b - md) * (b - md);
            cnd += (a - mn) * (b - md);
        }
        let dof = (n - 1.0).max(1.0);
        let var = (vn - 2.0 * r * cnd + r * r * vd) / dof / (n * md * md);
        Ok(Self {
            estimate: r,
            std_err: var.max(0.0).sqrt(),
            numerator_mean: mn,
            denominator_mean: md,
            samples: pairs.len(),
            seed,
            lambda,
        })
    }

    pub fn as_estimate(&self) -> Estimate {
        Estimate { mean: self.estimate, std_err: self.std_err, samples: self.samples }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.as_estimate().within(target, k)
    }
}

/// Draws `cfg.samples` thickenings, split over [`MC_STREAMS`] streams, and
/// evaluates `f` on `G_P^{x,y}` and `G_P`. Samples are independent, so
/// `burn_in` and `thinning` play no role.
fn ratio_mc<S, I, F>(
    g: &Multigraph,
    lambda: f64,
    x: usize,
    y: usize,
    cfg: &SamplerConfig,
    init: I,
    f: F,
) -> Result<RatioEstimate>
where
    I: Fn() -> Result<S> + Sync,
    F: Fn(&mut S, &Multigraph) -> Result<f64> + Sync,
{
    if x >= g.n_vertices() || y >= g.n_vertices() {
        return usage(format!("vertices ({x},{y}) out of range 0..{}", g.n_vertices()));
    }
    if x == y {
        return usage("the attached edge needs distinct endpoints x != y");
    }
    if cfg.samples < 2 {
        return usage("need at least two samples");
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return usage(format!("Poisson intensity must be finite and >= 0, got {lambda}"));
    }
    let chunks: Vec<usize> = (0..MC_STREAMS)
        .map(|i| cfg.samples / MC_STREAMS + usize::from(i < cfg.samples % MC_STREAMS))
        .collect();
    let (init, f) = (&init, &f);
    let results: Vec<Result<Vec<(f64, f64)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                scope.spawn(move || {
                    let mut rng = chain_rng(cfg.seed, i as u64);
                    let mut state = init()?;
                    let mut out = Vec::with_capacity(n);
                    for _ in 0..n {
                        let h = poisson_sample(g, lambda, &mut rng, None)?.realize(g);
                        let hxy = h.with_edge(x, y)?;
                        out.push((f(&mut state, &hxy)?, f(&mut state, &h)?));
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampler thread")).collect()
    });
    let mut pairs = Vec::with_capacity(cfg.samples);
    for r in results {
        pairs.extend(r?);
    }
    RatioEstimate::from_pairs(&pairs, cfg.seed, lambda)
}

/// Estimates `E C(G_P^{x,y}; q) / E C(G_P; q)` for Poisson intensity `lambda`.
pub fn flow_correlation_mc(
    g: &Multigraph,
    lambda: f64,
    q: u64,
    x: usize,
    y: usize,
    cfg: &SamplerConfig,
) -> Result<RatioEstimate> {
    ratio_mc(g, lambda, x, y, cfg, || FlowCounter::new(q), |fc, h| {
        fc.count(h).to_f64().ok_or_else(|| Error::Numerical("flow count overflows f64".into()))
    })
}

/// `q tau_{beta,q}(x,y)` with `beta = lambda q`, the target of [`flow_correlation_mc`].
pub fn flow_correlation_target(g: &Multigraph, lambda: f64, q: u64, x: usize, y: usize) -> Result<f64> {
    let params = PottsParams::new(lambda * q as f64, q as usize);
    Ok(q as f64 * potts_two_point(g, &params, x, y)?)
}

/// Estimates `P(G_P^{x,y} even) / P(G_P even)`.
pub fn even_ratio_mc(g: &Multigraph, lambda: f64, x: usize, y: usize, cfg: &SamplerConfig) -> Result<RatioEstimate> {
    ratio_mc(g, lambda, x, y, cfg, || Ok(()), |_, h| Ok(if h.is_even() { 1.0 } else { 0.0 }))
}

/// `(-1)^|E_H| T_H(0, 1-q)` with `T` normalised by `(x-1)^(k(H)-1)`, which
/// equals `(-1)^(|V|-1) C_H(q)` for every `H` on the vertex set and
/// extends it to real `q`.
pub fn signed_flow_value(tc: &mut TutteComputer, h: &Multigraph, q: &Rational) -> Rational {
    let t = tc.tutte(h).eval(&Rational::zero(), &(Rational::one() - q));
    let k = h.n_components();
    let sign_exp = h.n_edges() + k - 1;
    if sign_exp % 2 == 0 {
        t
    } else {
        -t
    }
}

/// Estimates the Tutte-evaluation ratio at intensity `lambda = -ln(1-p)/q`;
/// its target is `(q-1) phi_{p,q}(x <-> y)`.
pub fn flow_connection_mc(
    g: &Multigraph,
    p: &Rational,
    q: &Rational,
    x: usize,
    y: usize,
    cfg: &SamplerConfig,
) -> Result<RatioEstimate> {
    RcParams::new(p.clone(), q.clone())?;
    let lambda = -(1.0 - to_f64(p)).ln() / to_f64(q);
    ratio_mc(
        g,
        lambda,
        x,
        y,
        cfg,
        || Ok(TutteComputer::default()),
        |tc, h| {
            // strip the common (-1)^(|V|-1)
            let v = to_f64(&signed_flow_value(tc, h, q));
            Ok(if (g.n_vertices() - 1) % 2 == 0 { v } else { -v })
        },
    )
}

pub fn flow_connection_target(g: &Multigraph, p: &Rational, q: &Rational, x: usize, y: usize) -> Result<Rational> {
    let phi = rc_connection_prob(g, &RcParams::new(p.clone(), q.clone())?, x, y)?;
    Ok((q - Rational::one()) * phi)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompflowReport {
    pub lambda: f64,
    pub p: f64,
    pub q: u64,
    /// Largest multiplicity kept per edge.
    pub truncation: usize,
    pub vectors: u64,
    pub expectation: f64,
    /// `Z_RC(p, q)`.
    pub lhs: f64,
    /// `(1-p)^(|E|(q-2)/q) q^|V| E C(G_P; q)` truncated.
    pub rhs: f64,
    pub deviation: f64,
    /// Bound on the omitted part of `rhs`.
    pub tail_bound: f64,
    pub pass: bool,
}

/// Cap on `(M+1)^|E|` multiplicity vectors in [`compflow_identity`].
pub const COMPFLOW_VECTOR_CAP: u64 = 10_000_000;

/// Checks `Z_RC = (1-p)^(|E|(q-2)/q) q^|V| E_lambda C(G_P; q)` with
/// `p = 1 - e^(-lambda q)`, summing the expectation over multiplicity
/// vectors with entries at most `M <= m_max`.
pub fn compflow_identity(g: &Multigraph, lambda: f64, q: u64, m_max: usize) -> Result<CompflowReport> {
    if q < 2 {
        return usage(format!("flow counts need integer q >= 2, got {q}"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return usage(format!("Poisson intensity must be finite and >= 0, got {lambda}"));
    }
    let m = g.n_edges();
    let n = g.n_vertices();
    let qf = q as f64;
    let p = -(-lambda * qf).exp_m1();

    let hist = size_component_histogram(g, DEFAULT_ENUMERATION_CAP)?;
    let lhs: f64 = hist
        .iter()
        .map(|(&(a, k), &c)| c as f64 * p.powi(a as i32) * (1.0 - p).powi((m - a) as i32) * qf.powi(k as i32))
        .sum();

    let prefactor = (-lambda * (qf - 2.0) * m as f64).exp() * qf.powi(n as i32);
    let s_edge = (lambda * (qf - 2.0)).exp();
    let tail = |cut: usize| -> f64 {
        // sum_{j > cut} e^-lambda (lambda (q-1))^j / j!
        let mu = lambda * (qf - 1.0);
        let mut term = (-lambda).exp();
        for j in 1..=cut {
            term *= mu / j as f64;
        }
        let mut sum = 0.0;
        let mut j = cut + 1;
        loop {
            term *= mu / j as f64;
            sum += term;
            if term <= sum * 1e-17 || term == 0.0 {
                break;
            }
            j += 1;
        }
        m as f64 * sum * s_edge.powi(m as i32 - 1) * prefactor
    };
    let mut cut = ((lambda * (qf - 1.0)).ceil() as usize + 5).min(m_max);
    while cut < m_max && tail(cut) >= COMPFLOW_TAIL_TARGET {
        cut += 1;
    }
    let tail_bound = if m == 0 { 0.0 } else { tail(cut) };

    let vectors = (cut as u64 + 1).checked_pow(m as u32).filter(|&v| v <= COMPFLOW_VECTOR_CAP);
    let Some(vectors) = vectors else {
        return cap_exceeded("multiplicity vectors", format!("{}^{m}", cut + 1), COMPFLOW_VECTOR_CAP);
    };

    let expectation = truncated_flow_expectation(g, lambda, q, cut)?;
    let rhs = prefactor * expectation;
    let deviation = (lhs - rhs).abs();
    let pass = deviation <= tail_bound + 1e-10 * lhs.abs().max(1.0);
    Ok(CompflowReport {
        lambda,
        p,
        q,
        truncation: cut,
        vectors,
        expectation,
        lhs,
        rhs,
        deviation,
        tail_bound,
        pass,
    })
}

/// `sum_{m in {0..cut}^E} prod_e Poisson_lambda(m_e) C(G_m; q)`.
///
/// Each parallel class of `m` copies carries a net value `s`; the number of
/// nowhere-zero assignments with that net value is `a_m(0)` or `a_m(!=0)`.
/// So `C(G_m) = sum_S C(G|S) prod_{e in S} a_{m_e}(!=0) prod_{e notin S} a_{m_e}(0)`
/// over subsets `S` of non-loop base edges, with loop classes contributing
/// `(q-1)^m_e`.
pub(crate) fn truncated_flow_expectation(g: &Multigraph, lambda: f64, q: u64, cut: usize) -> Result<f64> {
    let m = g.n_edges();
    let qf = q as f64;
    let nonloop: Vec<usize> = (0..m).filter(|&e| !g.is_loop(e)).collect();
    if nonloop.len() > DEFAULT_ENUMERATION_CAP {
        return cap_exceeded("flow subsets", format!("2^{}", nonloop.len()), format!("2^{DEFAULT_ENUMERATION_CAP}"));
    }
    let mut fc = FlowCounter::new(q)?;
    let base_counts: Vec<f64> = (0..1usize << nonloop.len())
        .map(|s| {
            let edges = nonloop
                .iter()
                .enumerate()
                .filter(|&(i, _)| s >> i & 1 == 1)
                .map(|(_, &e)| g.edges()[e])
                .collect();
            let sub = Multigraph::new(g.n_vertices(), edges).expect("subgraph");
            fc.count(&sub).to_f64().unwrap_or(f64::INFINITY)
        })
        .collect();
    let pmf: Vec<f64> = {
        let mut out = Vec::with_capacity(cut + 1);
        let mut t = (-lambda).exp();
        for j in 0..=cut {
            if j > 0 {
                t *= lambda / j as f64;
            }
            out.push(t);
        }
        out
    };
    let sgn = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let a_zero: Vec<f64> = (0..=cut).map(|j| ((qf - 1.0).powi(j as i32) + (qf - 1.0) * sgn(j)) / qf).collect();
    let a_nonzero: Vec<f64> = (0..=cut).map(|j| ((qf - 1.0).powi(j as i32) - sgn(j)) / qf).collect();

    let mut mult = vec![0usize; m];
    let mut total = 0.0;
    loop {
        let weight: f64 = mult.iter().map(|&j| pmf[j]).product();
        let loop_factor: f64 = (0..m)
            .filter(|&e| g.is_loop(e))
            .map(|e| (qf - 1.0).powi(mult[e] as i32))
            .product();
        let mut c = 0.0;
        for (s, &cs) in base_counts.iter().enumerate() {
            if cs == 0.0 {
                continue;
            }
            let mut term = cs;
            for (i, &e) in nonloop.iter().enumerate() {
                term *= if s >> i & 1 == 1 { a_nonzero[mult[e]] } else { a_zero[mult[e]] };
            }
            c += term;
        }
        total += weight * loop_factor * c;
        let mut i = 0;
        while i < m && mult[i] == cut {
            mult[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
        mult[i] += 1;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatingSetCheck {
    pub set: Vec<usize>,
    pub minimal: bool,
    /// `phi(x <-> z)`.
    pub lhs: String,
    /// `sum_{y in W} phi(x <-> y) phi(y <-> z)`.
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimonReport {
    pub x: usize,
    pub z: usize,
    pub p: String,
    pub q: String,
    pub set_cap: usize,
    /// Larger non-minimal separating sets exist but were not checked.
    pub cap_binding: bool,
    pub sets_checked: usize,
    pub minimal_sets: usize,
    pub violations: Vec<SeparatingSetCheck>,
    pub pass: bool,
}

/// `W` avoids `x`, `z` and meets every `x`–`z` path.
pub fn separates(g: &Multigraph, w_mask: u64, x: usize, z: usize) -> bool {
    if w_mask >> x & 1 == 1 || w_mask >> z & 1 == 1 {
        return false;
    }
    let n = g.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(u) = stack.pop() {
        if u == z {
            return false;
        }
        for &v in &adj[u] {
            if !seen[v] && w_mask >> v & 1 == 0 {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    true
}

/// Tests `phi(x <-> z) <= sum_{y in W} phi(x <-> y) phi(y <-> z)` for every
/// separating set of size at most [`SIMON_SET_CAP`] and every minimal one.
pub fn simon_check(g: &Multigraph, p: &Rational, q: &Rational, x: usize, z: usize) -> Result<SimonReport> {
    let n = g.n_vertices();
    if x >= n || z >= n || x == z {
        return usage(format!("need distinct vertices in 0..{n}, got x={x}, z={z}"));
    }
    if n > 24 {
        return cap_exceeded("separating-set search", format!("{n} vertices"), 24);
    }
    if *p < Rational::zero() || *p > Rational::one() || *q <= Rational::zero() {
        return usage("need p in [0,1] and q > 0");
    }
    let phi = connection_matrix_general(g, p, q)?;
    let others: Vec<usize> = (0..n).filter(|&v| v != x && v != z).collect();
    let full_search = others.len() <= 16;
    let mut report = SimonReport {
        x,
        z,
        p: fmt_rational(p),
        q: fmt_rational(q),
        set_cap: SIMON_SET_CAP,
        cap_binding: false,
        sets_checked: 0,
        minimal_sets: 0,
        violations: Vec::new(),
        pass: true,
    };
    let limit = if full_search { others.len() } else { SIMON_SET_CAP };
    for_each_small_subset(others.len(), limit, |idx| {
        let set: Vec<usize> = idx.iter().map(|&i| others[i]).collect();
        let mask = set.iter().fold(0u64, |acc, &v| acc | 1 << v);
        if !separates(g, mask, x, z) {
            return;
        }
        let minimal = set.iter().all(|&v| !separates(g, mask & !(1 << v), x, z));
        if set.len() > SIMON_SET_CAP && !minimal {
            report.cap_binding = true;
            return;
        }
        report.sets_checked += 1;
        report.minimal_sets += usize::from(minimal);
        let rhs: Rational = set.iter().map(|&y| &phi[x][y] * &phi[y][z]).sum();
        let lhs = &phi[x][z];
        if *lhs > rhs {
            report.pass = false;
            report.violations.push(SeparatingSetCheck {
                set,
                minimal,
                lhs: fmt_rational(lhs),
                rhs: fmt_rational(&rhs),
                holds: false,
            });
        }
    });
    if !full_search {
        report.cap_binding = true;
    }
    Ok(report)
}

/// Calls `f` on every subset of `0..n` of size at most `k`, as sorted indices.
fn for_each_small_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        f(cur);
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut f);
}

#[derive(Clone, Debug, Serialize)]
pub struct SimonScanReport {
    pub graphs: usize,
    pub instances: usize,
    pub p_grid: Vec<String>,
    pub q_grid: Vec<String>,
    /// `{graph, p, q, x, z, W, lhs, rhs}` for each violation found.
    pub violations: Vec<serde_json::Value>,
    pub pass: bool,
}

/// Runs [`simon_check`] over every graph, distinct pair and grid point.
pub fn simon_scan(graphs: &[Multigraph], p_grid: &[Rational], q_grid: &[Rational]) -> Result<SimonScanReport> {
    let mut instances = 0;
    let mut violations = Vec::new();
    for g in graphs {
        for p in p_grid {
            for q in q_grid {
                for x in 0..g.n_vertices() {
                    for z in x + 1..g.n_vertices() {
                        let r = simon_check(g, p, q, x, z)?;
                        instances += 1;
                        for v in r.violations {
                            violations.push(serde_json::json!({
                                "graph": g.to_file(),
                                "p": fmt_rational(p),
                                "q": fmt_rational(q),
                                "x": x,
                                "z": z,
                                "W": v.set,
                                "lhs": v.lhs,
                                "rhs": v.rhs,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(SimonScanReport {
        graphs: graphs.len(),
        instances,
        p_grid: p_grid.iter().map(fmt_rational).collect(),
        q_grid: q_grid.iter().map(fmt_rational).collect(),
        pass: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use crate::poly::{int, rat};
    use crate::polynomials::flow_poly;

    #[test]
    fn flow_count_examples() {
        assert_eq!(count_flows(&Multigraph::cycle(4), 3).unwrap(), 2);
        assert_eq!(count_flows(&Multigraph::path(3), 5).unwrap(), 0);
        assert_eq!(count_flows(&Multigraph::empty(3), 4).unwrap(), 1);
        assert_eq!(count_flows(&Multigraph::cycle(1), 4).unwrap(), 3);
        // one bridge between two triangles
        let g = Multigraph::new(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        for q in 2..5 {
            assert_eq!(count_flows(&g, q).unwrap(), 0);
        }
        assert!(count_flows(&Multigraph::complete(6), 9).is_err());
    }

    #[test]
    fn orientation_examples() {
        let r = orientation_invariance_check(&Multigraph::cycle(3), 4, 1).unwrap();
        assert!(r.pass);
        assert!(r.counts.iter().all(|&c| c == 3));
        let r = orientation_invariance_check(&Multigraph::cycle(1), 2, 1).unwrap();
        assert!(r.counts.iter().all(|&c| c == 1));
        assert!(orientation_invariance_check(&Multigraph::complete(4), 3, 7).unwrap().pass);
    }

    #[test]
    fn brute_force_matches_flow_polynomial() {
        for g in GraphFamily::connected_multigraphs(4, 6).generate() {
            let poly = flow_poly(&g).unwrap();
            for q in 2..=6u64 {
                let expected = poly.eval_univariate(&int(q as i64));
                assert_eq!(int(count_flows(&g, q).unwrap() as i64), expected, "{g:?} q={q}");
            }
        }
    }

    #[test]
    fn flow_counter_matches_brute_force() {
        let mut counters: Vec<FlowCounter> = (2..=5).map(|q| FlowCounter::new(q).unwrap()).collect();
        for g in GraphFamily::connected_multigraphs(4, 6).generate() {
            for fc in counters.iter_mut() {
                let q = fc.q();
                assert_eq!(fc.count(&g), BigInt::from(count_flows(&g, q).unwrap()));
            }
        }
    }

    #[test]
    fn even_iff_one_mod_two_flow() {
        for g in GraphFamily::connected_multigraphs(4, 7).generate() {
            assert_eq!(count_flows(&g, 2).unwrap(), u64::from(g.is_even()));
        }
    }

    #[test]
    fn poisson_examples() {
        let g = Multigraph::triangle();
        let mut rng = chain_rng(3, 0);
        let s = poisson_sample(&g, 0.0, &mut rng, None).unwrap();
        assert_eq!(s.multiplicities, vec![0, 0, 0]);
        let e = Multigraph::empty(2);
        let s = poisson_sample(&e, 1.0, &mut rng, Some((0, 1))).unwrap();
        assert_eq!(s.realize(&e).n_edges(), 1);
        assert!(poisson_sample(&g, -1.0, &mut rng, None).is_err());

        let edge = Multigraph::path(2);
        let n = 100_000;
        let lambda = 1.7;
        let total: u64 = (0..n)
            .map(|_| poisson_sample(&edge, lambda, &mut rng, None).unwrap().multiplicities[0])
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - lambda).abs() <= 3.0 * (lambda / n as f64).sqrt());
    }

    #[test]
    fn realize_keeps_parallel_copies() {
        let g = Multigraph::path(3);
        let s = PoissonGraphSample { multiplicities: vec![2, 0], extra: Some((0, 1)) };
        let h = s.realize(&g);
        assert_eq!(h.edges(), &[(0, 1), (0, 1), (0, 1)]);
        assert_eq!(s.total_edges(), 3);
    }

    #[test]
    fn flow_correlation_single_edge() {
        let g = Multigraph::path(2);
        let cfg = SamplerConfig::new(17, 100_000);
        let est = flow_correlation_mc(&g, 1.0, 2, 0, 1, &cfg).unwrap();
        let target = flow_correlation_target(&g, 1.0, 2, 0, 1).unwrap();
        assert!(est.within(target, 3.0), "{est:?} vs {target}");
        // 2 tau with beta = 2 is tanh(1)
        assert!((target - 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn zero_intensity_gives_zero() {
        let g = Multigraph::triangle();
        let cfg = SamplerConfig::new(1, 100);
        let est = flow_correlation_mc(&g, 0.0, 3, 0, 1, &cfg).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert!(flow_correlation_target(&g, 0.0, 3, 0, 1).unwrap().abs() < 1e-15);
        assert_eq!(even_ratio_mc(&g, 0.0, 0, 1, &cfg).unwrap().estimate, 0.0);
        assert!(flow_correlation_mc(&g, 1.0, 3, 1, 1, &cfg).is_err());
    }

    #[test]
    fn even_ratio_matches_flow_route() {
        let g = Multigraph::path(2);
        let cfg = SamplerConfig::new(23, 100_000);
        let even = even_ratio_mc(&g, 1.0, 0, 1, &cfg).unwrap();
        let target = flow_correlation_target(&g, 1.0, 2, 0, 1).unwrap();
        assert!(even.within(target, 3.0));
        let flow = flow_correlation_mc(&Multigraph::triangle(), 0.5, 2, 0, 1, &SamplerConfig::new(5, 20_000)).unwrap();
        let even = even_ratio_mc(&Multigraph::triangle(), 0.5, 0, 1, &SamplerConfig::new(6, 20_000)).unwrap();
        let se = (flow.std_err.powi(2) + even.std_err.powi(2)).sqrt();
        assert!((flow.estimate - even.estimate).abs() <= 3.0 * se);
    }

    #[test]
    fn signed_flow_value_tracks_flow_count() {
        let mut tc = TutteComputer::default();
        for g in GraphFamily::connected_multigraphs(4, 5).generate() {
            let minors = if g.n_edges() > 0 { vec![g.delete(0).unwrap()] } else { vec![] };
            for h in std::iter::once(g.clone()).chain(minors) {
                for q in 2..5u64 {
                    let c = int(count_flows(&h, q).unwrap() as i64);
                    let sign = if (h.n_vertices() - 1) % 2 == 0 { int(1) } else { int(-1) };
                    assert_eq!(signed_flow_value(&mut tc, &h, &int(q as i64)), sign * c);
                }
            }
        }
    }

    #[test]
    fn flow_connection_single_edge() {
        let g = Multigraph::path(2);
        let (p, q) = (rat(1, 2), int(3));
        let cfg = SamplerConfig::new(29, 100_000);
        let est = flow_connection_mc(&g, &p, &q, 0, 1, &cfg).unwrap();
        let target = to_f64(&flow_connection_target(&g, &p, &q, 0, 1).unwrap());
        assert!(est.within(target, 3.0), "{est:?} vs {target}");
    }

    #[test]
    fn flow_connection_real_q_triangle() {
        let g = Multigraph::triangle();
        let (p, q) = (rat(1, 3), rat(3, 2));
        let est = flow_connection_mc(&g, &p, &q, 0, 2, &SamplerConfig::new(31, 40_000)).unwrap();
        let target = to_f64(&flow_connection_target(&g, &p, &q, 0, 2).unwrap());
        assert!(est.within(target, 3.0), "{est:?} vs {target}");
    }

    #[test]
    fn flow_connection_at_q2_agrees_with_flow_correlation() {
        let g = Multigraph::triangle();
        let p = rat(1, 2);
        let cfg = SamplerConfig::new(41, 5_000);
        let a = flow_connection_mc(&g, &p, &int(2), 0, 1, &cfg).unwrap();
        let b = flow_correlation_mc(&g, a.lambda, 2, 0, 1, &cfg).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-12);
    }

    #[test]
    fn small_p_flow_connection_near_zero() {
        let g = Multigraph::path(2);
        let est = flow_connection_mc(&g, &rat(1, 1000), &int(2), 0, 1, &SamplerConfig::new(3, 20_000)).unwrap();
        assert!(est.estimate.abs() < 0.01);
    }

    #[test]
    fn standard_error_shrinks_with_samples() {
        let g = Multigraph::triangle();
        let a = even_ratio_mc(&g, 0.7, 0, 1, &SamplerConfig::new(8, 40_000)).unwrap();
        let b = even_ratio_mc(&g, 0.7, 0, 1, &SamplerConfig::new(8, 80_000)).unwrap();
        let ratio = b.std_err / a.std_err;
        assert!((ratio / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn compflow_examples() {
        let r = compflow_identity(&Multigraph::empty(3), 1.0, 3, 30).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, 27.0);
        assert_eq!(r.rhs, 27.0);
        let r = compflow_identity(&Multigraph::path(2), 1.0, 2, 30).unwrap();
        assert!(r.pass && r.tail_bound < 1e-8, "{r:?}");
        let r = compflow_identity(&Multigraph::triangle(), 0.5, 3, 30).unwrap();
        assert!(r.pass && r.tail_bound < 1e-8, "{r:?}");
        let r = compflow_identity(&Multigraph::cycle(1), 0.8, 3, 40).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn truncated_expectation_matches_closed_form() {
        // E a_P(0) = (e^{lambda(q-2)} + (q-1) e^{-2 lambda}) / q, similarly for a_P(!=0)
        for (g, lambda, q) in [(Multigraph::triangle(), 0.4, 3u64), (Multigraph::cycle(4), 0.3, 2)] {
            let qf = q as f64;
            let s = (lambda * (qf - 2.0)).exp();
            let alt = (-2.0 * lambda).exp();
            let (ez, enz) = ((s + (qf - 1.0) * alt) / qf, (s - alt) / qf);
            let m = g.n_edges();
            let mut closed = 0.0;
            for mask in 0..1usize << m {
                let edges = (0..m).filter(|e| mask >> e & 1 == 1).map(|e| g.edges()[e]).collect();
                let c = count_flows(&Multigraph::new(g.n_vertices(), edges).unwrap(), q).unwrap() as f64;
                let k = mask.count_ones() as i32;
                closed += c * enz.powi(k) * ez.powi(m as i32 - k);
            }
            let trunc = truncated_flow_expectation(&g, lambda, q, 25).unwrap();
            assert!((trunc - closed).abs() < 1e-10, "{trunc} vs {closed}");
        }
    }

    #[test]
    fn simon_path_by_hand() {
        // path 0-1-2: phi(0<->2) = phi(0<->1) phi(1<->2), so W = {1} is tight
        let g = Multigraph::path(3);
        let r = simon_check(&g, &rat(1, 2), &int(2), 0, 2).unwrap();
        assert!(r.pass);
        assert_eq!(r.sets_checked, 1);
        assert_eq!(r.minimal_sets, 1);
        assert!(simon_check(&g, &rat(1, 2), &int(2), 0, 0).is_err());
    }

    #[test]
    fn simon_holds_for_q_one_and_two() {
        let graphs = GraphFamily::simple_graphs(5, 10).connected().generate();
        let ps = [rat(1, 4), rat(1, 2), rat(3, 4)];
        let r = simon_scan(&graphs, &ps, &[int(1), int(2)]).unwrap();
        assert!(r.pass, "{:?}", r.violations.first());
        assert!(r.instances > 100);
    }

    #[test]
    fn separation_examples() {
        let c4 = Multigraph::cycle(4);
        assert!(!separates(&c4, 1 << 1, 0, 2));
        assert!(separates(&c4, (1 << 1) | (1 << 3), 0, 2));
        assert!(!separates(&c4, 1 << 0, 0, 2));
        assert!(separates(&Multigraph::empty(3), 0, 0, 2));
    }

    mod props {
        use super::*;
        use crate::graph::strategies::multigraph;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn brute_force_matches_polynomial(g in multigraph(5, 6), q in 2u64..=5) {
                let expected = flow_poly(&g).unwrap().eval_univariate(&int(q as i64));
                prop_assert_eq!(int(count_flows(&g, q).unwrap() as i64), expected);
            }

            #[test]
            fn orientation_does_not_matter(g in multigraph(5, 6), q in 2u64..=4, seed in any::<u64>()) {
                prop_assert!(orientation_invariance_check(&g, q, seed).unwrap().pass);
            }

            #[test]
            fn two_flows_detect_even_graphs(g in multigraph(5, 10)) {
                prop_assert_eq!(count_flows(&g, 2).unwrap() == 1, g.is_even());
            }
        }
    }
}
