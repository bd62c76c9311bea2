//! Stochastic ordering, positive and negative association on `{0,1}^E`,
//! the disjoint-occurrence operator, and the `q -> 0` limits of the
//! random-cluster measure.
//!
//! Configurations are edge bitmasks; an [`Event`] is a bitset over
//! configurations, so events live on at most [`MAX_EVENT_EDGES`] edges.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::coupling::chain_rng;
use crate::error::{cap_exceeded, usage, Error, Result};
use crate::graph::Multigraph;
use crate::measures::{rc_measure_table_general, ConfigSpace, MeasureTable, TABLE_EDGE_CAP};
use crate::poly::{fmt_rational, powi, to_f64, Rational};
use crate::polynomials::for_each_subset;

pub const MAX_EVENT_EDGES: usize = 6;

/// Up-set enumeration is exhaustive up to this many edges.
pub const UPSET_ENUMERATION_CAP: usize = 5;

/// Random function pairs tried by [`fkg_check`].
pub const FKG_RANDOM_PAIRS: usize = 100;

/// Random general event pairs tried for the disjoint-occurrence property
/// when an exhaustive check is out of reach.
pub const DISJOINT_RANDOM_PAIRS: usize = 20_000;

/// A set of configurations in `{0,1}^E`, bit `w` standing for the
/// configuration with edge mask `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    bits: u64,
    n_edges: usize,
}

fn space_mask(m: usize) -> u64 {
    if m == MAX_EVENT_EDGES {
        u64::MAX
    } else {
        (1u64 << (1 << m)) - 1
    }
}

fn check_event_edges(m: usize) -> Result<()> {
    if m > MAX_EVENT_EDGES {
        return cap_exceeded("event space", format!("{m} edges"), MAX_EVENT_EDGES);
    }
    Ok(())
}

impl Event {
    pub fn new(bits: u64, n_edges: usize) -> Result<Self> {
        check_event_edges(n_edges)?;
        if bits & !space_mask(n_edges) != 0 {
            return usage(format!("event has configurations outside {{0,1}}^{n_edges}"));
        }
        Ok(Self { bits, n_edges })
    }

    pub fn empty(n_edges: usize) -> Self {
        Self { bits: 0, n_edges }
    }

    pub fn full(n_edges: usize) -> Self {
        Self { bits: space_mask(n_edges), n_edges }
    }

    /// `J_e`: edge `e` is open.
    pub fn edge_open(e: usize, n_edges: usize) -> Self {
        Self::from_predicate(n_edges, |w| w >> e & 1 == 1)
    }

    pub fn from_predicate(n_edges: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        let bits = (0..1usize << n_edges).filter(|&w| pred(w)).fold(0u64, |acc, w| acc | 1 << w);
        Self { bits, n_edges }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn contains(&self, w: usize) -> bool {
        self.bits >> w & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn configs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..1usize << self.n_edges).filter(|&w| self.contains(w))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self { bits: self.bits & other.bits, n_edges: self.n_edges }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { bits: self.bits | other.bits, n_edges: self.n_edges }
    }

    pub fn complement(&self) -> Self {
        Self { bits: !self.bits & space_mask(self.n_edges), n_edges: self.n_edges }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_increasing(&self) -> bool {
        self.configs().all(|w| (0..self.n_edges).all(|e| self.contains(w | 1 << e)))
    }

    /// Edges whose value can change membership.
    pub fn support(&self) -> u64 {
        (0..self.n_edges)
            .filter(|&e| (0..1usize << self.n_edges).any(|w| self.contains(w) != self.contains(w ^ 1 << e)))
            .fold(0, |acc, e| acc | 1 << e)
    }

    /// `w in A` iff the cylinder of `w` on `F` lies in `A`.
    pub fn is_defined_on(&self, f_mask: u64) -> bool {
        self.support() & !f_mask == 0
    }

    /// Bit `F` of entry `w` says the cylinder `Omega_{F,w}` lies in the event.
    fn certificates(&self) -> Vec<u64> {
        let m = self.n_edges;
        let full = (1usize << m) - 1;
        (0..1usize << m)
            .map(|w| {
                let mut certs = 0u64;
                for f in 0..=full {
                    let free = full & !f;
                    // iterate over all configurations agreeing with w on F
                    let mut sub = free;
                    let mut inside = true;
                    loop {
                        if !self.contains((w & f) | sub) {
                            inside = false;
                            break;
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & free;
                    }
                    if inside {
                        certs |= 1 << f;
                    }
                }
                certs
            })
            .collect()
    }
}

/// An up-set of `{0,1}^E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IncreasingEvent(Event);

impl IncreasingEvent {
    pub fn new(event: Event) -> Result<Self> {
        if !event.is_increasing() {
            return usage("event is not increasing");
        }
        Ok(Self(event))
    }

    pub fn event(&self) -> &Event {
        &self.0
    }

    /// The smallest up-set containing the given configurations.
    pub fn up_closure(n_edges: usize, generators: &[usize]) -> Result<Self> {
        check_event_edges(n_edges)?;
        Ok(Self(Event::from_predicate(n_edges, |w| generators.iter().any(|&g| g & !w == 0))))
    }
}

/// All up-sets of the `m`-cube, built from pairs `U0 <= U1` of up-sets of
/// the `(m-1)`-cube. Sizes run 2, 3, 6, 20, 168, 7581.
pub fn enumerate_increasing_events(m: usize) -> Result<Vec<IncreasingEvent>> {
    if m > UPSET_ENUMERATION_CAP {
        return cap_exceeded("up-set enumeration", format!("{m} edges"), UPSET_ENUMERATION_CAP);
    }
    let mut sets: Vec<u64> = vec![0, 1];
    for k in 1..=m {
        let half = 1u32 << (k - 1);
        let mut next = Vec::new();
        for &lo in &sets {
            for &hi in &sets {
                if lo & !hi == 0 {
                    next.push(lo | hi << half);
                }
            }
        }
        sets = next;
    }
    sets.sort_unstable();
    Ok(sets.into_iter().map(|bits| IncreasingEvent(Event { bits, n_edges: m })).collect())
}

/// `A box B`: configurations `w` with some `F` such that the cylinders of
/// `w` on `F` and on `E \ F` lie in `A` and `B` respectively.
pub fn box_product(a: &Event, b: &Event) -> Result<Event> {
    if a.n_edges != b.n_edges {
        return usage("events on different edge sets");
    }
    Ok(box_from_certificates(a.n_edges, &a.certificates(), &b.certificates()))
}

fn box_from_certificates(m: usize, ca: &[u64], cb: &[u64]) -> Event {
    let width = 1u32 << m;
    let bits = (0..1usize << m)
        .filter(|&w| {
            // bit F of the reversed word is bit (2^m - 1 - F) = complement of F
            let cb_comp = cb[w].reverse_bits() >> (64 - width);
            ca[w] & cb_comp != 0
        })
        .fold(0u64, |acc, w| acc | 1 << w);
    Event { bits, n_edges: m }
}

/// A bond measure as integer masses over a common denominator.
#[derive(Clone, Debug)]
struct Masses {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Masses {
    fn new(table: &MeasureTable) -> Result<Self> {
        let Some(m) = table.bond_edges() else {
            return usage("association checks need a bond measure");
        };
        check_event_edges(m)?;
        let den = table.probs().iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let num = table.probs().iter().map(|p| p.numer() * (&den / p.denom())).collect();
        Ok(Self { num, den })
    }

    fn mass(&self, bits: u64) -> BigInt {
        let mut total = BigInt::zero();
        let mut b = bits;
        while b != 0 {
            total += &self.num[b.trailing_zeros() as usize];
            b &= b - 1;
        }
        total
    }

    /// `mu(A B) <= mu(A) mu(B)` with `mu(A B)` given as a mass.
    fn at_most_product(&self, joint: &BigInt, a: &BigInt, b: &BigInt) -> bool {
        joint * &self.den <= a * b
    }

    fn prob(&self, bits: u64) -> Rational {
        Rational::new(self.mass(bits), self.den.clone())
    }
}

fn bond_edges_of(table: &MeasureTable) -> Result<usize> {
    table.bond_edges().map_or_else(|| usage("expected a bond measure"), Ok)
}

fn event_json(e: &Event) -> serde_json::Value {
    json!({ "edges": e.n_edges, "configs": e.configs().collect::<Vec<_>>() })
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceResult {
    pub holds: bool,
    pub events_checked: usize,
    /// An increasing event with `mu1(A) > mu2(A)`, as its configurations.
    pub witness: Option<serde_json::Value>,
}

/// `mu1 <= mu2` in the stochastic order, checked on every increasing event.
pub fn stochastic_dominance(mu1: &MeasureTable, mu2: &MeasureTable) -> Result<DominanceResult> {
    let m = bond_edges_of(mu1)?;
    if bond_edges_of(mu2)? != m {
        return usage("measures live on different edge sets");
    }
    let (a, b) = (Masses::new(mu1)?, Masses::new(mu2)?);
    let events = enumerate_increasing_events(m)?;
    for ev in &events {
        let bits = ev.event().bits;
        if a.mass(bits) * &b.den > b.mass(bits) * &a.den {
            return Ok(DominanceResult {
                holds: false,
                events_checked: events.len(),
                witness: Some(event_json(ev.event())),
            });
        }
    }
    Ok(DominanceResult { holds: true, events_checked: events.len(), witness: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub p: String,
    pub q: String,
    pub p_prime: String,
    pub q_prime: String,
    /// `phi_{p',q'} <= phi_{p,q}` when `q' >= q, q' >= 1, p' <= p`.
    pub first: Option<DominanceResult>,
    /// `phi_{p',q'} >= phi_{p,q}` when `q' >= q, q' >= 1` and
    /// `p'/(q'(1-p')) >= p/(q(1-p))`.
    pub second: Option<DominanceResult>,
    pub pass: bool,
}

pub fn comparison_hypotheses(p: &Rational, q: &Rational, p2: &Rational, q2: &Rational) -> (bool, bool) {
    let base = q2 >= q && *q2 >= Rational::one();
    let first = base && p2 <= p;
    let one = Rational::one();
    let second = base && p2 / (q2 * (&one - p2)) >= p / (q * (&one - p));
    (first, second)
}

pub fn comparison_check(
    g: &Multigraph,
    p: &Rational,
    q: &Rational,
    p2: &Rational,
    q2: &Rational,
) -> Result<ComparisonReport> {
    for (pp, qq) in [(p, q), (p2, q2)] {
        if *pp <= Rational::zero() || *pp >= Rational::one() || *qq <= Rational::zero() {
            return usage("need p in (0,1) and q > 0");
        }
    }
    let (h1, h2) = comparison_hypotheses(p, q, p2, q2);
    if !h1 && !h2 {
        return usage("neither comparison hypothesis holds for these parameters");
    }
    let phi = rc_measure_table_general(g, p, q)?;
    let phi2 = rc_measure_table_general(g, p2, q2)?;
    let first = if h1 { Some(stochastic_dominance(&phi2, &phi)?) } else { None };
    let second = if h2 { Some(stochastic_dominance(&phi, &phi2)?) } else { None };
    let pass = first.iter().chain(&second).all(|r| r.holds);
    Ok(ComparisonReport {
        p: fmt_rational(p),
        q: fmt_rational(q),
        p_prime: fmt_rational(p2),
        q_prime: fmt_rational(q2),
        first,
        second,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FkgReport {
    pub p: String,
    pub q: String,
    /// `q >= 1`; below that a violation is a finding, not a failure.
    pub theorem_applies: bool,
    pub event_pairs: usize,
    pub exhaustive: bool,
    pub function_pairs: usize,
    pub seed: u64,
    pub violation: Option<serde_json::Value>,
    pub pass: bool,
}

/// Pairs of up-sets checked exhaustively in [`fkg_check`].
pub const FKG_EXHAUSTIVE_EDGES: usize = 4;

/// `phi(AB) >= phi(A) phi(B)` over increasing pairs, plus random pairs of
/// increasing functions.
pub fn fkg_check(g: &Multigraph, p: &Rational, q: &Rational, seed: u64) -> Result<FkgReport> {
    let m = g.n_edges();
    check_event_edges(m)?;
    let phi = rc_measure_table_general(g, p, q)?;
    let masses = Masses::new(&phi)?;
    let mut rng = chain_rng(seed, 0);
    let mut violation = None;
    let mut event_pairs = 0;
    let exhaustive = m <= FKG_EXHAUSTIVE_EDGES;

    let events: Vec<u64> = if exhaustive {
        enumerate_increasing_events(m)?.iter().map(|e| e.event().bits).collect()
    } else {
        (0..400).map(|_| random_upset(m, &mut rng).event().bits).collect()
    };
    let ev_mass: Vec<BigInt> = events.iter().map(|&b| masses.mass(b)).collect();
    'outer: for i in 0..events.len() {
        for j in i..events.len() {
            event_pairs += 1;
            let joint = masses.mass(events[i] & events[j]);
            if joint * &masses.den < &ev_mass[i] * &ev_mass[j] {
                violation = Some(json!({
                    "A": event_json(&Event { bits: events[i], n_edges: m }),
                    "B": event_json(&Event { bits: events[j], n_edges: m }),
                    "phi_AB": fmt_rational(&masses.prob(events[i] & events[j])),
                    "phi_A": fmt_rational(&masses.prob(events[i])),
                    "phi_B": fmt_rational(&masses.prob(events[j])),
                }));
                break 'outer;
            }
        }
    }

    let mut function_pairs = 0;
    if violation.is_none() {
        for _ in 0..FKG_RANDOM_PAIRS {
            let f = random_increasing_function(m, &mut rng);
            let h = random_increasing_function(m, &mut rng);
            function_pairs += 1;
            let e = |v: &[i64]| -> BigInt {
                v.iter().zip(&masses.num).map(|(&x, n)| n * BigInt::from(x)).sum()
            };
            let fh: Vec<i64> = f.iter().zip(&h).map(|(a, b)| a * b).collect();
            if e(&fh) * &masses.den < e(&f) * e(&h) {
                violation = Some(json!({ "f": f, "g": h }));
                break;
            }
        }
    }
    let theorem_applies = *q >= Rational::one();
    Ok(FkgReport {
        p: fmt_rational(p),
        q: fmt_rational(q),
        theorem_applies,
        event_pairs,
        exhaustive,
        function_pairs,
        seed,
        pass: violation.is_none(),
        violation,
    })
}

/// Up-closure of a few random configurations.
fn random_upset<R: Rng + ?Sized>(m: usize, rng: &mut R) -> IncreasingEvent {
    let k = rng.random_range(0..=3);
    let gens: Vec<usize> = (0..k).map(|_| rng.random_range(0..1usize << m)).collect();
    IncreasingEvent::up_closure(m, &gens).expect("edge count checked by caller")
}

/// `f(w) = max_{w' <= w} r(w')` for random small integers `r`, which is
/// increasing and a non-negative combination of up-set indicators.
fn random_increasing_function<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<i64> {
    let mut f: Vec<i64> = (0..1usize << m).map(|_| rng.random_range(0..10)).collect();
    for w in 0..1usize << m {
        for e in 0..m {
            if w >> e & 1 == 1 {
                f[w] = f[w].max(f[w ^ 1 << e]);
            }
        }
    }
    f
}

#[derive(Clone, Debug, Serialize)]
pub struct NaReport {
    pub edges: usize,
    /// `mu(J_e J_f) <= mu(J_e) mu(J_f)` for all `e != f`.
    pub edge_na: bool,
    /// Over increasing pairs defined on complementary edge sets; `None`
    /// above the up-set enumeration cap.
    pub na: Option<bool>,
    pub na_pairs: usize,
    /// `mu(A box B) <= mu(A) mu(B)`; `None` when not evaluated.
    pub disjoint_occurrence: Option<bool>,
    pub disjoint_pairs: u64,
    /// All event pairs were checked for the disjoint-occurrence property.
    pub disjoint_exhaustive: bool,
    /// Disjoint occurrence implies NA implies edge NA on the computed values.
    pub chain_consistent: bool,
    pub witnesses: Vec<serde_json::Value>,
}

/// Edge count up to which every pair of events is tested for disjoint occurrence.
pub const DISJOINT_EXHAUSTIVE_EDGES: usize = 3;
/// Largest edge count for which the disjoint-occurrence property is evaluated at all.
pub const DISJOINT_MAX_EDGES: usize = 4;

/// The three negative-association notions for a bond measure.
pub fn negative_association_checks(mu: &MeasureTable, seed: u64) -> Result<NaReport> {
    let m = bond_edges_of(mu)?;
    let mut witnesses = Vec::new();
    let edge_na = edge_na_exact(mu, m, &mut witnesses)?;
    check_event_edges(m)?;
    let masses = Masses::new(mu)?;

    let (na, na_pairs) = if m <= UPSET_ENUMERATION_CAP {
        let (ok, pairs) = na_over_upsets(&masses, m, &mut witnesses)?;
        (Some(ok), pairs)
    } else {
        (None, 0)
    };

    let (disjoint_occurrence, disjoint_pairs, disjoint_exhaustive) = if m <= DISJOINT_MAX_EDGES {
        let (ok, pairs, exhaustive) = disjoint_occurrence_check(&masses, m, seed, &mut witnesses)?;
        (Some(ok), pairs, exhaustive)
    } else {
        (None, 0, false)
    };

    let chain_consistent = !(disjoint_occurrence == Some(true) && na == Some(false))
        && !(na == Some(true) && !edge_na)
        && !(disjoint_occurrence == Some(true) && !edge_na);
    Ok(NaReport {
        edges: m,
        edge_na,
        na,
        na_pairs,
        disjoint_occurrence,
        disjoint_pairs,
        disjoint_exhaustive,
        chain_consistent,
        witnesses,
    })
}

/// Edge NA straight from the table; works for any edge count.
fn edge_na_exact(mu: &MeasureTable, m: usize, witnesses: &mut Vec<serde_json::Value>) -> Result<bool> {
    let single: Vec<Rational> = (0..m).map(|e| mu.prob_where(|w| w >> e & 1 == 1)).collect();
    let mut ok = true;
    for e in 0..m {
        for f in e + 1..m {
            let both = mu.prob_where(|w| w >> e & 1 == 1 && w >> f & 1 == 1);
            if both > &single[e] * &single[f] {
                ok = false;
                witnesses.push(json!({
                    "notion": "edge_na",
                    "e": e,
                    "f": f,
                    "mu_ef": fmt_rational(&both),
                    "mu_e": fmt_rational(&single[e]),
                    "mu_f": fmt_rational(&single[f]),
                }));
                return Ok(ok);
            }
        }
    }
    Ok(ok)
}

fn na_over_upsets(masses: &Masses, m: usize, witnesses: &mut Vec<serde_json::Value>) -> Result<(bool, usize)> {
    // group non-trivial up-sets by support; a pair qualifies when supports are disjoint
    let mut by_support: BTreeMap<u64, Vec<(u64, BigInt)>> = BTreeMap::new();
    for ev in enumerate_increasing_events(m)? {
        let s = ev.event().support();
        if s != 0 {
            let bits = ev.event().bits;
            by_support.entry(s).or_default().push((bits, masses.mass(bits)));
        }
    }
    let groups: Vec<(u64, Vec<(u64, BigInt)>)> = by_support.into_iter().collect();
    let mut pairs = 0;
    for (i, (sa, ga)) in groups.iter().enumerate() {
        for (sb, gb) in &groups[i..] {
            if sa & sb != 0 {
                continue;
            }
            for (a, ma) in ga {
                for (b, mb) in gb {
                    pairs += 1;
                    let joint = masses.mass(a & b);
                    if !masses.at_most_product(&joint, ma, mb) {
                        witnesses.push(json!({
                            "notion": "na",
                            "A": event_json(&Event { bits: *a, n_edges: m }),
                            "B": event_json(&Event { bits: *b, n_edges: m }),
                            "F": sa,
                        }));
                        return Ok((false, pairs));
                    }
                }
            }
        }
    }
    Ok((true, pairs))
}

/// Exhaustive for at most [`DISJOINT_EXHAUSTIVE_EDGES`] edges. Beyond that:
/// every increasing pair, every decreasing pair, and seeded random general
/// pairs. NA pairs are covered by the increasing ones, since `A box B = A B`
/// when `A` and `B` depend on disjoint edges.
fn disjoint_occurrence_check(
    masses: &Masses,
    m: usize,
    seed: u64,
    witnesses: &mut Vec<serde_json::Value>,
) -> Result<(bool, u64, bool)> {
    let mut pairs = 0u64;
    let mut check = |a: &Event, ca: &[u64], b: &Event, cb: &[u64], ma: &BigInt, mb: &BigInt| -> bool {
        pairs += 1;
        let boxed = box_from_certificates(m, ca, cb);
        let ok = masses.at_most_product(&masses.mass(boxed.bits), ma, mb);
        if !ok {
            witnesses.push(json!({
                "notion": "disjoint_occurrence",
                "A": event_json(a),
                "B": event_json(b),
                "A_box_B": event_json(&boxed),
            }));
        }
        ok
    };
    let prepare = |events: Vec<Event>| -> Vec<(Event, Vec<u64>, BigInt)> {
        events
            .into_iter()
            .map(|e| {
                let c = e.certificates();
                let mass = masses.mass(e.bits);
                (e, c, mass)
            })
            .collect()
    };

    if m <= DISJOINT_EXHAUSTIVE_EDGES {
        let all = prepare((0..=space_mask(m)).map(|bits| Event { bits, n_edges: m }).collect());
        for (a, ca, ma) in &all {
            for (b, cb, mb) in &all {
                if !check(a, ca, b, cb, ma, mb) {
                    return Ok((false, pairs, true));
                }
            }
        }
        return Ok((true, pairs, true));
    }

    let ups: Vec<Event> = enumerate_increasing_events(m)?.into_iter().map(|e| e.0).collect();
    let downs: Vec<Event> = ups.iter().map(|e| e.complement()).collect();
    for family in [prepare(ups), prepare(downs)] {
        for (a, ca, ma) in &family {
            for (b, cb, mb) in &family {
                if !check(a, ca, b, cb, ma, mb) {
                    return Ok((false, pairs, false));
                }
            }
        }
    }
    let mut rng = chain_rng(seed, 1);
    for _ in 0..DISJOINT_RANDOM_PAIRS {
        let a = Event { bits: rng.random::<u64>() & space_mask(m), n_edges: m };
        let b = Event { bits: rng.random::<u64>() & space_mask(m), n_edges: m };
        let (ca, cb) = (a.certificates(), b.certificates());
        if !check(&a, &ca, &b, &cb, &masses.mass(a.bits), &masses.mass(b.bits)) {
            return Ok((false, pairs, false));
        }
    }
    Ok((true, pairs, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Substructure {
    SpanningTree,
    Forest,
    ConnectedSubgraph,
}

impl FromStr for Substructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spanning-tree" | "ust" => Ok(Self::SpanningTree),
            "forest" | "usf" => Ok(Self::Forest),
            "connected-subgraph" | "ucs" => Ok(Self::ConnectedSubgraph),
            _ => usage(format!("unknown substructure '{s}'")),
        }
    }
}

/// Uniform measure on spanning trees, forests or connected spanning subgraphs.
pub fn uniform_substructure_measure(g: &Multigraph, kind: Substructure) -> Result<MeasureTable> {
    if g.n_edges() > TABLE_EDGE_CAP {
        return cap_exceeded("bond table", format!("2^{}", g.n_edges()), format!("2^{TABLE_EDGE_CAP}"));
    }
    if kind != Substructure::Forest && !g.is_connected() {
        return usage("spanning trees and connected subgraphs need a connected graph");
    }
    let n = g.n_vertices();
    let mut support = Vec::new();
    for_each_subset(g, TABLE_EDGE_CAP, |mask, k| {
        let size = mask.count_ones() as usize;
        let keep = match kind {
            Substructure::SpanningTree => k == 1 && size + 1 == n,
            Substructure::Forest => size + k == n,
            Substructure::ConnectedSubgraph => k == 1,
        };
        if keep {
            support.push(mask as usize);
        }
    })?;
    MeasureTable::uniform_on(ConfigSpace::Bonds { edges: g.n_edges() }, &support)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p = 1/2`.
    Ucs,
    /// `p = sqrt(q)`, so `p -> 0` and `q/p -> 0`.
    Ust,
    /// `p = q`.
    Usf,
}

impl Regime {
    pub fn target(self) -> Substructure {
        match self {
            Self::Ucs => Substructure::ConnectedSubgraph,
            Self::Ust => Substructure::SpanningTree,
            Self::Usf => Substructure::Forest,
        }
    }

    /// Edge parameter along the regime's path; the square root is rounded
    /// to a nearby dyadic rational so the table stays exact.
    pub fn p_for(self, q: &Rational) -> Result<Rational> {
        match self {
            Self::Ucs => Ok(Rational::new(1.into(), 2.into())),
            Self::Usf => Ok(q.clone()),
            Self::Ust => Rational::from_float(to_f64(q).sqrt())
                .ok_or_else(|| Error::Numerical("square root of q is not finite".into())),
        }
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ucs" => Ok(Self::Ucs),
            "ust" => Ok(Self::Ust),
            "usf" => Ok(Self::Usf),
            _ => usage(format!("unknown regime '{s}' (expected ucs, ust or usf)")),
        }
    }
}

/// `q = 10^-1, ..., 10^-6`.
pub fn default_q_schedule() -> Vec<Rational> {
    (1..=6).map(|k| Rational::new(1.into(), BigInt::from(10).pow(k))).collect()
}

/// Default threshold on the final total-variation distance.
pub const LIMIT_TV_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct LimitPoint {
    pub q: String,
    pub p: String,
    pub tv: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub regime: Regime,
    pub points: Vec<LimitPoint>,
    pub monotone: bool,
    pub final_tv: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Total-variation distance between `phi_{p,q}` and the regime's uniform
/// limit along a decreasing schedule of `q`.
pub fn q_to_zero_limit_check(g: &Multigraph, regime: Regime, schedule: &[Rational]) -> Result<LimitReport> {
    if schedule.is_empty() {
        return usage("empty q schedule");
    }
    let target = uniform_substructure_measure(g, regime.target())?;
    let mut points = Vec::new();
    let mut tvs: Vec<Rational> = Vec::new();
    for q in schedule {
        if *q <= Rational::zero() {
            return usage("schedule values must be positive");
        }
        let p = regime.p_for(q)?;
        let tv = rc_measure_table_general(g, &p, q)?.tv_distance(&target)?;
        points.push(LimitPoint { q: fmt_rational(q), p: fmt_rational(&p), tv: to_f64(&tv) });
        tvs.push(tv);
    }
    let monotone = tvs.windows(2).all(|w| w[1] <= w[0]);
    let final_tv = points.last().map_or(f64::NAN, |p| p.tv);
    Ok(LimitReport {
        regime,
        points,
        monotone,
        final_tv,
        threshold: LIMIT_TV_THRESHOLD,
        pass: monotone && final_tv < LIMIT_TV_THRESHOLD,
    })
}

/// Negative association of the uniform spanning tree: the full notion up to
/// the up-set cap, edge NA beyond.
pub fn ust_feder_mihail_check(g: &Multigraph) -> Result<NaReport> {
    let ust = uniform_substructure_measure(g, Substructure::SpanningTree)?;
    na_without_disjoint(&ust, UPSET_ENUMERATION_CAP)
}

/// Edge NA always, NA when the edge count is at most `na_cap`.
fn na_without_disjoint(mu: &MeasureTable, na_cap: usize) -> Result<NaReport> {
    let m = bond_edges_of(mu)?;
    let mut witnesses = Vec::new();
    let edge_na = edge_na_exact(mu, m, &mut witnesses)?;
    let (na, na_pairs) = if m <= na_cap.min(UPSET_ENUMERATION_CAP) {
        let masses = Masses::new(mu)?;
        let (ok, pairs) = na_over_upsets(&masses, m, &mut witnesses)?;
        (Some(ok), pairs)
    } else {
        (None, 0)
    };
    Ok(NaReport {
        edges: m,
        edge_na,
        na,
        na_pairs,
        disjoint_occurrence: None,
        disjoint_pairs: 0,
        disjoint_exhaustive: false,
        chain_consistent: !(na == Some(true) && !edge_na),
        witnesses,
    })
}

/// Edge count up to which the forest/connected-subgraph scan also checks full NA.
pub const FOREST_SCAN_NA_EDGES: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct ForestScanReport {
    pub graphs: usize,
    pub max_edges: usize,
    pub na_max_edges: usize,
    /// Graphs on which the scan found a counterexample, with the witness.
    pub counterexamples: Vec<serde_json::Value>,
    /// Always true: the scan reports findings and never gates.
    pub informational: bool,
}

/// Searches for edge-NA (and NA where cheap) violations of the uniform
/// forest and connected-subgraph measures.
pub fn conjecture_forest_scan(graphs: &[Multigraph], max_edges: usize) -> Result<ForestScanReport> {
    let mut counterexamples = Vec::new();
    let mut scanned = 0;
    for g in graphs.iter().filter(|g| g.n_edges() <= max_edges && g.is_connected()) {
        scanned += 1;
        for kind in [Substructure::Forest, Substructure::ConnectedSubgraph] {
            let mu = uniform_substructure_measure(g, kind)?;
            let report = na_without_disjoint(&mu, FOREST_SCAN_NA_EDGES)?;
            if !report.edge_na || report.na == Some(false) {
                counterexamples.push(json!({
                    "graph": g.to_file(),
                    "measure": kind,
                    "edge_na": report.edge_na,
                    "na": report.na,
                    "witnesses": report.witnesses,
                }));
            }
        }
    }
    Ok(ForestScanReport {
        graphs: scanned,
        max_edges,
        na_max_edges: FOREST_SCAN_NA_EDGES,
        counterexamples,
        informational: true,
    })
}

/// Product measure with open probability `p` on every edge.
pub fn product_measure(m: usize, p: &Rational) -> Result<MeasureTable> {
    if m > TABLE_EDGE_CAP {
        return cap_exceeded("bond table", format!("2^{m}"), format!("2^{TABLE_EDGE_CAP}"));
    }
    let one_minus = Rational::one() - p;
    let weights = (0..1usize << m)
        .map(|w| {
            let a = w.count_ones() as i64;
            powi(p, a) * powi(&one_minus, m as i64 - a)
        })
        .collect();
    MeasureTable::from_weights(ConfigSpace::Bonds { edges: m }, weights)
}
