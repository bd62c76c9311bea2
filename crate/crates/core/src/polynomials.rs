//! Rank-generating function, Tutte polynomial and their specializations.
//!
//! The Tutte polynomial is computed by deletion–contraction with a bounded
//! least-recently-used memo keyed on [`Multigraph::canonical_key`]. Loops
//! and bridges are stripped eagerly before each branching step. The
//! rank-generating function is computed by summing over all edge subsets and
//! serves as the independent route for cross-checks.

use std::collections::HashMap;
use std::num::NonZeroUsize;

use lru::LruCache;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{cap_exceeded, Result};
use crate::graph::{GraphKey, Multigraph};
use crate::poly::{BivariatePolynomial, Rational};

/// Default bound on brute-force subset enumeration (about 16M subsets).
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Default number of memoized minors kept by [`TutteComputer`].
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

/// Visits every edge subset as `(mask, k(A))`.
pub(crate) fn for_each_subset(
    g: &Multigraph,
    cap: usize,
    mut f: impl FnMut(u64, usize),
) -> Result<()> {
    let m = g.n_edges();
    if m > cap {
        return cap_exceeded("subset enumeration", format!("{m} edges"), format!("{cap} edges"));
    }
    for mask in 0..(1u64 << m) {
        f(mask, g.components_of_mask(mask));
    }
    Ok(())
}

/// Counts of subsets by `(|A|, k(A))`.
pub(crate) fn size_component_histogram(
    g: &Multigraph,
    cap: usize,
) -> Result<HashMap<(usize, usize), u64>> {
    let mut hist = HashMap::new();
    for_each_subset(g, cap, |mask, k| {
        *hist.entry((mask.count_ones() as usize, k)).or_insert(0u64) += 1;
    })?;
    Ok(hist)
}

pub fn rank_gen_poly(g: &Multigraph) -> Result<BivariatePolynomial> {
    rank_gen_poly_capped(g, DEFAULT_ENUMERATION_CAP)
}

/// `W_G(u,v) = sum_A u^r(A) v^c(A)` by enumeration of all subsets.
pub fn rank_gen_poly_capped(g: &Multigraph, cap: usize) -> Result<BivariatePolynomial> {
    let n = g.n_vertices();
    let mut w = BivariatePolynomial::zero();
    for ((size, k), count) in size_component_histogram(g, cap)? {
        let r = n - k;
        let c = size + k - n;
        w.add_term(r as u32, c as u32, BigInt::from(count));
    }
    Ok(w)
}

/// Memoized deletion–contraction engine.
///
/// One instance per task; results are identical to a fresh single-threaded
/// computation regardless of cache state.
pub struct TutteComputer {
    cache: LruCache<GraphKey, BivariatePolynomial>,
}

impl Default for TutteComputer {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_CACHE_CAPACITY)
    }
}

impl TutteComputer {
    pub fn with_capacity(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).unwrap();
        Self { cache: LruCache::new(cap) }
    }

    pub fn cached_minors(&self) -> usize {
        self.cache.len()
    }

    pub fn tutte(&mut self, g: &Multigraph) -> BivariatePolynomial {
        if g.n_edges() == 0 {
            return BivariatePolynomial::one();
        }
        let key = g.canonical_key();
        if let Some(p) = self.cache.get(&key) {
            return p.clone();
        }
        let (core, bridges, loops) = strip_bridges_and_loops(g);
        let core_poly = if core.n_edges() == 0 {
            BivariatePolynomial::one()
        } else {
            let deleted = core.delete(0).expect("edge 0 exists");
            let contracted = core.contract(0).expect("edge 0 exists");
            &self.tutte(&deleted) + &self.tutte(&contracted)
        };
        let factor = &BivariatePolynomial::x().pow(bridges) * &BivariatePolynomial::y().pow(loops);
        let result = &core_poly * &factor;
        self.cache.put(key, result.clone());
        result
    }
}

/// Removes loops and contracts bridges, returning the remaining graph and
/// the number of bridges and loops removed.
fn strip_bridges_and_loops(g: &Multigraph) -> (Multigraph, u32, u32) {
    let loops: Vec<usize> = (0..g.n_edges()).filter(|&e| g.is_loop(e)).collect();
    let mut core = g.clone();
    for &e in loops.iter().rev() {
        core = core.delete(e).expect("loop index valid");
    }
    let mut bridges = core.bridges();
    bridges.sort_unstable_by(|a, b| b.cmp(a));
    for &e in &bridges {
        core = core.contract(e).expect("bridge index valid");
    }
    (core, bridges.len() as u32, loops.len() as u32)
}

/// Tutte polynomial by deletion–contraction with a fresh memo.
pub fn tutte_poly(g: &Multigraph) -> BivariatePolynomial {
    TutteComputer::default().tutte(g)
}

/// `sum_A (x-1)^(r(E)-r(A)) (y-1)^c(A)`, obtained from the rank-generating
/// function. For connected graphs `r(E) = |V| - 1`.
pub fn tutte_from_rank_gen(g: &Multigraph, cap: usize) -> Result<BivariatePolynomial> {
    let w = rank_gen_poly_capped(g, cap)?;
    let full_rank = (g.n_vertices() - g.components_of_mask(g.full_mask())) as u32;
    let x_minus_1 = &BivariatePolynomial::x() - &BivariatePolynomial::one();
    let y_minus_1 = &BivariatePolynomial::y() - &BivariatePolynomial::one();
    let mut t = BivariatePolynomial::zero();
    for (r, c, coeff) in w.terms() {
        let term = &x_minus_1.pow(full_rank - r) * &y_minus_1.pow(c);
        t = &t + &term.scale(coeff);
    }
    Ok(t)
}

pub fn multivariate_tutte(g: &Multigraph, q: &Rational, weights: &[Rational]) -> Result<Rational> {
    multivariate_tutte_capped(g, q, weights, DEFAULT_ENUMERATION_CAP)
}

/// `sum_A q^k(A) prod_{e in A} v_e`.
pub fn multivariate_tutte_capped(
    g: &Multigraph,
    q: &Rational,
    weights: &[Rational],
    cap: usize,
) -> Result<Rational> {
    if weights.len() != g.n_edges() {
        return crate::error::usage(format!(
            "{} edge weights supplied for {} edges",
            weights.len(),
            g.n_edges()
        ));
    }
    let q_pows: Vec<Rational> = (0..=g.n_vertices())
        .map(|k| num_traits::pow(q.clone(), k))
        .collect();
    let mut total = Rational::zero();
    for_each_subset(g, cap, |mask, k| {
        let mut term = q_pows[k].clone();
        let mut m = mask;
        while m != 0 {
            let e = m.trailing_zeros() as usize;
            m &= m - 1;
            term *= &weights[e];
        }
        total += term;
    })?;
    Ok(total)
}

/// Chromatic polynomial in the first variable:
/// `chi_G(q) = (-1)^(|V|-k(G)) q^k(G) T_G(1-q, 0)`.
pub fn chromatic_poly(g: &Multigraph) -> BivariatePolynomial {
    chromatic_from_tutte(g, &tutte_poly(g))
}

pub fn chromatic_from_tutte(g: &Multigraph, t: &BivariatePolynomial) -> BivariatePolynomial {
    let k = g.n_components();
    let one_minus_q = &BivariatePolynomial::one() - &BivariatePolynomial::x();
    let at = t.compose(&one_minus_q, &BivariatePolynomial::zero());
    let sign = if (g.n_vertices() - k) % 2 == 0 { 1 } else { -1 };
    &at * &BivariatePolynomial::monomial(BigInt::from(sign), k as u32, 0)
}

pub fn flow_poly(g: &Multigraph) -> Result<BivariatePolynomial> {
    flow_poly_capped(g, DEFAULT_ENUMERATION_CAP)
}

/// Flow polynomial in the first variable: `C_G(q) = (-1)^|E| W_G(-1, -q)`.
///
/// Equals 1 for an edgeless graph.
pub fn flow_poly_capped(g: &Multigraph, cap: usize) -> Result<BivariatePolynomial> {
    let w = rank_gen_poly_capped(g, cap)?;
    let minus_one = BivariatePolynomial::constant(BigInt::from(-1));
    let minus_q = -&BivariatePolynomial::x();
    let c = w.compose(&minus_one, &minus_q);
    Ok(if g.n_edges() % 2 == 0 { c } else { -&c })
}

/// Flow polynomial from the Tutte polynomial:
/// `C_G(q) = (-1)^(|E|-|V|+k(G)) T_G(0, 1-q)`.
pub fn flow_from_tutte(g: &Multigraph, t: &BivariatePolynomial) -> BivariatePolynomial {
    let k = g.n_components();
    let one_minus_q = &BivariatePolynomial::one() - &BivariatePolynomial::x();
    let c = t.compose(&BivariatePolynomial::zero(), &one_minus_q);
    if (g.n_edges() + k - g.n_vertices()) % 2 == 0 {
        c
    } else {
        -&c
    }
}

pub fn eval_poly(p: &BivariatePolynomial, x: &Rational, y: &Rational) -> Rational {
    p.eval(x, y)
}

/// Proper colourings by direct enumeration of all `q^|V|` assignments.
pub fn count_proper_colourings(g: &Multigraph, q: usize) -> u64 {
    let n = g.n_vertices();
    if q == 0 {
        return u64::from(n == 0);
    }
    let mut colours = vec![0usize; n];
    let mut count = 0;
    loop {
        if g.edges().iter().all(|&(u, v)| colours[u] != colours[v]) {
            count += 1;
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            colours[i] += 1;
            if colours[i] < q {
                break;
            }
            colours[i] = 0;
            i += 1;
        }
    }
}

/// Spanning trees by enumerating subsets of size `|V|-1`.
pub fn count_spanning_trees(g: &Multigraph) -> Result<u64> {
    let n = g.n_vertices();
    let mut count = 0;
    for_each_subset(g, DEFAULT_ENUMERATION_CAP, |mask, k| {
        if k == 1 && mask.count_ones() as usize + 1 == n {
            count += 1;
        }
    })?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn poly(terms: &[(u32, u32, i64)]) -> BivariatePolynomial {
        let mut p = BivariatePolynomial::zero();
        for &(i, j, c) in terms {
            p.add_term(i, j, BigInt::from(c));
        }
        p
    }

    #[test]
    fn rank_generating_small_cases() {
        assert_eq!(rank_gen_poly(&Multigraph::empty(4)).unwrap(), BivariatePolynomial::one());
        assert_eq!(rank_gen_poly(&Multigraph::path(2)).unwrap(), poly(&[(0, 0, 1), (1, 0, 1)]));
        assert_eq!(
            rank_gen_poly(&Multigraph::triangle()).unwrap(),
            poly(&[(0, 0, 1), (1, 0, 3), (2, 0, 3), (2, 1, 1)])
        );
    }

    #[test]
    fn rank_generating_cap() {
        let g = Multigraph::complete(5);
        match rank_gen_poly_capped(&g, 8) {
            Err(crate::Error::Cap { cap, .. }) => assert!(cap.contains('8')),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn tutte_base_cases() {
        assert_eq!(tutte_poly(&Multigraph::path(2)), BivariatePolynomial::x());
        assert_eq!(tutte_poly(&Multigraph::cycle(1)), BivariatePolynomial::y());
        assert_eq!(tutte_poly(&Multigraph::triangle()), poly(&[(2, 0, 1), (1, 0, 1), (0, 1, 1)]));
    }

    #[test]
    fn tutte_of_k4() {
        // Standard: x^3 + 3x^2 + 2x + 4xy + 2y + 3y^2 + y^3
        let expected = poly(&[(3, 0, 1), (2, 0, 3), (1, 0, 2), (1, 1, 4), (0, 1, 2), (0, 2, 3), (0, 3, 1)]);
        assert_eq!(tutte_poly(&Multigraph::complete(4)), expected);
    }

    #[test]
    fn tutte_matches_rank_generating_route() {
        for g in crate::graph::GraphFamily::connected_multigraphs(4, 5).generate() {
            assert_eq!(tutte_poly(&g), tutte_from_rank_gen(&g, 24).unwrap(), "graph {g:?}");
        }
    }

    #[test]
    fn tutte_at_one_one_counts_spanning_trees() {
        for g in crate::graph::GraphFamily::simple_graphs(5, 7).connected().generate() {
            let t = tutte_poly(&g).eval(&int(1), &int(1));
            assert_eq!(t, int(count_spanning_trees(&g).unwrap() as i64));
        }
    }

    #[test]
    fn multivariate_examples() {
        let e = Multigraph::path(2);
        assert_eq!(multivariate_tutte(&e, &int(2), &[int(1)]).unwrap(), int(6));
        let t = Multigraph::triangle();
        let zeros = vec![int(0); 3];
        assert_eq!(multivariate_tutte(&t, &rat(3, 2), &zeros).unwrap(), rat(27, 8));
        assert_eq!(multivariate_tutte(&t, &int(1), &[int(1), int(1), int(1)]).unwrap(), int(8));
        assert!(multivariate_tutte(&t, &int(1), &[int(1)]).is_err());
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_poly(&Multigraph::triangle()).eval_univariate(&int(3)), int(6));
        assert_eq!(chromatic_poly(&Multigraph::path(2)).eval_univariate(&int(2)), int(2));
        let looped = Multigraph::new(2, vec![(0, 1), (1, 1)]).unwrap();
        assert!(chromatic_poly(&looped).is_zero());
    }

    #[test]
    fn chromatic_matches_colouring_enumeration() {
        for g in crate::graph::GraphFamily::simple_graphs(6, 7).generate() {
            let chi = chromatic_poly(&g);
            for q in 1..=5 {
                assert_eq!(
                    chi.eval_univariate(&int(q as i64)),
                    int(count_proper_colourings(&g, q) as i64),
                    "graph {g:?} q={q}"
                );
            }
        }
    }

    #[test]
    fn flow_examples() {
        assert_eq!(flow_poly(&Multigraph::empty(3)).unwrap(), BivariatePolynomial::one());
        assert_eq!(flow_poly(&Multigraph::triangle()).unwrap().eval_univariate(&int(3)), int(2));
        assert!(flow_poly(&Multigraph::path(2)).unwrap().is_zero());
    }

    #[test]
    fn flow_routes_agree() {
        for g in crate::graph::GraphFamily::connected_multigraphs(3, 5).generate() {
            let via_w = flow_poly(&g).unwrap();
            let via_t = flow_from_tutte(&g, &tutte_poly(&g));
            assert_eq!(via_w, via_t, "graph {g:?}");
        }
    }

    #[test]
    fn eval_examples() {
        let w = rank_gen_poly(&Multigraph::triangle()).unwrap();
        assert_eq!(eval_poly(&w, &int(1), &int(1)), int(8));
        let t = tutte_poly(&Multigraph::triangle());
        assert_eq!(eval_poly(&t, &int(1), &int(1)), int(3));
    }

    #[test]
    fn memo_is_transparent() {
        let mut warm = TutteComputer::with_capacity(4);
        let g = Multigraph::complete(5);
        let first = warm.tutte(&g);
        let second = warm.tutte(&g);
        assert_eq!(first, second);
        assert_eq!(first, tutte_poly(&g));
        assert!(warm.cached_minors() <= 4);
    }

    mod props {
        use super::*;
        use crate::graph::strategies::multigraph;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn tutte_equals_subset_route(g in multigraph(5, 10)) {
                prop_assert_eq!(tutte_poly(&g), tutte_from_rank_gen(&g, DEFAULT_ENUMERATION_CAP).unwrap());
            }

            #[test]
            fn tutte_one_one_counts_trees(g in multigraph(6, 9)) {
                prop_assume!(g.is_connected());
                // spanning trees as acyclic subsets of size |V|-1
                let n = g.n_vertices();
                let mut trees = 0u64;
                for mask in 0u64..1 << g.n_edges() {
                    let a = crate::graph::EdgeSubset::from_mask(mask, g.n_edges());
                    if a.len() + 1 == n && g.component_count(&a).unwrap() == 1 {
                        trees += 1;
                    }
                }
                let t = tutte_poly(&g).eval(&int(1), &int(1));
                prop_assert_eq!(t, int(trees as i64));
            }

            #[test]
            fn chromatic_counts_colourings(g in multigraph(6, 8), q in 1usize..=4) {
                let chi = chromatic_poly(&g).eval_univariate(&int(q as i64));
                prop_assert_eq!(chi, int(count_proper_colourings(&g, q) as i64));
            }
        }
    }
}
