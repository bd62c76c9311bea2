//! Finite multigraphs with loops and parallel edges.
//!
//! Edges are identified by their position in the edge list, so two parallel
//! edges are distinct members of an [`EdgeSubset`]. Deletion removes exactly
//! one position; contraction merges the endpoints into the smaller vertex
//! index and shifts the vertices above the removed index down by one.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Largest edge count an [`EdgeSubset`] bitmask can address.
pub const MAX_SUBSET_EDGES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Serialized form: `{"n": 3, "edges": [[0,1],[1,2],[2,0]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return usage(format!(
                    "edge {i} = ({u},{v}) has an endpoint outside 0..{n}"
                ));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self { n, edges }
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 1, "a cycle needs at least one vertex");
        let edges = match n {
            1 => vec![(0, 0)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        Self { n, edges }
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Self { n, edges }
    }

    pub fn triangle() -> Self {
        Self::cycle(3)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<(usize, usize)> {
        match self.edges.get(e) {
            Some(&uv) => Ok(uv),
            None => usage(format!("edge index {e} out of range 0..{}", self.edges.len())),
        }
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        u == v
    }

    pub fn full_subset(&self) -> EdgeSubset {
        EdgeSubset::full(self.edges.len())
    }

    pub fn empty_subset(&self) -> EdgeSubset {
        EdgeSubset::empty(self.edges.len())
    }

    /// Appends an edge, returning the enlarged graph.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push((u, v));
        Self::new(self.n, edges)
    }

    pub fn delete(&self, e: usize) -> Result<Self> {
        self.edge(e)?;
        let mut edges = self.edges.clone();
        edges.remove(e);
        Ok(Self { n: self.n, edges })
    }

    /// Contracts edge `e`. A loop is contracted by deleting it.
    pub fn contract(&self, e: usize) -> Result<Self> {
        let (a, b) = self.edge(e)?;
        if a == b {
            return self.delete(e);
        }
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let relabel = |w: usize| {
            if w == gone {
                keep
            } else if w > gone {
                w - 1
            } else {
                w
            }
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, &(u, v))| (relabel(u), relabel(v)))
            .collect();
        Ok(Self { n: self.n - 1, edges })
    }

    /// Key identifying the graph as a vertex count plus edge multiset.
    ///
    /// Edge order does not matter, vertex labels do.
    pub fn canonical_key(&self) -> GraphKey {
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = if u <= v { (u, v) } else { (v, u) };
                (a as u32, b as u32)
            })
            .collect();
        edges.sort_unstable();
        GraphKey { n: self.n as u32, edges }
    }

    /// Every vertex has even degree; a loop adds two.
    pub fn is_even(&self) -> bool {
        self.degrees().iter().all(|d| d % 2 == 0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn component_count(&self, a: &EdgeSubset) -> Result<usize> {
        self.check_subset(a)?;
        Ok(self.components_of_mask(a.mask()))
    }

    /// `(r(A), c(A))` with `r = |V| - k(A)` and `c = |A| - |V| + k(A)`.
    pub fn rank_corank(&self, a: &EdgeSubset) -> Result<(usize, usize)> {
        let k = self.component_count(a)?;
        let size = a.len();
        Ok((self.n - k, size + k - self.n))
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.n_components() == 1
    }

    /// `k(G)`; unlike the subset queries this has no edge-count limit.
    pub fn n_components(&self) -> usize {
        self.components_without(usize::MAX)
    }

    fn components_without(&self, skip: usize) -> usize {
        let mut dsu = Dsu::new(self.n);
        let mut k = self.n;
        for (f, &(u, v)) in self.edges.iter().enumerate() {
            if f != skip && dsu.union(u, v) {
                k -= 1;
            }
        }
        k
    }

    pub(crate) fn full_mask(&self) -> u64 {
        EdgeSubset::full(self.edges.len()).mask()
    }

    pub(crate) fn check_subset(&self, a: &EdgeSubset) -> Result<()> {
        if a.n_edges() != self.edges.len() {
            return usage(format!(
                "edge subset has length {} but the graph has {} edges",
                a.n_edges(),
                self.edges.len()
            ));
        }
        Ok(())
    }

    /// Number of components of `(V, A)` where `A` is given as a bitmask.
    pub(crate) fn components_of_mask(&self, mask: u64) -> usize {
        let mut dsu = Dsu::new(self.n);
        let mut k = self.n;
        let mut m = mask;
        while m != 0 {
            let e = m.trailing_zeros() as usize;
            m &= m - 1;
            let (u, v) = self.edges[e];
            if dsu.union(u, v) {
                k -= 1;
            }
        }
        k
    }

    /// Component count and a union-find structure for `(V, A)`.
    pub(crate) fn components(&self, mask: u64) -> (usize, Dsu) {
        let mut dsu = Dsu::new(self.n);
        let mut k = self.n;
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if mask >> e & 1 == 1 && dsu.union(u, v) {
                k -= 1;
            }
        }
        (k, dsu)
    }

    /// Non-loop edges whose removal increases the component count.
    pub fn bridges(&self) -> Vec<usize> {
        let k = self.n_components();
        (0..self.edges.len())
            .filter(|&e| !self.is_loop(e) && self.components_without(e) > k)
            .collect()
    }

    /// The graph with vertices permuted: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self { n: self.n, edges }
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_file(f: &GraphFile) -> Result<Self> {
        Self::new(f.n, f.edges.iter().map(|e| (e[0], e[1])).collect())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s)?;
        Self::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph serialization")
    }
}

impl Serialize for Multigraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multigraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = GraphFile::deserialize(d)?;
        Multigraph::from_file(&f).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphKey {
    n: u32,
    edges: Vec<(u32, u32)>,
}

/// A subset `A` of the edge positions, doubling as a bond configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    bits: u64,
    n_edges: usize,
}

impl EdgeSubset {
    pub fn from_mask(bits: u64, n_edges: usize) -> Self {
        assert!(n_edges <= MAX_SUBSET_EDGES, "edge subsets address at most 64 edges");
        let bits = if n_edges == 64 { bits } else { bits & ((1u64 << n_edges) - 1) };
        Self { bits, n_edges }
    }

    pub fn from_edges(edges: &[usize], n_edges: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &e in edges {
            if e >= n_edges {
                return usage(format!("edge index {e} out of range 0..{n_edges}"));
            }
            bits |= 1 << e;
        }
        Ok(Self::from_mask(bits, n_edges))
    }

    pub fn empty(n_edges: usize) -> Self {
        Self::from_mask(0, n_edges)
    }

    pub fn full(n_edges: usize) -> Self {
        Self::from_mask(u64::MAX, n_edges)
    }

    pub fn mask(&self) -> u64 {
        self.bits
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// `|A|`.
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.n_edges && self.bits >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) {
        assert!(e < self.n_edges);
        self.bits |= 1 << e;
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_edges).filter(move |&e| self.contains(e))
    }
}

/// Union-find with path halving.
#[derive(Clone, Debug)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when two distinct classes were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Dense cluster labels `0..k` in order of first appearance.
    pub fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut next = 0;
        for v in 0..n {
            let r = self.find(v);
            if map[r] == usize::MAX {
                map[r] = next;
                next += 1;
            }
            out[v] = map[r];
        }
        (out, next)
    }
}

/// Minimum over all vertex relabelings of the sorted edge list.
pub fn isomorphism_key(g: &Multigraph) -> GraphKey {
    let mut best: Option<GraphKey> = None;
    for perm in permutations(g.n_vertices()) {
        let key = g.relabel(&perm).canonical_key();
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_else(|| g.canonical_key())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Options for exhaustive graph generation.
#[derive(Clone, Copy, Debug)]
pub struct GraphFamily {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub min_vertices: usize,
    pub loops: bool,
    pub parallel: bool,
    pub connected_only: bool,
}

impl GraphFamily {
    /// Connected multigraphs (loops and parallel edges allowed).
    pub fn connected_multigraphs(max_vertices: usize, max_edges: usize) -> Self {
        Self {
            max_vertices,
            max_edges,
            min_vertices: 1,
            loops: true,
            parallel: true,
            connected_only: true,
        }
    }

    /// Simple graphs, connected or not.
    pub fn simple_graphs(max_vertices: usize, max_edges: usize) -> Self {
        Self {
            max_vertices,
            max_edges,
            min_vertices: 1,
            loops: false,
            parallel: false,
            connected_only: false,
        }
    }

    pub fn connected(mut self) -> Self {
        self.connected_only = true;
        self
    }

    /// One representative per isomorphism class, in a deterministic order.
    pub fn generate(&self) -> Vec<Multigraph> {
        let mut out = Vec::new();
        for n in self.min_vertices..=self.max_vertices {
            let mut types = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if i != j || self.loops {
                        types.push((i, j));
                    }
                }
            }
            let perms = permutations(n);
            let mut seen: HashSet<GraphKey> = HashSet::new();
            let mut chosen: Vec<usize> = Vec::new();
            self.extend(n, &types, &perms, 0, &mut chosen, &mut seen, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        n: usize,
        types: &[(usize, usize)],
        perms: &[Vec<usize>],
        start: usize,
        chosen: &mut Vec<usize>,
        seen: &mut HashSet<GraphKey>,
        out: &mut Vec<Multigraph>,
    ) {
        let g = Multigraph {
            n,
            edges: chosen.iter().map(|&t| types[t]).collect(),
        };
        if !self.connected_only || g.is_connected() {
            let mut best: Option<GraphKey> = None;
            for p in perms {
                let key = g.relabel(p).canonical_key();
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
            if seen.insert(best.expect("at least one permutation")) {
                out.push(g);
            }
        }
        if chosen.len() == self.max_edges {
            return;
        }
        for t in start..types.len() {
            if !self.parallel && chosen.last() == Some(&t) {
                continue;
            }
            chosen.push(t);
            let next = if self.parallel { t } else { t + 1 };
            self.extend(n, types, perms, next, chosen, seen, out);
            chosen.pop();
        }
    }
}


#[cfg(test)]
pub(crate) mod strategies {
    use super::Multigraph;
    use proptest::prelude::*;

    /// Multigraphs on `1..=max_vertices` vertices with at most `max_edges`
    /// edges, loops and parallel edges included.
    pub fn multigraph(max_vertices: usize, max_edges: usize) -> impl Strategy<Value = Multigraph> {
        (1..=max_vertices).prop_flat_map(move |n| {
            prop::collection::vec((0..n, 0..n), 0..=max_edges).prop_map(move |e| Multigraph::new(n, e).unwrap())
        })
    }
}
