//! Weighted simple b-matching via reductions to perfect matching.

mod blossom;

use std::collections::BTreeMap;

pub use blossom::max_weight_matching;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Undirected multigraph with weighted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<S> {
    pub n: usize,
    pub edges: Vec<(usize, usize, S)>,
}

impl<S: Scalar> WeightedGraph<S> {
    pub fn new(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: S) -> usize {
        self.edges.push((u, v, w));
        self.edges.len() - 1
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v, _) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn weight_of(&self, edges: &[usize]) -> S {
        S::sum(edges.iter().map(|&e| self.edges[e].2.clone()))
    }
}

/// Maximum weight perfect matching, as edge indices. Parallel edges are
/// collapsed to the heaviest one.
pub fn max_weight_perfect_matching<S: Scalar>(g: &WeightedGraph<S>) -> Result<Vec<usize>> {
    let (edges, index) = collapse(g);
    let mate = max_weight_matching(g.n, &edges, true);
    if mate.iter().any(Option::is_none) {
        return Err(Error::NoPerfectMatching);
    }
    Ok(decode(&mate, &index))
}

/// Maximum weight matching (not necessarily perfect), as edge indices.
pub fn max_weight_plain_matching<S: Scalar>(g: &WeightedGraph<S>) -> Vec<usize> {
    let (edges, index) = collapse(g);
    let mate = max_weight_matching(g.n, &edges, false);
    decode(&mate, &index)
}

type PairIndex = BTreeMap<(usize, usize), usize>;

fn collapse<S: Scalar>(g: &WeightedGraph<S>) -> (Vec<(usize, usize, S)>, PairIndex) {
    let mut best: PairIndex = BTreeMap::new();
    for (k, (u, v, w)) in g.edges.iter().enumerate() {
        if u == v {
            continue;
        }
        let key = (*u.min(v), *u.max(v));
        match best.get(&key) {
            Some(&j) if g.edges[j].2 >= *w => {}
            _ => {
                best.insert(key, k);
            }
        }
    }
    let edges = best
        .iter()
        .map(|(&(u, v), &k)| (u, v, g.edges[k].2.clone()))
        .collect();
    (edges, best)
}

fn decode(mate: &[Option<usize>], index: &PairIndex) -> Vec<usize> {
    let mut out: Vec<usize> = mate
        .iter()
        .enumerate()
        .filter_map(|(u, m)| match m {
            Some(v) if u < *v => Some(index[&(u, *v)]),
            _ => None,
        })
        .collect();
    out.sort_unstable();
    out
}

/// Perfect-matching instance built from a b-matching instance.
///
/// `origin[k]` is the input edge represented by reduced edge `k`; exactly
/// those reduced edges count towards the b-matching. `offset` is the constant
/// a single copy of the gadget adds to the b-matching weight.
#[derive(Debug, Clone)]
pub struct Reduction<S> {
    pub graph: WeightedGraph<S>,
    pub origin: Vec<Option<usize>>,
    pub offset: S,
}

impl<S: Scalar> Reduction<S> {
    /// Multiplicity of each input edge in the decoded b-matching.
    pub fn decode(&self, perfect: &[usize], input_edges: usize) -> Vec<usize> {
        let mut mult = vec![0; input_edges];
        for &k in perfect {
            if let Some(e) = self.origin[k] {
                mult[e] += 1;
            }
        }
        mult
    }
}

fn vertex_copies(b: &[usize]) -> (Vec<usize>, usize) {
    let mut first = Vec::with_capacity(b.len());
    let mut total = 0;
    for &bv in b {
        first.push(total);
        total += bv;
    }
    (first, total)
}

/// Vertex `v` becomes `b(v)` copies and edge `{u, v}` becomes the complete
/// bipartite graph between the copies. The gadget is duplicated and twin
/// copies are joined by zero-weight edges. A perfect matching then selects
/// every input edge with a multiplicity of at most `min(b(u), b(v))`.
pub fn tutte_reduce<S: Scalar>(g: &WeightedGraph<S>, b: &[usize]) -> Reduction<S> {
    let (first, total) = vertex_copies(b);
    let mut graph = WeightedGraph::new(2 * total);
    let mut origin = Vec::new();
    for half in 0..2 {
        let shift = half * total;
        for (e, (u, v, w)) in g.edges.iter().enumerate() {
            for i in 0..b[*u] {
                for j in 0..b[*v] {
                    graph.add_edge(shift + first[*u] + i, shift + first[*v] + j, w.clone());
                    origin.push((half == 0).then_some(e));
                }
            }
        }
    }
    for x in 0..total {
        graph.add_edge(x, total + x, S::zero());
        origin.push(None);
    }
    Reduction {
        graph,
        origin,
        offset: S::zero(),
    }
}

/// Each edge `{u, v}` gets two inner vertices `e_u`, `e_v`, joined to each
/// other and to every copy of its own endpoint, all with weight `w(e)`. The
/// gadget is duplicated with zero-weight twins between the outer copies. A
/// perfect matching of one copy weighs `sum(w) + w(M)` for the simple
/// b-matching `M` it encodes. `b` is clamped to the vertex degree first.
pub fn schrijver_reduce<S: Scalar>(g: &WeightedGraph<S>, b: &[usize]) -> Reduction<S> {
    let deg = g.degrees();
    let b: Vec<usize> = b.iter().zip(&deg).map(|(&x, &d)| x.min(d)).collect();
    let (first, outer) = vertex_copies(&b);
    let per_copy = outer + 2 * g.edges.len();
    let mut graph = WeightedGraph::new(2 * per_copy);
    let mut origin = Vec::new();
    for half in 0..2 {
        let shift = half * per_copy;
        for (e, (u, v, w)) in g.edges.iter().enumerate() {
            let eu = shift + outer + 2 * e;
            let ev = eu + 1;
            for i in 0..b[*u] {
                graph.add_edge(shift + first[*u] + i, eu, w.clone());
                origin.push((half == 0).then_some(e));
            }
            graph.add_edge(eu, ev, w.clone());
            origin.push(None);
            for j in 0..b[*v] {
                graph.add_edge(ev, shift + first[*v] + j, w.clone());
                origin.push(None);
            }
        }
    }
    for x in 0..outer {
        graph.add_edge(x, per_copy + x, S::zero());
        origin.push(None);
    }
    let offset = S::sum(g.edges.iter().map(|e| e.2.clone()));
    Reduction {
        graph,
        origin,
        offset,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BMatching<S> {
    /// Selected input edges, ascending.
    pub edges: Vec<usize>,
    pub weight: S,
}

/// Maximum weight simple b-matching of a multigraph: every edge is used at
/// most once and vertex `v` is covered at most `b[v]` times.
///
/// Non-positive edges never help and are dropped first. When every parallel
/// group `{u, v}` consists of exactly `min(b(u), b(v))` equal-weight edges the
/// Tutte gadget on the collapsed simple graph is used; otherwise the
/// Schrijver gadget on the multigraph. Unit `b` runs a plain matching.
pub fn max_weight_simple_b_matching<S: Scalar>(
    g: &WeightedGraph<S>,
    b: &[usize],
) -> Result<BMatching<S>> {
    let keep: Vec<usize> = (0..g.edges.len())
        .filter(|&k| {
            let (u, v, ref w) = g.edges[k];
            u != v && b[u] > 0 && b[v] > 0 && w.is_pos()
        })
        .collect();
    let mut sub = WeightedGraph::new(g.n);
    for &k in &keep {
        let (u, v, ref w) = g.edges[k];
        sub.add_edge(u, v, w.clone());
    }
    let chosen = if b.iter().all(|&x| x <= 1) {
        max_weight_plain_matching(&sub)
    } else if let Some(groups) = uniform_groups(&sub, b) {
        let mut simple = WeightedGraph::new(g.n);
        for grp in &groups {
            let (u, v, ref w) = sub.edges[grp[0]];
            simple.add_edge(u, v, w.clone());
        }
        let red = tutte_reduce(&simple, b);
        let pm = max_weight_perfect_matching(&red.graph)?;
        let mult = red.decode(&pm, simple.edges.len());
        let mut out = Vec::new();
        for (grp, m) in groups.iter().zip(mult) {
            out.extend_from_slice(&grp[..m]);
        }
        out
    } else {
        let red = schrijver_reduce(&sub, b);
        let pm = max_weight_perfect_matching(&red.graph)?;
        red.decode(&pm, sub.edges.len())
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(e, _)| e)
            .collect()
    };
    let mut edges: Vec<usize> = chosen.into_iter().map(|k| keep[k]).collect();
    edges.sort_unstable();
    let weight = g.weight_of(&edges);
    Ok(BMatching { edges, weight })
}

/// Parallel groups in first-appearance order when every group has exactly
/// `min(b(u), b(v))` edges of equal weight.
fn uniform_groups<S: Scalar>(g: &WeightedGraph<S>, b: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, &(u, v, _)) in g.edges.iter().enumerate() {
        let key = (u.min(v), u.max(v));
        let grp = groups.entry(key).or_default();
        if grp.is_empty() {
            order.push(key);
        }
        grp.push(k);
    }
    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let grp = groups.remove(&key).unwrap();
        let w0 = &g.edges[grp[0]].2;
        if grp.len() != b[key.0].min(b[key.1]) || grp.iter().any(|&k| g.edges[k].2 != *w0) {
            return None;
        }
        out.push(grp);
    }
    Some(out)
}

/// All simple b-matchings (including the empty one), each as ascending edge
/// indices.
pub fn enumerate_simple_b_matchings<S: Scalar>(
    g: &WeightedGraph<S>,
    b: &[usize],
    limit: usize,
) -> Result<Vec<Vec<usize>>> {
    if g.edges.len() > limit {
        return Err(Error::TooLarge {
            size: g.edges.len(),
            limit,
        });
    }
    let mut out = Vec::new();
    let mut used = vec![0usize; g.n];
    let mut current = Vec::new();
    enumerate_rec(g, b, 0, &mut used, &mut current, &mut out);
    Ok(out)
}

fn enumerate_rec<S: Scalar>(
    g: &WeightedGraph<S>,
    b: &[usize],
    k: usize,
    used: &mut [usize],
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if k == g.edges.len() {
        out.push(current.clone());
        return;
    }
    enumerate_rec(g, b, k + 1, used, current, out);
    let (u, v, _) = g.edges[k];
    if u != v && used[u] < b[u] && used[v] < b[v] {
        used[u] += 1;
        used[v] += 1;
        current.push(k);
        enumerate_rec(g, b, k + 1, used, current, out);
        current.pop();
        used[u] -= 1;
        used[v] -= 1;
    }
}
