//! First-fit fractional weighted coloring (F3WC) approximations for the
//! NP-hard cases: half duplex and/or pairwise interference.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_explicit_lp, LpProblem, Sense};
use crate::netmodel::{
    evaluate_schedule, expand, DirectedNetwork, ExpandedArc, ExpandedNetwork, ModelFlags,
    Schedule, Slot, StreamRef,
};
use crate::num::Scalar;

/// Vertex ordering, which also fixes the polytope used for stream times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    /// Fixed creation order of the conflict graph with polytope Q.
    Fao,
    /// Largest surplus last ordering with polytope Q'.
    Lslo,
}

/// One vertex per expanded arc; edges join arcs that cannot be active together.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub expansion: ExpandedNetwork,
    pub adjacency: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn arcs(&self) -> &[ExpandedArc] {
        &self.expansion.arcs
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    fn vertex(&self, split: usize) -> usize {
        self.expansion.vertex_of(split)
    }
}

fn clique(edges: &mut BTreeSet<(usize, usize)>, members: &[usize]) {
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            edges.insert((a.min(b), a.max(b)));
        }
    }
}

fn biclique(edges: &mut BTreeSet<(usize, usize)>, xs: &[usize], ys: &[usize]) {
    for &a in xs {
        for &b in ys {
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
}

pub fn build_conflict_graph(net: &DirectedNetwork, flags: &ModelFlags) -> ConflictGraph {
    let expansion = expand(net, flags);
    let arcs = &expansion.arcs;
    let mut edges = BTreeSet::new();

    let mut at_split = vec![Vec::new(); expansion.splits.len()];
    let mut of_stream: BTreeMap<(usize, Option<usize>), Vec<usize>> = BTreeMap::new();
    let mut of_link = vec![Vec::new(); net.links.len()];
    let mut into = vec![Vec::new(); net.vertices.len()];
    let mut out_of = vec![Vec::new(); net.vertices.len()];
    for (k, a) in arcs.iter().enumerate() {
        at_split[a.tail].push(k);
        at_split[a.head].push(k);
        of_stream.entry((a.link, a.stream)).or_default().push(k);
        of_link[a.link].push(k);
        out_of[expansion.vertex_of(a.tail)].push(k);
        into[expansion.vertex_of(a.head)].push(k);
    }
    for members in &at_split {
        clique(&mut edges, members);
    }
    if !flags.is_max() {
        for members in of_stream.values() {
            clique(&mut edges, members);
        }
    }
    if flags.is_hd() {
        for v in 0..net.vertices.len() {
            biclique(&mut edges, &into[v], &out_of[v]);
        }
    }
    if flags.is_pi() {
        for &(a, b) in &net.interference_pairs {
            biclique(&mut edges, &of_link[a], &of_link[b]);
        }
    }

    let mut adjacency = vec![Vec::new(); arcs.len()];
    for (a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    ConflictGraph {
        expansion,
        adjacency,
    }
}

/// Directed conflict graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    pub out: Vec<Vec<usize>>,
    pub inn: Vec<Vec<usize>>,
}

impl OrientedGraph {
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Self {
        let mut g = OrientedGraph {
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
        };
        for &(a, b) in arcs {
            g.out[a].push(b);
            g.inn[b].push(a);
        }
        g
    }

    pub fn points_to(&self, a: usize, b: usize) -> bool {
        self.out[a].contains(&b)
    }
}

/// Whether the conflict edge `{a, b}` is oriented from `a` to `b`. Arcs
/// chaining through a vertex point forward; other pairs point from the
/// smaller to the larger arc in lexicographic (tail, head, stream) order.
fn oriented_forward(cg: &ConflictGraph, a: usize, b: usize) -> bool {
    let (x, y) = (&cg.arcs()[a], &cg.arcs()[b]);
    let chain = |p: &ExpandedArc, q: &ExpandedArc| {
        cg.vertex(p.head) == cg.vertex(q.tail) && cg.vertex(p.tail) != cg.vertex(q.head)
    };
    if chain(x, y) {
        return true;
    }
    if chain(y, x) {
        return false;
    }
    (x.tail, x.head, x.stream, a) < (y.tail, y.head, y.stream, b)
}

pub fn orient_conflict_graph(cg: &ConflictGraph) -> OrientedGraph {
    let mut arcs = Vec::with_capacity(cg.edge_count());
    for (a, list) in cg.adjacency.iter().enumerate() {
        for &b in list.iter().filter(|&&b| b > a) {
            if oriented_forward(cg, a, b) {
                arcs.push((a, b));
            } else {
                arcs.push((b, a));
            }
        }
    }
    OrientedGraph::from_arcs(cg.len(), &arcs)
}

/// Largest surplus last ordering. Among tied vertices the lowest id comes first.
pub fn lslo_ordering<S: Scalar>(g: &OrientedGraph, t: &[S]) -> Vec<usize> {
    let n = t.len();
    let mut surplus: Vec<S> = (0..n)
        .map(|u| {
            S::sum(g.inn[u].iter().map(|&w| t[w].clone()))
                - S::sum(g.out[u].iter().map(|&w| t[w].clone()))
        })
        .collect();
    let mut alive = vec![true; n];
    let mut order = vec![0; n];
    for slot in (0..n).rev() {
        let mut best: Option<usize> = None;
        for u in (0..n).filter(|&u| alive[u]) {
            if best.is_none_or(|b| surplus[u] >= surplus[b]) {
                best = Some(u);
            }
        }
        let v = best.unwrap();
        alive[v] = false;
        order[slot] = v;
        for &w in &g.inn[v] {
            surplus[w] = surplus[w].clone() + t[v].clone();
        }
        for &w in &g.out[v] {
            surplus[w] = surplus[w].clone() - t[v].clone();
        }
    }
    order
}

fn dust<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_f64(1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalColoring<S> {
    pub classes: Vec<(Vec<usize>, S)>,
}

impl<S: Scalar> FractionalColoring<S> {
    pub fn weight(&self) -> S {
        S::sum(self.classes.iter().map(|(_, w)| w.clone()))
    }
}

/// First-fit fractional weighted coloring of `(adjacency, t)`.
pub fn f3wc_color<S: Scalar>(
    adjacency: &[Vec<usize>],
    t: &[S],
    ordering: &[usize],
) -> FractionalColoring<S> {
    let eps = dust::<S>();
    let mut left: Vec<S> = t
        .iter()
        .map(|x| if *x > eps { x.clone() } else { S::zero() })
        .collect();
    let mut blocked = vec![usize::MAX; t.len()];
    let mut classes = Vec::new();
    loop {
        let round = classes.len();
        let mut set = Vec::new();
        for &v in ordering {
            if left[v].is_pos() && blocked[v] != round {
                set.push(v);
                for &w in &adjacency[v] {
                    blocked[w] = round;
                }
            }
        }
        if set.is_empty() {
            break;
        }
        let lambda = set
            .iter()
            .map(|&v| left[v].clone())
            .reduce(S::min_of)
            .unwrap();
        for &v in &set {
            let rest = left[v].clone() - lambda.clone();
            left[v] = if rest > eps { rest } else { S::zero() };
        }
        set.sort_unstable();
        classes.push((set, lambda));
    }
    FractionalColoring { classes }
}

/// Stream-time LPs: max θ over the chosen polytope, then the largest
/// throughput leaving the macros with every relay kept at θ.
pub fn solve_stream_times<S: Scalar>(
    net: &DirectedNetwork,
    cg: &ConflictGraph,
    ordering: Ordering,
    oriented: Option<&OrientedGraph>,
) -> Result<(S, Vec<S>)> {
    let n = cg.len();
    let caps: Vec<S> = cg.arcs().iter().map(|a| S::from_f64(a.capacity)).collect();
    let mut balance: Vec<Vec<(usize, S)>> = vec![Vec::new(); net.vertices.len()];
    for (k, a) in cg.arcs().iter().enumerate() {
        balance[cg.vertex(a.head)].push((k, caps[k].clone()));
        balance[cg.vertex(a.tail)].push((k, -caps[k].clone()));
    }
    let polytope: Vec<(Vec<(usize, S)>, S)> = match ordering {
        Ordering::Fao => (0..n)
            .map(|i| {
                let mut row = vec![(i, S::one())];
                row.extend(cg.adjacency[i].iter().filter(|&&j| j < i).map(|&j| (j, S::one())));
                (row, S::one())
            })
            .collect(),
        Ordering::Lslo => {
            let owned;
            let g = match oriented {
                Some(g) => g,
                None => {
                    owned = orient_conflict_graph(cg);
                    &owned
                }
            };
            (0..n)
                .map(|u| {
                    let mut row = vec![(u, S::one())];
                    row.extend(g.inn[u].iter().map(|&j| (j, S::one())));
                    (row, S::ratio(1, 2))
                })
                .collect()
        }
    };
    let relays = net.relays();

    let mut first = LpProblem::<S>::new(n + 1, true);
    first.objective[n] = S::one();
    for &v in &relays {
        let mut row = balance[v].clone();
        row.push((n, -S::one()));
        first.add_row(row, Sense::Ge, S::zero());
    }
    for (row, rhs) in &polytope {
        first.add_row(row.clone(), Sense::Le, rhs.clone());
    }
    let theta = solve_explicit_lp(&first)?.objective;

    let floor = if S::EXACT {
        theta.clone()
    } else {
        let slack = S::from_f64(1e-9) * S::max_of(S::one(), theta.clone());
        S::max_of(S::zero(), theta.clone() - slack)
    };
    let mut second = LpProblem::<S>::new(n, true);
    for (k, a) in cg.arcs().iter().enumerate() {
        if net.is_macro(cg.vertex(a.tail)) {
            second.objective[k] = caps[k].clone();
        }
    }
    for &v in &relays {
        second.add_row(balance[v].clone(), Sense::Ge, floor.clone());
    }
    for (row, rhs) in polytope {
        second.add_row(row, Sense::Le, rhs);
    }
    let t = solve_explicit_lp(&second)?.x;
    Ok((theta, t))
}

/// Maps color classes to slots scaled to unit total time. Under MAX the
/// `k` arcs of a link in a class use its streams `0..k`.
pub fn coloring_to_schedule<S: Scalar>(
    cg: &ConflictGraph,
    coloring: &FractionalColoring<S>,
) -> Result<Schedule<S>> {
    let weight = coloring.weight();
    if !weight.is_pos() {
        return Err(Error::EmptyColoring);
    }
    let slots = coloring
        .classes
        .iter()
        .map(|(set, lambda)| {
            let mut per_link: BTreeMap<usize, usize> = BTreeMap::new();
            let mut arcs = Vec::new();
            for &k in set {
                let a = &cg.arcs()[k];
                match a.stream {
                    Some(s) => arcs.push(StreamRef::new(a.link, s)),
                    None => {
                        let next = per_link.entry(a.link).or_insert(0);
                        arcs.push(StreamRef::new(a.link, *next));
                        *next += 1;
                    }
                }
            }
            arcs.sort_unstable();
            Slot {
                arcs,
                duration: lambda.clone() / weight.clone(),
            }
        })
        .collect();
    Ok(Schedule { slots })
}

#[derive(Debug, Clone, PartialEq)]
pub struct F3wcSolution<S> {
    pub theta: S,
    pub network_throughput: S,
    pub schedule: Schedule<S>,
    /// θ of the stream-time LP, before coloring and scaling.
    pub lp_theta: S,
    pub coloring_weight: S,
    pub ordering: Vec<usize>,
    pub conflict_vertices: usize,
    pub conflict_edges: usize,
}

pub fn f3wc<S: Scalar>(
    net: &DirectedNetwork,
    flags: &ModelFlags,
    ordering: Ordering,
) -> Result<F3wcSolution<S>> {
    if flags.is_max() {
        net.require_max_shaped()?;
    }
    let cg = build_conflict_graph(net, flags);
    let oriented = (ordering == Ordering::Lslo).then(|| orient_conflict_graph(&cg));
    let (lp_theta, t) = solve_stream_times::<S>(net, &cg, ordering, oriented.as_ref())?;
    let order = match &oriented {
        Some(g) => lslo_ordering(g, &t),
        None => (0..cg.len()).collect(),
    };
    let coloring = f3wc_color(&cg.adjacency, &t, &order);
    let schedule = coloring_to_schedule(&cg, &coloring)?;
    let report = evaluate_schedule(net, &schedule)?;
    Ok(F3wcSolution {
        theta: report.maxmin,
        network_throughput: report.network,
        schedule,
        lp_theta,
        coloring_weight: coloring.weight(),
        ordering: order,
        conflict_vertices: cg.len(),
        conflict_edges: cg.edge_count(),
    })
}

/// Closed-form upper bounds on α* and β*. `None` where the guarantee does
/// not apply (full duplex without interference, which is solved exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct F3wcBounds {
    pub alpha: Option<u64>,
    pub beta: Option<u64>,
}

pub fn f3wc_bounds(net: &DirectedNetwork, flags: &ModelFlags) -> F3wcBounds {
    if !flags.is_hd() && !flags.is_pi() {
        return F3wcBounds {
            alpha: None,
            beta: None,
        };
    }
    let partners = net.interference_partners();
    let d = |l: usize| net.links[l].streams() as u64;
    let all = |l: usize| partners[l].iter().map(|&x| d(x)).sum::<u64>();
    let before = |l: usize| partners[l].iter().filter(|&&x| x < l).map(|&x| d(x)).sum::<u64>();
    let links = 0..net.links.len();
    let max = |f: &dyn Fn(usize) -> u64| links.clone().map(f).max().unwrap_or(0);
    let (alpha, beta) = if flags.is_hd() {
        let r = |v: usize| net.rf(v) as u64;
        (
            max(&|l| r(net.links[l].tail) + r(net.links[l].head) + all(l)),
            max(&|l| r(net.links[l].tail) + before(l)) + 1,
        )
    } else if flags.is_max() {
        (max(&all) + 2, max(&before) + 2)
    } else {
        (max(&all).max(1) + 2, max(&before).max(1) + 2)
    };
    F3wcBounds {
        alpha: Some(alpha),
        beta: Some(beta),
    }
}

const MIS_LIMIT: usize = 64;

/// Size of a maximum independent set of the subgraph induced by `subset`.
pub fn max_independent_set(adjacency: &[Vec<usize>], subset: &[usize]) -> Result<usize> {
    if subset.len() > MIS_LIMIT {
        return Err(Error::TooLarge {
            size: subset.len(),
            limit: MIS_LIMIT,
        });
    }
    let pos: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<u64> = subset
        .iter()
        .map(|&v| {
            adjacency[v]
                .iter()
                .filter_map(|w| pos.get(w))
                .fold(0u64, |m, &i| m | 1 << i)
        })
        .collect();
    fn grow(masks: &[u64], cand: u64, size: usize, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let i = cand.trailing_zeros() as usize;
        let rest = cand & !(1 << i);
        grow(masks, rest & !masks[i], size + 1, best);
        grow(masks, rest, size, best);
    }
    let full = if subset.len() == 64 {
        u64::MAX
    } else {
        (1u64 << subset.len()) - 1
    };
    let mut best = 0;
    grow(&masks, full, 0, &mut best);
    Ok(best)
}

/// Inductive independence number for the given vertex ordering.
pub fn inductive_independence_number(adjacency: &[Vec<usize>], ordering: &[usize]) -> Result<usize> {
    let mut rank = vec![0; ordering.len()];
    for (i, &v) in ordering.iter().enumerate() {
        rank[v] = i;
    }
    let mut best = 0;
    for &v in ordering {
        let mut set = vec![v];
        set.extend(adjacency[v].iter().filter(|&&w| rank[w] < rank[v]));
        best = best.max(max_independent_set(adjacency, &set)?);
    }
    Ok(best)
}

/// Local independence number of an oriented conflict graph.
pub fn local_independence_number(adjacency: &[Vec<usize>], g: &OrientedGraph) -> Result<usize> {
    let mut best = 0;
    for u in 0..adjacency.len() {
        let mut set = vec![u];
        set.extend(&g.inn[u]);
        best = best.max(max_independent_set(adjacency, &set)?);
    }
    Ok(best)
}

/// Realizes an activation set as a matching of the expansion: arc indices,
/// one per stream, with no split vertex used twice.
pub fn matching_in_expansion(exp: &ExpandedNetwork, activation: &[StreamRef]) -> Option<Vec<usize>> {
    let mut need: Vec<StreamRef> = activation.to_vec();
    need.sort_unstable();
    fn search(
        exp: &ExpandedNetwork,
        need: &[StreamRef],
        used: &mut [bool],
        taken: &mut Vec<usize>,
    ) -> bool {
        let Some((s, rest)) = need.split_first() else {
            return true;
        };
        for (k, a) in exp.arcs.iter().enumerate() {
            let fits = a.link == s.link && a.stream.is_none_or(|x| x == s.stream);
            if !fits || used[a.tail] || used[a.head] {
                continue;
            }
            used[a.tail] = true;
            used[a.head] = true;
            taken.push(k);
            if search(exp, rest, used, taken) {
                return true;
            }
            taken.pop();
            used[a.tail] = false;
            used[a.head] = false;
        }
        false
    }
    let mut used = vec![false; exp.splits.len()];
    let mut taken = Vec::new();
    search(exp, &need, &mut used, &mut taken).then_some(taken)
}
