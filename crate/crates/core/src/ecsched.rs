//! Edge-coloring (EC) scheduling for full-duplex networks without
//! interference: relaxed link-time LPs, quantization into a multigraph and
//! multigraph edge coloring.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_explicit_lp, LpProblem, Sense};
use crate::netmodel::{evaluate_schedule, DirectedNetwork, ModelFlags, Schedule, Slot, StreamRef};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcConfig {
    pub granularity: f64,
}

impl Default for EcConfig {
    fn default() -> Self {
        EcConfig { granularity: 0.1 }
    }
}

impl EcConfig {
    pub fn new(granularity: f64) -> Result<Self> {
        if !(granularity > 0.0 && granularity <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "granularity must lie in (0, 1], got {granularity}"
            )));
        }
        Ok(EcConfig { granularity })
    }
}

/// Link times of the relaxed LP (node constraints only) and its θ, which
/// bounds the optimum from above.
pub fn ec_link_times<S: Scalar>(net: &DirectedNetwork) -> Result<(S, Vec<S>)> {
    let m = net.links.len();
    let caps: Vec<S> = net
        .links
        .iter()
        .map(|l| S::from_f64(l.stream_capacities[0]))
        .collect();
    let mut balance: Vec<Vec<(usize, S)>> = vec![Vec::new(); net.vertices.len()];
    let mut incident: Vec<Vec<(usize, S)>> = vec![Vec::new(); net.vertices.len()];
    for (e, l) in net.links.iter().enumerate() {
        balance[l.head].push((e, caps[e].clone()));
        balance[l.tail].push((e, -caps[e].clone()));
        incident[l.head].push((e, S::one()));
        incident[l.tail].push((e, S::one()));
    }
    let relays = net.relays();
    let node_rows = |p: &mut LpProblem<S>| {
        for (v, row) in incident.iter().enumerate() {
            if !row.is_empty() {
                p.add_row(row.clone(), Sense::Le, S::from_int(net.rf(v) as i64));
            }
        }
    };

    let mut first = LpProblem::<S>::new(m + 1, true);
    first.objective[m] = S::one();
    for &v in &relays {
        let mut row = balance[v].clone();
        row.push((m, -S::one()));
        first.add_row(row, Sense::Ge, S::zero());
    }
    node_rows(&mut first);
    let theta = solve_explicit_lp(&first)?.objective;

    let floor = if S::EXACT {
        theta.clone()
    } else {
        let slack = S::from_f64(1e-9) * S::max_of(S::one(), theta.clone());
        S::max_of(S::zero(), theta.clone() - slack)
    };
    let mut second = LpProblem::<S>::new(m, true);
    for (e, l) in net.links.iter().enumerate() {
        if net.is_macro(l.tail) {
            second.objective[e] = caps[e].clone();
        }
    }
    for &v in &relays {
        second.add_row(balance[v].clone(), Sense::Ge, floor.clone());
    }
    node_rows(&mut second);
    Ok((theta, solve_explicit_lp(&second)?.x))
}

/// Undirected loopless multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    pub colors: Vec<usize>,
    pub count: usize,
}

impl EdgeColoring {
    pub fn is_proper(&self, g: &Multigraph) -> bool {
        let mut seen = vec![Vec::new(); g.n];
        for (&(u, v), &c) in g.edges.iter().zip(&self.colors) {
            if c >= self.count || seen[u].contains(&c) || seen[v].contains(&c) {
                return false;
            }
            seen[u].push(c);
            seen[v].push(c);
        }
        true
    }
}

/// Orients every edge so that in- and out-degree differ by at most one at
/// each vertex, following Euler circuits of the graph padded with a dummy
/// vertex joined to all odd-degree vertices.
fn euler_orientation(g: &Multigraph) -> Vec<(usize, usize)> {
    let dummy = g.n;
    let mut edges = g.edges.clone();
    let mut deg = vec![0usize; g.n + 1];
    for &(u, v) in &edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    for v in 0..g.n {
        if deg[v] % 2 == 1 {
            edges.push((v, dummy));
        }
    }
    let mut adj = vec![Vec::new(); g.n + 1];
    for (k, &(u, v)) in edges.iter().enumerate() {
        adj[u].push(k);
        adj[v].push(k);
    }
    let mut used = vec![false; edges.len()];
    let mut next = vec![0usize; g.n + 1];
    let mut oriented = vec![(0, 0); edges.len()];
    for start in 0..=g.n {
        let mut stack = vec![(start, usize::MAX)];
        while let Some(&(v, _)) = stack.last() {
            while next[v] < adj[v].len() && used[adj[v][next[v]]] {
                next[v] += 1;
            }
            if next[v] == adj[v].len() {
                stack.pop();
                continue;
            }
            let k = adj[v][next[v]];
            used[k] = true;
            let (a, b) = edges[k];
            let w = if a == v { b } else { a };
            oriented[k] = (v, w);
            stack.push((w, k));
        }
    }
    oriented.truncate(g.edges.len());
    oriented
}

/// Proper edge coloring of a bipartite multigraph with `max degree` colors.
fn bipartite_edge_color(left: usize, right: usize, edges: &[(usize, usize)], colors: usize) -> Vec<usize> {
    let n = left + right;
    let mut at = vec![vec![usize::MAX; colors]; n];
    let mut color = vec![usize::MAX; edges.len()];
    let ends = |k: usize| (edges[k].0, left + edges[k].1);
    for k in 0..edges.len() {
        let (u, v) = ends(k);
        let a = (0..colors).find(|&c| at[u][c] == usize::MAX).unwrap();
        let b = (0..colors).find(|&c| at[v][c] == usize::MAX).unwrap();
        if at[v][a] != usize::MAX {
            let mut path = Vec::new();
            let (mut x, mut c) = (v, a);
            while at[x][c] != usize::MAX {
                let e = at[x][c];
                path.push(e);
                let (p, q) = ends(e);
                x = if p == x { q } else { p };
                c = if c == a { b } else { a };
            }
            for &e in &path {
                let (p, q) = ends(e);
                at[p][color[e]] = usize::MAX;
                at[q][color[e]] = usize::MAX;
            }
            for &e in &path {
                let (p, q) = ends(e);
                color[e] = if color[e] == a { b } else { a };
                at[p][color[e]] = e;
                at[q][color[e]] = e;
            }
        }
        color[k] = a;
        at[u][a] = k;
        at[v][a] = k;
    }
    color
}

/// Karloff–Shmoys coloring with at most `3⌈Δ/2⌉` colors: Euler orientation,
/// bipartite coloring of the out/in split with `⌈Δ/2⌉` colors, then each
/// class (paths and cycles) recolored with three colors.
pub fn karloff_edge_color(g: &Multigraph) -> EdgeColoring {
    if g.edges.is_empty() {
        return EdgeColoring {
            colors: Vec::new(),
            count: 0,
        };
    }
    let half = g.max_degree().div_ceil(2);
    let oriented = euler_orientation(g);
    let bip = bipartite_edge_color(g.n, g.n, &oriented, half);
    let mut colors = vec![0; g.edges.len()];
    for c in 0..half {
        let class: Vec<usize> = (0..oriented.len()).filter(|&k| bip[k] == c).collect();
        let mut out = BTreeMap::new();
        let mut inn = BTreeMap::new();
        for &k in &class {
            out.insert(oriented[k].0, k);
            inn.insert(oriented[k].1, k);
        }
        let mut done = vec![false; g.edges.len()];
        let starts = class
            .iter()
            .filter(|&&k| !inn.contains_key(&oriented[k].0))
            .chain(class.iter());
        for &s in starts {
            if done[s] {
                continue;
            }
            let mut walk = Vec::new();
            let mut k = s;
            loop {
                done[k] = true;
                walk.push(k);
                match out.get(&oriented[k].1) {
                    Some(&n) if !done[n] => k = n,
                    _ => break,
                }
            }
            let cycle = out.get(&oriented[*walk.last().unwrap()].1) == Some(&s);
            for (i, &k) in walk.iter().enumerate() {
                let mut local = i % 2;
                if cycle && walk.len() % 2 == 1 && i + 1 == walk.len() {
                    local = 2;
                }
                colors[k] = 3 * c + local;
            }
        }
    }
    let mut remap = BTreeMap::new();
    for &c in &colors {
        let next = remap.len();
        remap.entry(c).or_insert(next);
    }
    let mut order: Vec<usize> = remap.keys().copied().collect();
    order.sort_unstable();
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    EdgeColoring {
        colors: colors.iter().map(|c| index[c]).collect(),
        count: index.len(),
    }
}

/// One granule of the quantized multigraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Granule<S> {
    pub link: usize,
    pub tail: usize,
    pub head: usize,
    pub time: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcSolution<S> {
    pub theta: S,
    pub network_throughput: S,
    pub schedule: Schedule<S>,
    pub step1_theta: S,
    pub kappa: usize,
    pub max_degree: usize,
    pub multigraph_vertices: usize,
    pub multigraph_edges: usize,
    /// Color class of each slot; every class spans `1/κ` of the schedule.
    pub slot_class: Vec<usize>,
    /// `κ t^g`, the factor by which step one is shrunk.
    pub shrink: S,
}

fn require_fd_ni_max(flags: &ModelFlags) -> Result<()> {
    if flags.is_hd() || flags.is_pi() || !flags.is_max() {
        return Err(Error::ModelMismatch {
            algo: "ec",
            flags: flags.to_string(),
        });
    }
    Ok(())
}

/// Splits `time` into granules of `tg`, the last one holding the remainder.
pub fn quantize<S: Scalar>(time: &S, tg: &S) -> Vec<S> {
    let eps = if S::EXACT { S::zero() } else { S::from_f64(1e-12) };
    let mut k = (time.to_f64() / tg.to_f64()).floor().max(0.0) as i64;
    while k > 0 && S::from_int(k) * tg.clone() > *time {
        k -= 1;
    }
    while S::from_int(k + 1) * tg.clone() <= *time {
        k += 1;
    }
    let rest = time.clone() - S::from_int(k) * tg.clone();
    let mut out = vec![tg.clone(); k as usize];
    if rest > eps {
        out.push(rest);
    }
    out
}

pub fn ec_schedule<S: Scalar>(
    net: &DirectedNetwork,
    step1_theta: S,
    times: &[S],
    cfg: &EcConfig,
) -> Result<EcSolution<S>> {
    let tg = S::from_f64(cfg.granularity);
    let mut first = Vec::with_capacity(net.vertices.len());
    let mut n = 0;
    for v in &net.vertices {
        first.push(n);
        n += v.rf_chains as usize;
    }
    let mut granules = Vec::new();
    for (e, l) in net.links.iter().enumerate() {
        if !times[e].is_pos() {
            continue;
        }
        let (ru, rv) = (net.rf(l.tail), net.rf(l.head));
        let share = times[e].clone() / S::from_int(ru as i64 * rv as i64);
        for i in 0..ru as usize {
            for j in 0..rv as usize {
                for time in quantize(&share, &tg) {
                    granules.push(Granule {
                        link: e,
                        tail: first[l.tail] + i,
                        head: first[l.head] + j,
                        time,
                    });
                }
            }
        }
    }
    let graph = Multigraph {
        n,
        edges: granules.iter().map(|g| (g.tail, g.head)).collect(),
    };
    let coloring = karloff_edge_color(&graph);
    let kappa = coloring.count;
    let max_degree = graph.max_degree();
    if kappa > 3 * max_degree.div_ceil(2) || !coloring.is_proper(&graph) {
        return Err(Error::Numerical(format!(
            "edge coloring with {kappa} colors exceeds the bound for degree {max_degree}"
        )));
    }
    if kappa == 0 {
        return Err(Error::EmptyColoring);
    }
    let shrink = S::from_int(kappa as i64) * tg.clone();

    let mut schedule = Schedule { slots: Vec::new() };
    let mut slot_class = Vec::new();
    for c in 0..kappa {
        let mut members: Vec<&Granule<S>> = granules
            .iter()
            .zip(&coloring.colors)
            .filter(|(_, &k)| k == c)
            .map(|(g, _)| g)
            .collect();
        members.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
        let mut start = S::zero();
        let mut i = 0;
        while i < members.len() {
            let end = members[i].time.clone();
            if end > start {
                let mut per_link: BTreeMap<usize, usize> = BTreeMap::new();
                for g in &members[i..] {
                    *per_link.entry(g.link).or_insert(0) += 1;
                }
                let arcs = per_link
                    .into_iter()
                    .flat_map(|(l, k)| (0..k).map(move |s| StreamRef::new(l, s)))
                    .collect();
                schedule.slots.push(Slot {
                    arcs,
                    duration: (end.clone() - start) / shrink.clone(),
                });
                slot_class.push(c);
                start = end;
            }
            while i < members.len() && members[i].time <= start {
                i += 1;
            }
        }
        if start < tg {
            schedule.slots.push(Slot {
                arcs: Vec::new(),
                duration: (tg.clone() - start) / shrink.clone(),
            });
            slot_class.push(c);
        }
    }
    let report = evaluate_schedule(net, &schedule)?;
    Ok(EcSolution {
        theta: report.maxmin,
        network_throughput: report.network,
        schedule,
        step1_theta,
        kappa,
        max_degree,
        multigraph_vertices: n,
        multigraph_edges: granules.len(),
        slot_class,
        shrink,
    })
}

pub fn ec_mtfs<S: Scalar>(
    net: &DirectedNetwork,
    flags: &ModelFlags,
    cfg: &EcConfig,
) -> Result<EcSolution<S>> {
    require_fd_ni_max(flags)?;
    net.require_max_shaped()?;
    if net.has_macro_in_links() {
        return Err(Error::InvalidNetwork(
            "links into macros must be removed before solving".into(),
        ));
    }
    let (theta, times) = ec_link_times::<S>(net)?;
    ec_schedule(net, theta, &times, cfg)
}

/// Guaranteed factor `2 / (3 (r(D) + 2) t^g + 3)` of step one's θ.
pub fn ec_factor(net: &DirectedNetwork, cfg: &EcConfig) -> f64 {
    2.0 / (3.0 * (net.total_rf() as f64 + 2.0) * cfg.granularity + 3.0)
}
