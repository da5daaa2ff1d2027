//! Reference machinery: exhaustive enumeration LPs, activation matrices and
//! SAT reduction instances.

use crate::error::{Error, Result};
use crate::lp::{solve_explicit_lp, LpProblem, Sense};
use crate::netmodel::{DirectedNetwork, ModelFlags, Role, Schedule, Slot, StreamRef};
use crate::num::Scalar;

pub const FD_LIMIT: usize = 22;
pub const HD_LIMIT: usize = 14;

/// All nonempty stream sets that can be active together under `flags`:
/// RF chains, half duplex and pairwise interference. Sorted by size, then
/// lexicographically.
pub fn enumerate_activation_sets(
    net: &DirectedNetwork,
    flags: &ModelFlags,
    limit: usize,
) -> Result<Vec<Vec<StreamRef>>> {
    let streams = net.streams();
    if streams.len() > limit {
        return Err(Error::TooLarge {
            size: streams.len(),
            limit,
        });
    }
    let mut st = Enum {
        net,
        flags,
        streams: &streams,
        partners: net.interference_partners(),
        used: vec![0; net.vertices.len()],
        sends: vec![0; net.vertices.len()],
        recvs: vec![0; net.vertices.len()],
        link_active: vec![0; net.links.len()],
        current: Vec::new(),
        out: Vec::new(),
    };
    st.rec(0);
    let mut out = st.out;
    out.retain(|s| !s.is_empty());
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

struct Enum<'a> {
    net: &'a DirectedNetwork,
    flags: &'a ModelFlags,
    streams: &'a [StreamRef],
    partners: Vec<Vec<usize>>,
    used: Vec<usize>,
    sends: Vec<usize>,
    recvs: Vec<usize>,
    link_active: Vec<usize>,
    current: Vec<StreamRef>,
    out: Vec<Vec<StreamRef>>,
}

impl Enum<'_> {
    fn rec(&mut self, k: usize) {
        if k == self.streams.len() {
            self.out.push(self.current.clone());
            return;
        }
        self.rec(k + 1);
        let s = self.streams[k];
        let link = &self.net.links[s.link];
        let (u, v) = (link.tail, link.head);
        if self.used[u] >= self.net.rf(u) as usize || self.used[v] >= self.net.rf(v) as usize {
            return;
        }
        if self.flags.is_hd() && (self.recvs[u] > 0 || self.sends[v] > 0) {
            return;
        }
        if self.flags.is_pi()
            && self.link_active[s.link] == 0
            && self.partners[s.link].iter().any(|&p| self.link_active[p] > 0)
        {
            return;
        }
        self.used[u] += 1;
        self.used[v] += 1;
        self.sends[u] += 1;
        self.recvs[v] += 1;
        self.link_active[s.link] += 1;
        self.current.push(s);
        self.rec(k + 1);
        self.current.pop();
        self.link_active[s.link] -= 1;
        self.recvs[v] -= 1;
        self.sends[u] -= 1;
        self.used[v] -= 1;
        self.used[u] -= 1;
    }
}

/// Inflow minus outflow of every vertex for every activation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix<S> {
    pub columns: Vec<Vec<StreamRef>>,
    /// `entries[v][j]` for vertex `v` and column `j`.
    pub entries: Vec<Vec<S>>,
}

impl<S: Scalar> ActivationMatrix<S> {
    fn build(net: &DirectedNetwork, columns: Vec<Vec<StreamRef>>) -> Self {
        let mut entries = vec![vec![S::zero(); columns.len()]; net.vertices.len()];
        for (j, col) in columns.iter().enumerate() {
            for &s in col {
                let c = S::from_f64(net.capacity(s).unwrap());
                let l = &net.links[s.link];
                entries[l.head][j] = entries[l.head][j].clone() + c.clone();
                entries[l.tail][j] = entries[l.tail][j].clone() - c;
            }
        }
        ActivationMatrix { columns, entries }
    }

    /// Rows of the relays only.
    pub fn relay_rows(&self, net: &DirectedNetwork) -> Vec<Vec<S>> {
        net.relays().into_iter().map(|v| self.entries[v].clone()).collect()
    }
}

/// Node-matching matrix: one column per nonempty simple b-matching.
pub fn node_matching_matrix<S: Scalar>(
    net: &DirectedNetwork,
    limit: usize,
) -> Result<ActivationMatrix<S>> {
    let flags = ModelFlags::default();
    Ok(ActivationMatrix::build(net, enumerate_activation_sets(net, &flags, limit)?))
}

/// Node-hd-subgraph matrix: one column per nonempty half-duplex subgraph.
pub fn node_hd_subgraph_matrix<S: Scalar>(
    net: &DirectedNetwork,
    limit: usize,
) -> Result<ActivationMatrix<S>> {
    let flags = "HD-NI-MAX".parse().expect("valid flags");
    Ok(ActivationMatrix::build(net, enumerate_activation_sets(net, &flags, limit)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution<S> {
    pub theta: S,
    pub network_throughput: S,
    pub schedule: Schedule<S>,
    pub columns: usize,
}

/// Solves the max-min LP and then the network throughput LP over every
/// activation set permitted by `flags`.
pub fn brute_force_mtfs<S: Scalar>(
    net: &DirectedNetwork,
    flags: &ModelFlags,
    limit: usize,
) -> Result<OracleSolution<S>> {
    let relays = net.relays();
    if relays.is_empty() {
        return Err(Error::NoRelay);
    }
    let mat = ActivationMatrix::<S>::build(net, enumerate_activation_sets(net, flags, limit)?);
    let k = mat.columns.len();
    let a = mat.relay_rows(net);
    let mut lp1 = LpProblem::new(k + 1, true);
    lp1.objective[k] = S::one();
    for row in &a {
        let mut coeffs = sparse(row);
        coeffs.push((k, -S::one()));
        lp1.add_row(coeffs, Sense::Ge, S::zero());
    }
    lp1.add_row((0..k).map(|j| (j, S::one())).collect(), Sense::Eq, S::one());
    let theta = solve_explicit_lp(&lp1)?.objective;
    let floor = if S::EXACT {
        theta.clone()
    } else {
        theta.clone() - S::from_f64(1e-9) * S::max_of(S::one(), theta.clone())
    };
    let mut lp2 = LpProblem::new(k, true);
    for (j, c) in lp2.objective.iter_mut().enumerate() {
        *c = S::sum(a.iter().map(|row| row[j].clone()));
    }
    for row in &a {
        lp2.add_row(sparse(row), Sense::Ge, floor.clone());
    }
    lp2.add_row((0..k).map(|j| (j, S::one())).collect(), Sense::Eq, S::one());
    let sol = solve_explicit_lp(&lp2)?;
    let slots = sol
        .x
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_pos())
        .map(|(j, t)| Slot {
            arcs: mat.columns[j].clone(),
            duration: t.clone(),
        })
        .collect();
    Ok(OracleSolution {
        theta,
        network_throughput: sol.objective,
        schedule: Schedule { slots },
        columns: k,
    })
}

fn sparse<S: Scalar>(row: &[S]) -> Vec<(usize, S)> {
    row.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| (j, x.clone()))
        .collect()
}

/// Largest total capacity of a half-duplex subgraph, by enumeration.
pub fn max_weight_hd_subgraph(net: &DirectedNetwork, limit: usize) -> Result<(f64, Vec<StreamRef>)> {
    let flags: ModelFlags = "HD-NI-MAX".parse().expect("valid flags");
    let mut best = (0.0, Vec::new());
    for set in enumerate_activation_sets(net, &flags, limit)? {
        let w: f64 = set.iter().map(|&s| net.capacity(s).unwrap()).sum();
        if w > best.0 {
            best = (w, set);
        }
    }
    Ok(best)
}

/// Boolean formula in conjunctive normal form. Literal `+l` is `x_l`, `-l`
/// is its negation, variables counted from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub variables: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn check(&self) -> Result<()> {
        for (k, c) in self.clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::EmptyClause(k));
            }
            if c.iter().any(|&l| l == 0 || l.unsigned_abs() as usize > self.variables) {
                return Err(Error::InvalidConfig(format!("clause {k} has a bad literal")));
            }
        }
        Ok(())
    }

    pub fn is_satisfiable(&self) -> bool {
        (0u64..1 << self.variables).any(|bits| {
            self.clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let val = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                    val == (l > 0)
                })
            })
        })
    }

    fn clause_arcs(&self, literal_vertex: impl Fn(i32) -> Vec<usize>, q0: usize) -> Vec<(usize, usize)> {
        let mut arcs = Vec::new();
        for (k, c) in self.clauses.iter().enumerate() {
            let mut lits = c.clone();
            lits.sort_unstable();
            lits.dedup();
            for l in lits {
                for v in literal_vertex(l) {
                    arcs.push((v, q0 + k));
                }
            }
        }
        arcs
    }
}

#[derive(Debug, Clone)]
pub struct MwhsInstance {
    pub net: DirectedNetwork,
    pub target: f64,
}

/// Vertex layout: `r_l` at `l`, `p_l` at `L + l`, `n_l` at `2L + l`, `q_k` at
/// `3L + k` (all zero-based). Every arc has weight one.
pub fn sat_to_mwhs(cnf: &Cnf) -> Result<MwhsInstance> {
    cnf.check()?;
    let (l_count, k_count) = (cnf.variables, cnf.clauses.len());
    let p = |l: usize| l_count + l;
    let n = |l: usize| 2 * l_count + l;
    let mut arcs = Vec::new();
    for l in 0..l_count {
        arcs.push((l, p(l)));
        arcs.push((l, n(l)));
    }
    arcs.extend(cnf.clause_arcs(
        |lit| {
            let l = lit.unsigned_abs() as usize - 1;
            vec![if lit > 0 { p(l) } else { n(l) }]
        },
        3 * l_count,
    ));
    let total = 3 * l_count + k_count;
    let mut roles = vec![Role::Relay; total];
    roles[..l_count].fill(Role::Macro);
    let rf = rf_by_outdegree(total, &arcs, l_count..3 * l_count, 1);
    let caps: Vec<(usize, usize, Vec<f64>)> = arcs.iter().map(|&(u, v)| (u, v, vec![1.0])).collect();
    let net = build(&roles, &rf, &caps)?;
    Ok(MwhsInstance {
        net,
        target: (k_count + l_count) as f64,
    })
}

fn rf_by_outdegree(
    total: usize,
    arcs: &[(usize, usize)],
    literal_vertices: std::ops::Range<usize>,
    floor: u32,
) -> Vec<u32> {
    let mut out = vec![0u32; total];
    for &(u, _) in arcs {
        out[u] += 1;
    }
    (0..total)
        .map(|v| if literal_vertices.contains(&v) { out[v].max(floor) } else { 1 })
        .collect()
}

fn build(roles: &[Role], rf: &[u32], arcs: &[(usize, usize, Vec<f64>)]) -> Result<DirectedNetwork> {
    let links: Vec<(usize, usize, &[f64])> =
        arcs.iter().map(|(u, v, c)| (*u, *v, c.as_slice())).collect();
    DirectedNetwork::from_parts(roles, rf, &links)
}

#[derive(Debug, Clone)]
pub struct HdMtfsInstance {
    pub net: DirectedNetwork,
    pub theta_target: f64,
    pub alpha_target: f64,
    pub variables: usize,
    pub clauses: usize,
}

impl HdMtfsInstance {
    pub fn macro_vertex(&self, l: usize, m: usize) -> usize {
        4 * l + m
    }

    /// `p_l^(m+1)`, `n_l^(m+1)` for `m` in `0..2`.
    pub fn literal_vertex(&self, l: usize, positive: bool, m: usize) -> usize {
        4 * self.variables + 4 * l + if positive { m } else { 2 + m }
    }

    pub fn clause_vertex(&self, k: usize) -> usize {
        8 * self.variables + k
    }
}

/// Vertex layout: `r_l^(1..4)` at `4l..4l+4`, then `p_l^(1), p_l^(2),
/// n_l^(1), n_l^(2)` at `4L + 4l..`, then the clause vertices.
pub fn sat_to_hdmtfs(cnf: &Cnf) -> Result<HdMtfsInstance> {
    cnf.check()?;
    let (l_count, k_count) = (cnf.variables, cnf.clauses.len());
    let r = |l: usize, m: usize| 4 * l + m;
    let p = |l: usize, m: usize| 4 * l_count + 4 * l + m;
    let n = |l: usize, m: usize| 4 * l_count + 4 * l + 2 + m;
    let big = k_count as f64 / 2.0 + 1.0;
    let mut arcs: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for l in 0..l_count {
        for (u, v) in [
            (r(l, 0), p(l, 0)),
            (r(l, 0), n(l, 0)),
            (r(l, 1), p(l, 1)),
            (r(l, 1), n(l, 1)),
            (r(l, 2), p(l, 1)),
            (r(l, 2), n(l, 0)),
            (r(l, 3), p(l, 0)),
            (r(l, 3), n(l, 1)),
        ] {
            arcs.push((u, v, vec![big]));
        }
    }
    let clause = cnf.clause_arcs(
        |lit| {
            let l = lit.unsigned_abs() as usize - 1;
            if lit > 0 {
                vec![p(l, 0), p(l, 1)]
            } else {
                vec![n(l, 0), n(l, 1)]
            }
        },
        8 * l_count,
    );
    arcs.extend(clause.iter().map(|&(u, v)| (u, v, vec![1.0])));
    let total = 8 * l_count + k_count;
    let mut roles = vec![Role::Relay; total];
    roles[..4 * l_count].fill(Role::Macro);
    let plain: Vec<(usize, usize)> = arcs.iter().map(|(u, v, _)| (*u, *v)).collect();
    let rf = rf_by_outdegree(total, &plain, 4 * l_count..8 * l_count, 2);
    let net = build(&roles, &rf, &arcs)?;
    Ok(HdMtfsInstance {
        net,
        theta_target: 1.0,
        alpha_target: 4.0 * l_count as f64 * big,
        variables: l_count,
        clauses: k_count,
    })
}

/// Whether some half-duplex schedule reaches both targets of the instance.
///
/// The throughput target equals the total macro capacity, so every slot of
/// such a schedule has each macro sending on one of its two arcs. The LP
/// maximizing θ over exactly those slots is solved by column generation;
/// pricing enumerates the sender/receiver role of every literal vertex and
/// completes each role pattern optimally arc by arc.
pub fn hd_targets_attained(inst: &HdMtfsInstance) -> Result<bool> {
    let net = &inst.net;
    let relays = net.relays();
    let mut row_of = vec![None; net.vertices.len()];
    for (i, &v) in relays.iter().enumerate() {
        row_of[v] = Some(i);
    }
    let lits: Vec<usize> = (4 * inst.variables..8 * inst.variables).collect();
    let mut lit_index = vec![usize::MAX; net.vertices.len()];
    for (i, &v) in lits.iter().enumerate() {
        lit_index[v] = i;
    }
    let macros = net.macros();
    let out_links = |v: usize| -> Vec<usize> {
        (0..net.links.len()).filter(|&l| net.links[l].tail == v).collect()
    };
    let macro_links: Vec<Vec<usize>> = macros.iter().map(|&m| out_links(m)).collect();
    let clause_links: Vec<Vec<usize>> = (0..inst.clauses)
        .map(|k| {
            let q = inst.clause_vertex(k);
            (0..net.links.len()).filter(|&l| net.links[l].head == q).collect()
        })
        .collect();
    let column_of = |links: &[usize]| -> Vec<f64> {
        let mut a = vec![0.0; relays.len()];
        for &l in links {
            let link = &net.links[l];
            let c = link.stream_capacities[0];
            if let Some(h) = row_of[link.head] {
                a[h] += c;
            }
            if let Some(t) = row_of[link.tail] {
                a[t] -= c;
            }
        }
        a
    };
    let price = |y: &[f64]| -> (f64, Vec<usize>) {
        let contrib = |l: usize| {
            let link = &net.links[l];
            let c = link.stream_capacities[0];
            let yh = row_of[link.head].map_or(0.0, |i| y[i]);
            let yt = row_of[link.tail].map_or(0.0, |i| y[i]);
            c * (yh - yt)
        };
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 0u64..1 << lits.len() {
            let sender = |v: usize| mask >> lit_index[v] & 1 == 1;
            let mut total = 0.0;
            let mut chosen = Vec::new();
            let mut ok = true;
            for links in &macro_links {
                let pick = links
                    .iter()
                    .copied()
                    .filter(|&l| !sender(net.links[l].head))
                    .min_by(|&a, &b| contrib(a).total_cmp(&contrib(b)));
                match pick {
                    Some(l) => {
                        total += contrib(l);
                        chosen.push(l);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            for links in &clause_links {
                let pick = links
                    .iter()
                    .copied()
                    .filter(|&l| sender(net.links[l].tail))
                    .min_by(|&a, &b| contrib(a).total_cmp(&contrib(b)));
                if let Some(l) = pick {
                    if contrib(l) < 0.0 {
                        total += contrib(l);
                        chosen.push(l);
                    }
                }
            }
            if total < best.0 {
                best = (total, chosen);
            }
        }
        best
    };
    let mut pool: Vec<Vec<f64>> = vec![column_of(&price(&vec![0.0; relays.len()]).1)];
    for _ in 0..10_000 {
        let k = pool.len();
        let mut lp = LpProblem::new(k + 2, true);
        lp.objective[k] = 1.0;
        lp.objective[k + 1] = -1.0;
        for (i, _) in relays.iter().enumerate() {
            let mut coeffs: Vec<(usize, f64)> = (0..k)
                .filter(|&j| pool[j][i] != 0.0)
                .map(|j| (j, pool[j][i]))
                .collect();
            coeffs.push((k, -1.0));
            coeffs.push((k + 1, 1.0));
            lp.add_row(coeffs, Sense::Ge, 0.0);
        }
        lp.add_row((0..k).map(|j| (j, 1.0)).collect(), Sense::Eq, 1.0);
        let sol = solve_explicit_lp(&lp)?;
        let y = &sol.duals[..relays.len()];
        let y_sum = sol.duals[relays.len()];
        let (value, links) = price(y);
        if value >= -y_sum - 1e-9 {
            return Ok(sol.objective >= inst.theta_target - 1e-7);
        }
        pool.push(column_of(&links));
    }
    Err(Error::IterationLimit(10_000))
}
