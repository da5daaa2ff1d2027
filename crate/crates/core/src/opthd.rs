//! Half-duplex scheduling: the exact solver for uniform orthogonal networks
//! and the PDS heuristic for general half-duplex networks.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::matching::{max_weight_plain_matching, WeightedGraph};
use crate::netmodel::{DirectedNetwork, Link, ModelFlags, Role, Schedule, Slot, StreamRef, Vertex};
use crate::num::Scalar;
use crate::optfd::{opt_fd_mtfs, MtfsSolution};

/// Maximum weight half-duplex subgraph of a directed multigraph in which
/// every vertex pair carries either `r` parallel equal-weight arcs or none.
/// Returns the chosen arc indices (all `r` arcs of each chosen pair) and the
/// total weight.
pub fn mwhs_uniform<S: Scalar>(
    n: usize,
    arcs: &[(usize, usize, S)],
    r: usize,
) -> Result<(Vec<usize>, S)> {
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, (u, v, w)) in arcs.iter().enumerate() {
        if w.is_pos() {
            groups.entry((*u.min(v), *u.max(v))).or_default().push(k);
        }
    }
    let mut g = WeightedGraph::new(n);
    let mut members = Vec::new();
    for grp in groups.values() {
        let (u0, v0, ref w0) = arcs[grp[0]];
        let uniform = grp.len() == r
            && grp
                .iter()
                .all(|&k| arcs[k].0 == u0 && arcs[k].1 == v0 && arcs[k].2 == *w0);
        if !uniform {
            return Err(Error::NonUniformMultiplicity(r));
        }
        g.add_edge(u0, v0, w0.clone());
        members.push(grp.clone());
    }
    let mut chosen: Vec<usize> = max_weight_plain_matching(&g)
        .into_iter()
        .flat_map(|e| members[e].clone())
        .collect();
    chosen.sort_unstable();
    let weight = S::sum(chosen.iter().map(|&k| arcs[k].2.clone()));
    Ok((chosen, weight))
}

/// Single-RF network derived from an original one, with every derived link
/// standing for a fixed number of leading streams of an original link.
struct Derived {
    net: DirectedNetwork,
    origin: Vec<(usize, usize)>,
}

impl Derived {
    /// Builds the network from macro RF splits. Relays are copied verbatim.
    /// `streams(split_rf, link)` is the number of streams a split may drive
    /// on an original link; `merge` sums their capacities into one arc.
    fn build(
        net: &DirectedNetwork,
        splits: &[Vec<u32>],
        streams: impl Fn(u32, usize) -> usize,
        merge: bool,
    ) -> Result<Derived> {
        let mut vertices = Vec::new();
        let mut copies = Vec::with_capacity(net.vertices.len());
        for v in &net.vertices {
            let mut ids = Vec::new();
            for &rf in &splits[v.id] {
                ids.push((vertices.len(), rf));
                vertices.push(Vertex {
                    id: vertices.len(),
                    role: v.role,
                    rf_chains: 1,
                    position: v.position,
                });
            }
            copies.push(ids);
        }
        let mut links = Vec::new();
        let mut origin = Vec::new();
        for (l, link) in net.links.iter().enumerate() {
            let head = copies[link.head][0].0;
            for &(tail, rf) in &copies[link.tail] {
                let d = streams(rf, l);
                if d == 0 {
                    continue;
                }
                let caps = &link.stream_capacities[..d];
                let cap = if merge { caps.iter().sum() } else { caps[0] };
                links.push(Link {
                    tail,
                    head,
                    stream_capacities: vec![cap],
                });
                origin.push((l, d));
            }
        }
        let net = DirectedNetwork::new(vertices, links, Vec::new())?;
        Ok(Derived { net, origin })
    }

    fn lift<S: Scalar>(&self, sched: &Schedule<S>) -> Schedule<S> {
        Schedule {
            slots: sched
                .slots
                .iter()
                .map(|slot| {
                    let mut arcs: Vec<StreamRef> = slot
                        .arcs
                        .iter()
                        .flat_map(|s| {
                            let (l, d) = self.origin[s.link];
                            (0..d).map(move |k| StreamRef::new(l, k))
                        })
                        .collect();
                    arcs.sort_unstable();
                    Slot {
                        arcs,
                        duration: slot.duration.clone(),
                    }
                })
                .collect(),
        }
    }
}

fn require_hd_ni(algo: &'static str, flags: &ModelFlags) -> Result<()> {
    if !flags.is_hd() || flags.is_pi() {
        return Err(Error::ModelMismatch {
            algo,
            flags: flags.to_string(),
        });
    }
    Ok(())
}

/// Common relay RF count `R` of a uniform orthogonal network.
pub fn uniform_rf(net: &DirectedNetwork) -> Result<u32> {
    let bad = |m: String| Err(Error::NotUniformOrthogonal(m));
    let relays = net.relays();
    let Some(&first) = relays.first() else {
        return Err(Error::NoRelay);
    };
    let r = net.rf(first);
    if let Some(&v) = relays.iter().find(|&&v| net.rf(v) != r) {
        return bad(format!("relay {v} has {} RF chains, expected {r}", net.rf(v)));
    }
    if let Some(v) = net.macros().into_iter().find(|&v| net.rf(v) % r != 0) {
        return bad(format!("macro {v} RF count {} is not a multiple of {r}", net.rf(v)));
    }
    if let Err(e) = net.require_max_shaped() {
        return bad(e.to_string());
    }
    Ok(r)
}

/// Optimal half-duplex schedule of a uniform orthogonal network: macros are
/// split into vertices of `R` RF chains, the single-RF problem is solved on
/// the link network and its schedule is run `R` times in parallel.
pub fn opt_hd_mtfs_uniform<S: Scalar>(
    net: &DirectedNetwork,
    flags: &ModelFlags,
) -> Result<MtfsSolution<S>> {
    require_hd_ni("opt-hd-uniform", flags)?;
    let r = uniform_rf(net)?;
    let splits: Vec<Vec<u32>> = net
        .vertices
        .iter()
        .map(|v| vec![r; (v.rf_chains / r) as usize])
        .collect();
    let derived = Derived::build(net, &splits, |_, _| r as usize, false)?;
    let single = opt_fd_mtfs::<S>(&derived.net)?;
    let factor = S::from_int(r as i64);
    Ok(MtfsSolution {
        theta: single.theta * factor.clone(),
        network_throughput: single.network_throughput * factor,
        schedule: derived.lift(&single.schedule),
        phase1_iterations: single.phase1_iterations,
        phase2_iterations: single.phase2_iterations,
    })
}

/// Macro RF splitting used by PDS.
#[derive(Debug, Clone, PartialEq)]
pub struct PdsTransform {
    pub d_min: u32,
    /// RF allocation of each split, per original vertex (relays: one entry).
    pub splits: Vec<Vec<u32>>,
}

impl PdsTransform {
    pub fn new(net: &DirectedNetwork) -> Result<Self> {
        let d_min = net
            .links
            .iter()
            .map(|l| l.streams() as u32)
            .min()
            .ok_or_else(|| Error::InvalidNetwork("network has no link".into()))?;
        let splits = net
            .vertices
            .iter()
            .map(|v| {
                if v.role == Role::Relay {
                    return vec![v.rf_chains];
                }
                let s = (v.rf_chains / d_min).max(1);
                let mut out = vec![d_min; (s - 1) as usize];
                out.push(v.rf_chains - (s - 1) * d_min);
                out
            })
            .collect();
        Ok(PdsTransform { d_min, splits })
    }

    /// `m(v)`, the RF count of the last split of macro `v`.
    pub fn last_split(&self, v: usize) -> u32 {
        *self.splits[v].last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdsSolution<S> {
    pub solution: MtfsSolution<S>,
    pub transform: PdsTransform,
}

/// PDS: split macros, merge parallel streams into single arcs, solve the
/// single-RF problem and activate all merged streams together.
pub fn pds<S: Scalar>(net: &DirectedNetwork, flags: &ModelFlags) -> Result<PdsSolution<S>> {
    require_hd_ni("pds", flags)?;
    let transform = PdsTransform::new(net)?;
    let derived = Derived::build(
        net,
        &transform.splits,
        |rf, l| {
            let link = &net.links[l];
            (rf.min(net.rf(link.head)) as usize).min(link.streams())
        },
        true,
    )?;
    let single = opt_fd_mtfs::<S>(&derived.net)?;
    let solution = MtfsSolution {
        theta: single.theta,
        network_throughput: single.network_throughput,
        schedule: derived.lift(&single.schedule),
        phase1_iterations: single.phase1_iterations,
        phase2_iterations: single.phase2_iterations,
    };
    Ok(PdsSolution {
        solution,
        transform,
    })
}

/// Guarantee `θ ≥ θ*/γ*` of PDS, with its looser closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaBound {
    pub gamma: Rational64,
    pub loose: Rational64,
}

pub fn pds_bound_gamma(net: &DirectedNetwork, flags: &ModelFlags) -> Result<GammaBound> {
    let t = PdsTransform::new(net)?;
    let r_relay_max = net.relays().iter().map(|&v| net.rf(v)).max().unwrap_or(0) as i64;
    let m_max = net.macros().iter().map(|&v| t.last_split(v)).max().unwrap_or(0) as i64;
    let top = r_relay_max.max(m_max);
    if flags.is_max() {
        let r_min = net.vertices.iter().map(|v| v.rf_chains).min().unwrap_or(1) as i64;
        Ok(GammaBound {
            gamma: Rational64::new(top, r_min),
            loose: Rational64::new(r_relay_max.max(2 * r_min - 1), r_min),
        })
    } else {
        Ok(GammaBound {
            gamma: Rational64::from_integer(top),
            loose: Rational64::from_integer(r_relay_max.max(2 * t.d_min as i64 - 1)),
        })
    }
}
