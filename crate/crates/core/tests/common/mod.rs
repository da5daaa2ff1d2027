//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use mmsched::matching::WeightedGraph;
use mmsched::oracle::Cnf;
use mmsched::{DirectedNetwork, Link, ModelFlags, Rational, Role, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct NetShape {
    pub max_vertices: usize,
    pub max_rf: u32,
    pub max_link_streams: usize,
    /// Budget on the total stream count, which bounds oracle enumeration.
    pub max_streams: usize,
    pub interference: f64,
    pub flags: ModelFlags,
}

impl NetShape {
    pub fn small(flags: &str) -> Self {
        let flags: ModelFlags = flags.parse().unwrap();
        NetShape {
            max_vertices: 6,
            max_rf: 2,
            max_link_streams: 2,
            max_streams: if flags.is_hd() { 12 } else { 16 },
            interference: if flags.is_pi() { 0.4 } else { 0.0 },
            flags,
        }
    }
}

/// Random downlink network: every relay hangs off an earlier vertex, then
/// extra links are added while the stream budget lasts.
pub fn random_network(rng: &mut ChaCha8Rng, shape: &NetShape) -> DirectedNetwork {
    let n = rng.random_range(2..=shape.max_vertices);
    let macros = if n > 3 && rng.random_bool(0.3) { 2 } else { 1 };
    let vertices: Vec<Vertex> = (0..n)
        .map(|id| Vertex {
            id,
            role: if id < macros { Role::Macro } else { Role::Relay },
            rf_chains: rng.random_range(1..=shape.max_rf),
            position: None,
        })
        .collect();
    let mut links: Vec<Link> = Vec::new();
    let mut budget = shape.max_streams;
    let mut add = |rng: &mut ChaCha8Rng, links: &mut Vec<Link>, tail: usize, head: usize| -> bool {
        if links.iter().any(|l| l.tail == tail && l.head == head) {
            return false;
        }
        let r = vertices[tail].rf_chains.min(vertices[head].rf_chains) as usize;
        let d = if shape.flags.is_max() {
            r
        } else {
            rng.random_range(1..=r.min(shape.max_link_streams))
        };
        if d > budget {
            return false;
        }
        budget -= d;
        let mut caps: Vec<f64> = (0..d).map(|_| rng.random_range(1..=9) as f64).collect();
        if shape.flags.is_max() {
            caps = vec![caps[0]; d];
        }
        caps.sort_by(|a, b| b.total_cmp(a));
        links.push(Link {
            tail,
            head,
            stream_capacities: caps,
        });
        true
    };
    for v in macros..n {
        let parent = rng.random_range(0..v);
        add(rng, &mut links, parent, v);
    }
    for _ in 0..2 * n {
        let tail = rng.random_range(0..n);
        let head = rng.random_range(macros..n);
        if tail != head && rng.random_bool(0.5) {
            add(rng, &mut links, tail, head);
        }
    }
    let mut pairs = Vec::new();
    if shape.interference > 0.0 {
        for a in 0..links.len() {
            for b in a + 1..links.len() {
                let (x, y) = (&links[a], &links[b]);
                let share = [x.tail, x.head].iter().any(|v| *v == y.tail || *v == y.head);
                if !share && rng.random_bool(shape.interference) {
                    pairs.push((a, b));
                }
            }
        }
    }
    DirectedNetwork::new(vertices, links, pairs).expect("generated network is valid")
}

/// Uniform orthogonal network: relays carry `R` RF chains, macros multiples
/// of `R`, every link `R` equal streams.
pub fn uniform_orthogonal(rng: &mut ChaCha8Rng, max_vertices: usize) -> DirectedNetwork {
    let r = rng.random_range(1..=3u32);
    let n = rng.random_range(2..=max_vertices);
    let macros = if n > 3 && rng.random_bool(0.4) { 2 } else { 1 };
    let roles: Vec<Role> = (0..n).map(|i| if i < macros { Role::Macro } else { Role::Relay }).collect();
    let rf: Vec<u32> = (0..n)
        .map(|i| if i < macros { r * rng.random_range(1..=2) } else { r })
        .collect();
    let mut arcs: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for v in macros..n {
        arcs.push((rng.random_range(0..v), v, vec![rng.random_range(1..=9) as f64; r as usize]));
    }
    for _ in 0..n {
        let (t, h) = (rng.random_range(0..n), rng.random_range(macros..n));
        if t != h && !arcs.iter().any(|a| a.0 == t && a.1 == h) && rng.random_bool(0.5) {
            arcs.push((t, h, vec![rng.random_range(1..=9) as f64; r as usize]));
        }
    }
    let parts: Vec<(usize, usize, &[f64])> = arcs.iter().map(|(t, h, c)| (*t, *h, c.as_slice())).collect();
    DirectedNetwork::from_parts(&roles, &rf, &parts).unwrap()
}

/// Random multigraph with integer weights and vertex bounds.
pub fn random_b_instance(rng: &mut ChaCha8Rng, max_edges: usize) -> (WeightedGraph<Rational>, Vec<usize>) {
    let n = rng.random_range(2..=5);
    let mut g = WeightedGraph::new(n);
    for _ in 0..rng.random_range(1..=max_edges) {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v, Rational::from_integer(rng.random_range(1..=9).into()));
    }
    let b = (0..n).map(|_| rng.random_range(1..=3)).collect();
    (g, b)
}

/// Random CNF with up to three variables, clauses and literals per clause.
pub fn random_cnf(rng: &mut ChaCha8Rng) -> Cnf {
    let variables = rng.random_range(1..=3usize);
    let clauses = (0..rng.random_range(1..=3))
        .map(|_| {
            let width = rng.random_range(1..=variables.min(3));
            let mut vars: Vec<i32> = (1..=variables as i32).collect();
            for i in (1..vars.len()).rev() {
                vars.swap(i, rng.random_range(0..=i));
            }
            vars.truncate(width);
            vars.into_iter()
                .map(|x| if rng.random_bool(0.5) { x } else { -x })
                .collect()
        })
        .collect();
    Cnf { variables, clauses }
}
