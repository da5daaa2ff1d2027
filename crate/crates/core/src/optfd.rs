//! Exact full-duplex MTFS solver by column generation.
//!
//! Phase one maximizes the minimum relay throughput θ; phase two keeps every
//! relay at θ* and maximizes the total throughput leaving the macros. Columns
//! are simple b-matchings, priced by a maximum weight b-matching.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lp::{
    revised_simplex, BasisState, Column, ColumnKind, Priced, Pricer, SimplexOptions,
};
use crate::matching::{max_weight_simple_b_matching, WeightedGraph};
use crate::netmodel::{DirectedNetwork, ModelFlags, Schedule, Slot, StreamRef};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MtfsSolution<S> {
    pub theta: S,
    pub network_throughput: S,
    pub schedule: Schedule<S>,
    pub phase1_iterations: usize,
    pub phase2_iterations: usize,
}

/// Indexing shared by both phases: relay rows and stream data.
struct Frame<S> {
    row_of: Vec<Option<usize>>,
    relays: usize,
    streams: Vec<(StreamRef, usize, usize, S)>,
    b: Vec<usize>,
}

impl<S: Scalar> Frame<S> {
    fn new(net: &DirectedNetwork) -> Result<Self> {
        if net.has_macro_in_links() {
            return Err(Error::InvalidNetwork(
                "links into macros must be removed before solving".into(),
            ));
        }
        let mut row_of = vec![None; net.vertices.len()];
        let mut relays = 0;
        for v in net.relays() {
            row_of[v] = Some(relays);
            relays += 1;
        }
        if relays == 0 {
            return Err(Error::NoRelay);
        }
        let streams = net
            .streams()
            .into_iter()
            .map(|s| {
                let l = &net.links[s.link];
                (s, l.tail, l.head, S::from_f64(net.capacity(s).unwrap()))
            })
            .collect();
        let b = net.vertices.iter().map(|v| v.rf_chains as usize).collect();
        Ok(Frame {
            row_of,
            relays,
            streams,
            b,
        })
    }

    fn rows(&self) -> usize {
        self.relays + 1
    }

    /// Column of the matching `arcs` (stream indices into `self.streams`).
    fn matching_column(&self, arcs: &[usize], phase: u8) -> Column<S> {
        let mut coeffs = vec![S::zero(); self.rows()];
        let mut macro_out = S::zero();
        for &k in arcs {
            let (_, tail, head, ref c) = self.streams[k];
            let h = self.row_of[head].expect("head is a relay");
            coeffs[h] = coeffs[h].clone() + c.clone();
            match self.row_of[tail] {
                Some(t) => coeffs[t] = coeffs[t].clone() - c.clone(),
                None => macro_out = macro_out + c.clone(),
            }
        }
        coeffs[self.relays] = S::one();
        Column {
            kind: ColumnKind::Matching,
            arcs: arcs.iter().map(|&k| self.streams[k].0).collect(),
            coeffs,
            cost: if phase == 1 { S::zero() } else { -macro_out },
            id: 0,
        }
    }

    fn theta_column(&self, phase: u8) -> Column<S> {
        let mut coeffs = vec![-S::one(); self.rows()];
        coeffs[self.relays] = S::zero();
        Column {
            kind: if phase == 1 {
                ColumnKind::Theta
            } else {
                ColumnKind::Artificial
            },
            arcs: Vec::new(),
            coeffs,
            cost: if phase == 1 { -S::one() } else { S::zero() },
            id: 0,
        }
    }

    fn surplus_column(&self, k: usize) -> Column<S> {
        let mut coeffs = vec![S::zero(); self.rows()];
        coeffs[k] = -S::one();
        Column {
            kind: ColumnKind::Surplus(k),
            arcs: Vec::new(),
            coeffs,
            cost: S::zero(),
            id: 0,
        }
    }

    fn stream_index(&self, s: StreamRef) -> usize {
        self.streams.iter().position(|x| x.0 == s).expect("known stream")
    }

    fn price(&self, duals: &[S], phase: u8) -> Result<Priced<S>> {
        let mut g = WeightedGraph::new(self.b.len());
        for (_, tail, head, c) in &self.streams {
            let ph = duals[self.row_of[*head].expect("head is a relay")].clone();
            let w = match self.row_of[*tail] {
                Some(t) => c.clone() * (ph - duals[t].clone()),
                None if phase == 1 => c.clone() * ph,
                None => c.clone() * (ph + S::one()),
            };
            g.add_edge(*tail, *head, w);
        }
        let bm = max_weight_simple_b_matching(&g, &self.b)?;
        let last = duals[self.relays].clone();
        let eta1 = -bm.weight - last;
        let sum_p = S::sum(duals[..self.relays].iter().cloned());
        let eta2 = if phase == 1 { sum_p - S::one() } else { sum_p };
        let (k3, eta3) = duals[..self.relays]
            .iter()
            .cloned()
            .enumerate()
            .fold(None::<(usize, S)>, |best, (k, p)| match best {
                Some((_, ref b)) if *b <= p => best,
                _ => Some((k, p)),
            })
            .expect("at least one relay");
        let mut best = Priced {
            eta: eta1,
            column: self.matching_column(&bm.edges, phase),
        };
        if eta2 < best.eta {
            best = Priced {
                eta: eta2,
                column: self.theta_column(phase),
            };
        }
        if eta3 < best.eta {
            best = Priced {
                eta: eta3,
                column: self.surplus_column(k3),
            };
        }
        Ok(best)
    }
}

struct PhasePricer<'a, S> {
    frame: &'a Frame<S>,
    phase: u8,
}

impl<S: Scalar> Pricer<S> for PhasePricer<'_, S> {
    fn price(&mut self, duals: &[S]) -> Result<Priced<S>> {
        self.frame.price(duals, self.phase)
    }
}

/// Breadth-first spanning forest over first streams, rooted at the macros.
/// Every relay gets one slot holding its tree in-arc; durations equalize the
/// relay throughputs and sum to one.
pub fn initial_basic_schedule<S: Scalar>(
    net: &DirectedNetwork,
) -> Result<(Schedule<S>, BasisState<S>)> {
    let frame = Frame::<S>::new(net)?;
    let (sched, columns) = initial_columns(net, &frame)?;
    let mut rhs = vec![S::zero(); frame.rows()];
    rhs[frame.relays] = S::one();
    let state = BasisState::new(columns, rhs)?;
    Ok((sched, state))
}

fn initial_columns<S: Scalar>(
    net: &DirectedNetwork,
    frame: &Frame<S>,
) -> Result<(Schedule<S>, Vec<Column<S>>)> {
    let n = net.vertices.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (l, link) in net.links.iter().enumerate() {
        out[link.tail].push(l);
    }
    for list in &mut out {
        list.sort_by_key(|&l| net.links[l].head);
    }
    let mut parent_link = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut queue: VecDeque<usize> = net.macros().into_iter().collect();
    for &m in &queue {
        seen[m] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &l in &out[u] {
            let w = net.links[l].head;
            if !seen[w] {
                seen[w] = true;
                parent_link[w] = Some(l);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| !seen[v]) {
        return Err(Error::UnreachableRelay(v));
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        let p = net.links[parent_link[v].unwrap()].tail;
        if !net.is_macro(p) {
            size[p] += size[v];
        }
    }
    let cap_in = |v: usize| S::from_f64(net.links[parent_link[v].unwrap()].stream_capacities[0]);
    let denom = S::sum(
        order
            .iter()
            .map(|&v| S::from_int(size[v] as i64) / cap_in(v)),
    );
    let theta = S::one() / denom;
    let mut relays: Vec<usize> = order.clone();
    relays.sort_unstable();
    let mut slots = Vec::new();
    let mut columns = Vec::new();
    for (id, &v) in relays.iter().enumerate() {
        let s = StreamRef::new(parent_link[v].unwrap(), 0);
        let duration = theta.clone() * S::from_int(size[v] as i64) / cap_in(v);
        slots.push(Slot {
            arcs: vec![s],
            duration,
        });
        let mut c = frame.matching_column(&[frame.stream_index(s)], 1);
        c.id = id;
        columns.push(c);
    }
    columns.push(frame.theta_column(1));
    Ok((Schedule { slots }, columns))
}

/// Phase-one pricing: `(η, entering column)` for the multipliers `duals`.
pub fn price_phase1<S: Scalar>(net: &DirectedNetwork, duals: &[S]) -> Result<Priced<S>> {
    Frame::new(net)?.price(duals, 1)
}

/// Phase-two pricing.
pub fn price_phase2<S: Scalar>(net: &DirectedNetwork, duals: &[S]) -> Result<Priced<S>> {
    Frame::new(net)?.price(duals, 2)
}

#[derive(Debug, Clone)]
pub struct PhaseOne<S> {
    pub theta: S,
    pub basis: BasisState<S>,
    pub iterations: usize,
    pub objective_trace: Vec<S>,
}

/// Maximum achievable minimum relay throughput.
pub fn solve_maxmin_theta<S: Scalar>(net: &DirectedNetwork) -> Result<PhaseOne<S>> {
    let frame = Frame::<S>::new(net)?;
    let (_, columns) = initial_columns(net, &frame)?;
    let mut rhs = vec![S::zero(); frame.rows()];
    rhs[frame.relays] = S::one();
    let start = BasisState::new(columns, rhs)?;
    let mut pricer = PhasePricer {
        frame: &frame,
        phase: 1,
    };
    let run = revised_simplex(start, &mut pricer, SimplexOptions::for_rows(frame.rows()))?;
    let theta = run.state.value_of(ColumnKind::Theta);
    log::debug!("phase one: theta {theta} after {} iterations", run.iterations);
    Ok(PhaseOne {
        theta,
        basis: run.state,
        iterations: run.iterations,
        objective_trace: run
            .objective_trace
            .into_iter()
            .map(|x| -x)
            .collect(),
    })
}

/// Maximizes the macro outflow while every relay keeps throughput `theta`,
/// warm-started from the phase-one basis.
pub fn solve_mtfs<S: Scalar>(
    net: &DirectedNetwork,
    theta: &S,
    phase_one: &BasisState<S>,
) -> Result<MtfsSolution<S>> {
    let frame = Frame::<S>::new(net)?;
    let columns: Vec<Column<S>> = phase_one
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Matching => {
                let arcs: Vec<usize> = c.arcs.iter().map(|&s| frame.stream_index(s)).collect();
                let mut col = frame.matching_column(&arcs, 2);
                col.id = c.id;
                col
            }
            ColumnKind::Theta | ColumnKind::Artificial => frame.theta_column(2),
            ColumnKind::Surplus(k) => frame.surplus_column(k),
        })
        .collect();
    let mut rhs = vec![theta.clone(); frame.rows()];
    rhs[frame.relays] = S::one();
    let start = BasisState::new(columns, rhs)?;
    let mut pricer = PhasePricer {
        frame: &frame,
        phase: 2,
    };
    let run = revised_simplex(start, &mut pricer, SimplexOptions::for_rows(frame.rows()))?;
    let y = run.state.value_of(ColumnKind::Artificial);
    let slack = if S::EXACT { S::zero() } else { S::from_f64(1e-6) };
    if y > slack {
        return Err(Error::Numerical(format!("artificial variable at {y}")));
    }
    let slots: Vec<Slot<S>> = run
        .state
        .columns
        .iter()
        .zip(&run.state.values)
        .filter(|(c, v)| c.kind == ColumnKind::Matching && v.is_pos())
        .map(|(c, v)| {
            let mut arcs = c.arcs.clone();
            arcs.sort_unstable();
            Slot {
                arcs,
                duration: v.clone(),
            }
        })
        .collect();
    Ok(MtfsSolution {
        theta: theta.clone(),
        network_throughput: -run.state.objective(),
        schedule: Schedule { slots },
        phase1_iterations: 0,
        phase2_iterations: run.iterations,
    })
}

/// Both phases on a downlink-normalized network.
pub fn opt_fd_mtfs<S: Scalar>(net: &DirectedNetwork) -> Result<MtfsSolution<S>> {
    let one = solve_maxmin_theta::<S>(net)?;
    let mut sol = solve_mtfs(net, &one.theta, &one.basis)?;
    sol.phase1_iterations = one.iterations;
    Ok(sol)
}

/// [`opt_fd_mtfs`] after checking that `flags` describe a full-duplex model
/// without interference.
pub fn opt_fd_for<S: Scalar>(net: &DirectedNetwork, flags: &ModelFlags) -> Result<MtfsSolution<S>> {
    if flags.is_hd() || flags.is_pi() {
        return Err(Error::ModelMismatch {
            algo: "opt-fd",
            flags: flags.to_string(),
        });
    }
    opt_fd_mtfs(net)
}
