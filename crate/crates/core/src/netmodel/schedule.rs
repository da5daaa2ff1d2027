use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DirectedNetwork, ModelFlags, StreamRef};
use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot<S = f64> {
    pub arcs: Vec<StreamRef>,
    pub duration: S,
}

/// Time-division schedule over a unit period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule<S = f64> {
    pub slots: Vec<Slot<S>>,
}

impl<S: Scalar> Schedule<S> {
    pub fn total_duration(&self) -> S {
        S::sum(self.slots.iter().map(|s| s.duration.clone()))
    }

    pub fn to_f64(&self) -> Schedule<f64> {
        Schedule {
            slots: self
                .slots
                .iter()
                .map(|s| Slot {
                    arcs: s.arcs.clone(),
                    duration: s.duration.to_f64(),
                })
                .collect(),
        }
    }

    /// Total active time per stream.
    pub fn stream_times(&self) -> BTreeMap<StreamRef, S> {
        let mut out: BTreeMap<StreamRef, S> = BTreeMap::new();
        for slot in &self.slots {
            for &a in &slot.arcs {
                let e = out.entry(a).or_insert_with(S::zero);
                *e = e.clone() + slot.duration.clone();
            }
        }
        out
    }
}

impl Schedule<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport<S = f64> {
    /// `(relay id, throughput)` in relay id order.
    pub per_relay: Vec<(usize, S)>,
    pub maxmin: S,
    pub network: S,
}

impl<S: Scalar> ThroughputReport<S> {
    pub fn to_f64(&self) -> ThroughputReport<f64> {
        ThroughputReport {
            per_relay: self.per_relay.iter().map(|(v, h)| (*v, h.to_f64())).collect(),
            maxmin: self.maxmin.to_f64(),
            network: self.network.to_f64(),
        }
    }
}

/// Net inflow of every relay under `sched`.
pub fn evaluate_schedule<S: Scalar>(
    net: &DirectedNetwork,
    sched: &Schedule<S>,
) -> Result<ThroughputReport<S>> {
    let mut h = vec![S::zero(); net.vertices.len()];
    for slot in &sched.slots {
        for &a in &slot.arcs {
            let c = net.capacity(a).ok_or(Error::UnknownStream {
                link: a.link,
                stream: a.stream,
            })?;
            let amount = S::from_f64(c) * slot.duration.clone();
            let link = &net.links[a.link];
            h[link.head] = h[link.head].clone() + amount.clone();
            h[link.tail] = h[link.tail].clone() - amount;
        }
    }
    let per_relay: Vec<(usize, S)> = net.relays().into_iter().map(|v| (v, h[v].clone())).collect();
    let maxmin = per_relay
        .iter()
        .map(|(_, x)| x.clone())
        .reduce(S::min_of)
        .unwrap_or_else(S::zero);
    let network = S::sum(per_relay.iter().map(|(_, x)| x.clone()));
    Ok(ThroughputReport {
        per_relay,
        maxmin,
        network,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    UnknownStream { slot: usize, link: usize, stream: usize },
    DuplicateStream { slot: usize, link: usize, stream: usize },
    RfChainsExceeded { slot: usize, vertex: usize, used: usize, limit: u32 },
    HalfDuplex { slot: usize, vertex: usize },
    Interference { slot: usize, link_a: usize, link_b: usize },
    NegativeDuration { slot: usize },
    DurationSum { sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownStream { slot, link, stream } => {
                write!(f, "slot {slot}: unknown stream ({link}, {stream})")
            }
            Violation::DuplicateStream { slot, link, stream } => {
                write!(f, "slot {slot}: stream ({link}, {stream}) listed twice")
            }
            Violation::RfChainsExceeded {
                slot,
                vertex,
                used,
                limit,
            } => write!(f, "slot {slot}: vertex {vertex} uses {used} of {limit} RF chains"),
            Violation::HalfDuplex { slot, vertex } => {
                write!(f, "slot {slot}: vertex {vertex} sends and receives")
            }
            Violation::Interference {
                slot,
                link_a,
                link_b,
            } => write!(f, "slot {slot}: interfering links {link_a} and {link_b} both active"),
            Violation::NegativeDuration { slot } => write!(f, "slot {slot}: negative duration"),
            Violation::DurationSum { sum } => write!(f, "durations sum to {sum}, expected 1"),
        }
    }
}

/// Checks RF, duplex, interference and timing constraints. An empty result
/// means the schedule is feasible under `flags`.
pub fn validate_schedule<S: Scalar>(
    net: &DirectedNetwork,
    sched: &Schedule<S>,
    flags: &ModelFlags,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, slot) in sched.slots.iter().enumerate() {
        if slot.duration.is_neg() {
            out.push(Violation::NegativeDuration { slot: i });
        }
        let mut seen = BTreeSet::new();
        let mut used = vec![0usize; net.vertices.len()];
        let mut sends = vec![false; net.vertices.len()];
        let mut receives = vec![false; net.vertices.len()];
        let mut active = BTreeSet::new();
        for &a in &slot.arcs {
            if net.capacity(a).is_none() {
                out.push(Violation::UnknownStream {
                    slot: i,
                    link: a.link,
                    stream: a.stream,
                });
                continue;
            }
            if !seen.insert(a) {
                out.push(Violation::DuplicateStream {
                    slot: i,
                    link: a.link,
                    stream: a.stream,
                });
                continue;
            }
            let link = &net.links[a.link];
            used[link.tail] += 1;
            used[link.head] += 1;
            sends[link.tail] = true;
            receives[link.head] = true;
            active.insert(a.link);
        }
        for v in &net.vertices {
            if used[v.id] > v.rf_chains as usize {
                out.push(Violation::RfChainsExceeded {
                    slot: i,
                    vertex: v.id,
                    used: used[v.id],
                    limit: v.rf_chains,
                });
            }
            if flags.is_hd() && sends[v.id] && receives[v.id] {
                out.push(Violation::HalfDuplex {
                    slot: i,
                    vertex: v.id,
                });
            }
        }
        if flags.is_pi() {
            for &(a, b) in &net.interference_pairs {
                if active.contains(&a) && active.contains(&b) {
                    out.push(Violation::Interference {
                        slot: i,
                        link_a: a,
                        link_b: b,
                    });
                }
            }
        }
    }
    let sum = sched.total_duration();
    let slack = if S::EXACT { S::zero() } else { S::from_f64(1e-9) };
    if (sum.clone() - S::one()).abs() > slack {
        out.push(Violation::DurationSum { sum: sum.to_f64() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Duplex, Interference, Role, Susm};
    use crate::num::Rational;

    fn three_node() -> DirectedNetwork {
        DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay, Role::Relay],
            &[2, 2, 2],
            &[(0, 1, &[8.0, 8.0]), (0, 2, &[2.0, 2.0]), (1, 2, &[3.0, 3.0])],
        )
        .unwrap()
    }

    fn s(link: usize, stream: usize) -> StreamRef {
        StreamRef::new(link, stream)
    }

    #[test]
    fn hd_example_schedule() {
        let net = three_node();
        let sched = Schedule {
            slots: vec![
                Slot {
                    arcs: vec![s(0, 0), s(0, 1)],
                    duration: Rational::ratio(3, 7),
                },
                Slot {
                    arcs: vec![s(2, 0), s(2, 1)],
                    duration: Rational::ratio(4, 7),
                },
            ],
        };
        let rep = evaluate_schedule(&net, &sched).unwrap();
        assert_eq!(rep.maxmin, Rational::ratio(24, 7));
        assert_eq!(rep.per_relay[0].1, Rational::ratio(24, 7));
        let hd = ModelFlags::new(Duplex::HD, Interference::NI, Susm::MAX);
        assert!(validate_schedule(&net, &sched, &hd).is_empty());
    }

    #[test]
    fn fd_example_slot() {
        let net = three_node();
        let sched = Schedule {
            slots: vec![Slot {
                arcs: vec![s(0, 0), s(1, 0), s(2, 0)],
                duration: 1.0,
            }],
        };
        let rep = evaluate_schedule(&net, &sched).unwrap();
        assert_eq!(rep.per_relay, vec![(1, 5.0), (2, 5.0)]);
        assert_eq!(rep.network, 10.0);
        assert!(validate_schedule(&net, &sched, &ModelFlags::default()).is_empty());
        let hd = ModelFlags::new(Duplex::HD, Interference::NI, Susm::MAX);
        let v = validate_schedule(&net, &sched, &hd);
        assert_eq!(v, vec![Violation::HalfDuplex { slot: 0, vertex: 1 }]);
    }

    #[test]
    fn detects_rf_duration_and_unknown_stream() {
        let net = three_node();
        let sched = Schedule {
            slots: vec![Slot {
                arcs: vec![s(0, 0), s(0, 1), s(1, 0), s(7, 0)],
                duration: 0.5,
            }],
        };
        let v = validate_schedule(&net, &sched, &ModelFlags::default());
        assert!(v.contains(&Violation::RfChainsExceeded {
            slot: 0,
            vertex: 0,
            used: 3,
            limit: 2
        }));
        assert!(v.contains(&Violation::UnknownStream {
            slot: 0,
            link: 7,
            stream: 0
        }));
        assert!(v.iter().any(|x| matches!(x, Violation::DurationSum { .. })));
        assert!(evaluate_schedule(&net, &sched).is_err());
    }

    #[test]
    fn schedule_json_round_trip() {
        let sched = Schedule {
            slots: vec![Slot {
                arcs: vec![s(0, 1), s(2, 0)],
                duration: 0.25,
            }],
        };
        let text = sched.to_json();
        let back = Schedule::from_json(&text).unwrap();
        assert_eq!(back, sched);
        assert_eq!(back.to_json(), text);
    }
}
