//! Maximum throughput fair scheduling for mmWave backhaul networks.
//!
//! The crate models a directed backhaul network whose vertices carry a number
//! of RF chains and whose links carry one or more parallel data streams, and
//! computes time-division schedules that maximize the minimum relay
//! throughput.
//!
//! * [`netmodel`] holds the network, schedule and expansion types.
//! * [`optfd`] solves the full-duplex problem exactly by column generation.
//! * [`opthd`] covers the polynomial half-duplex cases and the PDS heuristic.
//! * [`f3wc`] implements the conflict-graph based approximations.
//! * [`ecsched`] implements the edge-coloring based scheduler.
//! * [`scenario`] generates synthetic grid deployments.
//! * [`oracle`] provides brute-force reference solvers and reductions.
//! * [`solve`] dispatches to any of the schedulers by name.

pub mod ecsched;
pub mod error;
pub mod f3wc;
pub mod lp;
pub mod matching;
pub mod netmodel;
pub mod num;
pub mod oracle;
pub mod optfd;
pub mod opthd;
pub mod scenario;
pub mod solve;

pub use error::{Error, Result};
pub use netmodel::{
    DirectedNetwork, Duplex, Interference, Link, ModelFlags, Role, Schedule, Slot, StreamRef,
    Susm, ThroughputReport, Vertex,
};
pub use num::{Rational, Scalar};
