//! Uniform entry point over all schedulers.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::ecsched::{ec_factor, ec_mtfs, EcConfig};
use crate::error::{Error, Result};
use crate::f3wc::{f3wc, f3wc_bounds, Ordering};
use crate::netmodel::{DirectedNetwork, ModelFlags, Schedule};
use crate::num::Scalar;
use crate::opthd::{opt_hd_mtfs_uniform, pds, pds_bound_gamma};
use crate::optfd::opt_fd_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "opt-fd")]
    OptFd,
    #[serde(rename = "opt-hd-uniform")]
    OptHdUniform,
    #[serde(rename = "pds")]
    Pds,
    #[serde(rename = "f3wc-fao")]
    F3wcFao,
    #[serde(rename = "f3wc-lslo")]
    F3wcLslo,
    #[serde(rename = "ec")]
    Ec,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::OptFd,
        Algorithm::OptHdUniform,
        Algorithm::Pds,
        Algorithm::F3wcFao,
        Algorithm::F3wcLslo,
        Algorithm::Ec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OptFd => "opt-fd",
            Algorithm::OptHdUniform => "opt-hd-uniform",
            Algorithm::Pds => "pds",
            Algorithm::F3wcFao => "f3wc-fao",
            Algorithm::F3wcLslo => "f3wc-lslo",
            Algorithm::Ec => "ec",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// Approximation guarantee attached to a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    /// `θ ≥ θ*/α*`.
    Alpha(u64),
    /// `θ ≥ θ*/(2β*)`; holds `β*`.
    Beta(u64),
    /// `θ ≥ θ*/γ*`.
    Gamma(Rational64),
    /// `θ > factor · θ` of the relaxed step.
    EcFactor(f64),
}

impl Guarantee {
    /// Divisor applied to the optimum.
    pub fn divisor(&self) -> f64 {
        match *self {
            Guarantee::Alpha(a) => a as f64,
            Guarantee::Beta(b) => 2.0 * b as f64,
            Guarantee::Gamma(g) => *g.numer() as f64 / *g.denom() as f64,
            Guarantee::EcFactor(f) => 1.0 / f,
        }
    }
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guarantee::Alpha(a) => write!(f, "alpha*<={a}"),
            Guarantee::Beta(b) => write!(f, "beta*<={b}"),
            Guarantee::Gamma(g) => write!(f, "gamma*={g}"),
            Guarantee::EcFactor(x) => write!(f, "ec-factor={x:.6}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub ec: EcConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            ec: EcConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<S> {
    pub algorithm: Algorithm,
    pub theta: S,
    pub network_throughput: S,
    pub schedule: Schedule<S>,
    /// Simplex pivots for the exact solvers, conflict vertices for F3WC.
    pub iterations: usize,
    pub kappa: Option<usize>,
    /// θ of the relaxed first step (EC) or of the stream-time LP (F3WC).
    pub relaxed_theta: Option<S>,
    pub guarantee: Option<Guarantee>,
}

pub fn run<S: Scalar>(
    algorithm: Algorithm,
    net: &DirectedNetwork,
    flags: &ModelFlags,
    opts: &SolveOptions,
) -> Result<Outcome<S>> {
    let base = |theta, network_throughput, schedule, iterations| Outcome {
        algorithm,
        theta,
        network_throughput,
        schedule,
        iterations,
        kappa: None,
        relaxed_theta: None,
        guarantee: None,
    };
    Ok(match algorithm {
        Algorithm::OptFd => {
            let s = opt_fd_for::<S>(net, flags)?;
            let it = s.phase1_iterations + s.phase2_iterations;
            base(s.theta, s.network_throughput, s.schedule, it)
        }
        Algorithm::OptHdUniform => {
            let s = opt_hd_mtfs_uniform::<S>(net, flags)?;
            let it = s.phase1_iterations + s.phase2_iterations;
            base(s.theta, s.network_throughput, s.schedule, it)
        }
        Algorithm::Pds => {
            let s = pds::<S>(net, flags)?.solution;
            let it = s.phase1_iterations + s.phase2_iterations;
            let mut o = base(s.theta, s.network_throughput, s.schedule, it);
            o.guarantee = Some(Guarantee::Gamma(pds_bound_gamma(net, flags)?.gamma));
            o
        }
        Algorithm::F3wcFao | Algorithm::F3wcLslo => {
            let ordering = if algorithm == Algorithm::F3wcFao {
                Ordering::Fao
            } else {
                Ordering::Lslo
            };
            let s = f3wc::<S>(net, flags, ordering)?;
            let bounds = f3wc_bounds(net, flags);
            let mut o = base(s.theta, s.network_throughput, s.schedule, s.conflict_vertices);
            o.relaxed_theta = Some(s.lp_theta);
            o.guarantee = match ordering {
                Ordering::Fao => bounds.alpha.map(Guarantee::Alpha),
                Ordering::Lslo => bounds.beta.map(Guarantee::Beta),
            };
            o
        }
        Algorithm::Ec => {
            let s = ec_mtfs::<S>(net, flags, &opts.ec)?;
            let mut o = base(s.theta, s.network_throughput, s.schedule, s.multigraph_edges);
            o.kappa = Some(s.kappa);
            o.relaxed_theta = Some(s.step1_theta);
            o.guarantee = Some(Guarantee::EcFactor(ec_factor(net, &opts.ec)));
            o
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
