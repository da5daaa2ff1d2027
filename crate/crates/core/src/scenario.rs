//! Grid backhaul scenarios: relays on an `n × n` grid, macros at the centers
//! of a `j × k` partition, a 28 GHz path-loss channel and geometric
//! interference between directional links.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{DirectedNetwork, Link, ModelFlags, Role, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelState {
    Los,
    Nlos,
    Outage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Relays per grid side.
    pub grid: usize,
    /// Macro layout, columns × rows.
    pub macros: (usize, usize),
    pub spacing_m: f64,
    pub carrier_hz: f64,
    pub los: PathLoss,
    pub nlos: PathLoss,
    pub tx_power_db: f64,
    pub gain_db: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub thermal_dbm_hz: f64,
    pub sinr_threshold_db: f64,
    pub min_snr_db: f64,
    pub stream_mean: f64,
    pub beamwidth_deg: f64,
    pub correlation: f64,
    /// Outage model `1 - exp(-d/outage_scale_m + outage_offset)`.
    pub outage_scale_m: f64,
    pub outage_offset: f64,
    /// LOS probability decay `exp(-d/los_scale_m)` of the non-outage share.
    pub los_scale_m: f64,
    pub relay_rf: u32,
    pub macro_rf: u32,
    pub seed: u64,
    pub flags: ModelFlags,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            grid: 4,
            macros: (1, 1),
            spacing_m: 80.0,
            carrier_hz: 28e9,
            los: PathLoss {
                alpha: 61.4,
                beta: 2.0,
                sigma: 5.8,
            },
            nlos: PathLoss {
                alpha: 72.0,
                beta: 2.92,
                sigma: 8.7,
            },
            tx_power_db: 30.0,
            gain_db: 30.0,
            bandwidth_hz: 1e9,
            noise_figure_db: 4.0,
            thermal_dbm_hz: -174.0,
            sinr_threshold_db: 5.0,
            min_snr_db: 5.0,
            stream_mean: 1.8,
            beamwidth_deg: 20.0,
            correlation: 0.9,
            outage_scale_m: 30.0,
            outage_offset: 5.2,
            los_scale_m: 67.1,
            relay_rf: 2,
            macro_rf: 2,
            seed: 0,
            flags: ModelFlags::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.grid == 0 || self.macros.0 == 0 || self.macros.1 == 0 {
            return bad("grid and macro layout must be nonempty");
        }
        if !(self.spacing_m > 0.0 && self.bandwidth_hz > 0.0 && self.carrier_hz > 0.0) {
            return bad("spacing, bandwidth and carrier must be positive");
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg <= 360.0) {
            return bad("beamwidth must lie in (0, 360] degrees");
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return bad("correlation must lie in [0, 1)");
        }
        if !(self.stream_mean > 0.0) {
            return bad("stream mean must be positive");
        }
        if self.relay_rf == 0 || self.macro_rf == 0 {
            return bad("RF chain counts must be positive");
        }
        if self.los.sigma < 0.0 || self.nlos.sigma < 0.0 {
            return bad("shadowing deviation must be non-negative");
        }
        if !(self.outage_scale_m > 0.0 && self.los_scale_m > 0.0) {
            return bad("state model scales must be positive");
        }
        Ok(())
    }

    pub fn noise_dbm(&self) -> f64 {
        self.thermal_dbm_hz + self.noise_figure_db + 10.0 * self.bandwidth_hz.log10()
    }

    /// Path loss in dB; distances below 1 m are taken as 1 m.
    pub fn path_loss_db(&self, d: f64, state: ChannelState, xi: f64) -> f64 {
        let p = match state {
            ChannelState::Los => self.los,
            _ => self.nlos,
        };
        p.alpha + 10.0 * p.beta * d.max(1.0).log10() + xi
    }

    /// Received power in dBm, `None` in outage.
    pub fn received_dbm(&self, d: f64, state: ChannelState, xi: f64) -> Option<f64> {
        (state != ChannelState::Outage)
            .then(|| self.tx_power_db + self.gain_db - self.path_loss_db(d, state, xi))
    }

    pub fn snr_db(&self, d: f64, state: ChannelState, xi: f64) -> Option<f64> {
        self.received_dbm(d, state, xi).map(|p| p - self.noise_dbm())
    }

    /// Probabilities of (outage, LOS) at distance `d`.
    pub fn state_probabilities(&self, d: f64) -> (f64, f64) {
        let out = (1.0 - (-d / self.outage_scale_m + self.outage_offset).exp()).max(0.0);
        (out, (1.0 - out) * (-d / self.los_scale_m).exp())
    }
}

/// Shannon capacity of a single stream in Gbit/s.
pub fn channel_capacity(d: f64, state: ChannelState, xi: f64, cfg: &ScenarioConfig) -> f64 {
    match cfg.snr_db(d, state, xi) {
        Some(snr) => cfg.bandwidth_hz * (1.0 + 10f64.powf(snr / 10.0)).log2() / 1e9,
        None => 0.0,
    }
}

/// Per-stream capacities from the eigenvalues of the exponential correlation
/// matrix `R_ij = r^|i-j|`, scaled so that the first stream keeps `c1`.
pub fn stream_capacities(c1: f64, k: usize, r: f64) -> Vec<f64> {
    let m = DMatrix::from_fn(k, k, |i, j| r.powi((i as i32 - j as i32).abs()));
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let top = eig[0];
    let mut caps: Vec<f64> = eig.iter().map(|e| c1 * (e / top).max(0.0)).collect();
    caps[0] = c1;
    for i in 1..k {
        caps[i] = caps[i].min(caps[i - 1]);
    }
    caps
}

/// Channel realization of an unordered vertex pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChannel {
    pub state: ChannelState,
    pub shadow_db: f64,
    pub streams: usize,
}

fn pair_rng(seed: u64, a: usize, b: usize) -> ChaCha8Rng {
    let (a, b) = (a.min(b) as u64, a.max(b) as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((a << 32) | b);
    rng
}

/// Draws the state, shadowing and stream count of the pair `{a, b}` at
/// distance `d`; the same pair always gets the same draw.
pub fn pair_channel(cfg: &ScenarioConfig, a: usize, b: usize, d: f64) -> PairChannel {
    let mut rng = pair_rng(cfg.seed, a, b);
    let (p_out, p_los) = cfg.state_probabilities(d);
    let u: f64 = rng.random();
    let state = if u < p_out {
        ChannelState::Outage
    } else if u < p_out + p_los {
        ChannelState::Los
    } else {
        ChannelState::Nlos
    };
    let sigma = match state {
        ChannelState::Los => cfg.los.sigma,
        _ => cfg.nlos.sigma,
    };
    let shadow_db = Normal::new(0.0, sigma).unwrap().sample(&mut rng);
    let streams = Poisson::new(cfg.stream_mean).unwrap().sample(&mut rng).max(1.0) as usize;
    PairChannel {
        state,
        shadow_db,
        streams,
    }
}

fn distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn in_beam(from: [f64; 2], boresight: [f64; 2], target: [f64; 2], half_angle: f64) -> bool {
    let a = [boresight[0] - from[0], boresight[1] - from[1]];
    let b = [target[0] - from[0], target[1] - from[1]];
    let cos = (a[0] * b[0] + a[1] * b[1]) / (a[0].hypot(a[1]) * b[0].hypot(b[1]));
    cos.clamp(-1.0, 1.0).acos() <= half_angle + 1e-12
}

/// Link pairs that cannot be active together. `rx_dbm(t, r)` is the power
/// received at `r` from transmitter `t`, `None` when there is no path.
pub fn interference_pairs(
    net: &DirectedNetwork,
    cfg: &ScenarioConfig,
    rx_dbm: impl Fn(usize, usize) -> Option<f64>,
) -> Result<Vec<(usize, usize)>> {
    let pos = |v: usize| net.vertices[v].position.ok_or(Error::MissingGeometry);
    let half = cfg.beamwidth_deg.to_radians() / 2.0;
    let noise_mw = 10f64.powf(cfg.noise_dbm() / 10.0);
    let interferes = |l1: usize, l2: usize| -> Result<bool> {
        let (a, b) = (&net.links[l1], &net.links[l2]);
        let (t1, r1, t2, r2) = (pos(a.tail)?, pos(a.head)?, pos(b.tail)?, pos(b.head)?);
        if !in_beam(t1, r1, r2, half) || !in_beam(r2, t2, t1, half) {
            return Ok(false);
        }
        let Some(cross) = rx_dbm(a.tail, b.head) else {
            return Ok(false);
        };
        let signal = rx_dbm(b.tail, b.head).map_or(0.0, |p| 10f64.powf(p / 10.0));
        let sinr = signal / (10f64.powf(cross / 10.0) + noise_mw);
        Ok(10.0 * sinr.log10() < cfg.sinr_threshold_db)
    };
    let mut pairs = Vec::new();
    for a in 0..net.links.len() {
        for b in a + 1..net.links.len() {
            if net.links_share_vertex(a, b) {
                continue;
            }
            if interferes(a, b)? || interferes(b, a)? {
                pairs.push((a, b));
            }
        }
    }
    Ok(pairs)
}

/// Vertex positions: relays first in row-major grid order, then macros.
pub fn layout(cfg: &ScenarioConfig) -> Vec<(Role, [f64; 2])> {
    let n = cfg.grid;
    let side = (n.saturating_sub(1)) as f64 * cfg.spacing_m;
    let mut out = Vec::new();
    for y in 0..n {
        for x in 0..n {
            out.push((Role::Relay, [x as f64 * cfg.spacing_m, y as f64 * cfg.spacing_m]));
        }
    }
    let (j, k) = cfg.macros;
    for b in 0..k {
        for a in 0..j {
            let p = [
                (a as f64 + 0.5) * side / j as f64,
                (b as f64 + 0.5) * side / k as f64,
            ];
            out.push((Role::Macro, p));
        }
    }
    out
}

/// Generates and normalizes a scenario network. Networks with a relay no
/// macro can reach are reported as `UnreachableRelay`.
pub fn generate(cfg: &ScenarioConfig) -> Result<DirectedNetwork> {
    cfg.check()?;
    let places = layout(cfg);
    let vertices: Vec<Vertex> = places
        .iter()
        .enumerate()
        .map(|(id, &(role, p))| Vertex {
            id,
            role,
            rf_chains: if role == Role::Macro { cfg.macro_rf } else { cfg.relay_rf },
            position: Some(p),
        })
        .collect();
    let channel = |a: usize, b: usize| {
        let d = distance(places[a].1, places[b].1);
        (d, pair_channel(cfg, a, b, d))
    };
    let mut links = Vec::new();
    for a in 0..places.len() {
        for b in a + 1..places.len() {
            if places[a].0 == Role::Macro && places[b].0 == Role::Macro {
                continue;
            }
            let (d, ch) = channel(a, b);
            match cfg.snr_db(d, ch.state, ch.shadow_db) {
                Some(snr) if snr > cfg.min_snr_db => {}
                _ => continue,
            }
            let c1 = channel_capacity(d, ch.state, ch.shadow_db, cfg);
            let r = vertices[a].rf_chains.min(vertices[b].rf_chains) as usize;
            let caps = if cfg.flags.is_max() {
                vec![c1; r]
            } else {
                stream_capacities(c1, ch.streams.min(r), cfg.correlation)
            };
            for (tail, head) in [(a, b), (b, a)] {
                links.push(Link {
                    tail,
                    head,
                    stream_capacities: caps.clone(),
                });
            }
        }
    }
    let mut net = DirectedNetwork::new(vertices, links, Vec::new())?.normalize_downlink()?;
    if cfg.flags.is_pi() {
        let rx = |t: usize, r: usize| {
            let (d, ch) = channel(t, r);
            cfg.received_dbm(d, ch.state, ch.shadow_db)
        };
        net.interference_pairs = interference_pairs(&net, cfg, rx)?;
        net.check()?;
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_table() {
        let c = ScenarioConfig::default();
        assert_eq!((c.spacing_m, c.carrier_hz, c.beamwidth_deg, c.correlation), (80.0, 28e9, 20.0, 0.9));
        assert_eq!((c.los.alpha, c.nlos.beta, c.stream_mean), (61.4, 2.92, 1.8));
        assert_eq!(c.noise_dbm(), -80.0);
    }

    #[test]
    fn hand_calculations() {
        let c = ScenarioConfig::default();
        let snr = c.snr_db(80.0, ChannelState::Los, 0.0).unwrap();
        assert!((snr - 40.54).abs() < 0.01, "{snr}");
        let cap = channel_capacity(80.0, ChannelState::Los, 0.0, &c);
        assert!((cap - 13.47).abs() / 13.47 < 1e-3, "{cap}");
        let pl = c.path_loss_db(80.0, ChannelState::Nlos, 0.0);
        assert!((pl - 127.57).abs() < 0.01, "{pl}");
        let nlos = c.snr_db(80.0, ChannelState::Nlos, 0.0).unwrap();
        assert!((nlos - 12.43).abs() < 0.01, "{nlos}");
        assert!(channel_capacity(1e12, ChannelState::Los, 0.0, &c) < 1e-6);
        let loud = ScenarioConfig {
            gain_db: 60.0,
            ..c.clone()
        };
        assert!((loud.snr_db(80.0, ChannelState::Los, 0.0).unwrap() - snr - 30.0).abs() < 1e-9);
        assert_eq!(channel_capacity(80.0, ChannelState::Outage, 0.0, &c), 0.0);
    }

    #[test]
    fn stream_capacity_shapes() {
        assert_eq!(stream_capacities(5.0, 1, 0.9), vec![5.0]);
        let flat = stream_capacities(5.0, 4, 0.0);
        assert!(flat.iter().all(|&c| (c - 5.0).abs() < 1e-9));
        let caps = stream_capacities(5.0, 3, 0.9);
        assert!(caps[0] > caps[1] && caps[1] > caps[2] && caps[2] > 0.0);
        assert!(caps.iter().sum::<f64>() < 15.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig {
            grid: 2,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn colocated_macro_is_finite() {
        let cfg = ScenarioConfig {
            grid: 3,
            seed: 2,
            ..ScenarioConfig::default()
        };
        assert_eq!(layout(&cfg)[4].1, layout(&cfg)[9].1);
        let net = generate(&cfg).unwrap();
        assert!(net.links.iter().all(|l| l.stream_capacities.iter().all(|c| c.is_finite())));
    }

    #[test]
    fn layout_places_macros_at_centers() {
        let cfg = ScenarioConfig {
            grid: 4,
            macros: (2, 2),
            ..ScenarioConfig::default()
        };
        let l = layout(&cfg);
        assert_eq!(l.len(), 20);
        assert_eq!(l[16], (Role::Macro, [60.0, 60.0]));
        assert_eq!(l[19], (Role::Macro, [180.0, 180.0]));
    }

    fn geometric(points: &[[f64; 2]], arcs: &[(usize, usize)]) -> DirectedNetwork {
        let vertices = points
            .iter()
            .enumerate()
            .map(|(id, &p)| Vertex {
                id,
                role: if id == 0 { Role::Macro } else { Role::Relay },
                rf_chains: 1,
                position: Some(p),
            })
            .collect();
        let links = arcs
            .iter()
            .map(|&(tail, head)| Link {
                tail,
                head,
                stream_capacities: vec![1.0],
            })
            .collect();
        DirectedNetwork::new(vertices, links, Vec::new()).unwrap()
    }

    fn los(cfg: &ScenarioConfig, net: &DirectedNetwork) -> impl Fn(usize, usize) -> Option<f64> {
        let cfg = cfg.clone();
        let pos: Vec<[f64; 2]> = net.vertices.iter().map(|v| v.position.unwrap()).collect();
        move |t, r| cfg.received_dbm(distance(pos[t], pos[r]), ChannelState::Los, 0.0)
    }

    #[test]
    fn interference_geometry() {
        let cfg = ScenarioConfig::default();
        let parallel = geometric(&[[0.0, 0.0], [100.0, 0.0], [0.0, 1000.0], [100.0, 1000.0]], &[(0, 1), (2, 3)]);
        assert!(interference_pairs(&parallel, &cfg, los(&cfg, &parallel)).unwrap().is_empty());
        let aligned = geometric(&[[0.0, 0.0], [100.0, 0.0], [-200.0, 2.0], [60.0, 1.0]], &[(0, 1), (2, 3)]);
        assert_eq!(interference_pairs(&aligned, &cfg, los(&cfg, &aligned)).unwrap(), vec![(0, 1)]);
        let shared = geometric(&[[0.0, 0.0], [100.0, 0.0], [50.0, 0.0]], &[(0, 1), (0, 2)]);
        assert!(interference_pairs(&shared, &cfg, los(&cfg, &shared)).unwrap().is_empty());
        let mut bare = parallel.clone();
        bare.vertices[0].position = None;
        assert_eq!(interference_pairs(&bare, &cfg, |_, _| None), Err(Error::MissingGeometry));
    }

    #[test]
    fn bad_config() {
        let cfg = ScenarioConfig {
            beamwidth_deg: 0.0,
            ..ScenarioConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
    }
}
