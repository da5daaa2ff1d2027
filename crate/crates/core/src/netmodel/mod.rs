//! Network, flag and schedule types.

mod expand;
mod schedule;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expand::{expand, ExpandedArc, ExpandedNetwork, SplitVertex};
pub use schedule::{
    evaluate_schedule, validate_schedule, Schedule, Slot, ThroughputReport, Violation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Macro,
    Relay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub role: Role,
    pub rf_chains: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub tail: usize,
    pub head: usize,
    pub stream_capacities: Vec<f64>,
}

impl Link {
    pub fn streams(&self) -> usize {
        self.stream_capacities.len()
    }
}

/// One stream of one link, `stream` counted from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct StreamRef {
    pub link: usize,
    pub stream: usize,
}

impl StreamRef {
    pub fn new(link: usize, stream: usize) -> Self {
        StreamRef { link, stream }
    }
}

impl From<(usize, usize)> for StreamRef {
    fn from((link, stream): (usize, usize)) -> Self {
        StreamRef { link, stream }
    }
}

impl From<StreamRef> for (usize, usize) {
    fn from(s: StreamRef) -> Self {
        (s.link, s.stream)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Duplex {
    FD,
    HD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interference {
    NI,
    PI,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Susm {
    MAX,
    REAL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelFlags {
    pub duplex: Duplex,
    pub interference: Interference,
    pub susm: Susm,
}

impl ModelFlags {
    pub const fn new(duplex: Duplex, interference: Interference, susm: Susm) -> Self {
        ModelFlags {
            duplex,
            interference,
            susm,
        }
    }

    pub fn is_hd(&self) -> bool {
        self.duplex == Duplex::HD
    }

    pub fn is_pi(&self) -> bool {
        self.interference == Interference::PI
    }

    pub fn is_max(&self) -> bool {
        self.susm == Susm::MAX
    }
}

impl Default for ModelFlags {
    fn default() -> Self {
        ModelFlags::new(Duplex::FD, Interference::NI, Susm::MAX)
    }
}

impl fmt::Display for ModelFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-{:?}-{:?}", self.duplex, self.interference, self.susm)
    }
}

impl std::str::FromStr for ModelFlags {
    type Err = Error;

    /// Parses forms like `FD-NI-MAX` or `hd,pi,real`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<String> = s
            .split(|c| c == '-' || c == ',' || c == '/')
            .map(|p| p.trim().to_ascii_uppercase())
            .collect();
        let bad = || Error::InvalidConfig(format!("bad model flags `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let duplex = match parts[0].as_str() {
            "FD" => Duplex::FD,
            "HD" => Duplex::HD,
            _ => return Err(bad()),
        };
        let interference = match parts[1].as_str() {
            "NI" => Interference::NI,
            "PI" => Interference::PI,
            _ => return Err(bad()),
        };
        let susm = match parts[2].as_str() {
            "MAX" => Susm::MAX,
            "REAL" => Susm::REAL,
            _ => return Err(bad()),
        };
        Ok(ModelFlags::new(duplex, interference, susm))
    }
}

/// Directed backhaul network. Vertex ids equal their index, link ids equal
/// their index in `links`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedNetwork {
    pub vertices: Vec<Vertex>,
    pub links: Vec<Link>,
    #[serde(default)]
    pub interference_pairs: Vec<(usize, usize)>,
}

impl DirectedNetwork {
    /// Builds a network and checks its structural invariants.
    pub fn new(
        vertices: Vec<Vertex>,
        links: Vec<Link>,
        interference_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = interference_pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let net = DirectedNetwork {
            vertices,
            links,
            interference_pairs: pairs,
        };
        net.check()?;
        Ok(net)
    }

    /// Convenience constructor used by tests and generators: `rf[i]` RF chains
    /// for vertex `i`, the first `macros` vertices are macros.
    pub fn from_parts(
        roles: &[Role],
        rf: &[u32],
        links: &[(usize, usize, &[f64])],
    ) -> Result<Self> {
        if roles.len() != rf.len() {
            return Err(Error::InvalidNetwork("role and rf lengths differ".into()));
        }
        let vertices = roles
            .iter()
            .zip(rf)
            .enumerate()
            .map(|(id, (&role, &rf_chains))| Vertex {
                id,
                role,
                rf_chains,
                position: None,
            })
            .collect();
        let links = links
            .iter()
            .map(|&(tail, head, caps)| Link {
                tail,
                head,
                stream_capacities: caps.to_vec(),
            })
            .collect();
        DirectedNetwork::new(vertices, links, Vec::new())
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidNetwork(m));
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return bad(format!("vertex at index {i} has id {}", v.id));
            }
            if v.rf_chains == 0 {
                return bad(format!("vertex {i} has no RF chain"));
            }
        }
        let n = self.vertices.len();
        let mut seen = BTreeSet::new();
        for (l, link) in self.links.iter().enumerate() {
            if link.tail >= n || link.head >= n {
                return bad(format!("link {l} references an unknown vertex"));
            }
            if link.tail == link.head {
                return bad(format!("link {l} is a self loop"));
            }
            if !seen.insert((link.tail, link.head)) {
                return bad(format!("duplicate link {} -> {}", link.tail, link.head));
            }
            let caps = &link.stream_capacities;
            if caps.is_empty() {
                return bad(format!("link {l} has no stream"));
            }
            if caps.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                return bad(format!("link {l} has a non-positive capacity"));
            }
            if caps.windows(2).any(|w| w[1] > w[0]) {
                return bad(format!("link {l} capacities are not non-increasing"));
            }
            let r = self.rf(link.tail).min(self.rf(link.head)) as usize;
            if caps.len() > r {
                return bad(format!("link {l} has {} streams but only {r} RF chains", caps.len()));
            }
        }
        for &(a, b) in &self.interference_pairs {
            if a >= self.links.len() || b >= self.links.len() {
                return bad(format!("interference pair ({a}, {b}) references an unknown link"));
            }
            if self.links_share_vertex(a, b) {
                return bad(format!("interfering links {a} and {b} share a vertex"));
            }
        }
        Ok(())
    }

    pub fn rf(&self, v: usize) -> u32 {
        self.vertices[v].rf_chains
    }

    pub fn is_macro(&self, v: usize) -> bool {
        self.vertices[v].role == Role::Macro
    }

    pub fn relays(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.role == Role::Relay)
            .map(|v| v.id)
            .collect()
    }

    pub fn macros(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.role == Role::Macro)
            .map(|v| v.id)
            .collect()
    }

    pub fn capacity(&self, s: StreamRef) -> Option<f64> {
        self.links
            .get(s.link)
            .and_then(|l| l.stream_capacities.get(s.stream))
            .copied()
    }

    /// All streams in (link, stream) order.
    pub fn streams(&self) -> Vec<StreamRef> {
        self.links
            .iter()
            .enumerate()
            .flat_map(|(l, link)| (0..link.streams()).map(move |k| StreamRef::new(l, k)))
            .collect()
    }

    pub fn stream_count(&self) -> usize {
        self.links.iter().map(Link::streams).sum()
    }

    pub fn links_share_vertex(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (&self.links[a], &self.links[b]);
        la.tail == lb.tail || la.tail == lb.head || la.head == lb.tail || la.head == lb.head
    }

    pub fn interferes(&self, a: usize, b: usize) -> bool {
        self.interference_pairs
            .binary_search(&(a.min(b), a.max(b)))
            .is_ok()
    }

    pub fn link_between(&self, tail: usize, head: usize) -> Option<usize> {
        self.links
            .iter()
            .position(|l| l.tail == tail && l.head == head)
    }

    /// Number of streams leaving and entering each vertex.
    pub fn stream_degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut out = vec![0; self.vertices.len()];
        let mut inn = vec![0; self.vertices.len()];
        for l in &self.links {
            out[l.tail] += l.streams();
            inn[l.head] += l.streams();
        }
        (out, inn)
    }

    /// True when every link carries `min(r(u), r(v))` streams of equal
    /// capacity.
    pub fn is_max_shaped(&self) -> bool {
        self.max_shape_violation().is_none()
    }

    pub fn require_max_shaped(&self) -> Result<()> {
        match self.max_shape_violation() {
            None => Ok(()),
            Some(m) => Err(Error::NotMaxShaped(m)),
        }
    }

    fn max_shape_violation(&self) -> Option<String> {
        for (l, link) in self.links.iter().enumerate() {
            let r = self.rf(link.tail).min(self.rf(link.head)) as usize;
            if link.streams() != r {
                return Some(format!("link {l} has {} streams, expected {r}", link.streams()));
            }
            let c0 = link.stream_capacities[0];
            if link.stream_capacities.iter().any(|&c| c != c0) {
                return Some(format!("link {l} has unequal stream capacities"));
            }
        }
        None
    }

    /// Total number of RF chains.
    pub fn total_rf(&self) -> u64 {
        self.vertices.iter().map(|v| v.rf_chains as u64).sum()
    }

    /// Drops every link entering a macro and checks that each relay is
    /// reachable from some macro. Surviving links keep their relative order;
    /// interference pairs are renumbered accordingly.
    pub fn normalize_downlink(&self) -> Result<DirectedNetwork> {
        let mut remap = BTreeMap::new();
        let mut links = Vec::new();
        for (l, link) in self.links.iter().enumerate() {
            if !self.is_macro(link.head) {
                remap.insert(l, links.len());
                links.push(link.clone());
            }
        }
        let pairs = self
            .interference_pairs
            .iter()
            .filter_map(|(a, b)| Some((*remap.get(a)?, *remap.get(b)?)))
            .collect();
        let net = DirectedNetwork::new(self.vertices.clone(), links, pairs)?;
        net.check_reachable()?;
        Ok(net)
    }

    pub fn check_reachable(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for l in &self.links {
            adj[l.tail].push(l.head);
        }
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = self.macros().into_iter().collect();
        for &m in &queue {
            seen[m] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match (0..n).find(|&v| !seen[v]) {
            Some(v) => Err(Error::UnreachableRelay(v)),
            None => Ok(()),
        }
    }

    pub fn has_macro_in_links(&self) -> bool {
        self.links.iter().any(|l| self.is_macro(l.head))
    }

    /// Link view with one arc per link, capacity of the first stream.
    pub fn link_network(&self) -> DirectedNetwork {
        let mut net = self.clone();
        for l in &mut net.links {
            l.stream_capacities.truncate(1);
        }
        net
    }

    pub fn interference_partners(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.links.len()];
        for &(a, b) in &self.interference_pairs {
            out[a].push(b);
            out[b].push(a);
        }
        out
    }
}

/// On-disk network document: flags plus network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub flags: ModelFlags,
    #[serde(flatten)]
    pub network: DirectedNetwork,
}

impl NetworkDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidNetwork(e.to_string()))?;
        let network = DirectedNetwork::new(
            doc.network.vertices,
            doc.network.links,
            doc.network.interference_pairs,
        )?;
        if doc.flags.is_max() {
            network.require_max_shaped()?;
        }
        Ok(NetworkDocument {
            flags: doc.flags,
            network,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_node() -> DirectedNetwork {
        DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay, Role::Relay],
            &[2, 2, 2],
            &[(0, 1, &[8.0, 8.0]), (0, 2, &[2.0, 2.0]), (1, 2, &[3.0, 3.0])],
        )
        .unwrap()
    }

    #[test]
    fn rejects_self_loops_and_excess_streams() {
        let e = DirectedNetwork::from_parts(&[Role::Macro, Role::Relay], &[1, 1], &[(0, 0, &[1.0])]);
        assert!(matches!(e, Err(Error::InvalidNetwork(_))));
        let e = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay],
            &[2, 1],
            &[(0, 1, &[2.0, 1.0])],
        );
        assert!(matches!(e, Err(Error::InvalidNetwork(_))));
        let e = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay],
            &[2, 2],
            &[(0, 1, &[1.0, 2.0])],
        );
        assert!(matches!(e, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn normalize_removes_arcs_into_macros() {
        let net = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay, Role::Relay],
            &[1, 1, 1],
            &[(0, 1, &[1.0]), (1, 0, &[1.0]), (1, 2, &[1.0])],
        )
        .unwrap();
        let n = net.normalize_downlink().unwrap();
        assert_eq!(n.links.len(), 2);
        assert!(!n.has_macro_in_links());
        assert_eq!(n.normalize_downlink().unwrap(), n);
    }

    #[test]
    fn normalize_reports_unreachable_relay() {
        let net = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay, Role::Relay],
            &[1, 1, 1],
            &[(0, 1, &[1.0]), (2, 0, &[1.0])],
        )
        .unwrap();
        assert_eq!(net.normalize_downlink(), Err(Error::UnreachableRelay(2)));
    }

    #[test]
    fn flags_parse_and_print() {
        let f: ModelFlags = "hd,pi,real".parse().unwrap();
        assert_eq!(f, ModelFlags::new(Duplex::HD, Interference::PI, Susm::REAL));
        assert_eq!(f.to_string().parse::<ModelFlags>().unwrap(), f);
        assert!("FD-NI".parse::<ModelFlags>().is_err());
    }

    #[test]
    fn document_round_trip_is_byte_stable() {
        let doc = NetworkDocument {
            flags: ModelFlags::default(),
            network: three_node(),
        };
        let text = doc.to_json();
        let back = NetworkDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn max_shape_detection() {
        assert!(three_node().is_max_shaped());
        let net = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay],
            &[2, 2],
            &[(0, 1, &[8.0, 6.0])],
        )
        .unwrap();
        assert!(!net.is_max_shaped());
    }
}
