use super::{DirectedNetwork, ModelFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SplitVertex {
    pub vertex: usize,
    pub index: usize,
}

/// Arc between split vertices. `stream` is set in the REAL model and `None`
/// in the MAX model, where an arc stands for any stream of its link.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedArc {
    pub tail: usize,
    pub head: usize,
    pub link: usize,
    pub stream: Option<usize>,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedNetwork {
    pub flags: ModelFlags,
    /// Split vertices, ordered by (vertex, index).
    pub splits: Vec<SplitVertex>,
    /// First split id of each original vertex.
    pub first_split: Vec<usize>,
    /// Number of split vertices of each original vertex.
    pub split_count: Vec<usize>,
    pub arcs: Vec<ExpandedArc>,
}

impl ExpandedNetwork {
    pub fn vertex_of(&self, split: usize) -> usize {
        self.splits[split].vertex
    }

    pub fn splits_of(&self, v: usize) -> std::ops::Range<usize> {
        self.first_split[v]..self.first_split[v] + self.split_count[v]
    }
}

/// Node-splitting expansion. In half duplex the RF count of a vertex is first
/// clamped to its larger stream degree, and links between vertices of equal
/// RF count only keep the diagonal arcs.
pub fn expand(net: &DirectedNetwork, flags: &ModelFlags) -> ExpandedNetwork {
    let n = net.vertices.len();
    let mut split_count: Vec<usize> = net.vertices.iter().map(|v| v.rf_chains as usize).collect();
    if flags.is_hd() {
        let (out, inn) = net.stream_degrees();
        for v in 0..n {
            split_count[v] = split_count[v].min(out[v].max(inn[v]));
        }
    }
    let mut first_split = Vec::with_capacity(n);
    let mut splits = Vec::new();
    for (v, &c) in split_count.iter().enumerate() {
        first_split.push(splits.len());
        splits.extend((0..c).map(|index| SplitVertex { vertex: v, index }));
    }
    let mut arcs = Vec::new();
    for (l, link) in net.links.iter().enumerate() {
        let (ru, rv) = (split_count[link.tail], split_count[link.head]);
        let diagonal = flags.is_hd() && ru == rv;
        let streams: Vec<Option<usize>> = if flags.is_max() {
            vec![None]
        } else {
            (0..link.streams()).map(Some).collect()
        };
        for stream in streams {
            let capacity = link.stream_capacities[stream.unwrap_or(0)];
            for i in 0..ru {
                for j in 0..rv {
                    if diagonal && i != j {
                        continue;
                    }
                    arcs.push(ExpandedArc {
                        tail: first_split[link.tail] + i,
                        head: first_split[link.head] + j,
                        link: l,
                        stream,
                        capacity,
                    });
                }
            }
        }
    }
    ExpandedNetwork {
        flags: *flags,
        splits,
        first_split,
        split_count,
        arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Duplex, Interference, Role, Susm};

    fn two(ru: u32, rv: u32, caps: &[f64]) -> DirectedNetwork {
        DirectedNetwork::from_parts(&[Role::Macro, Role::Relay], &[ru, rv], &[(0, 1, caps)]).unwrap()
    }

    #[test]
    fn fd_max_arc_count() {
        let net = two(2, 3, &[5.0, 5.0]);
        let x = expand(&net, &ModelFlags::new(Duplex::FD, Interference::NI, Susm::MAX));
        assert_eq!(x.arcs.len(), 6);
        assert_eq!(x.splits.len(), 5);
        assert!(x.arcs.iter().all(|a| a.link == 0 && a.stream.is_none()));
    }

    #[test]
    fn fd_real_arc_count() {
        let net = two(2, 3, &[5.0, 4.0]);
        let x = expand(&net, &ModelFlags::new(Duplex::FD, Interference::NI, Susm::REAL));
        assert_eq!(x.arcs.len(), 12);
        assert_eq!(x.arcs.iter().filter(|a| a.stream == Some(1)).count(), 6);
        assert!(x.arcs.iter().filter(|a| a.stream == Some(1)).all(|a| a.capacity == 4.0));
    }

    #[test]
    fn hd_equal_rf_is_diagonal() {
        let net = DirectedNetwork::from_parts(
            &[Role::Macro, Role::Relay, Role::Relay],
            &[2, 2, 2],
            &[(0, 1, &[1.0, 1.0]), (1, 2, &[1.0, 1.0])],
        )
        .unwrap();
        let x = expand(&net, &ModelFlags::new(Duplex::HD, Interference::NI, Susm::MAX));
        assert_eq!(x.arcs.len(), 4);
        assert!(x.arcs.iter().all(|a| x.splits[a.tail].index == x.splits[a.head].index));
    }

    #[test]
    fn hd_clamps_rf_to_degree() {
        let net = two(3, 1, &[1.0]);
        let x = expand(&net, &ModelFlags::new(Duplex::HD, Interference::NI, Susm::MAX));
        assert_eq!(x.split_count, vec![1, 1]);
        assert_eq!(x.arcs.len(), 1);
    }
}
