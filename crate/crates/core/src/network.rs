//! Road network model, network-file I/O and all-pairs travel times.
//!
//! A network file is a JSON object:
//!
//! ```json
//! {
//!   "nodes": [1, 2, 3],
//!   "edges": [[1, 2, 2], [2, 3, 1]],
//!   "crime": 1,
//!   "police": [2],
//!   "exits": [3],
//!   "tmax": 4
//! }
//! ```
//!
//! `edges` entries are `[src, dst, length]` with directed, integer travel
//! times of at least one unit. Unknown keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub length: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("node {0} is listed more than once")]
    DuplicateNode(NodeId),
    #[error("{role} refers to unknown node {node}")]
    UnknownNode { role: &'static str, node: NodeId },
    #[error("edge {src}->{dst}: edge length must be >= 1")]
    ZeroLength { src: NodeId, dst: NodeId },
    #[error("edge {0}->{0}: self-loops are not allowed")]
    SelfLoop(NodeId),
    #[error("duplicate edge {src}->{dst}")]
    DuplicateEdge { src: NodeId, dst: NodeId },
    #[error("crime node {0} must not be an exit node")]
    CrimeIsExit(NodeId),
    #[error("exit node {0} is listed more than once")]
    DuplicateExit(NodeId),
    #[error("network needs at least one exit node")]
    NoExits,
    #[error("network needs at least one police start")]
    NoPolice,
    #[error("time horizon tmax must be >= 1")]
    ZeroHorizon,
}

/// A validated road network. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    edges: Vec<Edge>,
    crime: NodeId,
    police: Vec<NodeId>,
    exits: Vec<NodeId>,
    t_max: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId, u32)>,
    crime: NodeId,
    police: Vec<NodeId>,
    exits: Vec<NodeId>,
    tmax: u32,
}

impl Network {
    /// Validate and build a network. Node ids are stored in ascending order.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = Edge>,
        crime: NodeId,
        police: Vec<NodeId>,
        exits: Vec<NodeId>,
        t_max: u32,
    ) -> Result<Self, NetworkError> {
        let mut seen = BTreeSet::new();
        for v in nodes {
            if !seen.insert(v) {
                return Err(NetworkError::DuplicateNode(v));
            }
        }
        let nodes: Vec<NodeId> = seen.into_iter().collect();
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let known = |role: &'static str, node: NodeId| {
            if index.contains_key(&node) {
                Ok(())
            } else {
                Err(NetworkError::UnknownNode { role, node })
            }
        };

        let mut edge_list = Vec::new();
        let mut pairs = BTreeSet::new();
        for e in edges {
            known("edge source", e.src)?;
            known("edge target", e.dst)?;
            if e.length == 0 {
                return Err(NetworkError::ZeroLength { src: e.src, dst: e.dst });
            }
            if e.src == e.dst {
                return Err(NetworkError::SelfLoop(e.src));
            }
            if !pairs.insert((e.src, e.dst)) {
                return Err(NetworkError::DuplicateEdge { src: e.src, dst: e.dst });
            }
            edge_list.push(e);
        }

        known("crime", crime)?;
        if police.is_empty() {
            return Err(NetworkError::NoPolice);
        }
        for &p in &police {
            known("police", p)?;
        }
        if exits.is_empty() {
            return Err(NetworkError::NoExits);
        }
        let mut exit_set = BTreeSet::new();
        for &x in &exits {
            known("exit", x)?;
            if !exit_set.insert(x) {
                return Err(NetworkError::DuplicateExit(x));
            }
        }
        if exit_set.contains(&crime) {
            return Err(NetworkError::CrimeIsExit(crime));
        }
        if t_max == 0 {
            return Err(NetworkError::ZeroHorizon);
        }

        Ok(Network {
            nodes,
            index,
            edges: edge_list,
            crime,
            police,
            exits,
            t_max,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Dense position of `v` in [`Network::nodes`].
    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, src: NodeId, dst: NodeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.src == src && e.dst == dst)
    }

    pub fn out_edges(&self, src: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == src)
    }

    pub fn crime(&self) -> NodeId {
        self.crime
    }

    pub fn police(&self) -> &[NodeId] {
        &self.police
    }

    pub fn exits(&self) -> &[NodeId] {
        &self.exits
    }

    pub fn is_exit(&self, v: NodeId) -> bool {
        self.exits.contains(&v)
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    /// Serialize to the network-file format.
    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|e| (e.src, e.dst, e.length)).collect(),
            crime: self.crime,
            police: self.police.clone(),
            exits: self.exits.clone(),
            tmax: self.t_max,
        };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }
}

/// Parse and validate network-file content.
pub fn parse_network(text: &str) -> Result<Network, NetworkError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| NetworkError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Network::new(
        file.nodes,
        file.edges
            .into_iter()
            .map(|(src, dst, length)| Edge { src, dst, length }),
        file.crime,
        file.police,
        file.exits,
        file.tmax,
    )
}

/// Shortest travel times between every ordered pair of nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    index: BTreeMap<NodeId, usize>,
    n: usize,
    dist: Vec<Option<u32>>,
}

impl DistanceMatrix {
    /// Shortest travel time from `u` to `v`, `None` when unreachable or unknown.
    pub fn get(&self, u: NodeId, v: NodeId) -> Option<u32> {
        let (i, j) = (*self.index.get(&u)?, *self.index.get(&v)?);
        self.dist[i * self.n + j]
    }

    pub fn by_index(&self, i: usize, j: usize) -> Option<u32> {
        self.dist[i * self.n + j]
    }
}

impl fmt::Display for DistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<NodeId> = self.index.keys().copied().collect();
        for (i, u) in ids.iter().enumerate() {
            write!(f, "{u}:")?;
            for j in 0..self.n {
                match self.dist[i * self.n + j] {
                    Some(d) => write!(f, " {d}")?,
                    None => write!(f, " -")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Floyd-Warshall over the directed edge set.
pub fn all_pairs_shortest(net: &Network) -> DistanceMatrix {
    let n = net.node_count();
    let mut dist: Vec<Option<u32>> = vec![None; n * n];
    for i in 0..n {
        dist[i * n + i] = Some(0);
    }
    for e in net.edges() {
        let (i, j) = (net.index[&e.src], net.index[&e.dst]);
        let cell = &mut dist[i * n + j];
        *cell = Some(cell.map_or(e.length, |d| d.min(e.length)));
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = dist[i * n + k] else { continue };
            for j in 0..n {
                if let Some(kj) = dist[k * n + j] {
                    let via = ik + kj;
                    let cell = &mut dist[i * n + j];
                    if cell.is_none_or(|d| via < d) {
                        *cell = Some(via);
                    }
                }
            }
        }
    }
    DistanceMatrix {
        index: net.index.clone(),
        n,
        dist,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FIXTURE_NETWORK;
    use proptest::prelude::*;

    fn fixture() -> Network {
        parse_network(FIXTURE_NETWORK).unwrap()
    }

    #[test]
    fn parses_fixture() {
        let net = fixture();
        assert_eq!(net.node_count(), 6);
        assert_eq!(net.edges().len(), 7);
        assert_eq!(net.crime(), 1);
        assert_eq!(net.police(), &[6]);
        assert_eq!(net.exits(), &[5]);
        assert_eq!(net.t_max(), 6);
    }

    #[test]
    fn crime_on_exit_rejected() {
        let text = r#"{"nodes":[1],"edges":[],"crime":1,"police":[1],"exits":[1],"tmax":3}"#;
        assert_eq!(parse_network(text), Err(NetworkError::CrimeIsExit(1)));
    }

    #[test]
    fn zero_length_rejected() {
        let text = r#"{"nodes":[1,2],"edges":[[1,2,0]],"crime":1,"police":[1],"exits":[2],"tmax":3}"#;
        assert_eq!(parse_network(text), Err(NetworkError::ZeroLength { src: 1, dst: 2 }));
    }

    #[test]
    fn structural_errors() {
        let dup = r#"{"nodes":[1,2],"edges":[[1,2,1],[1,2,3]],"crime":1,"police":[1],"exits":[2],"tmax":3}"#;
        assert_eq!(parse_network(dup), Err(NetworkError::DuplicateEdge { src: 1, dst: 2 }));
        let unknown = r#"{"nodes":[1,2],"edges":[[1,9,1]],"crime":1,"police":[1],"exits":[2],"tmax":3}"#;
        assert_eq!(
            parse_network(unknown),
            Err(NetworkError::UnknownNode {
                role: "edge target",
                node: 9
            })
        );
        let lp = r#"{"nodes":[1,2],"edges":[[1,1,1]],"crime":1,"police":[1],"exits":[2],"tmax":3}"#;
        assert_eq!(parse_network(lp), Err(NetworkError::SelfLoop(1)));
        let extra = r#"{"nodes":[1,2],"edges":[],"crime":1,"police":[1],"exits":[2],"tmax":3,"x":1}"#;
        assert!(matches!(parse_network(extra), Err(NetworkError::Syntax { .. })));
        let bad = "{\n\"nodes\": [1,\n";
        match parse_network(bad) {
            Err(NetworkError::Syntax { line, .. }) => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixture_distances() {
        let d = all_pairs_shortest(&fixture());
        assert_eq!(d.get(6, 3), Some(2));
        assert_eq!(d.get(6, 5), Some(4));
        assert_eq!(d.get(1, 5), Some(4));
        assert_eq!(d.get(5, 1), None);
        for &v in fixture().nodes() {
            assert_eq!(d.get(v, v), Some(0));
        }
    }

    /// Exhaustive simple-path enumeration; positive edge lengths make simple paths sufficient.
    fn brute_force_dist(net: &Network, from: NodeId, to: NodeId) -> Option<u32> {
        fn walk(net: &Network, at: NodeId, to: NodeId, cost: u32, seen: &mut Vec<NodeId>, best: &mut Option<u32>) {
            if at == to {
                *best = Some(best.map_or(cost, |b| b.min(cost)));
                return;
            }
            for e in net.out_edges(at) {
                if !seen.contains(&e.dst) {
                    seen.push(e.dst);
                    walk(net, e.dst, to, cost + e.length, seen, best);
                    seen.pop();
                }
            }
        }
        let mut best = None;
        walk(net, from, to, 0, &mut vec![from], &mut best);
        best
    }

    fn small_network() -> impl Strategy<Value = Network> {
        (2usize..=6)
            .prop_flat_map(|n| {
                let pairs: Vec<(u32, u32)> = (1..=n as u32)
                    .flat_map(|a| (1..=n as u32).map(move |b| (a, b)))
                    .filter(|(a, b)| a != b)
                    .collect();
                (
                    Just(n),
                    proptest::collection::vec((any::<bool>(), 1u32..5), pairs.len()),
                    Just(pairs),
                )
            })
            .prop_map(|(n, picks, pairs)| {
                let edges = pairs
                    .iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|(&(src, dst), (_, length))| Edge { src, dst, length });
                Network::new(1..=n as u32, edges, 1, vec![1], vec![n as u32], 6).unwrap()
            })
    }

    proptest! {
        #[test]
        fn shortest_matches_enumeration(net in small_network()) {
            let d = all_pairs_shortest(&net);
            for &u in net.nodes() {
                for &v in net.nodes() {
                    prop_assert_eq!(d.get(u, v), brute_force_dist(&net, u, v));
                }
            }
            prop_assert_eq!(&d, &all_pairs_shortest(&net));
        }

        #[test]
        fn json_round_trip(net in small_network()) {
            let back = parse_network(&net.to_json()).unwrap();
            prop_assert_eq!(back, net);
        }

        #[test]
        fn triangle_inequality(net in small_network()) {
            let d = all_pairs_shortest(&net);
            for &u in net.nodes() {
                for &v in net.nodes() {
                    for &w in net.nodes() {
                        if let (Some(uv), Some(vw), Some(uw)) = (d.get(u, v), d.get(v, w), d.get(u, w)) {
                            prop_assert!(uw <= uv + vw);
                        }
                    }
                }
            }
        }
    }
}
