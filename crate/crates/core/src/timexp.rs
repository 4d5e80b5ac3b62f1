//! Time-expanded (multi-layer) network.
//!
//! Layer `t` holds one copy of every road node for `t = 0..=t_max`. A road
//! edge `S -> T` of length `L` becomes the travel edges `(S, j) -> (T, j + L)`
//! for every `j <= t_max - L`, and each exit node gets a wait chain
//! `(e, i) -> (e, i + 1)` up to the last layer. Every edge moves strictly
//! forward in time, so layer order is a topological order.

use std::fmt;

use crate::network::{Network, NodeId};

/// Node `v` at time `t`. Displays as `t_v`, so node 6 at time 0 is `0_6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayeredNode {
    pub v: NodeId,
    pub t: u32,
}

impl LayeredNode {
    pub fn new(v: NodeId, t: u32) -> Self {
        Self { v, t }
    }
}

impl fmt::Display for LayeredNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.t, self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Travel,
    Wait,
}

/// Edge between dense layered-node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayeredEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct LayeredNetwork {
    node_ids: Vec<NodeId>,
    is_exit: Vec<bool>,
    t_max: u32,
    edges: Vec<LayeredEdge>,
    outgoing: Vec<Vec<usize>>,
}

impl LayeredNetwork {
    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    pub fn layer_count(&self) -> usize {
        self.t_max as usize + 1
    }

    /// Road nodes per layer.
    pub fn width(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_count(&self) -> usize {
        self.width() * self.layer_count()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    /// Dense index of `node`; indices are grouped by layer, then by node id.
    pub fn index_of(&self, node: LayeredNode) -> Option<usize> {
        if node.t > self.t_max {
            return None;
        }
        let col = self.node_ids.binary_search(&node.v).ok()?;
        Some(node.t as usize * self.width() + col)
    }

    pub fn node(&self, idx: usize) -> LayeredNode {
        let w = self.width();
        LayeredNode {
            v: self.node_ids[idx % w],
            t: (idx / w) as u32,
        }
    }

    pub fn is_exit_copy(&self, idx: usize) -> bool {
        self.is_exit[idx % self.width()]
    }

    pub fn edges(&self) -> &[LayeredEdge] {
        &self.edges
    }

    pub fn travel_edges(&self) -> impl Iterator<Item = &LayeredEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Travel)
    }

    pub fn wait_edges(&self) -> impl Iterator<Item = &LayeredEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Wait)
    }

    /// Indices into [`LayeredNetwork::edges`] leaving `idx`.
    pub fn outgoing(&self, idx: usize) -> &[usize] {
        &self.outgoing[idx]
    }

    pub fn successors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing[idx].iter().map(move |&e| self.edges[e].to)
    }

    pub fn has_edge(&self, from: LayeredNode, to: LayeredNode) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.successors(a).any(|s| s == b),
            _ => false,
        }
    }

    /// Exit copies in the last layer.
    pub fn final_exits(&self) -> impl Iterator<Item = usize> + '_ {
        let base = self.t_max as usize * self.width();
        (0..self.width())
            .filter(move |&c| self.is_exit[c])
            .map(move |c| base + c)
    }
}

pub fn build_layered(net: &Network) -> LayeredNetwork {
    let node_ids = net.nodes().to_vec();
    let width = node_ids.len();
    let t_max = net.t_max();
    let is_exit: Vec<bool> = node_ids.iter().map(|&v| net.is_exit(v)).collect();
    let at = |col: usize, t: u32| t as usize * width + col;

    let mut edges = Vec::new();
    for e in net.edges() {
        if e.length > t_max {
            continue;
        }
        let (s, d) = (net.index_of(e.src).unwrap(), net.index_of(e.dst).unwrap());
        for j in 0..=t_max - e.length {
            edges.push(LayeredEdge {
                from: at(s, j),
                to: at(d, j + e.length),
                kind: EdgeKind::Travel,
            });
        }
    }
    for (col, _) in is_exit.iter().enumerate().filter(|(_, &x)| x) {
        for i in 0..t_max {
            edges.push(LayeredEdge {
                from: at(col, i),
                to: at(col, i + 1),
                kind: EdgeKind::Wait,
            });
        }
    }

    let mut outgoing = vec![Vec::new(); width * (t_max as usize + 1)];
    for (k, e) in edges.iter().enumerate() {
        outgoing[e.from].push(k);
    }
    LayeredNetwork {
        node_ids,
        is_exit,
        t_max,
        edges,
        outgoing,
    }
}
