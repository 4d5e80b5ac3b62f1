//! Cost scoring on the layered network and Dijkstra extraction of the
//! defender path.
//!
//! Each layered node `n` gets
//!
//! * an exact cost `g(n)`: the attacker probability mass located at `n`, with
//!   exit copies accumulating mass forward in time from the earliest attacker
//!   exit; nodes that carry no mass get `g = INF`;
//! * a heuristic `h(n)`: for exit copies from the earliest attacker exit on,
//!   the exit mass still to arrive (`g(exit @ t_max) - g(exit @ k)`); every
//!   other node takes the largest `h` among its successors;
//! * `f(n) = g(n) + h(n)`.
//!
//! An edge into `n` weighs `max(0, 1 - f(n))`, or is blocked when `f(n)` is
//! infinite. The defender path is the cheapest unblocked path from its start
//! at layer 0 to an exit copy in the last layer.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::evaluator::{collapse_path, intercepts, utility, DefenderSchedule};
use crate::network::{Network, NodeId};
use crate::strategies::{AttackerStrategy, MixedStrategy};
use crate::timexp::{LayeredNetwork, LayeredNode};

pub const INF: f64 = f64::INFINITY;

/// Path costs closer than this are treated as tied.
const COST_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("no attacker probability mass to interdict")]
    EmptyMix,
    #[error("node {0} is not a police start")]
    NotAPoliceStart(NodeId),
    #[error("no defender list given")]
    NoStarts,
    #[error("NO_PATH: no unblocked path from {start} at time 0 to an exit at the horizon")]
    NoPath { start: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    g: Vec<f64>,
    h: Vec<f64>,
    min_t_index: u32,
}

/// `(g, h, f)` for one layered node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCost {
    pub g: f64,
    pub h: f64,
    pub f: f64,
}

impl CostTable {
    pub fn g(&self, idx: usize) -> f64 {
        self.g[idx]
    }

    pub fn h(&self, idx: usize) -> f64 {
        self.h[idx]
    }

    pub fn f(&self, idx: usize) -> f64 {
        self.g[idx] + self.h[idx]
    }

    pub fn min_t_index(&self) -> u32 {
        self.min_t_index
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn at(&self, layered: &LayeredNetwork, node: LayeredNode) -> Option<NodeCost> {
        let i = layered.index_of(node)?;
        Some(NodeCost {
            g: self.g(i),
            h: self.h(i),
            f: self.f(i),
        })
    }

    pub fn with_heuristics(mut self, h: Vec<f64>) -> Self {
        assert_eq!(h.len(), self.g.len());
        self.h = h;
        self
    }
}

/// Exact costs with `h = 0`; see the module docs for the accumulation rule.
pub fn compute_exact_costs(layered: &LayeredNetwork, mix: &MixedStrategy) -> Result<CostTable, PlanError> {
    exact_costs_from_masses(layered, mix.strategies(), mix.probs())
}

/// As [`compute_exact_costs`], but with arbitrary non-negative per-strategy
/// masses. Strategies with zero mass are ignored entirely.
pub fn exact_costs_from_masses(
    layered: &LayeredNetwork,
    strategies: &[AttackerStrategy],
    masses: &[f64],
) -> Result<CostTable, PlanError> {
    let n = layered.node_count();
    let w = layered.width();
    let t_max = layered.t_max();
    let mut g = vec![0.0; n];

    let live = || strategies.iter().zip(masses.iter().copied()).filter(|(_, m)| *m > 0.0);
    for (a, mass) in live() {
        for st in &a.states {
            if let Some(i) = layered.index_of(LayeredNode::new(st.v, st.t)) {
                g[i] += mass;
            }
        }
    }

    // separate pass: the earliest exit over every strategy, before any accumulation
    let min_t_index = live()
        .flat_map(|(a, _)| a.states.iter())
        .filter(|st| {
            layered
                .index_of(LayeredNode::new(st.v, 0))
                .is_some_and(|i| layered.is_exit_copy(i))
        })
        .map(|st| st.t)
        .min()
        .ok_or(PlanError::EmptyMix)?;

    for col in (0..w).filter(|&c| layered.is_exit_copy(c)) {
        for i in min_t_index..t_max {
            let (cur, next) = (i as usize * w + col, (i as usize + 1) * w + col);
            g[next] += g[cur];
        }
    }
    for x in g.iter_mut().filter(|x| **x == 0.0) {
        *x = INF;
    }
    Ok(CostTable {
        g,
        h: vec![0.0; n],
        min_t_index,
    })
}

/// Heuristic costs for every layered node, given exact costs.
pub fn compute_heuristics(layered: &LayeredNetwork, costs: &CostTable) -> Vec<f64> {
    let w = layered.width();
    let t_max = layered.t_max() as usize;
    let min_t = costs.min_t_index as usize;
    let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
    let mut h = vec![0.0; layered.node_count()];

    for t in (0..=t_max).rev() {
        for col in 0..w {
            let idx = t * w + col;
            h[idx] = if layered.is_exit_copy(idx) && t >= min_t {
                finite(costs.g[t_max * w + col]) - finite(costs.g[idx])
            } else {
                layered.successors(idx).map(|s| h[s]).fold(0.0, f64::max)
            };
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EdgeWeight {
    Cost(f64),
    Blocked,
}

impl EdgeWeight {
    pub fn cost(self) -> Option<f64> {
        match self {
            EdgeWeight::Cost(c) => Some(c),
            EdgeWeight::Blocked => None,
        }
    }
}

/// One weight per entry of [`LayeredNetwork::edges`].
pub fn assign_weights(layered: &LayeredNetwork, costs: &CostTable) -> Vec<EdgeWeight> {
    layered
        .edges()
        .iter()
        .map(|e| {
            let f = costs.f(e.to);
            if f.is_finite() {
                EdgeWeight::Cost((1.0 - f).max(0.0))
            } else {
                EdgeWeight::Blocked
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    hops: usize,
    path: Vec<usize>,
}

/// Shortest-path order: cost, then edge count, then the `(t, v)` sequence.
fn label_cmp(layered: &LayeredNetwork, a: &Label, b: &Label) -> Ordering {
    if (a.cost - b.cost).abs() > COST_EPS {
        return a.cost.total_cmp(&b.cost);
    }
    a.hops.cmp(&b.hops).then_with(|| {
        let key = |p: &[usize]| -> Vec<(u32, NodeId)> {
            p.iter()
                .map(|&i| {
                    let n = layered.node(i);
                    (n.t, n.v)
                })
                .collect()
        };
        key(&a.path).cmp(&key(&b.path))
    })
}

struct HeapEntry {
    cost: f64,
    hops: usize,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra from `source` over unblocked edges; returns the best label per node.
fn dijkstra(layered: &LayeredNetwork, weights: &[EdgeWeight], source: usize) -> Vec<Option<Label>> {
    let mut best: Vec<Option<Label>> = vec![None; layered.node_count()];
    let mut settled = vec![false; layered.node_count()];
    best[source] = Some(Label {
        cost: 0.0,
        hops: 0,
        path: vec![source],
    });
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        cost: 0.0,
        hops: 0,
        node: source,
    });
    while let Some(HeapEntry { node, .. }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        let here = best[node].clone().expect("queued nodes have labels");
        for &e in layered.outgoing(node) {
            let Some(w) = weights[e].cost() else { continue };
            let to = layered.edges()[e].to;
            if settled[to] {
                continue;
            }
            let mut path = here.path.clone();
            path.push(to);
            let cand = Label {
                cost: here.cost + w,
                hops: here.hops + 1,
                path,
            };
            let improves = best[to]
                .as_ref()
                .is_none_or(|cur| label_cmp(layered, &cand, cur) == Ordering::Less);
            if improves {
                heap.push(HeapEntry {
                    cost: cand.cost,
                    hops: cand.hops,
                    node: to,
                });
                best[to] = Some(cand);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    #[serde(serialize_with = "ser_layered_path")]
    pub layered_path: Vec<LayeredNode>,
    #[serde(serialize_with = "ser_schedule")]
    pub schedule: DefenderSchedule,
    pub path_cost: f64,
    pub proxy_utility: f64,
    pub evaluated_utility: f64,
}

fn ser_layered_path<S: serde::Serializer>(p: &[LayeredNode], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(|n| n.to_string()))
}

fn ser_schedule<S: serde::Serializer>(d: &DefenderSchedule, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(d.to_triples())
}

impl PlanResult {
    /// Layered path in `t_v` notation, e.g. `0_6, 2_3, 4_5`.
    pub fn path_string(&self) -> String {
        self.layered_path
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Full cost table (exact + heuristic) for the given masses.
pub fn cost_table(
    layered: &LayeredNetwork,
    strategies: &[AttackerStrategy],
    masses: &[f64],
) -> Result<CostTable, PlanError> {
    let exact = exact_costs_from_masses(layered, strategies, masses)?;
    let h = compute_heuristics(layered, &exact);
    Ok(exact.with_heuristics(h))
}

fn plan_with_masses(
    layered: &LayeredNetwork,
    mix: &MixedStrategy,
    masses: &[f64],
    start: NodeId,
) -> Result<PlanResult, PlanError> {
    let costs = cost_table(layered, mix.strategies(), masses)?;
    let weights = assign_weights(layered, &costs);
    let source = layered
        .index_of(LayeredNode::new(start, 0))
        .ok_or(PlanError::NotAPoliceStart(start))?;
    let labels = dijkstra(layered, &weights, source);
    let best = layered
        .final_exits()
        .filter_map(|i| labels[i].as_ref())
        .min_by(|a, b| label_cmp(layered, a, b))
        .ok_or(PlanError::NoPath { start })?;

    let layered_path: Vec<LayeredNode> = best.path.iter().map(|&i| layered.node(i)).collect();
    let schedule = collapse_path(&layered_path);
    let evaluated_utility = utility(std::slice::from_ref(&schedule), mix);
    Ok(PlanResult {
        layered_path,
        schedule,
        path_cost: best.cost,
        proxy_utility: (1.0 - best.cost).clamp(0.0, 1.0),
        evaluated_utility,
    })
}

/// Plan one defender starting at `start` against the whole mix.
pub fn plan_defender(
    net: &Network,
    layered: &LayeredNetwork,
    mix: &MixedStrategy,
    start: NodeId,
) -> Result<PlanResult, PlanError> {
    if !net.police().contains(&start) {
        return Err(PlanError::NotAPoliceStart(start));
    }
    plan_with_masses(layered, mix, mix.probs(), start)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPlan {
    /// `None` where a defender had no unblocked path (it contributes nothing).
    pub plans: Vec<Option<PlanResult>>,
    pub combined_utility: f64,
}

impl MultiPlan {
    pub fn schedules(&self) -> Vec<DefenderSchedule> {
        self.plans
            .iter()
            .map(|p| p.as_ref().map(|p| p.schedule.clone()).unwrap_or_default())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Greedy sequential planning: each defender plans against the mass left
/// uncaught by the defenders before it.
pub fn plan_multi(
    net: &Network,
    layered: &LayeredNetwork,
    mix: &MixedStrategy,
    starts: &[NodeId],
) -> Result<MultiPlan, PlanError> {
    if starts.is_empty() {
        return Err(PlanError::NoStarts);
    }
    if let Some(&bad) = starts.iter().find(|s| !net.police().contains(s)) {
        return Err(PlanError::NotAPoliceStart(bad));
    }
    let mut masses = mix.probs().to_vec();
    let mut plans = Vec::with_capacity(starts.len());
    for &start in starts {
        match plan_with_masses(layered, mix, &masses, start) {
            Ok(plan) => {
                for (k, a) in mix.strategies().iter().enumerate() {
                    if intercepts(&plan.schedule, a) {
                        masses[k] = 0.0;
                    }
                }
                plans.push(Some(plan));
            }
            Err(PlanError::NoPath { .. }) | Err(PlanError::EmptyMix) => plans.push(None),
            Err(e) => return Err(e),
        }
    }
    let scheds: Vec<DefenderSchedule> = plans.iter().flatten().map(|p| p.schedule.clone()).collect();
    Ok(MultiPlan {
        combined_utility: utility(&scheds, mix),
        plans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{parse_network, Edge};
    use crate::timexp::build_layered;
    use crate::{FIXTURE_NETWORK, FIXTURE_STRATEGIES};

    fn fixture() -> (Network, LayeredNetwork, MixedStrategy) {
        let net = parse_network(FIXTURE_NETWORK).unwrap();
        let mix = MixedStrategy::from_json(&net, FIXTURE_STRATEGIES).unwrap();
        (net.clone(), build_layered(&net), mix)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn exact_costs_on_fixture() {
        let (_, l, mix) = fixture();
        let c = compute_exact_costs(&l, &mix).unwrap();
        let g = |v, t| c.at(&l, LayeredNode::new(v, t)).unwrap().g;
        assert_eq!(c.min_t_index(), 4);
        assert!(close(g(2, 2), 0.4));
        assert!(close(g(5, 5), 0.6));
        assert!(close(g(5, 6), 1.0));
        assert_eq!(g(6, 0), INF);
    }

    #[test]
    fn heuristics_on_fixture() {
        let (_, l, mix) = fixture();
        let exact = compute_exact_costs(&l, &mix).unwrap();
        let c = exact.clone().with_heuristics(compute_heuristics(&l, &exact));
        let h = |v, t| c.at(&l, LayeredNode::new(v, t)).unwrap().h;
        assert!(close(h(3, 2), 0.7));
        assert!(close(h(4, 4), 0.4));
        assert!(close(h(5, 6), 0.0));
        assert!(close(h(2, 2), 0.0));
    }

    #[test]
    fn weights_on_fixture() {
        let (_, l, mix) = fixture();
        let c = cost_table(&l, mix.strategies(), mix.probs()).unwrap();
        let w = assign_weights(&l, &c);
        let (a, b) = (
            l.index_of(LayeredNode::new(6, 0)).unwrap(),
            l.index_of(LayeredNode::new(3, 2)).unwrap(),
        );
        let e = l.outgoing(a).iter().copied().find(|&e| l.edges()[e].to == b).unwrap();
        assert!(close(w[e].cost().unwrap(), 0.0));
        for (k, edge) in l.edges().iter().enumerate() {
            if c.g(edge.to).is_infinite() {
                assert_eq!(w[k], EdgeWeight::Blocked);
            }
        }
    }

    #[test]
    fn weight_clamps_at_zero() {
        // Both strategies pass 2 at time 1 (g = 1.0) and one of them still has
        // exit mass ahead of it, so f(2@1) = 1.0 + 0.5.
        let net = Network::new(
            [1, 2, 3, 4],
            [
                Edge {
                    src: 1,
                    dst: 2,
                    length: 1,
                },
                Edge {
                    src: 2,
                    dst: 3,
                    length: 1,
                },
                Edge {
                    src: 2,
                    dst: 4,
                    length: 1,
                },
                Edge {
                    src: 4,
                    dst: 3,
                    length: 1,
                },
            ],
            1,
            vec![1],
            vec![3],
            4,
        )
        .unwrap();
        let mix = MixedStrategy::validated(
            &net,
            vec![
                AttackerStrategy::from_pairs(&[(1, 0), (2, 1), (3, 2)]),
                AttackerStrategy::from_pairs(&[(1, 0), (2, 1), (4, 2), (3, 3)]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let l = build_layered(&net);
        let c = cost_table(&l, mix.strategies(), mix.probs()).unwrap();
        let m = l.index_of(LayeredNode::new(2, 1)).unwrap();
        assert!(close(c.g(m), 1.0));
        assert!(close(c.h(m), 0.5));
        assert!(close(c.f(m), 1.5));
        let w = assign_weights(&l, &c);
        let into: Vec<_> = l
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.to == m)
            .map(|(k, _)| w[k])
            .collect();
        assert_eq!(into, vec![EdgeWeight::Cost(0.0)]);
    }

    #[test]
    fn plan_on_fixture() {
        let (net, l, mix) = fixture();
        let p = plan_defender(&net, &l, &mix, 6).unwrap();
        assert_eq!(p.path_string(), "0_6, 2_3, 4_5, 5_5, 6_5");
        assert_eq!(p.schedule.to_triples(), vec![(6, 0, 0), (3, 2, 2), (5, 4, 6)]);
        assert_eq!(p.evaluated_utility, 1.0);
        assert!(close(p.path_cost, 0.0));
        assert!(close(p.proxy_utility, 1.0));
        assert_eq!(p, plan_defender(&net, &l, &mix, 6).unwrap());
    }

    #[test]
    fn unreachable_mass_is_no_path() {
        // the police at 4 cannot reach anything the attacker touches
        let net = Network::new(
            [1, 2, 3, 4],
            [
                Edge {
                    src: 1,
                    dst: 2,
                    length: 1,
                },
                Edge {
                    src: 4,
                    dst: 3,
                    length: 1,
                },
            ],
            1,
            vec![4],
            vec![2],
            3,
        )
        .unwrap();
        let mix =
            MixedStrategy::validated(&net, vec![AttackerStrategy::from_pairs(&[(1, 0), (2, 1)])], vec![1.0]).unwrap();
        let l = build_layered(&net);
        assert_eq!(plan_defender(&net, &l, &mix, 4), Err(PlanError::NoPath { start: 4 }));
        assert_eq!(plan_defender(&net, &l, &mix, 1), Err(PlanError::NotAPoliceStart(1)));
    }

    #[test]
    fn multi_with_single_start_matches_single() {
        let (net, l, mix) = fixture();
        let multi = plan_multi(&net, &l, &mix, &[6]).unwrap();
        let single = plan_defender(&net, &l, &mix, 6).unwrap();
        assert_eq!(multi.plans, vec![Some(single)]);
        assert_eq!(multi.combined_utility, 1.0);
    }

    #[test]
    fn second_defender_after_full_interception() {
        let net = parse_network(&FIXTURE_NETWORK.replace("\"police\": [6]", "\"police\": [6, 6]")).unwrap();
        let mix = MixedStrategy::from_json(&net, FIXTURE_STRATEGIES).unwrap();
        let l = build_layered(&net);
        let multi = plan_multi(&net, &l, &mix, &[6, 6]).unwrap();
        assert!(multi.plans[1].is_none());
        assert_eq!(multi.combined_utility, 1.0);
    }

    #[test]
    fn empty_start_list() {
        let (net, l, mix) = fixture();
        assert_eq!(plan_multi(&net, &l, &mix, &[]), Err(PlanError::NoStarts));
    }
}
