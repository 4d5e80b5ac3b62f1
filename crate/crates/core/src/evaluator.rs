//! Interception semantics, defender utility and the exhaustive oracle.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::network::{all_pairs_shortest, DistanceMatrix, Network, NodeId};
use crate::strategies::{AttackerStrategy, MixedStrategy};
use crate::timexp::LayeredNode;

/// Defender occupies `v` during the closed interval `[t_in, t_out]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefenderState {
    pub v: NodeId,
    pub t_in: u32,
    pub t_out: u32,
}

impl DefenderState {
    pub fn new(v: NodeId, t_in: u32, t_out: u32) -> Self {
        Self { v, t_in, t_out }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefenderSchedule {
    pub states: Vec<DefenderState>,
}

impl DefenderSchedule {
    pub fn from_triples(triples: &[(NodeId, u32, u32)]) -> Self {
        Self {
            states: triples.iter().map(|&(v, a, b)| DefenderState::new(v, a, b)).collect(),
        }
    }

    pub fn to_triples(&self) -> Vec<(NodeId, u32, u32)> {
        self.states.iter().map(|s| (s.v, s.t_in, s.t_out)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

impl fmt::Display for DefenderSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({},{},{})", s.v, s.t_in, s.t_out)?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule is empty")]
    Empty,
    #[error("schedule starts at {found}, expected {expected} at time 0")]
    WrongStart { expected: NodeId, found: NodeId },
    #[error("state {0} has an invalid interval")]
    BadInterval(usize),
    #[error("state {0} cannot be reached in time from the previous state")]
    TooFast(usize),
    #[error("state {0} refers to an unknown node")]
    UnknownNode(usize),
}

/// Check the schedule invariants: intervals inside the horizon, first state at
/// `start` from time 0, and enough travel time between consecutive states.
pub fn check_schedule(
    net: &Network,
    dist: &DistanceMatrix,
    start: NodeId,
    sched: &DefenderSchedule,
) -> Result<(), ScheduleError> {
    let first = sched.states.first().ok_or(ScheduleError::Empty)?;
    if first.v != start || first.t_in != 0 {
        return Err(ScheduleError::WrongStart {
            expected: start,
            found: first.v,
        });
    }
    for (i, s) in sched.states.iter().enumerate() {
        if !net.contains(s.v) {
            return Err(ScheduleError::UnknownNode(i));
        }
        if s.t_in > s.t_out || s.t_out > net.t_max() {
            return Err(ScheduleError::BadInterval(i));
        }
    }
    for (i, w) in sched.states.windows(2).enumerate() {
        match dist.get(w[0].v, w[1].v) {
            Some(d) if w[1].t_in >= w[0].t_out + d => {}
            _ => return Err(ScheduleError::TooFast(i + 1)),
        }
    }
    Ok(())
}

/// Merge runs of the same road node (wait-chain traversal) into one state.
pub fn collapse_path(path: &[LayeredNode]) -> DefenderSchedule {
    let mut states: Vec<DefenderState> = Vec::new();
    for n in path {
        match states.last_mut() {
            Some(last) if last.v == n.v => last.t_out = n.t,
            _ => states.push(DefenderState::new(n.v, n.t, n.t)),
        }
    }
    DefenderSchedule { states }
}

pub fn intercepts(sched: &DefenderSchedule, strat: &AttackerStrategy) -> bool {
    sched.states.iter().any(|d| {
        strat
            .states
            .iter()
            .any(|a| a.v == d.v && d.t_in <= a.t && a.t <= d.t_out)
    })
}

/// Probability mass of attacker strategies caught by at least one schedule.
pub fn utility(scheds: &[DefenderSchedule], mix: &MixedStrategy) -> f64 {
    mix.iter()
        .filter(|(a, _)| scheds.iter().any(|s| intercepts(s, a)))
        .fold(0.0, |acc, (_, p)| acc + p)
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Refuse instances whose joint schedule space exceeds this many candidates.
    pub cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { cap: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub utility: f64,
    pub schedules: Vec<DefenderSchedule>,
    /// Joint candidate count (product of per-defender schedule counts).
    pub enumerated: u128,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {estimated} candidate schedules, cap is {cap}")]
    CapExceeded { estimated: u128, cap: u64 },
    #[error("{requested} defenders requested but the network has {available} police starts")]
    NotEnoughStarts { requested: usize, available: usize },
    #[error("oracle supports at most 64 attacker strategies, got {0}")]
    TooManyStrategies(usize),
}

/// Number of schedules from each `(node index, t_in)`: wait for any integer
/// duration, then either stop at the horizon or travel by shortest path to
/// another node.
fn schedule_counts(net: &Network, dist: &DistanceMatrix) -> Vec<Vec<u128>> {
    let n = net.node_count();
    let t_max = net.t_max() as usize;
    let mut count = vec![vec![0u128; t_max + 1]; n];
    for t in (0..=t_max).rev() {
        for v in 0..n {
            let mut c: u128 = 1;
            for t_out in t..t_max {
                for u in (0..n).filter(|&u| u != v) {
                    if let Some(d) = dist.by_index(v, u) {
                        let arrive = t_out + d as usize;
                        if arrive <= t_max {
                            c = c.saturating_add(count[u][arrive]);
                        }
                    }
                }
            }
            count[v][t] = c;
        }
    }
    count
}

fn joint_count(net: &Network, counts: &[Vec<u128>], starts: &[NodeId]) -> u128 {
    starts
        .iter()
        .map(|&s| counts[net.index_of(s).unwrap()][0])
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Size of the joint schedule space the oracle would enumerate for the first
/// `m` police starts (saturating).
pub fn schedule_space(net: &Network, m: usize) -> u128 {
    let counts = schedule_counts(net, &all_pairs_shortest(net));
    joint_count(net, &counts, &net.police()[..m.min(net.police().len())])
}

struct Enumerator<'a> {
    net: &'a Network,
    dist: &'a DistanceMatrix,
    /// `caught[v][t]`: strategies with a state at node index `v`, time `t`.
    caught: Vec<Vec<u64>>,
    found: BTreeMap<u64, DefenderSchedule>,
    visited: u128,
}

impl Enumerator<'_> {
    fn walk(&mut self, v: usize, t_in: u32, mask: u64, states: &mut Vec<DefenderState>) {
        let t_max = self.net.t_max();
        let n = self.net.node_count();
        let mut interval_mask = mask;
        for t_out in t_in..=t_max {
            interval_mask |= self.caught[v][t_out as usize];
            states.push(DefenderState::new(self.net.nodes()[v], t_in, t_out));
            if t_out == t_max {
                self.visited += 1;
                self.found
                    .entry(interval_mask)
                    .or_insert_with(|| DefenderSchedule { states: states.clone() });
            } else {
                for u in (0..n).filter(|&u| u != v) {
                    if let Some(d) = self.dist.by_index(v, u) {
                        if t_out + d <= t_max {
                            self.walk(u, t_out + d, interval_mask, states);
                        }
                    }
                }
            }
            states.pop();
        }
    }
}

/// Exact best joint schedule for the first `m` police starts, by exhaustive
/// enumeration. Defenders may wait at any node and travel along shortest paths.
pub fn oracle_best(
    net: &Network,
    mix: &MixedStrategy,
    m: usize,
    config: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    if m > net.police().len() {
        return Err(OracleError::NotEnoughStarts {
            requested: m,
            available: net.police().len(),
        });
    }
    if mix.len() > 64 {
        return Err(OracleError::TooManyStrategies(mix.len()));
    }
    let dist = all_pairs_shortest(net);
    let counts = schedule_counts(net, &dist);
    let starts = &net.police()[..m];
    let estimated = joint_count(net, &counts, starts);
    if estimated > config.cap as u128 {
        return Err(OracleError::CapExceeded {
            estimated,
            cap: config.cap,
        });
    }

    let mut caught = vec![vec![0u64; net.t_max() as usize + 1]; net.node_count()];
    for (k, a) in mix.strategies().iter().enumerate() {
        for st in &a.states {
            caught[net.index_of(st.v).unwrap()][st.t as usize] |= 1 << k;
        }
    }
    let value = |mask: u64| -> f64 {
        mix.probs()
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .fold(0.0, |acc, (_, p)| acc + p)
    };

    // Schedules of one defender only matter through the strategies they
    // catch, so keep one representative per catch set.
    let mut per_defender: Vec<Vec<(u64, DefenderSchedule)>> = Vec::with_capacity(m);
    for &s in starts {
        let mut e = Enumerator {
            net,
            dist: &dist,
            caught: caught.clone(),
            found: BTreeMap::new(),
            visited: 0,
        };
        e.walk(net.index_of(s).unwrap(), 0, 0, &mut Vec::new());
        debug_assert_eq!(e.visited, counts[net.index_of(s).unwrap()][0]);
        per_defender.push(e.found.into_iter().collect());
    }

    fn combine(
        groups: &[Vec<(u64, DefenderSchedule)>],
        depth: usize,
        mask: u64,
        picks: &mut Vec<usize>,
        best: &mut Option<(f64, u64, Vec<usize>)>,
        value: &dyn Fn(u64) -> f64,
    ) {
        if depth == groups.len() {
            let v = value(mask);
            if best.as_ref().is_none_or(|(b, _, _)| v > *b + 1e-12) {
                *best = Some((v, mask, picks.clone()));
            }
            return;
        }
        for (i, (m, _)) in groups[depth].iter().enumerate() {
            picks.push(i);
            combine(groups, depth + 1, mask | m, picks, best, value);
            picks.pop();
        }
    }

    let mut best = None;
    combine(&per_defender, 0, 0, &mut Vec::new(), &mut best, &value);
    let (utility, schedules) = match best {
        Some((u, _, picks)) => (
            u,
            picks
                .iter()
                .zip(&per_defender)
                .map(|(&i, group)| group[i].1.clone())
                .collect(),
        ),
        None => (0.0, Vec::new()),
    };
    Ok(OracleResult {
        utility,
        schedules,
        enumerated: estimated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{parse_network, Edge};
    use crate::{FIXTURE_NETWORK, FIXTURE_STRATEGIES};
    use proptest::prelude::*;

    fn fixture() -> (Network, MixedStrategy) {
        let net = parse_network(FIXTURE_NETWORK).unwrap();
        let mix = MixedStrategy::from_json(&net, FIXTURE_STRATEGIES).unwrap();
        (net, mix)
    }

    fn fixture_schedule() -> DefenderSchedule {
        DefenderSchedule::from_triples(&[(6, 0, 0), (3, 2, 2), (5, 4, 6)])
    }

    fn path(nodes: &[(u32, u32)]) -> Vec<LayeredNode> {
        nodes.iter().map(|&(t, v)| LayeredNode::new(v, t)).collect()
    }

    #[test]
    fn collapses_wait_chain() {
        let p = path(&[(0, 6), (2, 3), (4, 5), (5, 5), (6, 5)]);
        assert_eq!(collapse_path(&p), fixture_schedule());
        assert_eq!(collapse_path(&path(&[(0, 6)])).to_triples(), vec![(6, 0, 0)]);
        assert_eq!(
            collapse_path(&path(&[(0, 1), (2, 3)])).to_triples(),
            vec![(1, 0, 0), (3, 2, 2)]
        );
    }

    #[test]
    fn non_contiguous_repeat_stays_separate() {
        let p = path(&[(0, 1), (1, 2), (2, 1)]);
        assert_eq!(collapse_path(&p).states.len(), 3);
    }

    #[test]
    fn interception_semantics() {
        let a1 = AttackerStrategy::from_pairs(&[(1, 0), (2, 2), (5, 6)]);
        let a2 = AttackerStrategy::from_pairs(&[(1, 0), (3, 2), (5, 4)]);
        assert!(intercepts(&fixture_schedule(), &a1));
        let (_, mix) = fixture();
        let idle = DefenderSchedule::from_triples(&[(6, 0, 0)]);
        for a in mix.strategies() {
            assert!(!intercepts(&idle, a));
        }
        let waiting = DefenderSchedule::from_triples(&[(5, 4, 6)]);
        assert!(intercepts(&waiting, &a2));
        let until = DefenderSchedule::from_triples(&[(5, 2, 4)]);
        assert!(intercepts(&until, &a2));
    }

    #[test]
    fn utility_sums_caught_mass() {
        let (_, mix) = fixture();
        assert_eq!(utility(&[fixture_schedule()], &mix), 1.0);
        assert_eq!(utility(&[], &mix), 0.0);
        // only a1 passes 2 at time 2
        let only_a1 = DefenderSchedule::from_triples(&[(2, 2, 2)]);
        let brute: f64 = mix
            .iter()
            .filter(|(a, _)| a.states.iter().any(|s| s.v == 2 && s.t == 2))
            .map(|(_, p)| p)
            .sum();
        assert_eq!(utility(&[only_a1], &mix), brute);
        assert!((brute - 0.4).abs() < 1e-12);
    }

    #[test]
    fn fixture_schedule_is_feasible() {
        let (net, _) = fixture();
        let dist = all_pairs_shortest(&net);
        assert_eq!(check_schedule(&net, &dist, 6, &fixture_schedule()), Ok(()));
        let fast = DefenderSchedule::from_triples(&[(6, 0, 0), (3, 1, 1)]);
        assert_eq!(check_schedule(&net, &dist, 6, &fast), Err(ScheduleError::TooFast(1)));
    }

    #[test]
    fn oracle_on_fixture() {
        let (net, mix) = fixture();
        let r = oracle_best(&net, &mix, 1, &OracleConfig::default()).unwrap();
        assert_eq!(r.utility, 1.0);
        assert_eq!(utility(&r.schedules, &mix), 1.0);
        let dist = all_pairs_shortest(&net);
        assert_eq!(check_schedule(&net, &dist, 6, &r.schedules[0]), Ok(()));
    }

    #[test]
    fn oracle_co_located_start() {
        let net = Network::new(
            [1, 2],
            [Edge {
                src: 1,
                dst: 2,
                length: 3,
            }],
            1,
            vec![1],
            vec![2],
            3,
        )
        .unwrap();
        let mix =
            MixedStrategy::validated(&net, vec![AttackerStrategy::from_pairs(&[(1, 0), (2, 3)])], vec![1.0]).unwrap();
        let r = oracle_best(&net, &mix, 1, &OracleConfig::default()).unwrap();
        assert_eq!(r.utility, 1.0);
    }

    #[test]
    fn oracle_refuses_past_cap() {
        let (net, mix) = fixture();
        let err = oracle_best(&net, &mix, 1, &OracleConfig { cap: 3 }).unwrap_err();
        assert!(matches!(err, OracleError::CapExceeded { cap: 3, .. }));
    }

    #[test]
    fn enumeration_count_matches_dp() {
        let (net, _) = fixture();
        let dist = all_pairs_shortest(&net);
        let counts = schedule_counts(&net, &dist);
        let v = net.index_of(6).unwrap();
        let mut e = Enumerator {
            net: &net,
            dist: &dist,
            caught: vec![vec![0; 7]; 6],
            found: BTreeMap::new(),
            visited: 0,
        };
        e.walk(v, 0, 0, &mut Vec::new());
        assert_eq!(e.visited, counts[v][0]);
    }

    proptest! {
        #[test]
        fn utility_is_monotone_and_order_free(
            extra in proptest::collection::vec((1u32..=6, 0u32..=6, 0u32..=6), 1..4),
            rot in 0usize..3,
        ) {
            let (_, mix) = fixture();
            let base = DefenderSchedule::from_triples(&[(6, 0, 0), (3, 2, 2)]);
            let more = DefenderSchedule::from_triples(
                &extra.iter().map(|&(v, a, b)| (v, a.min(b), a.max(b))).collect::<Vec<_>>(),
            );
            let u1 = utility(std::slice::from_ref(&base), &mix);
            let u2 = utility(&[base.clone(), more.clone()], &mix);
            prop_assert!(u2 + 1e-12 >= u1);

            let mut strategies = mix.strategies().to_vec();
            let mut probs = mix.probs().to_vec();
            strategies.rotate_left(rot);
            probs.rotate_left(rot);
            let rotated = MixedStrategy::new(strategies, probs).unwrap();
            prop_assert!((utility(&[base, more], &rotated) - u2).abs() < 1e-12);
        }
    }
}
