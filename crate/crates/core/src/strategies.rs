//! Attacker escape routes and mixed strategies over them.
//!
//! Strategy files are JSON objects of the form
//! `{"strategies": [[[v, t], ...], ...], "probs": [...]}`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{all_pairs_shortest, DistanceMatrix, Network, NodeId};

/// Probabilities must sum to one within this tolerance.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttackerState {
    pub v: NodeId,
    pub t: u32,
}

/// A timed path from the crime node at time 0 to an exit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttackerStrategy {
    pub states: Vec<AttackerState>,
}

impl AttackerStrategy {
    pub fn from_pairs(pairs: &[(NodeId, u32)]) -> Self {
        Self {
            states: pairs.iter().map(|&(v, t)| AttackerState { v, t }).collect(),
        }
    }

    pub fn exit_time(&self) -> Option<u32> {
        self.states.last().map(|s| s.t)
    }
}

/// Compact form, e.g. `0_1, 2_2, 6_5`.
impl fmt::Display for AttackerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}_{}", s.t, s.v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    UnknownNode(NodeId),
    BadStart,
    TimeNotIncreasing,
    NoEdge { from: NodeId, to: NodeId },
    HopDuration { expected: u32, actual: u32 },
    BeyondHorizon(u32),
    ExitBeforeEnd(NodeId),
    NotAnExit(NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "strategy has no states"),
            Violation::UnknownNode(v) => write!(f, "unknown node {v}"),
            Violation::BadStart => write!(f, "first state must be the crime node at time 0"),
            Violation::TimeNotIncreasing => write!(f, "times must strictly increase"),
            Violation::NoEdge { from, to } => write!(f, "no edge {from}->{to}"),
            Violation::HopDuration { expected, actual } => {
                write!(f, "hop duration {actual} != edge length {expected}")
            }
            Violation::BeyondHorizon(t) => write!(f, "time {t} is past the horizon"),
            Violation::ExitBeforeEnd(v) => write!(f, "exit {v} reached before the last state"),
            Violation::NotAnExit(v) => write!(f, "last state node {v} is not an exit"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("strategy {strategy}, state {state}: {violation}")]
    Invalid {
        strategy: usize,
        state: usize,
        violation: Violation,
    },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("mixed strategy is empty")]
    EmptyMix,
    #[error("{strategies} strategies but {probs} probabilities")]
    LengthMismatch { strategies: usize, probs: usize },
    #[error("probability {index} is {value}, must be > 0")]
    NonPositive { index: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("strategies {0} and {1} are identical")]
    Duplicate(usize, usize),
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("no crime-to-exit path fits within the horizon")]
    Infeasible,
    #[error("requested {requested} distinct paths but only {available} exist")]
    InsufficientPaths { requested: usize, available: usize },
}

/// Check one strategy against the network; reports the first violation.
pub fn validate_strategy(net: &Network, s: &AttackerStrategy) -> Result<(), (usize, Violation)> {
    let states = &s.states;
    let Some(first) = states.first() else {
        return Err((0, Violation::Empty));
    };
    for (i, st) in states.iter().enumerate() {
        if !net.contains(st.v) {
            return Err((i, Violation::UnknownNode(st.v)));
        }
    }
    if first.v != net.crime() || first.t != 0 {
        return Err((0, Violation::BadStart));
    }
    for (i, pair) in states.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if net.is_exit(a.v) {
            return Err((i, Violation::ExitBeforeEnd(a.v)));
        }
        if b.t <= a.t {
            return Err((i + 1, Violation::TimeNotIncreasing));
        }
        let is_last = i + 2 == states.len();
        match net.edge(a.v, b.v) {
            Some(edge) if edge.length != b.t - a.t => {
                return Err((
                    i + 1,
                    Violation::HopDuration {
                        expected: edge.length,
                        actual: b.t - a.t,
                    },
                ));
            }
            Some(_) => {}
            None if is_last && !net.is_exit(b.v) => return Err((i + 1, Violation::NotAnExit(b.v))),
            None => return Err((i + 1, Violation::NoEdge { from: a.v, to: b.v })),
        }
    }
    let last_idx = states.len() - 1;
    let last = states[last_idx];
    if last.t > net.t_max() {
        return Err((last_idx, Violation::BeyondHorizon(last.t)));
    }
    if !net.is_exit(last.v) {
        return Err((last_idx, Violation::NotAnExit(last.v)));
    }
    Ok(())
}

/// A probability distribution over attacker strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    strategies: Vec<AttackerStrategy>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyFile {
    strategies: Vec<Vec<(NodeId, u32)>>,
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Checks the distribution only; use [`MixedStrategy::validated`] to also
    /// check each route against a network.
    pub fn new(strategies: Vec<AttackerStrategy>, probs: Vec<f64>) -> Result<Self, StrategyError> {
        if strategies.is_empty() {
            return Err(StrategyError::EmptyMix);
        }
        if strategies.len() != probs.len() {
            return Err(StrategyError::LengthMismatch {
                strategies: strategies.len(),
                probs: probs.len(),
            });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(StrategyError::NonPositive { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(StrategyError::NotNormalized(sum));
        }
        for i in 0..strategies.len() {
            for j in i + 1..strategies.len() {
                if strategies[i] == strategies[j] {
                    return Err(StrategyError::Duplicate(i, j));
                }
            }
        }
        Ok(Self { strategies, probs })
    }

    pub fn validated(net: &Network, strategies: Vec<AttackerStrategy>, probs: Vec<f64>) -> Result<Self, StrategyError> {
        let mix = Self::new(strategies, probs)?;
        for (k, s) in mix.strategies.iter().enumerate() {
            validate_strategy(net, s).map_err(|(state, violation)| StrategyError::Invalid {
                strategy: k,
                state,
                violation,
            })?;
        }
        Ok(mix)
    }

    /// Parse a strategy file and validate it against `net`.
    pub fn from_json(net: &Network, text: &str) -> Result<Self, StrategyError> {
        let file: StrategyFile = serde_json::from_str(text).map_err(|e| StrategyError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let strategies = file
            .strategies
            .iter()
            .map(|s| AttackerStrategy::from_pairs(s))
            .collect();
        Self::validated(net, strategies, file.probs)
    }

    pub fn to_json(&self) -> String {
        let file = StrategyFile {
            strategies: self
                .strategies
                .iter()
                .map(|s| s.states.iter().map(|st| (st.v, st.t)).collect())
                .collect(),
            probs: self.probs.clone(),
        };
        serde_json::to_string_pretty(&file).expect("strategies serialize")
    }

    pub fn strategies(&self) -> &[AttackerStrategy] {
        &self.strategies
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttackerStrategy, f64)> {
        self.strategies.iter().zip(self.probs.iter().copied())
    }
}

/// Next hops from `(at, t)` that still leave time to reach some exit.
fn feasible_hops<'a>(
    net: &'a Network,
    dist: &'a DistanceMatrix,
    at: NodeId,
    t: u32,
) -> impl Iterator<Item = (NodeId, u32)> + 'a {
    net.out_edges(at).filter_map(move |e| {
        let arrive = t + e.length;
        let reaches_exit = net
            .exits()
            .iter()
            .any(|&x| dist.get(e.dst, x).is_some_and(|d| arrive + d <= net.t_max()));
        reaches_exit.then_some((e.dst, arrive))
    })
}

/// Depth-first enumeration of feasible timed escape routes, stopping after `limit`.
pub fn enumerate_paths(net: &Network, limit: usize) -> Vec<AttackerStrategy> {
    fn walk(
        net: &Network,
        dist: &DistanceMatrix,
        path: &mut Vec<AttackerState>,
        out: &mut Vec<AttackerStrategy>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let here = *path.last().unwrap();
        if net.is_exit(here.v) {
            out.push(AttackerStrategy { states: path.clone() });
            return;
        }
        let hops: Vec<_> = feasible_hops(net, dist, here.v, here.t).collect();
        for (v, t) in hops {
            path.push(AttackerState { v, t });
            walk(net, dist, path, out, limit);
            path.pop();
        }
    }
    let dist = all_pairs_shortest(net);
    let mut out = Vec::new();
    if limit > 0 {
        let mut path = vec![AttackerState { v: net.crime(), t: 0 }];
        walk(net, &dist, &mut path, &mut out, limit);
    }
    out
}

/// Sample `count` distinct escape routes by seeded random walks, with
/// probabilities drawn uniformly from the simplex.
pub fn generate_strategies(net: &Network, count: usize, seed: u64) -> Result<MixedStrategy, StrategyError> {
    if count == 0 {
        return Err(StrategyError::ZeroCount);
    }
    let available = enumerate_paths(net, count);
    if available.is_empty() {
        return Err(StrategyError::Infeasible);
    }
    if available.len() < count {
        return Err(StrategyError::InsufficientPaths {
            requested: count,
            available: available.len(),
        });
    }

    let dist = all_pairs_shortest(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<AttackerStrategy> = Vec::with_capacity(count);
    let mut seen = BTreeSet::new();
    let max_attempts = 1000 * count;
    for _ in 0..max_attempts {
        if chosen.len() == count {
            break;
        }
        let mut states = vec![AttackerState { v: net.crime(), t: 0 }];
        loop {
            let here = *states.last().unwrap();
            if net.is_exit(here.v) {
                break;
            }
            let hops: Vec<_> = feasible_hops(net, &dist, here.v, here.t).collect();
            // non-empty: every prefix was extended only towards a reachable exit
            let (v, t) = hops[rng.gen_range(0..hops.len())];
            states.push(AttackerState { v, t });
        }
        let s = AttackerStrategy { states };
        if seen.insert(s.clone()) {
            chosen.push(s);
        }
    }
    for s in available {
        if chosen.len() == count {
            break;
        }
        if seen.insert(s.clone()) {
            chosen.push(s);
        }
    }

    let probs = if count == 1 {
        vec![1.0]
    } else {
        // unit exponentials normalized to a uniform point on the simplex
        let draws: Vec<f64> = (0..count)
            .map(|_| {
                let u: f64 = 1.0 - rng.gen::<f64>();
                (-u.ln()).max(f64::MIN_POSITIVE)
            })
            .collect();
        let total: f64 = draws.iter().sum();
        draws.iter().map(|x| x / total).collect()
    };
    MixedStrategy::validated(net, chosen, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use crate::{FIXTURE_NETWORK, FIXTURE_STRATEGIES};

    fn net() -> Network {
        parse_network(FIXTURE_NETWORK).unwrap()
    }

    #[test]
    fn fixture_strategy_valid() {
        let a2 = AttackerStrategy::from_pairs(&[(1, 0), (3, 2), (5, 4)]);
        assert_eq!(validate_strategy(&net(), &a2), Ok(()));
        assert_eq!(a2.to_string(), "0_1, 2_3, 4_5");
    }

    #[test]
    fn hop_duration_mismatch() {
        let s = AttackerStrategy::from_pairs(&[(1, 0), (3, 1)]);
        assert_eq!(
            validate_strategy(&net(), &s),
            Err((1, Violation::HopDuration { expected: 2, actual: 1 }))
        );
    }

    #[test]
    fn terminal_not_exit() {
        let s = AttackerStrategy::from_pairs(&[(1, 0), (3, 2), (2, 4)]);
        assert_eq!(validate_strategy(&net(), &s), Err((2, Violation::NotAnExit(2))));
        let s = AttackerStrategy::from_pairs(&[(1, 0), (3, 2)]);
        assert_eq!(validate_strategy(&net(), &s), Err((1, Violation::NotAnExit(3))));
    }

    #[test]
    fn fixture_file_loads() {
        let mix = MixedStrategy::from_json(&net(), FIXTURE_STRATEGIES).unwrap();
        assert_eq!(mix.len(), 3);
        assert_eq!(mix.probs(), &[0.4, 0.3, 0.3]);
    }

    #[test]
    fn mix_rejects_bad_probabilities() {
        let s = || vec![AttackerStrategy::from_pairs(&[(1, 0), (3, 2), (5, 4)])];
        assert!(matches!(
            MixedStrategy::new(s(), vec![0.9]),
            Err(StrategyError::NotNormalized(_))
        ));
        assert!(matches!(
            MixedStrategy::new(s(), vec![0.0]),
            Err(StrategyError::NonPositive { .. })
        ));
        assert!(matches!(
            MixedStrategy::new(vec![], vec![]),
            Err(StrategyError::EmptyMix)
        ));
        let twice = vec![s()[0].clone(), s()[0].clone()];
        assert_eq!(
            MixedStrategy::new(twice, vec![0.5, 0.5]),
            Err(StrategyError::Duplicate(0, 1))
        );
    }

    #[test]
    fn generates_three_on_fixture() {
        let net = net();
        let mix = generate_strategies(&net, 3, 7).unwrap();
        assert_eq!(mix.len(), 3);
        for s in mix.strategies() {
            assert_eq!(validate_strategy(&net, s), Ok(()));
        }
        assert!((mix.probs().iter().sum::<f64>() - 1.0).abs() <= PROB_TOLERANCE);
    }

    #[test]
    fn single_strategy_gets_full_mass() {
        let mix = generate_strategies(&net(), 1, 1).unwrap();
        assert_eq!(mix.probs(), &[1.0]);
    }

    #[test]
    fn too_many_requested() {
        // the fixture admits exactly the three routes 1-2-5, 1-3-5, 1-4-5 within tmax = 6
        assert_eq!(enumerate_paths(&net(), usize::MAX).len(), 3);
        assert_eq!(
            generate_strategies(&net(), 10, 0),
            Err(StrategyError::InsufficientPaths {
                requested: 10,
                available: 3
            })
        );
    }

    #[test]
    fn infeasible_network() {
        let text = r#"{"nodes":[1,2],"edges":[[1,2,5]],"crime":1,"police":[1],"exits":[2],"tmax":3}"#;
        let net = parse_network(text).unwrap();
        assert_eq!(generate_strategies(&net, 1, 0), Err(StrategyError::Infeasible));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_strategies(&net(), 3, 99).unwrap().to_json();
        let b = generate_strategies(&net(), 3, 99).unwrap().to_json();
        assert_eq!(a, b);
        let back = MixedStrategy::from_json(&net(), &a).unwrap();
        assert!((back.probs().iter().sum::<f64>() - 1.0).abs() <= PROB_TOLERANCE);
    }
}
