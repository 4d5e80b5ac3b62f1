//! Interdiction planning for a police force chasing an attacker whose escape
//! routes are known only as a probability distribution over timed paths.
//!
//! The pipeline is:
//!
//! 1. [`network`]: load the road graph and compute travel times.
//! 2. [`timexp`]: expand it into one layer per time step.
//! 3. [`planner`]: score layered nodes with exact (`g`) and heuristic (`h`)
//!    costs, turn them into edge weights and extract a defender path with
//!    Dijkstra.
//! 4. [`evaluator`]: score schedules against the attacker mix, and certify
//!    small instances with an exhaustive oracle.
//! 5. [`milp`]: emit the benchmark mixed-integer model as LP text and read
//!    solver output back.

pub mod dot;
pub mod evaluator;
pub mod instances;
pub mod milp;
pub mod network;
pub mod planner;
pub mod strategies;
pub mod timexp;

pub use evaluator::{
    collapse_path, intercepts, oracle_best, utility, DefenderSchedule, DefenderState, OracleConfig, OracleError,
    OracleResult,
};
pub use milp::{build_milp, emit_lp, parse_solution, MilpConfig, MilpError, MilpModel, MilpSolution};
pub use network::{all_pairs_shortest, parse_network, DistanceMatrix, Edge, Network, NetworkError, NodeId};
pub use planner::{
    assign_weights, compute_exact_costs, compute_heuristics, plan_defender, plan_multi, CostTable, EdgeWeight,
    MultiPlan, PlanError, PlanResult,
};
pub use strategies::{
    generate_strategies, validate_strategy, AttackerState, AttackerStrategy, MixedStrategy, StrategyError,
};
pub use timexp::{build_layered, EdgeKind, LayeredEdge, LayeredNetwork, LayeredNode};

/// The six-node road network used throughout the tests and docs, as a network file.
pub const FIXTURE_NETWORK: &str = r#"{
  "nodes": [1, 2, 3, 4, 5, 6],
  "edges": [[1, 2, 2], [2, 5, 4], [1, 3, 2], [3, 5, 2], [1, 4, 4], [4, 5, 1], [6, 3, 2]],
  "crime": 1,
  "police": [6],
  "exits": [5],
  "tmax": 6
}
"#;

/// Three escape routes against [`FIXTURE_NETWORK`], as a strategy file.
pub const FIXTURE_STRATEGIES: &str = r#"{
  "strategies": [
    [[1, 0], [2, 2], [5, 6]],
    [[1, 0], [3, 2], [5, 4]],
    [[1, 0], [4, 4], [5, 5]]
  ],
  "probs": [0.4, 0.3, 0.3]
}
"#;
