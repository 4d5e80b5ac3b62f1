//! Seeded random small instances for sweeps and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evaluator::schedule_space;
use crate::network::{Edge, Network};
use crate::strategies::{enumerate_paths, generate_strategies, MixedStrategy};

#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub min_t_max: u32,
    pub max_t_max: u32,
    pub max_strategies: usize,
    pub max_edge_length: u32,
    /// Probability that any given ordered node pair gets an edge.
    pub edge_density: f64,
    /// Reject instances whose single-defender schedule space is larger.
    pub oracle_cap: u64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            min_nodes: 4,
            max_nodes: 8,
            min_t_max: 4,
            max_t_max: 8,
            max_strategies: 4,
            max_edge_length: 3,
            edge_density: 0.3,
            oracle_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub network: Network,
    pub mix: MixedStrategy,
}

/// Node 1 is the crime scene and node `n` an exit; one police start is picked
/// at random among the other nodes. Retries internally until the instance has
/// at least one escape route and fits the oracle cap.
pub fn random_instance(seed: u64, params: &InstanceParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(params.min_nodes..=params.max_nodes) as u32;
        let t_max = rng.gen_range(params.min_t_max..=params.max_t_max);
        let mut edges = Vec::new();
        for src in 1..=n {
            for dst in (1..=n).filter(|&d| d != src) {
                if src != n && rng.gen_bool(params.edge_density) {
                    edges.push(Edge {
                        src,
                        dst,
                        length: rng.gen_range(1..=params.max_edge_length),
                    });
                }
            }
        }
        let mut exits = vec![n];
        if n >= 5 && rng.gen_bool(0.3) {
            exits.push(n - 1);
        }
        let police = vec![rng.gen_range(2..=n)];
        let Ok(network) = Network::new(1..=n, edges, 1, police, exits, t_max) else {
            continue;
        };
        if schedule_space(&network, 1) > params.oracle_cap as u128 {
            continue;
        }
        let routes = enumerate_paths(&network, params.max_strategies).len();
        if routes == 0 {
            continue;
        }
        let count = rng.gen_range(1..=routes);
        let mix = generate_strategies(&network, count, rng.gen()).expect("route count checked");
        return Instance { network, mix };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::validate_strategy;

    #[test]
    fn instances_are_valid_and_reproducible() {
        let p = InstanceParams::default();
        for seed in 0..20 {
            let a = random_instance(seed, &p);
            let b = random_instance(seed, &p);
            assert_eq!(a.network, b.network);
            assert_eq!(a.mix, b.mix);
            assert!(a.network.node_count() <= 8 && a.network.t_max() <= 8 && a.mix.len() <= 4);
            for s in a.mix.strategies() {
                assert_eq!(validate_strategy(&a.network, s), Ok(()));
            }
        }
    }
}
