use proptest::prelude::*;

use interdiction::evaluator::check_schedule;
use interdiction::instances::{random_instance, InstanceParams};
use interdiction::milp::lp::parse_lp;
use interdiction::milp::solution_text;
use interdiction::planner::cost_table;
use interdiction::{
    all_pairs_shortest, assign_weights, build_layered, build_milp, emit_lp, oracle_best, parse_solution, plan_defender,
    utility, EdgeWeight, LayeredNode, MilpConfig, OracleConfig, PlanError,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planner_never_beats_oracle(seed in any::<u64>()) {
        let inst = random_instance(seed, &InstanceParams::default());
        let (net, mix) = (&inst.network, &inst.mix);
        let layered = build_layered(net);
        let opt = oracle_best(net, mix, 1, &OracleConfig::default()).unwrap();
        match plan_defender(net, &layered, mix, net.police()[0]) {
            Ok(plan) => {
                prop_assert!(plan.evaluated_utility <= opt.utility + 1e-12);
                prop_assert!((0.0..=1.0).contains(&plan.proxy_utility));
                let dist = all_pairs_shortest(net);
                prop_assert!(check_schedule(net, &dist, net.police()[0], &plan.schedule).is_ok());
                let last = plan.layered_path.last().unwrap();
                prop_assert!(net.is_exit(last.v) && last.t == net.t_max());
            }
            Err(PlanError::NoPath { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn cost_table_invariants(seed in any::<u64>()) {
        let inst = random_instance(seed, &InstanceParams::default());
        let (net, mix) = (&inst.network, &inst.mix);
        let layered = build_layered(net);
        let costs = cost_table(&layered, mix.strategies(), mix.probs()).unwrap();
        for i in 0..costs.len() {
            let (g, h, f) = (costs.g(i), costs.h(i), costs.f(i));
            prop_assert!(h >= 0.0 && h.is_finite());
            prop_assert!(g > 0.0);
            if g.is_finite() {
                prop_assert!((f - (g + h)).abs() < 1e-12);
            } else {
                prop_assert!(f.is_infinite());
            }
        }
        let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
        let mut at_horizon = 0.0;
        for &e in net.exits() {
            for t in costs.min_t_index()..net.t_max() {
                let a = costs.at(&layered, LayeredNode::new(e, t)).unwrap().g;
                let b = costs.at(&layered, LayeredNode::new(e, t + 1)).unwrap().g;
                prop_assert!(finite(b) >= finite(a) - 1e-12);
            }
            at_horizon += finite(costs.at(&layered, LayeredNode::new(e, net.t_max())).unwrap().g);
        }
        prop_assert!((at_horizon - 1.0).abs() < 1e-9);
        for w in assign_weights(&layered, &costs) {
            if let EdgeWeight::Cost(c) = w {
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }

    #[test]
    fn layered_edges_move_forward(seed in any::<u64>()) {
        let inst = random_instance(seed, &InstanceParams::default());
        let net = &inst.network;
        let layered = build_layered(net);
        prop_assert_eq!(layered.node_count(), net.node_count() * (net.t_max() as usize + 1));
        for e in layered.edges() {
            let (a, b) = (layered.node(e.from), layered.node(e.to));
            prop_assert!(b.t > a.t && b.t <= net.t_max());
        }
    }

    #[test]
    fn milp_agrees_with_evaluator(seed in any::<u64>()) {
        let params = InstanceParams { max_nodes: 6, max_t_max: 6, ..InstanceParams::default() };
        let inst = random_instance(seed, &params);
        let (net, mix) = (&inst.network, &inst.mix);
        let opt = oracle_best(net, mix, 1, &OracleConfig::default()).unwrap();
        let model = build_milp(net, mix, MilpConfig::for_network(net)).unwrap();
        let lp = parse_lp(&emit_lp(&model)).unwrap();
        let x = model.encode_schedules(&opt.schedules).unwrap();
        prop_assert_eq!(lp.violations(&x, 1e-9), Vec::<String>::new());
        let sol = parse_solution(&model, mix, &solution_text(&model, &x)).unwrap();
        prop_assert!((1.0 + sol.objective - utility(&sol.schedules, mix)).abs() <= 1e-6);
        prop_assert!((sol.utility - opt.utility).abs() <= 1e-6);
    }

    #[test]
    fn outputs_are_deterministic(seed in any::<u64>()) {
        let a = random_instance(seed, &InstanceParams::default());
        let b = random_instance(seed, &InstanceParams::default());
        prop_assert_eq!(a.network.to_json(), b.network.to_json());
        prop_assert_eq!(a.mix.to_json(), b.mix.to_json());
        let la = build_layered(&a.network);
        let lb = build_layered(&b.network);
        let pa = plan_defender(&a.network, &la, &a.mix, a.network.police()[0]).map(|p| p.to_json());
        let pb = plan_defender(&b.network, &lb, &b.mix, b.network.police()[0]).map(|p| p.to_json());
        prop_assert_eq!(pa, pb);
    }
}
