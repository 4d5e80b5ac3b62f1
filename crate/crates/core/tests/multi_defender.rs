use interdiction::{
    build_layered, oracle_best, plan_multi, utility, AttackerStrategy, Edge, MixedStrategy, Network, OracleConfig,
};

/// Two escape routes of mass 0.5 each, with one police start next to each
/// exit.
fn split_instance() -> (Network, MixedStrategy) {
    let e = |src, dst, length| Edge { src, dst, length };
    let net = Network::new(
        [1, 2, 3, 4, 5, 6, 7],
        [e(1, 2, 1), e(2, 4, 1), e(1, 3, 1), e(3, 5, 1), e(6, 4, 2), e(7, 5, 2)],
        1,
        vec![6, 7],
        vec![4, 5],
        3,
    )
    .unwrap();
    let mix = MixedStrategy::validated(
        &net,
        vec![
            AttackerStrategy::from_pairs(&[(1, 0), (2, 1), (4, 2)]),
            AttackerStrategy::from_pairs(&[(1, 0), (3, 1), (5, 2)]),
        ],
        vec![0.5, 0.5],
    )
    .unwrap();
    (net, mix)
}

#[test]
fn disjoint_halves_are_both_caught() {
    let (net, mix) = split_instance();
    let layered = build_layered(&net);
    let plan = plan_multi(&net, &layered, &mix, &[6, 7]).unwrap();
    assert_eq!(plan.combined_utility, 1.0);
    assert_eq!(utility(&plan.schedules(), &mix), 1.0);

    let oracle = oracle_best(&net, &mix, 2, &OracleConfig::default()).unwrap();
    assert_eq!(oracle.utility, 1.0);
    let single = oracle_best(&net, &mix, 1, &OracleConfig::default()).unwrap();
    assert_eq!(single.utility, 0.5);
}

#[test]
fn mass_is_monotone_in_defenders() {
    let (net, mix) = split_instance();
    let layered = build_layered(&net);
    let one = plan_multi(&net, &layered, &mix, &[6]).unwrap().combined_utility;
    let two = plan_multi(&net, &layered, &mix, &[6, 7]).unwrap().combined_utility;
    assert_eq!(one, 0.5);
    assert!(two >= one);
}

#[test]
fn third_defender_with_nothing_left_adds_nothing() {
    let (net, mix) = split_instance();
    let layered = build_layered(&net);
    let both = plan_multi(&net, &layered, &mix, &[6, 7]).unwrap();
    // a third start at node 2, planned after both halves are gone
    let net3 = Network::new(
        net.nodes().to_vec(),
        net.edges().to_vec(),
        1,
        vec![6, 7, 2],
        vec![4, 5],
        3,
    )
    .unwrap();
    let l3 = build_layered(&net3);
    let three = plan_multi(&net3, &l3, &mix, &[6, 7, 2]).unwrap();
    assert_eq!(three.combined_utility, both.combined_utility);
}
