"""Smoke test for the Python bindings.

Build and install the extension first, e.g. ``maturin develop`` inside
``crates/python``, then run ``python python/smoke_test.py``.
"""

import json

import interdiction as it


def main():
    net = it.Network.fixture()
    mix = it.MixedStrategy.fixture(net)
    assert net.police == [6] and net.exits == [5] and net.t_max == 6
    assert net.distance(6, 5) == 4
    assert len(mix) == 3 and abs(sum(mix.probs) - 1.0) < 1e-9

    plan = it.plan(net, mix)
    assert plan.layered_path == ["0_6", "2_3", "4_5", "5_5", "6_5"], plan
    assert plan.schedule == [(6, 0, 0), (3, 2, 2), (5, 4, 6)]
    assert plan.evaluated_utility == 1.0

    costs = it.cost_table(net, mix)
    for key, (g, h) in {"2_3": (0.3, 0.7), "4_4": (0.3, 0.4), "6_5": (1.0, 0.0)}.items():
        assert abs(costs[key][0] - g) < 1e-9 and abs(costs[key][1] - h) < 1e-9, key

    assert it.utility(mix, [[(6, 0, 0), (3, 2, 2), (5, 4, 6)]]) == 1.0
    best, schedules = it.oracle(net, mix)
    assert best == 1.0 and len(schedules) == 1

    lp = it.export_lp(net, mix)
    assert "z_A0" in lp and lp.rstrip().endswith("End")
    assert "digraph layered" in it.export_dot(net, mix)

    island = it.Network.from_json(
        json.dumps({"nodes": [1, 2, 3], "edges": [[1, 2, 1]], "crime": 1,
                    "police": [3], "exits": [2], "tmax": 2})
    )
    lone = it.MixedStrategy(island, [[(1, 0), (2, 1)]], [1.0])
    try:
        it.plan(island, lone)
    except it.NoPathError as e:
        assert str(e).startswith("NO_PATH")
    else:
        raise AssertionError("expected NoPathError")

    try:
        it.MixedStrategy(net, [[(1, 0), (3, 2), (5, 4)]], [0.9])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for unnormalized mix")

    generated = it.MixedStrategy.generate(net, 3, 7)
    assert generated.to_json() == it.MixedStrategy.generate(net, 3, 7).to_json()
    print("smoke test passed")


if __name__ == "__main__":
    main()
