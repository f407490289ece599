import pytest

from conftest import build_relay7, random_instance
from steinred.events import replay
from steinred.model import (
    InfeasibleError,
    PcInstance,
    evaluate_cost,
    validate_tree,
)
from steinred.oracle import brute_force_value
from steinred.reduce import reduce_loop


def test_small_planar_instance_closes_completely(relay7):
    res = reduce_loop(relay7)
    assert res.lower_bound == 10.0
    assert res.upper_bound == 10.0
    assert evaluate_cost(res.instance, res.incumbent) == 10.0
    assert sorted(res.instance.alive_vertices()) == [0, 1, 2, 5, 6]
    assert res.instance.n_alive_edges() == 4
    assert not res.instance.vertex_alive(4)
    assert len(res.events) == 11


def test_reduction_is_idempotent(relay7):
    first = reduce_loop(relay7)
    second = reduce_loop(first.instance)
    assert second.events == []


def test_source_instance_is_untouched(relay7):
    before = relay7.fingerprint()
    res = reduce_loop(relay7)
    assert relay7.fingerprint() == before
    assert res.source_fingerprint == before
    assert res.instance is not relay7


def test_event_log_replays_to_the_same_instance(relay7):
    res = reduce_loop(relay7)
    again = replay(relay7, res.events)
    assert again.fingerprint() == res.instance.fingerprint()


def test_split_fixed_vertices_are_infeasible():
    inst = PcInstance(4)
    inst.add_edge(0, 1, 1.0)
    inst.add_edge(2, 3, 1.0)
    inst.set_prize(0, 5.0)
    inst.set_prize(2, 5.0)
    inst.fix_vertex(0)
    inst.fix_vertex(2)
    with pytest.raises(InfeasibleError):
        reduce_loop(inst)


def test_prize_free_instance_closes_at_zero():
    inst = PcInstance(3)
    inst.add_edge(0, 1, 2.0)
    inst.add_edge(1, 2, 3.0)
    res = reduce_loop(inst)
    assert res.lower_bound == 0.0
    assert res.upper_bound == 0.0
    assert res.events == []
    assert evaluate_cost(inst, res.incumbent) == 0.0


def test_offset_rides_through_closure():
    inst = PcInstance(2)
    inst.add_edge(0, 1, 5.0)
    inst.offset = 4.0
    res = reduce_loop(inst)
    assert res.lower_bound == 4.0
    assert res.upper_bound == 4.0


def test_value_is_invariant_under_reduction():
    for seed in range(760, 800):
        inst = random_instance(seed, fix_some=(seed % 3 == 0))
        want = brute_force_value(inst)
        res = reduce_loop(inst)
        assert res.lower_bound <= want + 1e-9
        assert res.upper_bound >= want - 1e-9
        got = brute_force_value(res.instance)
        assert got == want, f"seed {seed}: {got} != {want}"


def test_incumbent_is_always_feasible():
    for seed in range(800, 820):
        inst = random_instance(seed, fix_some=True)
        res = reduce_loop(inst)
        if res.incumbent is None:
            continue
        validate_tree(res.instance, res.incumbent)
        assert evaluate_cost(res.instance, res.incumbent) <= res.upper_bound + 1e-9


def test_throttled_runs_stay_sound():
    for seed in (820, 821, 822, 823, 824):
        inst = random_instance(seed)
        want = brute_force_value(inst)
        for kwargs in (
            {"probes": 0},
            {"max_rounds": 1},
            {"edge_budget": 3},
        ):
            res = reduce_loop(inst, **kwargs)
            assert brute_force_value(res.instance) == want, (seed, kwargs)


def test_tight_initial_upper_is_honoured():
    inst = build_relay7()
    res = reduce_loop(inst, initial_upper=10.0)
    assert res.upper_bound <= 10.0
    assert brute_force_value(res.instance) == 10.0


def test_unattainable_upper_signals_pruning():
    # a search warm-started below the optimum prunes, it never crashes
    with pytest.raises(InfeasibleError, match="upper bound"):
        reduce_loop(build_relay7(), initial_upper=9.0)
    for seed in (825, 826, 827):
        inst = random_instance(seed)
        want = brute_force_value(inst)
        assert brute_force_value(
            reduce_loop(inst, initial_upper=want).instance
        ) == want
        with pytest.raises(InfeasibleError):
            reduce_loop(inst, initial_upper=want - 0.5)
