import pytest

from conftest import random_instance
from steinred.model import (
    PcInstance,
    ValidationError,
    evaluate_cost,
    validate_tree,
)
from steinred.oracle import (
    MAX_VERTICES,
    brute_force_tree,
    brute_force_value,
    enumerate_optima,
)


def test_known_small_values(relay7, encode4, wheel):
    assert brute_force_value(relay7) == 10.0
    assert brute_force_value(encode4) == 2.5
    assert brute_force_value(wheel) == 8.0


def test_wheel_has_exactly_two_optima(wheel):
    optima = sorted(map(sorted, enumerate_optima(wheel)))
    assert optima == [[0, 1, 2, 3, 4, 5], [0, 1, 3, 4, 5, 6]]
    # the hub-adjacent vertex 4 sits in both
    assert all(4 in opt for opt in optima)


def test_tree_witness_matches_the_value():
    for seed in range(1, 15):
        inst = random_instance(seed, fix_some=(seed % 2 == 0))
        value = brute_force_value(inst)
        cost, tree = brute_force_tree(inst)
        assert cost == value
        validate_tree(inst, tree)
        assert evaluate_cost(inst, tree) == value


def test_offset_is_part_of_the_value():
    inst = PcInstance(2)
    inst.add_edge(0, 1, 1.0)
    inst.set_prize(0, 5.0)
    inst.set_prize(1, 5.0)
    base = brute_force_value(inst)
    inst.offset = 3.25
    assert brute_force_value(inst) == base + 3.25


def test_enumeration_refuses_large_instances():
    inst = PcInstance(MAX_VERTICES + 1)
    for v in range(MAX_VERTICES):
        inst.add_edge(v, v + 1, 1.0)
    inst.set_prize(0, 2.0)
    with pytest.raises(ValidationError, match="too large"):
        brute_force_value(inst)


def test_split_fixed_vertices_are_rejected():
    inst = PcInstance(4)
    inst.add_edge(0, 1, 1.0)
    inst.add_edge(2, 3, 1.0)
    for v in (0, 2):
        inst.set_prize(v, 4.0)
        inst.fix_vertex(v)
    with pytest.raises(ValidationError, match="no feasible vertex subset"):
        brute_force_value(inst)


def test_huge_prizes_force_a_spanning_optimum():
    for seed in (30, 31, 32):
        inst = random_instance(seed)
        pots = inst.potential_terminals()
        for t in pots:
            inst.set_prize(t, 1000.0)
        cost, tree = brute_force_tree(inst)
        assert set(pots) <= set(tree.vertices)


def test_tolerance_widens_the_optimum_set():
    inst = PcInstance(3)
    inst.add_edge(0, 1, 5.0)
    inst.add_edge(0, 2, 2.6)
    inst.add_edge(2, 1, 2.8)
    inst.set_prize(0, 10.0)
    inst.set_prize(1, 10.0)
    assert sorted(map(sorted, enumerate_optima(inst))) == [[0, 1]]
    assert sorted(map(sorted, enumerate_optima(inst, tol=0.5))) == [
        [0, 1],
        [0, 1, 2],
    ]


def test_singleton_and_empty_choices():
    # taking nothing is legal when no vertex is fixed: pay every prize
    inst = PcInstance(2)
    inst.add_edge(0, 1, 100.0)
    inst.set_prize(0, 2.0)
    inst.set_prize(1, 3.0)
    # best single vertex keeps its own prize and pays the other
    assert brute_force_value(inst) == 2.0
    cost, tree = brute_force_tree(inst)
    assert tree.vertices == frozenset({1}) and not tree.edges
