import pytest

from conftest import build_path3, random_instance
from steinred.events import (
    SAFE_ALL,
    SAFE_SOME,
    ContractEdge,
    DeleteEdge,
    DeleteVertex,
    FixTerminal,
    OffsetAdd,
    PseudoEliminate,
    Replacement,
    apply_event,
    backmap_tree,
    parse_events,
    replay,
    serialize_events,
)
from steinred.model import (
    PcInstance,
    ValidationError,
    evaluate_cost,
    tree_from_edges,
)
from steinred.reduce import reduce_loop


def test_delete_edge_checks_recorded_endpoints():
    inst = build_path3()
    apply_event(inst, DeleteEdge(0, 0, 1, 2.0, SAFE_ALL))
    assert not inst.edge_alive(0)
    stale = DeleteEdge(1, 0, 2, 3.0, SAFE_ALL)  # edge 1 joins 1-2, not 0-2
    with pytest.raises(ValidationError, match="endpoints changed"):
        apply_event(inst, stale)


def test_delete_vertex_banks_the_prize():
    inst = build_path3(prizes=(4.0, 0.0, 6.0))
    inst.delete_edge(0)
    apply_event(inst, DeleteVertex(0, 4.0, SAFE_SOME))
    assert not inst.vertex_alive(0)
    assert inst.offset == 4.0


def test_contract_edge_reproduces_recorded_id():
    inst = build_path3()
    ev = ContractEdge(
        vid=1, e1=0, e2=1, new_eid=2, u=0, w=2, cost=5.0, safety=SAFE_ALL
    )
    apply_event(inst, ev)
    assert not inst.vertex_alive(1)
    assert inst.cost(2) == 5.0 and set(inst.ends(2)) == {0, 2}
    bad = ContractEdge(
        vid=1, e1=0, e2=1, new_eid=9, u=0, w=2, cost=5.0, safety=SAFE_ALL
    )
    with pytest.raises(ValidationError, match="log says"):
        apply_event(build_path3(), bad)


def test_pseudo_eliminate_rewires_neighbour_pairs():
    inst = PcInstance(4)
    e30 = inst.add_edge(3, 0, 1.0)
    e31 = inst.add_edge(3, 1, 2.0)
    e32 = inst.add_edge(3, 2, 3.0)
    ev = PseudoEliminate(
        vid=3,
        safety=SAFE_ALL,
        replacements=(
            Replacement(3, e30, e31, 0, 1, 3.0),
            Replacement(4, e30, e32, 0, 2, 4.0),
        ),
    )
    apply_event(inst, ev)
    assert not inst.vertex_alive(3)
    assert inst.cost(3) == 3.0 and inst.cost(4) == 4.0
    assert inst.find_edge(1, 2) is None  # only the listed pairs appear


def test_offset_and_fix_events():
    inst = build_path3()
    apply_event(inst, OffsetAdd(2.5, "test credit"))
    assert inst.offset == 2.5
    apply_event(inst, FixTerminal(2))
    assert inst.is_fixed(2)
    with pytest.raises(ValidationError, match="unknown event"):
        apply_event(inst, "not an event")


def test_replay_reproduces_reduced_instances():
    for seed in (710, 711, 712, 713):
        inst = random_instance(seed, fix_some=(seed % 2 == 0))
        res = reduce_loop(inst)
        again = replay(inst, res.events)
        assert again.fingerprint() == res.instance.fingerprint()


def test_backmap_reopens_contractions():
    inst = build_path3(prizes=(4.0, 0.0, 6.0))
    ev = ContractEdge(
        vid=1, e1=0, e2=1, new_eid=2, u=0, w=2, cost=5.0, safety=SAFE_ALL
    )
    reduced = replay(inst, [ev])
    tree_r = tree_from_edges(reduced, [2])
    tree = backmap_tree(inst, [ev], tree_r)
    assert tree.vertices == frozenset({0, 1, 2})
    assert tree.edges == frozenset({0, 1})
    assert evaluate_cost(inst, tree) == evaluate_cost(reduced, tree_r)


def test_backmap_dedupes_shared_parents():
    inst = PcInstance(4)
    e30 = inst.add_edge(3, 0, 1.0)
    e31 = inst.add_edge(3, 1, 2.0)
    e32 = inst.add_edge(3, 2, 3.0)
    for v in (0, 1, 2):
        inst.set_prize(v, 9.0)
    ev = PseudoEliminate(
        vid=3,
        safety=SAFE_ALL,
        replacements=(
            Replacement(3, e30, e31, 0, 1, 3.0),
            Replacement(4, e30, e32, 0, 2, 4.0),
        ),
    )
    reduced = replay(inst, [ev])
    tree_r = tree_from_edges(reduced, [3, 4])
    tree = backmap_tree(inst, [ev], tree_r)
    # both replacements share parent e30; the expansion must not double it
    assert tree.vertices == frozenset({0, 1, 2, 3})
    assert tree.edges == frozenset({e30, e31, e32})
    # pricing e30 once instead of twice can only help
    assert evaluate_cost(inst, tree) <= evaluate_cost(reduced, tree_r)


def test_backmap_never_raises_the_value():
    for seed in range(720, 740):
        inst = random_instance(seed)
        res = reduce_loop(inst)
        if res.incumbent is None:
            continue
        tree = backmap_tree(inst, res.events, res.incumbent)
        mapped = evaluate_cost(inst, tree)
        reduced_val = evaluate_cost(res.instance, res.incumbent)
        assert mapped <= reduced_val + 1e-9


def test_serialization_roundtrip():
    events = [
        DeleteEdge(4, 1, 2, 3.5, SAFE_ALL),
        DeleteVertex(7, 0.0, SAFE_SOME),
        FixTerminal(3),
        ContractEdge(1, 0, 2, 9, 0, 5, 4.25, SAFE_ALL),
        PseudoEliminate(
            2,
            SAFE_SOME,
            (Replacement(10, 3, 4, 0, 1, 2.0), Replacement(11, 3, 5, 0, 6, 7.5)),
        ),
        OffsetAdd(1.5, "component drop"),
    ]
    text = serialize_events("cafebabe", events)
    fp, back = parse_events(text)
    assert fp == "cafebabe"
    assert back == events


def test_parse_events_rejects_damage():
    good = serialize_events("fp", [DeleteEdge(0, 0, 1, 2.0, SAFE_ALL)])
    with pytest.raises(ValidationError, match="fingerprint"):
        parse_events(good.split("\n", 1)[1])
    with pytest.raises(ValidationError, match="safety"):
        parse_events(good.replace("all-optima", "hunch"))
    with pytest.raises(ValidationError, match="bad event"):
        parse_events("fingerprint fp\ndelete_edge 0 zero 1 2.0 all-optima\n")
    with pytest.raises(ValidationError, match="unknown event"):
        parse_events("fingerprint fp\nshrink_ray 4\n")
    # comments and blank lines are fine
    fp, back = parse_events("# log\n\nfingerprint fp\nfix_terminal 2\n")
    assert back == [FixTerminal(2)]
