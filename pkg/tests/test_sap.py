import pytest

from conftest import build_encode4, random_instance
from steinred import oracle
from steinred.model import ValidationError
from steinred.sap import (
    backmap_solution,
    root_pairs,
    transform,
    transform_rooted,
    transform_unrooted,
)


def test_unrooted_encoding_shape():
    inst = build_encode4()
    g = transform_unrooted(inst)
    assert g.kind == "pc"
    assert g.n_vertices == 8  # 4 originals + root + collector + 2 primes
    assert g.n_arcs == 14  # 6 graph arcs + 2 root + 2x(3 gadget arcs)
    assert g.big_m == 9.5
    assert len(g.root_arcs) == 2
    assert all(g.costs[a] == 9.5 for a in g.root_arcs)
    assert sorted(g.prime_of) == [0, 1]
    assert sorted(g.terminals) == sorted(g.prime_of.values())
    prize_costs = sorted(g.costs[a] for a in g.prize_arc)
    assert prize_costs == [2.5, 7.0]
    # graph arcs come in cost-preserving pairs
    assert len(g.arc_edge) == 6
    for a, e in g.arc_edge.items():
        assert g.costs[a] == inst.cost(e)


def test_unrooted_needs_a_prize():
    bare = build_encode4()
    bare.set_prize(0, 0.0)
    bare.set_prize(1, 0.0)
    with pytest.raises(ValidationError):
        transform_unrooted(bare)


def test_rooted_encoding_shape():
    inst = build_encode4()
    inst.fix_vertex(1)
    g = transform_rooted(inst, 1, 1)
    assert g.kind == "rpc"
    assert g.n_vertices == 5  # 4 originals + 1 prime for the unfixed prize
    assert g.n_arcs == 8  # 6 graph arcs + prime arc + prize arc
    assert g.big_m == 0.0
    assert g.root_arcs == []
    assert list(g.prize_arc.values()) == [0]
    (arc,) = list(g.prize_arc)
    assert g.costs[arc] == 2.5
    assert g.tails[arc] == 1  # prize arcs leave the chosen anchor


def test_rooted_requires_fixed_anchors():
    inst = build_encode4()
    with pytest.raises(ValidationError):
        transform_rooted(inst, 1, 1)


def test_transform_dispatch_and_root_pairs():
    inst = build_encode4()
    assert transform(inst).kind == "pc"
    inst.fix_vertex(0)
    inst.fix_vertex(1)
    assert transform(inst).kind == "rpc"
    # strongest prize roots first
    assert root_pairs(inst) == [(1, 1), (0, 0)]
    assert root_pairs(inst, limit=1) == [(1, 1)]


def test_sap_optimum_matches_the_shifted_original():
    inst = build_encode4()
    g = transform_unrooted(inst)
    assert oracle.sap_optimum_exact(g) == 12.0  # 2.5 + big M
    inst.fix_vertex(1)
    g = transform(inst)
    assert oracle.sap_optimum_exact(g) == 2.5


def test_backmap_recovers_trees():
    inst = build_encode4()
    g = transform_unrooted(inst)
    sap_of = {ov: sv for sv, ov in enumerate(g.to_orig) if ov >= 0}
    arc_to = {(g.tails[a], g.heads[a]): a for a in range(g.n_arcs)}

    # solution "vertex 1 alone": root arc to 1, its prime, pay vertex 0
    root_arc = next(a for a in g.root_arcs if g.heads[a] == sap_of[1])
    collector = next(
        g.heads[a]
        for a in range(g.n_arcs)
        if g.tails[a] == sap_of[1] and g.heads[a] not in g.prime_of.values()
        and a not in g.arc_edge and a != root_arc
    )
    arcs = {
        root_arc,
        arc_to[(sap_of[1], g.prime_of[1])],
        arc_to[(sap_of[1], collector)],
        next(a for a, t in g.prize_arc.items() if t == 0),
    }
    tree = backmap_solution(inst, g, arcs)
    assert tree.vertices == frozenset({1}) and tree.edges == frozenset()

    # solution spanning everything: graph arcs 1->2->3->0 plus both primes
    span = {
        next(a for a in g.root_arcs if g.heads[a] == sap_of[1]),
        arc_to[(sap_of[1], g.prime_of[1])],
        arc_to[(sap_of[0], g.prime_of[0])],
        arc_to[(sap_of[1], sap_of[2])],
        arc_to[(sap_of[2], sap_of[3])],
        arc_to[(sap_of[3], sap_of[0])],
    }
    tree = backmap_solution(inst, g, span)
    assert tree.vertices == frozenset({0, 1, 2, 3})
    assert len(tree.edges) == 3


def test_backmap_rejects_structural_nonsense():
    inst = build_encode4()
    g = transform_unrooted(inst)
    sap_of = {ov: sv for sv, ov in enumerate(g.to_orig) if ov >= 0}
    arc_to = {(g.tails[a], g.heads[a]): a for a in range(g.n_arcs)}
    both_roots = {
        g.root_arcs[0],
        g.root_arcs[1],
        arc_to[(sap_of[0], g.prime_of[0])],
        arc_to[(sap_of[1], g.prime_of[1])],
    }
    with pytest.raises(ValidationError):
        backmap_solution(inst, g, both_roots)


def test_rooted_encoding_agrees_with_oracle_on_random_instances():
    for seed in range(400, 412):
        inst = random_instance(seed, fix_some=True)
        if inst.class_tag == "PC":
            continue
        if len(inst.potential_terminals()) + len(inst.fixed_terminals()) > 12:
            continue  # keep the subset DP affordable
        g = transform(inst)
        sap = oracle.sap_optimum_exact(g)
        want = oracle.brute_force_value(inst) - inst.offset
        assert sap == pytest.approx(want, abs=1e-9)
