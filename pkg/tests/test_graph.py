from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from entangled_t1.errors import DegenerateGraph, Infeasible, ParseError
from entangled_t1.graph import (
    BipartiteGraph, ParaproductClass, Signature, all_signatures, box_graph, check_witness, classify_signature,
    complete_graph, components, cup_graph, exponent_thresholds, feasibility_witness, figure2_graph,
    matching_graph, star_graph,
)


def test_component_examples():
    assert len(components(cup_graph())) == 1
    comps = components(matching_graph(2))
    assert len(comps) == 2 and all(len(c.edges) == 1 for c in comps)
    assert len(components(matching_graph(1))) == 1


@pytest.mark.parametrize("S,T,cls", [
    ({1}, {1}, ParaproductClass.NC2),
    ({2}, {2}, ParaproductClass.C2),
    ({1, 2}, set(), ParaproductClass.C1),
    (set(), {1}, ParaproductClass.NC1),
])
def test_classify_examples(S, T, cls):
    assert classify_signature(cup_graph(), Signature.from_sets(2, 2, S, T)) == cls


def test_fifteen_signatures():
    sigs = list(all_signatures(2, 2))
    assert len(sigs) == 15 and len(set(sigs)) == 15
    assert Signature.parse(sigs[4].code(), 2) == sigs[4]


@pytest.mark.parametrize("g,expected", [
    (cup_graph(), {(1, 1): 2, (1, 2): 2, (2, 1): 2}),
    (box_graph(), {e: 2 for e in box_graph().edges}),
    (figure2_graph(), {(1, 1): 3, (1, 2): 3, (1, 3): 4, (2, 3): 3}),
    (matching_graph(4), {(j, j): 1 for j in range(1, 5)}),
])
def test_exponent_examples(g, expected):
    d = exponent_thresholds(g)
    assert d == expected
    assert check_witness(d, feasibility_witness(d))


def test_witness_examples():
    assert set(feasibility_witness(exponent_thresholds(cup_graph())).values()) == {3}
    assert set(feasibility_witness(exponent_thresholds(box_graph())).values()) == {4}
    with pytest.raises(Infeasible):
        feasibility_witness({(1, 1): 2, (1, 2): 2})


def test_degenerate_star():
    with pytest.raises(DegenerateGraph):
        exponent_thresholds(star_graph(3))
    with pytest.raises(DegenerateGraph):
        exponent_thresholds(star_graph(3).transpose())


@st.composite
def graphs(draw):
    m = draw(st.integers(2, 4))
    n = draw(st.integers(2, 4))
    edges = {(i, draw(st.integers(1, n))) for i in range(1, m + 1)}
    edges |= {(draw(st.integers(1, m)), j) for j in range(1, n + 1)}
    extra = draw(st.lists(st.tuples(st.integers(1, m), st.integers(1, n)), max_size=4))
    return BipartiteGraph(m, n, frozenset(edges | set(extra)))


@given(graphs())
def test_thresholds_always_feasible(g):
    d = exponent_thresholds(g)
    assert set(d) == g.edges
    assert sum(Fraction(1, v) for v in d.values()) > 1
    assert check_witness(d, feasibility_witness(d))


@given(graphs())
def test_thresholds_symmetric_under_transpose(g):
    d = exponent_thresholds(g)
    dt = exponent_thresholds(g.transpose())
    assert {(j, i): v for (i, j), v in d.items()} == dt


def test_complete_graph_thresholds():
    assert set(exponent_thresholds(complete_graph(3, 3)).values()) == {3}


def test_graph_text_round_trip(fixtures):
    g = BipartiteGraph.from_text((fixtures / "cup_graph.txt").read_text())
    assert g == cup_graph()
    assert BipartiteGraph.from_text(figure2_graph().to_text()) == figure2_graph()


def test_graph_parse_errors():
    with pytest.raises(ParseError):
        BipartiteGraph.from_text("GRAPH m=2 n=2\n3 1\n1 2\n2 1\n")
