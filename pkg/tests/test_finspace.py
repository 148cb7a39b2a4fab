import itertools

import pytest
from hypothesis import given, strategies as st

from glueforge.errors import MalformedInput, ValidationError
from glueforge.finspace import (FinPreorder, MonotoneMap, alexandrov, graph_poset, is_T0, poset_from_json,
                                preorder_of)
from glueforge.sscomplex import UGraph, clique_complex, simplex_poset
from strategies import ugraphs


def edge_poset():
    return graph_poset(UGraph.from_pairs(["a", "b"], [("a", "b")]))


def test_edge_graph_open_star():
    P = edge_poset()
    X = alexandrov(P)
    e = [p for p in P.elements if p not in ("a", "b")][0]
    assert set(X.subset(X.min_open("a"))) == {"a", e}
    assert X.subset(X.min_open(e)) == [e]


def test_discrete_space_has_all_subsets_open():
    X = alexandrov(FinPreorder.discrete(["p", "q", "r"]))
    assert sum(1 for _ in X.opens()) == 2 ** 3


def test_chain_opens():
    P = FinPreorder.chain(["p", "q"])
    X = alexandrov(P)
    assert sorted(sorted(X.subset(U)) for U in X.opens()) == [[], ["p", "q"], ["q"]]


def test_round_trips():
    for P in (FinPreorder.chain(["p", "q"]), FinPreorder.discrete(["a", "b"]), edge_poset()):
        Q = preorder_of(alexandrov(P))
        assert Q.elements == P.elements and Q.leq == P.leq


def test_t0():
    assert is_T0(FinPreorder.chain(["p", "q"]))
    assert not is_T0(FinPreorder.from_covers(["a", "b"], [("a", "b"), ("b", "a")]))


def test_graph_posets():
    C3 = graph_poset(UGraph.from_pairs("abc", [("a", "b"), ("b", "c"), ("c", "a")]))
    assert (len(C3.elements), len(C3.minimal()), len(C3.maximal())) == (6, 3, 3)
    assert len(edge_poset().elements) == 3
    star = graph_poset(UGraph.from_pairs(["o", "x", "y", "z"], [("o", "x"), ("o", "y"), ("o", "z")]))
    assert len(star.elements) == 7
    assert sum(1 for q in star.elements if star.lt("o", q)) == 3


def test_non_transitive_input_is_closed():
    P = FinPreorder.from_covers(["a", "b", "c"], [("a", "b"), ("b", "c")])
    assert P.le("a", "c")


def test_monotone_map_checked():
    P = FinPreorder.chain(["p", "q"])
    with pytest.raises(ValidationError):
        MonotoneMap(P, P, {"p": "q", "q": "p"})


def test_poset_json_errors():
    with pytest.raises(MalformedInput) as exc:
        poset_from_json({"elements": ["a"], "covers": [["a", "z"]]})
    assert exc.value.path == "$.covers[0][1]"


@st.composite
def preorders(draw):
    n = draw(st.integers(1, 6))
    names = [f"p{i}" for i in range(n)]
    pairs = draw(st.lists(st.tuples(st.sampled_from(names), st.sampled_from(names)), max_size=8))
    return FinPreorder.from_covers(names, pairs)


@given(preorders())
def test_order_reverses_minimal_opens(P):
    X = alexandrov(P)
    for p, q in itertools.product(P.elements, repeat=2):
        contains = X.min_open(q) & ~X.min_open(p) == 0
        assert P.le(p, q) == contains


@given(preorders())
def test_round_trip_exact(P):
    assert preorder_of(alexandrov(P)).leq == P.leq


def _sub_masks(mask):
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask
    yield 0


def _brute_irreducible(mask, is_member):
    """No two proper members (open or closed sets inside ``mask``) cover ``mask``."""
    parts = [m for m in _sub_masks(mask) if m != mask and is_member(m)]
    return mask != 0 and not any(a | b == mask for a in parts for b in parts)


@given(ugraphs(max_vertices=4))
def test_minimal_opens_and_closures_irreducible(G):
    P = simplex_poset(clique_complex(G))
    X = alexandrov(P)
    for p in P.elements:
        U, C = X.min_open(p), X.closure(p)
        assert X.is_open(U) and X.is_closed(C)
        assert X.is_irreducible(U)
        assert _brute_irreducible(U, X.is_open)
        assert _brute_irreducible(C, X.is_closed)
