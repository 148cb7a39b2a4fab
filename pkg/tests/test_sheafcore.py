import itertools
import json

import pytest
from hypothesis import given

from glueforge.errors import MalformedInput, ValidationError
from glueforge.finspace import FinPreorder, MonotoneMap, alexandrov, graph_poset
from glueforge.linalg import Mat
from glueforge.ringcat import LocRing
from glueforge.sheafcore import (RING, VECT, PoSheaf, constant_ring_sheaf, constant_sheaf, pushforward,
                                 section_restriction, sections, sheaf_from_json)
from glueforge.sscomplex import UGraph
from strategies import components, random_sheaves


def test_constant_sheaf_connected():
    P = graph_poset(UGraph.from_pairs("abc", [("a", "b"), ("b", "c")]))
    F = constant_sheaf(P)
    assert sections(F, alexandrov(P).full).dim == 1


def test_sections_of_empty_open():
    P = FinPreorder.chain(["p", "q"])
    assert sections(constant_sheaf(P, 2), 0).dim == 0
    assert sections(constant_ring_sheaf(P, LocRing.polynomial("x")), 0).is_zero


def test_two_components():
    P = graph_poset(UGraph.from_pairs("abcd", [("a", "b"), ("c", "d")]))
    assert sections(constant_sheaf(P), alexandrov(P).full).dim == 2


def test_constant_sheaf_examples():
    assert constant_sheaf(FinPreorder.discrete(["p"])).stalks == {"p": 1}
    F = constant_sheaf(FinPreorder.chain(["p", "q"]), 2)
    assert F.res("p", "q") == Mat.identity(2)
    C3 = graph_poset(UGraph.from_pairs("abc", [("a", "b"), ("b", "c"), ("c", "a")]))
    assert len(constant_sheaf(C3).stalks) == 6


def test_non_open_rejected():
    P = FinPreorder.chain(["p", "q"])
    with pytest.raises(ValidationError):
        sections(constant_sheaf(P), P.mask(["p"]))


def test_non_functorial_rejected():
    P = FinPreorder.chain(["p", "q", "r"])
    with pytest.raises(ValidationError):
        PoSheaf(P, VECT, {"p": 1, "q": 1, "r": 1},
                {("p", "q"): Mat.scalar(1, 2), ("q", "r"): Mat.scalar(1, 3), ("p", "r"): Mat.scalar(1, 5)})


def test_pushforward_identity():
    P = graph_poset(UGraph.from_pairs("ab", [("a", "b")]))
    F = constant_sheaf(P, 2)
    G = pushforward(F, MonotoneMap(P, P, {p: p for p in P.elements}))
    assert G.stalks == F.stalks


def test_pushforward_to_point_is_global_sections():
    P = graph_poset(UGraph.from_pairs("abc", [("a", "b"), ("b", "c"), ("c", "a")]))
    F = constant_sheaf(P)
    pt = FinPreorder.discrete(["*"])
    G = pushforward(F, MonotoneMap(P, pt, {p: "*" for p in P.elements}))
    assert G.stalks["*"] == sections(F, alexandrov(P).full).dim == 1


def test_pushforward_collapsing_edge():
    P = graph_poset(UGraph.from_pairs("ab", [("a", "b")]))
    e = [p for p in P.elements if p not in "ab"][0]
    Q = FinPreorder.from_covers(["a", "b"], [("a", "b")])
    G = pushforward(constant_sheaf(P), MonotoneMap(P, Q, {"a": "a", "b": "b", e: "b"}))
    assert G.stalks == {"a": 1, "b": 1}


def test_sheaf_json(data_dir):
    F = sheaf_from_json(json.loads((data_dir / "c3.json").read_text()))
    assert F.kind == VECT and len(F.stalks) == 6
    with pytest.raises(MalformedInput) as exc:
        sheaf_from_json({"poset": {"elements": ["p"]}, "stalks": {"p": -1}})
    assert exc.value.path == "$.stalks.p"


def test_ring_sheaf_json(data_dir):
    F = sheaf_from_json(json.loads((data_dir / "chain.json").read_text()))
    assert F.kind == RING and sections(F, F.base.mask(["q"])) == F.stalks["q"]


@given(random_sheaves())
def test_sections_on_minimal_opens_and_globally(data):
    F, G = data
    P = F.base
    X = alexandrov(P)
    for p in P.elements:
        assert sections(F, X.min_open(p)).dim == F.dim(p)
    dim = F.dim(P.elements[0])
    assert sections(F, X.full).dim == dim * components(G)


@given(random_sheaves())
def test_restrictions_compose(data):
    F, _ = data
    X = alexandrov(F.base)
    opens = list(X.opens())[:12]
    for U, V, W in itertools.product(opens, repeat=3):
        if V & ~U or W & ~V:
            continue
        assert section_restriction(F, V, W) @ section_restriction(F, U, V) == section_restriction(F, U, W)
