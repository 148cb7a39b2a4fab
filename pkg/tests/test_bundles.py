import json
import random

import pytest
from hypothesis import given, strategies as st

from glueforge.bundles import (GraphBundle, bundle_from_json, bundle_to_sheaf, cycle_bundle, fixed_space_dim,
                               monodromy, scalar_bundle, validate_bundle)
from glueforge.cohomology import sheaf_cohomology
from glueforge.errors import MalformedInput, ValidationError
from glueforge.linalg import Mat, inverse, is_invertible
from glueforge.sheafcore import constant_sheaf
from glueforge.sscomplex import UGraph, clique_complex, simplex_poset

K3 = UGraph.from_pairs("abc", [("a", "b"), ("b", "c"), ("c", "a")])


def _pad(h, n=2):
    return list(h) + [0] * (n - len(h))


def test_k3_examples(data_dir):
    good = bundle_from_json(json.loads((data_dir / "k3_good.json").read_text()))
    bad = bundle_from_json(json.loads((data_dir / "k3_bad.json").read_text()))
    assert validate_bundle(good).ok
    rep = validate_bundle(bad)
    assert [p["kind"] for p in rep.problems] == ["cocycle"]
    with pytest.raises(ValidationError):
        bundle_to_sheaf(bad)


def test_k3_scalars_directly():
    assert validate_bundle(scalar_bundle(K3, {("a", "b"): 2, ("b", "c"): 3, ("c", "a"): "1/6"})).ok
    assert not validate_bundle(scalar_bundle(K3, {("a", "b"): 2, ("b", "c"): 3, ("c", "a"): 1})).ok


def test_singular_edge():
    B = scalar_bundle(UGraph.from_pairs("ab", [("a", "b")]), {("a", "b"): 0})
    assert validate_bundle(B).problems[0]["kind"] == "singular"


def test_construction_errors():
    G = UGraph.from_pairs("ab", [("a", "b")])
    with pytest.raises(ValidationError):
        GraphBundle(G, 1, {})
    with pytest.raises(ValidationError):
        GraphBundle(G, 2, {("a", "b"): Mat.identity(1)})
    with pytest.raises(MalformedInput):
        bundle_from_json({"graph": {"vertices": ["a"], "edges": []}, "rank": 0, "edges": {}})


def test_c3_monodromy():
    B = cycle_bundle(3, [1, 2, 3])
    assert monodromy(B, ["v0", "v1", "v2", "v0"]) == Mat.scalar(1, 6)
    assert monodromy(B, ["v0", "v2", "v1", "v0"]) == Mat.scalar(1, "1/6")
    assert monodromy(B, ["v0", "v1", "v0"]) == Mat.identity(1)
    assert _pad(sheaf_cohomology(bundle_to_sheaf(B))) == [0, 0]


def test_monodromy_needs_closed_walk():
    B = cycle_bundle(4, [1, 1, 1, 1])
    with pytest.raises(ValidationError):
        monodromy(B, ["v0", "v1"])
    with pytest.raises(ValidationError):
        monodromy(B, ["v0", "v2", "v0"])


def test_trivial_bundle_is_constant_sheaf():
    G = UGraph.from_pairs("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("a", "c")])
    B = GraphBundle(G, 2, {e: Mat.identity(2) for e in G.edges})
    F = bundle_to_sheaf(B)
    C = constant_sheaf(simplex_poset(clique_complex(G)), 2)
    assert F.stalks == C.stalks
    assert all(F.res(p, q) == C.res(p, q) for p, q in F.base.pairs())


@pytest.mark.parametrize("n", range(3, 9))
def test_cycle_cohomology(n):
    assert _pad(sheaf_cohomology(bundle_to_sheaf(cycle_bundle(n, [1] * n)))) == [1, 1]
    twisted = cycle_bundle(n, [2] + [1] * (n - 1))
    assert _pad(sheaf_cohomology(bundle_to_sheaf(twisted)))[0] == 0
    assert fixed_space_dim(twisted) == 0


def _random_invertible(rnd, n):
    while True:
        M = Mat.from_rows([[rnd.randint(-2, 2) for _ in range(n)] for _ in range(n)], n)
        if is_invertible(M):
            return M


@st.composite
def cycle_bundles(draw):
    """Rank 1 or 2 bundles on cycles of length 4 to 7 (no triangles, so any matrices work)."""
    n = draw(st.integers(4, 7))
    rank = draw(st.integers(1, 2))
    rnd = random.Random(draw(st.integers(0, 2**32)))
    names = [f"v{i}" for i in range(n)]
    pairs = [(names[i], names[(i + 1) % n]) for i in range(n)]
    if draw(st.booleans()):
        # monodromy-free: a gauge transformation of the trivial bundle
        g = {v: _random_invertible(rnd, rank) for v in names}
        edges = {(a, b): g[b] @ inverse(g[a]) for a, b in pairs}
    else:
        edges = {p: _random_invertible(rnd, rank) for p in pairs}
    return GraphBundle(UGraph.from_pairs(names, pairs), rank, edges)


@given(cycle_bundles())
def test_h0_is_fixed_space(B):
    h = _pad(sheaf_cohomology(bundle_to_sheaf(B)))
    assert h[0] == fixed_space_dim(B)
    # Euler characteristic of a local system on a graph
    assert h[0] - h[1] == B.rank * (len(B.graph.vertices) - len(B.graph.edges))


@given(cycle_bundles())
def test_monodromy_conjugacy_class(B):
    names = list(B.graph.vertices)
    walk = names + names[:1]
    M0 = monodromy(B, walk)
    shifted = names[1:] + names[:1]
    M1 = monodromy(B, shifted + shifted[:1])
    T = B.transport(names[0], names[1])
    assert M1 == T @ M0 @ inverse(T)
