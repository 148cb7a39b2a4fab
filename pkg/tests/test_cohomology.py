import json

import pytest
from hypothesis import given, strategies as st

from glueforge.cohomology import (CechData, chain_complex, cech_complex, cech_from_json, cochain_complex,
                                  cohomology_dims, compare_01, complex_from_matrices, homology_dims,
                                  p1_comparison, p1_graded_cech, sheaf_cohomology)
from glueforge.errors import MalformedInput, ValidationError
from glueforge.finspace import FinPreorder, alexandrov, graph_poset
from glueforge.linalg import Mat
from glueforge.sheafcore import constant_cosheaf, constant_sheaf, sheaf_from_json
from glueforge.sscomplex import UGraph, clique_complex, simplex_poset
from strategies import components, functorial_sheaves, random_sheaves, ugraphs


def cycle(n):
    names = [f"v{i}" for i in range(n)]
    return UGraph.from_pairs(names, [(names[i], names[(i + 1) % n]) for i in range(n)])


def test_edge_complex():
    P = graph_poset(UGraph.from_pairs("ab", [("a", "b")]))
    C = cochain_complex(constant_sheaf(P))
    assert C.dims == (3, 2)
    assert cohomology_dims(C) == [1, 0]


def test_triangle_has_a_loop():
    assert sheaf_cohomology(constant_sheaf(graph_poset(cycle(3)))) == [1, 1]


def test_empty_open():
    P = FinPreorder.chain(["p", "q"])
    C = cochain_complex(constant_sheaf(P), 0)
    assert C.dims == (0,) and cohomology_dims(C) == [0]


def test_cohomology_over_subopen():
    P = graph_poset(cycle(4))
    X = alexandrov(P)
    U = X.min_open("v0")
    assert sheaf_cohomology(constant_sheaf(P), U) == [1, 0]


def test_non_open_rejected():
    P = FinPreorder.chain(["p", "q"])
    with pytest.raises(ValidationError):
        cochain_complex(constant_sheaf(P), P.mask(["p"]))


def test_cosheaf_homology():
    assert homology_dims(chain_complex(constant_cosheaf(graph_poset(cycle(3))))) == [1, 1]
    assert homology_dims(chain_complex(constant_cosheaf(FinPreorder.discrete(["p"])))) == [1]
    edge = graph_poset(UGraph.from_pairs("ab", [("a", "b")]))
    assert homology_dims(chain_complex(constant_cosheaf(edge))) == [1, 0]


def test_cosheaf_json(data_dir):
    G = sheaf_from_json(json.loads((data_dir / "c3_cosheaf.json").read_text()))
    assert homology_dims(chain_complex(G)) == [1, 1]


def test_cohomology_dims_by_hand():
    assert cohomology_dims(complex_from_matrices([0], [])) == [0]
    C = complex_from_matrices([1, 1], [Mat.identity(1)])
    assert cohomology_dims(C) == [0, 0]
    C = complex_from_matrices([1, 1], [Mat.zeros(1, 1)])
    assert cohomology_dims(C) == [1, 1]
    bad = complex_from_matrices([1, 1, 1], [Mat.identity(1), Mat.identity(1)])
    with pytest.raises(ValidationError):
        cohomology_dims(bad)


def test_euler_characteristic():
    C = cochain_complex(constant_sheaf(graph_poset(cycle(5))))
    assert C.euler == 0 == sum((-1) ** i * h for i, h in enumerate(cohomology_dims(C)))


def test_cech_from_file(data_dir):
    data = cech_from_json(json.loads((data_dir / "cech_p1_deg0.json").read_text()))
    assert cohomology_dims(cech_complex(data)) == [1, 0, 0]


def test_cech_single_patch():
    data = CechData(("a",), {("a",): 2}, {})
    assert cohomology_dims(cech_complex(data)) == [2, 0, 0]


def test_cech_malformed():
    with pytest.raises(MalformedInput):
        cech_from_json({"index": ["a", "b"], "spaces": {"a": 1, "b": 1, "a,b": 1}, "maps": {}})
    with pytest.raises(MalformedInput):
        cech_from_json({"index": ["a"], "spaces": {"a,z": 1}})


def _monomial_oracle(d, window):
    """Count Laurent monomials: H0 lives on both patches, H1 on neither."""
    lo, hi = min(window[0], 0, d), max(window[1], 0, d)
    ks = range(lo, hi + 1)
    return [sum(1 for k in ks if 0 <= k <= d), sum(1 for k in ks if k < 0 and k > d)]


@pytest.mark.parametrize("d", range(-4, 4))
def test_p1_line_bundles(d):
    cmp = p1_comparison(d)
    assert cmp.agree_01
    assert list(cmp.left[:2]) == list(cmp.right[:2]) == _monomial_oracle(d, (0, 0))
    assert cmp.left[2:] == cmp.right[2:]


def test_p1_wider_window_changes_nothing():
    for d in (-3, 2):
        assert p1_comparison(d, (-6, 6)) == p1_comparison(d)


def test_p1_cech_dims():
    data = p1_graded_cech(-2)
    assert cohomology_dims(cech_complex(data)) == [0, 1, 0]


def test_compare_01_padding():
    c = compare_01([1], [1, 0, 0])
    assert c.agree_01 and c.left == (1, 0, 0)
    assert not compare_01([1, 1], [1, 0]).agree_01
    assert compare_01([1, 0, 3], [1, 0]).to_json()["higher_degrees_equal"] is False


@given(functorial_sheaves())
def test_d_squared_zero(F):
    C = cochain_complex(F)
    assert C.squares_to_zero()
    h = cohomology_dims(C)
    assert sum((-1) ** i * x for i, x in enumerate(h)) == C.euler


@given(random_sheaves())
def test_gauge_transform_keeps_cohomology(data):
    F, G = data
    dim = F.dim(F.base.elements[0])
    const = sheaf_cohomology(constant_sheaf(simplex_poset(clique_complex(G)), dim))
    assert sheaf_cohomology(F) == const


@given(ugraphs(max_vertices=6))
def test_graph_cohomology_counts(G):
    h = sheaf_cohomology(constant_sheaf(graph_poset(G)))
    h = h + [0] * (2 - len(h))
    c = components(G)
    assert h[0] == c
    assert h[1] == len(G.edges) - len(G.vertices) + c


@given(st.integers(3, 8))
def test_cycles(n):
    assert sheaf_cohomology(constant_sheaf(graph_poset(cycle(n)))) == [1, 1]
