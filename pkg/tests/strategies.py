"""Shared hypothesis strategies and brute-force oracles."""

import itertools
import random

from hypothesis import strategies as st

from glueforge.linalg import Mat, inverse, is_invertible
from glueforge.sheafcore import VECT, PoSheaf
from glueforge.sscomplex import UGraph, clique_complex, simplex_poset


@st.composite
def ugraphs(draw, max_vertices: int = 8, min_vertices: int = 1):
    n = draw(st.integers(min_vertices, max_vertices))
    names = [f"v{i}" for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return UGraph.from_pairs(names, chosen)


def brute_cliques(G: UGraph) -> tuple[int, int, int]:
    """Count 1-, 2- and 3-cliques by checking every subset."""
    adj = {frozenset(e) for e in G.edges}
    vs = list(G.vertices)
    two = sum(1 for a, b in itertools.combinations(vs, 2) if frozenset((a, b)) in adj)
    three = sum(1 for a, b, c in itertools.combinations(vs, 3)
                if {frozenset((a, b)), frozenset((a, c)), frozenset((b, c))} <= adj)
    return len(vs), two, three


def components(G: UGraph) -> int:
    parent = {v: v for v in G.vertices}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in G.edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in G.vertices})


def _gauge(rnd, dim):
    while True:
        M = Mat.from_rows([[rnd.randint(-2, 2) for _ in range(dim)] for _ in range(dim)], dim)
        if is_invertible(M):
            return M


@st.composite
def random_sheaves(draw):
    """Gauge transforms of a constant sheaf on a clique-complex poset, hence functorial."""
    G = draw(ugraphs(max_vertices=4))
    P = simplex_poset(clique_complex(G))
    dim = draw(st.integers(1, 2))
    rnd = random.Random(draw(st.integers(0, 2**32)))
    gauge = {p: _gauge(rnd, dim) for p in P.elements}
    res = {(p, q): gauge[q] @ inverse(gauge[p]) for p, q in P.covers()}
    return PoSheaf(P, VECT, {p: dim for p in P.elements}, res), G


def random_datum(rnd: random.Random, names=("1", "2", "3")):
    """Three patches of the affine line with shifted coordinates.

    Patch i uses x_i = x + c_i and removes the points S_i; the overlap of i and
    j removes S_i and S_j.  Transitions are the coordinate changes, so the
    cocycle condition holds by construction.
    """
    from glueforge import ringcat
    from glueforge.gluing import GluingDatum
    from glueforge.ringcat import LocRing

    roots = range(-2, 4)
    shift = {i: rnd.randint(-2, 2) for i in names}
    removed = {i: {r for r in roots if rnd.random() < 0.2} for i in names}

    def ring(i, pts):
        return LocRing.make(["x"], [f"x - {r + shift[i]}" for r in sorted(pts)])

    patches = {i: ring(i, removed[i]) for i in names}
    overlaps, transitions = {}, {}
    for i, j in itertools.permutations(names, 2):
        overlaps[(i, j)] = ringcat.inclusion(patches[i], ring(i, removed[i] | removed[j]))
    for j, i in itertools.permutations(names, 2):
        transitions[(j, i)] = ringcat.substitution(overlaps[(j, i)].target, overlaps[(i, j)].target,
                                                   {"x": f"x + {shift[j] - shift[i]}"})
    return GluingDatum(tuple(names), patches, overlaps, transitions)


@st.composite
def random_data(draw):
    return random_datum(random.Random(draw(st.integers(0, 2**32))))


def p1_covers(rnd: random.Random):
    """The standard cover U of P^1 and a random refinement V by basic opens of the x-patch."""
    from glueforge.cschtwo import AmbientCover, basic_patch, object_of_cover, whole_patch
    from glueforge.gluing import p1_datum

    W = p1_datum()
    U = object_of_cover(AmbientCover(W, ("U0", "U1"), {"U0": whole_patch(W, "0"), "U1": whole_patch(W, "1")}))
    roots = rnd.sample(range(-3, 4), rnd.randint(2, 3))
    patches = {f"D{n}": basic_patch(W, "0", f"x - {r}") for n, r in enumerate(roots)}
    patches["V1"] = whole_patch(W, "1")
    V = object_of_cover(AmbientCover(W, tuple(patches), patches))
    return U, V


def lines_srms2(rnd: random.Random, n: int = 2):
    """Covers A, C of n disjoint lines and their coarsest common cover B.

    On each line one of A, C is split into basic opens and the other keeps
    the whole line.
    """
    from glueforge.cschtwo import (AmbientCover, basic_patch, disjoint_lines, object_of_cover, refinement,
                                   refining_labels, whole_patch)

    W = disjoint_lines(n)
    covers = {"A": {}, "B": {}, "C": {}}
    for k in W.index:
        covers["B"][k] = whole_patch(W, k)
        split = rnd.choice("AC")
        other = "C" if split == "A" else "A"
        roots = rnd.sample(range(-3, 4), rnd.randint(1, 3))
        if len(roots) == 1:
            covers[other][k] = whole_patch(W, k)
            covers[split][f"{k}w"] = whole_patch(W, k)
            continue
        for r in roots:
            covers[split][f"{k}r{r + 3}"] = basic_patch(W, k, f"x - {r}")
        covers[other][k] = whole_patch(W, k)
    objs = {n_: object_of_cover(AmbientCover(W, tuple(ps), ps)) for n_, ps in covers.items()}
    s = refinement(objs["A"], objs["B"], refining_labels(objs["A"], objs["B"]))
    g = refinement(objs["C"], objs["B"], refining_labels(objs["C"], objs["B"]))
    return s, g


def random_ugraph(rnd: random.Random, max_vertices: int = 8) -> UGraph:
    n = rnd.randint(1, max_vertices)
    names = [f"v{i}" for i in range(n)]
    p = rnd.random()
    return UGraph.from_pairs(names, [e for e in itertools.combinations(names, 2) if rnd.random() < p])


def random_functorial_sheaf(rnd: random.Random, P, k: int = 3) -> PoSheaf:
    """Quotients Q^k / span(e_i : i in S_p) with S_p growing along the order, then a random change of basis.

    Restrictions are the induced projections, so functoriality holds exactly
    while stalk dimensions and ranks vary.
    """
    own = {p: {i for i in range(k) if rnd.random() < 0.3} for p in P.elements}
    killed = {q: set().union(*(own[p] for p in P.elements if P.le(p, q))) for q in P.elements}
    keep = {p: [i for i in range(k) if i not in killed[p]] for p in P.elements}
    gauge = {p: _gauge(rnd, len(keep[p])) if keep[p] else Mat.zeros(0, 0) for p in P.elements}

    def project(p, q):
        rows = [[1 if i == j else 0 for j in keep[p]] for i in keep[q]]
        return Mat.from_rows(rows, len(keep[p]))

    res = {}
    for p, q in P.covers():
        M = project(p, q)
        if keep[p]:
            M = M @ inverse(gauge[p])
        if keep[q]:
            M = gauge[q] @ M
        res[(p, q)] = M
    return PoSheaf(P, VECT, {p: len(keep[p]) for p in P.elements}, res)


@st.composite
def functorial_sheaves(draw):
    rnd = random.Random(draw(st.integers(0, 2**32)))
    G = draw(ugraphs(max_vertices=4))
    return random_functorial_sheaf(rnd, simplex_poset(clique_complex(G)))
