"""Vector bundles (local systems) on graphs.

A bundle of rank n puts a copy of Q^n on every vertex and an invertible
matrix on every edge.  Matrices are stored in the direction they were given
(tail -> head) and inverted on demand for the opposite direction.

Vertices are ordered as in :func:`clique_complex`.  On a triangle a < b < c
the cocycle condition reads M_bc M_ab = M_ac, i.e. transport around
a -> b -> c -> a is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MalformedInput, ValidationError
from .finspace import FinPreorder
from .gluing import Report
from .linalg import Mat, frac, inverse, is_invertible, kernel, vstack
from .sheafcore import VECT, PoSheaf
from .sscomplex import SemiSimplicialSet2, UGraph, clique_complex, graph_from_json, simplex_poset


@dataclass(frozen=True, eq=False)
class GraphBundle:
    graph: UGraph
    rank: int
    edges: Mapping  # (tail, head) -> Mat, F_tail -> F_head
    triples: bool = True  # False: the cover has no triple intersections

    def __post_init__(self):
        seen = set()
        for (a, b), M in self.edges.items():
            if not _adjacent(self.graph, a, b):
                raise ValidationError(f"({a}, {b}) is not an edge")
            if frozenset((a, b)) in seen:
                raise ValidationError(f"edge {a}-{b} given twice")
            seen.add(frozenset((a, b)))
            if M.shape != (self.rank, self.rank):
                raise ValidationError(f"matrix on {a}-{b} has shape {M.shape}")
        for a, b in self.graph.edges:
            if frozenset((a, b)) not in seen:
                raise ValidationError(f"edge {a}-{b} has no matrix")

    @property
    def order(self) -> tuple:
        return tuple(self.graph.vertices)

    def transport(self, a, b) -> Mat:
        """Matrix F_a -> F_b along the edge between a and b."""
        if (a, b) in self.edges:
            return self.edges[(a, b)]
        if (b, a) in self.edges:
            M = self.edges[(b, a)]
            if not is_invertible(M):
                raise ValidationError(f"matrix on {b}-{a} is singular")
            return inverse(M)
        raise ValidationError(f"{a} and {b} are not adjacent")

    def complex(self):
        X = clique_complex(self.graph, self.order)
        if self.triples:
            return X
        # empty triple intersections: keep only vertices and edges
        return SemiSimplicialSet2(X.S0, X.S1, (), X.d0, X.d1, {}, {}, {})


def _adjacent(G: UGraph, a, b) -> bool:
    return any({a, b} == {x, y} for x, y in G.edges)


def validate_bundle(B: GraphBundle) -> Report:
    rep = Report()
    for (a, b), M in sorted(B.edges.items()):
        if not is_invertible(M):
            rep.fail("singular", (a, b), "edge matrix is not invertible")
    if not rep.ok or not B.triples:
        return rep
    X = B.complex()
    for t in X.S2:
        a, b, c = X.triangle_vertices(t)
        if B.transport(b, c) @ B.transport(a, b) != B.transport(a, c):
            rep.fail("cocycle", t, "transport around the triangle is not the identity")
    return rep


def monodromy(B: GraphBundle, walk: Sequence) -> Mat:
    """Product of transports along a closed vertex walk, first step applied first."""
    walk = list(walk)
    if len(walk) < 2 or walk[0] != walk[-1]:
        raise ValidationError("walk must be closed")
    M = Mat.identity(B.rank)
    for a, b in zip(walk, walk[1:]):
        if not _adjacent(B.graph, a, b):
            raise ValidationError(f"walk breaks between {a} and {b}")
        M = B.transport(a, b) @ M
    return M


def bundle_to_sheaf(B: GraphBundle) -> PoSheaf:
    """Sheaf on the simplex poset with every stalk identified with F of its first vertex.

    The restriction from a face to a simplex is transport from the face's
    first vertex to the simplex's first vertex, so all restrictions are
    invertible.
    """
    rep = validate_bundle(B)
    if not rep.ok:
        raise ValidationError(f"invalid bundle: {rep.problems[0]}")
    X = B.complex()
    P: FinPreorder = simplex_poset(X)
    first = {s: X.vertices_of(s)[0] for s in P.elements}
    stalks = {s: B.rank for s in P.elements}
    res = {}
    for p, q in P.covers():
        a, b = first[p], first[q]
        res[(p, q)] = Mat.identity(B.rank) if a == b else B.transport(a, b)
    return PoSheaf(P, VECT, stalks, res)


def fixed_space_dim(B: GraphBundle) -> int:
    """Dimension of the simultaneous fixed space of all monodromies, summed over components.

    Uses a spanning forest; the fundamental cycles generate each component's
    loop group, so their fixed spaces intersect to the global one.
    """
    adj = {v: [] for v in B.graph.vertices}
    for a, b in B.graph.edges:
        adj[a].append(b)
        adj[b].append(a)
    seen: dict = {}
    total = 0
    for root in B.graph.vertices:
        if root in seen:
            continue
        # BFS tree: path from root to each vertex
        path = {root: [root]}
        queue = [root]
        tree = set()
        seen[root] = True
        while queue:
            v = queue.pop(0)
            for w in adj[v]:
                if w not in path:
                    path[w] = path[v] + [w]
                    tree.add(frozenset((v, w)))
                    seen[w] = True
                    queue.append(w)
        blocks = []
        for a, b in B.graph.edges:
            if a in path and frozenset((a, b)) not in tree:
                loop = path[a] + list(reversed(path[b]))
                blocks.append(monodromy(B, loop) - Mat.identity(B.rank))
        if not blocks:
            total += B.rank
            continue
        total += kernel(vstack(blocks, B.rank)).ncols
    return total


def bundle_from_json(obj, path: str = "$") -> GraphBundle:
    if not isinstance(obj, dict):
        raise MalformedInput("bundle must be an object", path)
    G = graph_from_json(obj.get("graph"), f"{path}.graph")
    if not isinstance(G, UGraph):
        G = UGraph.from_pairs(G.vertices, [(t, h) for _, t, h in G.edges])
    n = obj.get("rank")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MalformedInput("rank must be a positive integer", f"{path}.rank")
    raw = obj.get("edges")
    if not isinstance(raw, dict):
        raise MalformedInput("edges must be an object", f"{path}.edges")
    edges = {}
    for key, rows in raw.items():
        where = f"{path}.edges[{key!r}]"
        parts = key.split(",")
        if len(parts) != 2:
            raise MalformedInput("edge keys look like 'a,b'", where)
        if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
            raise MalformedInput(f"expected a {n}x{n} matrix", where)
        try:
            edges[tuple(parts)] = Mat.from_rows([[frac(x) for x in r] for r in rows], n)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise MalformedInput(f"bad matrix entry: {exc}", where) from None
    triples = obj.get("triples", True)
    if not isinstance(triples, bool):
        raise MalformedInput("triples must be a boolean", f"{path}.triples")
    try:
        return GraphBundle(G, n, edges, triples)
    except ValidationError as exc:
        raise MalformedInput(str(exc), path) from None


def scalar_bundle(graph: UGraph, scalars: Mapping, triples: bool = True) -> GraphBundle:
    """Rank-one bundle from scalars keyed by (tail, head)."""
    return GraphBundle(graph, 1, {k: Mat.scalar(1, frac(v)) for k, v in scalars.items()}, triples)


def cycle_bundle(n: int, scalars: Sequence, names: Sequence[str] | None = None) -> GraphBundle:
    """Rank-one bundle on the n-cycle; scalar i sits on v_i -> v_{i+1}.

    A 3-cycle is a triangle, so it is built without triple intersections to
    let its monodromy be arbitrary.
    """
    names = list(names) if names is not None else [f"v{i}" for i in range(n)]
    pairs = [(names[i], names[(i + 1) % n]) for i in range(n)]
    G = UGraph.from_pairs(names, pairs)
    return scalar_bundle(G, dict(zip(pairs, scalars)), triples=n > 3)
