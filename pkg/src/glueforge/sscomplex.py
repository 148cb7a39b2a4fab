"""Graphs and 2-truncated semisimplicial sets.

Face convention: for an edge with vertex tuple (v0, v1), ``d0`` drops v0 and
returns the head v1, ``d1`` returns the tail v0.  For a 2-simplex (v0, v1, v2)
the face ``e_i`` drops v_i, so e0 = (v1, v2), e1 = (v0, v2), e2 = (v0, v1).
With this indexing the identities read d_i e_j = d_{j-1} e_i for i < j.

Simplex identifiers are strings built from vertex tuples joined by ``>``,
e.g. ``"a>b"`` for an edge and ``"a>b>c"`` for a triangle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import MalformedInput, ValidationError

SEP = ">"


def sid(*verts: str) -> str:
    return SEP.join(verts)


@dataclass(frozen=True)
class DiGraph:
    vertices: tuple
    edges: tuple  # (id, tail, head)

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValidationError("duplicate vertex")
        for eid, t, h in self.edges:
            if t not in vs or h not in vs:
                raise ValidationError(f"edge {eid} references an unknown vertex")

    @staticmethod
    def from_pairs(vertices: Iterable, pairs: Iterable[tuple]) -> "DiGraph":
        pairs = list(pairs)
        return DiGraph(tuple(vertices), tuple((f"{t}{SEP}{h}", t, h) for t, h in pairs))

    def at_most_one_edge(self) -> bool:
        pairs = [(t, h) for _, t, h in self.edges]
        return len(pairs) == len(set(pairs))

    def adjacent(self, u, v) -> bool:
        """Linked by an edge in each direction."""
        pairs = {(t, h) for _, t, h in self.edges}
        return (u, v) in pairs and (v, u) in pairs


@dataclass(frozen=True)
class UGraph:
    vertices: tuple
    edges: tuple  # unordered pairs stored as 2-tuples
    allow_loops: bool = False

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValidationError("duplicate vertex")
        for e in self.edges:
            if len(e) != 2 or e[0] not in vs or e[1] not in vs:
                raise ValidationError(f"bad edge {e!r}")

    @staticmethod
    def from_pairs(vertices: Iterable, pairs: Iterable[tuple]) -> "UGraph":
        return UGraph(tuple(vertices), tuple(tuple(p) for p in pairs))

    def is_simple(self) -> bool:
        keys = [frozenset(e) for e in self.edges]
        if len(keys) != len(set(keys)):
            return False
        return self.allow_loops or all(e[0] != e[1] for e in self.edges)

    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
        return adj


def graph_from_json(obj, path: str = "$"):
    """Parse ``{"vertices":[...],"edges":[[a,b],...],"directed":bool}``."""
    if not isinstance(obj, dict):
        raise MalformedInput("graph must be an object", path)
    if "vertices" not in obj or not isinstance(obj["vertices"], list):
        raise MalformedInput("missing vertex list", f"{path}.vertices")
    verts = []
    for i, v in enumerate(obj["vertices"]):
        if not isinstance(v, (str, int)) or isinstance(v, bool):
            raise MalformedInput("vertex names must be strings", f"{path}.vertices[{i}]")
        verts.append(str(v))
    edges = obj.get("edges", [])
    if not isinstance(edges, list):
        raise MalformedInput("edges must be a list", f"{path}.edges")
    pairs = []
    for i, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise MalformedInput("edge must be a pair", f"{path}.edges[{i}]")
        a, b = str(e[0]), str(e[1])
        for j, x in enumerate((a, b)):
            if x not in verts:
                raise MalformedInput(f"unknown vertex {x!r}", f"{path}.edges[{i}][{j}]")
        pairs.append((a, b))
    directed = obj.get("directed", False)
    if not isinstance(directed, bool):
        raise MalformedInput("directed must be a boolean", f"{path}.directed")
    try:
        if directed:
            return DiGraph.from_pairs(verts, pairs)
        return UGraph.from_pairs(verts, pairs)
    except ValidationError as exc:
        raise MalformedInput(str(exc), path) from exc


def _frozen(d: Mapping) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class SemiSimplicialSet2:
    S0: tuple
    S1: tuple
    S2: tuple
    d0: Mapping = field(repr=False)
    d1: Mapping = field(repr=False)
    e0: Mapping = field(repr=False)
    e1: Mapping = field(repr=False)
    e2: Mapping = field(repr=False)

    def __post_init__(self):
        for name in ("d0", "d1", "e0", "e1", "e2"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        s0, s1, s2 = set(self.S0), set(self.S1), set(self.S2)
        if len(s0) + len(s1) + len(s2) != len(s0 | s1 | s2):
            raise ValidationError("simplex identifiers must be distinct across dimensions")
        if len(s0) != len(self.S0) or len(s1) != len(self.S1) or len(s2) != len(self.S2):
            raise ValidationError("duplicate simplex identifier")
        for d in (self.d0, self.d1):
            if set(d) != s1 or not set(d.values()) <= s0:
                raise ValidationError("edge face map is not total into S0")
        for e in (self.e0, self.e1, self.e2):
            if set(e) != s2 or not set(e.values()) <= s1:
                raise ValidationError("triangle face map is not total into S1")
        bad = self.face_identity_failures()
        if bad:
            raise ValidationError(f"face identities fail at {bad[0]}")

    def face_identity_failures(self) -> list:
        d = (self.d0, self.d1)
        e = (self.e0, self.e1, self.e2)
        bad = []
        for s in self.S2:
            for i, j in ((0, 1), (0, 2), (1, 2)):
                if d[i][e[j][s]] != d[j - 1][e[i][s]]:
                    bad.append((s, i, j))
        return bad

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.S0), len(self.S1), len(self.S2))

    def edge_vertices(self, e: str) -> tuple:
        return (self.d1[e], self.d0[e])

    def triangle_vertices(self, t: str) -> tuple:
        a = self.e2[t]
        return (self.d1[a], self.d0[a], self.d0[self.e0[t]])

    def triangle_edges(self, t: str) -> tuple:
        return (self.e0[t], self.e1[t], self.e2[t])

    def vertices_of(self, s: str) -> tuple:
        if s in self.d0:
            return self.edge_vertices(s)
        if s in self.e0:
            return self.triangle_vertices(s)
        return (s,)

    def dim(self, s: str) -> int:
        if s in self.d0:
            return 1
        if s in self.e0:
            return 2
        return 0

    def faces(self, s: str) -> tuple:
        if s in self.d0:
            return (self.d0[s], self.d1[s])
        if s in self.e0:
            return (self.e0[s], self.e1[s], self.e2[s])
        return ()

    def to_json(self) -> dict:
        return {
            "S0": list(self.S0),
            "S1": {e: [self.d0[e], self.d1[e]] for e in self.S1},
            "S2": {t: [self.e0[t], self.e1[t], self.e2[t]] for t in self.S2},
            "counts": list(self.counts),
        }


@dataclass(frozen=True)
class SSMap:
    source: SemiSimplicialSet2
    target: SemiSimplicialSet2
    f0: Mapping
    f1: Mapping
    f2: Mapping

    def __post_init__(self):
        for name in ("f0", "f1", "f2"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        problems = self.problems()
        if problems:
            raise ValidationError(problems[0])

    def problems(self) -> list[str]:
        X, Y = self.source, self.target
        out = []
        for dom, cod, f, tag in ((X.S0, Y.S0, self.f0, "vertex"), (X.S1, Y.S1, self.f1, "edge"),
                                 (X.S2, Y.S2, self.f2, "triangle")):
            if set(f) != set(dom) or not set(f.values()) <= set(cod):
                out.append(f"{tag} map is not total")
        if out:
            return out
        for e in X.S1:
            if Y.d0[self.f1[e]] != self.f0[X.d0[e]] or Y.d1[self.f1[e]] != self.f0[X.d1[e]]:
                out.append(f"edge {e} does not commute with faces")
        for t in X.S2:
            for a, b in ((X.e0, Y.e0), (X.e1, Y.e1), (X.e2, Y.e2)):
                if b[self.f2[t]] != self.f1[a[t]]:
                    out.append(f"triangle {t} does not commute with faces")
                    break
        return out

    def __call__(self, s: str) -> str:
        for f in (self.f0, self.f1, self.f2):
            if s in f:
                return f[s]
        raise KeyError(s)

    def compose(self, other: "SSMap") -> "SSMap":
        """``other`` after ``self``."""
        return SSMap(self.source, other.target,
                     {k: other.f0[v] for k, v in self.f0.items()},
                     {k: other.f1[v] for k, v in self.f1.items()},
                     {k: other.f2[v] for k, v in self.f2.items()})


def identity_map(X: SemiSimplicialSet2) -> SSMap:
    return SSMap(X, X, {s: s for s in X.S0}, {s: s for s in X.S1}, {s: s for s in X.S2})


def from_vertex_tuples(vertices: Sequence[str], edges: Sequence[tuple], triangles: Sequence[tuple]) -> SemiSimplicialSet2:
    """Build a semisimplicial set whose simplices are named by vertex tuples."""
    S1 = [sid(*e) for e in edges]
    S2 = [sid(*t) for t in triangles]
    d0 = {sid(*e): e[1] for e in edges}
    d1 = {sid(*e): e[0] for e in edges}
    e0 = {sid(*t): sid(t[1], t[2]) for t in triangles}
    e1 = {sid(*t): sid(t[0], t[2]) for t in triangles}
    e2 = {sid(*t): sid(t[0], t[1]) for t in triangles}
    return SemiSimplicialSet2(tuple(vertices), tuple(S1), tuple(S2), d0, d1, e0, e1, e2)


def _check_names(vertices) -> None:
    for v in vertices:
        if SEP in str(v):
            raise ValidationError(f"vertex name {v!r} contains the reserved separator {SEP!r}")


def clique_complex(G, order: Sequence | None = None) -> SemiSimplicialSet2:
    """1-, 2- and 3-cliques of ``G`` with faces ordered by ``order``.

    For a :class:`DiGraph`, two vertices are adjacent when linked by an edge
    in each direction.  ``order`` defaults to the vertex sequence of ``G``.
    """
    order = list(G.vertices if order is None else order)
    if sorted(map(str, order)) != sorted(map(str, G.vertices)) or len(set(order)) != len(order):
        raise ValidationError("order must be a permutation of the vertices")
    _check_names(order)
    if isinstance(G, DiGraph):
        if not G.at_most_one_edge():
            raise ValidationError("digraph has parallel edges")
        pairs = {(t, h) for _, t, h in G.edges}
        adj = {v: set() for v in G.vertices}
        for t, h in pairs:
            if t != h and (h, t) in pairs:
                adj[t].add(h)
    elif isinstance(G, UGraph):
        if not G.is_simple():
            raise ValidationError("graph is not simple")
        adj = G.adjacency()
    else:
        raise TypeError("expected a DiGraph or UGraph")
    edges = [(u, v) for u, v in itertools.combinations(order, 2) if v in adj[u]]
    tris = [(u, v, w) for u, v, w in itertools.combinations(order, 3)
            if v in adj[u] and w in adj[u] and w in adj[v]]
    return from_vertex_tuples(order, edges, tris)


def oriented_complex(G: DiGraph) -> SemiSimplicialSet2:
    """Clique complex of an acyclic digraph, keeping its edge directions.

    Adjacency is "linked by some edge"; the vertex order is the topological
    order that lists vertices as early as the input sequence allows.
    """
    if not G.at_most_one_edge():
        raise ValidationError("digraph has parallel edges")
    pairs = {(t, h) for _, t, h in G.edges}
    if any(t == h for t, h in pairs):
        raise ValidationError("self-loops are not allowed")
    if any((h, t) in pairs for t, h in pairs):
        raise ValidationError("antiparallel edges have no single orientation")
    order = _topological(G.vertices, pairs)
    U = UGraph.from_pairs(G.vertices, sorted(pairs))
    return clique_complex(U, order)


def _topological(vertices, pairs) -> list:
    indeg = {v: 0 for v in vertices}
    for _, h in pairs:
        indeg[h] += 1
    out = []
    ready = [v for v in vertices if indeg[v] == 0]
    pos = {v: i for i, v in enumerate(vertices)}
    while ready:
        ready.sort(key=pos.get)
        v = ready.pop(0)
        out.append(v)
        for t, h in sorted(pairs, key=lambda p: (pos[p[0]], pos[p[1]])):
            if t == v:
                indeg[h] -= 1
                if indeg[h] == 0:
                    ready.append(h)
    if len(out) != len(vertices):
        raise ValidationError("digraph has a directed cycle")
    return out


def is_regular(X: SemiSimplicialSet2) -> bool:
    for e in X.S1:
        if X.d0[e] == X.d1[e]:
            return False
    for t in X.S2:
        if len(set(X.triangle_vertices(t))) != 3 or len(set(X.triangle_edges(t))) != 3:
            return False
    return True


def is_clique_complex(X: SemiSimplicialSet2) -> bool:
    """Regular, one edge per adjacent pair, one triangle per 3-clique."""
    if not is_regular(X):
        return False
    keys = [frozenset(X.edge_vertices(e)) for e in X.S1]
    if len(keys) != len(set(keys)):
        return False
    adj = {v: set() for v in X.S0}
    for k in keys:
        a, b = tuple(k)
        adj[a].add(b)
        adj[b].add(a)
    tri_keys = [frozenset(X.triangle_vertices(t)) for t in X.S2]
    if len(tri_keys) != len(set(tri_keys)):
        return False
    cliques = {frozenset(c) for c in itertools.combinations(X.S0, 3)
               if c[1] in adj[c[0]] and c[2] in adj[c[0]] and c[2] in adj[c[1]]}
    return cliques == set(tri_keys)


def degenerate_expansion(X: SemiSimplicialSet2) -> SemiSimplicialSet2:
    """Add a loop and a triangle u>u>u at every vertex, and u>u>v, u>v>v per edge.

    The per-vertex triangle is added for isolated vertices too.
    """
    if not is_clique_complex(X):
        raise ValidationError("degenerate expansion needs a clique complex")
    S1 = list(X.S1)
    S2 = list(X.S2)
    d0, d1 = dict(X.d0), dict(X.d1)
    e0, e1, e2 = dict(X.e0), dict(X.e1), dict(X.e2)
    taken = set(X.S0) | set(X.S1) | set(X.S2)

    def fresh(name):
        if name in taken:
            raise ValidationError(f"identifier clash on {name!r}")
        taken.add(name)
        return name

    loop = {}
    for u in X.S0:
        lp = fresh(sid(u, u))
        loop[u] = lp
        S1.append(lp)
        d0[lp] = d1[lp] = u
    for u in X.S0:
        t = fresh(sid(u, u, u))
        S2.append(t)
        e0[t] = e1[t] = e2[t] = loop[u]
    for e in X.S1:
        u, v = X.edge_vertices(e)
        t = fresh(sid(u, u, v))
        S2.append(t)
        e0[t], e1[t], e2[t] = e, e, loop[u]
        t = fresh(sid(u, v, v))
        S2.append(t)
        e0[t], e1[t], e2[t] = loop[v], e, e
    return SemiSimplicialSet2(X.S0, tuple(S1), tuple(S2), d0, d1, e0, e1, e2)


def canonical_form(X: SemiSimplicialSet2) -> tuple:
    """Order-independent fingerprint: vertex sets of simplices per dimension."""
    return (
        frozenset(X.S0),
        frozenset(frozenset(X.edge_vertices(e)) for e in X.S1),
        frozenset(frozenset(X.triangle_vertices(t)) for t in X.S2),
    )


def simplex_poset(X: SemiSimplicialSet2):
    """Face poset of ``X``: elements are all simplices, x <= y iff x is an iterated face of y."""
    from .finspace import FinPreorder

    elems = list(X.S0) + list(X.S1) + list(X.S2)
    covers = [(f, s) for s in list(X.S1) + list(X.S2) for f in set(X.faces(s))]
    return FinPreorder.from_covers(elems, covers)
