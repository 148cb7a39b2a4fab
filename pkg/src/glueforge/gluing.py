"""Gluing data, gluing functors, and the finite models S_U and S_U^2.

Two flavours of patch appear here.  Affine patches are :class:`LocRing`
objects, and an open embedding Spec B -> Spec A is recorded by its ring map
A -> B.  Finite patches are ring- or vector-valued sheaves on finite posets
(:class:`PoSheaf`), glued by identifying points.

Ring-map conventions for a gluing datum on index set I:

* ``overlaps[(i, j)]`` is the map A_i -> A_ij, where Spec A_ij = U_ij lies in U_i;
* ``transitions[(j, i)]`` is the ring map A_ji -> A_ij of phi_ji: U_ij -> U_ji.

Triple overlaps are always computed inside the lowest-indexed patch.
"""

from __future__ import annotations

import functools
import itertools
import operator
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import ringcat
from .errors import MalformedInput, ValidationError
from .finspace import AlexandrovSpace, FinPreorder, MonotoneMap, alexandrov
from .ringcat import LocRing, RingMor
from .sheafcore import RING, VECT, PoSheaf, pushforward
from .sscomplex import SEP, SemiSimplicialSet2, UGraph, clique_complex, from_vertex_tuples, is_clique_complex, sid, simplex_poset


@dataclass
class Report:
    ok: bool = True
    problems: list = field(default_factory=list)

    def fail(self, kind: str, where, detail: str = "") -> None:
        self.ok = False
        self.problems.append({"kind": kind, "where": list(where) if isinstance(where, tuple) else where,
                              "detail": detail})

    def to_json(self) -> dict:
        return {"ok": self.ok, "problems": self.problems}


# -- gluing data -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GluingDatum:
    index: tuple
    patches: Mapping
    overlaps: Mapping
    transitions: Mapping

    def overlap(self, i, j) -> RingMor:
        if i == j and (i, i) not in self.overlaps:
            return ringcat.identity(self.patches[i])
        return self.overlaps[(i, j)]

    def phi(self, j, i) -> RingMor:
        """Ring map A_ji -> A_ij of the transition phi_ji."""
        if (j, i) not in self.transitions and i == j:
            return ringcat.identity(self.overlap(i, i).target)
        return self.transitions[(j, i)]


def _triple_ring(W: GluingDatum, i, j, k):
    """Ring of U_ij n U_ik inside U_i with the maps from A_ij and A_ik."""
    return ringcat.pullback_ring(W.patches[i], W.overlap(i, j), W.overlap(i, k))


def _extend_phi(W: GluingDatum, j, i, k):
    """phi_ji restricted to U_ij n U_ik, as a ring map (ring of U_ji n U_jk) -> (ring of U_ij n U_ik)."""
    Pj, _, _ = _triple_ring(W, j, i, k)
    Pi, from_ij, _ = _triple_ring(W, i, j, k)
    # A_j -> A_ji -> A_ij -> Pi
    lead = ringcat.compose(ringcat.compose(W.overlap(j, i), W.phi(j, i)), from_ij)
    if Pj.is_zero:
        if not Pi.is_zero:
            raise ValidationError("empty intersection mapped onto a nonempty one")
        return ringcat.identity(Pj)
    if Pi.is_zero:
        return ringcat.to_zero(Pj)
    return RingMor(Pj, Pi, lead.images)


def validate_gluing_datum(W: GluingDatum) -> Report:
    rep = Report()
    I = list(W.index)
    for i in I:
        if i not in W.patches:
            rep.fail("missing-patch", i)
    if not rep.ok:
        return rep
    for i in I:
        for j in I:
            if i == j:
                continue
            if (i, j) not in W.overlaps:
                rep.fail("missing-overlap", (i, j))
                continue
            m = W.overlaps[(i, j)]
            if m.source != W.patches[i]:
                rep.fail("overlap-source", (i, j), "overlap map must start at the patch ring")
            elif not ringcat.is_open_embedding(m):
                rep.fail("non-open-overlap", (i, j), f"{m!r} is not an open embedding")
    if not rep.ok:
        return rep
    for i in I:
        if W.phi(i, i) != ringcat.identity(W.overlap(i, i).target):
            rep.fail("phi-ii-not-identity", (i, i))
    for i in I:
        for j in I:
            if i == j:
                continue
            if (j, i) not in W.transitions:
                rep.fail("missing-transition", (j, i))
                continue
            t = W.transitions[(j, i)]
            if t.source != W.overlap(j, i).target or t.target != W.overlap(i, j).target:
                rep.fail("transition-endpoints", (j, i))
            elif not ringcat.is_iso(t):
                rep.fail("transition-not-iso", (j, i))
    if not rep.ok:
        return rep
    for i, j, k in itertools.product(I, repeat=3):
        if i == j == k:
            continue
        try:
            ji = _extend_phi(W, j, i, k)
            kj = _extend_phi(W, k, j, i)
            ki = _extend_phi(W, k, i, j)
        except ValidationError as exc:
            rep.fail("cocycle", (i, j, k), str(exc))
            continue
        if ringcat.compose(kj, ji) != ki:
            rep.fail("cocycle", (i, j, k), "phi_ki differs from phi_kj o phi_ji on the triple overlap")
    return rep


def normalize_datum(W: GluingDatum) -> dict:
    """Canonical form: for i < j both patch maps into A_ij, transitions absorbed."""
    pos = {i: n for n, i in enumerate(W.index)}
    out = {"patches": {i: W.patches[i] for i in W.index}, "edges": {}}
    for i, j in itertools.combinations(W.index, 2):
        if pos[i] > pos[j]:
            i, j = j, i
        left = W.overlap(i, j)
        right = ringcat.compose(W.overlap(j, i), W.phi(j, i))
        out["edges"][(i, j)] = (left, right)
    return out


def data_isomorphic(W1: GluingDatum, W2: GluingDatum) -> bool:
    if tuple(W1.index) != tuple(W2.index):
        return False
    a, b = normalize_datum(W1), normalize_datum(W2)
    if a["patches"] != b["patches"]:
        return False
    return all(a["edges"][e][0] == b["edges"][e][0] and a["edges"][e][1] == b["edges"][e][1]
               for e in a["edges"])


# -- gluing functors on categories of simplices -------------------------------

@dataclass(frozen=True, eq=False)
class GluingFunctor:
    """Ring-valued functor on the simplex poset of a clique complex.

    ``values`` maps simplices to rings; ``arrows`` maps (face, simplex) for
    codimension-one faces to the ring map F(face) -> F(simplex).
    """

    base: SemiSimplicialSet2
    values: Mapping
    arrows: Mapping

    def arrow(self, a, b) -> RingMor:
        """Ring map F(a) -> F(b) for a face a of b (any codimension)."""
        if a == b:
            return ringcat.identity(self.values[a])
        if (a, b) in self.arrows:
            return self.arrows[(a, b)]
        X = self.base
        for e in X.faces(b):
            if a == e or a in X.faces(e):
                return ringcat.compose(self.arrow(a, e), self.arrows[(e, b)])
        raise ValidationError(f"{a!r} is not a face of {b!r}")


def _functor_problems(F: GluingFunctor, rep: Report) -> None:
    X = F.base
    for s in list(X.S1) + list(X.S2):
        for f in set(X.faces(s)):
            if (f, s) not in F.arrows:
                rep.fail("missing-arrow", (f, s))
                continue
            m = F.arrows[(f, s)]
            if m.source != F.values[f] or m.target != F.values[s]:
                rep.fail("arrow-endpoints", (f, s))
    if not rep.ok:
        return
    for t in X.S2:
        for v in set(X.triangle_vertices(t)):
            paths = [ringcat.compose(F.arrows[(v, e)], F.arrows[(e, t)])
                     for e in set(X.triangle_edges(t)) if v in X.faces(e)]
            if any(p != paths[0] for p in paths[1:]):
                rep.fail("not-a-functor", (v, t), "the two routes from vertex to triangle differ")


def _cartesian(A: LocRing, b: RingMor, c: RingMor, apex: LocRing, b_apex: RingMor, c_apex: RingMor) -> bool:
    P, to_b, to_c = ringcat.pullback_ring(A, b, c)
    if P.is_zero or apex.is_zero:
        return P.is_zero and apex.is_zero
    try:
        theta = RingMor(P, apex, ringcat.compose(b, b_apex).images)
    except ValidationError:
        return False
    return (ringcat.is_iso(theta) and ringcat.compose(to_b, theta) == b_apex
            and ringcat.compose(to_c, theta) == c_apex)


def check_gluing_functor(F: GluingFunctor) -> Report:
    rep = Report()
    X = F.base
    if not is_clique_complex(X):
        rep.fail("base", "$", "base must be a clique complex")
        return rep
    _functor_problems(F, rep)
    if not rep.ok:
        return rep
    # wedges: every arrow is an open embedding
    for (a, b), m in sorted(F.arrows.items()):
        if not ringcat.is_open_embedding(m):
            rep.fail("wedge", (a, b), "arrow is not an open embedding")
    # cubes: the three squares at the vertices are cartesian
    for t in X.S2:
        for v in X.triangle_vertices(t):
            e1, e2 = [e for e in X.triangle_edges(t) if v in X.faces(e)]
            if not _cartesian(F.values[v], F.arrows[(v, e1)], F.arrows[(v, e2)],
                              F.values[t], F.arrows[(e1, t)], F.arrows[(e2, t)]):
                rep.fail("cube", (v, t), "square is not cartesian")
    # non-adjacent vertices meet in the empty space through any middle vertex
    adj = {v: set() for v in X.S0}
    inc = {v: [] for v in X.S0}
    for e in X.S1:
        a, b = X.edge_vertices(e)
        adj[a].add(b)
        adj[b].add(a)
        inc[a].append((e, b))
        inc[b].append((e, a))
    for c in X.S0:
        for (e1, a), (e2, b) in itertools.combinations(inc[c], 2):
            if b in adj[a]:
                continue
            P = ringcat.pullback_ring(F.values[c], F.arrows[(c, e1)], F.arrows[(c, e2)])[0]
            if not P.is_zero:
                rep.fail("non-adjacent", (a, c, b), f"pullback over {c!r} is {P}, not empty")
    return rep


def datum_of_functor(F: GluingFunctor) -> GluingDatum:
    """Patches on vertices, U_ij = U_ji = F(edge), identity transitions.

    Vertex pairs without an edge get the zero overlap.
    """
    X = F.base
    idx = tuple(X.S0)
    patches = {v: F.values[v] for v in idx}
    edge_of = {}
    for e in X.S1:
        a, b = X.edge_vertices(e)
        edge_of[(a, b)] = edge_of[(b, a)] = e
    overlaps, transitions = {}, {}
    zero = LocRing.zero()
    for i in idx:
        for j in idx:
            if i == j:
                continue
            e = edge_of.get((i, j))
            if e is None:
                overlaps[(i, j)] = ringcat.to_zero(patches[i])
                transitions[(i, j)] = ringcat.identity(zero)
            else:
                overlaps[(i, j)] = F.arrows[(i, e)]
                transitions[(i, j)] = ringcat.identity(F.values[e])
    return GluingDatum(idx, patches, overlaps, transitions)


datum_of_cube = datum_of_functor


def triangle_base(names: Sequence[str] = ("1", "2", "3")) -> SemiSimplicialSet2:
    a, b, c = names
    return from_vertex_tuples([a, b, c], [(a, b), (a, c), (b, c)], [(a, b, c)])


def cube_of_datum(W: GluingDatum) -> GluingFunctor:
    """Gluing cube of a three-patch datum; the apex is U_12 n U_13 computed in U_1."""
    if len(W.index) != 3:
        raise ValidationError("gluing cubes come from data with exactly three patches")
    i1, i2, i3 = W.index
    X = triangle_base(W.index)
    values = {i: W.patches[i] for i in W.index}
    arrows = {}
    for i, j in ((i1, i2), (i1, i3), (i2, i3)):
        e = sid(i, j)
        values[e] = W.overlap(i, j).target
        arrows[(i, e)] = W.overlap(i, j)
        arrows[(j, e)] = ringcat.compose(W.overlap(j, i), W.phi(j, i))
    t = sid(i1, i2, i3)
    P, from12, from13 = _triple_ring(W, i1, i2, i3)
    values[t] = P
    arrows[(sid(i1, i2), t)] = from12
    arrows[(sid(i1, i3), t)] = from13
    # A_23 -> (U_23 n U_21 inside U_2) -> phi_21 -> P
    P2, from23, _ = _triple_ring(W, i2, i3, i1)
    arrows[(sid(i2, i3), t)] = ringcat.compose(from23, _extend_phi(W, i2, i1, i3))
    return GluingFunctor(X, values, arrows)


def cubes_isomorphic(F: GluingFunctor, G: GluingFunctor) -> bool:
    """Same vertex and edge data, and apexes related by an isomorphism compatible with the maps."""
    X = F.base
    if canonical_base(X) != canonical_base(G.base):
        return False
    low = list(X.S0) + list(X.S1)
    if any(F.values[s] != G.values[s] for s in low):
        return False
    for (a, b), m in F.arrows.items():
        if b in X.S1 and G.arrows.get((a, b)) != m:
            return False
    for t in X.S2:
        fa, ga = F.values[t], G.values[t]
        if fa.is_zero or ga.is_zero:
            if not (fa.is_zero and ga.is_zero):
                return False
            continue
        v = X.triangle_vertices(t)[0]
        sf = ringcat.embedding_factors(F.arrow(v, t))
        sg = ringcat.embedding_factors(G.arrow(v, t))
        if sf is None or sg is None or sf[0] != sg[0]:
            return False
        theta = ringcat.compose(sf[2], sg[1])  # F(t) -> A_v[T] -> G(t)
        if not ringcat.is_iso(theta):
            return False
        for e in set(X.triangle_edges(t)):
            if ringcat.compose(F.arrows[(e, t)], theta) != G.arrows[(e, t)]:
                return False
    return True


def canonical_base(X: SemiSimplicialSet2) -> tuple:
    return (X.S0, tuple(sorted(X.S1)), tuple(sorted(X.S2)))


# -- finite ringed models and their colimits -----------------------------------

@dataclass(frozen=True, eq=False)
class ModelEmbedding:
    """Open embedding of finite models: ``source`` sits inside ``target`` via ``points``.

    The structure sheaf restricts literally: stalks and restrictions agree.
    """

    source: PoSheaf
    target: PoSheaf
    points: Mapping

    def __post_init__(self):
        S, T = self.source.base, self.target.base
        if set(self.points) != set(S.elements):
            raise ValidationError("embedding must be defined on every point")
        img = list(self.points.values())
        if len(set(img)) != len(img):
            raise ValidationError("embedding is not injective")
        if not alexandrov(T).is_open(T.mask(img)):
            raise ValidationError("embedding image is not open")
        for p in S.elements:
            for q in S.elements:
                if S.le(p, q) != T.le(self.points[p], self.points[q]):
                    raise ValidationError("embedding does not preserve the order exactly")
            if self.source.stalks[p] != self.target.stalks[self.points[p]]:
                raise ValidationError(f"stalk at {p!r} differs from its image")
        for p, q in S.pairs():
            if self.source.res(p, q) != self.target.res(self.points[p], self.points[q]):
                raise ValidationError(f"restriction {p!r} <= {q!r} differs from its image")


def restrict_model(M: PoSheaf, mask: int) -> tuple[PoSheaf, ModelEmbedding]:
    """The open submodel on ``mask`` with its inclusion."""
    P = M.base
    if not alexandrov(P).is_open(mask):
        raise ValidationError("submodels live on open sets")
    pts = P.subset(mask)
    Q = P.restrict(pts)
    sub = PoSheaf(Q, M.kind, {p: M.stalks[p] for p in pts},
                  {(p, q): M.res(p, q) for p, q in Q.pairs() if p != q})
    return sub, ModelEmbedding(sub, M, {p: p for p in pts})


@dataclass(frozen=True, eq=False)
class ModelFunctor:
    """Finite models on the simplices of a clique complex.

    ``embeddings[(face, simplex)]`` embeds the model of the simplex into the
    model of its face.
    """

    base: SemiSimplicialSet2
    models: Mapping
    embeddings: Mapping


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the earlier representative so names are stable
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True, eq=False)
class GluedModel:
    sheaf: PoSheaf
    inclusions: Mapping  # vertex -> {patch point: glued point}


def glue_finite(F: ModelFunctor) -> GluedModel:
    """Colimit of a finite-model gluing functor: disjoint union modulo overlaps."""
    X = F.base
    order = {v: n for n, v in enumerate(X.S0)}
    tags = [(order[v], v, p) for v in X.S0 for p in F.models[v].base.elements]
    key = {(v, p): (n, v, p) for n, v, p in tags}
    uf = _UnionFind(tags)
    for e in X.S1:
        a, b = X.edge_vertices(e)
        ea, eb = F.embeddings[(a, e)], F.embeddings[(b, e)]
        for z in F.models[e].base.elements:
            uf.union(key[(a, ea.points[z])], key[(b, eb.points[z])])
    # the triangle models must land on the same glued points through every route
    for t in X.S2:
        for v in set(X.triangle_vertices(t)):
            routes = []
            for e in set(X.triangle_edges(t)):
                if v in X.faces(e):
                    te, ev = F.embeddings[(e, t)], F.embeddings[(v, e)]
                    routes.append({z: uf.find(key[(v, ev.points[te.points[z]])])
                                   for z in F.models[t].base.elements})
            if any(r != routes[0] for r in routes[1:]):
                raise ValidationError(f"triangle {t!r} is glued inconsistently over {v!r}")
    classes = {}
    for tg in tags:
        classes.setdefault(uf.find(tg), []).append(tg)
    names = {}
    for root, mem in classes.items():
        n, v, p = root
        names[root] = p if not any(r != root and r[2] == p for r in classes) else f"{v}{SEP}{p}"
    elems = [names[r] for r in sorted(classes)]
    incl = {v: {p: names[uf.find(key[(v, p)])] for p in F.models[v].base.elements} for v in X.S0}
    covers = []
    for v in X.S0:
        P = F.models[v].base
        covers += [(incl[v][p], incl[v][q]) for p, q in P.pairs() if p != q]
    glued = FinPreorder.from_covers(elems, covers)
    rep_of = {names[r]: (r[1], r[2]) for r in classes}
    stalks = {}
    kind = F.models[X.S0[0]].kind if X.S0 else VECT
    for g in elems:
        v, p = rep_of[g]
        stalks[g] = F.models[v].stalks[p]
    res = {}
    for g in elems:
        v, p = rep_of[g]
        inv = {incl[v][q]: q for q in F.models[v].base.elements}
        for h in glued.elements:
            if h == g or not glued.le(g, h):
                continue
            if h not in inv:
                raise ValidationError(f"minimal open of {g!r} leaves its patch; identifications are not open")
            res[(g, h)] = F.models[v].res(p, inv[h])
    for v in X.S0:
        for p, q in F.models[v].base.pairs():
            g, h = incl[v][p], incl[v][q]
            if g != h and (g, h) in res and res[(g, h)] != F.models[v].res(p, q):
                raise ValidationError(f"patches disagree on the restriction {g!r} <= {h!r}")
            if F.models[v].stalks[p] != stalks[g]:
                raise ValidationError(f"patches disagree on the value at {g!r}")
    sheaf = PoSheaf(glued, kind, stalks, res)
    Xg = alexandrov(glued)
    for v in X.S0:
        if not Xg.is_open(glued.mask(incl[v].values())):
            raise ValidationError(f"patch {v!r} does not embed openly")
    adj = {v: set() for v in X.S0}
    for e in X.S1:
        a, b = X.edge_vertices(e)
        adj[a].add(b)
        adj[b].add(a)
    for a, b in itertools.combinations(X.S0, 2):
        if b not in adj[a] and set(incl[a].values()) & set(incl[b].values()):
            raise ValidationError(f"non-adjacent patches {a!r} and {b!r} overlap")
    return GluedModel(sheaf, incl)


def model_functor_of_cover(S: PoSheaf, cover: Sequence, names: Sequence[str] | None = None) -> ModelFunctor:
    """Restrictions of ``S`` to the members of an open cover and their intersections."""
    P = S.base
    masks = [_as_mask(P, U) for U in cover]
    names = list(names) if names is not None else [f"U{i + 1}" for i in range(len(masks))]
    mk = dict(zip(names, masks))
    pairs = [(a, b) for a, b in itertools.combinations(names, 2) if mk[a] & mk[b]]
    X = clique_complex(UGraph.from_pairs(names, pairs), names)
    models = {}
    for s in list(X.S0) + list(X.S1) + list(X.S2):
        m = functools.reduce(operator.and_, (mk[v] for v in set(X.vertices_of(s))))
        models[s] = restrict_model(S, m)[0]
    embeddings = {}
    for s in list(X.S1) + list(X.S2):
        for f in set(X.faces(s)):
            embeddings[(f, s)] = ModelEmbedding(models[s], models[f], {p: p for p in models[s].base.elements})
    return ModelFunctor(X, models, embeddings)


# -- S_U ---------------------------------------------------------------------

def _as_mask(P: FinPreorder, U) -> int:
    return U if isinstance(U, int) else P.mask(U)


def build_SU(S: PoSheaf, cover: Sequence) -> tuple[PoSheaf, MonotoneMap]:
    """Quotient by equal cover signatures, with the pushed-forward sheaf."""
    P = S.base
    X = alexandrov(P)
    masks = [_as_mask(P, U) for U in cover]
    for m in masks:
        if not X.is_open(m):
            raise ValidationError("cover members must be open")
    union = 0
    for m in masks:
        union |= m
    if union != X.full:
        raise ValidationError("the opens do not cover the space")
    Us = {}
    for i, p in enumerate(P.elements):
        inter = X.full
        for m in masks:
            if m >> i & 1:
                inter &= m
        Us[p] = inter
    classes = []
    for p in P.elements:
        for c in classes:
            if Us[c[0]] == Us[p]:
                c.append(p)
                break
        else:
            classes.append([p])
    name = {p: ",".join(c) for c in classes for p in c}
    elems = [",".join(c) for c in classes]
    rep = {",".join(c): c[0] for c in classes}
    # [s] <= [t] iff U^s contains U^t
    leq = tuple(tuple(Us[rep[b]] & ~Us[rep[a]] == 0 for b in elems) for a in elems)
    Q = FinPreorder(tuple(elems), leq)
    pi = MonotoneMap(P, Q, {p: name[p] for p in P.elements})
    return pushforward(S, pi), pi


# -- cover nerves and S_U^2 -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoverNerve:
    """Rings on the simplices of a cover's clique complex.

    ``patches`` lists the cover in order; ``overlaps[(i, j)]`` for i before j is
    ``(A_ij, A_i -> A_ij, A_j -> A_ij)``; ``triples[(i, j, k)]`` is
    ``(A_ijk, {(i, j): A_ij -> A_ijk, (i, k): ..., (j, k): ...})``.  A missing
    triple over a 3-clique is an empty intersection and carries the zero ring.
    """

    order: tuple
    patches: Mapping
    overlaps: Mapping
    triples: Mapping = field(default_factory=dict)

    def graph(self) -> UGraph:
        return UGraph.from_pairs(self.order, list(self.overlaps))

    def complex(self) -> SemiSimplicialSet2:
        return clique_complex(self.graph(), self.order)

    def functor(self) -> GluingFunctor:
        X = self.complex()
        values, arrows = {}, {}
        for i in self.order:
            values[i] = self.patches[i]
        for e in X.S1:
            i, j = X.edge_vertices(e)
            R, fi, fj = self.overlaps[(i, j)]
            values[e] = R
            arrows[(i, e)] = fi
            arrows[(j, e)] = fj
        for t in X.S2:
            i, j, k = X.triangle_vertices(t)
            if (i, j, k) in self.triples:
                R, maps = self.triples[(i, j, k)]
                values[t] = R
                for a, b in ((i, j), (i, k), (j, k)):
                    arrows[(sid(a, b), t)] = maps[(a, b)]
            else:
                values[t] = LocRing.zero()
                for a, b in ((i, j), (i, k), (j, k)):
                    arrows[(sid(a, b), t)] = ringcat.to_zero(values[sid(a, b)])
        return GluingFunctor(X, values, arrows)


@dataclass(frozen=True, eq=False)
class SU2:
    space: AlexandrovSpace
    sheaf: PoSheaf
    complex: SemiSimplicialSet2

    @property
    def points(self) -> tuple:
        return self.space.points

    def is_paraschematic(self) -> bool:
        return all(ringcat.is_open_embedding(self.sheaf.res(p, q)) for p, q in self.sheaf.base.pairs())


def build_SU2(nerve: CoverNerve) -> SU2:
    F = nerve.functor()
    rep = Report()
    _functor_problems(F, rep)
    if not rep.ok:
        raise ValidationError(f"inconsistent nerve: {rep.problems[0]}")
    X = F.base
    P = simplex_poset(X)
    res = {}
    for p, q in P.pairs():
        if p != q:
            res[(p, q)] = F.arrow(p, q)
    sheaf = PoSheaf(P, RING, dict(F.values), res)
    return SU2(alexandrov(P), sheaf, X)


def remove_empty_triples(su2: SU2) -> tuple[SU2, MonotoneMap, dict]:
    """Drop triangle points carrying the zero ring.

    Returns the reduced model, the inclusion of its points, and the sheaf
    comparison at each kept point (identity maps, since values are kept).
    The sheaf comparison is an isomorphism; the spaces themselves differ.
    """
    P = su2.sheaf.base
    keep = [p for p in P.elements if not (p in su2.complex.S2 and su2.sheaf.stalks[p].is_zero)]
    Q = P.restrict(keep)
    sheaf = PoSheaf(Q, RING, {p: su2.sheaf.stalks[p] for p in keep},
                    {(p, q): su2.sheaf.res(p, q) for p, q in Q.pairs() if p != q})
    f = MonotoneMap(Q, P, {p: p for p in keep})
    phi = {p: ringcat.identity(su2.sheaf.stalks[p]) for p in keep}
    reduced = SU2(alexandrov(Q), sheaf, su2.complex)
    return reduced, f, phi


def nerve_of_model(S: PoSheaf, cover: Sequence, names: Sequence[str] | None = None) -> CoverNerve:
    """Nerve of a cover of a finite ring-valued model by basic opens."""
    if S.kind != RING:
        raise ValidationError("nerves carry ring values")
    P = S.base
    masks = [_as_mask(P, U) for U in cover]
    names = list(names) if names is not None else [f"U{i + 1}" for i in range(len(masks))]

    def basic(mask):
        mins = P.minimal(mask)
        if len(mins) != 1:
            raise ValidationError("cover intersections must be basic opens in this fragment")
        return mins[0]

    gens = {n: basic(m) for n, m in zip(names, masks)}
    patches = {n: S.stalks[g] for n, g in gens.items()}
    overlaps, triples = {}, {}
    mk = dict(zip(names, masks))
    for a, b in itertools.combinations(names, 2):
        m = mk[a] & mk[b]
        if m:
            g = basic(m)
            overlaps[(a, b)] = (S.stalks[g], S.res(gens[a], g), S.res(gens[b], g))
    for a, b, c in itertools.combinations(names, 3):
        if (a, b) in overlaps and (a, c) in overlaps and (b, c) in overlaps:
            m = mk[a] & mk[b] & mk[c]
            if m:
                g = basic(m)
                maps = {}
                for x, y in ((a, b), (a, c), (b, c)):
                    gxy = basic(mk[x] & mk[y])
                    maps[(x, y)] = S.res(gxy, g)
                triples[(a, b, c)] = (S.stalks[g], maps)
    return CoverNerve(tuple(names), patches, overlaps, triples)


# -- JSON ----------------------------------------------------------------------

def _map_json(obj, src: LocRing, tgt: LocRing, path: str) -> RingMor:
    if tgt.is_zero:
        return ringcat.to_zero(src)
    if obj is None:
        try:
            return ringcat.inclusion(src, tgt)
        except ValidationError as exc:
            raise MalformedInput(f"no map given and no inclusion exists: {exc}", path) from None
    if not isinstance(obj, dict):
        raise MalformedInput("map must be an object of variable images", path)
    imgs = {}
    for v, e in obj.items():
        if v not in src.variables:
            raise MalformedInput(f"unknown source variable {v!r}", f"{path}.{v}")
        imgs[v] = ringcat.terms_to_poly(e, tgt.variables, f"{path}.{v}") if isinstance(e, list) \
            else ringcat.parse_expr(str(e), tgt.variables, f"{path}.{v}")
    try:
        return RingMor(src, tgt, imgs)
    except ValidationError as exc:
        raise MalformedInput(str(exc), path) from exc


def nerve_from_json(obj, path: str = "$") -> CoverNerve:
    if not isinstance(obj, dict):
        raise MalformedInput("nerve must be an object", path)
    pj = obj.get("patches")
    if not isinstance(pj, dict) or not pj:
        raise MalformedInput("patches must be a nonempty object", f"{path}.patches")
    order = obj.get("order", list(pj))
    if sorted(order) != sorted(pj):
        raise MalformedInput("order must list every patch once", f"{path}.order")
    for n in order:
        if SEP in n or "," in n:
            raise MalformedInput(f"patch name {n!r} may not contain ',' or {SEP!r}", f"{path}.patches")
    patches = {n: ringcat.ring_from_json(pj[n], f"{path}.patches.{n}") for n in order}
    pos = {n: i for i, n in enumerate(order)}
    overlaps = {}
    oj = obj.get("overlaps", {})
    if not isinstance(oj, dict):
        raise MalformedInput("overlaps must be an object", f"{path}.overlaps")
    for key, val in oj.items():
        where = f"{path}.overlaps.{key}"
        parts = key.split(",")
        if len(parts) != 2 or any(p not in patches for p in parts) or parts[0] == parts[1]:
            raise MalformedInput("overlap key must name two patches", where)
        a, b = sorted(parts, key=pos.get)
        if not isinstance(val, dict) or "ring" not in val:
            raise MalformedInput("overlap needs a ring", where)
        R = ringcat.ring_from_json(val["ring"], f"{where}.ring")
        maps = val.get("maps", {})
        if not isinstance(maps, dict):
            raise MalformedInput("maps must be an object", f"{where}.maps")
        overlaps[(a, b)] = (R, _map_json(maps.get(a), patches[a], R, f"{where}.maps.{a}"),
                            _map_json(maps.get(b), patches[b], R, f"{where}.maps.{b}"))
    triples = {}
    tj = obj.get("triples", {})
    if not isinstance(tj, dict):
        raise MalformedInput("triples must be an object", f"{path}.triples")
    for key, val in tj.items():
        where = f"{path}.triples.{key}"
        parts = key.split(",")
        if len(parts) != 3 or any(p not in patches for p in parts) or len(set(parts)) != 3:
            raise MalformedInput("triple key must name three patches", where)
        a, b, c = sorted(parts, key=pos.get)
        for x, y in ((a, b), (a, c), (b, c)):
            if (x, y) not in overlaps:
                raise MalformedInput(f"triple needs the overlap {x},{y}", where)
        if not isinstance(val, dict) or "ring" not in val:
            raise MalformedInput("triple needs a ring", where)
        R = ringcat.ring_from_json(val["ring"], f"{where}.ring")
        mj = val.get("maps", {})
        maps = {}
        for x, y in ((a, b), (a, c), (b, c)):
            k = f"{x},{y}"
            maps[(x, y)] = _map_json(mj.get(k), overlaps[(x, y)][0], R, f"{where}.maps.{k}")
        triples[(a, b, c)] = (R, maps)
    return CoverNerve(tuple(order), patches, overlaps, triples)


def nerve_to_json(N: CoverNerve) -> dict:
    def mj(m: RingMor):
        return {v: str(m.images[v]) for v in sorted(m.images)}

    return {
        "order": list(N.order),
        "patches": {n: N.patches[n].to_json() for n in N.order},
        "overlaps": {f"{a},{b}": {"ring": R.to_json(), "maps": {a: mj(fa), b: mj(fb)}}
                     for (a, b), (R, fa, fb) in N.overlaps.items()},
        "triples": {",".join(k): {"ring": R.to_json(), "maps": {f"{x},{y}": mj(m) for (x, y), m in maps.items()}}
                    for k, (R, maps) in N.triples.items()},
    }


def datum_from_json(obj, path: str = "$") -> GluingDatum:
    """``{"patches":{i:ring}, "overlaps":{"i,j":{"ring":..,"map":..}}, "transitions":{"j,i":{..}}}``."""
    if not isinstance(obj, dict) or not isinstance(obj.get("patches"), dict):
        raise MalformedInput("datum needs a patches object", f"{path}.patches")
    pj = obj["patches"]
    idx = tuple(obj.get("order", list(pj)))
    patches = {i: ringcat.ring_from_json(pj[i], f"{path}.patches.{i}") for i in idx}
    overlaps, transitions = {}, {}
    for key, val in obj.get("overlaps", {}).items():
        where = f"{path}.overlaps.{key}"
        parts = key.split(",")
        if len(parts) != 2 or any(p not in patches for p in parts):
            raise MalformedInput("overlap key must be 'i,j'", where)
        i, j = parts
        if not isinstance(val, dict) or "ring" not in val:
            raise MalformedInput("overlap needs a ring", where)
        R = ringcat.ring_from_json(val["ring"], f"{where}.ring")
        overlaps[(i, j)] = _map_json(val.get("map"), patches[i], R, f"{where}.map")
    for key, val in obj.get("transitions", {}).items():
        where = f"{path}.transitions.{key}"
        parts = key.split(",")
        if len(parts) != 2 or any(p not in patches for p in parts):
            raise MalformedInput("transition key must be 'j,i'", where)
        j, i = parts
        src = overlaps[(j, i)].target if (j, i) in overlaps else patches[j]
        tgt = overlaps[(i, j)].target if (i, j) in overlaps else patches[i]
        transitions[(j, i)] = _map_json(val, src, tgt, where)
    return GluingDatum(idx, patches, overlaps, transitions)


# -- standard examples --------------------------------------------------------------

def p1_rings():
    Ax = LocRing.polynomial("x")
    Ay = LocRing.polynomial("y")
    Axx = ringcat.localize(Ax, "x")[0]
    Ayy = ringcat.localize(Ay, "y")[0]
    return Ax, Ay, Axx, Ayy


def p1_datum() -> GluingDatum:
    """Projective line from Q[x] and Q[y] glued along y = 1/x."""
    Ax, Ay, Axx, Ayy = p1_rings()
    overlaps = {("0", "1"): ringcat.inclusion(Ax, Axx), ("1", "0"): ringcat.inclusion(Ay, Ayy)}
    transitions = {("1", "0"): ringcat.substitution(Ayy, Axx, {"y": "1/x"}),
                   ("0", "1"): ringcat.substitution(Axx, Ayy, {"x": "1/y"})}
    return GluingDatum(("0", "1"), {"0": Ax, "1": Ay}, overlaps, transitions)


def p1_nerve() -> CoverNerve:
    """The standard two-patch cover of the projective line, overlap in x-coordinates."""
    Ax, Ay, Axx, _ = p1_rings()
    return CoverNerve(("U0", "U1"), {"U0": Ax, "U1": Ay},
                      {("U0", "U1"): (Axx, ringcat.inclusion(Ax, Axx), ringcat.substitution(Ay, Axx, {"y": "1/x"}))})


def chain_model(R: LocRing | None = None) -> PoSheaf:
    """Chain p < q with O(U_p) = R and O(U_q) = R localized at its first variable."""
    R = R or LocRing.polynomial("x")
    Rq, m = ringcat.localize(R, R.variables[0]) if R.variables else (R, ringcat.identity(R))
    P = FinPreorder.chain(["p", "q"])
    return PoSheaf(P, RING, {"p": R, "q": Rq}, {("p", "q"): m})


def witness_nerve(B_gen="x", C_gen="x - 1", C_zero: bool = False, full: bool = True) -> CoverNerve:
    """Four patches a, b, c, d with a n b = Spec A, a n b n c = Spec B, a n b n d = Spec C.

    With ``full`` the overlap c n d = Spec D is included together with the
    triangles acd and bcd, as an actual cover requires; otherwise only the
    five edges and two triangles abc, abd are kept.
    """
    A = LocRing.polynomial("x")
    B, ab = ringcat.localize(A, B_gen)
    if C_zero:
        C, ac = LocRing.zero(), ringcat.to_zero(A)
    else:
        C, ac = ringcat.localize(A, C_gen)
    idB, idC = ringcat.identity(B), ringcat.identity(C)
    patches = {"a": A, "b": A, "c": B, "d": C}
    overlaps = {
        ("a", "b"): (A, ringcat.identity(A), ringcat.identity(A)),
        ("a", "c"): (B, ab, idB),
        ("b", "c"): (B, ab, idB),
    }
    triples = {("a", "b", "c"): (B, {("a", "b"): ab, ("a", "c"): idB, ("b", "c"): idB})}
    if not C.is_zero:
        overlaps[("a", "d")] = (C, ac, idC)
        overlaps[("b", "d")] = (C, ac, idC)
        triples[("a", "b", "d")] = (C, {("a", "b"): ac, ("a", "d"): idC, ("b", "d"): idC})
        if full:
            D, BD, CD = ringcat.pullback_ring(A, ab, ac)
            idD = ringcat.identity(D)
            overlaps[("c", "d")] = (D, BD, CD)
            for x in ("a", "b"):
                triples[(x, "c", "d")] = (D, {(x, "c"): BD, (x, "d"): CD, ("c", "d"): idD})
    return CoverNerve(("a", "b", "c", "d"), patches, overlaps, triples)
