"""The category C2_Sch over the localization fragment.

An object is a degenerate expansion with a ring on every simplex and, for
every simplex s and face index i, a ring map F(face_i s) -> F(s).  A
morphism is a semisimplicial map f together with maps
eps_p: F_B(f p) -> F_A(p) that are natural in the faces.

Weak equivalences are decided on the minimal opens of the target's
vertices.  Those opens carry the affine cover of the glued scheme, and over
each of them the preimage must be recognised as the same affine scheme.
Answers that the fragment cannot certify come back as "undecided".

Covers of a common glued model (a :class:`GluingDatum`) give objects whose
simplices are intersections of patches; refinements and product covers are
built from those intersections.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import sympy

from . import ringcat
from .errors import MalformedInput, ValidationError
from .finspace import FinPreorder, bits
from .gluing import (CoverNerve, GluingDatum, GluingFunctor, Report, _map_json, build_SU2,
                     check_gluing_functor, datum_from_json, p1_datum, validate_gluing_datum,
                     witness_nerve)
from .ringcat import LocRing, RingMor
from .sheafcore import sections
from .sscomplex import (SSMap, SemiSimplicialSet2, _topological, degenerate_expansion, from_vertex_tuples,
                        is_clique_complex, sid, simplex_poset)

TRUE, FALSE, UNDECIDED = "true", "false", "undecided"
EQUAL, NOT_EQUAL = "equal", "not-equal"


class OrientationConflict(ValidationError):
    """A vertex relabelling would send an edge against the target's orientation."""

    def __init__(self, message: str, simplices: Sequence = ()):
        super().__init__(message)
        self.simplices = tuple(simplices)


@dataclass
class Verdict:
    status: str
    reasons: list = field(default_factory=list)

    def note(self, code: str, where, detail: str = "") -> None:
        self.reasons.append({"code": code, "where": where, "detail": detail})

    @property
    def holds(self) -> bool:
        return self.status in (TRUE, EQUAL)

    def to_json(self) -> dict:
        return {"status": self.status, "reasons": self.reasons}


def _combine(statuses: Sequence[str], yes: str, no: str) -> str:
    if no in statuses:
        return no
    if UNDECIDED in statuses:
        return UNDECIDED
    return yes


def _distinct(vs: Sequence) -> tuple:
    return tuple(dict.fromkeys(vs))


# -- objects -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CSch2Object:
    base: SemiSimplicialSet2
    values: Mapping
    arrows: Mapping  # (i, s) -> F(faces(s)[i]) -> F(s)
    cover: "AmbientCover | None" = None

    @cached_property
    def simplices(self) -> tuple:
        X = self.base
        return tuple(X.S0) + tuple(X.S1) + tuple(X.S2)

    @cached_property
    def poset(self) -> FinPreorder:
        return simplex_poset(self.base)

    @cached_property
    def by_tuple(self) -> dict:
        return {self.base.vertices_of(s): s for s in self.simplices}

    def arrow(self, a, b) -> RingMor:
        """F(a) -> F(b) for an iterated face a of b."""
        if a == b:
            return ringcat.identity(self.values[a])
        X = self.base
        fs = X.faces(b)
        for i, f in enumerate(fs):
            if f == a:
                return self.arrows[(i, b)]
        for i, f in enumerate(fs):
            if a in X.faces(f):
                return ringcat.compose(self.arrow(a, f), self.arrows[(i, b)])
        raise ValidationError(f"{a!r} is not a face of {b!r}")

    def edge_between(self, u, v):
        """The non-degenerate edge joining two distinct vertices, if any."""
        return self.by_tuple.get((u, v)) or self.by_tuple.get((v, u))

    def summary(self) -> dict:
        return {"counts": list(self.base.counts),
                "values": {s: str(self.values[s]) for s in self.simplices}}


def object_from_functor(G: GluingFunctor, cover: "AmbientCover | None" = None) -> CSch2Object:
    """Degenerate expansion of a gluing functor.

    Loops and u>u>u carry F(u); u>u>v and u>v>v carry F(u>v).  Arrows between
    simplices with the same vertex set are identities, the others come from G.
    """
    X0 = G.base
    A = degenerate_expansion(X0)
    key0 = {_distinct(X0.vertices_of(s)): s for s in list(X0.S0) + list(X0.S1) + list(X0.S2)}
    key = {s: key0[_distinct(A.vertices_of(s))] for s in list(A.S0) + list(A.S1) + list(A.S2)}
    values = {s: G.values[k] for s, k in key.items()}
    arrows = {}
    for s in list(A.S1) + list(A.S2):
        for i, f in enumerate(A.faces(s)):
            kf, ks = key[f], key[s]
            arrows[(i, s)] = ringcat.identity(values[s]) if kf == ks else G.arrow(kf, ks)
    return CSch2Object(A, values, arrows, cover)


def object_from_cover(nerve: CoverNerve, cover: "AmbientCover | None" = None) -> CSch2Object:
    G = nerve.functor()
    for (a, b), m in sorted(G.arrows.items()):
        if not ringcat.is_open_embedding(m):
            raise ValidationError(f"arrow {a} -> {b} is not an open embedding")
    return object_from_functor(G, cover)


def constant_object(X0: SemiSimplicialSet2, R: LocRing) -> CSch2Object:
    """Expansion of X0 with the same ring everywhere and identity arrows."""
    simp = list(X0.S0) + list(X0.S1) + list(X0.S2)
    arrows = {(f, s): ringcat.identity(R) for s in list(X0.S1) + list(X0.S2) for f in set(X0.faces(s))}
    return object_from_functor(GluingFunctor(X0, {s: R for s in simp}, arrows))


def validate_object(A: CSch2Object) -> Report:
    rep = Report()
    X = A.base
    simp = A.simplices
    tup = {s: X.vertices_of(s) for s in simp}
    if len(set(tup.values())) != len(tup):
        rep.fail("shape", "$", "two simplices share a vertex tuple")
        return rep
    nondeg = [s for s in simp if len(set(tup[s])) == len(tup[s])]
    try:
        X0 = from_vertex_tuples(list(X.S0), [tup[s] for s in nondeg if X.dim(s) == 1],
                                [tup[s] for s in nondeg if X.dim(s) == 2])
        if not is_clique_complex(X0):
            raise ValidationError("non-degenerate part is not a clique complex")
        E = degenerate_expansion(X0)
    except ValidationError as exc:
        rep.fail("shape", "$", str(exc))
        return rep
    want = {E.vertices_of(s) for s in list(E.S0) + list(E.S1) + list(E.S2)}
    if want != set(tup.values()):
        rep.fail("shape", "$", "base is not the degenerate expansion of its non-degenerate part")
        return rep
    for s in simp:
        if s not in A.values:
            rep.fail("missing-value", s)
    for s in simp:
        for i, f in enumerate(X.faces(s)):
            m = A.arrows.get((i, s))
            if m is None:
                rep.fail("missing-arrow", [i, s])
            elif s in A.values and f in A.values and (m.source != A.values[f] or m.target != A.values[s]):
                rep.fail("arrow-endpoints", [i, s])
    if not rep.ok:
        return rep
    for t in X.S2:
        fs = X.faces(t)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            one = ringcat.compose(A.arrows[(i, fs[j])], A.arrows[(j, t)])
            two = ringcat.compose(A.arrows[(j - 1, fs[i])], A.arrows[(i, t)])
            if one != two:
                rep.fail("not-a-functor", [t, i, j], "two routes from a vertex differ")
    key = {_distinct(tup[s]): s for s in nondeg}
    for s in simp:
        if s in nondeg:
            continue
        k = key[_distinct(tup[s])]
        if A.values[s] != A.values[k]:
            rep.fail("degenerate-value", s, f"expected the ring of {k}")
        for i, f in enumerate(X.faces(s)):
            if set(tup[f]) == set(tup[s]) and A.arrows[(i, s)] != ringcat.identity(A.values[s]):
                rep.fail("degenerate-arrow", [i, s], "expected the identity")
    if not rep.ok:
        return rep
    name = {s: sid(*tup[s]) for s in nondeg}
    G = GluingFunctor(X0, {name[s]: A.values[s] for s in nondeg},
                      {(name[X.faces(s)[i]], name[s]): A.arrows[(i, s)]
                       for s in nondeg for i in range(len(X.faces(s)))})
    sub = check_gluing_functor(G)
    rep.problems.extend(sub.problems)
    rep.ok = rep.ok and sub.ok
    return rep


# -- morphisms -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CSch2Mor:
    source: CSch2Object
    target: CSch2Object
    f: SSMap
    eps: Mapping  # simplex p of source -> F_target(f p) -> F_source(p)

    def problems(self) -> list:
        A, B = self.source, self.target
        out = []
        if self.f.source is not A.base or self.f.target is not B.base:
            out.append("simplicial map has the wrong endpoints")
            return out
        for p in A.simplices:
            m = self.eps.get(p)
            if m is None:
                out.append(f"no component at {p}")
            elif m.source != B.values[self.f(p)] or m.target != A.values[p]:
                out.append(f"component at {p} has the wrong endpoints")
        if out:
            return out
        for s in A.simplices:
            for i, a in enumerate(A.base.faces(s)):
                one = ringcat.compose(B.arrows[(i, self.f(s))], self.eps[s])
                two = ringcat.compose(self.eps[a], A.arrows[(i, s)])
                if one != two:
                    out.append(f"naturality fails on face {i} of {s}")
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CSch2Mor):
            return NotImplemented
        return (self.source is other.source and self.target is other.target
                and all(self.f(p) == other.f(p) and self.eps[p] == other.eps[p] for p in self.source.simplices))

    __hash__ = object.__hash__


def morphism(source: CSch2Object, target: CSch2Object, f: SSMap, eps: Mapping) -> CSch2Mor:
    m = CSch2Mor(source, target, f, dict(eps))
    probs = m.problems()
    if probs:
        raise ValidationError(probs[0])
    return m


def identity_mor(A: CSch2Object) -> CSch2Mor:
    ids = {s: s for s in A.simplices}
    X = A.base
    f = SSMap(X, X, {s: s for s in X.S0}, {s: s for s in X.S1}, {s: s for s in X.S2})
    return CSch2Mor(A, A, f, {s: ringcat.identity(A.values[s]) for s in ids})


def compose_mor(psi: CSch2Mor, phi: CSch2Mor) -> CSch2Mor:
    """``phi`` after ``psi``."""
    if psi.target is not phi.source:
        raise ValidationError("morphisms are not composable")
    f = psi.f.compose(phi.f)
    eps = {p: ringcat.compose(phi.eps[psi.f(p)], psi.eps[p]) for p in psi.source.simplices}
    return CSch2Mor(psi.source, phi.target, f, eps)


def ssmap_by_vertices(X: SemiSimplicialSet2, Y: SemiSimplicialSet2, vmap: Mapping) -> SSMap:
    """Extend a vertex map to simplices by vertex tuples (targets may be degenerate)."""
    ty = {Y.vertices_of(s): s for s in list(Y.S0) + list(Y.S1) + list(Y.S2)}
    out = ({}, {}, {})
    bad = []
    for k, group in enumerate((X.S0, X.S1, X.S2)):
        for s in group:
            img = tuple(vmap[v] for v in X.vertices_of(s))
            t = ty.get(img)
            if t is None:
                bad.append(s)
            else:
                out[k][s] = t
    if bad:
        raise OrientationConflict(f"no target simplex for {bad[0]!r} under the vertex map", bad)
    return SSMap(X, Y, *out)


# -- weak equivalences ----------------------------------------------------------

def _covers(R: LocRing, parts: Sequence[LocRing]) -> bool:
    """Whether the opens Spec(parts) of Spec R cover it (each part a localization of R)."""
    news = [p.inverted - R.inverted for p in parts]
    if any(not n for n in news):
        return True
    gens = [sympy.Mul(*n) for n in news]
    us = [sympy.Symbol(f"_u{i}") for i in range(len(R.inverted))]
    gens += [h * u - 1 for h, u in zip(sorted(R.inverted, key=str), us)]
    G = sympy.groebner(gens, *(R.gens + us), order="grevlex", domain="QQ")
    return list(G.exprs) == [1]


def is_weak_equivalence(psi: CSch2Mor) -> Verdict:
    """Decide whether eps-flat is an isomorphism with affine preimages.

    For each target vertex q the preimage of U_q must be glued from
    open pieces of Spec F_B(q) that cover it and meet exactly as the
    source says.
    """
    A, B = psi.source, psi.target
    PA = A.poset
    up = {p: PA.up_mask(p) for p in A.simplices}
    out = Verdict(TRUE)
    statuses = []
    for q in B.base.S0:
        R = B.values[q]
        W = bits(PA.index(p) for p in A.simplices if q in B.base.vertices_of(psi.f(p)))
        live = [m for m in PA.minimal(W) if not A.values[m].is_zero]
        if R.is_zero:
            if live:
                out.note("zero-target", q, "target ring is trivial but the preimage is not")
                statuses.append(FALSE)
            continue
        if not live:
            out.note("empty-preimage", q, "sections over the preimage are the trivial ring")
            statuses.append(FALSE)
            continue
        comp = {m: ringcat.compose(B.arrow(q, psi.f(m)), psi.eps[m]) for m in live}
        split = {m: ringcat.embedding_factors(c) for m, c in comp.items()}
        if any(s is None for s in split.values()):
            out.note("non-structural", q, "a component is not a recognisable open embedding")
            statuses.append(UNDECIDED)
            continue
        if len(live) == 1:
            (m,) = live
            if split[m][0] != R:
                out.note("proper-open", q, f"{R} -> {A.values[m]} is not an isomorphism")
                statuses.append(FALSE)
            continue
        status = TRUE
        for m1, m2 in itertools.combinations(live, 2):
            P = LocRing(R.variables, split[m1][0].inverted | split[m2][0].inverted)
            both = [e for e in PA.minimal(up[m1] & up[m2]) if not A.values[e].is_zero]
            if not both:
                seen = LocRing.zero()
            elif len(both) > 1:
                out.note("non-basic-overlap", [q, m1, m2])
                status = UNDECIDED
                continue
            else:
                s = ringcat.embedding_factors(ringcat.compose(comp[m1], A.arrow(m1, both[0])))
                if s is None:
                    out.note("non-structural", [q, m1, m2])
                    status = UNDECIDED
                    continue
                seen = s[0]
            if seen != P:
                out.note("overlap-mismatch", [q, m1, m2], f"source overlap {seen}, target overlap {P}")
                status = FALSE
                break
        if status == TRUE and not _covers(R, [split[m][0] for m in live]):
            out.note("not-covering", q, "the preimage pieces miss part of the target patch")
            status = FALSE
        statuses.append(status)
    out.status = _combine(statuses, TRUE, FALSE)
    return out


# -- schematic equality -----------------------------------------------------------

def _extend(a: RingMor, eps: RingMor):
    """eps: F(q) -> R pushed through the open embedding a: F(q) -> F(e); None if it does not extend."""
    s = ringcat.embedding_factors(a)
    if s is None:
        return UNDECIDED
    AT, _, back = s
    if AT.is_zero:
        return None if not eps.target.is_zero else ringcat.to_zero(a.target)
    try:
        loc = RingMor(AT, eps.target, eps.images) if not eps.target.is_zero else ringcat.to_zero(AT)
    except ValidationError:
        return None
    return ringcat.compose(back, loc)


def compare_patch_maps(B: CSch2Object, q, e1: RingMor, q2, e2: RingMor) -> tuple[str, str]:
    """Compare two maps of one affine patch into the glued target, via patches q and q2."""
    if e1.target.is_zero:
        return EQUAL, ""
    if q == q2:
        return (EQUAL, "") if e1 == e2 else (NOT_EQUAL, "different ring maps into the same patch")
    e = B.edge_between(q, q2)
    if e is None:
        return NOT_EQUAL, "images lie in disjoint patches"
    x1 = _extend(B.arrow(q, e), e1)
    x2 = _extend(B.arrow(q2, e), e2)
    if UNDECIDED in (x1, x2):
        return UNDECIDED, "overlap map is not structural"
    if x1 is None or x2 is None:
        return NOT_EQUAL, "one image leaves the overlap"
    return (EQUAL, "") if x1 == x2 else (NOT_EQUAL, "maps differ on the overlap")


def schematic_equal(psi: CSch2Mor, phi: CSch2Mor) -> Verdict:
    """Whether two parallel morphisms induce the same map of glued schemes.

    The source's vertex patches cover its glued scheme, so the maps agree
    iff they agree patch by patch.
    """
    if psi.source is not phi.source or psi.target is not phi.target:
        v = Verdict(UNDECIDED)
        v.note("not-parallel", "$", "morphisms must share source and target")
        return v
    out = Verdict(EQUAL)
    statuses = []
    for p in psi.source.base.S0:
        st, why = compare_patch_maps(psi.target, psi.f(p), psi.eps[p], phi.f(p), phi.eps[p])
        if st != EQUAL:
            out.note(st, p, why)
        statuses.append(st)
    out.status = _combine(statuses, EQUAL, NOT_EQUAL)
    return out


# -- covers of a glued model ------------------------------------------------------

def disjoint_lines(n: int, var: str = "x") -> GluingDatum:
    """n affine lines with empty pairwise overlaps, patches named L0, L1, ..."""
    A = LocRing.polynomial(var)
    Z = LocRing.zero()
    names = tuple(f"L{i}" for i in range(n))
    overlaps = {(i, j): ringcat.to_zero(A) for i in names for j in names if i != j}
    transitions = {(j, i): ringcat.identity(Z) for i in names for j in names if i != j}
    return GluingDatum(names, {k: A for k in names}, overlaps, transitions)

@dataclass(frozen=True, eq=False)
class Patch:
    """Open affine of a glued model: Spec of ``emb.target`` inside patch ``home``."""

    home: str
    emb: RingMor

    @property
    def ring(self) -> LocRing:
        return self.emb.target


@dataclass(frozen=True, eq=False)
class AmbientCover:
    model: GluingDatum
    order: tuple
    patches: Mapping  # name -> Patch

    def __post_init__(self):
        for n in self.order:
            P = self.patches[n]
            if P.home not in self.model.index or P.emb.source != self.model.patches[P.home]:
                raise ValidationError(f"patch {n!r} does not start at a model patch")
            if not ringcat.is_open_embedding(P.emb):
                raise ValidationError(f"patch {n!r} is not an open embedding")


def whole_patch(model: GluingDatum, k: str) -> Patch:
    return Patch(k, ringcat.identity(model.patches[k]))


def basic_patch(model: GluingDatum, k: str, f) -> Patch:
    """The distinguished open D(f) of model patch k."""
    return Patch(k, ringcat.localize(model.patches[k], f)[1])


def _overlap(W: GluingDatum, i, j) -> RingMor:
    if i == j or (i, j) in W.overlaps:
        return W.overlap(i, j)
    return ringcat.to_zero(W.patches[i])


def _in_home(W: GluingDatum, k0, P: Patch) -> tuple[RingMor, RingMor]:
    """Re-express P inside model patch k0: (A_k0 -> R', P.ring -> R')."""
    if P.home == k0:
        return P.emb, ringcat.identity(P.ring)
    k = P.home
    ov = _overlap(W, k, k0)
    R, from_p, from_ov = ringcat.pullback_ring(W.patches[k], P.emb, ov)
    if R.is_zero:
        return ringcat.to_zero(W.patches[k0]), from_p
    emb = ringcat.compose(ringcat.compose(W.overlap(k0, k), W.phi(k0, k)), from_ov)
    return emb, from_p


def intersect(W: GluingDatum, members: Sequence[Patch]) -> tuple[Patch, list]:
    """Intersection inside the lowest-indexed home patch, with maps from each member ring."""
    k0 = min((P.home for P in members), key=W.index.index)
    A0 = W.patches[k0]
    moved = [_in_home(W, k0, P) for P in members]
    cur, maps = moved[0][0], [moved[0][1]]
    for emb, to in moved[1:]:
        _, a, b = ringcat.pullback_ring(A0, cur, emb)
        maps = [ringcat.compose(m, a) for m in maps] + [ringcat.compose(to, b)]
        cur = ringcat.compose(cur, a)
    return Patch(k0, cur), maps


def _contained(W: GluingDatum, inner: Patch, outer: Patch) -> RingMor | None:
    """Ring map outer -> inner when inner lies inside outer, else None."""
    I, (m_out, m_in) = intersect(W, [outer, inner])
    if I.ring != inner.ring and not (I.ring.is_zero and inner.ring.is_zero):
        return None
    s = ringcat.embedding_factors(m_in)
    if s is None or s[0] != inner.ring:
        return None
    return ringcat.compose(m_out, s[2])


def cover_nerve(C: AmbientCover) -> CoverNerve:
    W = C.model
    pair = {}
    overlaps, triples = {}, {}
    for a, b in itertools.combinations(C.order, 2):
        I, (ma, mb) = intersect(W, [C.patches[a], C.patches[b]])
        if not I.ring.is_zero:
            pair[(a, b)] = I
            overlaps[(a, b)] = (I.ring, ma, mb)
    for a, b, c in itertools.combinations(C.order, 3):
        if (a, b) in pair and (a, c) in pair and (b, c) in pair:
            T, maps = intersect(W, [pair[(a, b)], pair[(a, c)], pair[(b, c)]])
            if not T.ring.is_zero:
                triples[(a, b, c)] = (T.ring, dict(zip(((a, b), (a, c), (b, c)), maps)))
    return CoverNerve(tuple(C.order), {n: C.patches[n].ring for n in C.order}, overlaps, triples)


def object_of_cover(C: AmbientCover) -> CSch2Object:
    return object_from_cover(cover_nerve(C), C)


def simplex_patch(A: CSch2Object, s) -> Patch:
    C = A.cover
    return intersect(C.model, [C.patches[v] for v in _distinct(A.base.vertices_of(s))])[0]


def refinement(src: CSch2Object, tgt: CSch2Object, labels: Mapping) -> CSch2Mor:
    """Morphism of a refining cover: vertex j goes to ``labels[j]``, whose patch must contain it.

    The labels are the partition {J_p} of the refining cover, given explicitly.
    """
    if src.cover is None or tgt.cover is None or src.cover.model is not tgt.cover.model:
        raise ValidationError("refinements need covers of one glued model")
    W = src.cover.model
    f = ssmap_by_vertices(src.base, tgt.base, labels)
    eps = {}
    for s in src.simplices:
        Ps, Pt = simplex_patch(src, s), simplex_patch(tgt, f(s))
        m = _contained(W, Ps, Pt)
        if m is None:
            raise ValidationError(f"{s!r} does not lie inside {f(s)!r}")
        if m.target != src.values[s]:
            raise ValidationError(f"ring of {s!r} disagrees with its patch")
        eps[s] = m
    return CSch2Mor(src, tgt, f, eps)


def refining_labels(src: CSch2Object, tgt: CSch2Object) -> dict | None:
    """A vertex labelling realising ``src`` as a refinement of ``tgt``, if one exists."""
    W = src.cover.model
    choices = []
    for j in src.base.S0:
        opts = [i for i in tgt.base.S0 if _contained(W, src.cover.patches[j], tgt.cover.patches[i]) is not None]
        if not opts:
            return None
        choices.append(opts)
    for pick in itertools.product(*choices):
        labels = dict(zip(src.base.S0, pick))
        try:
            ssmap_by_vertices(src.base, tgt.base, labels)
        except OrientationConflict:
            continue
        return labels
    return None


@dataclass(frozen=True, eq=False)
class ProductCover:
    cover: AmbientCover
    obj: CSch2Object
    first: CSch2Mor
    second: CSch2Mor | None
    conflicts: tuple = ()

    def to_json(self) -> dict:
        return {"patches": {n: str(self.cover.patches[n].ring) for n in self.cover.order},
                "counts": list(self.obj.base.counts),
                "second_projection": self.second is not None,
                "orientation_conflicts": list(self.conflicts)}


def product_cover(U: CSch2Object, V: CSch2Object) -> ProductCover:
    """Patches U_i n V_j, ordered with U first.

    The projection to U always exists.  The projection to V exists only when
    no overlapping pair of patches is ordered oppositely in the two factors;
    otherwise it is reported as an orientation conflict.
    """
    if U.cover is None or V.cover is None or U.cover.model is not V.cover.model:
        raise ValidationError("product covers need covers of one glued model")
    W = U.cover.model
    names, patches, first, second = [], {}, {}, {}
    for i in U.cover.order:
        for j in V.cover.order:
            n = f"{i}*{j}"
            names.append(n)
            patches[n] = intersect(W, [U.cover.patches[i], V.cover.patches[j]])[0]
            first[n], second[n] = i, j
    C = AmbientCover(W, tuple(names), patches)
    obj = object_of_cover(C)
    p1 = refinement(obj, U, first)
    try:
        p2, bad = refinement(obj, V, second), ()
    except OrientationConflict as exc:
        p2, bad = None, exc.simplices
    return ProductCover(C, obj, p1, p2, tuple(bad))


def canonical_inclusion(A: CSch2Object) -> CSch2Mor:
    """Inclusion of the object built from A's vertex patches, dropping trivial overlaps."""
    X = A.base
    tup = {s: X.vertices_of(s) for s in A.simplices}
    edges = [e for e in X.S1 if len(set(tup[e])) == 2 and not A.values[e].is_zero]
    order = _topological(list(X.S0), [tup[e] for e in edges])
    overlaps = {tup[e]: (A.values[e], A.arrow(tup[e][0], e), A.arrow(tup[e][1], e)) for e in edges}
    triples = {}
    for t in X.S2:
        a, b, c = tup[t]
        if len({a, b, c}) == 3 and all(p in overlaps for p in ((a, b), (a, c), (b, c))) \
                and not A.values[t].is_zero:
            triples[(a, b, c)] = (A.values[t], {p: A.arrow(A.by_tuple[p], t) for p in ((a, b), (a, c), (b, c))})
    N = CoverNerve(tuple(order), {v: A.values[v] for v in X.S0}, overlaps, triples)
    S = object_from_cover(N, A.cover)
    f = ssmap_by_vertices(S.base, X, {v: v for v in X.S0})
    return CSch2Mor(S, A, f, {s: ringcat.identity(S.values[s]) for s in S.simplices})


# -- zig-zags ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZigZag:
    """A <-s- P -g-> B with s a weak equivalence."""

    source: CSch2Object
    apex: CSch2Object
    target: CSch2Object
    s: CSch2Mor
    g: CSch2Mor

    def __post_init__(self):
        if self.s.source is not self.apex or self.g.source is not self.apex:
            raise ValidationError("both legs must start at the apex")
        if self.s.target is not self.source or self.g.target is not self.target:
            raise ValidationError("legs end at the wrong objects")


def zigzag(s: CSch2Mor, g: CSch2Mor, check: bool = True) -> ZigZag:
    if check:
        v = is_weak_equivalence(s)
        if v.status != TRUE:
            raise ValidationError(f"left leg is not a certified weak equivalence ({v.status})")
    return ZigZag(s.target, s.source, g.target, s, g)


def identity_zigzag(A: CSch2Object) -> ZigZag:
    i = identity_mor(A)
    return ZigZag(A, A, A, i, i)


def _is_identity(m: CSch2Mor) -> bool:
    return m.source is m.target and m == identity_mor(m.source)


@dataclass(frozen=True, eq=False)
class Completion:
    """Q with f': Q -> C a weak equivalence and g': Q -> A, for s: A -> B and g: C -> B."""

    apex: CSch2Object
    f_prime: CSch2Mor
    g_prime: CSch2Mor
    commutes: Verdict
    method: str


def srms2_complete(s: CSch2Mor, g: CSch2Mor) -> Completion:
    """Complete g: C -> B and the weak equivalence s: A -> B to a schematic square.

    Tries, in order: s is an identity; C already refines A; A refines C; the
    product cover of C and A in either order.  The last route raises :class:`OrientationConflict` when the
    projection to A would reverse an edge.
    """
    if s.target is not g.target:
        raise ValidationError("both maps must end at the same object")
    A, C = s.source, g.source
    if _is_identity(s):
        Q, fp, gp, how = C, identity_mor(C), g, "identity"
    else:
        if A.cover is None or C.cover is None or A.cover.model is not C.cover.model:
            raise ValidationError("completion needs covers of one glued model")
        labels = refining_labels(C, A)
        back = refining_labels(A, C) if labels is None else None
        if labels is not None:
            Q, fp, gp, how = C, identity_mor(C), refinement(C, A, labels), "refinement"
        elif back is not None:
            Q, fp, gp, how = A, refinement(A, C, back), identity_mor(A), "coarsening"
        else:
            pc = product_cover(C, A)
            if pc.second is not None:
                Q, fp, gp, how = pc.obj, pc.first, pc.second, "product"
            else:
                tc = product_cover(A, C)
                if tc.second is None:
                    raise OrientationConflict("product cover cannot project to both factors", pc.conflicts)
                Q, fp, gp, how = tc.obj, tc.second, tc.first, "product"
    return Completion(Q, fp, gp, schematic_equal(compose_mor(fp, g), compose_mor(gp, s)), how)


def compose_zigzags(z1: ZigZag, z2: ZigZag) -> ZigZag:
    """A <- I -> B followed by B <- J -> C, through a completed square over B."""
    if z1.target is not z2.source:
        raise ValidationError("zig-zags are not composable")
    c = srms2_complete(z2.s, z1.g)
    if not c.commutes.holds:
        raise ValidationError(f"completed square is not schematic commutative ({c.commutes.status})")
    return ZigZag(z1.source, c.apex, z2.target, compose_mor(c.f_prime, z1.s), compose_mor(c.g_prime, z2.g))


def zigzag_equivalent(z1: ZigZag, z2: ZigZag) -> Verdict:
    """Compare two zig-zags on the patches I_i n J_j of their apexes.

    On each such patch both left legs must place it identically in the
    source, and the right legs then decide equality in the target.  The
    product apex with both projections is recorded when it exists.
    """
    out = Verdict(EQUAL)
    if z1.source is not z2.source or z1.target is not z2.target:
        out.status = UNDECIDED
        out.note("endpoints", "$", "zig-zags must share source and target")
        return out
    P1, P2 = z1.apex, z2.apex
    if P1.cover is None or P2.cover is None or P1.cover.model is not P2.cover.model:
        out.status = UNDECIDED
        out.note("outside-fragment", "$", "apexes must be covers of one glued model")
        return out
    W = P1.cover.model
    statuses = []
    for i in P1.base.S0:
        for j in P2.base.S0:
            I, (m1, m2) = intersect(W, [P1.cover.patches[i], P2.cover.patches[j]])
            if I.ring.is_zero:
                continue
            left, why = compare_patch_maps(z1.source, z1.s.f(i), ringcat.compose(z1.s.eps[i], m1),
                                           z2.s.f(j), ringcat.compose(z2.s.eps[j], m2))
            if left != EQUAL:
                out.note("left-legs-" + left, [i, j], why)
                statuses.append(UNDECIDED)
                continue
            st, why = compare_patch_maps(z1.target, z1.g.f(i), ringcat.compose(z1.g.eps[i], m1),
                                         z2.g.f(j), ringcat.compose(z2.g.eps[j], m2))
            if st != EQUAL:
                out.note(st, [i, j], why)
            statuses.append(st)
    out.status = _combine(statuses, EQUAL, NOT_EQUAL)
    pc = product_cover(P1, P2)
    out.note("apex", "$", "product apex with both projections" if pc.second is not None
             else "product apex projects to the first apex only (orientation conflict)")
    return out


# -- worked examples ----------------------------------------------------------------

def _point(name: str) -> SemiSimplicialSet2:
    return from_vertex_tuples([name], [], [])


def rms3_counterexample(R: LocRing | None = None, collapse: bool = True) -> dict:
    """One vertex u, the edge a -> b, constant rings, and the maps between them.

    With ``collapse`` false the edge is replaced by the point itself, so an
    equalizer exists and the report flips.
    """
    R = R if R is not None else LocRing.polynomial("t")
    A = constant_object(_point("u"), R)
    if collapse:
        B = constant_object(from_vertex_tuples(["a", "b"], [("a", "b")], []), R)
        vmaps = ({"u": "a"}, {"u": "b"}, {"a": "u", "b": "u"})
    else:
        B = constant_object(_point("u"), R)
        vmaps = ({"u": "u"}, {"u": "u"}, {"u": "u"})

    def const(X, Y, vm):
        f = ssmap_by_vertices(X.base, Y.base, vm)
        return morphism(X, Y, f, {p: ringcat.identity(R) for p in X.simplices})

    psi_a, psi_b, pi = const(A, B, vmaps[0]), const(A, B, vmaps[1]), const(B, A, vmaps[2])
    premise = compose_mor(psi_a, pi) == compose_mor(psi_b, pi)
    # every map t: Q -> A factors through its image, a face-closed set of simplices
    X = A.base
    simp = A.simplices
    images = []
    for k in range(len(simp) + 1):
        for sub in itertools.combinations(simp, k):
            if all(set(X.faces(s)) <= set(sub) for s in sub):
                images.append(sub)
    equalizing = [sub for sub in images if all(psi_a.f(s) == psi_b.f(s) for s in sub)]
    live = {v for v in X.S0 if not A.values[v].is_zero}
    # a weak equivalence into A needs a nonempty preimage over every nontrivial vertex
    usable = [sub for sub in equalizing if live <= set(sub)]
    return {
        "premise_strict": premise,
        "pi_weak_equivalence": is_weak_equivalence(pi).status,
        "psi_a_weak_equivalence": is_weak_equivalence(psi_a).status,
        "images_examined": len(images),
        "equalizing_images": [list(s) for s in equalizing],
        "strict_rms3_holds": bool(usable),
        "psi_schematic": schematic_equal(psi_a, psi_b).status,
        "after_pi_schematic": schematic_equal(compose_mor(pi, psi_a), compose_mor(pi, psi_b)).status,
        "ring": str(R),
    }


def non_schematic_witness(f: str = "x", g: str = "x - 1", zero_D: bool = False) -> dict:
    """Four patches with U_1 n U_2 = Spec A, triples Spec B and Spec C, and B (x)_A C = D."""
    nerve = witness_nerve(B_gen=f, C_gen=g, C_zero=zero_D)
    su2 = build_SU2(nerve)
    P = su2.sheaf.base
    A = nerve.patches["a"]
    ab, ad = nerve.overlaps[("a", "c")][1], ringcat.localize(A, g)[1] if not zero_D else ringcat.to_zero(A)
    D = ringcat.tensor_over(A, ab, ad) if not zero_D else LocRing.zero()
    p, q = sid("a", "b", "c"), sid("a", "b", "d")
    if q in P.elements:
        meet = P.up_mask(p) & P.up_mask(q)
        sec = sections(su2.sheaf, meet)
    else:
        meet, sec = None, None
    valid = validate_object(object_from_cover(nerve)).ok
    confirmed = sec is not None and sec.is_zero and not D.is_zero
    return {
        "points": len(su2.points),
        "p": p,
        "q": q if meet is not None else None,
        "U_p_meet_U_q": [] if meet is None else P.subset(meet),
        "sections_on_meet": None if sec is None else str(sec),
        "tensor": str(D),
        "object_valid": valid,
        "witness": confirmed,
    }


# -- scenarios (JSON) ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    model: GluingDatum
    objects: Mapping
    morphisms: Mapping


def _model_json(obj, path: str) -> GluingDatum:
    if obj == "p1":
        return p1_datum()
    if isinstance(obj, dict) and set(obj) == {"disjoint_lines"}:
        n = obj["disjoint_lines"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise MalformedInput("disjoint_lines needs a positive integer", f"{path}.disjoint_lines")
        return disjoint_lines(n)
    W = datum_from_json(obj, path)
    rep = validate_gluing_datum(W)
    if not rep.ok:
        raise ValidationError(f"glued model is invalid: {rep.problems[0]}")
    return W


def _patch_json(W: GluingDatum, obj, path: str) -> Patch:
    if not isinstance(obj, dict) or obj.get("home") not in W.patches:
        raise MalformedInput("patch needs a home naming a model patch", f"{path}.home")
    k = obj["home"]
    if "ring" in obj:
        R = ringcat.ring_from_json(obj["ring"], f"{path}.ring")
        P = Patch(k, _map_json(obj.get("map"), W.patches[k], R, f"{path}.map"))
    else:
        inv = obj.get("invert", [])
        if not isinstance(inv, list):
            raise MalformedInput("invert must be a list", f"{path}.invert")
        emb = ringcat.identity(W.patches[k])
        for n, f in enumerate(inv):
            if not isinstance(f, str):
                raise MalformedInput("inverted elements are strings", f"{path}.invert[{n}]")
            R, m = ringcat.localize(emb.target, ringcat.parse_expr(f, emb.target.variables, f"{path}.invert[{n}]"))
            emb = ringcat.compose(emb, m)
        P = Patch(k, emb)
    if not ringcat.is_open_embedding(P.emb):
        raise MalformedInput("patch map is not an open embedding", path)
    return P


def scenario_from_json(obj, path: str = "$") -> Scenario:
    """``{"model": ..., "covers": {name: {"order", "patches"}}, "morphisms": {name: {...}}}``.

    Morphism kinds: ``refinement`` (source, target, optional labels),
    ``projection`` (of the product of ``factors``, leg ``first``/``second``) and
    ``canonical-inclusion`` (of ``object``).
    """
    if not isinstance(obj, dict):
        raise MalformedInput("scenario must be an object", path)
    W = _model_json(obj.get("model"), f"{path}.model")
    cj = obj.get("covers")
    if not isinstance(cj, dict) or not cj:
        raise MalformedInput("covers must be a nonempty object", f"{path}.covers")
    objects = {}
    for name, c in cj.items():
        where = f"{path}.covers.{name}"
        if not isinstance(c, dict) or not isinstance(c.get("patches"), dict) or not c["patches"]:
            raise MalformedInput("cover needs a nonempty patches object", where)
        order = tuple(c.get("order", list(c["patches"])))
        if sorted(order) != sorted(c["patches"]):
            raise MalformedInput("order must list every patch once", f"{where}.order")
        patches = {n: _patch_json(W, c["patches"][n], f"{where}.patches.{n}") for n in order}
        objects[name] = object_of_cover(AmbientCover(W, order, patches))
    morphisms = {}
    products = {}
    for name, m in (obj.get("morphisms") or {}).items():
        where = f"{path}.morphisms.{name}"
        if not isinstance(m, dict):
            raise MalformedInput("morphism must be an object", where)

        def ref(key):
            if m.get(key) not in objects:
                raise MalformedInput(f"{key} must name a cover", f"{where}.{key}")
            return objects[m[key]]

        kind = m.get("kind")
        if kind == "refinement":
            S, T = ref("source"), ref("target")
            labels = m.get("labels") or refining_labels(S, T)
            if labels is None:
                raise ValidationError(f"{m['source']} does not refine {m['target']}")
            morphisms[name] = refinement(S, T, labels)
        elif kind == "projection":
            fs = m.get("factors")
            if not isinstance(fs, list) or len(fs) != 2 or any(f not in objects for f in fs):
                raise MalformedInput("factors must name two covers", f"{where}.factors")
            key = tuple(fs)
            if key not in products:
                products[key] = product_cover(objects[fs[0]], objects[fs[1]])
            pc = products[key]
            leg = m.get("leg", "first")
            if leg not in ("first", "second"):
                raise MalformedInput("leg is 'first' or 'second'", f"{where}.leg")
            if leg == "second" and pc.second is None:
                raise OrientationConflict("the second projection reverses edges", pc.conflicts)
            morphisms[name] = pc.first if leg == "first" else pc.second
        elif kind == "canonical-inclusion":
            morphisms[name] = canonical_inclusion(ref("object"))
        else:
            raise MalformedInput(f"unknown morphism kind {kind!r}", f"{where}.kind")
    return Scenario(W, objects, morphisms)
