"""Sheaves and cosheaves on finite posets.

A sheaf on the Alexandrov space of a poset is determined by its values on
the minimal opens U_p and the restriction maps F(U_p) -> F(U_q) for p <= q.
Vector-space values are dimensions plus exact rational matrices acting on
column vectors; ring values are :class:`LocRing` objects with
:class:`RingMor` restrictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import ringcat
from .errors import MalformedInput, ValidationError
from .finspace import AlexandrovSpace, FinPreorder, MonotoneMap, alexandrov, poset_from_json
from .linalg import Mat, frac, hstack, kernel, solve, vstack
from .ringcat import LocRing

VECT = "vect"
RING = "ring"


def _compose(kind, f, g):
    """g after f."""
    if kind == VECT:
        return g @ f
    return ringcat.compose(f, g)


def _identity(kind, value):
    return Mat.identity(value) if kind == VECT else ringcat.identity(value)


def _fill(base: FinPreorder, kind: str, stalks: Mapping, given: Mapping, dual: bool) -> dict:
    """Extend maps given on some pairs to every pair, composing along covers."""
    maps = {}
    for p in base.elements:
        maps[(p, p)] = given.get((p, p), _identity(kind, stalks[p]))
    for (p, q), m in given.items():
        if not base.le(p, q):
            raise ValidationError(f"{p!r} <= {q!r} does not hold")
        maps[(p, q)] = m
    # breadth-first from each p along covers
    cov = base.covers() + base._cycle_pairs()
    for p in base.elements:
        frontier = [p]
        seen = {p}
        while frontier:
            nxt = []
            for a in frontier:
                for c, b in cov:
                    if c != a or b in seen:
                        continue
                    seen.add(b)
                    nxt.append(b)
                    if (p, b) not in maps:
                        if (a, b) not in maps:
                            raise ValidationError(f"missing map for {a!r} <= {b!r}")
                        if dual:
                            maps[(p, b)] = _compose(kind, maps[(a, b)], maps[(p, a)])
                        else:
                            maps[(p, b)] = _compose(kind, maps[(p, a)], maps[(a, b)])
            frontier = nxt
    return maps


def _shape_check(kind, stalks, maps, dual):
    for (p, q), m in maps.items():
        if kind == VECT:
            rows, cols = (stalks[p], stalks[q]) if dual else (stalks[q], stalks[p])
            if m.shape != (rows, cols):
                raise ValidationError(f"map for {p!r} <= {q!r} has shape {m.shape}, expected {(rows, cols)}")
        else:
            src, tgt = (stalks[q], stalks[p]) if dual else (stalks[p], stalks[q])
            if m.source != src or m.target != tgt:
                raise ValidationError(f"ring map for {p!r} <= {q!r} has the wrong endpoints")


@dataclass(frozen=True, eq=False)
class PoSheaf:
    base: FinPreorder
    kind: str
    stalks: Mapping
    restrictions: Mapping = field(repr=False)

    def __post_init__(self):
        if self.kind not in (VECT, RING):
            raise ValidationError(f"unknown value kind {self.kind!r}")
        if set(self.stalks) != set(self.base.elements):
            raise ValidationError("every point needs a value")
        full = _fill(self.base, self.kind, self.stalks, dict(self.restrictions), dual=False)
        _shape_check(self.kind, self.stalks, full, dual=False)
        object.__setattr__(self, "restrictions", full)
        object.__setattr__(self, "stalks", dict(self.stalks))
        bad = self.functoriality_failures()
        if bad:
            raise ValidationError(f"restrictions are not functorial at {bad[0]}")

    def functoriality_failures(self) -> list:
        P = self.base
        bad = []
        for p in P.elements:
            if self.restrictions[(p, p)] != _identity(self.kind, self.stalks[p]):
                bad.append((p, p))
        for (p, q) in P.pairs():
            for r in P.elements:
                if P.le(q, r):
                    lhs = _compose(self.kind, self.restrictions[(p, q)], self.restrictions[(q, r)])
                    if lhs != self.restrictions[(p, r)]:
                        bad.append((p, q, r))
        return bad

    @property
    def space(self) -> AlexandrovSpace:
        return alexandrov(self.base)

    def dim(self, p) -> int:
        if self.kind != VECT:
            raise ValidationError("dimensions exist for vector-space values only")
        return self.stalks[p]

    def res(self, p, q):
        return self.restrictions[(p, q)]

    def to_json(self) -> dict:
        if self.kind != VECT:
            return {"poset": self.base.to_json(), "kind": RING,
                    "stalks": {p: self.stalks[p].to_json() for p in self.base.elements},
                    "restrictions": {f"{p}<{q}": self.restrictions[(p, q)].to_json() for p, q in self.base.covers()}}
        return {"poset": self.base.to_json(), "kind": VECT,
                "stalks": {p: self.stalks[p] for p in self.base.elements},
                "restrictions": {f"{p}<{q}": self.restrictions[(p, q)].to_json() for p, q in self.base.covers()}}


@dataclass(frozen=True, eq=False)
class PoCosheaf:
    """Corestrictions go F(U_q) -> F(U_p) for p <= q; stored under the key (p, q)."""

    base: FinPreorder
    kind: str
    stalks: Mapping
    corestrictions: Mapping = field(repr=False)

    def __post_init__(self):
        if self.kind != VECT:
            raise ValidationError("cosheaves are supported with vector-space values")
        if set(self.stalks) != set(self.base.elements):
            raise ValidationError("every point needs a value")
        full = _fill(self.base, self.kind, self.stalks, dict(self.corestrictions), dual=True)
        _shape_check(self.kind, self.stalks, full, dual=True)
        object.__setattr__(self, "corestrictions", full)
        object.__setattr__(self, "stalks", dict(self.stalks))
        P = self.base
        for (p, q) in P.pairs():
            for r in P.elements:
                if P.le(q, r):
                    # F(U_r) -> F(U_q) -> F(U_p)
                    if self.corestrictions[(p, q)] @ self.corestrictions[(q, r)] != self.corestrictions[(p, r)]:
                        raise ValidationError(f"corestrictions are not functorial at {(p, q, r)}")

    def cores(self, p, q) -> Mat:
        return self.corestrictions[(p, q)]


def constant_sheaf(P: FinPreorder, dim: int = 1) -> PoSheaf:
    return PoSheaf(P, VECT, {p: dim for p in P.elements},
                   {(p, q): Mat.identity(dim) for p, q in P.pairs() if p != q})


def constant_cosheaf(P: FinPreorder, dim: int = 1) -> PoCosheaf:
    return PoCosheaf(P, VECT, {p: dim for p in P.elements},
                     {(p, q): Mat.identity(dim) for p, q in P.pairs() if p != q})


def constant_ring_sheaf(P: FinPreorder, R: LocRing) -> PoSheaf:
    return PoSheaf(P, RING, {p: R for p in P.elements},
                   {(p, q): ringcat.identity(R) for p, q in P.pairs() if p != q})


# -- sections over arbitrary opens -------------------------------------------

@dataclass(frozen=True, eq=False)
class Sections:
    """Sections over an open U of a vector-space sheaf.

    ``basis`` has one column per basis section, written in the coordinates of
    the product of F(U_m) over the chosen minimal points ``mins`` of U.
    """

    sheaf: PoSheaf
    mask: int
    mins: tuple
    offsets: tuple
    basis: Mat

    @property
    def dim(self) -> int:
        return self.basis.ncols

    def value_at(self, coords, q):
        """Value at F(U_q) of the section with product coordinates ``coords``."""
        F = self.sheaf
        for m, off in zip(self.mins, self.offsets):
            if F.base.le(m, q):
                piece = Mat.from_rows([[c] for c in coords[off:off + F.dim(m)]], 1)
                return (F.res(m, q) @ piece).column(0)
        raise ValidationError(f"{q!r} is not in the open set")


@dataclass(frozen=True, eq=False)
class RingSections:
    """Ring-valued sections over a non-basic open, kept as a limit diagram."""

    mask: int
    mins: tuple
    values: tuple
    constraints: tuple  # (m, m', q): agree after restricting to U_q

    def to_json(self) -> dict:
        return {"limit_of": [v.to_json() for v in self.values], "over": list(self.mins),
                "constraints": [list(c) for c in self.constraints]}


def _as_mask(P: FinPreorder, U) -> int:
    return U if isinstance(U, int) else P.mask(U)


def sections(F: PoSheaf, U):
    """Sections of ``F`` over the open set ``U`` (a bitmask or an iterable of points)."""
    P = F.base
    mask = _as_mask(P, U)
    X = alexandrov(P)
    if not X.is_open(mask):
        raise ValidationError("sections are taken over open sets only")
    mins = tuple(P.minimal(mask)) if mask else ()
    if F.kind == RING:
        if not mins:
            return LocRing.zero()
        if len(mins) == 1:
            return F.stalks[mins[0]]
        cons = []
        for q in P.subset(mask):
            below = [m for m in mins if P.le(m, q)]
            cons += [(below[0], m2, q) for m2 in below[1:]]
        values = tuple(F.stalks[m] for m in mins)
        if all(v.is_zero for v in values):
            return LocRing.zero()
        return RingSections(mask, mins, values, tuple(cons))
    offsets = []
    n = 0
    for m in mins:
        offsets.append(n)
        n += F.dim(m)
    blocks = []
    for q in P.subset(mask):
        below = [i for i, m in enumerate(mins) if P.le(m, q)]
        for i in below[1:]:
            j = below[0]
            row_blocks = []
            for k, m in enumerate(mins):
                if k == j:
                    row_blocks.append(F.res(m, q))
                elif k == i:
                    row_blocks.append(-F.res(m, q))
                else:
                    row_blocks.append(Mat.zeros(F.dim(q), F.dim(m)))
            blocks.append(hstack(row_blocks, F.dim(q)))
    D = vstack(blocks, n) if blocks else Mat.zeros(0, n)
    return Sections(F, mask, mins, tuple(offsets), kernel(D))


def section_restriction(F: PoSheaf, U, V) -> Mat:
    """Matrix of the restriction sections(U) -> sections(V) for opens V in U."""
    P = F.base
    um, vm = _as_mask(P, U), _as_mask(P, V)
    if vm & ~um:
        raise ValidationError("V must be contained in U")
    SU, SV = sections(F, um), sections(F, vm)
    cols = []
    for k in range(SU.dim):
        coords = SU.basis.column(k)
        img = []
        for m in SV.mins:
            img.extend(SU.value_at(coords, m))
        x = solve(SV.basis, img) if SV.dim else []
        if x is None:
            raise ValidationError("restricted family is not a section; sheaf data inconsistent")
        cols.append(x)
    if not cols:
        return Mat.zeros(SV.dim, 0)
    return Mat.from_rows(list(zip(*cols)), SU.dim) if SV.dim else Mat.zeros(0, SU.dim)


def pushforward(F: PoSheaf, f: MonotoneMap) -> PoSheaf:
    """(f_* F)(U_q) = F(f^-1(U_q)), with the induced restrictions."""
    if f.source != F.base:
        raise ValidationError("map must start at the base of the sheaf")
    Y = f.target
    pre = {q: f.preimage(Y.up_mask(q)) for q in Y.elements}
    if F.kind == VECT:
        stalks = {q: sections(F, pre[q]).dim for q in Y.elements}
        res = {(q, r): section_restriction(F, pre[q], pre[r]) for q, r in Y.pairs() if q != r}
        return PoSheaf(Y, VECT, stalks, res)
    P = F.base
    stalks = {}
    gen = {}
    for q in Y.elements:
        mins = P.minimal(pre[q]) if pre[q] else []
        if len(mins) > 1:
            raise ValidationError("ring pushforward needs basic or empty preimages")
        gen[q] = mins[0] if mins else None
        stalks[q] = F.stalks[mins[0]] if mins else LocRing.zero()
    res = {}
    for q, r in Y.pairs():
        if q == r:
            continue
        a, b = gen[q], gen[r]
        if b is None:
            res[(q, r)] = ringcat.to_zero(stalks[q]) if not stalks[q].is_zero else ringcat.identity(stalks[q])
        else:
            res[(q, r)] = F.res(a, b)
    return PoSheaf(Y, RING, stalks, res)


# -- JSON --------------------------------------------------------------------

def _matrix_json(obj, rows: int, cols: int, path: str) -> Mat:
    if rows == 0 and (obj == [] or obj is None):
        return Mat.zeros(0, cols)
    if not isinstance(obj, list) or len(obj) != rows:
        raise MalformedInput(f"expected {rows} rows", path)
    out = []
    for i, r in enumerate(obj):
        if not isinstance(r, list) or len(r) != cols:
            raise MalformedInput(f"expected {cols} entries", f"{path}[{i}]")
        row = []
        for j, v in enumerate(r):
            try:
                row.append(frac(v))
            except (TypeError, ValueError, ZeroDivisionError):
                raise MalformedInput(f"bad rational {v!r}", f"{path}[{i}][{j}]") from None
        out.append(row)
    return Mat.from_rows(out, cols)


def _pair_key(key: str, P: FinPreorder, path: str) -> tuple:
    parts = key.split("<")
    if len(parts) != 2 or parts[0] not in P.elements or parts[1] not in P.elements:
        raise MalformedInput(f"key {key!r} must be 'p<q' for elements p, q", path)
    if not P.le(parts[0], parts[1]):
        raise MalformedInput(f"{parts[0]!r} is not below {parts[1]!r}", path)
    return parts[0], parts[1]


def sheaf_from_json(obj, path: str = "$"):
    """Parse a sheaf, or a cosheaf when the object carries ``corestrictions``."""
    if not isinstance(obj, dict):
        raise MalformedInput("sheaf must be an object", path)
    if "poset" not in obj:
        raise MalformedInput("missing poset", f"{path}.poset")
    P = poset_from_json(obj["poset"], f"{path}.poset")
    kind = obj.get("kind", VECT)
    if kind not in (VECT, RING):
        raise MalformedInput(f"unknown kind {kind!r}", f"{path}.kind")
    st = obj.get("stalks")
    if not isinstance(st, dict):
        raise MalformedInput("stalks must be an object", f"{path}.stalks")
    stalks = {}
    for p in P.elements:
        if p not in st:
            raise MalformedInput(f"missing stalk for {p!r}", f"{path}.stalks")
        v = st[p]
        if kind == VECT:
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise MalformedInput("stalk must be a dimension", f"{path}.stalks.{p}")
            stalks[p] = v
        else:
            stalks[p] = ringcat.ring_from_json(v, f"{path}.stalks.{p}")
    cosheaf = "corestrictions" in obj
    key = "corestrictions" if cosheaf else "restrictions"
    raw = obj.get(key, {})
    if not isinstance(raw, dict):
        raise MalformedInput(f"{key} must be an object", f"{path}.{key}")
    maps = {}
    for k, m in raw.items():
        p, q = _pair_key(k, P, f"{path}.{key}")
        where = f"{path}.{key}.{k}"
        if kind == VECT:
            rows, cols = (stalks[p], stalks[q]) if cosheaf else (stalks[q], stalks[p])
            maps[(p, q)] = _matrix_json(m, rows, cols, where)
        else:
            if not isinstance(m, dict):
                raise MalformedInput("ring map must be an object of variable images", where)
            src, tgt = stalks[p], stalks[q]
            try:
                maps[(p, q)] = ringcat.to_zero(src) if tgt.is_zero else ringcat.substitution(
                    src, tgt, {v: str(e) for v, e in m.get("images", m).items()})
            except ValidationError as exc:
                raise MalformedInput(str(exc), where) from exc
    # zero-dimensional pairs need no explicit matrix
    if kind == VECT:
        for p, q in P.covers():
            if (p, q) not in maps and (stalks[p] == 0 or stalks[q] == 0):
                rows, cols = (stalks[p], stalks[q]) if cosheaf else (stalks[q], stalks[p])
                maps[(p, q)] = Mat.zeros(rows, cols)
    # shape and functoriality problems surface as ValidationError
    if cosheaf:
        return PoCosheaf(P, kind, stalks, maps)
    return PoSheaf(P, kind, stalks, maps)
