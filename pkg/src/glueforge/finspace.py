"""Finite preorders and their Alexandrov spaces.

Subsets of a preorder are bitsets (Python ints) over the element sequence:
bit ``i`` stands for ``elements[i]``.  Opens are the up-closed subsets, so
the minimal open around ``p`` is ``U_p = {q : q >= p}`` and the closure of
``p`` is ``C_p = {q : q <= p}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import MalformedInput, ValidationError


def bits(idx: Iterable[int]) -> int:
    m = 0
    for i in idx:
        m |= 1 << i
    return m


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class FinPreorder:
    elements: tuple
    leq: tuple  # leq[i][j] is True iff elements[i] <= elements[j]

    def __post_init__(self):
        n = len(self.elements)
        if len(set(self.elements)) != n:
            raise ValidationError("duplicate element")
        if len(self.leq) != n or any(len(r) != n for r in self.leq):
            raise ValidationError("relation matrix has the wrong shape")
        for i in range(n):
            if not self.leq[i][i]:
                raise ValidationError(f"relation is not reflexive at {self.elements[i]!r}")
        for i in range(n):
            for j in range(n):
                if self.leq[i][j]:
                    for k in range(n):
                        if self.leq[j][k] and not self.leq[i][k]:
                            raise ValidationError("relation is not transitive")
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.elements)})
        object.__setattr__(self, "_up", tuple(bits(j for j in range(n) if self.leq[i][j]) for i in range(n)))
        object.__setattr__(self, "_down", tuple(bits(j for j in range(n) if self.leq[j][i]) for i in range(n)))

    @staticmethod
    def from_covers(elements: Sequence, covers: Iterable[tuple]) -> "FinPreorder":
        elements = tuple(elements)
        n = len(elements)
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != n:
            raise ValidationError("duplicate element")
        rel = [[i == j for j in range(n)] for i in range(n)]
        for p, q in covers:
            if p not in index or q not in index:
                raise ValidationError(f"cover ({p!r}, {q!r}) mentions an unknown element")
            rel[index[p]][index[q]] = True
        # Warshall closure
        for k in range(n):
            for i in range(n):
                if rel[i][k]:
                    rk = rel[k]
                    ri = rel[i]
                    for j in range(n):
                        if rk[j]:
                            ri[j] = True
        return FinPreorder(elements, tuple(tuple(r) for r in rel))

    @staticmethod
    def discrete(elements: Sequence) -> "FinPreorder":
        return FinPreorder.from_covers(elements, [])

    @staticmethod
    def chain(elements: Sequence) -> "FinPreorder":
        return FinPreorder.from_covers(elements, list(zip(elements, elements[1:])))

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise ValidationError(f"unknown element {p!r}") from None

    def le(self, p, q) -> bool:
        return self.leq[self.index(p)][self.index(q)]

    def lt(self, p, q) -> bool:
        return self.le(p, q) and not self.le(q, p)

    def up_mask(self, p) -> int:
        return self._up[self.index(p)]

    def down_mask(self, p) -> int:
        return self._down[self.index(p)]

    def mask(self, subset: Iterable) -> int:
        return bits(self.index(p) for p in subset)

    def subset(self, mask: int) -> list:
        return [self.elements[i] for i in members(mask)]

    def is_T0(self) -> bool:
        n = len(self.elements)
        return all(not (self.leq[i][j] and self.leq[j][i]) for i in range(n) for j in range(i + 1, n))

    def pairs(self) -> Iterator[tuple]:
        """All related pairs p <= q, including p = q."""
        for i, p in enumerate(self.elements):
            for j, q in enumerate(self.elements):
                if self.leq[i][j]:
                    yield p, q

    def covers(self) -> list[tuple]:
        """Hasse diagram: strict relations with nothing strictly in between."""
        out = []
        for p in self.elements:
            for q in self.elements:
                if self.lt(p, q) and not any(self.lt(p, r) and self.lt(r, q) for r in self.elements):
                    out.append((p, q))
        return out

    def minimal(self, mask: int | None = None) -> list:
        """Minimal elements of a subset, one representative per equivalence class."""
        if mask is None:
            mask = (1 << len(self.elements)) - 1
        idx = members(mask)
        out = []
        seen = 0
        for i in idx:
            if any(self.leq[j][i] and not self.leq[i][j] for j in idx):
                continue
            if seen >> i & 1:
                continue
            out.append(self.elements[i])
            seen |= self._up[i] & self._down[i]
        return out

    def maximal(self, mask: int | None = None) -> list:
        if mask is None:
            mask = (1 << len(self.elements)) - 1
        idx = members(mask)
        return [self.elements[i] for i in idx
                if not any(self.leq[i][j] and not self.leq[j][i] for j in idx)]

    def restrict(self, subset: Sequence) -> "FinPreorder":
        idx = [self.index(p) for p in subset]
        return FinPreorder(tuple(subset), tuple(tuple(self.leq[i][j] for j in idx) for i in idx))

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "covers": [list(c) for c in self.covers()]
                + [list(p) for p in self._cycle_pairs()]}

    def _cycle_pairs(self) -> list:
        # equivalent but distinct elements are not visible in the Hasse diagram
        return [(p, q) for p, q in self.pairs() if p != q and self.le(q, p)]

    def chains(self, mask: int | None = None, max_len: int | None = None) -> list[tuple]:
        """Strictly increasing chains inside ``mask``, shortest first."""
        if mask is None:
            mask = (1 << len(self.elements)) - 1
        pts = [self.elements[i] for i in members(mask)]
        level = [(p,) for p in pts]
        out = list(level)
        k = 1
        while level and (max_len is None or k < max_len):
            nxt = [c + (q,) for c in level for q in pts if self.lt(c[-1], q)]
            out.extend(nxt)
            level = nxt
            k += 1
        return out


FinPoset = FinPreorder


def poset_from_json(obj, path: str = "$") -> FinPreorder:
    if not isinstance(obj, dict):
        raise MalformedInput("poset must be an object", path)
    els = obj.get("elements")
    if not isinstance(els, list):
        raise MalformedInput("missing element list", f"{path}.elements")
    for i, e in enumerate(els):
        if not isinstance(e, str):
            raise MalformedInput("element names must be strings", f"{path}.elements[{i}]")
    covers = obj.get("covers", [])
    if not isinstance(covers, list):
        raise MalformedInput("covers must be a list", f"{path}.covers")
    pairs = []
    for i, c in enumerate(covers):
        if not isinstance(c, list) or len(c) != 2:
            raise MalformedInput("cover must be a pair", f"{path}.covers[{i}]")
        for j, x in enumerate(c):
            if x not in els:
                raise MalformedInput(f"unknown element {x!r}", f"{path}.covers[{i}][{j}]")
        pairs.append(tuple(c))
    try:
        return FinPreorder.from_covers(els, pairs)
    except ValidationError as exc:
        raise MalformedInput(str(exc), path) from exc


@dataclass(frozen=True)
class AlexandrovSpace:
    preorder: FinPreorder

    @property
    def points(self) -> tuple:
        return self.preorder.elements

    @property
    def full(self) -> int:
        return (1 << len(self.preorder)) - 1

    def is_open(self, U) -> bool:
        m = U if isinstance(U, int) else self.preorder.mask(U)
        return all(self.preorder._up[i] & ~m == 0 for i in members(m))

    def is_closed(self, Z) -> bool:
        m = Z if isinstance(Z, int) else self.preorder.mask(Z)
        return self.is_open(self.full & ~m)

    def min_open(self, p) -> int:
        return self.preorder.up_mask(p)

    def closure(self, p) -> int:
        return self.preorder.down_mask(p)

    def interior(self, mask: int) -> int:
        return bits(i for i in members(mask) if self.preorder._up[i] & ~mask == 0)

    def up_closure(self, mask: int) -> int:
        out = 0
        for i in members(mask):
            out |= self.preorder._up[i]
        return out

    def opens(self) -> Iterator[int]:
        """Every open set; exponential, meant for small spaces."""
        n = len(self.preorder)
        for m in range(1 << n):
            if self.is_open(m):
                yield m

    def is_irreducible(self, mask: int) -> bool:
        """Open ``mask`` is irreducible iff it is not a union of two proper open subsets."""
        if mask == 0:
            return False
        if not self.is_open(mask):
            raise ValidationError("irreducibility is checked for open sets only")
        # a finite open is a union of the U_p it contains; irreducible iff one U_p already covers it
        return any(self.preorder._up[i] == mask for i in members(mask))

    def subset(self, mask: int) -> list:
        return self.preorder.subset(mask)


def alexandrov(P: FinPreorder) -> AlexandrovSpace:
    return AlexandrovSpace(P)


def preorder_of(X: AlexandrovSpace) -> FinPreorder:
    """Specialization order recovered from minimal opens: p <= q iff U_p contains U_q."""
    P = X.preorder
    ups = [X.min_open(p) for p in P.elements]
    n = len(ups)
    return FinPreorder(P.elements, tuple(tuple(ups[j] & ~ups[i] == 0 for j in range(n)) for i in range(n)))


def is_T0(P: FinPreorder) -> bool:
    return P.is_T0()


def graph_poset(G) -> FinPreorder:
    """Vertices and edges of an undirected graph, with a vertex below each edge it lies on."""
    from .sscomplex import SEP, UGraph

    if not isinstance(G, UGraph):
        raise TypeError("graph_poset expects an undirected graph")
    if not G.is_simple():
        raise ValidationError("graph is not simple")
    elems = list(G.vertices)
    covers = []
    for a, b in G.edges:
        e = f"{a}{SEP}{b}"
        elems.append(e)
        covers += [(a, e), (b, e)]
    return FinPreorder.from_covers(elems, covers)


@dataclass(frozen=True)
class MonotoneMap:
    source: FinPreorder
    target: FinPreorder
    mapping: Mapping

    def __post_init__(self):
        if set(self.mapping) != set(self.source.elements):
            raise ValidationError("map is not total")
        for v in self.mapping.values():
            self.target.index(v)
        for p, q in self.source.pairs():
            if not self.target.le(self.mapping[p], self.mapping[q]):
                raise ValidationError(f"map is not monotone on {p!r} <= {q!r}")

    def preimage(self, mask: int) -> int:
        tgt = self.target
        return bits(i for i, p in enumerate(self.source.elements)
                    if mask >> tgt.index(self.mapping[p]) & 1)
