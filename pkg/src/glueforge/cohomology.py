"""Cochain and chain complexes of sheaves on finite posets, and Cech complexes.

For a sheaf F and an open U, degree i of the cochain complex has one summand
F(U_{x_i}) for every strict chain x_0 < ... < x_i inside U.  The
differential is

    (d s)(x_0 < ... < x_{i+1})
        = sum_{j <= i} (-1)^j s(x_0 .. ^x_j .. x_{i+1})
          + (-1)^{i+1} rho_{x_i x_{i+1}} s(x_0 .. x_i)

so only the term that drops the top element needs a restriction map.  In
degree 0 the kernel is exactly the family of compatible sections.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MalformedInput, ValidationError
from .finspace import FinPreorder, alexandrov
from .gluing import build_SU2, p1_nerve
from .linalg import Mat, rank
from .ringcat import default_window, graded_sections
from .sheafcore import PoCosheaf, PoSheaf, VECT, _matrix_json


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GLUEFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _ranks(mats: Sequence[Mat]) -> list[int]:
    n = _threads()
    if n == 1 or len(mats) < 2:
        return [rank(m) for m in mats]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(rank, mats))


@dataclass(frozen=True, eq=False)
class CochainComplex:
    """Spaces ``dims[i]`` with differentials ``diffs[i]: C^i -> C^{i+1}``."""

    dims: tuple
    diffs: tuple
    labels: tuple = ()

    def __post_init__(self):
        for i, d in enumerate(self.diffs):
            if d.shape != (self.dims[i + 1], self.dims[i]):
                raise ValidationError(f"differential {i} has shape {d.shape}")

    def squares_to_zero(self) -> bool:
        return all((b @ a).is_zero() for a, b in zip(self.diffs, self.diffs[1:]))

    @property
    def euler(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.dims))


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """Spaces ``dims[i]`` with boundaries ``bounds[i]: C_{i+1} -> C_i``."""

    dims: tuple
    bounds: tuple
    labels: tuple = ()

    def __post_init__(self):
        for i, b in enumerate(self.bounds):
            if b.shape != (self.dims[i], self.dims[i + 1]):
                raise ValidationError(f"boundary {i} has shape {b.shape}")

    def squares_to_zero(self) -> bool:
        return all((a @ b).is_zero() for a, b in zip(self.bounds, self.bounds[1:]))

    @property
    def euler(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.dims))


def _chains_by_degree(P: FinPreorder, mask: int) -> list[list[tuple]]:
    if not P.restrict(P.subset(mask)).is_T0():
        raise ValidationError("chain complexes are built on posets (antisymmetric orders)")
    out: list[list[tuple]] = []
    for c in P.chains(mask):
        while len(out) < len(c):
            out.append([])
        out[len(c) - 1].append(c)
    return out


def _offsets(chains, size) -> tuple[dict, int]:
    off = {}
    n = 0
    for c in chains:
        off[c] = n
        n += size(c[-1])
    return off, n


def cochain_complex(F: PoSheaf, U=None) -> CochainComplex:
    """The complex of ``F`` over the open set ``U`` (default: the whole space)."""
    if F.kind != VECT:
        raise ValidationError("cohomology needs vector-space values")
    P = F.base
    X = alexandrov(P)
    mask = X.full if U is None else (U if isinstance(U, int) else P.mask(U))
    if not X.is_open(mask):
        raise ValidationError("cochain complexes are taken over open sets")
    levels = _chains_by_degree(P, mask)
    if not levels:
        return CochainComplex((0,), (), ((),))
    offs = [_offsets(lv, F.dim) for lv in levels]
    diffs = []
    for i in range(len(levels) - 1):
        src_off, n_src = offs[i]
        tgt_off, n_tgt = offs[i + 1]
        rows = [[0] * n_src for _ in range(n_tgt)]
        for tau in levels[i + 1]:
            r0 = tgt_off[tau]
            top = tau[-1]
            k = F.dim(top)
            for j in range(i + 2):
                sigma = tau[:j] + tau[j + 1:]
                c0 = src_off[sigma]
                sign = -1 if j % 2 else 1
                if j <= i:
                    for a in range(k):
                        rows[r0 + a][c0 + a] += sign
                else:
                    rho = F.res(tau[-2], top)
                    for a in range(k):
                        for b in range(rho.ncols):
                            rows[r0 + a][c0 + b] += sign * rho[a, b]
        diffs.append(Mat.from_rows(rows, n_src))
    dims = tuple(n for _, n in offs)
    return CochainComplex(dims, tuple(diffs), tuple(tuple(lv) for lv in levels))


def chain_complex(G: PoCosheaf, Z=None) -> ChainComplex:
    """Homology complex of a cosheaf over the closed set ``Z`` (default: everything).

    Degree i has one summand G(U_{x_i}) per strict chain; the term dropping the
    top element applies the corestriction G(U_{x_{i+1}}) -> G(U_{x_i}).
    """
    P = G.base
    X = alexandrov(P)
    mask = X.full if Z is None else (Z if isinstance(Z, int) else P.mask(Z))
    if not X.is_closed(mask):
        raise ValidationError("chain complexes are taken over closed sets")
    levels = _chains_by_degree(P, mask)
    if not levels:
        return ChainComplex((0,), (), ((),))
    size = lambda p: G.stalks[p]
    offs = [_offsets(lv, size) for lv in levels]
    bounds = []
    for i in range(len(levels) - 1):
        lo_off, n_lo = offs[i]
        hi_off, n_hi = offs[i + 1]
        rows = [[0] * n_hi for _ in range(n_lo)]
        for tau in levels[i + 1]:
            c0 = hi_off[tau]
            top = tau[-1]
            k = size(top)
            for j in range(i + 2):
                sigma = tau[:j] + tau[j + 1:]
                r0 = lo_off[sigma]
                sign = -1 if j % 2 else 1
                if j <= i:
                    for a in range(k):
                        rows[r0 + a][c0 + a] += sign
                else:
                    co = G.cores(tau[-2], top)
                    for a in range(co.nrows):
                        for b in range(k):
                            rows[r0 + a][c0 + b] += sign * co[a, b]
        bounds.append(Mat.from_rows(rows, n_hi) if n_lo else Mat.zeros(0, n_hi))
    dims = tuple(n for _, n in offs)
    return ChainComplex(dims, tuple(bounds), tuple(tuple(lv) for lv in levels))


def cohomology_dims(C: CochainComplex) -> list[int]:
    if not C.squares_to_zero():
        raise ValidationError("d o d is not zero")
    r = _ranks(list(C.diffs))
    out = []
    for i, n in enumerate(C.dims):
        rin = r[i - 1] if i > 0 else 0
        rout = r[i] if i < len(r) else 0
        out.append(n - rout - rin)
    return out


def homology_dims(C: ChainComplex) -> list[int]:
    if not C.squares_to_zero():
        raise ValidationError("boundary o boundary is not zero")
    r = _ranks(list(C.bounds))
    out = []
    for i, n in enumerate(C.dims):
        rout = r[i - 1] if i > 0 else 0  # C_i -> C_{i-1}
        rin = r[i] if i < len(r) else 0  # C_{i+1} -> C_i
        out.append(n - rout - rin)
    return out


def sheaf_cohomology(F: PoSheaf, U=None) -> list[int]:
    return cohomology_dims(cochain_complex(F, U))


def complex_from_matrices(dims: Sequence[int], diffs: Sequence[Mat]) -> CochainComplex:
    return CochainComplex(tuple(dims), tuple(diffs))


# -- Cech complexes ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CechData:
    """Finite-dimensional values on index tuples of a cover.

    ``spaces`` maps sorted index tuples (length 1 to 3) to dimensions and
    ``maps`` maps (face, tuple) to the restriction matrix from the face's
    space to the tuple's space.  Tuples missing from ``spaces`` are empty
    intersections and carry the zero space.
    """

    index: tuple
    spaces: Mapping
    maps: Mapping


def cech_complex(data: CechData, top: int = 2) -> CochainComplex:
    """Alternating Cech complex over increasing index tuples of length <= top + 1."""
    levels = []
    for k in range(1, top + 2):
        lv = [t for t in itertools.combinations(data.index, k) if data.spaces.get(t, 0)]
        levels.append(lv)
    offs = [_offsets([(t,) for t in lv], lambda t: data.spaces[t]) for lv in levels]
    offs = [({c[0]: o for c, o in off.items()}, n) for off, n in offs]
    diffs = []
    for k in range(len(levels) - 1):
        src_off, n_src = offs[k]
        tgt_off, n_tgt = offs[k + 1]
        rows = [[0] * n_src for _ in range(n_tgt)]
        for tau in levels[k + 1]:
            r0 = tgt_off[tau]
            for j in range(len(tau)):
                face = tau[:j] + tau[j + 1:]
                if face not in src_off:
                    continue
                M = data.maps[(face, tau)]
                sign = -1 if j % 2 else 1
                c0 = src_off[face]
                for a in range(M.nrows):
                    for b in range(M.ncols):
                        rows[r0 + a][c0 + b] += sign * M[a, b]
        diffs.append(Mat.from_rows(rows, n_src) if n_tgt else Mat.zeros(0, n_src))
    return CochainComplex(tuple(n for _, n in offs), tuple(diffs), tuple(tuple(lv) for lv in levels))


def cech_from_json(obj, path: str = "$") -> CechData:
    """``{"index": [...], "spaces": {"a": 1, "a,b": 1}, "maps": {"a|a,b": [[1]]}}``.

    Map keys are ``face|tuple``; a missing map between nonzero spaces is an error.
    """
    if not isinstance(obj, dict) or not isinstance(obj.get("index"), list):
        raise MalformedInput("Cech data needs an index list", f"{path}.index")
    index = tuple(str(i) for i in obj["index"])
    pos = {i: n for n, i in enumerate(index)}
    sj = obj.get("spaces")
    if not isinstance(sj, dict):
        raise MalformedInput("spaces must be an object", f"{path}.spaces")

    def key(text, where):
        t = tuple(text.split(","))
        if not 1 <= len(t) <= 3 or any(x not in pos for x in t) or len(set(t)) != len(t):
            raise MalformedInput(f"bad index tuple {text!r}", where)
        return tuple(sorted(t, key=pos.get))

    spaces = {}
    for k, v in sj.items():
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise MalformedInput("space must be a dimension", f"{path}.spaces.{k}")
        spaces[key(k, f"{path}.spaces.{k}")] = v
    mj = obj.get("maps", {})
    if not isinstance(mj, dict):
        raise MalformedInput("maps must be an object", f"{path}.maps")
    maps = {}
    for k, m in mj.items():
        where = f"{path}.maps.{k}"
        if k.count("|") != 1:
            raise MalformedInput("map keys look like 'face|tuple'", where)
        a, b = (key(x, where) for x in k.split("|"))
        if len(a) + 1 != len(b) or not set(a) <= set(b):
            raise MalformedInput("face must drop one index", where)
        maps[(a, b)] = _matrix_json(m, spaces.get(b, 0), spaces.get(a, 0), where)
    for t in spaces:
        for j in range(len(t)):
            f = t[:j] + t[j + 1:]
            if f and spaces[t] and spaces.get(f, 0) and (f, t) not in maps:
                raise MalformedInput(f"missing map {','.join(f)}|{','.join(t)}", f"{path}.maps")
    return CechData(index, spaces, maps)


# -- degree 0/1 comparison ---------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    left: tuple
    right: tuple

    @property
    def agree_01(self) -> bool:
        return tuple(self.left[:2]) == tuple(self.right[:2])

    def to_json(self) -> dict:
        return {"left": list(self.left), "right": list(self.right), "agree_0_1": self.agree_01,
                "higher_degrees_equal": list(self.left[2:]) == list(self.right[2:])}


def _pad(h: Sequence[int], n: int) -> tuple:
    return tuple(h) + (0,) * (n - len(h))


def compare_01(left, right) -> Comparison:
    """Compare cohomology in degrees 0 and 1; higher degrees are only reported.

    Each side is a complex, a sheaf (whole space), or a list of dimensions.
    """
    def dims(x):
        if isinstance(x, CochainComplex):
            return cohomology_dims(x)
        if isinstance(x, PoSheaf):
            return sheaf_cohomology(x)
        return list(x)

    a, b = dims(left), dims(right)
    n = max(len(a), len(b), 2)
    return Comparison(_pad(a, n), _pad(b, n))


# -- the graded P^1 model ----------------------------------------------------

def _hull(d: int, window) -> tuple[int, int]:
    # exponents outside [min(0,d), max(0,d)] cancel in pairs, so the window is widened to cover it
    lo, hi = default_window(d)
    if window is None:
        return lo, hi
    return min(lo, window[0]), max(hi, window[1])


def _select(src: tuple, tgt: tuple) -> Mat:
    """Inclusion of the monomials ``src`` into the larger set ``tgt``."""
    pos = {k: i for i, k in enumerate(tgt)}
    rows = [[0] * len(src) for _ in tgt]
    for c, k in enumerate(src):
        rows[pos[k]][c] = 1
    return Mat.from_rows(rows, len(src))


def _piece(R, d: int, window):
    return graded_sections(R, d, window, infinity=R.variables == ("y",))


def p1_graded_sheaf(d: int, window=None) -> PoSheaf:
    """O(d) on the three-point space S_U^2 of the standard cover of P^1.

    Every stalk is the degree-d piece of the ring over the point's minimal
    open, written in global exponents; restrictions are inclusions of
    monomials.
    """
    w = _hull(d, window)
    su2 = build_SU2(p1_nerve())
    P = su2.sheaf.base
    pieces = {p: _piece(su2.sheaf.stalks[p], d, w).exponents for p in P.elements}
    res = {(p, q): _select(pieces[p], pieces[q]) for p, q in P.covers()}
    return PoSheaf(P, VECT, {p: len(e) for p, e in pieces.items()}, res)


def p1_graded_cech(d: int, window=None) -> CechData:
    """Cech data of O(d) for the cover U0 = Spec Q[x], U1 = Spec Q[1/x]."""
    w = _hull(d, window)
    N = p1_nerve()
    pieces = {(i,): _piece(N.patches[i], d, w).exponents for i in N.order}
    for pair, (R, _, _) in N.overlaps.items():
        pieces[pair] = _piece(R, d, w).exponents
    maps = {}
    for pair in N.overlaps:
        for j in range(2):
            face = pair[:j] + pair[j + 1:]
            maps[(face, pair)] = _select(pieces[face], pieces[pair])
    return CechData(tuple(N.order), {t: len(e) for t, e in pieces.items()}, maps)


def p1_comparison(d: int, window=None) -> Comparison:
    return compare_01(p1_graded_sheaf(d, window), cech_complex(p1_graded_cech(d, window)))
