"""Localized polynomial rings over Q and the maps between them.

A :class:`LocRing` is ``Q[vars][S^-1]`` where ``S`` is a finite set of monic
irreducible polynomials, or the zero ring.  Ring elements and substitution
images are sympy rational expressions in the ring's variables.  Nothing here
computes Groebner bases: open embeddings are recognised when a morphism
splits as a localization followed by a Laurent-monomial or affine change of
variables whose inverse can be written down and checked.
"""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import sympy

from .errors import MalformedInput, ValidationError
from .linalg import Mat, frac_str, inverse, is_invertible

_SAFE = re.compile(r"^[A-Za-z0-9_+\-*/^(). ]*$")


def _sym(name: str) -> sympy.Symbol:
    return sympy.Symbol(name)


def _lex_key(e) -> str:
    return str(e)


def canon_factors(f, variables: Sequence[str]) -> tuple[bool, frozenset]:
    """Split ``f`` into monic irreducible factors.

    Returns ``(is_zero, factors)``; constants contribute nothing.
    """
    return _canon_factors(sympy.expand(sympy.sympify(f)), tuple(variables))


@lru_cache(maxsize=65536)
def _canon_factors(f, variables: tuple) -> tuple[bool, frozenset]:
    if f == 0:
        return True, frozenset()
    gens = [_sym(v) for v in variables]
    if not gens or not (f.free_symbols & set(gens)):
        if f.free_symbols - set(gens):
            raise ValidationError(f"polynomial {f} uses unknown variables")
        return False, frozenset()
    if f.free_symbols - set(gens):
        raise ValidationError(f"polynomial {f} uses unknown variables")
    _, facs = sympy.factor_list(f, *gens, domain="QQ")
    out = set()
    for g, _mult in facs:
        p = sympy.Poly(g, *gens, domain="QQ")
        if p.is_ground:
            continue
        out.add(sympy.expand(p.monic().as_expr()))
    return False, frozenset(out)


@lru_cache(maxsize=None)
def _cancel(expr):
    return sympy.cancel(expr)


@dataclass(frozen=True)
class LocRing:
    variables: tuple = ()
    inverted: frozenset = frozenset()
    is_zero: bool = False

    def __post_init__(self):
        if self.is_zero and (self.variables or self.inverted):
            object.__setattr__(self, "variables", ())
            object.__setattr__(self, "inverted", frozenset())
        if len(set(self.variables)) != len(self.variables):
            raise ValidationError("duplicate variable")

    @staticmethod
    def polynomial(*variables: str) -> "LocRing":
        return LocRing(tuple(variables))

    @staticmethod
    def zero() -> "LocRing":
        return LocRing((), frozenset(), True)

    @staticmethod
    def make(variables: Sequence[str], inverted: Sequence = ()) -> "LocRing":
        R = LocRing(tuple(variables))
        for f in inverted:
            R = localize(R, f)[0]
        return R

    @property
    def gens(self) -> list:
        return [_sym(v) for v in self.variables]

    def sorted_inverted(self) -> list:
        return sorted(self.inverted, key=lambda e: (sympy.Poly(e, *self.gens).total_degree(), _lex_key(e)))

    def is_unit(self, expr) -> bool:
        """Whether a polynomial (or fraction) is a unit of this ring."""
        return self.is_zero or _is_unit(self, sympy.sympify(expr))

    def contains(self, expr) -> bool:
        """Whether a rational expression lies in this ring."""
        return self.is_zero or _contains(self, sympy.sympify(expr))

    def _is_unit(self, expr) -> bool:
        expr = _cancel(expr)
        num, den = sympy.fraction(expr)
        for part in (num, den):
            z, facs = canon_factors(part, self.variables)
            if z or not facs <= self.inverted:
                return False
        return True

    def _contains(self, expr) -> bool:
        expr = _cancel(expr)
        if expr.free_symbols - set(self.gens):
            return False
        _, den = sympy.fraction(expr)
        z, facs = canon_factors(den, self.variables)
        return not z and facs <= self.inverted

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        base = f"Q[{','.join(self.variables)}]"
        if not self.inverted:
            return base
        return base + "_{" + "*".join(f"({e})" for e in self.sorted_inverted()) + "}"

    def to_json(self) -> dict:
        return {"vars": list(self.variables),
                "inverted": [poly_to_terms(e, self.variables) for e in self.sorted_inverted()],
                "zero": self.is_zero}


_is_unit = lru_cache(maxsize=None)(LocRing._is_unit)
_contains = lru_cache(maxsize=None)(LocRing._contains)


def canon(R: LocRing) -> LocRing:
    if R.is_zero:
        return LocRing.zero()
    facs = set()
    for f in R.inverted:
        z, fs = canon_factors(f, R.variables)
        if z:
            return LocRing.zero()
        facs |= fs
    return LocRing(R.variables, frozenset(facs))


def poly_to_terms(expr, variables: Sequence[str]) -> list:
    gens = [_sym(v) for v in variables]
    expr = sympy.expand(expr)
    if not gens:
        c = Fraction(str(sympy.Rational(expr)))
        return [[[], frac_str(c)]] if c else []
    p = sympy.Poly(expr, *gens, domain="QQ")
    return [[list(m), frac_str(Fraction(int(c.p), int(c.q)))] for m, c in sorted(p.terms())]


def terms_to_poly(terms, variables: Sequence[str], path: str = "$"):
    if isinstance(terms, str):
        return parse_expr(terms, variables, path)
    if not isinstance(terms, list):
        raise MalformedInput("polynomial must be a term list or a string", path)
    gens = [_sym(v) for v in variables]
    out = sympy.Integer(0)
    for i, t in enumerate(terms):
        if not isinstance(t, list) or len(t) != 2 or not isinstance(t[0], list) or len(t[0]) != len(gens):
            raise MalformedInput("term must be [exponents, coefficient]", f"{path}[{i}]")
        try:
            c = Fraction(str(t[1]))
        except (ValueError, ZeroDivisionError):
            raise MalformedInput(f"bad coefficient {t[1]!r}", f"{path}[{i}][1]") from None
        mono = sympy.Rational(c.numerator, c.denominator)
        for g, k in zip(gens, t[0]):
            if not isinstance(k, int) or isinstance(k, bool):
                raise MalformedInput("exponent must be an integer", f"{path}[{i}][0]")
            mono *= g ** k
        out += mono
    return out


def parse_expr(text: str, variables: Sequence[str], path: str = "$"):
    """Parse an arithmetic expression such as ``"1/x"`` or ``"x**2 - 1"``."""
    if not isinstance(text, str) or not _SAFE.match(text):
        raise MalformedInput(f"unsupported expression {text!r}", path)
    local = {v: _sym(v) for v in variables}
    try:
        e = sympy.parse_expr(text.replace("^", "**"), local_dict=local, evaluate=True)
    except Exception as exc:  # sympy raises a zoo of types here
        raise MalformedInput(f"cannot parse {text!r}: {exc}", path) from None
    if e.free_symbols - set(local.values()):
        raise MalformedInput(f"expression {text!r} uses unknown variables", path)
    if e.has(sympy.zoo, sympy.nan, sympy.oo):
        raise MalformedInput(f"expression {text!r} is not finite", path)
    return e


def ring_from_json(obj, path: str = "$") -> LocRing:
    if not isinstance(obj, dict):
        raise MalformedInput("ring must be an object", path)
    if obj.get("zero", False) is True:
        return LocRing.zero()
    vs = obj.get("vars", [])
    if not isinstance(vs, list) or not all(isinstance(v, str) and v.isidentifier() for v in vs):
        raise MalformedInput("vars must be a list of identifiers", f"{path}.vars")
    inv = obj.get("inverted", [])
    if not isinstance(inv, list):
        raise MalformedInput("inverted must be a list", f"{path}.inverted")
    polys = [terms_to_poly(t, vs, f"{path}.inverted[{i}]") for i, t in enumerate(inv)]
    try:
        return LocRing.make(vs, polys)
    except ValidationError as exc:
        raise MalformedInput(str(exc), path) from exc


@dataclass(frozen=True, eq=False)
class RingMor:
    """A ring map given by the images of the source variables."""

    source: LocRing
    target: LocRing
    images: Mapping  # source variable -> sympy expression in target variables

    def __post_init__(self):
        object.__setattr__(self, "images", dict(self.images))
        if self.target.is_zero:
            object.__setattr__(self, "images", {})
            return
        if self.source.is_zero:
            raise ValidationError("the zero ring maps only to itself")
        if set(self.images) != set(self.source.variables):
            raise ValidationError("every source variable needs an image")
        imgs = {}
        for v, e in self.images.items():
            e = _cancel(sympy.sympify(e))
            if not self.target.contains(e):
                raise ValidationError(f"image of {v} is not an element of {self.target}")
            imgs[v] = e
        object.__setattr__(self, "images", imgs)
        for s in self.source.inverted:
            if not self.target.is_unit(self.apply(s)):
                raise ValidationError(f"{s} is inverted in the source but its image is not a unit")

    def apply(self, expr):
        if self.target.is_zero:
            return sympy.Integer(0)
        sub = {_sym(v): self.images[v] for v in self.source.variables}
        return _cancel(sympy.sympify(expr).xreplace(sub))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingMor):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        if self.target.is_zero:
            return True
        return all(_cancel(self.images[v] - other.images[v]) == 0 for v in self.source.variables)

    def __hash__(self):
        return hash((self.source, self.target))

    @property
    def kind(self) -> str:
        if self.target.is_zero:
            return "identity" if self.source.is_zero else "further-localization"
        plain = (self.source.variables == self.target.variables
                 and all(self.images[v] == _sym(v) for v in self.source.variables))
        if plain:
            return "identity" if self.source == self.target else "further-localization"
        return "substitution"

    @property
    def is_iso(self) -> bool:
        return is_iso(self)

    def then(self, other: "RingMor") -> "RingMor":
        """``other`` after ``self``."""
        return compose(self, other)

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(), "kind": self.kind,
                "images": {v: str(self.images[v]) for v in sorted(self.images)}}

    def __repr__(self) -> str:
        imgs = ", ".join(f"{v}->{self.images[v]}" for v in sorted(self.images))
        return f"RingMor({self.source} -> {self.target}; {imgs})"


@lru_cache(maxsize=None)
def identity(R: LocRing) -> RingMor:
    return RingMor(R, R, {v: _sym(v) for v in R.variables})


def to_zero(R: LocRing) -> RingMor:
    return RingMor(R, LocRing.zero(), {})


def substitution(source: LocRing, target: LocRing, images: Mapping) -> RingMor:
    imgs = {}
    for v, e in images.items():
        imgs[v] = parse_expr(e, target.variables) if isinstance(e, str) else sympy.sympify(e)
    return RingMor(source, target, imgs)


def inclusion(source: LocRing, target: LocRing) -> RingMor:
    """The map sending each variable to itself; target must invert at least as much."""
    if target.is_zero:
        return to_zero(source)
    if source.variables != target.variables:
        raise ValidationError("inclusion needs matching variables")
    return RingMor(source, target, {v: _sym(v) for v in source.variables})


def compose(f: RingMor, g: RingMor) -> RingMor:
    """g after f."""
    if f.target != g.source:
        raise ValidationError(f"cannot compose: {f.target} != {g.source}")
    if g.target.is_zero:
        return to_zero(f.source)
    return RingMor(f.source, g.target, {v: g.apply(f.images[v]) for v in f.source.variables})


def localize(R: LocRing, f) -> tuple[LocRing, RingMor]:
    """Invert ``f``.  Localizing at 0 gives the zero ring; at a unit, the identity."""
    if R.is_zero:
        return R, identity(R)
    if isinstance(f, str):
        f = parse_expr(f, R.variables)
    z, facs = canon_factors(f, R.variables)
    if z:
        Z = LocRing.zero()
        return Z, to_zero(R)
    S = LocRing(R.variables, R.inverted | facs)
    if S == R:
        return R, identity(R)
    return S, inclusion(R, S)


def is_localization(m: RingMor) -> bool:
    return m.kind in ("identity", "further-localization")


def tensor_over(A: LocRing, b: RingMor, c: RingMor) -> LocRing:
    """Pushout of two localizations of ``A``: invert both sets at once."""
    for m in (b, c):
        if m.source != A:
            raise ValidationError("both maps must start at the base ring")
        if not is_localization(m):
            raise ValidationError("tensor products are computed for localizations only")
    if b.target.is_zero or c.target.is_zero:
        return LocRing.zero()
    return LocRing(A.variables, b.target.inverted | c.target.inverted)


def tensor_of_embeddings(A: LocRing, b: RingMor, c: RingMor) -> LocRing:
    """B (x)_A C for open embeddings, up to isomorphism, via :func:`pullback_ring`."""
    return pullback_ring(A, b, c)[0]


# -- recognising isomorphisms and open embeddings ---------------------------

def _laurent_monomial(expr, gens):
    """Return (coefficient, exponent vector) if expr = c * prod g^k, else None."""
    expr = sympy.cancel(expr)
    num, den = sympy.fraction(expr)
    out = []
    c = sympy.Integer(1)
    for part, sign in ((num, 1), (den, -1)):
        if gens:
            p = sympy.Poly(part, *gens, domain="QQ")
            if len(p.terms()) != 1:
                return None
            (mono, coef), = p.terms()
        else:
            if part.free_symbols:
                return None
            mono, coef = (), part
        out.append([sign * k for k in mono])
        c = c * coef if sign == 1 else c / coef
    return c, [a + b for a, b in zip(*out)] if gens else []


def _affine(expr, gens):
    """Return (linear row, constant) if expr is a polynomial of degree <= 1."""
    expr = sympy.cancel(expr)
    _, den = sympy.fraction(expr)
    if den.free_symbols:
        return None
    p = sympy.Poly(expr, *gens, domain="QQ") if gens else None
    if p is None or p.total_degree() > 1:
        return None
    row = [Fraction(str(p.coeff_monomial(g))) for g in gens]
    const = Fraction(str(p.coeff_monomial(1)))
    return row, const


def _candidate_inverse(m: RingMor):
    """Images of the target variables in terms of source variables, or None."""
    A, B = m.source, m.target
    if len(A.variables) != len(B.variables):
        return None
    ga, gb = A.gens, B.gens
    n = len(ga)
    if n == 0:
        return {}
    mons = [_laurent_monomial(m.images[v], gb) for v in A.variables]
    if all(x is not None for x in mons):
        M = Mat.from_rows([x[1] for x in mons], n)
        if is_invertible(M):
            Minv = inverse(M)
            if all(x.denominator == 1 for r in Minv.rows for x in r):
                # x_i = c_i y^{M_i}  =>  y_j = prod (x_i / c_i)^{Minv[j][i]}
                out = {}
                for j, w in enumerate(B.variables):
                    e = sympy.Integer(1)
                    for i in range(n):
                        k = int(Minv[j, i])
                        e *= (ga[i] / mons[i][0]) ** k
                    out[w] = sympy.cancel(e)
                return out
    affs = [_affine(m.images[v], gb) for v in A.variables]
    if all(x is not None for x in affs):
        L = Mat.from_rows([x[0] for x in affs], n)
        if is_invertible(L):
            Linv = inverse(L)
            out = {}
            for j, w in enumerate(B.variables):
                e = sympy.Integer(0)
                for i in range(n):
                    c = Linv[j, i]
                    e += sympy.Rational(c.numerator, c.denominator) * (ga[i] - sympy.Rational(
                        affs[i][1].numerator, affs[i][1].denominator))
                out[w] = sympy.expand(e)
            return out
    return None


def embedding_factors(m: RingMor):
    """Split ``m`` as localization A -> A_T followed by an isomorphism A_T -> B.

    Returns ``(A_T, iso, inverse)`` or None when no such split is found.
    """
    return _split(m.source, m.target, tuple(sorted(m.images.items())), m)


@lru_cache(maxsize=4096)
def _split(A: LocRing, B: LocRing, key: tuple, m: RingMor):
    # m hashes by its endpoints only; key carries the images
    if B.is_zero:
        Z = LocRing.zero()
        return Z, identity(Z), identity(Z)
    inv = _candidate_inverse(m)
    if inv is None:
        return None
    needed = set(A.inverted)
    for w, e in inv.items():
        _, den = sympy.fraction(sympy.cancel(e))
        needed |= canon_factors(den, A.variables)[1]
    sub = {_sym(w): inv[w] for w in B.variables}
    for t in B.inverted:
        num, den = sympy.fraction(sympy.cancel(t.xreplace(sub)))
        z, fs = canon_factors(num, A.variables)
        if z:
            return None
        needed |= fs
        needed |= canon_factors(den, A.variables)[1]
    AT = LocRing(A.variables, frozenset(needed))
    try:
        there = RingMor(AT, B, m.images)
        back = RingMor(B, AT, inv)
    except ValidationError:
        return None
    if compose(there, back) != identity(AT) or compose(back, there) != identity(B):
        return None
    return AT, there, back


def open_embedding_split(m: RingMor):
    """The localization A_T through which ``m`` factors as an isomorphism, or None."""
    f = embedding_factors(m)
    return None if f is None else f[0]


def pullback_ring(A: LocRing, b: RingMor, c: RingMor) -> tuple[LocRing, RingMor, RingMor]:
    """Ring of the intersection of two open embeddings into Spec A.

    Returns ``(P, B -> P, C -> P)`` with ``P`` a localization of ``A``.
    """
    fb, fc = embedding_factors(b), embedding_factors(c)
    if fb is None or fc is None:
        raise ValidationError("pullbacks are computed for open embeddings only")
    if b.target.is_zero or c.target.is_zero:
        Z = LocRing.zero()
        return Z, to_zero(b.target), to_zero(c.target)
    P = LocRing(A.variables, fb[0].inverted | fc[0].inverted)
    to_b = compose(fb[2], inclusion(fb[0], P))
    to_c = compose(fc[2], inclusion(fc[0], P))
    return P, to_b, to_c


def is_iso(m: RingMor) -> bool:
    if m.source.is_zero or m.target.is_zero:
        return m.source.is_zero and m.target.is_zero
    AT = open_embedding_split(m)
    return AT is not None and AT == m.source


def is_open_embedding(m: RingMor) -> bool:
    if is_localization(m):
        return True
    return open_embedding_split(m) is not None


# -- graded pieces on the standard projective line --------------------------

@dataclass(frozen=True)
class GradedPiece:
    """Monomials x^k, k in ``exponents``, spanning a degree-d piece on a patch."""

    degree: int
    exponents: tuple
    window: tuple

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def basis(self, var: str = "x") -> list[str]:
        return [{0: "1", 1: var}.get(k, f"{var}^{k}") for k in self.exponents]


def default_window(d: int) -> tuple[int, int]:
    return (min(0, d), max(0, d))


def graded_sections(R: LocRing, d: int, window: tuple[int, int] | None = None,
                    infinity: bool = False) -> GradedPiece:
    """Degree ``d`` sections of O(d) on a patch of the projective line.

    Sections are written in the global coordinate x through the trivialisation
    x^k <-> X0^(d-k) X1^k.  The patch Q[x] allows k >= 0.  The patch at
    infinity (pass ``infinity=True``; its own coordinate is 1/x) allows k <= d.
    Q[x, 1/x] allows every k.  Only exponents inside ``window`` are listed.
    """
    if R.is_zero:
        return GradedPiece(d, (), window or default_window(d))
    if len(R.variables) != 1:
        raise ValidationError("graded sections are defined for one-variable patches")
    x = R.gens[0]
    if not R.inverted <= {x}:
        raise ValidationError("only the variable itself may be inverted")
    lo, hi = window if window is not None else default_window(d)
    if lo > hi:
        raise ValidationError("empty window")
    if R.inverted:
        ks = range(lo, hi + 1)
    elif infinity:
        ks = range(lo, min(hi, d) + 1)
    else:
        ks = range(max(lo, 0), hi + 1)
    return GradedPiece(d, tuple(ks), (lo, hi))
