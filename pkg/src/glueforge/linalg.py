"""Exact linear algebra over the rationals.

Matrices are tuples of row tuples of :class:`fractions.Fraction`.  A matrix
with zero rows still remembers its column count through :class:`Mat`, which
is why the helpers here take and return ``Mat`` rather than bare lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


def frac(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def frac_str(x: Fraction) -> str:
    return str(x)


def frac_json(x: Fraction):
    """Integers stay integers in JSON; other rationals become "p/q" strings."""
    return x.numerator if x.denominator == 1 else str(x)


@dataclass(frozen=True)
class Mat:
    nrows: int
    ncols: int
    rows: tuple

    @staticmethod
    def from_rows(rows: Sequence[Sequence], ncols: int | None = None) -> "Mat":
        rows = tuple(tuple(frac(v) for v in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("column count needed for a matrix with no rows")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
        return Mat(len(rows), ncols, rows)

    @staticmethod
    def zeros(m: int, n: int) -> "Mat":
        return Mat(m, n, tuple((Fraction(0),) * n for _ in range(m)))

    @staticmethod
    def identity(n: int) -> "Mat":
        return Mat(n, n, tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @staticmethod
    def scalar(n: int, c) -> "Mat":
        c = frac(c)
        return Mat(n, n, tuple(tuple(c if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
        out = []
        for r in self.rows:
            out.append(tuple(sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols))
        return Mat(self.nrows, other.ncols, tuple(out))

    def __add__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise ValueError("shape mismatch in sum")
        return Mat(self.nrows, self.ncols,
                   tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "Mat":
        return Mat(self.nrows, self.ncols, tuple(tuple(-a for a in r) for r in self.rows))

    def __sub__(self, other: "Mat") -> "Mat":
        return self + (-other)

    def scale(self, c) -> "Mat":
        c = frac(c)
        return Mat(self.nrows, self.ncols, tuple(tuple(c * a for a in r) for r in self.rows))

    def T(self) -> "Mat":
        if self.nrows == 0:
            return Mat.zeros(self.ncols, 0)
        return Mat(self.ncols, self.nrows, tuple(zip(*self.rows)))

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def to_json(self) -> list:
        return [[frac_json(a) for a in r] for r in self.rows]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)


def from_columns(cols: Sequence[Sequence], nrows: int) -> Mat:
    if not cols:
        return Mat.zeros(nrows, 0)
    return Mat.from_rows(list(zip(*cols)), len(cols)) if nrows else Mat.zeros(0, len(cols))


def block_diag(blocks: Iterable[Mat]) -> Mat:
    blocks = list(blocks)
    m = sum(b.nrows for b in blocks)
    n = sum(b.ncols for b in blocks)
    rows = []
    c0 = 0
    for b in blocks:
        for r in b.rows:
            rows.append((Fraction(0),) * c0 + r + (Fraction(0),) * (n - c0 - b.ncols))
        c0 += b.ncols
    return Mat(m, n, tuple(rows))


def hstack(mats: Sequence[Mat], nrows: int) -> Mat:
    rows = [()] * nrows
    for M in mats:
        if M.nrows != nrows:
            raise ValueError("row count mismatch in hstack")
        rows = [a + b for a, b in zip(rows, M.rows)]
    return Mat(nrows, sum(M.ncols for M in mats), tuple(rows))


def vstack(mats: Sequence[Mat], ncols: int) -> Mat:
    rows = []
    for M in mats:
        if M.ncols != ncols:
            raise ValueError("column count mismatch in vstack")
        rows.extend(M.rows)
    return Mat(len(rows), ncols, tuple(rows))


def rref(A: Mat) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns.

    Elimination is done fraction-free on integer rows (Bareiss style), then
    normalised once at the end, which keeps intermediate sizes small.
    """
    # clear denominators row by row
    rows = []
    for r in A.rows:
        den = 1
        for a in r:
            den = den * a.denominator // _gcd(den, a.denominator)
        rows.append([int(a * den) for a in r])
    m, n = A.nrows, A.ncols
    pivots = []
    prev = 1
    r = 0
    for c in range(n):
        if r >= m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        for i in range(r + 1, m):
            f = rows[i][c]
            rows[i] = [(pv * x - f * y) // prev for x, y in zip(rows[i], rows[r])]
        prev = pv
        pivots.append(c)
        r += 1
    out = [[Fraction(x) for x in row] for row in rows[:r]]
    # back substitution to reduced form
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        pv = out[k][c]
        out[k] = [x / pv for x in out[k]]
        for i in range(k):
            f = out[i][c]
            if f:
                out[i] = [x - f * y for x, y in zip(out[i], out[k])]
    return out, pivots


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def rank(A: Mat) -> int:
    return len(rref(A)[1])


def kernel(A: Mat) -> Mat:
    """Basis of the right null space, as the columns of the returned matrix."""
    R, piv = rref(A)
    n = A.ncols
    free = [j for j in range(n) if j not in set(piv)]
    cols = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for k, c in enumerate(piv):
            v[c] = -R[k][f]
        cols.append(v)
    return from_columns(cols, n)


def column_space(A: Mat) -> Mat:
    """Basis of the column space, taken from the pivot columns of ``A``."""
    _, piv = rref(A)
    return from_columns([A.column(j) for j in piv], A.nrows)


def solve(A: Mat, b: Sequence) -> list[Fraction] | None:
    """One solution of A x = b, or None when the system is inconsistent."""
    b = [frac(x) for x in b]
    aug = Mat(A.nrows, A.ncols + 1, tuple(r + (bi,) for r, bi in zip(A.rows, b)))
    R, piv = rref(aug)
    if A.ncols in piv:
        return None
    x = [Fraction(0)] * A.ncols
    for k, c in enumerate(piv):
        x[c] = R[k][-1]
    return x


def is_invertible(A: Mat) -> bool:
    return A.nrows == A.ncols and rank(A) == A.nrows


def inverse(A: Mat) -> Mat:
    if A.nrows != A.ncols:
        raise ValueError("only square matrices are invertible")
    n = A.nrows
    aug = hstack([A, Mat.identity(n)], n)
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return Mat(n, n, tuple(tuple(r[n:]) for r in R))


def in_span(B: Mat, v: Sequence) -> bool:
    """Whether ``v`` lies in the column span of ``B``."""
    if B.ncols == 0:
        return all(frac(x) == 0 for x in v)
    return solve(B, v) is not None


def same_column_space(A: Mat, B: Mat) -> bool:
    if A.nrows != B.nrows:
        return False
    ra, rb = rank(A), rank(B)
    return ra == rb == rank(hstack([A, B], A.nrows))
