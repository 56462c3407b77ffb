"""Exact arithmetic over the rationals and the Gaussian rationals.

Rationals are :class:`fractions.Fraction` (always kept in lowest terms by the
standard library). Complex amplitudes use :class:`GaussianRational`, a pair of
fractions. Row reduction and nullspaces are computed exactly; nothing in this
module touches floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

Rational = Fraction
RationalLike = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^-?[0-9]+(/[1-9][0-9]*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"-3/2"`` or ``"7"`` into a Fraction.

    Raises
    ------
    ValueError
        If ``text`` is not of the form ``-?[0-9]+(/[1-9][0-9]*)?``.
    """
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """Complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating-point complex numbers are not exact")
        return cls(x)

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, an exact nonnegative rational."""
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if not o.im and not self.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        n = o.abs2()
        if not n:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conj()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return f"GaussianRational({format_rational(self.re)!r})"
        return (
            f"GaussianRational({format_rational(self.re)!r}, "
            f"{format_rational(self.im)!r})"
        )

    def __str__(self):
        if not self.im:
            return format_rational(self.re)
        if not self.re:
            return f"{format_rational(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{format_rational(self.re)}{sign}{format_rational(abs(self.im))}i"

    def to_strings(self) -> Tuple[str, str]:
        return format_rational(self.re), format_rational(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))


def _coerce_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return None


GZERO = GaussianRational(0)
GONE = GaussianRational(1)


@dataclass(frozen=True)
class RationalMatrix:
    """Dense row-major matrix of Fractions."""

    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]], cols: int = None):
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        entries = []
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
            entries.extend(_as_fraction(x) for x in r)
        return cls(len(rows), cols, tuple(entries))

    @classmethod
    def from_sparse(cls, rows: Sequence[Dict[int, Fraction]], cols: int):
        entries = [ZERO] * (len(rows) * cols)
        for i, r in enumerate(rows):
            base = i * cols
            for c, v in r.items():
                if not 0 <= c < cols:
                    raise ValueError(f"column {c} out of range")
                entries[base + c] = Fraction(v)
        return cls(len(rows), cols, tuple(entries))

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls(rows, cols, (ZERO,) * (rows * cols))

    @classmethod
    def identity(cls, n: int):
        return cls.from_rows([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def sparse_rows(self) -> List[Dict[int, Fraction]]:
        out = []
        for i in range(self.rows):
            out.append({j: v for j, v in enumerate(self.row(i)) if v})
        return out

    def apply(self, v: Sequence[RationalLike]) -> List[Fraction]:
        """Matrix-vector product ``m @ v``."""
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        v = [_as_fraction(x) for x in v]
        return [sum((a * b for a, b in zip(self.row(i), v) if a), ZERO) for i in range(self.rows)]


SparseRow = Dict[int, Fraction]


def rref_sparse(rows: Iterable[SparseRow]) -> Tuple[List[SparseRow], List[int]]:
    """Reduced row echelon form of sparse rows.

    Rows are inserted one at a time into a Gauss-Jordan basis that is kept
    fully reduced, so each incoming row needs a single pass over its pivot
    columns. Returns the nonzero RREF rows sorted by pivot and the ascending
    pivot list.
    """
    basis: Dict[int, SparseRow] = {}
    for raw in rows:
        r = {c: Fraction(v) for c, v in raw.items() if v}
        if not r:
            continue
        for c in [c for c in r if c in basis]:
            f = r.get(c)
            if not f:
                continue
            for cc, vv in basis[c].items():
                nv = r.get(cc, ZERO) - f * vv
                if nv:
                    r[cc] = nv
                else:
                    r.pop(cc, None)
        if not r:
            continue
        p = min(r)
        inv = 1 / r[p]
        if inv != 1:
            r = {c: v * inv for c, v in r.items()}
        for other in basis.values():
            f = other.get(p)
            if not f:
                continue
            for cc, vv in r.items():
                nv = other.get(cc, ZERO) - f * vv
                if nv:
                    other[cc] = nv
                else:
                    other.pop(cc, None)
        basis[p] = r
    pivots = sorted(basis)
    return [basis[p] for p in pivots], pivots


def rref(m: RationalMatrix) -> Tuple[RationalMatrix, List[int]]:
    """Exact reduced row echelon form and ascending pivot columns.

    The result has the same shape as ``m``; rows past the rank are zero.
    """
    rows, pivots = rref_sparse(m.sparse_rows())
    padded = rows + [{} for _ in range(m.rows - len(rows))]
    return RationalMatrix.from_sparse(padded, m.cols), pivots


def rank(m: RationalMatrix) -> int:
    return len(rref_sparse(m.sparse_rows())[1])


def nullspace_from_rref(rows: List[SparseRow], pivots: List[int], cols: int) -> List[List[Fraction]]:
    pivot_set = set(pivots)
    basis = []
    for f in range(cols):
        if f in pivot_set:
            continue
        v = [ZERO] * cols
        v[f] = ONE
        for p, r in zip(pivots, rows):
            coeff = r.get(f)
            if coeff:
                v[p] = -coeff
        basis.append(v)
    return basis


def nullspace_basis(m: RationalMatrix) -> List[List[Fraction]]:
    """Canonical free-variable basis of ``{v : m v = 0}``.

    One vector per non-pivot column ``f`` (in ascending order), with a 1 in
    position ``f`` and zeros in every other free position.
    """
    rows, pivots = rref_sparse(m.sparse_rows())
    return nullspace_from_rref(rows, pivots, m.cols)


def in_row_space(rows: List[SparseRow], pivots: List[int], v: SparseRow) -> bool:
    """True iff ``v`` is a linear combination of RREF ``rows``."""
    r = {c: Fraction(x) for c, x in v.items() if x}
    index = {p: i for i, p in enumerate(pivots)}
    for c in [c for c in r if c in index]:
        f = r.get(c)
        if not f:
            continue
        for cc, vv in rows[index[c]].items():
            nv = r.get(cc, ZERO) - f * vv
            if nv:
                r[cc] = nv
            else:
                r.pop(cc, None)
    return not r


def solve_in_span(vectors: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Coefficients ``c`` with ``sum(c_k * vectors[k]) == target``, or None."""
    n = len(target)
    k = len(vectors)
    # Columns are the spanning vectors; augmented with the target.
    rows = []
    for i in range(n):
        row = {j: Fraction(vectors[j][i]) for j in range(k) if vectors[j][i]}
        if target[i]:
            row[k] = Fraction(target[i])
        rows.append(row)
    red, pivots = rref_sparse(rows)
    if k in pivots:
        return None
    coeffs = [ZERO] * k
    for p, r in zip(pivots, red):
        coeffs[p] = r.get(k, ZERO)
    return coeffs
