"""Orthogonality-preserving measurement constraints for one acting party.

A POVM element ``E`` on the acting party keeps the post-measurement states
orthogonal iff ``<v_x| 1 x E x 1 |v_y> = 0`` for every pair ``x != y``.
``E`` is Hermitian, so it is parametrized by ``d**2`` real unknowns:

* columns ``0..d-1``: diagonal entries ``E_kk``;
* then, for each ``k < l`` in lexicographic order, two columns holding
  ``Re E_kl`` and ``Im E_kl``.

Each unordered pair of states contributes one complex equation, split into a
real row and an imaginary row. The ``(y, x)`` equation is the conjugate of the
``(x, y)`` one and adds nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .exactmath import (
    ONE,
    ZERO,
    GaussianRational,
    RationalMatrix,
    SparseRow,
    format_rational,
    nullspace_from_rref,
    rref_sparse,
    solve_in_span,
)
from .states import StateSet, state_name


class ConstraintError(ValueError):
    pass


# --- Hermitian parametrization ----------------------------------------------


@dataclass(frozen=True)
class HermitianLayout:
    """Column layout of the real parametrization of a d x d Hermitian matrix."""

    d: int

    @cached_property
    def offdiag(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(combinations(range(self.d), 2))

    @cached_property
    def _offdiag_index(self) -> Dict[Tuple[int, int], int]:
        return {kl: t for t, kl in enumerate(self.offdiag)}

    @property
    def size(self) -> int:
        return self.d * self.d

    def diag_col(self, k: int) -> int:
        return k

    def re_col(self, k: int, l: int) -> int:
        return self.d + 2 * self._offdiag_index[(min(k, l), max(k, l))]

    def im_col(self, k: int, l: int) -> int:
        return self.re_col(k, l) + 1

    def describe_col(self, c: int) -> Tuple[str, Tuple[int, int]]:
        """``("diag", (k, k))``, ``("re", (k, l))`` or ``("im", (k, l))``."""
        if c < self.d:
            return "diag", (c, c)
        t, part = divmod(c - self.d, 2)
        return ("re", "im")[part], self.offdiag[t]

    def identity(self) -> List[Fraction]:
        return [ONE if c < self.d else ZERO for c in range(self.size)]

    def decode(self, v: Sequence[Fraction]) -> List[List[GaussianRational]]:
        d = self.d
        m = [[GaussianRational(0) for _ in range(d)] for _ in range(d)]
        for k in range(d):
            m[k][k] = GaussianRational(v[k])
        for (k, l) in self.offdiag:
            re, im = v[self.re_col(k, l)], v[self.im_col(k, l)]
            m[k][l] = GaussianRational(re, im)
            m[l][k] = GaussianRational(re, -im)
        return m

    def encode(self, m: Sequence[Sequence[object]]) -> List[Fraction]:
        d = self.d
        m = [[GaussianRational.coerce(x) for x in row] for row in m]
        for k in range(d):
            if m[k][k].im:
                raise ValueError("diagonal of a Hermitian matrix must be real")
            for l in range(k + 1, d):
                if m[k][l] != m[l][k].conj():
                    raise ValueError("matrix is not Hermitian")
        v = [ZERO] * self.size
        for k in range(d):
            v[k] = m[k][k].re
        for (k, l) in self.offdiag:
            v[self.re_col(k, l)] = m[k][l].re
            v[self.im_col(k, l)] = m[k][l].im
        return v

    def entry_name(self, k: int, l: int, base: int = 0) -> str:
        a, b = k + base, l + base
        if self.d + base <= 10:
            return f"a_{a}{b}"
        return f"a_{a},{b}"


# --- constraint system ------------------------------------------------------


def _acting_view(state, party: int) -> Dict[int, List[Tuple[int, GaussianRational]]]:
    """Map spectator index -> [(acting label, amplitude)] for one ket."""
    prof = state.profile
    d = prof.dims[party]
    inner = 1
    for dd in prof.dims[party + 1:]:
        inner *= dd
    out: Dict[int, List[Tuple[int, GaussianRational]]] = {}
    for i, a in state.support:
        hi, rest = divmod(i, d * inner)
        k, lo = divmod(rest, inner)
        out.setdefault(hi * inner + lo, []).append((k, a))
    return out


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Real linear system whose nullspace is every orthogonality-preserving E.

    ``rows[r]`` is a sparse row; ``provenance[r]`` is ``((x, y), "re"|"im")``.
    """

    states: StateSet
    party: int
    rows: Tuple[SparseRow, ...]
    provenance: Tuple[Tuple[Tuple[int, int], str], ...]

    @property
    def layout(self) -> HermitianLayout:
        return HermitianLayout(self.states.profile.dims[self.party])

    @property
    def d(self) -> int:
        return self.states.profile.dims[self.party]

    @property
    def cols(self) -> int:
        return self.d * self.d

    @cached_property
    def matrix(self) -> RationalMatrix:
        return RationalMatrix.from_sparse(self.rows, self.cols)

    def pair_rows(self, x: int, y: int) -> Tuple[SparseRow, SparseRow]:
        if x > y:
            x, y = y, x
        r = self._pair_index[(x, y)]
        return self.rows[2 * r], self.rows[2 * r + 1]

    @cached_property
    def _pair_index(self) -> Dict[Tuple[int, int], int]:
        return {self.provenance[2 * t][0]: t for t in range(len(self.rows) // 2)}

    @cached_property
    def _rref(self):
        return rref_sparse(self.rows)

    @property
    def rank(self) -> int:
        return len(self._rref[1])

    def residual(self, v: Sequence[Fraction]) -> List[Fraction]:
        return [sum((c * v[j] for j, c in r.items()), ZERO) for r in self.rows]

    def is_feasible(self, v: Sequence[Fraction]) -> bool:
        """True iff the parametrized matrix ``v`` satisfies every row exactly."""
        return all(not sum((c * v[j] for j, c in r.items()), ZERO) for r in self.rows)

    def pair_equation(self, x: int, y: int) -> Dict[Tuple[int, int], GaussianRational]:
        """Complex coefficients ``C_kl`` of ``sum_kl C_kl E_kl`` for the pair."""
        return _pair_coefficients(
            _acting_view(self.states[x], self.party), _acting_view(self.states[y], self.party)
        )


def _pair_coefficients(vx, vy) -> Dict[Tuple[int, int], GaussianRational]:
    coeff: Dict[Tuple[int, int], GaussianRational] = {}
    small, other = (vx, vy) if len(vx) <= len(vy) else (vy, vx)
    for s in small:
        if s not in other:
            continue
        for k, a in vx[s]:
            ac = a.conj()
            for l, b in vy[s]:
                coeff[(k, l)] = coeff.get((k, l), GaussianRational(0)) + ac * b
    return {kl: c for kl, c in coeff.items() if c}


def _equation_rows(coeff, layout: HermitianLayout) -> Tuple[SparseRow, SparseRow]:
    re_row: Dict[int, Fraction] = {}
    im_row: Dict[int, Fraction] = {}

    def add(row, col, val):
        if val:
            nv = row.get(col, ZERO) + val
            if nv:
                row[col] = nv
            else:
                row.pop(col, None)

    for (k, l), c in coeff.items():
        if k == l:
            add(re_row, k, c.re)
            add(im_row, k, c.im)
        else:
            # E_kl = r + i m for k < l, E_lk = r - i m.
            sign = 1 if k < l else -1
            rc, mc = layout.re_col(k, l), layout.im_col(k, l)
            add(re_row, rc, c.re)
            add(im_row, rc, c.im)
            # c * (i * sign * m) = sign * (-c.im + i c.re) * m
            add(re_row, mc, -sign * c.im)
            add(im_row, mc, sign * c.re)
    return re_row, im_row


def constraint_system(states: StateSet, party: int) -> ConstraintSystem:
    """Build the two real rows per unordered pair for ``party`` acting.

    Raises
    ------
    ConstraintError
        If ``party`` is out of range or the set has fewer than two states.
    """
    n = states.profile.n
    if not 0 <= party < n:
        raise ConstraintError(f"party {party} out of range for {n} parties")
    if len(states) < 2:
        raise ConstraintError("fewer than two states: no orthogonality constraints")
    layout = HermitianLayout(states.profile.dims[party])
    views = [_acting_view(k, party) for k in states.states]
    rows: List[SparseRow] = []
    prov = []
    for x, y in combinations(range(len(states)), 2):
        re_row, im_row = _equation_rows(_pair_coefficients(views[x], views[y]), layout)
        rows.extend((re_row, im_row))
        prov.extend((((x, y), "re"), ((x, y), "im")))
    return ConstraintSystem(states, party, tuple(rows), tuple(prov))


# --- solution space ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolutionSpace:
    layout: HermitianLayout
    basis: Tuple[Tuple[Fraction, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def matrices(self) -> List[List[List[GaussianRational]]]:
        return [self.layout.decode(v) for v in self.basis]

    def contains(self, v: Sequence[Fraction]) -> bool:
        return solve_in_span(self.basis, list(v)) is not None

    def contains_identity(self) -> bool:
        return self.contains(self.layout.identity())


def solution_space(cs: ConstraintSystem) -> SolutionSpace:
    rows, pivots = cs._rref
    basis = nullspace_from_rref(rows, pivots, cs.cols)
    return SolutionSpace(cs.layout, tuple(tuple(v) for v in basis))


def is_trivial(states: StateSet, party: int) -> bool:
    """Every orthogonality-preserving POVM element on ``party`` is a multiple of 1."""
    return solution_space(constraint_system(states, party)).dimension == 1


# --- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One forcing deduction.

    ``fact`` is ``"zero"`` (``entry`` is an off-diagonal ``(k, l)``, ``k < l``,
    and ``part`` says which real parts were forced) or ``"equal"`` (``entry``
    is ``(k, l)`` meaning ``E_kk = E_ll``).
    """

    entry: Tuple[int, int]
    pair: Tuple[int, int]
    fact: str
    part: str = "both"

    def to_dict(self, states: StateSet, layout: HermitianLayout, base: int = 0) -> dict:
        k, l = self.entry
        labels = [state_name(states[i], i) for i in self.pair]
        if self.fact == "zero":
            out = {"entry": layout.entry_name(k, l, base), "pair": labels, "fact": "zero"}
            if self.part != "both":
                out["part"] = self.part
        else:
            out = {
                "entry": layout.entry_name(k, k, base),
                "pair": labels,
                "fact": f"equals {layout.entry_name(l, l, base)}",
            }
        out["pair_index"] = list(self.pair)
        return out


@dataclass(frozen=True)
class TrivialityCertificate:
    steps: Tuple[Step, ...]
    residual: Tuple[str, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.residual

    def zero_entries(self) -> set:
        """Off-diagonal ``(k, l)`` whose real and imaginary parts were both forced."""
        parts: Dict[Tuple[int, int], set] = {}
        for s in self.steps:
            if s.fact == "zero":
                parts.setdefault(s.entry, set()).update(
                    ("re", "im") if s.part == "both" else (s.part,)
                )
        return {e for e, p in parts.items() if p == {"re", "im"}}

    def equalities(self) -> List[Tuple[int, int]]:
        return [s.entry for s in self.steps if s.fact == "equal"]


@dataclass(frozen=True)
class NontrivialWitness:
    """Traceless Hermitian solution, first nonzero parameter scaled to 1."""

    layout: HermitianLayout
    vector: Tuple[Fraction, ...]

    def matrix(self) -> List[List[GaussianRational]]:
        return self.layout.decode(self.vector)

    def to_dict(self) -> dict:
        return {"witness": [[list(x.to_strings()) for x in row] for row in self.matrix()]}


class _Facts:
    """Known zero columns plus union-find over diagonal columns."""

    def __init__(self, layout: HermitianLayout):
        self.layout = layout
        self.zero: set = set()
        self.parent = list(range(layout.d))

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        lo, hi = min(ra, rb), max(ra, rb)
        self.parent[hi] = lo
        return True

    def reduce(self, row: SparseRow) -> SparseRow:
        d = self.layout.d
        out: Dict[int, Fraction] = {}
        for c, v in row.items():
            if c in self.zero:
                continue
            if c < d:
                c = self.find(c)
            nv = out.get(c, ZERO) + v
            if nv:
                out[c] = nv
            else:
                out.pop(c, None)
        return out

    def done(self) -> bool:
        d = self.layout.d
        if len(self.zero) != d * d - d:
            return False
        root = self.find(0)
        return all(self.find(k) == root for k in range(d))

    def unknown(self) -> List[str]:
        lay = self.layout
        out = []
        for (k, l) in lay.offdiag:
            for part, col in (("re", lay.re_col(k, l)), ("im", lay.im_col(k, l))):
                if col not in self.zero:
                    out.append(f"{part} {lay.entry_name(k, l)} = 0")
        root = self.find(0)
        for k in range(1, lay.d):
            if self.find(k) != root:
                out.append(f"{lay.entry_name(k, k)} = {lay.entry_name(0, 0)}")
        return out


def _single_facts(rows: List[SparseRow], d: int):
    """Facts read off the RREF of one pair's reduced rows."""
    red, _ = rref_sparse(rows)
    found = []
    for r in red:
        items = list(r.items())
        if len(items) == 1 and items[0][0] >= d:
            found.append(("zero", items[0][0]))
        elif len(items) == 2 and all(c < d for c, _ in items) and items[0][1] == -items[1][1]:
            found.append(("equal", (items[0][0], items[1][0])))
    return found


def _record(steps: List[Step], layout: HermitianLayout, pair, new_zero_cols, new_eqs):
    by_entry: Dict[Tuple[int, int], List[str]] = {}
    for c in new_zero_cols:
        part, kl = layout.describe_col(c)
        by_entry.setdefault(kl, []).append(part)
    for kl, parts in by_entry.items():
        steps.append(Step(kl, pair, "zero", "both" if len(parts) == 2 else parts[0]))
    for a, b in new_eqs:
        steps.append(Step((a, b), pair, "equal"))


def propagate(cs: ConstraintSystem) -> Tuple[List[Step], _Facts]:
    """Pair-by-pair forcing until a full scan adds nothing.

    Pairs are visited in lexicographic order. A pair contributes when, after
    substituting earlier facts, its rows pin a single off-diagonal part to
    zero or equate two diagonal entries.
    """
    layout = cs.layout
    d = layout.d
    facts = _Facts(layout)
    steps: List[Step] = []
    n_pairs = len(cs.rows) // 2
    live = [t for t in range(n_pairs) if cs.rows[2 * t] or cs.rows[2 * t + 1]]
    changed = True
    while changed and not facts.done():
        changed = False
        still_live = []
        for t in live:
            pair = cs.provenance[2 * t][0]
            new_zero, new_eq = [], []
            while True:
                rows = [facts.reduce(cs.rows[2 * t]), facts.reduce(cs.rows[2 * t + 1])]
                rows = [r for r in rows if r]
                if not rows:
                    break
                progress = False
                for kind, what in _single_facts(rows, d):
                    if kind == "zero" and what not in facts.zero:
                        facts.zero.add(what)
                        new_zero.append(what)
                        progress = True
                    elif kind == "equal":
                        a, b = what
                        if facts.union(a, b):
                            new_eq.append((min(a, b), max(a, b)))
                            progress = True
                if not progress:
                    break
            if new_zero or new_eq:
                changed = True
                _record(steps, layout, pair, new_zero, new_eq)
            if rows:
                still_live.append(t)
        live = still_live
    return steps, facts


def certificate(cs: ConstraintSystem):
    """Forcing derivation if ``cs`` admits only multiples of 1, else a witness.

    Returns a :class:`TrivialityCertificate` or a :class:`NontrivialWitness`.
    A stalled propagation on a trivial system records the unreached facts as
    forced jointly by the rank of the whole system.
    """
    space = solution_space(cs)
    if space.dimension == 1:
        steps, facts = propagate(cs)
        residual = ()
        if not facts.done():
            residual = tuple(f"{u} (forced jointly, rank argument)" for u in facts.unknown())
        return TrivialityCertificate(tuple(steps), residual)
    return witness(space)


def witness(space: SolutionSpace) -> NontrivialWitness:
    lay = space.layout
    ident = lay.identity()
    d = lay.d
    for v in space.basis:
        tr = sum(v[:d], ZERO)
        w = [x - (tr / d) * i for x, i in zip(v, ident)]
        if any(w):
            lead = next(x for x in w if x)
            return NontrivialWitness(lay, tuple(x / lead for x in w))
    raise ConstraintError("solution space is trivial; no witness exists")


class ReplayError(ValueError):
    def __init__(self, index: int, step: Step, reason: str):
        self.index = index
        self.step = step
        super().__init__(f"step {index} {step}: {reason}")


def replay(cs: ConstraintSystem, steps: Sequence[Step], strict: bool = True) -> bool:
    """Check each step follows from its pair's rows plus the earlier steps.

    Returns True iff the replayed facts force every off-diagonal part to zero
    and all diagonal entries equal. With ``strict``, an underivable step
    raises :class:`ReplayError`; otherwise it is skipped.
    """
    from .exactmath import in_row_space

    layout = cs.layout
    d = layout.d
    facts = _Facts(layout)
    for i, s in enumerate(steps):
        x, y = s.pair
        rows = [facts.reduce(r) for r in cs.pair_rows(x, y)]
        red, piv = rref_sparse(rows)
        if s.fact == "zero":
            k, l = s.entry
            parts = ("re", "im") if s.part == "both" else (s.part,)
            cols = [layout.re_col(k, l) if p == "re" else layout.im_col(k, l) for p in parts]
            targets = [{c: ONE} for c in cols if c not in facts.zero]
            ok = all(in_row_space(red, piv, t) for t in targets)
            if ok:
                facts.zero.update(cols)
        elif s.fact == "equal":
            a, b = facts.find(s.entry[0]), facts.find(s.entry[1])
            ok = a == b or in_row_space(red, piv, {a: ONE, b: -ONE})
            if ok:
                facts.union(a, b)
        else:
            raise ValueError(f"unknown fact {s.fact!r}")
        if not ok and strict:
            raise ReplayError(i, s, "not implied by the pair and earlier facts")
    return facts.done()


def certificate_to_dict(cs: ConstraintSystem, cert, base: int = 0) -> dict:
    if isinstance(cert, NontrivialWitness):
        return {"trivial": False, **cert.to_dict()}
    return {
        "trivial": True,
        "steps": [s.to_dict(cs.states, cs.layout, base) for s in cert.steps],
        "residual": list(cert.residual),
    }


def format_matrix(m: Sequence[Sequence[GaussianRational]]) -> str:
    cells = [[str(x) for x in row] for row in m]
    w = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(w) for c in row) for row in cells)
