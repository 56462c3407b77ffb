"""Multipartite kets and validated orthogonal state sets.

Amplitudes are exact Gaussian rationals and are never normalized. Global
indices use mixed radix with party 0 most significant, so the local labels
``(k_0, ..., k_{n-1})`` map to ``((k_0*d_1 + k_1)*d_2 + k_2)...``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import prod
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

from .exactmath import (
    GZERO,
    GaussianRational,
    format_rational,
    parse_rational,
    rref_sparse,
)

if TYPE_CHECKING:
    from .partitions import Grouping


class StateError(ValueError):
    """Structural problem with a ket or a state set."""


class FormatError(ValueError):
    """Malformed state-set JSON."""


@dataclass(frozen=True)
class DimensionProfile:
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise StateError("a profile needs at least one party")
        if any(d < 2 for d in dims):
            raise StateError(f"every party dimension must be >= 2, got {dims}")

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return prod(self.dims)

    def index(self, labels: Sequence[int]) -> int:
        if len(labels) != self.n:
            raise StateError(f"expected {self.n} local labels, got {len(labels)}")
        g = 0
        for k, d in zip(labels, self.dims):
            if not 0 <= k < d:
                raise StateError(f"local label {k} out of range for dimension {d}")
            g = g * d + k
        return g

    def labels(self, index: int) -> Tuple[int, ...]:
        out = []
        for d in reversed(self.dims):
            index, k = divmod(index, d)
            out.append(k)
        return tuple(reversed(out))

    def __str__(self):
        return "x".join(map(str, self.dims))


@dataclass(frozen=True, eq=False)
class Ket:
    """Unnormalized pure state on a tensor-product space."""

    profile: DimensionProfile
    amplitudes: Tuple[GaussianRational, ...]
    label: Optional[str] = None

    def __post_init__(self):
        amps = tuple(GaussianRational.coerce(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != self.profile.total:
            raise StateError(
                f"ket needs {self.profile.total} amplitudes, got {len(amps)}"
            )
        if not any(amps):
            raise StateError("the zero vector is not a state")

    @cached_property
    def support(self) -> Tuple[Tuple[int, GaussianRational], ...]:
        """Nonzero ``(index, amplitude)`` pairs in index order."""
        return tuple((i, a) for i, a in enumerate(self.amplitudes) if a)

    def norm2(self) -> Fraction:
        return sum((a.abs2() for _, a in self.support), Fraction(0))

    def is_real(self) -> bool:
        return all(not a.im for _, a in self.support)

    def with_label(self, label: Optional[str]) -> "Ket":
        return Ket(self.profile, self.amplitudes, label)

    def __eq__(self, other):
        if not isinstance(other, Ket):
            return NotImplemented
        return self.profile == other.profile and self.amplitudes == other.amplitudes

    def __hash__(self):
        return hash((self.profile, self.amplitudes))

    def __repr__(self):
        name = self.label or describe(self) or "ket"
        return f"Ket({name!r}, dims={self.profile.dims})"


def ket_from_dict(profile: DimensionProfile, amps: Dict[Sequence[int], object], label=None) -> Ket:
    """Build a ket from ``{local_labels: amplitude}``; missing entries are zero."""
    vec = [GZERO] * profile.total
    for labels, a in amps.items():
        vec[profile.index(labels)] = GaussianRational.coerce(a)
    return Ket(profile, tuple(vec), label)


def inner_product(a: Ket, b: Ket) -> GaussianRational:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.profile != b.profile:
        raise StateError(f"profile mismatch: {a.profile} vs {b.profile}")
    bs = b.amplitudes
    acc = GZERO
    for i, x in a.support:
        y = bs[i]
        if y:
            acc = acc + x.conj() * y
    return acc


def product_ket(profile: DimensionProfile, factors: Sequence[Sequence[object]], label=None) -> Ket:
    if len(factors) != profile.n:
        raise StateError(f"expected {profile.n} factors, got {len(factors)}")
    local = []
    for f, d in zip(factors, profile.dims):
        f = [GaussianRational.coerce(x) for x in f]
        if len(f) != d:
            raise StateError(f"factor of length {len(f)} for a party of dimension {d}")
        if not any(f):
            raise StateError("zero factor")
        local.append(f)
    vec = [GaussianRational(1)]
    for f in local:
        vec = [x * y for x in vec for y in f]
    return Ket(profile, tuple(vec), label)


def proportional(a: Ket, b: Ket) -> bool:
    """Exact test for ``a = c*b`` with ``c`` nonzero."""
    if a.profile != b.profile:
        return False
    sa = [i for i, _ in a.support]
    if sa != [i for i, _ in b.support]:
        return False
    i0 = sa[0]
    ratio = a.amplitudes[i0] / b.amplitudes[i0]
    return all(a.amplitudes[i] == ratio * b.amplitudes[i] for i in sa)


@dataclass(frozen=True)
class Violation:
    kind: str
    x: int
    y: Optional[int] = None
    value: Optional[GaussianRational] = None

    def __str__(self):
        if self.kind == "non-orthogonal":
            return f"states {self.x} and {self.y} have inner product {self.value}"
        if self.kind == "duplicate":
            return f"states {self.x} and {self.y} are proportional"
        return f"state {self.x}: {self.kind}"


class ValidationError(StateError):
    def __init__(self, violations: List[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations[:10])
        more = f" (+{len(violations) - 10} more)" if len(violations) > 10 else ""
        super().__init__(f"invalid state set: {lines}{more}")


@dataclass(frozen=True, eq=False)
class StateSet:
    """Mutually orthogonal kets on a common profile.

    Build through :func:`validate_state_set`; the constructor itself does not
    check orthogonality.
    """

    profile: DimensionProfile
    states: Tuple[Ket, ...]
    name: Optional[str] = None

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def labels(self) -> List[str]:
        return [state_name(k, i) for i, k in enumerate(self.states)]

    def subset(self, indices: Sequence[int], name=None) -> "StateSet":
        return StateSet(self.profile, tuple(self.states[i] for i in indices), name)

    def is_complete(self) -> bool:
        return len(self.states) == self.profile.total


def state_name(ket: Ket, position: int) -> str:
    return ket.label or describe(ket) or f"#{position}"


def validate_state_set(states: Sequence[Ket], name: Optional[str] = None, profile=None) -> StateSet:
    """Check orthogonality, profiles and duplicates; raise with every offence.

    Raises
    ------
    ValidationError
        Carries the full list of :class:`Violation` records.
    """
    states = list(states)
    violations: List[Violation] = []
    if profile is None:
        if not states:
            raise StateError("cannot infer a profile from an empty set")
        profile = states[0].profile
    for i, k in enumerate(states):
        if k.profile != profile:
            violations.append(Violation(f"profile {k.profile} differs from {profile}", i))
    if violations:
        raise ValidationError(violations)
    for x, y in combinations(range(len(states)), 2):
        if proportional(states[x], states[y]):
            violations.append(Violation("duplicate", x, y))
            continue
        ip = inner_product(states[x], states[y])
        if ip:
            violations.append(Violation("non-orthogonal", x, y, ip))
    if violations:
        raise ValidationError(violations)
    return StateSet(profile, tuple(states), name)


def gram_matrix(s: StateSet) -> List[List[GaussianRational]]:
    return [[inner_product(a, b) for b in s.states] for a in s.states]


def reshape_across(ket: Ket, left: Sequence[int]) -> Dict[Tuple[int, int], GaussianRational]:
    """Sparse ``(row, col)`` view of ``ket`` with parties ``left`` as rows."""
    prof = ket.profile
    left = list(left)
    right = [p for p in range(prof.n) if p not in left]
    out = {}
    for i, a in ket.support:
        lab = prof.labels(i)
        r = 0
        for p in left:
            r = r * prof.dims[p] + lab[p]
        c = 0
        for p in right:
            c = c * prof.dims[p] + lab[p]
        out[(r, c)] = a
    return out


def schmidt_rank_across(ket: Ket, grouping: "Grouping") -> int:
    """Exact rank of the amplitude matrix across a two-block grouping."""
    blocks = grouping.blocks
    if len(blocks) != 2 or grouping.n != ket.profile.n:
        raise StateError(f"{grouping} is not a bipartition of {ket.profile.n} parties")
    entries = reshape_across(ket, blocks[0])
    # Complex matrix of rank r has a real 2x2-block embedding of rank 2r.
    rows: Dict[int, Dict[int, Fraction]] = {}
    for (r, c), a in entries.items():
        re_row = rows.setdefault(2 * r, {})
        im_row = rows.setdefault(2 * r + 1, {})
        if a.re:
            re_row[2 * c] = a.re
            im_row[2 * c + 1] = a.re
        if a.im:
            re_row[2 * c + 1] = -a.im
            im_row[2 * c] = a.im
    _, pivots = rref_sparse(rows.values())
    return len(pivots) // 2


def is_product(ket: Ket) -> bool:
    from .partitions import bipartitions

    if ket.profile.n == 1:
        return True
    return all(schmidt_rank_across(ket, g) == 1 for g in bipartitions(ket.profile.n))


def _factor_text(vec: Sequence[GaussianRational]) -> Optional[str]:
    nz = [(i, a) for i, a in enumerate(vec) if a]
    if len(nz) == 1:
        return str(nz[0][0] + 1)
    if len(nz) == 2 and nz[0][1] == 1 and nz[1][1] in (1, -1):
        sign = "+" if nz[1][1] == 1 else "-"
        return f"{nz[0][0] + 1}{sign}{nz[1][0] + 1}"
    return None


def factorize(ket: Ket) -> Optional[List[List[GaussianRational]]]:
    """Per-party factors of a product ket, or None if entangled.

    Factors are scaled so the first nonzero entry of every factor except the
    last is 1.
    """
    prof = ket.profile
    i0, a0 = ket.support[0]
    lab0 = prof.labels(i0)
    factors = []
    for p, d in enumerate(prof.dims):
        f = []
        for k in range(d):
            lab = list(lab0)
            lab[p] = k
            f.append(ket.amplitudes[prof.index(lab)])
        factors.append(f)
    # Remove the repeated a0 scaling: every factor contains a0 at lab0[p].
    scaled = [[x / a0 for x in f] for f in factors[:-1]] + [factors[-1]]
    rebuilt = [GaussianRational(1)]
    for f in scaled:
        rebuilt = [x * y for x in rebuilt for y in f]
    if tuple(rebuilt) != ket.amplitudes:
        return None
    return scaled


def describe(ket: Ket) -> Optional[str]:
    """1-based ket notation such as ``|1>|2>|1+2>`` for simple product kets."""
    factors = factorize(ket)
    if factors is None:
        return None
    last = factors[-1]
    lead = next(a for a in last if a)
    if lead != 1:
        if lead in (-1,):
            last = [-a for a in last]
        else:
            return None
    factors = factors[:-1] + [last]
    parts = [_factor_text(f) for f in factors]
    if any(p is None for p in parts):
        return None
    return "".join(f"|{p}>" for p in parts)


# --- JSON file format -------------------------------------------------------


def state_set_to_dict(s: StateSet) -> dict:
    out = {}
    if s.name:
        out["name"] = s.name
    out["dims"] = list(s.profile.dims)
    states = []
    for k in s.states:
        amps = []
        for i, a in k.support:
            entry = {"index": list(s.profile.labels(i)), "re": format_rational(a.re)}
            if a.im:
                entry["im"] = format_rational(a.im)
            amps.append(entry)
        item = {}
        if k.label:
            item["label"] = k.label
        item["amplitudes"] = amps
        states.append(item)
    out["states"] = states
    return out


def dumps_state_set(s: StateSet, indent: Optional[int] = 1) -> str:
    return json.dumps(state_set_to_dict(s), indent=indent)


def state_set_from_dict(data: dict) -> StateSet:
    """Parse and validate the JSON state-set format.

    Raises
    ------
    FormatError
        For schema problems (missing keys, bad rationals, repeated indices).
    ValidationError
        If the parsed states are not a valid orthogonal set.
    """
    if not isinstance(data, dict):
        raise FormatError("top level must be an object")
    try:
        dims = data["dims"]
        raw_states = data["states"]
    except KeyError as e:
        raise FormatError(f"missing key {e.args[0]!r}") from None
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise FormatError("'dims' must be a list of integers")
    try:
        profile = DimensionProfile(tuple(dims))
    except StateError as e:
        raise FormatError(str(e)) from None
    if not isinstance(raw_states, list) or not raw_states:
        raise FormatError("'states' must be a nonempty list")
    kets = []
    for n, item in enumerate(raw_states):
        if not isinstance(item, dict) or "amplitudes" not in item:
            raise FormatError(f"state {n}: expected an object with 'amplitudes'")
        vec = [GZERO] * profile.total
        seen = set()
        for entry in item["amplitudes"]:
            try:
                idx = tuple(entry["index"])
                re = parse_rational(str(entry.get("re", "0")))
                im = parse_rational(str(entry.get("im", "0")))
            except (KeyError, TypeError, ValueError) as e:
                raise FormatError(f"state {n}: bad amplitude entry {entry!r}: {e}") from None
            if idx in seen:
                raise FormatError(f"state {n}: duplicate index {list(idx)}")
            seen.add(idx)
            try:
                g = profile.index(idx)
            except StateError as e:
                raise FormatError(f"state {n}: {e}") from None
            vec[g] = GaussianRational(re, im)
        try:
            kets.append(Ket(profile, tuple(vec), item.get("label")))
        except StateError as e:
            raise FormatError(f"state {n}: {e}") from None
    return validate_state_set(kets, name=data.get("name"), profile=profile)


def loads_state_set(text: str) -> StateSet:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None
    return state_set_from_dict(data)


def load_state_set(path) -> StateSet:
    with open(path, encoding="utf-8") as fh:
        return loads_state_set(fh.read())
