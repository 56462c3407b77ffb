"""Registry of the built-in state sets.

Every set is generated from index patterns (a first column of product-state
templates plus its cyclic party shifts, or bit patterns for GHZ-type sets)
and validated on construction. Templates use 1-based labels, converted to
0-based amplitudes here.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple, Union

from .exactmath import GaussianRational
from .states import DimensionProfile, Ket, StateSet, ket_from_dict, product_ket, validate_state_set


class UnknownConstruction(KeyError):
    pass


# A factor is a basis label k (1-based) or a pair (j, k) meaning |j>+|k> and |j>-|k>.
Factor = Union[int, Tuple[int, int]]

_FACTOR_RE = re.compile(r"\|\s*(\d+)\s*(?:([+-])\s*(\d+))?\s*>")


def ket_from_notation(profile: DimensionProfile, text: str, label=None) -> Ket:
    """Product ket from 1-based notation like ``"|1>|2>|1+2>"`` or ``"|1>|4-5>"``."""
    matches = list(_FACTOR_RE.finditer(text))
    if "".join(m.group(0) for m in matches).replace(" ", "") != text.replace(" ", ""):
        raise ValueError(f"cannot parse ket notation {text!r}")
    if len(matches) != profile.n:
        raise ValueError(f"{text!r} has {len(matches)} factors, profile has {profile.n}")
    factors = []
    for m, d in zip(matches, profile.dims):
        f = [0] * d
        f[int(m.group(1)) - 1] = 1
        if m.group(2):
            f[int(m.group(3)) - 1] = 1 if m.group(2) == "+" else -1
        factors.append(f)
    return product_ket(profile, factors, label if label is not None else text.replace(" ", ""))


def _factor_variants(f: Factor) -> List[str]:
    if isinstance(f, int):
        return [str(f)]
    j, k = f
    return [f"{j}+{k}", f"{j}-{k}"]


def _template_kets(profile: DimensionProfile, template: Sequence[Factor]) -> List[Ket]:
    """The one or two kets of a template, "+" before "-"."""
    options = [_factor_variants(f) for f in template]
    n_sign = max(len(o) for o in options)
    out = []
    for s in range(n_sign):
        text = "".join(f"|{o[s] if len(o) > 1 else o[0]}>" for o in options)
        out.append(ket_from_notation(profile, text))
    return out


def _cyclic(template: Sequence[Factor], shift: int) -> Tuple[Factor, ...]:
    n = len(template)
    return tuple(template[(i + shift) % n] for i in range(n))


def _cyclic_block(profile, first_column, column_major=False) -> List[Ket]:
    """Array whose columns are cyclic shifts of ``first_column``.

    Row-major traversal by default; ``column_major`` walks down each column.
    """
    n = profile.n
    grid = [[_cyclic(t, c) for c in range(n)] for t in first_column]
    cells = (
        [grid[r][c] for c in range(n) for r in range(len(grid))]
        if column_major
        else [grid[r][c] for r in range(len(grid)) for c in range(n)]
    )
    out = []
    for t in cells:
        out.extend(_template_kets(profile, t))
    return out


def _simple(profile, triples) -> List[Ket]:
    return [ket_from_notation(profile, "".join(f"|{k}>" for k in t)) for t in triples]


def _superpose(profile, labels_a, labels_b, sign) -> Ket:
    a = "".join(map(str, labels_a))
    b = "".join(map(str, labels_b))
    return ket_from_dict(
        profile,
        {tuple(labels_a): 1, tuple(labels_b): sign},
        f"|{a}>{'+' if sign > 0 else '-'}|{b}>",
    )


def _pm_pairs(profile, pairs) -> List[Ket]:
    out = []
    for a, b in pairs:
        out.append(_superpose(profile, a, b, 1))
        out.append(_superpose(profile, a, b, -1))
    return out


def _ket(profile, labels) -> Ket:
    return ket_from_dict(profile, {tuple(labels): 1}, "|" + "".join(map(str, labels)) + ">")


def bell() -> StateSet:
    p = DimensionProfile((2, 2))
    kets = _pm_pairs(p, [((0, 0), (1, 1)), ((0, 1), (1, 0))])
    return validate_state_set(kets, "bell")


def ghz(n: int) -> StateSet:
    """``2**n`` GHZ states: every bit pattern with leading 0, all "+" then all "-"."""
    if n < 2:
        raise ValueError("ghz needs n >= 2")
    p = DimensionProfile((2,) * n)
    patterns = []
    for k in range(2 ** (n - 1)):
        bits = tuple(int(b) for b in format(k, f"0{n}b"))
        patterns.append((bits, tuple(1 - b for b in bits)))
    kets = [_superpose(p, a, b, 1) for a, b in patterns]
    kets += [_superpose(p, a, b, -1) for a, b in patterns]
    return validate_state_set(kets, f"ghz{n}")


def example_a() -> StateSet:
    """Entangled basis of C2 x C4 split into two Bell-like halves."""
    p = DimensionProfile((2, 4))
    kets = _pm_pairs(
        p,
        [((0, 0), (1, 1)), ((0, 2), (1, 3)), ((0, 1), (1, 0)), ((0, 3), (1, 2))],
    )
    return validate_state_set(kets, "example_a")


def example_b() -> StateSet:
    """Bell states on the {0,1} corner of C3 x C3 plus five product states."""
    p = DimensionProfile((3, 3))
    kets = _pm_pairs(p, [((0, 0), (1, 1))])
    kets += [_ket(p, (0, 2)), _ket(p, (2, 0)), _ket(p, (2, 2))]
    kets += _pm_pairs(p, [((0, 1), (1, 0))])
    kets += [_ket(p, (1, 2)), _ket(p, (2, 1))]
    return validate_state_set(kets, "example_b")


_COPB333_COLUMN = [(1, 2, (1, 2)), (1, 3, (1, 3)), (2, 3, (1, 2)), (3, 2, (1, 3))]
_SUBSET333_COLUMN = _COPB333_COLUMN[:2]

_S1_COLUMN = [(1, 2, (1, 2)), (1, 3, (1, 3)), (1, 4, (1, 4))]
_S2_COLUMN = [
    (2, 3, (1, 2)),
    (2, 4, (1, 2)),
    (3, 4, (1, 3)),
    (4, 3, (1, 4)),
    (4, 2, (1, 4)),
    (3, 2, (1, 3)),
]
_S3_TRIPLES = [
    (2, 3, 4), (3, 4, 2), (4, 2, 3), (2, 4, 3), (4, 3, 2),
    (3, 2, 4), (1, 1, 1), (2, 2, 2), (3, 3, 3), (4, 4, 4),
]


def copb_333() -> StateSet:
    """27-state orthogonal product basis of C3 x C3 x C3."""
    p = DimensionProfile((3, 3, 3))
    kets = _cyclic_block(p, _COPB333_COLUMN)
    kets += _simple(p, [(1, 1, 1), (2, 2, 2), (3, 3, 3)])
    return validate_state_set(kets, "copb_333")


def subset_333() -> StateSet:
    """The twelve-state subset, listed column by column."""
    p = DimensionProfile((3, 3, 3))
    kets = _cyclic_block(p, _SUBSET333_COLUMN, column_major=True)
    return validate_state_set(kets, "subset_333")


def copb_444_blocks() -> Dict[str, List[Ket]]:
    p = DimensionProfile((4, 4, 4))
    return {
        "S1": _cyclic_block(p, _S1_COLUMN),
        "S2": _cyclic_block(p, _S2_COLUMN),
        "S3": _simple(p, _S3_TRIPLES),
    }


def copb_444() -> StateSet:
    """64-state orthogonal product basis of C4 x C4 x C4 (S1, S2, S3 in order)."""
    blocks = copb_444_blocks()
    return validate_state_set(blocks["S1"] + blocks["S2"] + blocks["S3"], "copb_444")


def subset_444_s1() -> StateSet:
    """The eighteen states of the first block, listed column by column."""
    p = DimensionProfile((4, 4, 4))
    kets = _cyclic_block(p, _S1_COLUMN, column_major=True)
    return validate_state_set(kets, "subset_444_s1")


def incomplete_ghz() -> StateSet:
    p = DimensionProfile((2, 2, 2))
    kets = _pm_pairs(p, [((0, 0, 0), (1, 1, 1)), ((0, 1, 1), (1, 0, 0))])
    return validate_state_set(kets, "incomplete_ghz")


_BUILDERS: Dict[str, Callable[[], StateSet]] = {
    "bell": bell,
    "ghz3": lambda: ghz(3),
    "example_a": example_a,
    "example_b": example_b,
    "copb_333": copb_333,
    "subset_333": subset_333,
    "copb_444": copb_444,
    "subset_444_s1": subset_444_s1,
    "incomplete_ghz": incomplete_ghz,
}

_GHZ_RE = re.compile(r"^ghz\(?(\d+)\)?$")


def names() -> List[str]:
    return list(_BUILDERS)


@lru_cache(maxsize=None)
def build(name: str) -> StateSet:
    """Build a registered set; ``ghzN`` / ``ghz(N)`` accepts any ``N >= 2``."""
    if name in _BUILDERS:
        return _BUILDERS[name]()
    m = _GHZ_RE.match(name)
    if m:
        return ghz(int(m.group(1)))
    raise UnknownConstruction(name)
