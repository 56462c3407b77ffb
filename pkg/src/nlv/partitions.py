"""Party groupings and coarse-graining of state sets."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import List, Sequence, Tuple

from .states import DimensionProfile, Ket, StateError, StateSet, describe


class GroupingError(ValueError):
    pass


@dataclass(frozen=True)
class Grouping:
    """Partition of parties ``0..n-1`` into coalitions.

    Blocks are sorted internally and ordered by their smallest member, so two
    groupings describing the same partition compare equal.
    """

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = [tuple(sorted(int(p) for p in b)) for b in self.blocks]
        if not blocks or any(not b for b in blocks):
            raise GroupingError("blocks must be nonempty")
        flat = [p for b in blocks for p in b]
        n = len(flat)
        if sorted(flat) != list(range(n)):
            raise GroupingError(f"blocks {blocks} do not partition parties 0..{n - 1}")
        blocks.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def singletons(cls, n: int) -> "Grouping":
        return cls(tuple((p,) for p in range(n)))

    @classmethod
    def parse(cls, text: str, one_based: bool = False) -> "Grouping":
        """Parse ``"0|1,2"`` (blocks split by ``|``, members by ``,``)."""
        shift = 1 if one_based else 0
        try:
            blocks = [
                tuple(int(tok) - shift for tok in part.split(",") if tok.strip())
                for part in text.split("|")
            ]
        except ValueError:
            raise GroupingError(f"cannot parse grouping {text!r}") from None
        if any(p < 0 for b in blocks for p in b):
            raise GroupingError(f"negative party index in {text!r}")
        return cls(tuple(blocks))

    def block_of(self, party: int) -> int:
        for i, b in enumerate(self.blocks):
            if party in b:
                return i
        raise GroupingError(f"party {party} not in grouping")

    def coarse_dims(self, dims: Sequence[int]) -> Tuple[int, ...]:
        return tuple(prod(dims[p] for p in b) for b in self.blocks)

    def is_identity(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)


def merged_index_map(profile: DimensionProfile, g: Grouping) -> List[int]:
    """For each global index of ``profile``, its index in the coarse profile."""
    if g.n != profile.n:
        raise GroupingError(f"grouping over {g.n} parties used on {profile.n}-party profile")
    cdims = g.coarse_dims(profile.dims)
    out = []
    for i in range(profile.total):
        lab = profile.labels(i)
        j = 0
        for b, cd in zip(g.blocks, cdims):
            m = 0
            for p in b:
                m = m * profile.dims[p] + lab[p]
            j = j * cd + m
        out.append(j)
    return out


def coarse_grain_ket(ket: Ket, g: Grouping, index_map=None) -> Ket:
    prof = DimensionProfile(g.coarse_dims(ket.profile.dims))
    if index_map is None:
        index_map = merged_index_map(ket.profile, g)
    vec = [None] * prof.total
    for i, a in enumerate(ket.amplitudes):
        vec[index_map[i]] = a
    new = Ket(prof, tuple(vec), None)
    if g.is_identity():
        return new.with_label(ket.label)
    return new.with_label(describe(new) or ket.label)


def coarse_grain(s: StateSet, g: Grouping) -> StateSet:
    """Relabel ``s`` so each block of ``g`` acts as a single party.

    Within a block, members keep ascending order in the merged mixed-radix
    label. The vectors are only permuted, so every inner product is kept;
    product kets are relabelled in the merged 1-based notation.
    """
    if g.n != s.profile.n:
        raise GroupingError(f"grouping {g} does not match {s.profile.n} parties")
    if g.is_identity():
        return s
    index_map = merged_index_map(s.profile, g)
    kets = tuple(coarse_grain_ket(k, g, index_map) for k in s.states)
    name = f"{s.name}[{g}]" if s.name else None
    return StateSet(kets[0].profile, kets, name)


def bipartitions(n: int) -> List[Grouping]:
    """All ``2**(n-1) - 1`` two-block groupings.

    Ordered by the size and then lexicographic order of the first block that
    names the cut, so for three parties the order is A|BC, B|AC, C|AB.
    """
    if n < 2:
        raise GroupingError("bipartitions need at least two parties")
    seen = set()
    out = []
    parties = range(n)
    for size in range(1, n):
        for side in combinations(parties, size):
            other = tuple(p for p in parties if p not in side)
            g = Grouping((side, other))
            if g in seen:
                continue
            seen.add(g)
            out.append(g)
    return out


def permute_parties(s: StateSet, order: Sequence[int]) -> StateSet:
    """New set whose party ``j`` is old party ``order[j]``."""
    prof = s.profile
    if sorted(order) != list(range(prof.n)):
        raise StateError(f"{order} is not a permutation of the parties")
    new_prof = DimensionProfile(tuple(prof.dims[p] for p in order))
    kets = []
    for k in s.states:
        vec = [None] * prof.total
        for i, a in enumerate(k.amplitudes):
            lab = prof.labels(i)
            vec[new_prof.index([lab[p] for p in order])] = a
        kets.append(Ket(new_prof, tuple(vec)))
    return StateSet(new_prof, tuple(kets), s.name)


def permute_local_basis(s: StateSet, party: int, perm: Sequence[int]) -> StateSet:
    """Relabel party ``party``'s basis: old label ``k`` becomes ``perm[k]``."""
    prof = s.profile
    if sorted(perm) != list(range(prof.dims[party])):
        raise StateError(f"{perm} is not a permutation of party {party}'s labels")
    kets = []
    for k in s.states:
        vec = [None] * prof.total
        for i, a in enumerate(k.amplitudes):
            lab = list(prof.labels(i))
            lab[party] = perm[lab[party]]
            vec[prof.index(lab)] = a
        kets.append(Ket(prof, tuple(vec)))
    return StateSet(prof, tuple(kets), s.name)
