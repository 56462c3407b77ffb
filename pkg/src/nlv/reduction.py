"""Local reductions by coordinate-subspace projective measurements.

A measurement ``{P, 1 - P}`` on one party, with ``P`` the projector onto a set
of that party's basis labels, reduces a set when both outcomes keep the
surviving states orthogonal and some outcome removes at least one state while
keeping at least one. Post-measurement states stay unnormalized; outcome
probabilities are exact ratios ``<v|P|v> / <v|v>``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .exactmath import GZERO, ONE, ZERO, format_rational
from .opm import ConstraintSystem, HermitianLayout
from .partitions import Grouping, GroupingError, coarse_grain, merged_index_map
from .states import DimensionProfile, Ket, StateSet, inner_product, state_name

MAX_ENUMERATION_DIM = 20


class ReductionError(ValueError):
    pass


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class CoordinateProjector:
    party: int
    subset: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "subset", tuple(sorted(set(int(k) for k in self.subset))))

    def check(self, d: int):
        if not self.subset or len(self.subset) >= d or self.subset[0] < 0 or self.subset[-1] >= d:
            raise ReductionError(
                f"subset {list(self.subset)} must be a nonempty proper subset of 0..{d - 1}"
            )

    def complement(self, d: int) -> "CoordinateProjector":
        return CoordinateProjector(self.party, tuple(k for k in range(d) if k not in self.subset))

    def as_param_vector(self, layout: HermitianLayout) -> List[Fraction]:
        v = [ZERO] * layout.size
        for k in self.subset:
            v[k] = ONE
        return v


def _mask(profile, party: int, subset) -> List[bool]:
    inner = 1
    for dd in profile.dims[party + 1:]:
        inner *= dd
    d = profile.dims[party]
    keep = set(subset)
    return [((i // inner) % d) in keep for i in range(profile.total)]


def _project(ket: Ket, mask: Sequence[bool]) -> Optional[Ket]:
    vec = [a if m else GZERO for a, m in zip(ket.amplitudes, mask)]
    if not any(vec):
        return None
    return Ket(ket.profile, tuple(vec), ket.label)


def _masked_norm2(ket: Ket, mask) -> Fraction:
    return sum((a.abs2() for i, a in ket.support if mask[i]), ZERO)


def _masked_overlap(a: Ket, b: Ket, mask):
    bs = b.amplitudes
    acc = GZERO
    for i, x in a.support:
        if mask[i] and bs[i]:
            acc = acc + x.conj() * bs[i]
    return acc


@dataclass(frozen=True)
class Branch:
    subset: Tuple[int, ...]
    survivors: Tuple[int, ...]
    eliminated: Tuple[int, ...]
    probabilities: Tuple[Fraction, ...]  # per input state, in input order

    @property
    def reduces(self) -> bool:
        return bool(self.survivors) and bool(self.eliminated)


@dataclass(frozen=True)
class ReductionOutcome:
    projector: CoordinateProjector
    branches: Tuple[Branch, Branch]


class Verdict(enum.Enum):
    NOT_OP = "NotOP"
    OP_NON_REDUCING = "OPButNonReducing"
    REDUCING = "Reducing"


@dataclass(frozen=True)
class ReductionCheck:
    verdict: Verdict
    outcome: Optional[ReductionOutcome] = None
    violation: Optional[Tuple[int, int]] = None


def _first_violation(states: StateSet, mask) -> Optional[Tuple[int, int]]:
    for x, y in combinations(range(len(states)), 2):
        if _masked_overlap(states[x], states[y], mask):
            return x, y
    return None


def _branch(states: StateSet, subset, mask) -> Branch:
    surv, elim, probs = [], [], []
    for i, k in enumerate(states.states):
        p = _masked_norm2(k, mask) / k.norm2()
        probs.append(p)
        (surv if p else elim).append(i)
    return Branch(tuple(subset), tuple(surv), tuple(elim), tuple(probs))


def check_projective_reduction(states: StateSet, party: int, subset: Sequence[int]) -> ReductionCheck:
    """Classify the measurement ``{P_subset, 1 - P_subset}`` on ``party``.

    A branch that removes every state never occurs and does not count as a
    reduction.
    """
    if not 0 <= party < states.profile.n:
        raise ReductionError(f"party {party} out of range")
    d = states.profile.dims[party]
    proj = CoordinateProjector(party, subset)
    proj.check(d)
    comp = proj.complement(d)
    mask = _mask(states.profile, party, proj.subset)
    bad = _first_violation(states, mask)
    if bad is not None:
        return ReductionCheck(Verdict.NOT_OP, violation=bad)
    cmask = [not m for m in mask]
    # Given orthogonal inputs, <x|(1-P)|y> = -<x|P|y>, so the complement is OP too.
    b1 = _branch(states, proj.subset, mask)
    b2 = _branch(states, comp.subset, cmask)
    outcome = ReductionOutcome(proj, (b1, b2))
    if b1.reduces or b2.reduces:
        return ReductionCheck(Verdict.REDUCING, outcome)
    return ReductionCheck(Verdict.OP_NON_REDUCING, outcome)


def candidate_subsets(d: int):
    """One subset per two-outcome measurement, by size then lexicographically.

    ``P_S`` and ``P_{complement}`` define the same measurement, so each is named
    by the side holding label 0.
    """
    for size in range(1, d):
        for rest in combinations(range(1, d), size - 1):
            yield (0,) + rest


def find_coordinate_reduction(states: StateSet, party: int) -> Optional[Tuple[int, ...]]:
    """First reducing coordinate subset for ``party``, or None.

    None only means no coordinate projector works; it does not prove the set
    locally irreducible.
    """
    d = states.profile.dims[party]
    if d > MAX_ENUMERATION_DIM:
        raise ReductionError(
            f"dimension {d} exceeds the enumeration bound {MAX_ENUMERATION_DIM}"
        )
    for subset in candidate_subsets(d):
        if check_projective_reduction(states, party, subset).verdict is Verdict.REDUCING:
            return subset
    return None


# --- protocols --------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolNode:
    """Measure ``{P_subset, 1 - P_subset}`` on ``party`` of the grouped system.

    ``children[0]`` runs after the ``P`` outcome, ``children[1]`` after the
    complement; None ends that branch.
    """

    party: int
    subset: Tuple[int, ...]
    grouping: Optional[Grouping] = None
    children: Tuple[Optional["ProtocolNode"], Optional["ProtocolNode"]] = (None, None)


def sequential(rounds: Sequence[Tuple[Optional[Grouping], int, Sequence[int]]]) -> Optional[ProtocolNode]:
    """Tree that applies every round, in order, on every branch."""
    node = None
    for grouping, party, subset in reversed(list(rounds)):
        node = ProtocolNode(party, tuple(subset), grouping, (node, node))
    return node


@dataclass(frozen=True)
class Leaf:
    path: Tuple[Tuple[int, Tuple[int, ...]], ...]
    survivors: Tuple[int, ...]
    probabilities: Tuple[Fraction, ...]  # cumulative, aligned with survivors

    @property
    def identified(self) -> bool:
        return len(self.survivors) == 1


def run_protocol(states: StateSet, protocol: Optional[ProtocolNode]) -> List[Leaf]:
    """Run a measurement tree; return every leaf reached with nonzero probability.

    Raises
    ------
    ProtocolError
        If a node's measurement does not keep its incoming states orthogonal.
    """
    profile = states.profile
    leaves: List[Leaf] = []

    def walk(node, current: Dict[int, Ket], probs: Dict[int, Fraction], path):
        if not current:
            return
        if node is None:
            order = sorted(current)
            leaves.append(Leaf(tuple(path), tuple(order), tuple(probs[i] for i in order)))
            return
        g = node.grouping or Grouping.singletons(profile.n)
        if g.n != profile.n:
            raise ProtocolError(f"grouping {g} does not fit {profile.n} parties")
        cdims = g.coarse_dims(profile.dims)
        if not 0 <= node.party < len(cdims):
            raise ProtocolError(f"party {node.party} out of range for grouping {g}")
        d = cdims[node.party]
        proj = CoordinateProjector(node.party, node.subset)
        try:
            proj.check(d)
        except ReductionError as e:
            raise ProtocolError(str(e)) from None
        cmask = _mask(DimensionProfile(cdims), node.party, proj.subset)
        index_map = merged_index_map(profile, g)
        mask = [cmask[index_map[i]] for i in range(profile.total)]
        idx = sorted(current)
        for a, b in combinations(idx, 2):
            if _masked_overlap(current[a], current[b], mask):
                raise ProtocolError(
                    f"measurement {list(proj.subset)} on party {node.party} of {g} "
                    f"is not orthogonality preserving on states {a} and {b}"
                )
        for branch, (m, sub) in enumerate(
            ((mask, proj.subset), ([not x for x in mask], proj.complement(d).subset))
        ):
            nxt, nprob = {}, {}
            for i in idx:
                k = current[i]
                p = _masked_norm2(k, m) / k.norm2()
                if p:
                    nxt[i] = _project(k, m)
                    nprob[i] = probs[i] * p
            walk(node.children[branch], nxt, nprob, path + [(node.party, tuple(sub))])

    walk(protocol, dict(enumerate(states.states)), {i: Fraction(1) for i in range(len(states))}, [])
    return leaves


def protocol_from_json(data, one_based: bool = False) -> Optional[ProtocolNode]:
    """Parse a protocol.

    Either a node object ``{"grouping": "0|1,2", "party": 0, "subset": [0, 1],
    "branches": [node-or-null, node-or-null]}`` or a list of such nodes
    (without ``branches``) applied in sequence on every branch. An empty list
    is the empty protocol.
    """
    shift = 1 if one_based else 0

    def node(obj):
        if obj is None:
            return None
        if not isinstance(obj, dict):
            raise ProtocolError(f"protocol node must be an object, got {obj!r}")
        try:
            party = int(obj["party"]) - shift
            subset = tuple(int(k) - shift for k in obj["subset"])
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"bad protocol node {obj!r}: {e}") from None
        g = obj.get("grouping")
        try:
            grouping = Grouping.parse(g, one_based) if g else None
        except GroupingError as e:
            raise ProtocolError(str(e)) from None
        branches = obj.get("branches", [None, None])
        if not isinstance(branches, list) or len(branches) != 2:
            raise ProtocolError("'branches' must be a two-element list")
        return ProtocolNode(party, subset, grouping, (node(branches[0]), node(branches[1])))

    if isinstance(data, list):
        rounds = [node(obj) for obj in data]
        result = None
        for n in reversed(rounds):
            result = ProtocolNode(n.party, n.subset, n.grouping, (result, result))
        return result
    return node(data)


def load_protocol(path, one_based: bool = False) -> Optional[ProtocolNode]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"invalid JSON: {e}") from None
    return protocol_from_json(data, one_based)


def outcome_to_dict(states: StateSet, outcome: ReductionOutcome) -> dict:
    names = states.labels()
    out = {"party": outcome.projector.party, "subset": list(outcome.projector.subset), "branches": []}
    for b in outcome.branches:
        out["branches"].append(
            {
                "subset": list(b.subset),
                "survivors": [names[i] for i in b.survivors],
                "eliminated": [names[i] for i in b.eliminated],
                "probabilities": [format_rational(p) for p in b.probabilities],
            }
        )
    return out


def leaves_to_dict(states: StateSet, leaves: Sequence[Leaf]) -> list:
    names = states.labels()
    return [
        {
            "path": [{"party": p, "subset": list(s)} for p, s in leaf.path],
            "survivors": [names[i] for i in leaf.survivors],
            "probabilities": [format_rational(p) for p in leaf.probabilities],
            "identified": leaf.identified,
        }
        for leaf in leaves
    ]
