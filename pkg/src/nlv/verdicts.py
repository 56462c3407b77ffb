"""Three-valued verdicts for local irreducibility and strong nonlocality."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .opm import (
    NontrivialWitness,
    certificate,
    certificate_to_dict,
    constraint_system,
    solution_space,
    witness,
)
from .partitions import Grouping, bipartitions, coarse_grain
from .reduction import MAX_ENUMERATION_DIM, find_coordinate_reduction
from .states import StateSet, is_product


class VerdictError(ValueError):
    pass


class Irreducibility(enum.Enum):
    CERTIFIED_IRREDUCIBLE = "CertifiedIrreducible"
    CERTIFIED_REDUCIBLE = "CertifiedReducible"
    INCONCLUSIVE = "Inconclusive"


class StrongNonlocality(enum.Enum):
    CERTIFIED = "CertifiedStronglyNonlocal"
    NOT = "NotStronglyNonlocal"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PartyReport:
    party: int
    dimension: int
    trivial: bool
    reduction: Optional[Tuple[int, ...]] = None
    search_skipped: bool = False
    witness: Optional[NontrivialWitness] = None
    certificate: Optional[dict] = None

    def to_dict(self, base: int = 0) -> dict:
        out = {
            "party": self.party + base,
            "dimension": self.dimension,
            "trivial": self.trivial,
            "reduction": None if self.reduction is None else [k + base for k in self.reduction],
        }
        if self.search_skipped:
            out["search_skipped"] = True
        if self.witness is not None and self.reduction is None:
            out.update(self.witness.to_dict())
        return out


@dataclass(frozen=True)
class IrreducibilityReport:
    states: StateSet
    parties: Tuple[PartyReport, ...]

    @property
    def verdict(self) -> Irreducibility:
        if all(p.trivial for p in self.parties):
            return Irreducibility.CERTIFIED_IRREDUCIBLE
        if any(p.reduction is not None for p in self.parties):
            return Irreducibility.CERTIFIED_REDUCIBLE
        return Irreducibility.INCONCLUSIVE

    def reducing_party(self) -> Optional[PartyReport]:
        return next((p for p in self.parties if p.reduction is not None), None)

    def to_dict(self, base: int = 0) -> dict:
        certs = [
            {"party": p.party + base, **p.certificate}
            for p in self.parties
            if p.certificate is not None
        ]
        return {
            "set": self.states.name,
            "dims": list(self.states.profile.dims),
            "verdict": self.verdict.value,
            "parties": [p.to_dict(base) for p in self.parties],
            "certificates": certs,
            "advisories": [],
        }


def party_report(states: StateSet, party: int, with_certificate: bool = False) -> PartyReport:
    cs = constraint_system(states, party)
    space = solution_space(cs)
    trivial = space.dimension == 1
    cert = None
    if with_certificate and trivial:
        cert = certificate_to_dict(cs, certificate(cs))
    if trivial:
        return PartyReport(party, space.dimension, True, certificate=cert)
    d = states.profile.dims[party]
    wit = witness(space)
    if d > MAX_ENUMERATION_DIM:
        return PartyReport(party, space.dimension, False, None, True, wit)
    subset = find_coordinate_reduction(states, party)
    return PartyReport(party, space.dimension, False, subset, False, wit)


def local_irreducibility_report(
    states: StateSet, certificates: bool = False
) -> IrreducibilityReport:
    """Check every party: trivial solution spaces certify irreducibility."""
    if states.profile.n < 2:
        raise VerdictError("local irreducibility needs at least two parties")
    reports = tuple(party_report(states, p, certificates) for p in range(states.profile.n))
    return IrreducibilityReport(states, reports)


@dataclass(frozen=True)
class BipartitionReport:
    grouping: Grouping
    sides: IrreducibilityReport

    @property
    def verdict(self) -> Irreducibility:
        return self.sides.verdict

    def to_dict(self, base: int = 0) -> dict:
        g = self.grouping
        label = "|".join(",".join(str(p + base) for p in b) for b in g.blocks)
        return {
            "grouping": label,
            "verdict": self.verdict.value,
            "sides": [p.to_dict(base) for p in self.sides.parties],
        }


@dataclass(frozen=True)
class StrongNonlocalityReport:
    states: StateSet
    bipartitions: Tuple[BipartitionReport, ...]
    advisories: Tuple[str, ...] = ()

    @property
    def verdict(self) -> StrongNonlocality:
        if all(b.verdict is Irreducibility.CERTIFIED_IRREDUCIBLE for b in self.bipartitions):
            return StrongNonlocality.CERTIFIED
        if self.witness() is not None:
            return StrongNonlocality.NOT
        return StrongNonlocality.INCONCLUSIVE

    def witness(self) -> Optional[Tuple[Grouping, PartyReport]]:
        """First bipartition with a certified reduction, and the reducing side."""
        for b in self.bipartitions:
            side = b.sides.reducing_party()
            if side is not None:
                return b.grouping, side
        return None

    def to_dict(self, base: int = 0) -> dict:
        certs = []
        for b in self.bipartitions:
            for p in b.sides.parties:
                if p.certificate is not None:
                    certs.append(
                        {"grouping": b.to_dict(base)["grouping"], "party": p.party + base, **p.certificate}
                    )
        out = {
            "set": self.states.name,
            "dims": list(self.states.profile.dims),
            "verdict": self.verdict.value,
            "bipartitions": [b.to_dict(base) for b in self.bipartitions],
            "certificates": certs,
            "advisories": list(self.advisories),
        }
        w = self.witness()
        if w is not None:
            g, side = w
            out["witness"] = {
                "grouping": "|".join(",".join(str(p + base) for p in blk) for blk in g.blocks),
                "party": side.party + base,
                "subset": [k + base for k in side.reduction],
            }
        return out


def _bipartition_job(args) -> BipartitionReport:
    states, g, certificates = args
    return BipartitionReport(g, local_irreducibility_report(coarse_grain(states, g), certificates))


def default_workers() -> int:
    """Worker count from ``NLV_THREADS``; unset or 0 means run in-process."""
    raw = os.environ.get("NLV_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def strong_nonlocality_report(
    states: StateSet, certificates: bool = False, workers: Optional[int] = None
) -> StrongNonlocalityReport:
    """Evaluate both sides of every bipartition of a set of three or more parties."""
    n = states.profile.n
    if n < 3:
        raise VerdictError("strong nonlocality needs at least three parties")
    if workers is None:
        workers = default_workers()
    jobs = [(states, g, certificates) for g in bipartitions(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = tuple(pool.map(_bipartition_job, jobs))
    else:
        results = tuple(_bipartition_job(j) for j in jobs)
    note = dimension_advisory(states)
    return StrongNonlocalityReport(states, results, (note,) if note else ())


def dimension_advisory(states: StateSet) -> Optional[str]:
    """Note when an all-product set has a qubit party.

    Orthogonal product states on C2 x Cd are known to be locally
    distinguishable, so such a set cannot be strongly nonlocal; the verdict is
    still computed independently.
    """
    qubits = [p for p, d in enumerate(states.profile.dims) if d == 2]
    if not qubits:
        return None
    if not all(is_product(k) for k in states.states):
        return None
    return (
        f"all states are product and party {qubits[0]} is a qubit: the set is "
        f"locally distinguishable across {qubits[0]}|rest, so it cannot be strongly nonlocal"
    )
