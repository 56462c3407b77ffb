import json
from fractions import Fraction

import pytest

from nlv import constructions
from nlv.constructions import build
from nlv.exactmath import GaussianRational
from nlv.opm import (
    ConstraintError,
    HermitianLayout,
    NontrivialWitness,
    ReplayError,
    Step,
    TrivialityCertificate,
    certificate,
    certificate_to_dict,
    constraint_system,
    is_trivial,
    replay,
    solution_space,
)
from nlv.partitions import Grouping, bipartitions, coarse_grain, permute_local_basis
from nlv.states import DimensionProfile, ket_from_dict, validate_state_set

from conftest import find_state
from oracle import nullity


def diag_vector(layout, entries):
    v = [Fraction(0)] * layout.size
    for k, x in enumerate(entries):
        v[k] = Fraction(x)
    return v


def complex_bell():
    p = DimensionProfile((2, 2))
    i = GaussianRational(0, 1)
    kets = [
        ket_from_dict(p, {(0, 0): 1, (1, 1): i}),
        ket_from_dict(p, {(0, 0): 1, (1, 1): -i}),
        ket_from_dict(p, {(0, 1): 1, (1, 0): i}),
        ket_from_dict(p, {(0, 1): 1, (1, 0): -i}),
    ]
    return validate_state_set(kets, "complex_bell")


# --- layout ------------------------------------------------------------------


def test_layout_round_trip():
    lay = HermitianLayout(3)
    i = GaussianRational(0, 1)
    m = [[1, 2 + 0 * i, i], [2, -1, Fraction(1, 2)], [-i, Fraction(1, 2), 0]]
    v = lay.encode(m)
    assert lay.encode(lay.decode(v)) == v
    assert lay.decode(v)[0][2] == i
    assert lay.describe_col(lay.im_col(0, 2)) == ("im", (0, 2))
    with pytest.raises(ValueError):
        lay.encode([[1, 1], [0, 1]])


def test_entry_names():
    assert HermitianLayout(9).entry_name(3, 4, base=1) == "a_45"
    assert HermitianLayout(16).entry_name(0, 12, base=1) == "a_1,13"
    assert HermitianLayout(2).entry_name(0, 1) == "a_01"


# --- constraint systems --------------------------------------------------------


def test_counts():
    cs = constraint_system(build("bell"), 1)
    assert (cs.matrix.rows, cs.matrix.cols) == (12, 4)
    merged = coarse_grain(build("copb_333"), Grouping.parse("0|1,2"))
    cs = constraint_system(merged, 1)
    assert (cs.matrix.rows, cs.matrix.cols) == (702, 81)


def test_bell_first_pair_equation():
    cs = constraint_system(build("bell"), 1)
    eq = cs.pair_equation(0, 1)
    assert eq == {(0, 0): GaussianRational(1), (1, 1): GaussianRational(-1)}
    re_row, im_row = cs.pair_rows(0, 1)
    assert re_row == {0: 1, 1: -1} and im_row == {}


def test_errors():
    with pytest.raises(ConstraintError):
        constraint_system(build("bell"), 2)
    with pytest.raises(ConstraintError):
        constraint_system(build("bell").subset([0]), 0)


@pytest.mark.parametrize("name", constructions.names())
def test_real_sets_split_cleanly(name):
    """Real amplitudes: real rows use diagonal/Re columns only, imaginary rows Im only."""
    s = build(name)
    for party in range(s.profile.n):
        cs = constraint_system(s, party)
        lay = cs.layout
        for row, (_, part) in zip(cs.rows, cs.provenance):
            kinds = {lay.describe_col(c)[0] for c in row}
            if part == "re":
                assert kinds <= {"diag", "re"}
            else:
                assert kinds <= {"im"}


# --- solution spaces -----------------------------------------------------------


@pytest.mark.parametrize("party", [0, 1])
def test_bell_trivial(party):
    space = solution_space(constraint_system(build("bell"), party))
    assert space.dimension == 1 and space.contains_identity()


def test_example_a_party_b():
    s = build("example_a")
    cs = constraint_system(s, 1)
    space = solution_space(cs)
    assert space.dimension == nullity(s, 1) == 2
    assert cs.is_feasible(diag_vector(cs.layout, [1, 1, 0, 0]))
    assert space.contains(diag_vector(cs.layout, [1, 1, 0, 0]))


def test_ghz_merged_side():
    s = coarse_grain(build("ghz3"), Grouping.parse("0,1|2"))
    cs = constraint_system(s, 0)
    space = solution_space(cs)
    assert space.dimension == nullity(s, 0) == 2
    # projector onto span{|00>, |11>} of the merged pair
    assert cs.is_feasible(diag_vector(cs.layout, [1, 0, 0, 1]))


@pytest.mark.parametrize(
    "name,grouping,party",
    [
        ("copb_333", None, 0),
        ("copb_333", None, 1),
        ("copb_333", None, 2),
        ("copb_333", "0|1,2", 1),
        ("ghz3", None, 2),
        ("copb_444", "0|1,2", 1),
        ("subset_333", None, 0),
        ("subset_444_s1", None, 0),
    ],
)
def test_trivial_cases(name, grouping, party):
    s = build(name)
    if grouping:
        s = coarse_grain(s, Grouping.parse(grouping))
    assert is_trivial(s, party)


def test_complex_set_against_oracle():
    s = complex_bell()
    for party in (0, 1):
        cs = constraint_system(s, party)
        assert cs.is_feasible(cs.layout.identity())
        assert solution_space(cs).dimension == nullity(s, party) == 1
        cert = certificate(cs)
        assert isinstance(cert, TrivialityCertificate)
        assert replay(cs, cert.steps)


def test_spectator_grouping_independence():
    s = build("subset_333")
    full = solution_space(constraint_system(s, 0))
    merged = solution_space(constraint_system(coarse_grain(s, Grouping.parse("0|1,2")), 0))
    assert full.dimension == merged.dimension
    assert all(merged.contains(v) for v in full.basis)
    # same on a nontrivial space
    a = build("example_a")
    t = build("ghz3")
    full = solution_space(constraint_system(coarse_grain(t, Grouping.parse("0,1|2")), 0))
    assert full.dimension == 2
    assert solution_space(constraint_system(a, 1)).dimension == 2


def test_relabeling_conjugates_solutions():
    s = build("example_a")
    perm = [2, 0, 3, 1]
    moved = permute_local_basis(s, 1, perm)
    lay = HermitianLayout(4)
    old = solution_space(constraint_system(s, 1))
    new = solution_space(constraint_system(moved, 1))
    assert old.dimension == new.dimension
    for m in old.matrices():
        conj = [[None] * 4 for _ in range(4)]
        for k in range(4):
            for l in range(4):
                conj[perm[k]][perm[l]] = m[k][l]
        assert new.contains(lay.encode(conj))


# --- certificates ----------------------------------------------------------------


def test_bell_certificate_steps():
    cs = constraint_system(build("bell"), 1)
    cert = certificate(cs)
    assert cert.complete
    assert [(s.entry, s.pair, s.fact, s.part) for s in cert.steps] == [
        ((0, 1), (0, 1), "equal", "both"),
        ((0, 1), (0, 2), "zero", "re"),
        ((0, 1), (0, 3), "zero", "im"),
    ]
    data = certificate_to_dict(cs, cert)
    assert data["steps"][0]["fact"] == "equals a_11"
    assert data["steps"][0]["entry"] == "a_00"
    assert data["steps"][1] == {
        "entry": "a_01",
        "pair": ["|00>+|11>", "|01>+|10>"],
        "fact": "zero",
        "part": "re",
        "pair_index": [0, 2],
    }
    json.dumps(data)


def test_merged_27_state_certificate_entries(coarse_bc):
    s = coarse_bc("copb_333")
    cs = constraint_system(s, 1)
    cert = certificate(cs)
    assert cert.complete and replay(cs, cert.steps)
    by_entry = {}
    for st in cert.steps:
        by_entry.setdefault((st.entry, st.fact), []).append(st.pair)
    pair = tuple(sorted((find_state(s, "|1+2>|2>"), find_state(s, "|1>|1>"))))
    assert pair in by_entry[((0, 1), "zero")]
    pair = tuple(sorted((find_state(s, "|1>|4+5>"), find_state(s, "|1>|4-5>"))))
    assert by_entry[((3, 4), "equal")] == [pair]


def test_witness_for_example_a():
    cs = constraint_system(build("example_a"), 1)
    w = certificate(cs)
    assert isinstance(w, NontrivialWitness)
    m = w.matrix()
    assert sum((m[k][k].re for k in range(4)), Fraction(0)) == 0
    assert [m[k][k] for k in range(4)] == [1, 1, -1, -1]
    assert all(not m[k][l] for k in range(4) for l in range(4) if k != l)
    assert cs.is_feasible(w.vector)
    # traceless part of the two-block projector, as a direct feasibility check
    half = diag_vector(cs.layout, [Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2)])
    assert cs.is_feasible(half)
    assert certificate_to_dict(cs, w)["witness"][0][0] == ["1", "0"]


def test_replay_rejects_unsupported_step():
    cs = constraint_system(build("bell"), 1)
    bogus = [Step((0, 1), (0, 1), "zero", "re")]
    with pytest.raises(ReplayError):
        replay(cs, bogus)
    assert replay(cs, bogus, strict=False) is False


def test_ghz_third_qubit_derivation_replays():
    s = build("ghz3")
    cs = constraint_system(s, 2)
    # the first state against the fifth, second and sixth
    steps = [
        Step((0, 1), (0, 4), "equal"),
        Step((0, 1), (0, 1), "zero", "re"),
        Step((0, 1), (0, 5), "zero", "im"),
    ]
    assert replay(cs, steps)


def test_first_block_party_zero_derivation_replays():
    s = build("subset_444_s1")
    cs = constraint_system(s, 0)
    rows = [
        ((1, 7), (1, 2)), ((3, 9), (1, 3)), ((7, 9), (2, 3)),
        ((5, 11), (1, 4)), ((7, 11), (2, 4)), ((9, 11), (3, 4)),
    ]
    steps = [Step((k - 1, l - 1), (x - 1, y - 1), "zero") for (x, y), (k, l) in rows]
    steps += [
        Step((0, 1), (12, 13), "equal"),
        Step((0, 2), (14, 15), "equal"),
        Step((0, 3), (16, 17), "equal"),
    ]
    assert replay(cs, steps)


@pytest.mark.parametrize("name", constructions.names())
def test_certificate_soundness_every_builtin(name):
    """Replay verdict agrees with the nullspace dimension on every side."""
    s = build(name)
    systems = [(s, p) for p in range(s.profile.n)]
    if s.profile.n >= 3:
        for g in bipartitions(s.profile.n):
            m = coarse_grain(s, g)
            systems += [(m, 0), (m, 1)]
    for states, party in systems:
        cs = constraint_system(states, party)
        dim = solution_space(cs).dimension
        cert = certificate(cs)
        if dim == 1:
            assert isinstance(cert, TrivialityCertificate)
            assert replay(cs, cert.steps) == cert.complete
        else:
            assert isinstance(cert, NontrivialWitness)
            assert cs.is_feasible(cert.vector)
            assert not replay(cs, [], strict=False)
