import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlv import constructions
from nlv.constructions import build
from nlv.opm import constraint_system, is_trivial
from nlv.partitions import Grouping, bipartitions, coarse_grain
from nlv.reduction import (
    MAX_ENUMERATION_DIM,
    CoordinateProjector,
    ProtocolError,
    ProtocolNode,
    ReductionError,
    Verdict,
    candidate_subsets,
    check_projective_reduction,
    find_coordinate_reduction,
    leaves_to_dict,
    load_protocol,
    outcome_to_dict,
    protocol_from_json,
    run_protocol,
    sequential,
)


def leaf_sets(states, leaves):
    names = states.labels()
    return sorted(sorted(names[i] for i in leaf.survivors) for leaf in leaves)


def test_candidate_order():
    assert list(candidate_subsets(3)) == [(0,), (0, 1), (0, 2)]
    assert len(list(candidate_subsets(4))) == 7  # 14 proper subsets, paired with complements


def test_example_a_bob_splits_columns():
    s = build("example_a")
    check = check_projective_reduction(s, 1, [0, 1])
    assert check.verdict is Verdict.REDUCING
    keep, other = check.outcome.branches
    names = s.labels()
    assert [names[i] for i in keep.survivors] == ["|00>+|11>", "|00>-|11>", "|01>+|10>", "|01>-|10>"]
    assert [names[i] for i in other.survivors] == ["|02>+|13>", "|02>-|13>", "|03>+|12>", "|03>-|12>"]
    assert find_coordinate_reduction(s, 1) == (0, 1)
    assert find_coordinate_reduction(s, 0) is None


def test_ghz_merged_pair_reduces():
    s = coarse_grain(build("ghz3"), Grouping.parse("0,1|2"))
    check = check_projective_reduction(s, 0, [0, 3])
    assert check.verdict is Verdict.REDUCING
    assert [len(b.survivors) for b in check.outcome.branches] == [4, 4]
    assert find_coordinate_reduction(s, 0) == (0, 3)


@pytest.mark.parametrize("subset", [[0], [1]])
def test_bell_is_not_op(subset):
    check = check_projective_reduction(build("bell"), 0, subset)
    assert check.verdict is Verdict.NOT_OP
    assert check.violation is not None


def test_op_but_non_reducing():
    # measuring a product state in its own support keeps everything in one branch
    s = build("example_b").subset([2, 4])  # |02>, |22>
    assert check_projective_reduction(s, 1, [2]).verdict is Verdict.OP_NON_REDUCING


@pytest.mark.parametrize("grouping", ["0,2|1", "0,1|2"])
def test_incomplete_ghz_merged_side(grouping):
    s = coarse_grain(build("incomplete_ghz"), Grouping.parse(grouping))
    assert find_coordinate_reduction(s, 0) == (0, 3)


def test_incomplete_ghz_first_cut_not_reducible():
    s = coarse_grain(build("incomplete_ghz"), Grouping.parse("0|1,2"))
    assert find_coordinate_reduction(s, 0) is None
    assert find_coordinate_reduction(s, 1) is None


def test_example_b_either_party():
    s = build("example_b")
    assert find_coordinate_reduction(s, 0) == (0, 1)
    assert find_coordinate_reduction(s, 1) == (0, 1)


@pytest.mark.parametrize("party", [0, 1, 2])
def test_copb_333_has_no_coordinate_reduction(party):
    assert find_coordinate_reduction(build("copb_333"), party) is None


def test_invalid_subsets():
    s = build("bell")
    for bad in ([], [0, 1], [2], [-1]):
        with pytest.raises(ReductionError):
            check_projective_reduction(s, 0, bad)
    with pytest.raises(ReductionError):
        check_projective_reduction(s, 3, [0])


def test_enumeration_bound(monkeypatch):
    import nlv.reduction as red

    monkeypatch.setattr(red, "MAX_ENUMERATION_DIM", 3)
    with pytest.raises(ReductionError):
        red.find_coordinate_reduction(build("example_a"), 1)
    assert MAX_ENUMERATION_DIM == 20


# --- protocols -----------------------------------------------------------------


def test_example_b_two_round_protocol():
    s = build("example_b")
    protocol = sequential([(None, 0, [0, 1]), (None, 1, [0, 1])])
    leaves = run_protocol(s, protocol)
    assert leaf_sets(s, leaves) == sorted(
        [
            sorted(["|00>+|11>", "|00>-|11>", "|01>+|10>", "|01>-|10>"]),
            sorted(["|20>", "|21>"]),
            sorted(["|02>", "|12>"]),
            ["|22>"],
        ]
    )
    total = {i: Fraction(0) for i in range(len(s))}
    for leaf in leaves:
        for i, p in zip(leaf.survivors, leaf.probabilities):
            total[i] += p
    assert all(p == 1 for p in total.values())
    assert [leaf.identified for leaf in leaves].count(True) == 1


def test_single_node_protocol():
    s = build("example_a")
    leaves = run_protocol(s, ProtocolNode(1, (0, 1)))
    assert [len(leaf.survivors) for leaf in leaves] == [4, 4]
    assert leaves[0].path == ((1, (0, 1)),)
    assert leaves[1].path == ((1, (2, 3)),)


def test_empty_protocol():
    s = build("bell")
    (leaf,) = run_protocol(s, None)
    assert leaf.survivors == (0, 1, 2, 3) and leaf.probabilities == (1, 1, 1, 1)


def test_protocol_with_grouping_and_tree():
    s = build("ghz3")
    g = Grouping.parse("0,1|2")
    tree = ProtocolNode(0, (0, 3), g, (None, ProtocolNode(0, (1,), None, (None, None))))
    with pytest.raises(ProtocolError):
        # the second node acts on qubit A of a Bell-like set: not orthogonality preserving
        run_protocol(s, tree)
    leaves = run_protocol(s, ProtocolNode(0, (0, 3), g))
    assert [len(leaf.survivors) for leaf in leaves] == [4, 4]


def test_invalid_protocol_node():
    with pytest.raises(ProtocolError):
        run_protocol(build("bell"), ProtocolNode(0, (0,)))
    with pytest.raises(ProtocolError):
        run_protocol(build("bell"), ProtocolNode(0, (0, 1)))
    with pytest.raises(ProtocolError):
        run_protocol(build("bell"), ProtocolNode(5, (0,)))


def test_protocol_json_forms(tmp_path):
    rounds = [{"party": 0, "subset": [0, 1]}, {"party": 1, "subset": [0, 1]}]
    assert protocol_from_json(rounds) == sequential([(None, 0, [0, 1]), (None, 1, [0, 1])])
    assert protocol_from_json([]) is None
    one = protocol_from_json({"party": 2, "subset": [1, 2], "grouping": "1|2,3"}, one_based=True)
    assert one == ProtocolNode(1, (0, 1), Grouping.parse("0|1,2"))
    path = tmp_path / "p.json"
    path.write_text(json.dumps(rounds))
    s = build("example_b")
    assert len(run_protocol(s, load_protocol(path))) == 4


@pytest.mark.parametrize(
    "payload",
    [
        [1],
        {"subset": [0]},
        {"party": 0, "subset": "x"},
        {"party": 0, "subset": [0], "branches": [None]},
        {"party": 0, "subset": [0], "grouping": "0|0"},
    ],
)
def test_protocol_json_errors(payload):
    with pytest.raises(ProtocolError):
        protocol_from_json(payload)


def test_load_protocol_bad_json(tmp_path):
    path = tmp_path / "p.json"
    path.write_text("{nope")
    with pytest.raises(ProtocolError):
        load_protocol(path)


def test_json_views():
    s = build("example_a")
    out = outcome_to_dict(s, check_projective_reduction(s, 1, [0, 1]).outcome)
    assert out["subset"] == [0, 1]
    assert out["branches"][0]["probabilities"] == ["1", "1", "0", "0"] * 2
    leaves = leaves_to_dict(s, run_protocol(s, ProtocolNode(1, (0, 1))))
    assert leaves[1]["survivors"][0] == "|02>+|13>"
    json.dumps(leaves)


# --- properties ------------------------------------------------------------------


def all_sides():
    for name in constructions.names():
        s = build(name)
        for p in range(s.profile.n):
            yield name, None, p
        if s.profile.n >= 3:
            for g in bipartitions(s.profile.n):
                for side, d in enumerate(g.coarse_dims(s.profile.dims)):
                    # sixteen-level sides cost 2^15 subset checks each
                    if d <= 9:
                        yield name, str(g), side


SIDES = list(all_sides())


def resolve(name, grouping):
    s = build(name)
    return coarse_grain(s, Grouping.parse(grouping)) if grouping else s


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(SIDES), st.data())
def test_probability_conservation_and_op_symmetry(side, data):
    name, grouping, party = side
    s = resolve(name, grouping)
    d = s.profile.dims[party]
    subset = data.draw(st.lists(st.integers(0, d - 1), min_size=1, max_size=d - 1, unique=True))
    check = check_projective_reduction(s, party, subset)
    comp = [k for k in range(d) if k not in subset]
    assert (check.verdict is Verdict.NOT_OP) == (
        check_projective_reduction(s, party, comp).verdict is Verdict.NOT_OP
    )
    if check.outcome is not None:
        a, b = check.outcome.branches
        assert all(x + y == 1 for x, y in zip(a.probabilities, b.probabilities))


@pytest.mark.parametrize("side", SIDES, ids=lambda t: f"{t[0]}-{t[1]}-{t[2]}")
def test_triviality_dominates_and_projectors_are_feasible(side):
    name, grouping, party = side
    s = resolve(name, grouping)
    found = find_coordinate_reduction(s, party)
    if is_trivial(s, party):
        assert found is None
    if found is not None:
        cs = constraint_system(s, party)
        assert cs.is_feasible(CoordinateProjector(party, found).as_param_vector(cs.layout))
