"""
Locally reducible sets and a two-round protocol
===============================================

Coordinate projectors that keep every pair orthogonal split a set into
smaller pieces. Running one on each party in turn separates a nine-state
basis into four groups.
"""

from nlv import build, find_coordinate_reduction, run_protocol
from nlv.reduction import sequential
from nlv.verdicts import local_irreducibility_report

for name in ("example_a", "example_b"):
    s = build(name)
    r = local_irreducibility_report(s)
    print(name, r.verdict.value, [find_coordinate_reduction(s, p) for p in range(s.profile.n)])

# Alice measures {0,1} vs {2}, then Bob does the same on every branch.
s = build("example_b")
leaves = run_protocol(s, sequential([(None, 0, [0, 1]), (None, 1, [0, 1])]))
names = s.labels()
for leaf in leaves:
    tag = "identified" if leaf.identified else "still ambiguous"
    print(f"  {[names[i] for i in leaf.survivors]}  ({tag})")
