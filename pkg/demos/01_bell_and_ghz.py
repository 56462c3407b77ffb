"""
Triviality of orthogonality-preserving measurements
===================================================

Walks through the constraint system for the two-qubit Bell basis and the
three-qubit GHZ basis, then shows how merging two qubits changes the answer.
"""

from nlv import build, certificate, constraint_system, solution_space
from nlv.opm import certificate_to_dict
from nlv.partitions import Grouping, coarse_grain
from nlv.reduction import check_projective_reduction

# Every pair of Bell states contributes one complex equation on the 2x2
# measurement operator of the acting party.
bell = build("bell")
cs = constraint_system(bell, 1)
print("Bell, party 1:", cs.matrix.rows, "real equations in", cs.matrix.cols, "unknowns")
print("solution-space dimension:", solution_space(cs).dimension)

# The derivation names the pair of states that forces each entry.
for step in certificate_to_dict(cs, certificate(cs))["steps"]:
    print("  ", step["pair"], step["entry"], step["fact"], step.get("part", ""))

# The GHZ basis is irreducible qubit by qubit ...
ghz = build("ghz3")
print("\nGHZ, per-qubit dimensions:",
      [solution_space(constraint_system(ghz, p)).dimension for p in range(3)])

# ... but two qubits held together can project onto span{|00>, |11>}.
merged = coarse_grain(ghz, Grouping.parse("0,1|2"))
check = check_projective_reduction(merged, 0, [0, 3])
print("merged 0,1|2, subset {0,3}:", check.verdict.value)
for branch in check.outcome.branches:
    print("   keeps", [merged.labels()[i] for i in branch.survivors])
