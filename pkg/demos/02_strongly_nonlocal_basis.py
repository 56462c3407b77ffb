"""
A strongly nonlocal product basis
=================================

The 27-state orthogonal product basis of three qutrits stays irreducible in
every bipartition. The exact solver proves it; a floating-point SVD agrees.
"""

import numpy as np

from nlv import build, certificate, constraint_system, strong_nonlocality_report
from nlv.partitions import Grouping, coarse_grain

basis = build("copb_333")
report = strong_nonlocality_report(basis)
print(basis.name, "->", report.verdict.value)
for b in report.bipartitions:
    print("  ", b.grouping, [p.dimension for p in b.sides.parties])

# Merge the last two parties: the 9x9 operator has 81 real unknowns.
bc = coarse_grain(basis, Grouping.parse("0|1,2"))
cs = constraint_system(bc, 1)
print("\nmerged side:", cs.matrix.rows, "x", cs.matrix.cols, "exact rank", cs.rank)

# Same matrix in floating point, rank by singular values.
dense = np.zeros((cs.matrix.rows, cs.matrix.cols))
for r, row in enumerate(cs.rows):
    for c, v in row.items():
        dense[r, c] = float(v)
sv = np.linalg.svd(dense, compute_uv=False)
print("float rank (cutoff 1e-9):", int((sv > 1e-9 * sv[0]).sum()))

# A few forcing steps, in the order the propagation found them. Labels and
# entries are both 1-based here.
cert = certificate(cs)
print("\nfirst steps of", len(cert.steps), "(residual:", len(cert.residual), ")")
names = bc.labels()
for step in cert.steps[:6]:
    k, l = (i + 1 for i in step.entry)
    what = f"a_{k}{l} = 0" if step.fact == "zero" else f"a_{k}{k} = a_{l}{l}"
    print("  ", names[step.pair[0]], names[step.pair[1]], what)
