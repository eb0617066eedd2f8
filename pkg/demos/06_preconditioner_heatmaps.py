"""Muon's implicit preconditioner vs ScaledGD's, visualized along a run.

Muon rescales the factorization update by (grad^T grad)^(-1/2); ScaledGD
uses (U^T U)^(-1).  Near the optimum the two k x k blocks become roughly
proportional, which is why Muon inherits ScaledGD-style conditioning without
ever touching the iterate's Gram matrix.  This demo runs exact-msign Muon at
d=10, r=k=5 from a tiny alpha=1e-10 start and writes both blocks as SVG
heatmaps at steps 0, 500, and 1000, plus their trace-normalized distance.

The proportionality is a heuristic, not a theorem: the distance is reported,
never asserted.
"""

import os

import numpy as np

from muonlab.experiments import preconditioner_report

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rep = preconditioner_report(
    d=10, r=5, k=5, alpha=1e-10, steps=(0, 500, 1000), seed=42, out_dir=OUT
)

print("trace-normalized distance between the Muon and ScaledGD blocks:")
for t, diff in zip(rep.steps, rep.normalized_differences):
    print(f"  t={t:>5}: {diff:.4f}")

print("\nblock spectra (eigenvalues, descending):")
for t, pm, ps in zip(rep.steps, rep.muon_blocks, rep.scaledgd_blocks):
    lm = np.sort(np.linalg.eigvalsh(pm))[::-1]
    ls = np.sort(np.linalg.eigvalsh(ps))[::-1]
    print(f"  t={t:>5} muon    : {np.array2string(lm, precision=3)}")
    print(f"  t={t:>5} scaledgd: {np.array2string(ls, precision=3)}")

print("\nwrote heatmaps:")
for path in rep.heatmap_paths:
    print(" ", path)

print("""
At t=0 the ScaledGD block is alpha^2 * I (the Gram matrix of the scaled
orthonormal start) while the Muon block already carries the target's
spectrum through the gradient.  Later in the run both blocks develop the
same block-diagonal shape - visibly non-diagonal, which is exactly the
structure a per-coordinate method like Adam/SignGD cannot represent.
""")
