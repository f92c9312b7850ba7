"""
The rare/weak phase diagram
===========================

Closed forms for where inference is possible at all: the detection boundary
rho(vartheta) in the sparsity/strength plane, its classification analogue
rho_theta, and the three-phase structure of the ideal FDR parameter inside
the region of success. Writes the plot-ready table and, if matplotlib is
available, a figure.
"""

import numpy as np

from hicrit.phase import (PhasePoint, boundary_table, classification_boundary,
                          classify_region, detection_boundary, ideal_fdr)

# The detection boundary: linear until vartheta = 3/4, then curved.
print("detection boundary rho(vartheta):")
for v in (0.55, 0.65, 0.75, 0.85, 0.95):
    print(f"  rho({v}) = {detection_boundary(v):.4f}")

# Classification with n = p^theta samples: the boundary is the detection
# curve scaled toward the origin by (1 - theta) in both axes.
print("\nclassification boundaries:")
for theta in (0.0, 0.15, 0.3):
    vs = [0.3, 0.5, 0.6]
    vals = ", ".join(f"rho_th({v}) = {classification_boundary(v, theta):.3f}" for v in vs)
    print(f"  theta = {theta}: {vals}")

# Inside the region of success the ideal FDR parameter has three phases:
# ~0 when signals are strong, (vartheta - r)/(2r) in between, ~1 when weak.
print("\nideal FDR at vartheta = 0.6:")
for r in (0.9, 0.3, 0.15):
    fdr = ideal_fdr(0.6, r)
    print(f"  r = {r}: phase {fdr.phase}, leading value {fdr.value:.2f}")

print("\nregion labels:")
for point, mode in [(PhasePoint(0.6, 0.05), "detection"),
                    (PhasePoint(0.6, 0.30), "detection"),
                    (PhasePoint(0.45, 0.12, theta=0.15), "classification"),
                    (PhasePoint(0.45, 0.60, theta=0.15), "classification")]:
    print(f"  (vartheta={point.vartheta}, r={point.r}, theta={point.theta}) "
          f"[{mode}] -> {classify_region(point, mode)}")

# Plot-ready table: one row per vartheta grid point.
rows = boundary_table(0.15, grid_size=300)
print(f"\nboundary_table(theta=0.15, grid=300): {len(rows)} rows, "
      f"columns {list(rows[0])}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    vs = np.array([row["vartheta"] for row in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    for theta, color in ((0.0, "C0"), (0.15, "C1"), (0.3, "C2")):
        grid = np.linspace(1e-3, (1 - theta) * 0.999, 400)
        ax.plot(grid, [classification_boundary(v, theta) for v in grid],
                color=color, label=f"theta = {theta}")
    ax.plot(vs, vs, "k--", lw=0.8, label="r = vartheta")
    ax.plot(vs, vs / 3, "k:", lw=0.8, label="r = vartheta/3")
    ax.set_xlabel("vartheta (rarity)")
    ax.set_ylabel("r (strength)")
    ax.set_title("rare/weak phase boundaries")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig("phase_diagram.png", dpi=120)
    print("wrote phase_diagram.png")
