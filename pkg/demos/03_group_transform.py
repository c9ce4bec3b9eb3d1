"""
From functions on the group to fibers
=====================================

Sample a windowed Gabor-Gaussian on the Heisenberg group, push it through the
fiberization, and check the two things it must do: keep the norm and turn
left translations into block multiplications.
"""

from pathlib import Path

from fiberscope import (GroupElement, LatticeConfig, RepGrid, aligned_box, build_sections,
                        gabor_gaussian, intertwining_check, plancherel_check,
                        save_sampled_function)

grid, residues = build_sections(LatticeConfig(1.0, 1), 16, 4)
box = dict(x_extent=4.2, y_extent=0.6, w_extent=4.0, hy=0.05, hw=0.1)

###############################################################################
# Norm preservation improves quickly with the representation grid size, once
# the kernel width ``~1/(beta |lambda|)`` fits in the window and is resolved.

for M in (8, 16, 32):
    rep = RepGrid(M, 8.0)
    f = aligned_box(gabor_gaussian(), rep, **box)
    print(f"M={M:2d}  relative Plancherel error {plancherel_check(f, grid, residues, rep):.2e}")

###############################################################################
# Intertwining: a central translation is a pure phase, an on-grid translation
# is a permutation times a modulation.

rep = RepGrid(16, 8.0)
f = aligned_box(gabor_gaussian(), rep, **box)
print("central, lambda=1:", intertwining_check(f, GroupElement.identity(), 1, grid, residues, rep))
print("gamma=(1,1,0)    :", intertwining_check(f, GroupElement(1.0, 1.0, 0.0), 0, grid, residues, rep))

###############################################################################
# Save the samples so the CLI can fiberize them (see ``configs/transform.cfg``).

out = Path(__file__).resolve().parent.parent / "configs" / "gabor.hsmp"
save_sampled_function(f, out)
print("wrote", out)
