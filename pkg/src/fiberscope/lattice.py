"""Lattices in the center, their annihilators, interval sections and tiling.

The center is the real line.  ``Lambda = c Z`` with annihilator ``(1/c) Z``;
the refinement ``Theta = (c/N) Z`` has annihilator ``(N/c) Z``.  Sections are
the canonical intervals ``Sigma = [0, 1/c)``, ``J = {0, ..., N-1}`` and
``D = [0, N/c)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError


def annihilator(lattice_spacing: float) -> float:
    """Spacing of the annihilator of ``spacing * Z`` inside the dual line."""
    if not lattice_spacing > 0:
        raise InvalidConfigError(f"lattice spacing must be positive, got {lattice_spacing}")
    return 1.0 / lattice_spacing


@dataclass(frozen=True)
class LatticeConfig:
    center_spacing: float = 1.0
    refinement: int = 1
    d: int = 1

    def __post_init__(self):
        if not self.center_spacing > 0:
            raise InvalidConfigError(f"center_spacing must be positive, got {self.center_spacing}")
        if int(self.refinement) != self.refinement or self.refinement < 1:
            raise InvalidConfigError(f"refinement must be an integer >= 1, got {self.refinement}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidConfigError(f"d must be a positive integer, got {self.d}")

    @property
    def theta_spacing(self) -> float:
        return self.center_spacing / self.refinement

    @property
    def dual_spacing(self) -> float:
        """Spacing of Lambda-perp."""
        return annihilator(self.center_spacing)

    @property
    def theta_dual_spacing(self) -> float:
        """Spacing of Theta-perp, equal to ``N`` times the spacing of Lambda-perp."""
        return annihilator(self.theta_spacing)

    @property
    def section_measure(self) -> float:
        return 1.0 / self.center_spacing


@dataclass(frozen=True)
class SectionGrid:
    num_points: int
    center_spacing: float = 1.0

    @property
    def cell_measure(self) -> float:
        return (1.0 / self.center_spacing) / self.num_points

    @property
    def points(self) -> np.ndarray:
        # cell centres keep sigma = 0 (Pf = 0) off the grid
        return (np.arange(self.num_points) + 0.5) * self.cell_measure

    @property
    def measure(self) -> float:
        return self.num_points * self.cell_measure


@dataclass(frozen=True)
class ResidueSystem:
    """Residue representatives of ``Lambda-perp / Theta-perp`` plus the band.

    ``residues`` is normally ``(0, ..., N-1)``; it is kept explicit so that
    malformed systems can be fed to :func:`tiling_check`.
    """

    modulus: int
    band_half_width: int
    residues: tuple = field(default=None)

    def __post_init__(self):
        if self.residues is None:
            object.__setattr__(self, "residues", tuple(range(self.modulus)))
        else:
            object.__setattr__(self, "residues", tuple(int(j) for j in self.residues))

    @property
    def band(self) -> np.ndarray:
        kn = self.band_half_width * self.modulus
        return np.arange(-kn, kn)

    @property
    def band_size(self) -> int:
        return 2 * self.band_half_width * self.modulus

    def index_of(self, n: int) -> int:
        """Position of dual index ``n`` inside :attr:`band`."""
        return int(n) + self.band_half_width * self.modulus

    def class_members(self, j: int) -> np.ndarray:
        band = self.band
        return band[np.mod(band, self.modulus) == np.mod(j, self.modulus)]

    def class_mask(self, j: int) -> np.ndarray:
        return np.mod(self.band, self.modulus) == np.mod(j, self.modulus)


def build_sections(config: LatticeConfig, S: int, K: int) -> tuple[SectionGrid, ResidueSystem]:
    if int(S) != S or S < 1:
        raise InvalidConfigError(f"S must be a positive integer, got {S}")
    if int(K) != K or K < 1:
        raise InvalidConfigError(f"K must be a positive integer, got {K}")
    grid = SectionGrid(int(S), config.center_spacing)
    residues = ResidueSystem(config.refinement, int(K))
    return grid, residues


@dataclass
class TilingReport:
    holds: bool
    covered_cells: int
    window_cells: int
    violations: list

    def to_dict(self):
        return {
            "holds": self.holds,
            "covered_cells": self.covered_cells,
            "window_cells": self.window_cells,
            "violations": self.violations,
        }


def tiling_check(grid: SectionGrid, residues: ResidueSystem) -> TilingReport:
    """Check that the translates ``Sigma + j + Theta-perp`` tile the band window.

    Works on integer cell indices: cell ``n*S + s`` is the interval
    ``[n/c + s*dx, n/c + (s+1)*dx)``.  Every window cell must be hit exactly
    once.
    """
    S = grid.num_points
    N = residues.modulus
    kn = residues.band_half_width * N
    lo = -kn * S
    counts = np.zeros(2 * kn * S, dtype=np.int64)
    covered = 0
    for j in residues.residues:
        for n in residues.class_members(j):
            idx = n * S + np.arange(S) - lo
            counts[idx] += 1
            covered += S
    dx = grid.cell_measure
    dual = 1.0 / grid.center_spacing
    violations = []
    for pos in np.flatnonzero(counts != 1):
        cell = int(pos) + lo
        n, s = divmod(cell, S)
        start = n * dual + s * dx
        violations.append({
            "kind": "gap" if counts[pos] == 0 else "overlap",
            "multiplicity": int(counts[pos]),
            "band_index": int(n),
            "cell": int(s),
            "interval": [start, start + dx],
        })
    return TilingReport(not violations, covered, counts.size, violations)
