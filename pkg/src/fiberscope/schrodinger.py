"""Heisenberg group arithmetic and discretized Schroedinger representations.

Group elements use exponential coordinates ``(x, y, w)`` with the polarized
law ``(x, y, w)(x', y', w') = (x + x', y + y', w + w' + x.y')``, under which
``pi_lam(x, y, w) f(v) = exp(2 pi i lam w) exp(-2 pi i lam y.v) f(v - x)`` is a
homomorphism.

L^2(R^d) is modelled by a periodic grid of ``m`` points per axis on a window
of length ``L``; translations act as cyclic shifts, so the matrices are
exactly unitary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CrossSectionError, GridMismatchError, InvalidConfigError

_INT_TOL = 1e-9


def _as_vec(v, d=None):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1 or (d is not None and arr.size != d):
        raise InvalidConfigError(f"expected a {d}-vector, got {v!r}")
    return arr


def _nearest_int(value: float, what: str, exc=InvalidConfigError) -> int:
    k = round(value)
    if abs(value - k) > _INT_TOL * max(1.0, abs(value)):
        raise exc(f"{what} is not an integer ({value!r})")
    return int(k)


@dataclass(frozen=True)
class GroupElement:
    x: np.ndarray
    y: np.ndarray
    w: float = 0.0

    def __post_init__(self):
        x = _as_vec(self.x)
        y = _as_vec(self.y, x.size)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", float(self.w))

    @classmethod
    def identity(cls, d: int = 1) -> "GroupElement":
        return cls(np.zeros(d), np.zeros(d), 0.0)

    @classmethod
    def central(cls, w: float, d: int = 1) -> "GroupElement":
        return cls(np.zeros(d), np.zeros(d), w)

    @property
    def d(self) -> int:
        return self.x.size

    def inverse(self) -> "GroupElement":
        return GroupElement(-self.x, -self.y, -self.w + float(self.x @ self.y))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_multiply(self, other)

    def as_tuple(self):
        return (self.x.tolist(), self.y.tolist(), self.w)


def group_multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.x + h.x, g.y + h.y, g.w + h.w + float(g.x @ h.y))


@dataclass(frozen=True)
class RepGrid:
    """Periodic sample grid for L^2(R^d).

    Attributes:
        M: total dimension of the discretized space (``m**d``).
        L: window length per axis.
        d: number of axes.
    """

    M: int
    L: float
    d: int = 1

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidConfigError(f"M must be a positive integer, got {self.M}")
        if not self.L > 0:
            raise InvalidConfigError(f"L must be positive, got {self.L}")
        m = round(self.M ** (1.0 / self.d))
        if m ** self.d != self.M:
            raise InvalidConfigError(f"M={self.M} is not a perfect {self.d}-th power")

    @property
    def points_per_axis(self) -> int:
        return round(self.M ** (1.0 / self.d))

    @property
    def step(self) -> float:
        return self.L / self.points_per_axis

    @property
    def axis_points(self) -> np.ndarray:
        return -self.L / 2 + np.arange(self.points_per_axis) * self.step

    @property
    def points(self) -> np.ndarray:
        """All sample points, shape ``(M, d)``, row-major over the axes."""
        axes = np.meshgrid(*([self.axis_points] * self.d), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def shift_of(self, x) -> np.ndarray:
        """Integer cyclic shift per axis realizing the translation ``x``."""
        x = _as_vec(x, self.d)
        return np.array([_nearest_int(xi / self.step, f"translation {xi} / step {self.step}",
                                      GridMismatchError) for xi in x])


@dataclass(frozen=True)
class GammaSet:
    """Finite set of translations ``(a m, b n, 0)`` containing the identity."""

    a: float
    b: float
    index_pairs: tuple
    d: int = 1

    def __post_init__(self):
        pairs = []
        for m, n in self.index_pairs:
            m = tuple(int(v) for v in np.atleast_1d(m))
            n = tuple(int(v) for v in np.atleast_1d(n))
            if len(m) != self.d or len(n) != self.d:
                raise InvalidConfigError(f"index pair {(m, n)} does not have dimension {self.d}")
            pairs.append((m, n))
        object.__setattr__(self, "index_pairs", tuple(pairs))
        problems = gamma_problems(self.a, self.b, pairs, self.d)
        if problems:
            raise InvalidConfigError("; ".join(problems))

    @property
    def k(self) -> int:
        return len(self.index_pairs)

    @property
    def elements(self) -> list[GroupElement]:
        return [GroupElement(self.a * np.array(m, float), self.b * np.array(n, float), 0.0)
                for m, n in self.index_pairs]

    def check_grid(self, grid: RepGrid) -> None:
        for g in self.elements:
            grid.shift_of(g.x)


def gamma_problems(a, b, pairs, d=1) -> list[str]:
    out = []
    if a == 0 or b == 0:
        out.append("a and b must be nonzero")
    ab = a * b
    if abs(ab - round(ab)) > _INT_TOL * max(1.0, abs(ab)):
        out.append("a*b not integer")
    zero = tuple([0] * d)
    if (zero, zero) not in [tuple(map(tuple, p)) for p in pairs]:
        out.append("gamma must contain the identity pair (0,0) "
                   "(identity hypothesis of the containment characterization)")
    if len(set(tuple(map(tuple, p)) for p in pairs)) != len(pairs):
        out.append("gamma index pairs must be distinct")
    return out


def pfaffian_weight(sigma, d: int = 1):
    """``|Pf(sigma)|^(1/2) = |sigma|^(d/2)``; works elementwise on arrays."""
    s = np.asarray(sigma, dtype=float)
    if np.any(s == 0):
        raise CrossSectionError("sigma = 0 lies outside the Plancherel cross-section")
    out = np.abs(s) ** (d / 2.0)
    return float(out) if out.ndim == 0 else out


def rep_matrix(lam: float, g: GroupElement, grid: RepGrid) -> np.ndarray:
    """Dense matrix of ``pi_lam(g)`` in the grid basis."""
    if lam == 0:
        raise CrossSectionError("lambda = 0 has no Schroedinger representation")
    if g.d != grid.d:
        raise InvalidConfigError(f"group element of dimension {g.d} on a {grid.d}-d grid")
    shifts = grid.shift_of(g.x)
    m = grid.points_per_axis
    v = grid.axis_points
    out = np.ones((1, 1), dtype=complex)
    for axis in range(grid.d):
        perm = np.roll(np.eye(m), shifts[axis], axis=0)
        mod = np.exp(-2j * np.pi * lam * g.y[axis] * v)
        out = np.kron(out, mod[:, None] * perm)
    return np.exp(2j * np.pi * lam * g.w) * out


def apply_rep(lams: np.ndarray, g: GroupElement, grid: RepGrid, blocks: np.ndarray) -> np.ndarray:
    """Left-multiply ``blocks[..., M, M]`` by ``pi_lam(g)``, one ``lam`` per block.

    ``lams`` must broadcast against ``blocks.shape[:-2]``.  Equivalent to
    ``rep_matrix(lam, g, grid) @ block`` without forming the matrices.
    """
    lams = np.asarray(lams, dtype=float)
    shifts = grid.shift_of(g.x)
    m = grid.points_per_axis
    lead = blocks.shape[:-2]
    cols = blocks.shape[-1]
    out = blocks.reshape(lead + (m,) * grid.d + (cols,))
    nlead = len(lead)
    for axis in range(grid.d):
        if shifts[axis] % m:
            out = np.roll(out, int(shifts[axis]), axis=nlead + axis)
    # phase of row r: exp(-2 pi i lam y.v_r)
    pts = grid.points
    yv = pts @ g.y
    phase = np.exp(2j * np.pi * lams[..., None] * (g.w - yv))
    out = out.reshape(lead + (grid.M, cols))
    return out * np.broadcast_to(phase, lead + (grid.M,))[..., None]
