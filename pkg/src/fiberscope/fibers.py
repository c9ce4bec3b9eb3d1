"""Discretized fiber domain ``L^2(Sigma, l^2(Lambda-perp, HS))`` and its actions.

A :class:`FiberField` holds one ``M x M`` Hilbert-Schmidt block per section
point ``sigma_s`` and band index ``n``; the block stands for
``T f(sigma_s)(n)``, i.e. the Plancherel transform at ``sigma_s + n/c`` with
the weight ``|sigma_s + n/c|^(d/2)`` already applied.  Fibers vanish outside
the band.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidResidueError, ShapeError
from .lattice import ResidueSystem, SectionGrid
from .schrodinger import GroupElement, RepGrid, apply_rep, pfaffian_weight

FIBF_MAGIC = b"FIBF"
FIBF_VERSION = 1


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``tr(B* A)``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2:
        raise ShapeError(f"HS inner product needs equal square shapes, got {A.shape} and {B.shape}")
    return complex(np.trace(B.conj().T @ A))


@dataclass(frozen=True, eq=False)
class FiberField:
    grid: SectionGrid
    residues: ResidueSystem
    rep_grid: RepGrid
    blocks: np.ndarray

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=complex)
        want = (self.grid.num_points, self.residues.band_size, self.rep_grid.M, self.rep_grid.M)
        if blocks.shape != want:
            raise ShapeError(f"blocks have shape {blocks.shape}, expected {want}")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    # geometry -------------------------------------------------------------
    @property
    def shape(self):
        return self.blocks.shape

    @property
    def d(self) -> int:
        return self.rep_grid.d

    @property
    def frequencies(self) -> np.ndarray:
        """``sigma_s + n/c`` for every block, shape ``(S, band)``."""
        dual = 1.0 / self.grid.center_spacing
        return self.grid.points[:, None] + self.residues.band[None, :] * dual

    def compatible(self, other: "FiberField") -> bool:
        return (self.grid == other.grid and self.residues == other.residues
                and self.rep_grid == other.rep_grid)

    def _check(self, other):
        if not isinstance(other, FiberField) or not self.compatible(other):
            raise ShapeError("fiber fields live on different grids")

    def with_blocks(self, blocks) -> "FiberField":
        return FiberField(self.grid, self.residues, self.rep_grid, blocks)

    def zeros_like(self) -> "FiberField":
        return self.with_blocks(np.zeros(self.shape, dtype=complex))

    # vector-space structure -------------------------------------------------
    def __add__(self, other):
        self._check(other)
        return self.with_blocks(self.blocks + other.blocks)

    def __sub__(self, other):
        self._check(other)
        return self.with_blocks(self.blocks - other.blocks)

    def __mul__(self, scalar):
        return self.with_blocks(self.blocks * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_blocks(-self.blocks)

    def block(self, s: int, n: int) -> np.ndarray:
        return self.blocks[s, self.residues.index_of(n)]

    def fiber(self, s: int) -> np.ndarray:
        """Flattened fiber at ``sigma_s`` as a vector of length ``band * M**2``."""
        return self.blocks[s].reshape(-1)

    def fibers(self) -> np.ndarray:
        return self.blocks.reshape(self.grid.num_points, -1)

    def block_norms(self) -> np.ndarray:
        """HS norm of every block, shape ``(S, band)``."""
        return np.sqrt(np.sum(np.abs(self.blocks) ** 2, axis=(2, 3)))

    def inner(self, other: "FiberField") -> complex:
        self._check(other)
        per_block = np.einsum("sbij,sbij->sb", self.blocks, other.blocks.conj())
        return complex(per_block.sum() * self.grid.cell_measure)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.blocks) ** 2) * self.grid.cell_measure)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))


# actions -------------------------------------------------------------------

def central_modulate(F: FiberField, theta: float) -> FiberField:
    """Action of the central translation by ``theta``: multiply each block by
    ``exp(2 pi i (sigma_s + n/c) theta)``."""
    phase = np.exp(2j * np.pi * F.frequencies * theta)
    return F.with_blocks(F.blocks * phase[:, :, None, None])


def gamma_translate(F: FiberField, gamma: GroupElement) -> FiberField:
    """Left-compose every block with ``pi_{sigma_s + n/c}(gamma)``."""
    return F.with_blocks(apply_rep(F.frequencies, gamma, F.rep_grid, F.blocks))


def mask(F: FiberField, j: int) -> FiberField:
    """Keep only blocks whose band index is congruent to ``j`` mod ``N``."""
    N = F.residues.modulus
    if int(j) != j or not 0 <= j < N:
        raise InvalidResidueError(f"residue {j} is not in {{0, ..., {N - 1}}}")
    keep = F.residues.class_mask(j)
    return F.with_blocks(np.where(keep[None, :, None, None], F.blocks, 0))


def masks(F: FiberField) -> list[FiberField]:
    return [mask(F, j) for j in range(F.residues.modulus)]


# synthesis -----------------------------------------------------------------

SYNTH_KINDS = ("random", "residue", "rank-one", "zero", "file")


def _support(residues: ResidueSystem, allowed) -> np.ndarray:
    if allowed is None:
        return np.ones(residues.band_size, dtype=bool)
    keep = np.zeros(residues.band_size, dtype=bool)
    for j in allowed:
        if not 0 <= int(j) < residues.modulus:
            raise InvalidResidueError(f"residue {j} is not in {{0, ..., {residues.modulus - 1}}}")
        keep |= residues.class_mask(int(j))
    return keep


def _cnormal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def synthesize(kind: str, grid: SectionGrid, residues: ResidueSystem, rep_grid: RepGrid,
               seed=0, *, residue=None, support=None, path=None) -> FiberField:
    """Build a fiber field of a given kind.

    Args:
        kind: ``random`` (i.i.d. complex Gaussian blocks), ``residue``
            (random blocks on the class of ``residue`` only), ``rank-one``
            (every nonzero block is ``u v*``), ``zero``, or ``file``
            (read the FIBF file at ``path``).
        seed: anything accepted by :func:`numpy.random.default_rng`.
        residue: residue class for ``kind='residue'``.
        support: optional iterable of residue classes restricting the
            nonzero blocks of ``random`` and ``rank-one`` fields.

    The Plancherel weight ``|sigma + n/c|^(d/2)`` is applied to every block.
    """
    if kind == "file":
        F = load_fiber_field(path)
        if not (F.grid == grid and F.residues == residues and F.rep_grid == rep_grid):
            raise ShapeError(f"fiber field in {path} does not match the configured grids")
        return F
    if kind not in SYNTH_KINDS:
        raise InvalidConfigError(f"unknown synthesizer kind {kind!r}")
    rng = np.random.default_rng(seed)
    S, B, M = grid.num_points, residues.band_size, rep_grid.M
    if kind == "zero":
        blocks = np.zeros((S, B, M, M), dtype=complex)
    elif kind == "rank-one":
        u = _cnormal(rng, (S, B, M))
        v = _cnormal(rng, (S, B, M))
        blocks = u[..., :, None] * v.conj()[..., None, :]
    else:
        blocks = _cnormal(rng, (S, B, M, M))
    if kind == "residue":
        if residue is None:
            raise InvalidConfigError("kind 'residue' needs a residue class")
        keep = _support(residues, [residue])
    else:
        keep = _support(residues, support)
    freqs = grid.points[:, None] + residues.band[None, :] / grid.center_spacing
    weight = pfaffian_weight(freqs, rep_grid.d)
    blocks = np.where(keep[None, :, None, None], blocks * weight[:, :, None, None], 0)
    return FiberField(grid, residues, rep_grid, blocks)


# binary I/O ----------------------------------------------------------------

_FIBF_HEADER = struct.Struct("<4s6q2d")


def save_fiber_field(F: FiberField, path) -> None:
    """Write ``F`` in the little-endian FIBF layout."""
    header = _FIBF_HEADER.pack(FIBF_MAGIC, FIBF_VERSION, F.d, F.grid.num_points,
                               F.residues.modulus, F.residues.band_half_width, F.rep_grid.M,
                               float(F.rep_grid.L), float(F.grid.center_spacing))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(F.blocks, dtype="<c16").tobytes())


def load_fiber_field(path) -> FiberField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _FIBF_HEADER.size:
        raise ShapeError(f"{path}: file too short for a FIBF header")
    magic, version, d, S, N, K, M, L, c = _FIBF_HEADER.unpack_from(raw)
    if magic != FIBF_MAGIC:
        raise ShapeError(f"{path}: bad magic {magic!r}")
    if version != FIBF_VERSION:
        raise ShapeError(f"{path}: unsupported FIBF version {version}")
    grid = SectionGrid(S, c)
    residues = ResidueSystem(N, K)
    rep_grid = RepGrid(M, L, d)
    count = S * residues.band_size * M * M
    if (len(raw) - _FIBF_HEADER.size) % 16:
        raise ShapeError(f"{path}: truncated body ({len(raw) - _FIBF_HEADER.size} bytes)")
    body = np.frombuffer(raw, dtype="<c16", offset=_FIBF_HEADER.size)
    if body.size != count:
        raise ShapeError(f"{path}: expected {count} complex values, found {body.size}")
    return FiberField(grid, residues, rep_grid, body.reshape(S, residues.band_size, M, M).astype(complex))
