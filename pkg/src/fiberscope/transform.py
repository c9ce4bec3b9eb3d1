"""Fiberization of sampled functions on the first Heisenberg group.

For ``lam = sigma_s + n/c`` the operator ``F f(lam)`` acts on L^2(R) through
the kernel

    K(v, u) = int int f(v - u, y, w) exp(2 pi i lam w) exp(-2 pi i lam y v) dy dw,

which is evaluated with plain Riemann sums: the ``w`` sum at frequency
``lam``, the ``y`` sum at frequencies ``lam v_m`` and ``x = v_m - v_m'`` read
directly off the sample grid (``x`` steps equal the representation step).
The block is ``h K(v_m, v_m') |lam|^(1/2)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError, InvalidConfigError, ShapeError
from .fibers import FiberField, central_modulate, gamma_translate
from .lattice import ResidueSystem, SectionGrid
from .schrodinger import GroupElement, RepGrid, _nearest_int, pfaffian_weight

HSMP_MAGIC = b"HSMP"
HSMP_VERSION = 1
_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples of ``f(x, y, w)`` on a regular box.

    ``samples[i, j, k] = f(x0 + i hx, y0 + j hy, w0 + k hw)``.  ``source``
    optionally keeps the callable the samples came from so translated copies
    can be resampled exactly instead of interpolated.
    """

    samples: np.ndarray
    steps: tuple
    origin: tuple
    source: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        if arr.ndim != 3:
            raise ShapeError(f"samples must be 3-d (x, y, w), got shape {arr.shape}")
        if len(self.steps) != 3 or min(self.steps) <= 0:
            raise InvalidConfigError(f"steps must be three positive numbers, got {self.steps}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "steps", tuple(float(s) for s in self.steps))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @classmethod
    def from_callable(cls, func, steps, origin, shape) -> "SampledFunction":
        axes = [o + h * np.arange(n) for o, h, n in zip(origin, steps, shape)]
        X, Y, W = np.meshgrid(*axes, indexing="ij")
        return cls(func(X, Y, W), steps, origin, func)

    @property
    def shape(self):
        return self.samples.shape

    @property
    def axes(self):
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.steps, self.shape)]

    @property
    def cell_volume(self) -> float:
        hx, hy, hw = self.steps
        return hx * hy * hw

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.cell_volume)

    def __add__(self, other):
        if self.steps != other.steps or self.origin != other.origin or self.shape != other.shape:
            raise ShapeError("sampled functions live on different boxes")
        return SampledFunction(self.samples + other.samples, self.steps, self.origin)

    def __mul__(self, scalar):
        return SampledFunction(self.samples * scalar, self.steps, self.origin)

    __rmul__ = __mul__


def aligned_box(func, rep_grid: RepGrid, x_extent: float, y_extent: float, w_extent: float,
                hy: float, hw: float) -> SampledFunction:
    """Sample ``func`` on a symmetric box whose x-grid is the representation lattice."""
    h = rep_grid.step
    nx = int(np.ceil(x_extent / h))
    ny = int(np.ceil(y_extent / hy))
    nw = int(np.ceil(w_extent / hw))
    return SampledFunction.from_callable(
        func, (h, hy, hw), (-nx * h, -ny * hy, -nw * hw), (2 * nx + 1, 2 * ny + 1, 2 * nw + 1))


def gabor_gaussian(alpha=1.2, beta=0.3, delta=2.0, omega=2.0):
    """Real Gaussian window modulated by ``cos(2 pi omega w)`` in the central variable.

    Keeping the central frequency away from 0 keeps the kernel width in ``v``
    (about ``1/(beta |lam|)``) inside a small window at every relevant ``lam``.
    """
    def f(x, y, w):
        return (np.exp(-np.pi * ((x / alpha) ** 2 + (y / beta) ** 2 + (w / delta) ** 2))
                * np.cos(2 * np.pi * omega * w))
    return f


def _x_offset(f: SampledFunction, rep_grid: RepGrid) -> int:
    h = rep_grid.step
    if abs(f.steps[0] - h) > 1e-12 * h:
        raise GridMismatchError(f"x step {f.steps[0]} differs from representation step {h}")
    return _nearest_int(f.origin[0] / h, f"x origin {f.origin[0]} / step {h}", GridMismatchError)


def fiberize(f: SampledFunction, grid: SectionGrid, residues: ResidueSystem,
             rep_grid: RepGrid) -> FiberField:
    """Weighted, periodized Plancherel transform of sampled ``f`` (``d = 1``)."""
    if rep_grid.d != 1:
        raise InvalidConfigError("the group-domain transform is implemented for d = 1 only")
    i0 = _x_offset(f, rep_grid)
    nx, ny, nw = f.shape
    _, hy, hw = f.steps
    xs, ys, ws = f.axes
    M, h = rep_grid.M, rep_grid.step
    v = rep_grid.axis_points
    lams = (grid.points[:, None] + residues.band[None, :] / grid.center_spacing).ravel()

    diff = np.arange(M)[:, None] - np.arange(M)[None, :]
    xi = diff - i0
    valid = (xi >= 0) & (xi < nx)
    xi = np.clip(xi, 0, nx - 1)
    rows = np.broadcast_to(np.arange(M)[:, None], (M, M))

    flat = f.samples.reshape(nx * ny, nw)
    out = np.zeros((lams.size, M, M), dtype=complex)
    chunk = max(1, _CHUNK // max(1, nx * ny))
    for start in range(0, lams.size, chunk):
        lam = lams[start:start + chunk]
        G = flat @ (np.exp(2j * np.pi * np.outer(ws, lam)) * hw)  # (nx*ny, c)
        G = G.reshape(nx, ny, -1)
        E = np.exp(-2j * np.pi * lam[:, None, None] * ys[None, :, None] * v[None, None, :]) * hy
        H = np.einsum("xyc,cym->cxm", G, E)  # H[c, i, m] = K(v_m, v_m - x_i)
        blocks = H[:, xi, rows] * valid
        out[start:start + chunk] = blocks * (h * pfaffian_weight(lam, 1))[:, None, None]
    return FiberField(grid, residues, rep_grid,
                      out.reshape(grid.num_points, residues.band_size, M, M))


def plancherel_check(f: SampledFunction, grid, residues, rep_grid) -> float:
    """Relative gap between ``|fiberize(f)|^2`` and the Riemann-sum ``|f|^2``."""
    nf = f.norm_sq()
    if nf == 0:
        return 0.0
    return abs(fiberize(f, grid, residues, rep_grid).norm_sq() - nf) / nf


def _fractional_shift(arr: np.ndarray, shift: np.ndarray, axis: int = -1) -> np.ndarray:
    """Band-limited resampling ``out[k] = arr(k + shift)`` along the last axis.

    ``shift`` (in samples) broadcasts against ``arr.shape[:-1]``.  The caller
    pads with zeros so the periodic wrap of the FFT never reaches the data.
    """
    n = arr.shape[axis]
    freq = np.fft.fftfreq(n)
    phase = np.exp(2j * np.pi * freq * np.asarray(shift)[..., None])
    return np.fft.ifft(np.fft.fft(arr, axis=axis) * phase, axis=axis)


def left_translate(f: SampledFunction, g: GroupElement) -> SampledFunction:
    """Samples of ``L_g f(p) = f(g^{-1} p)`` on a box containing the translated support.

    ``g^{-1} (x, y, w) = (x - gx, y - gy, w - gw - gx (y - gy))``: the x and y
    origins move by ``gx`` and ``gy`` with the samples unchanged, while each
    y-row is shifted in w by ``gw + gx y_old``.  With a stored ``source`` the
    shifted samples are evaluated exactly; otherwise the w shift is a
    band-limited FFT resampling of zero-padded rows.
    """
    if g.d != 1:
        raise InvalidConfigError("left_translate is implemented for d = 1 only")
    gx, gy, gw = float(g.x[0]), float(g.y[0]), g.w
    hx, hy, hw = f.steps
    xs, ys, ws = f.axes
    pad = int(np.ceil(abs(gx) * max(abs(ys[0]), abs(ys[-1])) / hw)) + 2 if gx else 0
    whole = round(gw / hw)
    origin = (f.origin[0] + gx, f.origin[1] + gy, f.origin[2] + (whole - pad) * hw)
    shape = (f.shape[0], f.shape[1], f.shape[2] + 2 * pad)
    inv = g.inverse()

    if f.source is not None:
        src = f.source

        def moved(X, Y, W):
            return src(X + inv.x[0], Y + inv.y[0], W + inv.w + inv.x[0] * Y)
        return SampledFunction.from_callable(moved, f.steps, origin, shape)

    # row j needs f_j(w0 + (k - pad) hw + delta_j) with delta_j below
    delta = whole * hw - gw - gx * ys
    guard = pad + 8
    width = f.shape[2] + 2 * pad + 2 * guard
    buf = np.zeros(f.shape[:2] + (width,), dtype=complex)
    buf[:, :, pad + guard:pad + guard + f.shape[2]] = f.samples
    moved = _fractional_shift(buf, delta[None, :] / hw)
    return SampledFunction(moved[:, :, guard:guard + shape[2]], f.steps, origin)


def intertwining_check(f: SampledFunction, gamma: GroupElement, lambda_central, grid, residues,
                       rep_grid) -> float:
    """Discrepancy between ``T(L_{gamma lam} f)`` and ``e^{2 pi i sigma lam} pi~(gamma) T f``.

    Returned as ``max_{s,n} |difference block|_HS / max_{s,n} |block|_HS``.
    """
    rep_grid.shift_of(gamma.x)
    g = gamma * GroupElement.central(float(lambda_central), gamma.d)
    lhs = fiberize(left_translate(f, g), grid, residues, rep_grid)
    base = fiberize(f, grid, residues, rep_grid)
    rhs = central_modulate(gamma_translate(base, gamma), float(lambda_central))
    scale = rhs.block_norms().max(initial=0.0)
    if scale == 0:
        return float((lhs - rhs).block_norms().max(initial=0.0))
    return float((lhs - rhs).block_norms().max() / scale)


_HSMP_HEADER = struct.Struct("<4s4q6d")


def save_sampled_function(f: SampledFunction, path) -> None:
    nx, ny, nw = f.shape
    with open(path, "wb") as fh:
        fh.write(_HSMP_HEADER.pack(HSMP_MAGIC, HSMP_VERSION, nx, ny, nw, *f.steps, *f.origin))
        fh.write(np.ascontiguousarray(f.samples, dtype="<c16").tobytes())


def load_sampled_function(path) -> SampledFunction:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HSMP_HEADER.size:
        raise ShapeError(f"{path}: file too short for an HSMP header")
    magic, version, nx, ny, nw, hx, hy, hw, x0, y0, w0 = _HSMP_HEADER.unpack_from(raw)
    if magic != HSMP_MAGIC:
        raise ShapeError(f"{path}: bad magic {magic!r}")
    if version != HSMP_VERSION:
        raise ShapeError(f"{path}: unsupported HSMP version {version}")
    if (len(raw) - _HSMP_HEADER.size) % 16:
        raise ShapeError(f"{path}: truncated body ({len(raw) - _HSMP_HEADER.size} bytes)")
    body = np.frombuffer(raw, dtype="<c16", offset=_HSMP_HEADER.size)
    if body.size != nx * ny * nw:
        raise ShapeError(f"{path}: expected {nx * ny * nw} samples, found {body.size}")
    return SampledFunction(body.reshape(nx, ny, nw).astype(complex), (hx, hy, hw), (x0, y0, w0))
