"""Range functions, dimension functions and subspace-membership residuals.

At each section point the range ``J(sigma_s)`` is the span of the flattened
fibers of ``gamma_translate(phi, gamma)`` over generators ``phi`` and
translations ``gamma``.  Bases come from a thin SVD; singular values below
``tol_rank`` times the leading one are dropped.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .fibers import FiberField, gamma_translate
from .schrodinger import GammaSet

TOL_RANK = 1e-8
TOL_MEMBER = 1e-8
EPS_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class RangeBasis:
    """Orthonormal basis of ``J(sigma_s)`` for every grid index ``s``.

    ``bases[s]`` has shape ``(rank_s, D)`` with orthonormal rows;
    ``singular_values[s]`` holds the retained singular values.
    """

    sigmas: np.ndarray
    bases: tuple
    singular_values: tuple
    tol_rank: float
    dim: int
    # largest discarded singular value relative to the leading one, per s
    dropped: tuple = ()

    def project(self, s: int, v: np.ndarray) -> np.ndarray:
        Q = self.bases[s]
        return Q.T @ (Q.conj() @ v)

    @property
    def ranks(self) -> np.ndarray:
        return np.array([b.shape[0] for b in self.bases], dtype=int)

    def rank_margin_ok(self, factor: float = 10.0) -> bool:
        """True when every rank decision clears ``tol_rank`` by ``factor`` on both sides."""
        for sv, drop in zip(self.singular_values, self.dropped):
            if sv.size and sv[-1] / sv[0] <= factor * self.tol_rank:
                return False
            if drop >= self.tol_rank / factor:
                return False
        return True


@dataclass(frozen=True, eq=False)
class DimensionFunction:
    sigmas: np.ndarray
    ranks: np.ndarray

    def integral(self, cell_measure: float) -> float:
        return float(np.sum(self.ranks) * cell_measure)


def spanning_vectors(generators, gamma: GammaSet) -> np.ndarray:
    """Flattened fibers of every translated generator, shape ``(S, n*k, D)``.

    Ordering is generator-major: index ``i*k + t`` is generator ``i``
    translated by ``gamma.elements[t]``.
    """
    generators = list(generators)
    if not generators:
        raise ShapeError("spanning_vectors needs at least one generator to fix the shape")
    first = generators[0]
    for g in generators[1:]:
        if not first.compatible(g):
            raise ShapeError("generators live on different grids")
    vecs = [gamma_translate(phi, el).fibers() for phi in generators for el in gamma.elements]
    return np.stack(vecs, axis=1)


def basis_from_vectors(vectors: np.ndarray, sigmas, tol_rank: float = TOL_RANK) -> RangeBasis:
    """SVD-derived bases for stacks of row vectors, shape ``(S, count, D)``."""
    S, count, D = vectors.shape
    bases, svals, dropped = [], [], []
    if count == 0:
        empty = np.zeros((0, D), dtype=complex)
        return RangeBasis(np.asarray(sigmas), tuple([empty] * S), tuple([np.zeros(0)] * S),
                          tol_rank, D, tuple([0.0] * S))
    _, sv, vh = np.linalg.svd(vectors, full_matrices=False)
    for s in range(S):
        lead = sv[s, 0]
        r = int(np.count_nonzero(sv[s] > tol_rank * lead)) if lead > 0 else 0
        bases.append(vh[s, :r])
        svals.append(sv[s, :r])
        dropped.append(float(sv[s, r] / lead) if 0 < lead and r < sv.shape[1] else 0.0)
    return RangeBasis(np.asarray(sigmas), tuple(bases), tuple(svals), tol_rank, D, tuple(dropped))


def range_function(generators, gamma: GammaSet, tol_rank: float = TOL_RANK,
                   template: FiberField | None = None) -> RangeBasis:
    """Range function of the space generated by ``generators`` under ``gamma``.

    ``template`` supplies the grid when ``generators`` is empty.
    """
    generators = list(generators)
    if not generators:
        if template is None:
            raise ShapeError("an empty generator set needs a template field")
        vectors = np.zeros((template.grid.num_points, 0, template.fibers().shape[1]), complex)
        return basis_from_vectors(vectors, template.grid.points, tol_rank)
    if template is not None and not template.compatible(generators[0]):
        raise ShapeError("template does not match the generators")
    vectors = spanning_vectors(generators, gamma)
    return basis_from_vectors(vectors, generators[0].grid.points, tol_rank)


def dimension_function(basis: RangeBasis) -> DimensionFunction:
    return DimensionFunction(basis.sigmas, basis.ranks)


def residuals_of_vectors(vectors: np.ndarray, basis: RangeBasis) -> np.ndarray:
    """Relative residuals ``|v - P v| / |v|`` for ``vectors`` of shape ``(S, count, D)``.

    Zero vectors get residual 0.
    """
    S, count, D = vectors.shape
    if S != len(basis.bases) or D != basis.dim:
        raise ShapeError(f"vectors of shape {vectors.shape} do not match a basis of "
                         f"{len(basis.bases)} points x dimension {basis.dim}")
    out = np.zeros((S, count))
    for s in range(S):
        Q = basis.bases[s]
        V = vectors[s]
        resid = V - (V @ Q.conj().T) @ Q
        num = np.linalg.norm(resid, axis=1)
        den = np.linalg.norm(V, axis=1)
        out[s] = np.where(den > 0, num / np.maximum(den, EPS_FLOOR), 0.0)
    return out


def membership_residual(F: FiberField, basis: RangeBasis):
    """Per-``s`` membership residual of ``F`` in ``M_J`` and its maximum."""
    per_s = residuals_of_vectors(F.fibers()[:, None, :], basis)[:, 0]
    return per_s, float(per_s.max(initial=0.0))


def write_dimension_csv(dimfn: DimensionFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma", "rank"])
        for sigma, rank in zip(dimfn.sigmas, dimfn.ranks):
            writer.writerow([repr(float(sigma)), int(rank)])
