"""Extra-invariance tests for spaces generated by finitely many fiber fields.

Four independent routes decide whether the space ``W`` generated by
``generators`` under ``gamma`` and ``Lambda`` is also invariant under the
finer central lattice ``Theta = (c/N) Z``:

* :func:`test_oracle` applies the central translation by ``c/N`` directly,
* :func:`test_containment` checks that each spectral mask of ``W`` stays in ``W``,
* :func:`test_membership` checks masked-then-translated generators,
* :func:`test_dimension` compares ``dim_W`` with the sum of masked dimensions.

Grid quantification replaces "almost every sigma": a verdict fails if a
single section point fails.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionInfeasibleError, ShapeError
from .fibers import FiberField, central_modulate, gamma_translate, mask
from .ranges import (TOL_MEMBER, TOL_RANK, RangeBasis, basis_from_vectors, range_function,
                     residuals_of_vectors, spanning_vectors)
from .schrodinger import GammaSet

TOL_SUPP = 1e-10
SLACK = 1e-9
MARGIN = 10.0


@dataclass
class TestResult:
    """Verdict of one characterization together with its evidence."""

    name: str
    verdict: bool
    max_residual: float
    margin_ok: bool
    detail: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self):
        return {"verdict": self.verdict, "max_residual": self.max_residual,
                "margin_ok": self.margin_ok, **self.detail}


def _residual_result(name, residuals, tol_member, extra=None):
    worst = float(np.max(residuals, initial=0.0))
    verdict = worst < tol_member
    margin = worst < tol_member / MARGIN if verdict else worst > tol_member * MARGIN
    return TestResult(name, verdict, worst, margin, extra or {})


def _span(generators, gamma, tol_rank, template):
    basis = range_function(generators, gamma, tol_rank, template=template)
    return basis


def _theta(F: FiberField) -> float:
    return F.grid.center_spacing / F.residues.modulus


def _stack(fields, S, D):
    if not fields:
        return np.zeros((S, 0, D), dtype=complex)
    return np.stack([f.fibers() for f in fields], axis=1)


def _shape(generators, template):
    ref = generators[0] if generators else template
    if ref is None:
        raise ShapeError("an empty generator set needs a template field")
    return ref, ref.grid.num_points, ref.fibers().shape[1]


def test_oracle(generators, gamma: GammaSet, *, tol_rank=TOL_RANK, tol_member=TOL_MEMBER,
                template=None, basis: RangeBasis | None = None) -> TestResult:
    """Is ``J(sigma)`` closed under the central translation by ``c/N``?

    Every translated generator is modulated by ``exp(2 pi i (sigma + n/c) c/N)``
    and tested for membership in the unmodulated range.  ``Lambda`` already
    preserves the span, and ``c/N`` generates ``Theta`` modulo ``Lambda``.
    """
    generators = list(generators)
    ref, S, D = _shape(generators, template)
    basis = basis or _span(generators, gamma, tol_rank, template)
    theta = _theta(ref)
    moved = [central_modulate(gamma_translate(phi, g), theta)
             for phi in generators for g in gamma.elements]
    res = residuals_of_vectors(_stack(moved, S, D), basis)
    return _residual_result("oracle", res, tol_member, {"theta": theta})


def test_containment(generators, gamma: GammaSet, *, tol_rank=TOL_RANK, tol_member=TOL_MEMBER,
                     template=None, basis: RangeBasis | None = None) -> TestResult:
    """Does ``W`` contain every masked piece ``V_j``?"""
    generators = list(generators)
    ref, S, D = _shape(generators, template)
    basis = basis or _span(generators, gamma, tol_rank, template)
    pieces = [mask(gamma_translate(phi, g), j)
              for phi in generators for g in gamma.elements
              for j in range(ref.residues.modulus)]
    res = residuals_of_vectors(_stack(pieces, S, D), basis)
    per_j = res.reshape(S, -1, ref.residues.modulus).max(axis=(0, 1), initial=0.0) \
        if pieces else np.zeros(ref.residues.modulus)
    return _residual_result("containment", res, tol_member,
                            {"max_residual_per_residue": per_j.tolist()})


def test_membership(generators, gamma: GammaSet, *, tol_rank=TOL_RANK, tol_member=TOL_MEMBER,
                    template=None, basis: RangeBasis | None = None) -> TestResult:
    """Do the translated masked generators ``T(L_gamma phi^j)(sigma)`` lie in ``J(sigma)``?"""
    generators = list(generators)
    ref, S, D = _shape(generators, template)
    basis = basis or _span(generators, gamma, tol_rank, template)
    pieces = [gamma_translate(mask(phi, j), g)
              for phi in generators for j in range(ref.residues.modulus)
              for g in gamma.elements]
    res = residuals_of_vectors(_stack(pieces, S, D), basis)
    return _residual_result("membership", res, tol_member)


def masked_range(generators, gamma, j, tol_rank=TOL_RANK, template=None) -> RangeBasis:
    generators = list(generators)
    return range_function([mask(phi, j) for phi in generators], gamma, tol_rank,
                          template=template if not generators else None)


def test_dimension(generators, gamma: GammaSet, *, tol_rank=TOL_RANK, template=None,
                   basis: RangeBasis | None = None) -> TestResult:
    """Does ``dim_W(sigma)`` equal the sum over ``j`` of ``dim_{V_j}(sigma)`` everywhere?"""
    generators = list(generators)
    ref, S, D = _shape(generators, template)
    basis = basis or _span(generators, gamma, tol_rank, template)
    pieces = [masked_range(generators, gamma, j, tol_rank, template)
              for j in range(ref.residues.modulus)]
    dim_w = basis.ranks
    dim_v = np.stack([b.ranks for b in pieces], axis=0) if pieces else np.zeros((0, S), int)
    total = dim_v.sum(axis=0)
    mismatch = int(np.max(np.abs(total - dim_w), initial=0))
    margin = basis.rank_margin_ok(MARGIN) and all(b.rank_margin_ok(MARGIN) for b in pieces)
    return TestResult("dimension", bool(mismatch == 0), float(mismatch), margin,
                      {"dim_W": dim_w.tolist(), "dim_V": dim_v.tolist()})


# these are library routines, not pytest tests
for _fn in (test_oracle, test_containment, test_membership, test_dimension):
    _fn.__test__ = False


# decomposition -------------------------------------------------------------

@dataclass
class DecompositionReport:
    elements: int
    sum_exact: bool
    max_pythagoras_error: float
    components_checked: bool
    max_component_residual: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def decompose_field(f: FiberField) -> list[FiberField]:
    """Orthogonal pieces ``f_j = mask(f, j)`` with ``sum_j f_j = f``."""
    return [mask(f, j) for j in range(f.residues.modulus)]


def decompose(generators, gamma: GammaSet, *, invariant: bool | None = None, seed=0,
              random_elements=4, tol_rank=TOL_RANK, tol_member=TOL_MEMBER,
              basis: RangeBasis | None = None) -> DecompositionReport:
    """Split test elements of ``W`` along the masks and check the direct sum.

    Test elements are all translated generators plus ``random_elements``
    random combinations of them.  Components are membership-checked only for
    invariant instances (``invariant=None`` runs the oracle to decide).
    """
    generators = list(generators)
    spans = [gamma_translate(phi, g) for phi in generators for g in gamma.elements]
    rng = np.random.default_rng(seed)
    elements = list(spans)
    if spans:
        for _ in range(random_elements):
            coef = rng.standard_normal(len(spans)) + 1j * rng.standard_normal(len(spans))
            combo = spans[0].with_blocks(np.tensordot(coef, np.stack([f.blocks for f in spans]), 1))
            elements.append(combo)
    if not elements:
        return DecompositionReport(0, True, 0.0, False, 0.0, True)
    basis = basis or range_function(generators, gamma, tol_rank)
    if invariant is None:
        invariant = test_oracle(generators, gamma, tol_rank=tol_rank, tol_member=tol_member,
                                basis=basis).verdict
    sum_exact = True
    worst_pyth = 0.0
    worst_member = 0.0
    for f in elements:
        parts = decompose_field(f)
        total = parts[0].blocks.copy()
        for p in parts[1:]:
            total = total + p.blocks
        sum_exact &= bool(np.array_equal(total, f.blocks))
        nf = f.norm_sq()
        gap = abs(nf - sum(p.norm_sq() for p in parts))
        worst_pyth = max(worst_pyth, gap / nf if nf > 0 else gap)
        if invariant:
            res = residuals_of_vectors(np.stack([p.fibers() for p in parts], axis=1), basis)
            worst_member = max(worst_member, float(res.max(initial=0.0)))
    passed = sum_exact and worst_pyth < 1e-12 and (not invariant or worst_member < tol_member)
    return DecompositionReport(len(elements), sum_exact, worst_pyth, bool(invariant),
                               worst_member, passed)


# measure estimates ---------------------------------------------------------

@dataclass
class MeasureReport:
    lhs: list
    rhs: float
    rhs_integral: float
    bound: int
    lhs_ok: list
    rhs_ok: bool
    holds: bool
    advisory: bool

    def to_dict(self):
        return dict(self.__dict__)


def support_indicator(phi: FiberField, tol_supp: float = TOL_SUPP) -> np.ndarray:
    """Boolean ``(S, band)`` array marking blocks above the scale-free zero threshold."""
    norms = phi.block_norms()
    top = norms.max(initial=0.0)
    if top == 0:
        return np.zeros(norms.shape, dtype=bool)
    return norms > tol_supp * top


def measure_report(generators, gamma: GammaSet, *, invariant: bool | None = None,
                   tol_rank=TOL_RANK, tol_member=TOL_MEMBER, tol_supp=TOL_SUPP,
                   template=None, basis: RangeBasis | None = None) -> MeasureReport:
    """Support measure of each generator on ``D = [0, N/c)`` against ``int dim_W``.

    The section ``D`` is read off the band representatives ``n = 0..N-1``.
    For non-invariant inputs the report is returned with ``advisory=True``.
    """
    generators = list(generators)
    ref, S, D = _shape(generators, template)
    basis = basis or _span(generators, gamma, tol_rank, template)
    if invariant is None:
        invariant = test_oracle(generators, gamma, tol_rank=tol_rank, tol_member=tol_member,
                                template=template, basis=basis).verdict
    cell = ref.grid.cell_measure
    N = ref.residues.modulus
    first = ref.residues.index_of(0)
    lhs = []
    for phi in generators:
        occupied = support_indicator(phi, tol_supp)[:, first:first + N]
        lhs.append(float(np.count_nonzero(occupied) * cell))
    ranks = basis.ranks
    n_gen, k = len(generators), gamma.k
    # sum_m m mu(Sigma_m), counted level set by level set
    rhs = 0.0
    for m in range(0, n_gen * k + 1):
        rhs += m * (np.count_nonzero(ranks == m) / S) * ref.grid.measure
    rhs_integral = float(np.sum(ranks)) * cell
    bound = n_gen * k
    lhs_ok = [v <= rhs + SLACK for v in lhs]
    rhs_ok = rhs <= bound + SLACK
    if not invariant:
        warnings.warn("measure estimate requested for a non-invariant space; report is advisory",
                      stacklevel=2)
    return MeasureReport(lhs, float(rhs), rhs_integral, bound, lhs_ok, bool(rhs_ok),
                         bool(all(lhs_ok) and rhs_ok), not invariant)


@dataclass
class SupportBoundReport:
    status: str  # "holds", "violated" or "not-applicable"
    per_copy_zero_measure: list
    per_copy_bound: float
    zero_measure: float
    bound: float
    reason: str = ""

    def to_dict(self):
        return dict(self.__dict__)


def support_bound(generator: FiberField, gamma: GammaSet, *, invariant: bool | None = None,
                  tol_rank=TOL_RANK, tol_member=TOL_MEMBER, tol_supp=TOL_SUPP) -> SupportBoundReport:
    """Lower bound on the zero set of a single generator inside the band.

    Each of the ``2K`` translates of ``D`` by ``Theta-perp`` inside the band
    must carry at least ``N mu(Sigma) - k`` of zero measure.
    """
    N = generator.residues.modulus
    K = generator.residues.band_half_width
    cell = generator.grid.cell_measure
    per_copy = N * generator.grid.measure - gamma.k
    zero = ~support_indicator(generator, tol_supp)
    copies = zero.reshape(zero.shape[0], 2 * K, N).sum(axis=(0, 2)) * cell
    copies = [float(c) for c in copies]
    total = float(sum(copies))
    if per_copy <= 0:
        return SupportBoundReport("not-applicable", copies, per_copy, total, 2 * K * per_copy,
                                  "N*mu(Sigma) - k <= 0")
    if invariant is None:
        invariant = test_oracle([generator], gamma, tol_rank=tol_rank,
                                tol_member=tol_member).verdict
    if not invariant:
        return SupportBoundReport("not-applicable", copies, per_copy, total, 2 * K * per_copy,
                                  "space is not invariant under the refined lattice")
    ok = all(c >= per_copy - SLACK for c in copies) and total >= 2 * K * per_copy - SLACK
    return SupportBoundReport("holds" if ok else "violated", copies, per_copy, total,
                              2 * K * per_copy)


# beta coefficients ---------------------------------------------------------

@dataclass
class BetaResult:
    coefficients: np.ndarray  # shape (k, S)
    residuals: np.ndarray  # per s
    max_residual: float

    def to_dict(self):
        return {"coefficients_re": self.coefficients.real.tolist(),
                "coefficients_im": self.coefficients.imag.tolist(),
                "residuals": self.residuals.tolist(), "max_residual": self.max_residual}


def beta_decompose(f: FiberField, phi: FiberField, gamma: GammaSet, *, tol_rank=TOL_RANK,
                   tol_member=TOL_MEMBER) -> BetaResult:
    """Coefficients with ``T f(sigma) = sum_gamma beta_gamma(sigma) T(L_gamma phi)(sigma)``.

    Solved per section point by least squares (minimum norm when the
    translated fibers are dependent).  The coefficients are only defined on
    the section; periodic extension is implicit.
    """
    if not f.compatible(phi):
        raise ShapeError("f and phi live on different grids")
    E = spanning_vectors([phi], gamma)  # (S, k, D)
    basis = basis_from_vectors(E, phi.grid.points, tol_rank)
    target = f.fibers()
    res_in = residuals_of_vectors(target[:, None, :], basis)[:, 0]
    if res_in.max(initial=0.0) >= tol_member:
        bad = int(np.argmax(res_in))
        raise DecompositionInfeasibleError(
            f"f is not in the space generated by phi: residual {res_in[bad]:.3e} at s={bad}")
    S, k, _ = E.shape
    coef = np.zeros((k, S), dtype=complex)
    resid = np.zeros(S)
    for s in range(S):
        A = E[s].T
        sol, *_ = np.linalg.lstsq(A, target[s], rcond=tol_rank)
        coef[:, s] = sol
        nrm = np.linalg.norm(target[s])
        err = np.linalg.norm(A @ sol - target[s])
        resid[s] = err / nrm if nrm > 0 else err
    return BetaResult(coef, resid, float(resid.max(initial=0.0)))


# full report ---------------------------------------------------------------

@dataclass
class InvarianceReport:
    verdict_oracle: bool | None = None
    verdict_containment: bool | None = None
    verdict_membership: bool | None = None
    verdict_dimension: bool | None = None
    tests: dict = field(default_factory=dict)
    dim_W: list = field(default_factory=list)
    dim_V: list = field(default_factory=list)
    measure: dict | None = None
    support: list | None = None
    decomposition: dict | None = None

    @property
    def verdicts(self) -> dict:
        out = {}
        for key in ("oracle", "containment", "membership", "dimension"):
            v = getattr(self, f"verdict_{key}")
            if v is not None:
                out[key] = v
        return out

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts.values())) <= 1

    @property
    def margins_ok(self) -> bool:
        return all(t.margin_ok for t in self.tests.values())


def check_invariance(generators, gamma: GammaSet, *, tol_rank=TOL_RANK, tol_member=TOL_MEMBER,
                     template=None) -> InvarianceReport:
    """Run all four characterizations on one instance, sharing the range basis."""
    generators = list(generators)
    basis = _span(generators, gamma, tol_rank, template)
    kw = dict(tol_rank=tol_rank, template=template, basis=basis)
    tests = {
        "oracle": test_oracle(generators, gamma, tol_member=tol_member, **kw),
        "containment": test_containment(generators, gamma, tol_member=tol_member, **kw),
        "membership": test_membership(generators, gamma, tol_member=tol_member, **kw),
        "dimension": test_dimension(generators, gamma, **kw),
    }
    return InvarianceReport(
        verdict_oracle=tests["oracle"].verdict,
        verdict_containment=tests["containment"].verdict,
        verdict_membership=tests["membership"].verdict,
        verdict_dimension=tests["dimension"].verdict,
        tests=tests,
        dim_W=tests["dimension"].detail["dim_W"],
        dim_V=tests["dimension"].detail["dim_V"],
    )
