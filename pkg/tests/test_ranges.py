import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import Setup
from fiberscope import (ShapeError, central_modulate, dimension_function, gamma_translate,
                        membership_residual, range_function, write_dimension_csv)

seeds = st.integers(0, 2**32 - 1)


def combo(fields, coef):
    out = fields[0] * 0
    for c, f in zip(coef, fields):
        out = out + f * c
    return out


def test_single_generator_rank_one(setup):
    B = range_function([setup.field(seed=1)], setup.gamma())
    assert np.all(B.ranks == 1)


def test_disjoint_residue_generators_rank_two(setup):
    gens = [setup.field("residue", seed=1, residue=0), setup.field("residue", seed=2, residue=1)]
    assert np.all(range_function(gens, setup.gamma()).ranks == 2)


def test_translated_rank_one_gives_rank_two():
    s = Setup(N=2, M=8, L=4.0)
    F = s.field("rank-one", seed=3)
    G = s.gamma(1.0, 1.0, (((0,), (0,)), ((1,), (0,))))
    T = gamma_translate(F, G.elements[1])
    # the two fibers are never parallel
    a, b = F.fibers(), T.fibers()
    cos = np.abs(np.sum(a.conj() * b, axis=1)) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    assert np.all(cos < 1 - 1e-6)
    B = range_function([F], G)
    assert np.all(B.ranks == 2)
    assert np.all(dimension_function(B).ranks == 2)


def test_zero_generators(setup):
    B = range_function([], setup.gamma(), template=setup.field("zero"))
    assert np.all(B.ranks == 0)
    B = range_function([setup.field("zero")], setup.gamma())
    assert np.all(B.ranks == 0)


def test_empty_without_template(setup):
    with pytest.raises(ShapeError):
        range_function([], setup.gamma())


@given(n=st.integers(1, 3), seed=seeds, four=st.booleans())
def test_rank_bound_and_orthonormal(n, seed, four):
    s = Setup(N=2, M=4, S=4)
    pairs = (((0,), (0,)),) + ((((1,), (0,)), ((0,), (1,)), ((1,), (1,))) if four else ())
    G = s.gamma(1.0, 1.0, pairs)
    gens = [s.field("rank-one", seed=[seed, i]) for i in range(n)]
    B = range_function(gens, G)
    assert np.all(B.ranks <= n * G.k)
    for Q, sv in zip(B.bases, B.singular_values):
        assert np.max(np.abs(Q @ Q.conj().T - np.eye(Q.shape[0]))) < 1e-10
        assert np.all(sv > B.tol_rank * sv[0])


@given(seed=seeds)
def test_projection_idempotent(seed):
    s = Setup(N=2, M=4, S=4)
    B = range_function([s.field(seed=seed), s.field(seed=seed + 1)], s.gamma())
    v = s.field(seed=seed + 2).fibers()
    for si in range(4):
        p = B.project(si, v[si])
        assert np.max(np.abs(B.project(si, p) - p)) < 1e-12 * np.linalg.norm(v[si])


def test_generator_membership(setup):
    gens = [setup.field(seed=1), setup.field(seed=2)]
    B = range_function(gens, setup.gamma())
    assert membership_residual(gens[1], B)[1] < 1e-10


def test_orthogonal_membership_is_one(setup):
    B = range_function([setup.field("residue", seed=1, residue=0)], setup.gamma())
    per_s, worst = membership_residual(setup.field("residue", seed=2, residue=1), B)
    np.testing.assert_allclose(per_s, 1.0, atol=1e-12)


def test_combination_membership():
    s = Setup(N=2, M=4)
    G = s.gamma(1.0, 1.0, (((0,), (0,)), ((1,), (0,)), ((0,), (1,))))
    gens = [s.field("rank-one", seed=1), s.field("residue", seed=2, residue=1)]
    spans = [gamma_translate(f, g) for f in gens for g in G.elements]
    F = combo(spans, [0.3, -1j, 2.0, 1.5 + 0.5j, -0.7, 0.1j])
    assert membership_residual(F, range_function(gens, G))[1] < 1e-8


@given(seed=seeds)
def test_rank_stable_under_tiny_noise(seed):
    s = Setup(N=2, M=4, S=4)
    G = s.gamma(1.0, 1.0, (((0,), (0,)), ((1,), (0,))))
    gens = [s.field("rank-one", seed=seed), s.field("residue", seed=seed + 1, residue=0)]
    base = range_function(gens, G).ranks
    rng = np.random.default_rng(seed)
    noisy = [g.with_blocks(g.blocks * (1 + 1e-13 * rng.standard_normal(g.blocks.shape)))
             for g in gens]
    np.testing.assert_array_equal(range_function(noisy, G).ranks, base)


@given(seed=seeds, lam=st.integers(-3, 3))
def test_integer_central_phase_keeps_span(seed, lam):
    s = Setup(N=3, M=4, S=4)
    G = s.gamma(1.0, 1.0, (((0,), (0,)), ((1,), (0,))))
    gens = [s.field("rank-one", seed=seed), s.field(seed=seed + 1)]
    B = range_function(gens, G)
    moved = [central_modulate(g, float(lam)) for g in gens]
    B2 = range_function(moved, G)
    np.testing.assert_array_equal(B.ranks, B2.ranks)
    for g in moved:
        assert membership_residual(g, B)[1] < 1e-10


def test_dimension_csv(tmp_path, setup):
    B = range_function([setup.field(seed=1)], setup.gamma())
    path = tmp_path / "dim.csv"
    write_dimension_csv(dimension_function(B), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "sigma,rank"
    assert len(lines) == 1 + setup.grid.num_points
    assert lines[1].endswith(",1")
