import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcalab import linalg
from qcalab.errors import ProblemTooLarge

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand(rng, r, c=None):
    c = r if c is None else c
    return rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))


def test_kron_index_layout():
    a = np.arange(4).reshape(2, 2) + 1
    b = np.arange(9).reshape(3, 3) + 1
    k = linalg.kron(a, b)
    assert k.shape == (6, 6)
    for i1 in range(2):
        for j1 in range(2):
            for i2 in range(3):
                for j2 in range(3):
                    assert k[i1 * 3 + i2, j1 * 3 + j2] == a[i1, j1] * b[i2, j2]


def test_kron_cap():
    with pytest.raises(ProblemTooLarge):
        linalg.kron(np.eye(64), np.eye(64), max_dim=1024)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_kron_associative(seed):
    # small Gaussian integers keep every product exact
    rng = np.random.default_rng(seed)
    a, b, c = (
        rng.integers(-5, 6, size=(k, k)) + 1j * rng.integers(-5, 6, size=(k, k)) for k in (2, 3, 2)
    )
    np.testing.assert_array_equal(
        linalg.kron(linalg.kron(a, b), c), linalg.kron(a, linalg.kron(b, c))
    )


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_kron_of_unitaries_is_unitary(seed):
    rng = np.random.default_rng(seed)
    u = linalg.random_unitary(3, rng)
    v = linalg.random_unitary(4, rng)
    assert linalg.is_unitary(linalg.kron(u, v), tol=1e-10)


def test_is_unitary_examples():
    assert linalg.is_unitary(np.eye(4))
    assert not linalg.is_unitary(np.diag([1, 2]))
    with pytest.raises(ValueError):
        linalg.is_unitary(np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(min_value=1e-6, max_value=1e6), st.integers(1, 4))
def test_rank_scale_invariant(seed, scale, r):
    rng = np.random.default_rng(seed)
    m = rand(rng, 6, r) @ rand(rng, r, 5)
    r0, n0 = linalg.rank_and_nullspace(m)
    r1, n1 = linalg.rank_and_nullspace(m * scale * (1 - 1j))
    assert r0 == r1 == r
    assert r0 + n0.dim == 5
    assert np.max(np.abs(m @ n0.basis)) < 1e-9 * np.max(np.abs(m))


def test_rank_and_nullspace_scale_floor():
    # rounding noise is not full rank once judged against the natural scale
    noise = 1e-15 * np.random.default_rng(0).normal(size=(4, 4))
    assert linalg.rank_and_nullspace(noise)[0] == 4
    assert linalg.rank_and_nullspace(noise, scale=1.0)[0] == 0


def test_rank_rejects_bad_tol():
    with pytest.raises(ValueError):
        linalg.rank_and_nullspace(np.eye(2), tol=0)


def test_span_and_contains():
    v1 = np.array([1, 0, 0], dtype=complex)
    v2 = np.array([1, 1, 0], dtype=complex)
    sub = linalg.span([v1, v2, v1 + 2 * v2])
    assert sub.dim == 2
    assert sub.contains([3, -1, 0])
    assert not sub.contains([0, 0, 1])
    np.testing.assert_allclose(sub.projector() @ sub.projector(), sub.projector(), atol=1e-12)
    assert linalg.span([], ambient_dim=3).dim == 0


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(0, 4), st.integers(0, 4))
def test_intersection_symmetric(seed, ku, kv):
    rng = np.random.default_rng(seed)
    shared = rand(rng, 8, 2)
    u = linalg.span(np.hstack([shared, rand(rng, 8, ku)]))
    v = linalg.span(np.hstack([shared, rand(rng, 8, kv)]))
    uv = linalg.subspace_intersection(u, v)
    vu = linalg.subspace_intersection(v, u)
    assert uv.dim == vu.dim == max(2, ku + kv + 4 - 8)
    for vec in uv.vectors():
        assert u.contains(vec, 1e-8) and v.contains(vec, 1e-8)


def test_intersection_dimension_mismatch():
    with pytest.raises(ValueError):
        linalg.subspace_intersection(linalg.span([[1, 0]]), linalg.span([[1, 0, 0]]))


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b, c = rand(rng, 2), rand(rng, 3), rand(rng, 2)
    m = linalg.kron_all([a, b, c])
    np.testing.assert_allclose(
        linalg.partial_trace(m, [2, 3, 2], [1]), np.trace(a) * np.trace(c) * b, atol=1e-12
    )
    np.testing.assert_allclose(
        linalg.partial_trace(m, [2, 3, 2], [0, 2]), np.trace(b) * np.kron(a, c), atol=1e-12
    )


def test_realign_of_product():
    rng = np.random.default_rng(2)
    b, c = rand(rng, 2), rand(rng, 3)
    r = linalg.realign(np.kron(b, c), 2, 3)
    np.testing.assert_allclose(r, np.outer(b.ravel(), c.ravel()), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_schmidt_rank_of_product_is_one(seed):
    rng = np.random.default_rng(seed)
    b = rand(rng, 2) + 3
    c = rand(rng, 2) + 3
    assert linalg.operator_schmidt_rank(np.kron(b, c), 2, 2) == 1


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_schmidt_rank_local_invariance(seed):
    rng = np.random.default_rng(seed)
    m = rand(rng, 4)
    u, v, w, x = (linalg.random_unitary(2, rng) for _ in range(4))
    conj = np.kron(u, v) @ m @ np.kron(w, x)
    assert linalg.operator_schmidt_rank(conj, 2, 2) == linalg.operator_schmidt_rank(m, 2, 2)


def test_schmidt_rank_swap():
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert linalg.operator_schmidt_rank(swap, 2, 2) == 4


def test_nearest_unitary_fixes_unitaries_and_repairs_noise():
    rng = np.random.default_rng(3)
    u = linalg.random_unitary(4, rng)
    np.testing.assert_allclose(linalg.nearest_unitary(u), u, atol=1e-12)
    noisy = u + 1e-9 * rand(rng, 4)
    assert linalg.is_unitary(linalg.nearest_unitary(noisy), 1e-12)


def test_subspace_validation():
    with pytest.raises(ValueError):
        linalg.Subspace(3, np.zeros((2, 1)))
    with pytest.raises(ValueError):
        linalg.as_matrix(np.zeros(3))
