import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopisac import linalg as la
from coopisac.errors import SingularError
from conftest import rand_herm


def test_eig_examples():
    assert np.allclose(la.herm_eig(np.eye(4)).values, 1.0)
    d = la.herm_eig(np.diag([1.0, 3.0]))
    assert np.allclose(d.values, [3, 1])
    assert np.allclose(np.abs(d.vectors), [[0, 1], [1, 0]])
    assert np.allclose(la.herm_eig(np.array([[2, 1j], [-1j, 2]])).values, [3, 1])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_residuals(rng, method):
    for n in (1, 2, 5, 9, 16):
        m = rand_herm(rng, n)
        w, v = la.herm_eig(m, method=method)
        assert np.all(np.diff(w) <= 1e-12)
        assert np.linalg.norm(m @ v - v * w) <= 1e-9 * np.linalg.norm(m, 2)
        assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-10)


def test_jacobi_matches_lapack(rng):
    m = rand_herm(rng, 7)
    assert np.allclose(la.herm_eig(m, "jacobi").values, la.herm_eig(m).values, atol=1e-10)


def test_asymmetry_warns():
    with pytest.warns(RuntimeWarning):
        la.hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        la.hermitian(np.eye(2))


def test_inv_sqrt_examples(rng):
    assert np.allclose(la.inv_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(la.inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]))
    for _ in range(100):
        m = rand_herm(rng, int(rng.integers(1, 9)), pd=True)
        s = la.inv_sqrt(m)
        assert np.linalg.norm(s @ m @ s - np.eye(len(m))) <= 1e-8
    with pytest.raises(SingularError):
        la.inv_sqrt(np.diag([1.0, 0.0]))


def test_psd_project_examples(rng):
    assert np.allclose(la.psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]))
    p = rand_herm(rng, 4, pd=True)
    assert np.allclose(la.psd_project(p), p, atol=1e-12 * np.linalg.norm(p))
    # 2x2 nearest PSD by hand: [[0, 1], [1, 0]] has eigs +-1 -> 0.5 * ones
    assert np.allclose(la.psd_project(np.array([[0.0, 1.0], [1.0, 0.0]])), 0.5 * np.ones((2, 2)))


@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_psd_project_idempotent(n, seed):
    m = rand_herm(np.random.default_rng(seed), n)
    p = la.psd_project(m)
    assert np.linalg.norm(la.psd_project(p) - p) <= 1e-10 * max(1.0, np.linalg.norm(p))
    assert np.linalg.eigvalsh(p).min() >= -1e-12 * max(1.0, np.linalg.norm(p))


def test_dominant_rank_one():
    lam, v = la.dominant_rank_one(np.diag([1.0, 0.0]))
    assert lam == pytest.approx(1.0)
    assert np.allclose(np.abs(v), [1, 0])


def test_max_generalized_eig(rng):
    e = rand_herm(rng, 4, pd=True)
    lam, u = la.max_generalized_eig(np.eye(4), np.eye(4))
    assert lam == pytest.approx(1.0)
    vec = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lam, u = la.max_generalized_eig(np.outer(vec, vec.conj()), np.eye(4))
    assert lam == pytest.approx(np.vdot(vec, vec).real)
    assert abs(abs(np.vdot(u, vec)) - np.linalg.norm(vec)) < 1e-10
    f = rand_herm(rng, 4, pd=True)
    lam, u = la.max_generalized_eig(e, f)
    q = np.vdot(u, e @ u).real / np.vdot(u, f @ u).real
    assert q == pytest.approx(lam, rel=1e-10)
    assert lam == pytest.approx(np.max(np.linalg.eigvals(np.linalg.solve(f, e)).real), rel=1e-9)
