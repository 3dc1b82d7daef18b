import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from coopisac.conic import Cone, ConicProblem, ProblemBuilder, Status, project_cone, smat, solve, svec
from coopisac.conic.cones import in_exp, proj_exp, proj_exp_dual, proj_psd_svec, proj_soc
from coopisac.errors import ShapeError
from coopisac.oracles import canonical_problems


@pytest.mark.parametrize("case", canonical_problems(), ids=lambda c: c[0])
def test_canonical(case):
    _, p, status, x, obj = case
    sol = solve(p)
    assert sol.status is status
    if x is not None:
        assert np.allclose(sol.x, x, atol=1e-6)
        assert sol.objective == pytest.approx(obj, abs=1e-6)


def test_unbounded():
    p = ConicProblem([1.0], sp.csr_matrix([[1.0]]), [0.0], [Cone("nonneg", 1)])
    assert solve(p).status is Status.UNBOUNDED


def test_max_iter_status():
    p = canonical_problems()[3][1]
    assert solve(p, max_iter=2).status is Status.MAX_ITER


def test_deterministic():
    p = canonical_problems()[2][1]
    a, b = solve(p), solve(p)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


def test_shape_checks():
    with pytest.raises(ShapeError):
        ConicProblem([1.0, 2.0], sp.csr_matrix([[1.0]]), [0.0], [Cone("nonneg", 1)])
    with pytest.raises(ShapeError):
        ConicProblem([1.0], sp.csr_matrix([[1.0]]), [0.0], [Cone("nonneg", 2)])
    with pytest.raises(ValueError):
        Cone("exp", 4)


def test_builder_matches_direct():
    b = ProblemBuilder()
    xs = b.var("x", 1)
    b.add_ge0(sp.csr_matrix([[-1.0]]), np.array([-1.0]))
    c = np.zeros(b.n)
    c[xs] = 1.0
    b.set_objective(c)
    sol = solve(b.build())
    assert sol.ok and sol.x[0] == pytest.approx(1.0, abs=1e-6)


def test_projection_examples():
    assert np.allclose(project_cone([-1.0, 2.0], Cone("nonneg", 2)), [0, 2])
    x = np.array([0.6, 0.8])
    assert np.allclose(project_cone(np.r_[-np.linalg.norm(x) - 1, x], Cone("soc", 3)), 0)
    assert np.allclose(smat(svec(np.diag([1.0, 2.0]))), np.diag([1.0, 2.0]))


def _rand_exp_points(rng, n):
    return rng.standard_normal((n, 3)) * np.exp(rng.uniform(-3, 3, (n, 1)))


def test_exp_projection_properties(rng):
    v = _rand_exp_points(rng, 1000)
    p = proj_exp(v)
    assert np.all(in_exp(p, tol=1e-9))
    assert np.allclose(proj_exp(p), p, atol=1e-9 * (1 + np.abs(p)))
    inside = p[in_exp(p)]
    assert np.allclose(proj_exp(inside), inside, atol=1e-12 * (1 + np.abs(inside)))
    # Moreau: v = P_K(v) - P_K*(-v)
    assert np.allclose(p - proj_exp_dual(-v), v, atol=1e-8 * (1 + np.abs(v)))


def test_nonexpansive(rng):
    cones = [Cone("nonneg", 4), Cone("soc", 4), Cone("psd", 3), Cone("exp", 3)]
    for _ in range(250):
        for k in cones:
            a = rng.standard_normal(k.size) * 3
            b = rng.standard_normal(k.size) * 3
            pa, pb = project_cone(a, k), project_cone(b, k)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) * (1 + 1e-9) + 1e-12
            assert np.allclose(project_cone(pa, k), pa, atol=1e-9 * (1 + np.abs(pa)))


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=6))
@settings(max_examples=200, deadline=None)
def test_soc_projection_in_cone(v):
    p = proj_soc(np.array(v))
    assert np.linalg.norm(p[1:]) <= p[0] + 1e-9 * (1 + abs(p[0]))


def test_psd_svec_projection(rng):
    m = rng.standard_normal((4, 4))
    m = m + m.T
    p = smat(proj_psd_svec(svec(m)))
    assert np.linalg.eigvalsh(p).min() >= -1e-12
    w, v = np.linalg.eigh(m)
    assert np.allclose(p, (v * np.maximum(w, 0)) @ v.T)


def random_problem(rng, n=30):
    """Feasible and bounded random program with a known optimum, built from a
    complementary primal-dual pair."""
    cones = [Cone("zero", 3), Cone("nonneg", 10), Cone("soc", 4), Cone("soc", 5),
             Cone("psd", 3), Cone("exp", 3), Cone("exp", 3)]
    m = sum(k.size for k in cones)
    z = rng.standard_normal(m)
    s, y = np.zeros(m), np.zeros(m)
    st_ = 0
    for k in cones:
        sl = slice(st_, st_ + k.size)
        st_ += k.size
        s[sl] = project_cone(z[sl], k)
        y[sl] = project_cone(-z[sl], k, dual=True)
    a = sp.random(m, n, density=0.4, random_state=int(rng.integers(1 << 30)),
                  data_rvs=rng.standard_normal).tocsr()
    x = rng.standard_normal(n)
    return ConicProblem(-a.T @ y, a, a @ x + s, cones), float(-(a.T @ y) @ x)


def test_random_problems(rng):
    for _ in range(5):
        p, opt = random_problem(rng)
        sol = solve(p)
        assert sol.ok
        assert abs(sol.objective - opt) <= 1e-5 * (1 + abs(opt))
