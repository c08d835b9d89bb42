import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from aniso_lp.dilation import (
    apply_dilation,
    ball_volume,
    diag12_rho,
    estimate_unit_ball_volume,
    make_dilation_group,
    quasi_norm,
)
from aniso_lp.exceptions import AdmissibilityError

from conftest import DIAG12

GENERAL = np.array([[1.2, 0.3], [-0.1, 1.8]])


def test_gamma_identity():
    assert make_dilation_group(np.eye(2)).gamma == 2


def test_gamma_diag12():
    assert make_dilation_group(DIAG12).gamma == pytest.approx(3.0)


def test_inadmissible_matrix_rejected():
    with pytest.raises(AdmissibilityError):
        make_dilation_group(np.diag([0.5, 1.0]))


def test_unit_dilation_is_identity(G12):
    x = np.array([0.3, -1.7])
    np.testing.assert_allclose(apply_dilation(G12, 1.0, x), x, atol=1e-15)


def test_diag12_dilation_explicit(G12):
    x = np.array([0.7, -0.4])
    for t in (0.25, 3.0):
        np.testing.assert_allclose(apply_dilation(G12, t, x), [t * 0.7, -0.4 * t * t], rtol=1e-13)


def test_adjoint_is_transpose():
    G = make_dilation_group(GENERAL)
    x = np.array([0.3, 1.1])
    M = G.matrix(2.5)
    np.testing.assert_allclose(apply_dilation(G, 2.5, x, adjoint=True), M.T @ x, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_group_law_against_eigendecomposition(s, t, a, b):
    P = np.array([[1.0 + abs(a), b], [-b, 1.5]])
    G = make_dilation_group(P)
    x = np.array([0.4, -1.3])
    lhs = apply_dilation(G, s, apply_dilation(G, t, x))
    # oracle: diagonalize P and exponentiate the eigenvalues
    lam, V = np.linalg.eig(P)
    assume(np.linalg.cond(V) < 1e4)  # the oracle needs an eigenbasis
    oracle = (V @ np.diag(np.exp(np.log(s * t) * lam)) @ np.linalg.inv(V)).real @ x
    np.testing.assert_allclose(lhs, oracle, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("t", [0.1, 0.7, 3.0, 40.0])
def test_defective_generator_jordan_form(t):
    # P = 1.25 I + N with N nilpotent, so t^P = t^1.25 (I + log(t) N)
    N = np.array([[-0.25, 0.25], [-0.25, 0.25]])
    G = make_dilation_group(1.25 * np.eye(2) + N)
    x = np.array([0.4, -1.3])
    exact = t**1.25 * (x + np.log(t) * N @ x)
    np.testing.assert_allclose(apply_dilation(G, t, x), exact, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(G.rho(G.dilate(t, x)), t * G.rho(x), rtol=1e-9)


def test_matrix_matches_expm():
    G = make_dilation_group(GENERAL)
    np.testing.assert_allclose(G.matrix(3.0), scipy.linalg.expm(np.log(3.0) * GENERAL), rtol=1e-13)


def test_isotropic_quasi_norm_is_euclidean(G_iso):
    x = np.random.default_rng(0).standard_normal((50, 2))
    np.testing.assert_allclose(quasi_norm(G_iso, x).value, np.linalg.norm(x, axis=1), rtol=1e-12)


def test_diag12_known_values(G12):
    assert quasi_norm(G12, [0.0, 1.0]).value == pytest.approx(1.0, abs=1e-12)
    assert quasi_norm(G12, [0.0, 4.0]).value == pytest.approx(2.0, abs=1e-12)
    assert diag12_rho([0.0, 4.0]) == pytest.approx(2.0)


def test_closed_form_matches_root_finder(G12):
    x = np.random.default_rng(1).standard_normal((500, 2)) * 10.0 ** np.random.default_rng(2).uniform(-3, 3, (500, 1))
    np.testing.assert_allclose(G12.rho(x), diag12_rho(x), rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(-5, 5), st.floats(-5, 5))
def test_homogeneity(t, x1, x2):
    x = np.array([x1, x2])
    if np.linalg.norm(x) < 1e-6:
        return
    G = make_dilation_group(GENERAL)
    assert G.rho(G.dilate(t, x)) == pytest.approx(t * G.rho(x), rel=1e-9)


def test_quasi_norm_reports_residual(G12):
    r = quasi_norm(G12, [0.3, 0.8])
    assert r.residual < 1e-12
    assert r.iterations >= 1


def test_dual_norm_uses_adjoint():
    G = make_dilation_group(GENERAL)
    xi = np.array([0.5, 2.0])
    t = G.rho_star(xi)
    assert np.linalg.norm(G.dilate(1 / t, xi, adjoint=True)) == pytest.approx(1.0, abs=1e-10)


def test_unit_disc_volume(G_iso):
    assert ball_volume(G_iso, 1.0) == pytest.approx(np.pi, abs=1e-3)


@pytest.mark.parametrize("P", [np.eye(2), DIAG12, GENERAL])
def test_volume_doubling(P):
    G = make_dilation_group(P)
    assert ball_volume(G, 2.0) / ball_volume(G, 1.0) == pytest.approx(2.0**G.gamma, rel=1e-14)


def test_two_volume_estimators_agree(G12):
    a = estimate_unit_ball_volume(G12, "grid", resolution=1024)
    b = estimate_unit_ball_volume(G12, "qmc", samples=2**20)
    assert abs(a - b) / a < 5e-3


def _gauge(G, dual):
    return G.rho_star if dual else G.rho


@pytest.fixture(params=[(P, d) for P in ("diag12", "general", "p3") for d in (False, True)],
                ids=lambda v: f"{v[0]}-{'dual' if v[1] else 'primal'}")
def gauge(request):
    name, dual = request.param
    P = {"diag12": DIAG12, "general": GENERAL, "p3": np.array([[1.1, 0.1, 0.0], [0.0, 1.5, 0.4], [0.0, 0.0, 2.5]])}[name]
    G = make_dilation_group(P)
    return G, _gauge(G, dual)


def _samples(dim, n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, dim)) * np.exp(rng.uniform(-2, 2, (n, 1)))


def test_triangle_inequality(gauge):
    G, rho = gauge
    x, y = _samples(G.dim, 1000, 1), _samples(G.dim, 1000, 2)
    assert np.all(rho(x + y) <= rho(x) + rho(y) + 1e-9)


def test_symmetry(gauge):
    G, rho = gauge
    x = _samples(G.dim, 1000, 3)
    np.testing.assert_allclose(rho(-x), rho(x), rtol=1e-12)


def test_unit_ball_is_euclidean_ball(gauge):
    G, rho = gauge
    x = _samples(G.dim, 2000, 4)
    r, e = rho(x), np.linalg.norm(x, axis=-1)
    assert np.all(r[e <= 1] <= 1 + 1e-9)
    assert np.all(e[r <= 1] <= 1 + 1e-9)


def test_comparison_with_euclidean(gauge):
    G, rho = gauge
    x = _samples(G.dim, 2000, 5)
    r, e = rho(x), np.linalg.norm(x, axis=-1)
    inner, outer = e <= 1, e >= 1
    assert inner.any() and outer.any()
    assert np.all(r[inner] >= e[inner] * (1 - 1e-12))
    assert np.all(r[outer] <= e[outer] * (1 + 1e-12))
