import numpy as np
import pytest

from aniso_lp.exceptions import DegenerateSymbolError, MeanNotZeroError, NonFiniteSymbolError
from aniso_lp.fields import GridSpec, SpatialField, SymbolPoints, random_test_function
from aniso_lp.kernels import ball_averaging_kernel, poisson_gradient_family, potential_profile, radial_profile
from aniso_lp.operators import (
    MultiplierSymbol,
    apply_multiplier,
    band_energy,
    default_approximant,
    functional_calculus,
    invert_multiplier,
    lp_symbol,
    riesz_potential,
    riesz_symbol,
    spatial_derivative,
    unit_shell,
)

from conftest import mode


@pytest.fixture(scope="module")
def f12(G12, grid64):
    return random_test_function(0, G12, grid64, 0.125)


def test_identity_multiplier(G12, f12):
    g = apply_multiplier(MultiplierSymbol.constant(1.0, G12), f12)
    assert np.abs(g.samples - f12.samples).max() < 1e-12


def test_composition(G12, f12):
    a, b = riesz_symbol(G12, 0.7), riesz_symbol(G12, -0.3)
    lhs = apply_multiplier(a, apply_multiplier(b, f12))
    rhs = apply_multiplier(a * b, f12)
    assert np.abs(lhs.samples - rhs.samples).max() < 1e-12


def test_riesz_consistency(G12, f12):
    a = apply_multiplier(riesz_symbol(G12, 0.8), f12)
    b = riesz_potential(f12, G12, 0.8)
    assert np.array_equal(a.samples, b.samples)


def test_riesz_zero_is_identity(G12, f12):
    assert np.array_equal(riesz_potential(f12, G12, 0.0).samples, f12.samples)


@pytest.mark.parametrize("beta", [0.5, -1.3])
def test_riesz_on_mode(G12, grid64, beta):
    f, xi = mode(grid64, (3, -5))
    g = riesz_potential(f, G12, beta)
    np.testing.assert_allclose(g.samples, G12.rho_star(xi) ** (-beta) * f.samples, atol=1e-12)


def test_riesz_euclidean_factor(G_iso, grid64):
    # Euclidean I_alpha has symbol (2 pi |xi|)^(-alpha)
    f, xi = mode(grid64, (4, 7))
    alpha = 1.3
    ours = riesz_potential(f, G_iso, alpha).samples
    euclid = (2 * np.pi * np.linalg.norm(xi)) ** (-alpha) * f.samples
    np.testing.assert_allclose(ours / euclid, (2 * np.pi) ** alpha, rtol=1e-12)


def test_riesz_needs_zero_mean(G12, grid64):
    with pytest.raises(MeanNotZeroError):
        riesz_potential(SpatialField(grid64, np.ones(grid64.points)), G12, 1.0)


def test_nonfinite_symbol(G12, f12):
    bad = MultiplierSymbol(lambda p: np.full(p.xi.shape[:-1], np.inf), G12)
    with pytest.raises(NonFiniteSymbolError):
        apply_multiplier(bad, f12)


def test_diagonal_norm_bound(G12, grid64):
    m = lp_symbol(potential_profile(G12, 1.0, ball_averaging_kernel(G12)), G12)
    from aniso_lp.fields import frequency_lattice

    mx = np.abs(m(frequency_lattice(G12, grid64).points())).max()
    for s in range(3):
        f = random_test_function(s, G12, grid64, 0.125)
        assert apply_multiplier(m, f).l2_norm() <= mx * f.l2_norm() * (1 + 1e-12)


def test_radial_lp_symbol_is_one(G12):
    m = lp_symbol(radial_profile(G12), G12)
    xi = np.random.default_rng(0).standard_normal((200, 2)) * 5
    np.testing.assert_allclose(m(xi), 1.0, atol=1e-6)


def test_poisson_lp_symbol_quarter(G_iso):
    m = lp_symbol(poisson_gradient_family(G_iso), G_iso, eps=2.0**-16)
    xi = np.random.default_rng(1).standard_normal((100, 2))
    np.testing.assert_allclose(m(xi), 0.25, atol=1e-6)


def test_zero_on_a_ray(G12):
    from aniso_lp.kernels import LPProfile

    psi = LPProfile(lambda p: np.where(p.xi[..., 1] == 0, 0.0, 1.0) * np.exp(-p.rho) * p.rho, G12, "ray")
    m = lp_symbol(psi, G12)
    assert np.all(m(np.array([[1.0, 0.0], [-3.0, 0.0]])) == 0)


def test_lp_symbol_homogeneity(G12):
    m = lp_symbol(potential_profile(G12, 1.0, ball_averaging_kernel(G12)), G12)
    th = 2 * np.pi * np.arange(64) / 64
    xi = np.stack([np.cos(th), np.sin(th)], -1)
    base = m(xi)
    for s in (0.25, 4.0):
        moved = m(SymbolPoints(G12.dilate(s, xi, adjoint=True), np.full(64, s)))
        assert np.all(np.abs(moved - base) <= 1e-4 * (1 + np.abs(base)))


def test_dyadic_decay(G12):
    psi = potential_profile(G12, 1.0, ball_averaging_kernel(G12))
    xi = SymbolPoints(np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]), np.ones(3))
    ks = np.arange(-8, 9)
    e = np.array([band_energy(psi, G12, xi, 2.0**k, 2.0 ** (k + 1)).max() for k in ks])
    lo = np.polyfit(ks[ks < 0], np.log2(e[ks < 0]), 1)[0]
    hi = np.polyfit(ks[ks > 2], np.log2(e[ks > 2]), 1)[0]
    assert lo > 0.5  # grows like 2^(k eps') below the shell
    assert hi < -0.5  # decays above it


def test_invert_constant(G12):
    inv = invert_multiplier(MultiplierSymbol.constant(4.0, G12))
    assert inv(np.array([[0.3, 0.2]]))[0] == pytest.approx(0.25)


def test_invert_potential_symbol_round_trip(G12, f12):
    m = lp_symbol(potential_profile(G12, 1.0, ball_averaging_kernel(G12)), G12)
    g = apply_multiplier(invert_multiplier(m), apply_multiplier(m, f12))
    assert np.abs(g.samples - f12.samples).max() < 1e-10


def test_invert_degenerate(G12):
    with pytest.raises(DegenerateSymbolError):
        invert_multiplier(MultiplierSymbol.constant(0.0, G12))


@pytest.fixture(scope="module")
def calculus(G12):
    m = lp_symbol(potential_profile(G12, 1.0, ball_averaging_kernel(G12)), G12)
    shell = unit_shell(G12, 64)
    return m, default_approximant(m), shell


def test_calculus_identity_function(calculus):
    m, ell, shell = calculus
    fc = functional_calculus(m, ell, lambda z: z, 40, 1024, shell)
    np.testing.assert_allclose(fc(shell), m(shell), atol=1e-8)


def test_calculus_reciprocal(calculus):
    m, ell, shell = calculus
    K = 40
    fc = functional_calculus(m, ell, lambda z: 1 / z, K, 1024, shell)
    inv = invert_multiplier(m, shell)
    err = np.abs(fc(shell) - inv(shell)).max()
    assert err <= max(1e-8, 2.0**-K)


def test_calculus_geometric_decay(calculus):
    m, _, shell = calculus
    ell = default_approximant(m, width=0.6)
    fc = functional_calculus(m, ell, lambda z: 1 / z, 40, 1024, shell)
    mv = m(shell)
    err = np.abs(fc.partial_sums(shell) - (1 / mv)[:, None]).max(axis=0)
    live = err[:-1] > 1e-13
    assert live.sum() >= 8
    q = err[1:][live] / err[:-1][live]
    assert q.max() <= 0.55
    assert err[-1] <= 1e-8 * np.abs(1 / mv).max()


def test_calculus_exact_when_ell_is_m(calculus):
    m, _, shell = calculus
    fc = functional_calculus(m, m, np.exp, 10, 1024, shell)
    s0 = fc.partial_sums(shell)[:, 0]
    np.testing.assert_allclose(s0, np.exp(m(shell)), rtol=1e-9)


def test_spatial_derivative_mode(grid64):
    f, xi = mode(grid64, (5, 2))
    g = spatial_derivative(f, (2, 0))
    np.testing.assert_allclose(g.samples, -4 * np.pi**2 * xi[0] ** 2 * f.samples, atol=1e-9)


def test_spatial_derivative_gaussian():
    grid = GridSpec.cube(2, 16.0, 128)
    x = grid.coords()
    e = np.exp(-np.pi * np.sum(x * x, -1))
    f = SpatialField(grid, e)
    np.testing.assert_allclose(spatial_derivative(f, (1, 0)).samples, -2 * np.pi * x[..., 0] * e, atol=1e-8)
    d2 = (4 * np.pi**2 * x[..., 1] ** 2 - 2 * np.pi) * e
    np.testing.assert_allclose(spatial_derivative(f, (0, 2)).samples, d2, atol=1e-8)


def test_spatial_derivative_linear(G12, grid64):
    f = random_test_function(1, G12, grid64, 0.125)
    g = random_test_function(2, G12, grid64, 0.125)
    lhs = spatial_derivative(2.0 * f + g, (1, 1)).samples
    rhs = 2.0 * spatial_derivative(f, (1, 1)).samples + spatial_derivative(g, (1, 1)).samples
    assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(rhs).max() * 10
