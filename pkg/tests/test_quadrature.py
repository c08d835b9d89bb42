import math

import numpy as np
import pytest

from aniso_lp.exceptions import DomainError
from aniso_lp.quadrature import for_band, hybrid, log_uniform


@pytest.mark.parametrize("a,b", [(0.25, 4.0), (2.0**-12, 2.0**12), (1.0, 2.0)])
def test_log_rule_integrates_constant(a, b):
    q = log_uniform(a, b)
    assert q.weights.sum() == pytest.approx(math.log(q.t_max / q.t_min), rel=1e-12)
    assert np.all(np.diff(q.nodes) > 0)
    assert q.t_min <= a and q.t_max >= b


def test_nodes_on_dyadic_lattice():
    q = log_uniform(0.3, 7.0, per_octave=8)
    k = 8 * np.log2(q.nodes)
    np.testing.assert_allclose(k, np.round(k), atol=1e-9)


def test_weighted_rule_against_closed_form():
    # int_1^2 t^(-2 alpha) dt/t
    q = log_uniform(1.0, 2.0, per_octave=256)
    alpha = 0.7
    exact = (1 - 2.0 ** (-2 * alpha)) / (2 * alpha)
    assert q.integrate(np.ones(len(q)), alpha) == pytest.approx(exact, rel=1e-5)


def test_for_band_margins():
    q = for_band(0.5, 4.0)
    assert q.t_min <= 2.0**-8 / 4.0
    assert q.t_max >= 2.0**8 / 0.5


def test_invalid_ranges():
    with pytest.raises(DomainError):
        log_uniform(2.0, 1.0)
    with pytest.raises(DomainError):
        log_uniform(1.0, 2.0, per_octave=0)


def test_hybrid_rule_oscillatory_integrand():
    # int cos(2 pi t) / t dt = Ci; the log head stays below the oscillation
    from scipy.special import sici

    errs = []
    for dt in (1 / 512, 1 / 1024):
        q = hybrid(1e-3, 1 / 32, 40.0, dt)
        exact = sici(2 * np.pi * q.t_max)[1] - sici(2 * np.pi * q.t_min)[1]
        errs.append(abs(q.integrate(np.cos(2 * np.pi * q.nodes)) - exact))
    assert errs[1] < 5e-7
    assert errs[1] < errs[0] / 8


def test_hybrid_constant_integrand():
    q = hybrid(0.25, 1.0, 10.0, 1 / 32)
    assert q.weights.sum() == pytest.approx(math.log(q.t_max / q.t_min), rel=1e-6)
    fine = hybrid(0.25, 1.0, 10.0, 1 / 64)
    # third order: halving dt shrinks the error about eightfold or better
    e1 = abs(q.weights.sum() - math.log(q.t_max / q.t_min))
    e2 = abs(fine.weights.sum() - math.log(fine.t_max / fine.t_min))
    assert e2 < e1 / 6
