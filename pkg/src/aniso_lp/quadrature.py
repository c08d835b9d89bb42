"""Log-uniform trapezoid rules for scale integrals ``int f(t) dt/t``."""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive
from .exceptions import DomainError

DEFAULT_PER_OCTAVE = 16
DEFAULT_MARGIN_OCTAVES = 8


@dataclass(frozen=True, eq=False)
class TQuadrature:
    """Trapezoid rule in ``log t`` on nodes ``t_j = 2**(j / per_octave)``.

    Nodes sit on a fixed dyadic sub-lattice, so two rules with the same
    ``per_octave`` share every node they have in common.

    Attributes
    ----------
    nodes : ndarray
        Ascending positive scales.
    weights : ndarray
        Weights for the measure ``dt/t``.
    per_octave : int
    """

    nodes: np.ndarray
    weights: np.ndarray
    per_octave: int

    @property
    def t_min(self):
        return float(self.nodes[0])

    @property
    def t_max(self):
        return float(self.nodes[-1])

    @property
    def range(self):
        return (self.t_min, self.t_max)

    def __len__(self):
        return len(self.nodes)

    def weighted(self, alpha):
        """Weights for ``dt / t**(1 + 2 alpha)``."""
        return self.weights * self.nodes ** (-2.0 * alpha)

    def integrate(self, values, alpha=0.0):
        """Apply the rule along the first axis of ``values``."""
        values = np.asarray(values)
        w = self.weighted(alpha) if alpha else self.weights
        return np.tensordot(w, values, axes=(0, 0))

    def to_dict(self):
        return {"t_min": self.t_min, "t_max": self.t_max, "per_octave": self.per_octave, "n_nodes": len(self)}


def log_uniform(t_min, t_max, per_octave=DEFAULT_PER_OCTAVE):
    """Rule covering ``[t_min, t_max]``, widened outward to the dyadic node lattice.

    Examples
    --------
    >>> q = log_uniform(0.25, 4.0, per_octave=4)
    >>> len(q), round(q.weights.sum() / math.log(16), 12)
    (17, 1.0)
    """
    t_min = check_positive(t_min, "t_min")
    t_max = check_positive(t_max, "t_max")
    if not isinstance(per_octave, (int, np.integer)) or per_octave < 1:
        raise DomainError(f"per_octave must be a positive integer, got {per_octave!r}")
    if t_max <= t_min:
        raise DomainError("t_max must exceed t_min")
    j0 = math.floor(per_octave * math.log2(t_min) + 1e-9)
    j1 = math.ceil(per_octave * math.log2(t_max) - 1e-9)
    j = np.arange(j0, j1 + 1)
    nodes = np.exp2(j / per_octave)
    h = math.log(2.0) / per_octave
    weights = np.full(len(j), h)
    weights[0] = weights[-1] = h / 2
    return TQuadrature(nodes, weights, int(per_octave))


def for_band(a, b, per_octave=DEFAULT_PER_OCTAVE, margin_octaves=DEFAULT_MARGIN_OCTAVES):
    """Default rule ``[2**-m / b, 2**m / a]`` for spectra supported in ``a <= rho* <= b``."""
    a = check_positive(a, "a")
    b = check_positive(b, "b")
    return log_uniform(2.0**-margin_octaves / b, 2.0**margin_octaves / a, per_octave)


_GREGORY = np.array([3 / 8, 7 / 6, 23 / 24])


def _gregory(n):
    """Unit-spacing third-order Gregory weights on ``n >= 6`` equispaced nodes."""
    w = np.ones(n)
    w[:3] = _GREGORY
    w[-3:] = _GREGORY[::-1]
    return w


def hybrid(t_min, t_switch, t_max, dt, per_octave=DEFAULT_PER_OCTAVE):
    """Log-uniform nodes on ``[t_min, t_switch]`` then uniform steps ``dt`` up to ``t_max``.

    Suited to integrands that oscillate in ``t`` at large scales.  The
    junction node is shared.  Each piece carries Gregory end corrections so
    the junction does not degrade the rule to second order.
    """
    head = log_uniform(t_min, t_switch, per_octave)
    ts = head.t_max
    dt = check_positive(dt, "dt")
    n = max(5, int(math.ceil((t_max - ts) / dt)))
    lin = ts + dt * np.arange(n + 1)
    if len(head) < 6:
        raise DomainError("log head needs at least six nodes")
    hw = _gregory(len(head)) * (math.log(2.0) / per_octave)
    lw = _gregory(n + 1) * dt / lin
    nodes = np.concatenate([head.nodes, lin[1:]])
    weights = np.concatenate([hw, lw[1:]])
    weights[len(head) - 1] += lw[0]
    return TQuadrature(nodes, weights, int(per_octave))
