"""Scikit-learn style transformers over batches of grid fields.

``X`` is an array of shape ``(n_samples, n_features)`` holding flattened
fields on the grid ``grid_points``, or ``(n_samples, *grid_points)``.  The
output keeps the layout of the input.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dilation import make_dilation_group
from .exceptions import DomainError, ShapeError
from .fields import GridSpec, forward, frequency_lattice, inverse, zeta
from .kernels import (
    ball_averaging_kernel,
    marcinkiewicz_half_profile,
    marcinkiewicz_sign_profile,
    poisson_gradient_family,
    potential_profile,
    radial_profile,
)
from .operators import check_zero_mean, riesz_symbol
from .squares import avg_square, g_vector, iterated_potential_square, iterated_square, potential_square

SQUARE_KINDS = ("radial", "potential_profile", "poisson", "mu", "nu", "G", "H", "E", "U")


class _GridTransformer(TransformerMixin, BaseEstimator):
    """Shared validation: a dilation matrix, a grid, and batches of fields on it."""

    def _setup(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        self.group_ = make_dilation_group(P)
        dim = self.group_.dim
        pts = self.grid_points
        pts = (int(pts),) * dim if np.isscalar(pts) else tuple(int(v) for v in pts)
        ext = self.extent
        ext = (float(ext),) * dim if np.isscalar(ext) else tuple(float(v) for v in ext)
        self.grid_ = GridSpec(ext, pts)
        self.n_features_in_ = self.grid_.size

    def _fields(self, X, reset):
        if np.iscomplexobj(X):
            # check_array refuses complex data; validate the parts, keep the field
            X = np.asarray(X, dtype=complex)
            check_array(X.real, allow_nd=True)
            check_array(X.imag, allow_nd=True)
        else:
            X = check_array(X, dtype=None, allow_nd=True, ensure_2d=True)
        if X.dtype.kind not in "fc":
            X = X.astype(float)
        if reset:
            self._setup()
        else:
            check_is_fitted(self, "grid_")
        g = self.grid_
        if X.ndim == 2:
            if X.shape[1] != g.size:
                raise ShapeError(f"X has {X.shape[1]} features, the grid has {g.size}")
            return X.reshape((X.shape[0],) + g.points), True
        if X.shape[1:] != g.points:
            raise ShapeError(f"field shape {X.shape[1:]} does not match the grid {g.points}")
        return X, False

    def _out(self, Y, flat):
        return Y.reshape(Y.shape[0], -1) if flat else Y

    def fit(self, X, y=None):
        self._fields(X, reset=True)
        return self


class RieszPotential(_GridTransformer):
    """``I_beta`` applied to every field; ``inverse_transform`` applies ``I_-beta``.

    Parameters
    ----------
    beta : float
    P : array-like
        Dilation matrix.
    extent, grid_points : float or tuple, int or tuple
    """

    def __init__(self, beta=1.0, P=((1.0, 0.0), (0.0, 2.0)), extent=16.0, grid_points=256):
        self.beta = beta
        self.P = P
        self.extent = extent
        self.grid_points = grid_points

    def _apply(self, X, beta):
        Z, flat = self._fields(X, reset=False)
        if beta > 0:
            check_zero_mean(Z, self.grid_)
        lat = frequency_lattice(self.group_, self.grid_)
        Y = inverse(forward(Z, self.grid_) * riesz_symbol(self.group_, beta)(lat.points()), self.grid_)
        if Z.dtype.kind == "f":
            Y = Y.real
        return self._out(Y, flat)

    def transform(self, X):
        return self._apply(X, float(self.beta))

    def inverse_transform(self, X):
        return self._apply(X, -float(self.beta))


class BandLimiter(_GridTransformer):
    """Multiply spectra by the annulus cutoff ``zeta^(eps)``."""

    def __init__(self, eps=0.125, P=((1.0, 0.0), (0.0, 2.0)), extent=16.0, grid_points=256):
        self.eps = eps
        self.P = P
        self.extent = extent
        self.grid_points = grid_points

    def transform(self, X):
        Z, flat = self._fields(X, reset=False)
        if not 0 < self.eps < 0.5:
            raise DomainError("eps must lie in (0, 1/2)")
        lat = frequency_lattice(self.group_, self.grid_)
        Y = inverse(forward(Z, self.grid_) * zeta(lat.rho_star, self.eps), self.grid_)
        if Z.dtype.kind == "f":
            Y = Y.real
        return self._out(Y, flat)


class SquareFunction(_GridTransformer):
    """Pointwise square function of each field.

    Parameters
    ----------
    kind : str
        ``"radial"`` (normalized radial generator), ``"potential_profile"``
        (``psi^(alpha)`` for the ball kernel), ``"poisson"`` (vector Poisson
        family, ``P = I`` only), ``"mu"``/``"nu"`` (1-D Marcinkiewicz),
        ``"G"``, ``"H"``, ``"E"``, ``"U"`` (averaging, potential and iterated
        types with the ball kernel).
    alpha : float
    k : int
        Iteration order for ``"E"``/``"U"``.
    P, extent, grid_points
        Group and grid.
    quad : TQuadrature, optional
        Scale rule; chosen from the spectrum when omitted.

    Attributes
    ----------
    quadrature_ : TQuadrature
        Rule used by the last call to ``transform``.
    truncation_note_ : dict
    """

    def __init__(self, kind="radial", alpha=1.0, k=1, P=((1.0, 0.0), (0.0, 2.0)), extent=16.0, grid_points=256, quad=None):
        self.kind = kind
        self.alpha = alpha
        self.k = k
        self.P = P
        self.extent = extent
        self.grid_points = grid_points
        self.quad = quad

    def fit(self, X, y=None):
        if self.kind not in SQUARE_KINDS:
            raise DomainError(f"kind must be one of {SQUARE_KINDS}, got {self.kind!r}")
        super().fit(X, y)
        G = self.group_
        if self.kind in ("mu", "nu") and G.dim != 1:
            raise DomainError("Marcinkiewicz functions need a one-dimensional grid")
        if self.kind == "poisson" and not G.is_isotropic:
            raise DomainError("the Poisson family needs P = I")
        return self

    def transform(self, X):
        Z, flat = self._fields(X, reset=False)
        G, pair, a, q = self.group_, (Z, self.grid_), self.alpha, self.quad
        kind = self.kind
        if kind == "radial":
            r = g_vector(pair, [radial_profile(G)], G, q)
        elif kind == "potential_profile":
            r = g_vector(pair, [potential_profile(G, a, ball_averaging_kernel(G))], G, q)
        elif kind == "poisson":
            r = g_vector(pair, poisson_gradient_family(G), G, q)
        elif kind == "mu":
            r = g_vector(pair, [marcinkiewicz_sign_profile(G)], G, q)
        elif kind == "nu":
            r = g_vector(pair, [marcinkiewicz_half_profile(G)], G, q)
        elif kind == "G":
            r = avg_square(pair, ball_averaging_kernel(G), a, G, q)
        elif kind == "H":
            r = potential_square(pair, ball_averaging_kernel(G), a, G, q)
        elif kind == "E":
            r = iterated_square(pair, ball_averaging_kernel(G), a, self.k, G, q)
        else:
            r = iterated_potential_square(pair, ball_averaging_kernel(G), a, self.k, G, q)
        self.quadrature_ = r.quadrature
        self.truncation_note_ = r.truncation_note
        return self._out(r.values, flat)

    def score(self, X, y=None):
        """Mean ratio ``||S f||_2 / ||f||_2`` over the batch."""
        Z, _ = self._fields(X, reset=False)
        S = self.transform(Z)
        ax = tuple(range(1, Z.ndim))
        return float(np.mean(np.sqrt(np.sum(S**2, axis=ax) / np.sum(np.abs(Z) ** 2, axis=ax))))
