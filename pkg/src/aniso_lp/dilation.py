"""Dilation groups ``t**P`` and their quasi-norms.

A dilation group is generated by a real ``n x n`` matrix ``P`` whose
symmetric part dominates the identity.  The quasi-norm ``rho(x)`` is the
unique ``t > 0`` with ``|t**(-P) x| = 1``; the dual quasi-norm ``rho*`` is
built the same way from ``P.T`` and is the one used on the frequency side.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import qmc

from ._validation import check_positive, check_vectors
from .exceptions import AdmissibilityError, ConvergenceError, DomainError

ADMISSIBILITY_TOL = 1e-9
_EIG_COND_LIMIT = 1e6
_TINY = 1e-300


class _Flow:
    """Evaluate ``exp(s A) x`` for many ``(s, x)`` pairs at once."""

    def __init__(self, A):
        self.A = A
        self.diagonal = np.array_equal(A, np.diag(np.diag(A)))
        self.norm = float(np.linalg.norm(A, 2))
        self._eig = None
        if not self.diagonal:
            lam, V = np.linalg.eig(A)
            if np.linalg.cond(V) < _EIG_COND_LIMIT:
                self._eig = (lam, V, np.linalg.inv(V))

    def matrix(self, s):
        if self.diagonal:
            return np.diag(np.exp(s * np.diag(self.A)))
        if self._eig is not None:
            lam, V, Vinv = self._eig
            return ((V * np.exp(s * lam)) @ Vinv).real
        return scipy.linalg.expm(s * self.A)

    def apply(self, s, x):
        """``exp(s A) x`` with ``s`` broadcast against ``x[..., 0]``."""
        s = np.asarray(s, dtype=float)[..., np.newaxis]
        if self.diagonal:
            return np.exp(s * np.diag(self.A)) * x
        if self._eig is not None:
            lam, V, Vinv = self._eig
            c = x @ Vinv.T
            return ((c * np.exp(s * lam)) @ V.T).real
        s, x = np.broadcast_arrays(s, x)
        mats = scipy.linalg.expm(s[..., :1, np.newaxis] * self.A)
        return np.einsum("...ij,...j->...i", mats, x)


@dataclass(frozen=True)
class QuasiNormResult:
    """Outcome of the quasi-norm root solve.

    ``value``, ``iterations`` and ``residual`` are scalars for a single
    vector and arrays for a stack of vectors.  ``residual`` is
    ``| |t**(-P) x| - 1 |`` at the returned ``t``.
    """

    value: object
    iterations: object
    residual: object


class DilationGroup:
    """The one-parameter group ``delta_t = exp(log(t) P)``.

    Use :func:`make_dilation_group` to construct one; it validates the
    admissibility condition.  Instances are immutable apart from the lazily
    estimated unit-ball volume.

    Attributes
    ----------
    P : ndarray of shape (n, n)
    gamma : float
        Homogeneous dimension ``trace(P)``.
    dim : int
    """

    def __init__(self, P):
        P = np.array(P, dtype=float)
        P.setflags(write=False)
        self.P = P
        self.dim = P.shape[0]
        self.gamma = float(np.trace(P))
        self._flow = _Flow(P)
        self._dual_flow = _Flow(np.ascontiguousarray(P.T))
        self._unit_ball_volume = None

    def __repr__(self):
        return f"DilationGroup(P={self.P.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, DilationGroup) and np.array_equal(self.P, other.P)

    def __hash__(self):
        return hash(self.P.tobytes())

    @property
    def is_isotropic(self):
        return bool(np.array_equal(self.P, np.eye(self.dim)))

    def _get_flow(self, adjoint):
        return self._dual_flow if adjoint else self._flow

    def matrix(self, t, adjoint=False):
        """Matrix of ``delta_t`` (or of its adjoint)."""
        t = check_positive(t, "t")
        return self._get_flow(adjoint).matrix(np.log(t))

    def dilate(self, t, x, adjoint=False):
        """Apply ``delta_t`` to vectors ``x`` of shape ``(..., n)``.

        ``t`` may be a scalar or an array broadcastable against ``x[..., 0]``.
        """
        t = np.asarray(t, dtype=float)
        if np.any(~(t > 0)):
            raise DomainError("dilation parameter t must be > 0")
        x = check_vectors(x, self.dim)
        flow = self._get_flow(adjoint)
        if t.ndim == 0:
            return x @ flow.matrix(np.log(t)).T
        return flow.apply(np.log(t), x)

    def rho(self, x, dual=False):
        """Quasi-norm values for ``x`` of shape ``(..., n)``."""
        return _solve_quasi_norm(self._get_flow(dual), check_vectors(x, self.dim))[0]

    def rho_star(self, xi):
        return self.rho(xi, dual=True)

    @property
    def unit_ball_volume(self):
        """Lebesgue measure of ``{rho < 1}``, estimated on first access."""
        if self._unit_ball_volume is None:
            method = "grid" if self.dim <= 2 else "qmc"
            self._unit_ball_volume = estimate_unit_ball_volume(self, method=method)
        return self._unit_ball_volume


def make_dilation_group(P):
    """Build a dilation group after checking ``<Px, x> >= <x, x>``.

    Parameters
    ----------
    P : array_like of shape (n, n)

    Raises
    ------
    AdmissibilityError
        If the smallest eigenvalue of ``(P + P.T)/2`` is below ``1 - 1e-9``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
        raise AdmissibilityError(f"P must be a square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise AdmissibilityError("P must have finite entries")
    lam_min = np.linalg.eigvalsh(0.5 * (P + P.T)).min()
    if lam_min < 1 - ADMISSIBILITY_TOL:
        raise AdmissibilityError(
            f"symmetric part of P has eigenvalue {lam_min:.6g} < 1; "
            "the condition <Px,x> >= <x,x> fails"
        )
    return DilationGroup(P)


def apply_dilation(G, t, x, adjoint=False):
    """``delta_t x`` (or ``delta_t^* x`` when ``adjoint``)."""
    if not np.isscalar(t) or not t > 0:
        raise DomainError(f"t must be a positive scalar, got {t!r}")
    return G.dilate(t, x, adjoint=adjoint)


def _solve_quasi_norm(flow, x, max_iter=200):
    """Vectorised root solve for ``log|exp(-s A) x| = 0`` in ``s = log t``.

    The bracket follows from ``|delta_t y| >= t|y|`` (t >= 1), the reverse
    bound for t <= 1, and ``|delta_t y| <= t**||A|| |y|``.  Bisection narrows
    it to width 1e-3, then safeguarded Newton polishes.
    """
    r = np.linalg.norm(x, axis=-1)
    shape = r.shape
    r = r.reshape(-1)
    X = x.reshape(-1, x.shape[-1])
    value = np.zeros_like(r)
    iters = np.zeros(r.shape, dtype=int)
    resid = np.zeros_like(r)
    live = r > _TINY
    if not np.any(live):
        return value.reshape(shape), iters.reshape(shape), resid.reshape(shape)

    Xl, rl = X[live], r[live]
    logr = np.log(rl)
    pn = max(flow.norm, 1.0)
    lo = np.where(rl >= 1, logr / pn, logr)
    hi = np.where(rl >= 1, logr, logr / pn)
    it = np.zeros(rl.shape, dtype=int)

    def g_and_slope(s):
        y = flow.apply(-s, Xl)
        yy = np.einsum("ij,ij->i", y, y)
        Py = y @ flow.A.T
        return 0.5 * np.log(yy), -np.einsum("ij,ij->i", Py, y) / yy

    while True:
        wide = hi - lo > 1e-3
        if not np.any(wide):
            break
        if it.max() >= max_iter:
            raise ConvergenceError("quasi-norm bisection did not converge")
        mid = 0.5 * (lo + hi)
        g, _ = g_and_slope(mid)
        lo = np.where(wide & (g > 0), mid, lo)
        hi = np.where(wide & (g <= 0), mid, hi)
        it += wide

    s = 0.5 * (lo + hi)
    done = np.zeros(s.shape, dtype=bool)
    g = None
    for _ in range(max_iter):
        g, slope = g_and_slope(s)
        done |= np.abs(g) <= 1e-15
        if np.all(done):
            break
        lo = np.where(g > 0, s, lo)
        hi = np.where(g < 0, s, hi)
        step = g / slope
        s_new = s - step
        outside = (s_new < lo) | (s_new > hi)
        s_new = np.where(outside & (hi > lo), 0.5 * (lo + hi), s_new)
        tiny_step = np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(s))
        s = np.where(done, s, s_new)
        it += ~done
        done |= tiny_step
    else:
        raise ConvergenceError("quasi-norm Newton iteration did not converge")
    g, _ = g_and_slope(s)

    value[live] = np.exp(s)
    iters[live] = it
    resid[live] = np.abs(np.expm1(g))
    return value.reshape(shape), iters.reshape(shape), resid.reshape(shape)


def quasi_norm(G, x, dual=False, max_iter=200):
    """Quasi-norm ``rho(x)`` (``rho*(x)`` when ``dual``) with solver diagnostics.

    Parameters
    ----------
    G : DilationGroup
    x : array_like, shape (n,) or (..., n)
    dual : bool
        Use the adjoint group generated by ``P.T``.
    max_iter : int

    Returns
    -------
    QuasiNormResult

    Raises
    ------
    ConvergenceError
        When bisection plus Newton exceed ``max_iter`` iterations.
    """
    x = check_vectors(x, G.dim)
    value, iters, resid = _solve_quasi_norm(G._get_flow(dual), x, max_iter=max_iter)
    if value.ndim == 0:
        return QuasiNormResult(float(value), int(iters), float(resid))
    return QuasiNormResult(value, iters, resid)


def estimate_unit_ball_volume(G, method="grid", resolution=512, samples=2**20, seed=0):
    """Estimate ``|{x : rho(x) < 1}|``.

    ``method="grid"`` counts cell midpoints of a ``resolution**n`` tensor grid
    on ``[-1, 1]**n`` (the unit ball lies inside it because ``rho(x) <= 1``
    forces ``|x| <= 1``).  ``method="qmc"`` uses a scrambled Sobol sample.
    """
    n = G.dim
    if method == "grid":
        h = 2.0 / resolution
        axis = -1 + h * (np.arange(resolution) + 0.5)
        count = 0
        # chunk over the first axis to bound memory
        rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else None
        for a in axis:
            pts = np.full((1, 1), a) if rest is None else np.column_stack([np.full(len(rest), a), rest])
            count += int(np.count_nonzero(G.rho(pts) < 1))
        return count * h**n
    if method == "qmc":
        m = int(np.ceil(np.log2(samples)))
        pts = 2 * qmc.Sobol(d=n, scramble=True, seed=seed).random_base2(m) - 1
        inside = 0
        for chunk in np.array_split(pts, max(1, len(pts) // 65536)):
            inside += int(np.count_nonzero(G.rho(chunk) < 1))
        return inside / len(pts) * 2.0**n
    raise ValueError(f"unknown method {method!r}")


def ball_volume(G, t):
    """``|B(0, t)| = t**gamma * |B(0, 1)|``."""
    t = check_positive(t, "t")
    return t**G.gamma * G.unit_ball_volume


def diag12_rho(x):
    """Closed-form quasi-norm of the group ``diag(t, t**2)`` on the plane."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return np.sqrt(x1**2 + np.sqrt(x1**4 + 4 * x2**2)) / np.sqrt(2)
