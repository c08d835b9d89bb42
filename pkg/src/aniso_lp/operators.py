"""Fourier multipliers, Riesz potentials, scale-integral symbols and inversion."""

import math

import numpy as np

from .exceptions import (
    ApproximantTooFarError,
    DegenerateSymbolError,
    DomainError,
    MeanNotZeroError,
    NonFiniteSymbolError,
)
from .fields import SpatialField, SymbolPoints, forward, frequency_lattice, inverse
from .kernels import _as_points
from .quadrature import log_uniform

DEFAULT_LP_EPS = 2.0**-12


class MultiplierSymbol:
    """A Fourier multiplier ``m(xi)``.

    Parameters
    ----------
    evaluator : callable
        Maps :class:`SymbolPoints` to values.
    group : DilationGroup
    homogeneous0 : bool
        ``m(delta_s^* xi) = m(xi)``.
    origin_value : complex
        Value assigned at ``xi = 0``.
    hermitian : bool
        ``m(-xi) = conj(m(xi))``, so real fields map to real fields.
    """

    def __init__(self, evaluator, group, homogeneous0=False, origin_value=0.0, hermitian=True, tag="symbol"):
        self._eval = evaluator
        self.group = group
        self.homogeneous0 = homogeneous0
        self.origin_value = origin_value
        self.hermitian = hermitian
        self.tag = tag

    def __repr__(self):
        return f"MultiplierSymbol(tag={self.tag!r})"

    def __call__(self, xi):
        pts = _as_points(xi, self.group)
        out = np.asarray(self._eval(pts))
        out = np.broadcast_to(out, pts.xi.shape[:-1])
        zero = pts.rho == 0
        if np.any(zero):
            out = np.array(out, dtype=np.result_type(out, type(self.origin_value), float))
            out[zero] = self.origin_value
        return out

    @classmethod
    def constant(cls, c, group):
        return cls(lambda pts: np.full(pts.xi.shape[:-1], c), group, True, origin_value=c,
                   hermitian=np.isrealobj(c), tag=f"const({c})")

    def __mul__(self, other):
        if not isinstance(other, MultiplierSymbol):
            return NotImplemented
        return MultiplierSymbol(
            lambda pts: self(pts) * other(pts), self.group, self.homogeneous0 and other.homogeneous0,
            self.origin_value * other.origin_value, self.hermitian and other.hermitian,
            f"{self.tag}*{other.tag}",
        )


def riesz_symbol(G, beta):
    """``rho*(xi)**(-beta)`` with 0 at the origin."""

    def ev(pts):
        with np.errstate(divide="ignore"):
            return np.where(pts.rho > 0, pts.rho ** (-beta), 0.0)

    return MultiplierSymbol(ev, G, beta == 0, origin_value=1.0 if beta == 0 else 0.0, tag=f"riesz({beta:g})")


def _apply_values(samples, grid, values, real):
    out = inverse(forward(samples, grid) * values, grid)
    return out.real if real else out


def apply_multiplier(m, f):
    """``T_m f``: multiply the spectrum of ``f`` by ``m`` and transform back.

    Raises
    ------
    NonFiniteSymbolError
        If ``m`` is not finite on the frequency lattice.
    """
    lat = frequency_lattice(m.group, f.grid)
    vals = m(lat.points())
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSymbolError(f"symbol {m.tag} is not finite on the lattice")
    return SpatialField(f.grid, _apply_values(f.samples, f.grid, vals, f.is_real and m.hermitian))


def check_zero_mean(samples, grid, tol=1e-10):
    """Raise unless every field in ``samples`` has ``|f_hat(0)| <= tol ||f||_2``."""
    axes = tuple(range(-grid.dim, 0))
    mean = np.abs(np.sum(samples, axis=axes)) * grid.cell_volume
    norm = np.sqrt(np.sum(np.abs(samples) ** 2, axis=axes) * grid.cell_volume)
    if np.any(mean > tol * np.maximum(norm, np.finfo(float).tiny)):
        raise MeanNotZeroError("positive-order potentials need zero-mean input")


def riesz_potential(f, G, beta):
    """``I_beta f`` with transform ``rho*(xi)**(-beta) f_hat(xi)``.

    Raises
    ------
    MeanNotZeroError
        When ``beta > 0`` and ``|f_hat(0)| > 1e-10 ||f||_2``.
    """
    if beta == 0:
        return SpatialField(f.grid, f.samples.copy())
    if beta > 0:
        check_zero_mean(f.samples, f.grid)
    return apply_multiplier(riesz_symbol(G, beta), f)


def _profiles(psi):
    return list(psi) if isinstance(psi, (list, tuple)) else [psi]


def lp_symbol(psi, G, eps=DEFAULT_LP_EPS, quad=None):
    """Scale-integral symbol ``m(xi) = int_eps^(1/eps) |psi_hat(delta_t^* xi)|^2 dt/t``.

    ``psi`` may be a list of profiles, in which case the squared moduli are
    summed.  ``quad`` defaults to 16 log-uniform nodes per octave.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    if quad is None:
        quad = log_uniform(eps, 1 / eps)
    profiles = _profiles(psi)

    def ev(pts):
        acc = np.zeros(pts.xi.shape[:-1])
        for t, w in zip(quad.nodes, quad.weights):
            d = SymbolPoints(G.dilate(t, pts.xi, adjoint=True), t * pts.rho)
            for p in profiles:
                v = p(d)
                acc += w * (v.real**2 + v.imag**2) if np.iscomplexobj(v) else w * v * v
        return acc

    return MultiplierSymbol(ev, G, True, origin_value=0.0, tag=f"lp({','.join(p.tag for p in profiles)})")


def unit_shell(G, n_directions=256, radii=(1.0, 1.25, 1.5, 1.75, 2.0), seed=0):
    """Points with ``rho*`` in ``[1, 2]``: unit directions pushed out by ``delta^*_r``."""
    if G.dim == 1:
        omega = np.array([[1.0], [-1.0]])
    elif G.dim == 2:
        th = 2 * np.pi * np.arange(n_directions) / n_directions
        omega = np.stack([np.cos(th), np.sin(th)], -1)
    else:
        omega = np.random.default_rng(seed).standard_normal((n_directions, G.dim))
        omega /= np.linalg.norm(omega, axis=-1, keepdims=True)
    xi = np.concatenate([G.dilate(r, omega, adjoint=True) for r in radii])
    rho = np.repeat(np.asarray(radii, dtype=float), len(omega))
    return SymbolPoints(xi, rho)


def shell_min_modulus(m, shell=None):
    shell = shell or unit_shell(m.group)
    return float(np.min(np.abs(m(shell))))


def invert_multiplier(m, shell=None, tol=1e-8):
    """Pointwise reciprocal ``1/m`` with value 0 at the origin.

    Raises
    ------
    DegenerateSymbolError
        If ``min |m|`` over the unit shell is below ``tol``.
    """
    mn = shell_min_modulus(m, shell)
    if not mn >= tol:
        raise DegenerateSymbolError(f"min |m| on the unit shell is {mn:.3g} < {tol:g}")

    def ev(pts):
        v = m(pts)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(pts.rho > 0, 1.0 / v, 0.0)

    return MultiplierSymbol(ev, m.group, m.homogeneous0, 0.0, m.hermitian, f"inv({m.tag})")


def default_approximant(m, width=0.05, n_rot=16, seed=0):
    """Smooth ``ell`` near ``m``: average ``m`` over small rotations of the unit-sphere point.

    ``ell(xi)`` averages ``m(R omega)`` with ``omega = delta^*_{1/rho*(xi)} xi``
    and ``R`` drawn from a fixed set of rotations within angle ``width``,
    weighted by a smooth bump.  It is homogeneous of degree 0 by construction.
    """
    G = m.group
    n = G.dim
    if n == 1:
        return m
    rng = np.random.default_rng(seed)
    s = np.linspace(-1, 1, n_rot + 2)[1:-1]
    wts = np.exp(-1.0 / (1.0 - s**2))
    wts /= wts.sum()
    mats = []
    for k, sk in enumerate(s):
        A = rng.standard_normal((n, n)) if n > 2 else np.array([[0.0, -1.0], [1.0, 0.0]])
        A = A - A.T
        A *= width * sk / max(np.linalg.norm(A, 2), 1e-300)
        w, V = np.linalg.eig(A)
        mats.append(((V * np.exp(w)) @ np.linalg.inv(V)).real)

    def ev(pts):
        r = pts.rho
        safe = np.where(r > 0, r, 1.0)
        omega = G.dilate(1.0 / safe, pts.xi, adjoint=True)
        acc = 0
        for W, R in zip(wts, mats):
            acc = acc + W * m(SymbolPoints(omega @ R.T, np.ones_like(r)))
        return acc

    return MultiplierSymbol(ev, G, True, m.origin_value, m.hermitian, f"smooth({m.tag})")


def functional_calculus(m, ell, F, K=40, theta_nodes=1024, shell=None):
    """Truncated Cauchy series for ``F(m)``.

    ``F(m) = (1/2pi) sum_{k<=K} ((m - ell)/(2 eps0))**k N_k`` with
    ``N_k(xi) = int_0^{2pi} F(ell(xi) + 2 eps0 e^{i theta}) e^{-ik theta} d theta``
    computed by the trapezoid rule on ``theta_nodes`` points and
    ``eps0 = min_shell |m| / 4``.

    Parameters
    ----------
    m, ell : MultiplierSymbol
    F : callable
        Holomorphic on ``C \\ {0}``, vectorised over complex arrays.
    K : int
        Highest retained power.

    Raises
    ------
    ApproximantTooFarError
        If ``|m - ell| >= eps0`` on the shell or at evaluated points.
    """
    if K < 0 or theta_nodes < 2 * (K + 1):
        raise DomainError("need K >= 0 and theta_nodes >= 2(K+1)")
    shell = shell or unit_shell(m.group)
    eps0 = 0.25 * shell_min_modulus(m, shell)
    if eps0 <= 0:
        raise DegenerateSymbolError("m vanishes on the unit shell")
    gap = np.max(np.abs(m(shell) - ell(shell)))
    if gap >= eps0:
        raise ApproximantTooFarError(f"||m - ell|| = {gap:.3g} >= eps0 = {eps0:.3g}")
    theta = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    circle = 2 * eps0 * np.exp(1j * theta)

    def partial_sums(pts):
        """Array of partial sums ``S_0 .. S_K`` at ``pts``."""
        mv = np.asarray(m(pts), dtype=complex)
        lv = np.asarray(ell(pts), dtype=complex)
        d = mv - lv
        if np.any(np.abs(d) >= eps0):
            raise ApproximantTooFarError("|m - ell| >= eps0 at evaluated points")
        vals = F(lv[..., None] + circle)
        Nk = np.fft.fft(vals, axis=-1)[..., : K + 1] * (2 * np.pi / theta_nodes)
        q = d / (2 * eps0)
        powers = q[..., None] ** np.arange(K + 1)
        return np.cumsum(powers * Nk, axis=-1) / (2 * np.pi)

    def ev(pts):
        return partial_sums(pts)[..., -1]

    sym = MultiplierSymbol(ev, m.group, m.homogeneous0, complex(F(np.complex128(m.origin_value)))
                           if m.origin_value != 0 else 0.0, False, f"F({m.tag})")
    sym.partial_sums = partial_sums
    sym.eps0 = eps0
    return sym


def derivative_symbol(G, a):
    """``prod_j (2 pi i xi_j)**a_j``."""
    a = tuple(int(v) for v in a)
    if len(a) != G.dim or any(v < 0 for v in a):
        raise DomainError(f"multi-index {a} does not fit dimension {G.dim}")

    def ev(pts):
        out = np.ones(pts.xi.shape[:-1], dtype=complex)
        for j, aj in enumerate(a):
            if aj:
                out = out * (2j * np.pi * pts.xi[..., j]) ** aj
        return out

    origin = 1.0 if sum(a) == 0 else 0.0
    return MultiplierSymbol(ev, G, False, origin, True, f"d{a}")


def spatial_derivative(f, a, G=None):
    """Spectral derivative ``d^a f``; exact on band-limited fields."""
    from .dilation import make_dilation_group

    G = G or make_dilation_group(np.eye(f.grid.dim))
    return apply_multiplier(derivative_symbol(G, a), f)


def band_energy(psi, G, xi, t_lo, t_hi, n=64):
    """``int_{t_lo}^{t_hi} |psi_hat(delta_t^* xi)|^2 dt/t`` on unit-shell points ``xi``."""
    q = log_uniform(t_lo, t_hi, per_octave=max(1, int(math.ceil(n / max(math.log2(t_hi / t_lo), 1)))))
    return lp_symbol(psi, G, quad=q, eps=0.5)(xi)
