"""Averaging kernels, iterated-kernel symbols and Littlewood-Paley profiles.

An :class:`AveragingKernel` is stored as cell values on a fine reference
grid, i.e. as the discrete measure ``sum_j Phi_j h^n delta_{x_j}``.  Its
transform is tabulated once by FFT and evaluated anywhere by spline
interpolation; near the origin ``1 - Phi_hat`` comes from a moment Taylor
series so that the flatness of the complement is not lost to cancellation.

An :class:`LPProfile` wraps a symbol ``xi -> psi_hat(xi)`` evaluated on
:class:`~aniso_lp.fields.SymbolPoints`.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ._validation import check_positive
from .exceptions import DomainError, NormalizationError, ShapeError
from .fields import (
    GridSpec,
    SpatialField,
    SymbolPoints,
    forward,
    frequency_lattice,
    inverse,
    phi0,
    read_field,
    smooth_step,
)

# cells per unit length and padded table extent, by dimension
_RASTER = {1: (64, 32.0), 2: (64, 32.0), 3: (16, 16.0)}
_SUPERSAMPLE = 16
_TAYLOR_ORDER = 14


def _as_points(xi, group=None):
    if isinstance(xi, SymbolPoints):
        return xi
    return SymbolPoints(np.asarray(xi, dtype=float), group=group)


def _multi_indices(dim, max_order, min_order=1):
    out = []
    for order in range(min_order, max_order + 1):
        for a in itertools.product(range(order + 1), repeat=dim):
            if sum(a) == order:
                out.append(a)
    return out


class AveragingKernel:
    """Compactly supported kernel with a tabulated Fourier transform.

    Parameters
    ----------
    spatial : SpatialField
        Cell values on a reference grid whose sample set is symmetric about
        the origin on the support.  Rescaled so the discrete integral is 1.
    claimed_order : float
        The ``alpha`` for which the kernel is declared to lie in ``M^alpha``.
    support_radius : float
        Euclidean radius of a ball containing the support.
    table_extent : float, optional
        Spatial period of the zero-padded raster used for the table.

    Notes
    -----
    The transform is the trigonometric polynomial of the discrete measure.
    With ``R = 1/(2h)`` the half-width of the table, values are multiplied by
    ``phi0(2|xi|/R)`` so they vanish smoothly for ``|xi| >= R``; beyond the
    table ``Phi_hat = 0``.  ``vanish_radius`` records ``R``.
    """

    def __init__(self, spatial, claimed_order=0.0, support_radius=None, table_extent=None, name="kernel"):
        grid = spatial.grid
        if len(set(grid.cell)) != 1:
            raise ShapeError("reference grid must have equal cells on every axis")
        vals = np.asarray(spatial.samples)
        if vals.dtype.kind == "c":
            if np.abs(vals.imag).max() > 0:
                raise DomainError("averaging kernels must be real")
            vals = vals.real
        total = vals.sum() * grid.cell_volume
        if not np.isfinite(total) or abs(total) < 1e-12:
            raise NormalizationError("kernel integral vanishes")
        vals = vals / total
        self.spatial = SpatialField(grid, vals)
        self.claimed_order = float(claimed_order)
        self.name = name
        self.dim = grid.dim
        self.h = grid.cell[0]
        x = grid.coords()
        nz = vals != 0
        self._pts = x[nz]
        self._w = vals[nz] * grid.cell_volume
        r = np.linalg.norm(self._pts, axis=-1).max() if len(self._pts) else 0.0
        self.support_radius = float(support_radius) if support_radius is not None else float(r)
        if table_extent is None:
            table_extent = _RASTER.get(self.dim, (16, 16.0))[1]
        self._build_table(float(table_extent))
        self._build_taylor()

    def __repr__(self):
        return f"AveragingKernel(name={self.name!r}, dim={self.dim}, claimed_order={self.claimed_order})"

    @property
    def integral(self):
        return float(self._w.sum())

    @property
    def is_even(self):
        v = self.spatial.samples
        return bool(np.array_equal(v, self._reflect(v)))

    @staticmethod
    def _reflect(v):
        # x_j -> -x_j maps index j to N - j (mod N) on a centred grid
        for ax in range(v.ndim):
            v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
        return v

    def _build_table(self, extent):
        grid = self.spatial.grid
        M = int(round(extent / self.h))
        if M < max(grid.points) or M & (M - 1):
            raise ShapeError("table extent must be a power-of-two multiple of the cell covering the raster")
        tgrid = GridSpec((extent,) * self.dim, (M,) * self.dim)
        big = np.zeros(tgrid.points)
        off = tuple((M - N) // 2 for N in grid.points)
        big[tuple(slice(o, o + N) for o, N in zip(off, grid.points))] = self.spatial.samples
        tab = np.fft.fftshift(forward(big, tgrid))
        self.table_spacing = 1.0 / extent
        self.table_half_width = M / (2 * extent)
        self.vanish_radius = self.table_half_width
        xi = np.stack(np.meshgrid(*[np.fft.fftshift(np.fft.fftfreq(M, self.h))] * self.dim, indexing="ij"), -1)
        tab = tab * phi0(2 * np.linalg.norm(xi, axis=-1) / self.vanish_radius)
        self._table_origin = -self.table_half_width
        self._even = self.is_even
        parts = [tab.real] if self._even else [tab.real, tab.imag]
        self._coef = [ndimage.spline_filter(p, order=5, mode="grid-wrap") for p in parts]

    def _build_taylor(self):
        R = max(self.support_radius, self.h)
        self.taylor_radius = 0.1 / R
        self._taylor = []
        for a in _multi_indices(self.dim, _TAYLOR_ORDER):
            m = float(np.sum(self._w * np.prod(self._pts ** np.array(a), axis=-1)))
            k = sum(a)
            c = -((-2j * np.pi) ** k) * m / math.prod(math.factorial(ai) for ai in a)
            if c != 0:
                self._taylor.append((a, c))

    def _interp(self, xi):
        shape = xi.shape[:-1]
        flat = xi.reshape(-1, self.dim)
        out = np.zeros(flat.shape[0], dtype=float if self._even else complex)
        inside = np.all(np.abs(flat) < self.table_half_width, axis=-1)
        if np.any(inside):
            coords = ((flat[inside] - self._table_origin) / self.table_spacing).T
            vals = [ndimage.map_coordinates(c, coords, order=5, mode="grid-wrap", prefilter=False) for c in self._coef]
            out[inside] = vals[0] if self._even else vals[0] + 1j * vals[1]
        return out.reshape(shape)

    def _taylor_complement(self, xi):
        out = np.zeros(xi.shape[:-1], dtype=complex)
        pw = [[np.ones(xi.shape[:-1])] for _ in range(self.dim)]
        for d in range(self.dim):
            for _ in range(_TAYLOR_ORDER):
                pw[d].append(pw[d][-1] * xi[..., d])
        for a, c in self._taylor:
            term = c * pw[0][a[0]]
            for d in range(1, self.dim):
                term = term * pw[d][a[d]]
            out += term
        return out.real if self._even else out

    def complement(self, xi):
        """``1 - Phi_hat(xi)`` with the small-frequency part from moments."""
        xi = _as_points(xi).xi
        r = np.linalg.norm(xi, axis=-1)
        small = r < self.taylor_radius
        out = 1.0 - self._interp(xi)
        if np.any(small):
            out = np.asarray(out)
            out[small] = self._taylor_complement(xi[small])
        return out

    def fourier(self, xi):
        """``Phi_hat(xi)`` at arbitrary frequencies of shape ``(..., n)``."""
        return 1.0 - self.complement(xi)

    def direct_fourier(self, xi):
        """Exact transform of the discrete measure by direct summation (slow)."""
        xi = np.asarray(xi, dtype=float)
        flat = xi.reshape(-1, self.dim)
        out = np.empty(len(flat), dtype=complex)
        for i in range(0, len(flat), 256):
            ph = flat[i : i + 256] @ self._pts.T
            out[i : i + 256] = np.exp(-2j * np.pi * ph) @ self._w
        return out.reshape(xi.shape[:-1])

    def direct_complement(self, xi):
        """``1 - Phi_hat`` summed as ``sum Phi (2 sin^2(pi x.xi) + i sin(2 pi x.xi))``."""
        xi = np.asarray(xi, dtype=float)
        flat = xi.reshape(-1, self.dim)
        out = np.empty(len(flat), dtype=complex)
        for i in range(0, len(flat), 256):
            ph = np.pi * (flat[i : i + 256] @ self._pts.T)
            out[i : i + 256] = (2 * np.sin(ph) ** 2 + 1j * np.sin(2 * ph)) @ self._w
        return out.reshape(xi.shape[:-1])

    def moment(self, a):
        """``int x^a Phi(x) dx`` for a multi-index ``a``."""
        a = np.asarray(a)
        return float(np.sum(self._w * np.prod(self._pts**a, axis=-1)))

    def translate(self, shift):
        """Kernel moved by ``shift`` (rounded to whole cells)."""
        cells = np.rint(np.asarray(shift, dtype=float) / self.h).astype(int)
        grid = self.spatial.grid
        for c, N in zip(cells, grid.points):
            if abs(c) * self.h + self.support_radius >= grid.extent[0] / 2 - self.h:
                raise DomainError("shift moves the support off the reference grid")
        v = np.roll(self.spatial.samples, tuple(cells), axis=tuple(range(self.dim)))
        return AveragingKernel(
            SpatialField(grid, v),
            self.claimed_order,
            self.support_radius + float(np.linalg.norm(cells * self.h)),
            name=f"{self.name}+shift",
        )


def _reference_grid(dim, reach=4.0):
    cells, _ = _RASTER.get(dim, (16, 16.0))
    N = int(2 * reach * cells)
    return GridSpec((2 * reach,) * dim, (N,) * dim)


_BALL_CACHE = {}


def ball_averaging_kernel(G):
    """Normalised indicator of the unit ball ``{rho < 1}``.

    The unit ball of every admissible group is the Euclidean unit ball, so
    the raster depends only on the dimension.  Cells cut by the sphere are
    averaged over ``16**n`` sub-samples.
    """
    dim = G.dim
    if dim in _BALL_CACHE:
        return _BALL_CACHE[dim]
    grid = _reference_grid(dim)
    h = grid.cell[0]
    x = grid.coords()
    r = np.linalg.norm(x, axis=-1)
    half_diag = 0.5 * h * math.sqrt(dim)
    vals = (r < 1).astype(float)
    edge = np.abs(r - 1) <= half_diag
    sub = (np.arange(_SUPERSAMPLE) + 0.5) / _SUPERSAMPLE - 0.5
    offs = np.stack(np.meshgrid(*[sub * h] * dim, indexing="ij"), -1).reshape(-1, dim)
    centres = x[edge]
    frac = np.empty(len(centres))
    for i in range(0, len(centres), 64):
        c = centres[i : i + 64, None, :] + offs[None]
        frac[i : i + 64] = np.mean(np.sum(c * c, axis=-1) < 1, axis=-1)
    vals[edge] = frac
    K = AveragingKernel(SpatialField(grid, vals), claimed_order=1.9999, support_radius=1.0, name="ball")
    _BALL_CACHE[dim] = K
    return K


def smooth_bump_kernel(dim):
    """Normalised ``exp(-1/(1 - |x|^2))`` on the unit ball; even, so in ``M^alpha`` for ``alpha < 2``."""
    grid = _reference_grid(dim)
    r2 = np.sum(grid.coords() ** 2, axis=-1)
    inside = r2 < 1
    vals = np.zeros(grid.points)
    vals[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return AveragingKernel(SpatialField(grid, vals), claimed_order=1.9999, support_radius=1.0, name="bump")


def load_kernel(path, sidecar=None):
    """Read a kernel from a ``.fld`` raster plus JSON sidecar ``{claimed_order, support_box}``."""
    f = read_field(path)
    sidecar = sidecar or str(path) + ".json"
    with open(sidecar) as fh:
        meta = json.load(fh)
    box = np.asarray(meta["support_box"], dtype=float)
    radius = float(np.linalg.norm(np.max(np.abs(box.reshape(-1, f.grid.dim)), axis=0)))
    return AveragingKernel(f, meta.get("claimed_order", 0.0), support_radius=radius, name=str(path))


@dataclass(frozen=True)
class MomentCheck:
    passed: bool
    integral: float
    residuals: list = field(default_factory=list)


def check_moment_class(Phi, alpha, tol=1e-8):
    """Check ``int Phi = 1`` and ``int x^a Phi = 0`` for ``1 <= |a| <= floor(alpha)``.

    Returns
    -------
    MomentCheck
        ``residuals`` lists ``(a, moment)`` pairs.
    """
    alpha = check_positive(alpha, "alpha", strict=False)
    integral = Phi.integral
    ok = abs(integral - 1) <= 1e-9
    residuals = []
    if alpha >= 1:
        scale = max(Phi.support_radius, 1.0)
        for a in _multi_indices(Phi.dim, int(math.floor(alpha))):
            m = Phi.moment(a)
            residuals.append((a, m))
            ok &= abs(m) <= tol * scale ** sum(a)
    return MomentCheck(bool(ok), integral, residuals)


class IteratedSymbol:
    """Symbol of ``K^(k)``: ``1 - (1 - Phi_hat)**k``."""

    def __init__(self, Phi, k):
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise DomainError(f"k must be a positive integer, got {k!r}")
        self.kernel = Phi
        self.k = int(k)

    def complement(self, xi):
        return self.kernel.complement(xi) ** self.k

    def __call__(self, xi):
        return 1.0 - self.complement(xi)

    def binomial(self, xi):
        """``-sum_j (-1)**j C(k, j) Phi_hat**j``."""
        ph = self.kernel.fourier(xi)
        out = np.zeros(np.shape(ph), dtype=np.result_type(ph, float))
        for j in range(1, self.k + 1):
            out = out - (-1) ** j * math.comb(self.k, j) * ph**j
        return out


def iterated_symbol(Phi, k):
    return IteratedSymbol(Phi, k)


def iterated_kernel(Phi, k):
    """Spatial ``K^(k) = -sum_j (-1)**j C(k,j) Phi^(*j)`` on the reference grid."""
    if k * Phi.support_radius >= Phi.spatial.grid.extent[0] / 2 - Phi.h:
        raise DomainError("reference grid too small for this k")
    grid = Phi.spatial.grid
    F = forward(Phi.spatial.samples, grid)
    acc = np.zeros_like(F)
    Fj = np.ones_like(F)
    for j in range(1, k + 1):
        Fj = Fj * F
        acc = acc - (-1) ** j * math.comb(k, j) * Fj
    return SpatialField(grid, inverse(acc, grid).real)


def field_moment(f, a):
    x = f.grid.coords()
    return float(np.sum(f.samples * np.prod(x ** np.asarray(a), axis=-1)) * f.grid.cell_volume)


@dataclass(frozen=True)
class LargeScale:
    """Behaviour of ``psi_hat(delta_t^* xi)`` for large ``t``.

    For ``kind="exact"``, ``psi_hat(delta_t^* xi) = t**(-exponent) tau(xi)``
    once ``t >= onset(rho_min)``.  For ``kind="mean"``, ``t**exponent``
    times the convolution is asymptotically periodic in ``t`` and the tail is
    closed with its average over one period.
    """

    exponent: float
    kind: str = "exact"
    tau: object = None
    onset: object = None


class LPProfile:
    """Littlewood-Paley generator given by its transform.

    Parameters
    ----------
    symbol : callable
        Maps :class:`SymbolPoints` to ``psi_hat`` values.
    group : DilationGroup
    tag : str
    hermitian : bool
        ``psi_hat(-xi) = conj(psi_hat(xi))``, i.e. ``psi`` is real.
    large_scale : LargeScale, optional
    """

    def __init__(self, symbol, group, tag, hermitian=True, large_scale=None, meta=None):
        self._symbol = symbol
        self.group = group
        self.tag = tag
        self.hermitian = hermitian
        self.large_scale = large_scale
        self.meta = dict(meta or {})
        self.mean_zero = True

    def __repr__(self):
        return f"LPProfile(tag={self.tag!r})"

    def __call__(self, xi):
        pts = _as_points(xi, self.group)
        out = np.asarray(self._symbol(pts))
        zero = pts.rho == 0
        if np.any(zero):
            out = np.array(out, dtype=np.result_type(out, float))
            out[zero] = 0
        return out

    def dilated(self, t, xi):
        """``psi_hat(delta_t^* xi)``."""
        pts = _as_points(xi, self.group)
        return self(SymbolPoints(self.group.dilate(t, pts.xi, adjoint=True), t * pts.rho))

    def scan_sup(self, xi, t_grid):
        """``max_t |psi_hat(delta_t^* xi)|`` over ``t_grid``."""
        pts = _as_points(xi, self.group)
        best = np.zeros(pts.xi.shape[:-1])
        for t in t_grid:
            best = np.maximum(best, np.abs(self.dilated(t, pts)))
        return best


def potential_profile(G, alpha, Phi):
    """``psi_hat = rho*^(-alpha) (1 - Phi_hat)``.

    Raises
    ------
    DomainError
        If ``alpha`` is outside ``(0, gamma)``.
    """
    if not 0 < alpha < G.gamma:
        raise DomainError(f"alpha must lie in (0, gamma={G.gamma}), got {alpha}")

    def symbol(pts):
        with np.errstate(divide="ignore"):
            return np.where(pts.rho > 0, pts.rho ** (-alpha), 0.0) * Phi.complement(pts)

    def tau(pts):
        with np.errstate(divide="ignore"):
            return np.where(pts.rho > 0, pts.rho ** (-alpha), 0.0)

    ls = LargeScale(alpha, "exact", tau, lambda rmin: max(Phi.vanish_radius, 1.0) / rmin)
    return LPProfile(symbol, G, f"potential(alpha={alpha:g},{Phi.name})", large_scale=ls,
                     meta={"alpha": alpha, "kernel": Phi.name})


_ETA_STEP = math.log(2.0) / 4
_ETA_WIDTH = math.log(2.0) - _ETA_STEP


def shipped_eta(t):
    """Smooth bump on ``[1, 2]`` with ``int eta^2 dt/t = 1``.

    ``eta(e^u)**2 = (S(u/w) - S((u - h)/w)) / h`` with ``S`` a smooth step,
    ``h = log(2)/4`` and ``w = log(2) - h``.  Trapezoid sums in ``log t``
    with 4, 8, 16 or 32 nodes per octave reproduce the normalisation
    exactly, for any offset.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        u = np.log(np.where(t > 0, t, 1.0))
    sq = (smooth_step(u / _ETA_WIDTH) - smooth_step((u - _ETA_STEP) / _ETA_WIDTH)) / _ETA_STEP
    return np.where((t > 1) & (t < 2), np.sqrt(np.maximum(sq, 0.0)), 0.0)


def eta_normalization(eta):
    """``int_1^2 eta(t)^2 dt/t`` by adaptive quadrature in ``log t``."""
    from scipy.integrate import quad

    val, _ = quad(lambda u: float(eta(np.exp(u))) ** 2, 0.0, math.log(2.0), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def radial_profile(G, eta=None):
    """``psi_hat = eta(rho*)`` for a bump ``eta`` supported in ``[1, 2]``.

    Parameters
    ----------
    G : DilationGroup
    eta : callable or tuple of arrays, optional
        Callable, or a table ``(t, values)`` interpolated by a cubic spline in
        ``log t``.  Defaults to :func:`shipped_eta`.

    Raises
    ------
    NormalizationError
        If ``|int eta^2 dt/t - 1| > 1e-8``.
    """
    if eta is None:
        eta = shipped_eta
    elif not callable(eta):
        from scipy.interpolate import CubicSpline

        tt, vv = (np.asarray(a, dtype=float) for a in eta)
        spline = CubicSpline(np.log(tt), vv)
        lo, hi = tt.min(), tt.max()

        def eta(t, _s=spline, _lo=lo, _hi=hi):
            t = np.asarray(t, dtype=float)
            inside = (t > max(_lo, 1.0)) & (t < min(_hi, 2.0))
            return np.where(inside, _s(np.log(np.where(inside, t, 1.0))), 0.0)

    probe = np.array([0.5, 0.999, 2.001, 3.0])
    if np.any(np.asarray(eta(probe)) != 0):
        raise NormalizationError("eta must vanish outside [1, 2]")
    norm = eta_normalization(eta)
    if abs(norm - 1) > 1e-8:
        raise NormalizationError(f"int eta^2 dt/t = {norm:.12g}, expected 1")

    def symbol(pts):
        return eta(pts.rho)

    ls = LargeScale(0.0, "exact", None, lambda rmin: 2.0 / rmin)
    return LPProfile(symbol, G, "radial", large_scale=ls)


def poisson_gradient_family(G):
    """Components ``2 pi i xi_j exp(-2 pi |xi|)`` of the Poisson gradient (``P = I`` only)."""
    if not G.is_isotropic:
        raise DomainError("the Poisson gradient family needs the isotropic group P = I")
    out = []
    for j in range(G.dim):
        def symbol(pts, j=j):
            r = np.linalg.norm(pts.xi, axis=-1)
            return 2j * np.pi * pts.xi[..., j] * np.exp(-2 * np.pi * r)

        out.append(LPProfile(symbol, G, f"poisson[{j}]"))
    return out


def _one_d_group(G):
    if G.dim != 1:
        raise DomainError("Marcinkiewicz profiles are one-dimensional")
    if not G.is_isotropic:
        raise DomainError("Marcinkiewicz profiles use the group P = 1")


def _sin_minus_cos(v):
    """``(sin v - v cos v) / v**2`` with a series near 0."""
    small = np.abs(v) < 1e-2
    vs = np.where(small, 1.0, v)
    direct = (np.sin(vs) - vs * np.cos(vs)) / vs**2
    series = v / 3 - v**3 / 30 + v**5 / 840
    return np.where(small, series, direct)


def _one_minus_cos_over(v):
    """``(1 - cos v) / v`` evaluated as ``2 sin(v/2)**2 / v``."""
    vs = np.where(v == 0, 1.0, v)
    return np.where(v == 0, 0.0, 2 * np.sin(vs / 2) ** 2 / vs)


def marcinkiewicz_sign_profile(G):
    """``psi = sgn(x) chi_[-1,1]``: ``psi_hat = -2i (1 - cos 2 pi xi) / (2 pi xi)``."""
    _one_d_group(G)

    def symbol(pts):
        return -2j * _one_minus_cos_over(2 * np.pi * pts.xi[..., 0])

    return LPProfile(symbol, G, "marcinkiewicz-sign", large_scale=LargeScale(1.0, "mean"))


def marcinkiewicz_moment_profile(G):
    """``psi^(1) = x chi_[-1,1]``, used to build ``psi^(0)``."""
    _one_d_group(G)

    def symbol(pts):
        return -2j * _sin_minus_cos(2 * np.pi * pts.xi[..., 0])

    return LPProfile(symbol, G, "marcinkiewicz-moment", large_scale=LargeScale(1.0, "mean"))


def marcinkiewicz_half_profile(G):
    """``psi^(0) = psi/2 - psi^(1)/2``, the generator of the ``nu`` function."""
    a = marcinkiewicz_sign_profile(G)
    b = marcinkiewicz_moment_profile(G)

    def symbol(pts):
        return 0.5 * a._symbol(pts) - 0.5 * b._symbol(pts)

    return LPProfile(symbol, G, "marcinkiewicz-half", large_scale=LargeScale(1.0, "mean"))


def spatialize_profile(profile, grid, pad=4):
    """Samples of ``psi`` on a grid with ``pad`` times the extent and the same cell."""
    big = GridSpec(tuple(L * pad for L in grid.extent), tuple(N * pad for N in grid.points))
    lat = frequency_lattice(profile.group, big)
    vals = inverse(profile(lat.points()), big)
    return SpatialField(big, vals.real if profile.hermitian else vals)


def profile_admissibility(psi_spatial, G, eps, u):
    """Quadrature values of ``B_eps``, ``D_u`` and ``||H_psi||_1``.

    ``H_psi(x) = sup_{rho(y) >= rho(x)} |psi(y)|`` is formed by sorting the
    samples by ``rho`` and taking suffix maxima; tied ``rho`` values share
    the maximum of their group.

    Returns
    -------
    dict
        Keys ``B_eps``, ``D_u``, ``H_norm``.
    """
    eps = check_positive(eps, "eps")
    u = check_positive(u, "u")
    if u <= 1:
        raise DomainError("u must exceed 1")
    grid = psi_spatial.grid
    dV = grid.cell_volume
    x = grid.coords().reshape(-1, grid.dim)
    a = np.abs(psi_spatial.samples).reshape(-1)
    r = np.linalg.norm(x, axis=-1)
    B = float(np.sum(a[r > 1] * r[r > 1] ** eps) * dV)
    D = float((np.sum(a[r < 1] ** u) * dV) ** (1 / u))
    rho = G.rho(x)
    order = np.argsort(rho, kind="stable")
    suffix = np.maximum.accumulate(a[order][::-1])[::-1]
    rs = rho[order]
    first = np.searchsorted(rs, rs, side="left")
    H = suffix[first]
    return {"B_eps": B, "D_u": D, "H_norm": float(H.sum() * dV)}


def nondegeneracy_scan(profile, n_directions=64, n_scales=256, t_range=(2.0**-8, 2.0**8), seed=0):
    """Minimum over unit directions of ``max_t |psi_hat(delta_t^* xi)|``."""
    G = profile.group
    if G.dim == 2:
        th = 2 * np.pi * np.arange(n_directions) / n_directions
        xi = np.stack([np.cos(th), np.sin(th)], -1)
    else:
        xi = np.random.default_rng(seed).standard_normal((n_directions, G.dim))
        xi /= np.linalg.norm(xi, axis=-1, keepdims=True)
    t = np.geomspace(*t_range, n_scales)
    pts = SymbolPoints(xi, np.ones(n_directions))
    return profile.scan_sup(pts, t)
