"""Periodic grids, the scaled discrete Fourier transform, band limits and norms.

Functions on ``R^n`` are modelled by samples on the torus
``prod_i [-L_i/2, L_i/2)`` with ``N_i`` points per axis.  Coefficients are
scaled so that they approximate the continuous transform
``F(xi) = int f(x) exp(-2 pi i <x, xi>) dx`` at ``xi_k = k / L``.
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from ._validation import check_eps, check_exponent, check_positive
from .exceptions import DomainError, ShapeError, SingularWeightError


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Periodic sampling lattice.

    Parameters
    ----------
    extent : tuple of float
        Period ``L_i`` of each axis.
    points : tuple of int
        Samples per axis, each a power of two and at least 8.
    """

    extent: tuple
    points: tuple

    def __post_init__(self):
        extent = tuple(float(v) for v in np.atleast_1d(self.extent))
        points = tuple(int(v) for v in np.atleast_1d(self.points))
        if len(extent) != len(points):
            raise ShapeError("extent and points must have the same length")
        for L in extent:
            if not (np.isfinite(L) and L > 0):
                raise DomainError(f"grid extent must be positive, got {L}")
        for N in points:
            if N < 8 or not _is_pow2(N):
                raise DomainError(f"grid points must be a power of two >= 8, got {N}")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "points", points)

    @classmethod
    def cube(cls, dim, extent, points):
        return cls((extent,) * dim, (points,) * dim)

    @property
    def dim(self):
        return len(self.points)

    @property
    def shape(self):
        return self.points

    @property
    def size(self):
        return math.prod(self.points)

    @property
    def cell(self):
        return tuple(L / N for L, N in zip(self.extent, self.points))

    @property
    def cell_volume(self):
        return math.prod(self.cell)

    @property
    def volume(self):
        return math.prod(self.extent)

    def axes(self):
        """Sample coordinates ``-L/2 + j h`` per axis."""
        return [-L / 2 + np.arange(N) * (L / N) for L, N in zip(self.extent, self.points)]

    def coords(self):
        """Sample points stacked on a trailing axis, shape ``(*points, dim)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def freq_axes(self, half=False):
        """Frequencies ``k / L`` per axis in FFT order (last axis halved if ``half``)."""
        out = [np.fft.fftfreq(N, d=L / N) for L, N in zip(self.extent, self.points)]
        if half:
            L, N = self.extent[-1], self.points[-1]
            out[-1] = np.fft.rfftfreq(N, d=L / N)
        return out

    def freqs(self, half=False):
        return np.stack(np.meshgrid(*self.freq_axes(half), indexing="ij"), axis=-1)

    def refine(self, factor=2):
        return GridSpec(self.extent, tuple(N * factor for N in self.points))

    def to_dict(self):
        return {"dim": self.dim, "extent": list(self.extent), "points": list(self.points)}


def _sign_mask(grid, half=False):
    """``(-1)**(k_1 + ... + k_n)``; shifts the DFT origin to the grid centre."""
    mask = np.ones((1,) * grid.dim)
    for ax, N in enumerate(grid.points):
        n = N // 2 + 1 if (half and ax == grid.dim - 1) else N
        s = 1.0 - 2.0 * (np.arange(n) % 2)
        shape = [1] * grid.dim
        shape[ax] = n
        mask = mask * s.reshape(shape)
    return mask


def _axes(grid):
    return tuple(range(-grid.dim, 0))


def forward(samples, grid, half=False):
    """Scaled transform of sample arrays with trailing grid axes."""
    axes = _axes(grid)
    if half:
        raw = sfft.rfftn(samples, axes=axes)
    else:
        raw = sfft.fftn(samples, axes=axes)
    return raw * (grid.cell_volume * _sign_mask(grid, half))


def inverse(coeffs, grid, half=False):
    """Inverse of :func:`forward`."""
    axes = _axes(grid)
    scaled = coeffs * (_sign_mask(grid, half) * (grid.size / grid.volume))
    if half:
        return sfft.irfftn(scaled, s=grid.points, axes=axes)
    return sfft.ifftn(scaled, axes=axes)


@dataclass(frozen=True, eq=False)
class SpatialField:
    """Samples of a function on ``grid``; real arrays are the real subspace."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.dtype.kind not in "fc":
            s = s.astype(float)
        if s.shape != self.grid.points:
            raise ShapeError(f"samples shape {s.shape} does not match grid {self.grid.points}")
        if not np.all(np.isfinite(s)):
            raise DomainError("field samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def is_real(self):
        return self.samples.dtype.kind == "f"

    def to_spectrum(self):
        return to_spectrum(self)

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.cell_volume))

    def __mul__(self, c):
        return SpatialField(self.grid, self.samples * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if other.grid != self.grid:
            raise ShapeError("fields live on different grids")
        return SpatialField(self.grid, self.samples + other.samples)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Scaled Fourier coefficients at ``xi_k = k / L`` in FFT order."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.points:
            raise ShapeError(f"coefficient shape {c.shape} does not match grid {self.grid.points}")
        object.__setattr__(self, "coeffs", c)

    def from_spectrum(self, real=False):
        return from_spectrum(self, real=real)

    def l2_norm(self):
        """Parseval norm ``(sum |F|^2 / prod L)^(1/2)``."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) / self.grid.volume))


def to_spectrum(f):
    """Scaled DFT of a spatial field.

    Examples
    --------
    >>> g = GridSpec.cube(1, 4.0, 8)
    >>> F = to_spectrum(SpatialField(g, np.ones(8)))
    >>> round(F.coeffs[0].real, 12)
    4.0
    """
    if not isinstance(f, SpatialField):
        raise ShapeError("to_spectrum expects a SpatialField")
    return SpectralField(f.grid, forward(f.samples, f.grid))


def from_spectrum(F, real=False):
    """Inverse of :func:`to_spectrum`; ``real=True`` drops the imaginary part."""
    if not isinstance(F, SpectralField):
        raise ShapeError("from_spectrum expects a SpectralField")
    s = inverse(F.coeffs, F.grid)
    return SpatialField(F.grid, s.real if real else s)


class FrequencyLattice:
    """Frequencies of a grid together with their dual quasi-norms.

    ``rho_star`` is computed once; :meth:`dilated` returns the points
    ``delta_t^* xi`` and their quasi-norms ``t rho*(xi)`` without new root
    solves.
    """

    def __init__(self, G, grid, half=False):
        if G.dim != grid.dim:
            raise ShapeError(f"group dimension {G.dim} does not match grid dimension {grid.dim}")
        self.group = G
        self.grid = grid
        self.half = half
        self.xi = grid.freqs(half)
        self.rho_star = G.rho_star(self.xi)
        self.rho_star.setflags(write=False)

    def dilated(self, t):
        return SymbolPoints(self.group.dilate(t, self.xi, adjoint=True), t * self.rho_star)

    def points(self):
        return SymbolPoints(self.xi, self.rho_star)

    @cached_property
    def inscribed_radius(self):
        """Smallest ``rho*`` on the boundary of the lattice box."""
        nyq = np.array([N / (2 * L) for L, N in zip(self.grid.extent, self.grid.points)])
        on_edge = np.any(np.isclose(np.abs(self.xi), nyq), axis=-1)
        return float(self.rho_star[on_edge].min())


_LATTICES = {}


def frequency_lattice(G, grid, half=False):
    """Cached :class:`FrequencyLattice`."""
    key = (G, grid, half)
    lat = _LATTICES.get(key)
    if lat is None:
        if len(_LATTICES) > 32:
            _LATTICES.clear()
        lat = _LATTICES[key] = FrequencyLattice(G, grid, half)
    return lat


class SymbolPoints:
    """Frequencies handed to a symbol, with their ``rho*`` values."""

    def __init__(self, xi, rho=None, group=None):
        self.xi = xi
        self._rho = rho
        self._group = group

    @property
    def rho(self):
        if self._rho is None:
            if self._group is None:
                raise DomainError("rho* requested for points without a dilation group")
            self._rho = self._group.rho_star(self.xi)
        return self._rho


def smooth_step(u):
    """C-infinity step: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    u = np.asarray(u, dtype=float)
    a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    v = 1.0 - u
    b = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    return a / (a + b)


def phi0(s):
    """Radial cutoff profile: 1 on ``[0, 1]``, 0 on ``[2, inf)``, smooth between."""
    return smooth_step(2.0 - np.asarray(s, dtype=float))


def zeta(rho, eps):
    """Band symbol ``phi0(eps rho) - phi0(rho / eps)``, supported in ``(eps, 2/eps)``."""
    rho = np.asarray(rho, dtype=float)
    return phi0(eps * rho) - phi0(rho / eps)


def band_limit(f, G, eps):
    """Project onto the annulus ``eps < rho*(xi) < 2/eps`` with a smooth symbol.

    Parameters
    ----------
    f : SpatialField
    G : DilationGroup
    eps : float in (0, 1/2)

    Returns
    -------
    SpatialField
        Real when ``f`` is real.
    """
    eps = check_eps(eps)
    lat = frequency_lattice(G, f.grid)
    coeffs = forward(f.samples, f.grid) * zeta(lat.rho_star, eps)
    out = inverse(coeffs, f.grid)
    return SpatialField(f.grid, out.real if f.is_real else out)


def _nyquist_free(coeffs, grid):
    """Zero the Nyquist planes so real fields stay real under odd symbols."""
    coeffs = coeffs.copy()
    for ax, N in enumerate(grid.points):
        idx = [slice(None)] * grid.dim
        idx[ax] = N // 2
        coeffs[tuple(idx)] = 0
    return coeffs


def make_rng(seed, master_seed=0):
    """Counter-based generator keyed by ``(master_seed, seed)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, seed])))


def random_test_function(seed, G, grid, eps, master_seed=0):
    """Reproducible real band-limited field with unit L2 norm.

    White noise is shaped by ``exp(-(rho*/rho_c)**4)`` and then by the band
    symbol; ``rho_c`` is 0.4 times the largest ``rho*``-ball inscribed in the
    frequency box, which keeps aliasing at round-off level.
    """
    eps = check_eps(eps)
    rng = make_rng(seed, master_seed)
    lat = frequency_lattice(G, grid)
    rho_c = 0.4 * lat.inscribed_radius
    noise = rng.standard_normal(grid.points)
    coeffs = forward(noise, grid) * (np.exp(-((lat.rho_star / rho_c) ** 4)) * zeta(lat.rho_star, eps))
    coeffs = _nyquist_free(coeffs, grid)
    norm = np.sqrt(np.sum(np.abs(coeffs) ** 2) / grid.volume)
    if norm == 0:
        raise DomainError("band is empty on this grid; widen eps or refine the grid")
    return SpatialField(grid, inverse(coeffs / norm, grid).real)


def refine_field(f, factor=2):
    """Evaluate the same trigonometric polynomial on a grid with ``factor`` times the points.

    The Nyquist planes of ``f`` must vanish (true for band-limited test fields).
    """
    fine = f.grid.refine(factor)
    F = forward(f.samples, f.grid)
    big = np.zeros(fine.points, dtype=complex)
    idx = tuple(np.fft.fftfreq(N, 1.0 / N).astype(int) for N in f.grid.points)
    big[np.ix_(*idx)] = F
    out = inverse(big, fine)
    return SpatialField(fine, out.real if f.is_real else out)


@dataclass(frozen=True)
class Weight:
    """Weight ``w(x) = (offset + rho(x - center))**beta`` or the constant 1.

    Parameters
    ----------
    kind : {"constant", "power"}
    beta : float
    offset : float
    group : DilationGroup or None
    center : tuple or None
    """

    kind: str = "constant"
    beta: float = 0.0
    offset: float = 0.0
    group: object = None
    center: tuple = None

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power":
            if self.group is None:
                raise DomainError("power weights need a dilation group")
            check_positive(self.offset, "offset", strict=False)
            if self.beta < 0 and self.offset == 0:
                raise SingularWeightError("beta < 0 requires offset > 0 (the grid contains x = 0)")
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def is_constant(self):
        return self.kind == "constant" or self.beta == 0

    def values(self, grid):
        """Weight sampled on ``grid`` (cached)."""
        if self.is_constant:
            return np.ones(grid.points)
        key = (self, grid)
        w = _WEIGHT_CACHE.get(key)
        if w is None:
            x = grid.coords()
            if self.center is not None:
                x = x - np.asarray(self.center)
            w = (self.offset + self.group.rho(x)) ** self.beta
            if not np.all(np.isfinite(w) & (w >= 0)):
                raise SingularWeightError("weight is not finite and nonnegative on the grid")
            w.setflags(write=False)
            if len(_WEIGHT_CACHE) > 64:
                _WEIGHT_CACHE.clear()
            _WEIGHT_CACHE[key] = w
        return w

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return np.ones(x.shape[:-1])
        if self.center is not None:
            x = x - np.asarray(self.center)
        return (self.offset + self.group.rho(x)) ** self.beta


_WEIGHT_CACHE = {}


def lp_norms(samples, grid, p, w=None):
    """Weighted ``L^p`` norms of a batch with trailing grid axes."""
    a = np.abs(samples)
    wv = 1.0 if w is None or w.is_constant else w.values(grid)
    axes = _axes(grid)
    if p == 2:
        s = np.sum(a * a * wv, axis=axes)
    else:
        s = np.sum(a**p * wv, axis=axes)
    return (s * grid.cell_volume) ** (1.0 / p)


def weighted_lp_norm(f, p, w=None):
    """``(sum |f(x_k)|^p w(x_k) dV)^(1/p)`` over the grid.

    Parameters
    ----------
    f : SpatialField
    p : float in (1, inf)
    w : Weight, optional
        Defaults to the constant weight.
    """
    p = check_exponent(p)
    return float(lp_norms(f.samples, f.grid, p, w))


FLD_KINDS = ("spatial", "spectral")


def write_field(path, field):
    """Write a field as a ``.fld`` file: one JSON header line, then raw doubles."""
    if isinstance(field, SpatialField):
        kind, data = "spatial", field.samples
    elif isinstance(field, SpectralField):
        kind, data = "spectral", field.coeffs
    else:
        raise ShapeError("write_field expects a SpatialField or SpectralField")
    header = dict(field.grid.to_dict(), kind=kind)
    body = np.ascontiguousarray(np.asarray(data, dtype=complex)).view("<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(body.astype("<f8").tobytes())


def read_field(path):
    """Read a ``.fld`` file written by :func:`write_field`."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    missing = {"dim", "extent", "points", "kind"} - set(header)
    if missing:
        raise ShapeError(f".fld header lacks {sorted(missing)}")
    grid = GridSpec(tuple(header["extent"]), tuple(header["points"]))
    if grid.dim != header["dim"] or raw.size != 2 * grid.size:
        raise ShapeError(".fld payload does not match its header")
    data = raw.astype(float).view(complex).reshape(grid.points)
    if header["kind"] == "spatial":
        return SpatialField(grid, data)
    if header["kind"] == "spectral":
        return SpectralField(grid, data)
    raise ShapeError(f"unknown field kind {header['kind']!r}")
