"""Sobolev norms, norm-equivalence studies and the parabolic derivative check.

An equivalence study evaluates, for each member of a fixed family of
band-limited fields, the two sides of a claimed equivalence
``||S f||_{p,w} ~ ||T f||_{p,w}`` and records the ratio.  Square functions do
not depend on ``p`` or the weight, so one pass over the family serves every
``(p, beta)`` cell.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_exponent, check_positive
from .dilation import make_dilation_group
from .exceptions import DomainError, RangeError
from .fields import (
    GridSpec,
    SpatialField,
    forward,
    frequency_lattice,
    inverse,
    lp_norms,
    random_test_function,
    refine_field,
)
from .kernels import ball_averaging_kernel, radial_profile
from .operators import MultiplierSymbol, apply_multiplier, invert_multiplier, riesz_potential
from .squares import _premultiply, g_psi, iterated_potential_square, iterated_square
from .weights import power_weight

SCHEMA_VERSION = 1
TAGS = ("T1.2", "T1.3", "T1.4", "T1.5", "T4.1", "T4.2", "T5.1")
DIAG12 = np.diag([1.0, 2.0])
CSV_COLUMNS = ("tag", "alpha", "p", "beta", "k", "seed", "lhs", "rhs", "ratio")


def sobolev_norm(f, G, alpha, p, w=None):
    """``||f||_{p,w} + ||I_{-alpha} f||_{p,w}``."""
    alpha = check_positive(alpha, "alpha")
    p = check_exponent(p)
    g = riesz_potential(f, G, -alpha)
    return float(lp_norms(f.samples, f.grid, p, w) + lp_norms(g.samples, f.grid, p, w))


# --- the diag(1, 2) example -------------------------------------------------


def _require_diag12(G):
    if G.dim != 2 or not np.allclose(G.P, DIAG12, rtol=0, atol=0):
        raise DomainError("the derivative characterization is stated for P = diag(1, 2)")


def diag12_symbol(G, reflected=False):
    """``N(xi) = (-4 pi^2 xi_1^2 - 2 pi i xi_2) / rho*(xi)^2``, or ``N(-xi)`` when ``reflected``."""
    _require_diag12(G)
    s = 1.0 if reflected else -1.0

    def ev(pts):
        xi = pts.xi
        r2 = pts.rho**2
        num = -4 * np.pi**2 * xi[..., 0] ** 2 + s * 2j * np.pi * xi[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r2 > 0, num / np.where(r2 > 0, r2, 1.0), 0.0)

    return MultiplierSymbol(ev, G, True, 0.0, True, "N~" if reflected else "N")


def diag12_derivative_check(f, p=2.0, w=None, G=None):
    """Compare ``||I_{-2} f||`` with ``||d1^2 f|| + ||d2 f||`` and verify the reconstruction.

    Returns
    -------
    dict
        ``norm_ratio`` (A/B), ``A``, ``B`` and ``reconstruction_error``, the
        sup-norm error of ``T_{N~^-1}(d1^2 f + d2 f)`` against ``I_{-2} f``
        relative to ``max |I_{-2} f|``.
    """
    G = G or make_dilation_group(DIAG12)
    _require_diag12(G)
    p = check_exponent(p)
    grid = f.grid
    lat = frequency_lattice(G, grid)
    F = forward(f.samples, grid)
    xi = lat.xi
    theta = inverse(F * (2j * np.pi * xi[..., 0]) ** 2, grid)
    xi_ = inverse(F * (2j * np.pi * xi[..., 1]), grid)
    target = riesz_potential(f, G, -2.0).samples
    inv = invert_multiplier(diag12_symbol(G, reflected=True))
    rebuilt = apply_multiplier(inv, SpatialField(grid, theta + xi_)).samples
    if f.is_real:
        theta, xi_, rebuilt = theta.real, xi_.real, rebuilt.real
    A = float(lp_norms(target, grid, p, w))
    B = float(lp_norms(theta, grid, p, w) + lp_norms(xi_, grid, p, w))
    scale = np.abs(target).max()
    err = float(np.abs(rebuilt - target).max() / scale) if scale > 0 else float(np.abs(rebuilt).max())
    return {"norm_ratio": A / B if B > 0 else float("nan"), "A": A, "B": B, "reconstruction_error": err}


# --- equivalence studies ----------------------------------------------------


@dataclass(frozen=True)
class Family:
    """Reproducible family of band-limited test fields.

    Parameters
    ----------
    seeds : int or sequence of int
        ``n`` means seeds ``0 .. n-1``.
    eps : float
        Band parameter of :func:`~aniso_lp.fields.random_test_function`.
    grid : GridSpec
    master_seed : int
    """

    seeds: object = 32
    eps: float = 0.125
    grid: GridSpec = field(default_factory=lambda: GridSpec.cube(2, 16.0, 128))
    master_seed: int = 0

    @property
    def seed_list(self):
        if isinstance(self.seeds, (int, np.integer)):
            return list(range(int(self.seeds)))
        return [int(s) for s in self.seeds]

    def samples(self, G, grid=None):
        """Family on ``self.grid``, or the same trigonometric polynomials sampled on ``grid``."""
        base = np.stack([random_test_function(s, G, self.grid, self.eps, self.master_seed).samples for s in self.seed_list])
        if grid is None or grid == self.grid:
            return base
        factor = grid.points[0] // self.grid.points[0]
        if grid != self.grid.refine(factor):
            raise DomainError("target grid must refine the family grid")
        return np.stack([refine_field(SpatialField(self.grid, x), factor).samples for x in base])


def alpha_range(tag, G, k=1):
    """Open interval of admissible ``alpha`` for an equivalence tag."""
    if tag in ("T1.2", "T1.3"):
        return (0.0, 2.0)
    if tag in ("T1.4", "T1.5"):
        return (0.0, G.gamma)
    if tag in ("T4.1", "T4.2"):
        return (0.0, min(2 * k, G.gamma))
    if tag == "T5.1":
        return (2.0, 2.0)
    raise DomainError(f"unknown tag {tag!r}; expected one of {TAGS}")


def check_params(tag, G, alpha, k=1, construction="kernel"):
    """Validate ``alpha``/``k`` for ``tag``.

    Raises
    ------
    RangeError
        If ``alpha`` lies outside the range stated for ``tag``.
    """
    if tag not in TAGS:
        raise DomainError(f"unknown tag {tag!r}; expected one of {TAGS}")
    if tag in ("T4.1", "T4.2") and (not isinstance(k, (int, np.integer)) or k < 1):
        raise DomainError("k must be a positive integer")
    if construction not in ("kernel", "radial"):
        raise DomainError(f"unknown construction {construction!r}")
    if construction == "radial":
        if tag != "T1.4":
            raise DomainError("the radial construction applies to T1.4 only")
        return
    lo, hi = alpha_range(tag, G, k)
    if tag == "T5.1":
        if alpha not in (None, 2, 2.0):
            raise RangeError(f"T5.1 is stated for alpha = 2, got {alpha}")
        return
    if alpha is None or not lo < float(alpha) < hi:
        raise RangeError(f"alpha = {alpha} outside ({lo:g}, {hi:g}) required by {tag}")


def kernel_order(alpha):
    """Smallest ``k`` with ``2k > alpha``: ``K^(k)`` of the ball kernel lies in ``M^alpha``."""
    return int(math.floor(alpha / 2.0)) + 1


def side_key(tag, alpha, k=1, construction="kernel"):
    """Key naming the computation behind a cell; tags sharing a key give identical sides.

    ``("E", alpha, k)`` is ``E_alpha^(k)`` against ``I_{-alpha} f`` (T1.2, T1.5,
    T4.2), ``("U", alpha, k)`` is ``U_alpha^(k)`` against ``f`` (T1.3, T1.4,
    T4.1).  With ``k = 1`` these are ``G_alpha`` and ``H_alpha`` for the kernel.
    """
    if tag == "T5.1":
        return ("D", 2.0, 0)
    if construction == "radial":
        return ("R", 0.0, 0)
    alpha = float(alpha)
    if tag == "T1.2":
        return ("E", alpha, 1)
    if tag == "T1.5":
        return ("E", alpha, kernel_order(alpha))
    if tag == "T4.2":
        return ("E", alpha, int(k))
    if tag == "T1.3":
        return ("U", alpha, 1)
    if tag == "T1.4":
        return ("U", alpha, kernel_order(alpha))
    if tag == "T4.1":
        return ("U", alpha, int(k))
    raise DomainError(f"unknown tag {tag!r}")


def compute_side(key, X, grid, G, Phi):
    """Square-function side and comparison side for every family member."""
    kind, alpha, k = key
    pair = (X, grid)
    if kind == "D":
        lat = frequency_lattice(G, grid)
        F = forward(X, grid)
        th = inverse(F * (2j * np.pi * lat.xi[..., 0]) ** 2, grid)
        xi = inverse(F * (2j * np.pi * lat.xi[..., 1]), grid)
        if X.dtype.kind == "f":
            th, xi = th.real, xi.real
        return _premultiply(X, grid, G, -2.0), (th, xi)
    if kind == "R":
        return g_psi(pair, radial_profile(G), G).values, X
    if kind == "E":
        return iterated_square(pair, Phi, alpha, k, G).values, _premultiply(X, grid, G, -alpha)
    if kind == "U":
        return iterated_potential_square(pair, Phi, alpha, k, G).values, X
    raise DomainError(f"unknown side {key!r}")


def _norms(side, grid, p, w):
    if isinstance(side, tuple):
        return sum(lp_norms(s, grid, p, w) for s in side)
    return lp_norms(side, grid, p, w)


@dataclass
class EquivalenceReport:
    """Ratio statistics ``lhs / rhs`` over a family for one parameter cell.

    ``lhs`` is the square-function side (``A`` for T5.1) and ``rhs`` the
    norm it is compared with.
    """

    theorem_tag: str
    parameters: dict
    seeds: list
    lhs: np.ndarray
    rhs: np.ndarray
    fine_lhs: np.ndarray = None
    fine_rhs: np.ndarray = None

    @property
    def ratios(self):
        return self.lhs / self.rhs

    @property
    def c_min(self):
        return float(self.ratios.min())

    @property
    def c_max(self):
        return float(self.ratios.max())

    @property
    def spread(self):
        return self.c_max / self.c_min

    @property
    def refinement_drift(self):
        if self.fine_lhs is None:
            return float("nan")
        r = self.fine_lhs / self.fine_rhs
        fine = float(r.max() / r.min())
        return abs(fine - self.spread) / self.spread

    def rows(self):
        """CSV rows in the order of :data:`CSV_COLUMNS`."""
        pr = self.parameters
        return [
            (self.theorem_tag, pr["alpha"], pr["p"], pr["beta"], pr["k"], s, float(a), float(b), float(a / b))
            for s, a, b in zip(self.seeds, self.lhs, self.rhs)
        ]

    def summary(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "tag": self.theorem_tag,
            **self.parameters,
            "n": len(self.seeds),
            "c_min": self.c_min,
            "c_max": self.c_max,
            "spread": self.spread,
            "refinement_drift": self.refinement_drift,
        }


def default_betas(G, p):
    """Unweighted and the default power-weight exponent ``0.3 gamma (p - 1)``."""
    return (0.0, 0.3 * G.gamma * (p - 1))


def equivalence_sweep(tag, family, alpha=None, k=1, ps=(1.5, 2.0, 3.0), betas=None, G=None,
                      construction="kernel", kernel=None, refine=True, offset=None, cache=None):
    """Reports for every ``(p, beta)`` cell at fixed ``(tag, alpha, k)``.

    Parameters
    ----------
    tag : str
        One of :data:`TAGS`.
    family : Family
    alpha : float
        Smoothness index (ignored for the radial construction; 2 for T5.1).
    k : int
        Iteration order for T4.1/T4.2.
    ps : sequence of float
    betas : sequence of float, optional
        Power-weight exponents; :func:`default_betas` per ``p`` when omitted.
    G : DilationGroup, optional
        Defaults to ``diag(1, 2)``.
    construction : {"kernel", "radial"}
        ``"radial"`` replaces ``H_alpha`` by the normalized radial generator.
    kernel : AveragingKernel, optional
        Defaults to the ball kernel.
    refine : bool
        Repeat on the grid with doubled resolution to measure drift.
    offset : float, optional
        Weight regularizer; a quarter cell of the family grid by default.
    cache : dict, optional
        Sides keyed by ``(side_key, grid)``; filled on the way.  Only valid
        for one family, group and kernel.

    Returns
    -------
    list of EquivalenceReport

    Raises
    ------
    RangeError
        For ``alpha`` outside the tag's range.
    """
    G = G or make_dilation_group(DIAG12)
    if tag == "T5.1":
        _require_diag12(G)
        alpha = 2.0
    if construction == "radial":
        alpha = 0.0
    check_params(tag, G, alpha, k, construction)
    ps = [check_exponent(p) for p in ps]
    Phi = kernel if kernel is not None else ball_averaging_kernel(G)
    grid = family.grid
    offset = 0.25 * min(grid.cell) if offset is None else float(offset)

    key = side_key(tag, alpha, k, construction)
    cache = {} if cache is None else cache

    def sides(grid_):
        hit = cache.get((key, grid_))
        if hit is None:
            hit = compute_side(key, family.samples(G, grid_), grid_, G, Phi)
            cache[(key, grid_)] = hit
        return hit

    L, R = sides(grid)
    if refine:
        fgrid = grid.refine(2)
        Lf, Rf = sides(fgrid)

    reports = []
    for p in ps:
        for beta in (betas if betas is not None else default_betas(G, p)):
            w = power_weight(G, beta, offset)
            params = {"alpha": float(alpha), "p": float(p), "beta": float(beta), "k": int(key[2]),
                      "construction": construction, "grid": grid.to_dict(), "eps": family.eps}
            rep = EquivalenceReport(tag, params, family.seed_list, _norms(L, grid, p, w), _norms(R, grid, p, w))
            if refine:
                rep.fine_lhs = _norms(Lf, fgrid, p, w)
                rep.fine_rhs = _norms(Rf, fgrid, p, w)
            reports.append(rep)
    return reports


def equivalence_study(tag, family, params, G=None, kernel=None, refine=True):
    """Single-cell study; ``params`` holds ``alpha``, ``p``, ``beta`` and optionally ``k``, ``construction``."""
    unknown = set(params) - {"alpha", "p", "beta", "k", "construction"}
    if unknown:
        raise DomainError(f"unknown parameters {sorted(unknown)}")
    (rep,) = equivalence_sweep(
        tag, family, params.get("alpha"), params.get("k", 1), (params.get("p", 2.0),), (params.get("beta", 0.0),),
        G, params.get("construction", "kernel"), kernel, refine,
    )
    return rep
