"""Power weights, empirical A_p constants and the maximal operator on rho-balls.

Balls are rasterized as stencils ``{y on the grid : rho(y) < r}`` and ball
averages are discrete means over a stencil, computed for all centres at once
by circular FFT convolution.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from ._validation import check_exponent, check_positive
from .exceptions import DomainError, SingularWeightError
from .fields import SpatialField, Weight, forward, frequency_lattice, inverse, phi0

CENTER_STRIDE = 4


@dataclass(frozen=True)
class ApEstimate:
    """Lower bound for ``[w]_{A_p}`` from a finite family of balls.

    Attributes
    ----------
    p : float
    lower_bound : float
    balls_tested : int
    argmax_ball : tuple
        ``(center, radius)`` of the maximizing ball.
    """

    p: float
    lower_bound: float
    balls_tested: int
    argmax_ball: tuple


def power_weight(G, beta, offset=0.0, center=None):
    """``w(x) = (offset + rho(x - center))**beta``.

    Raises
    ------
    SingularWeightError
        If ``beta < 0`` and ``offset == 0``.
    """
    return Weight("power", float(beta), float(offset), G, center)


@lru_cache(maxsize=32)
def _offset_rho(G, grid):
    # rho of the grid points read as offsets from the centre sample
    r = G.rho(grid.coords())
    r.setflags(write=False)
    return r


def ball_stencil(G, grid, r):
    """Boolean stencil of ``{rho(y) < r}`` laid out on the centred grid, plus its half-widths in cells."""
    r = check_positive(r, "r")
    mask = _offset_rho(G, grid) < r
    half = []
    for ax in range(grid.dim):
        other = tuple(a for a in range(grid.dim) if a != ax)
        hit = np.nonzero(mask.any(axis=other) if other else mask)[0]
        c = grid.points[ax] // 2
        half.append(int(max(c - hit.min(), hit.max() - c)))
    return mask, tuple(half)


def _ball_means(values, grid, mask):
    """Mean of ``values`` over the stencil translated to every grid point (circular)."""
    K = sfft.rfftn(np.fft.ifftshift(mask.astype(float)))
    out = sfft.irfftn(sfft.rfftn(values) * np.conj(K), s=grid.points)
    return out / mask.sum()


def default_radii(grid, lo_cells=2.0, fraction=0.25):
    """Dyadic radii from ``lo_cells`` cells up to ``fraction`` of the smallest extent."""
    lo = lo_cells * min(grid.cell)
    hi = fraction * min(grid.extent)
    n = int(np.floor(np.log2(hi / lo) + 1e-12))
    return [lo * 2.0**j for j in range(n + 1)]


def _center_index(grid, stride):
    return tuple(np.arange(0, N, stride) for N in grid.points)


def estimate_ap_constant(w, p, grid, n_balls=None, seed=0, radii=None, stride=CENTER_STRIDE):
    """Largest A_p product over a deterministic family of rho-balls.

    Centres run over every ``stride``-th grid point and radii over
    :func:`default_radii`.  Only balls lying inside the box are used, so the
    weight is never wrapped around the torus.  The candidate list is put in
    an order fixed by ``seed`` and the first ``n_balls`` are tested, so a
    larger ``n_balls`` tests a superset.

    Parameters
    ----------
    w : Weight
    p : float in (1, inf)
    grid : GridSpec
    n_balls : int, optional
        All candidates when omitted.
    seed : int

    Returns
    -------
    ApEstimate
    """
    p = check_exponent(p)
    if w.is_constant:
        return ApEstimate(p, 1.0, int(n_balls or 1), (tuple(0.0 for _ in range(grid.dim)), float("nan")))
    G = w.group
    wv = w.values(grid)
    if not np.all(wv > 0):
        raise SingularWeightError("the dual weight is infinite where w vanishes; use offset > 0 or an off-grid center")
    dual = wv ** (-1.0 / (p - 1))
    radii = list(radii) if radii is not None else default_radii(grid)
    cidx = _center_index(grid, stride)
    cands = []
    prods = []
    for r in radii:
        mask, half = ball_stencil(G, grid, r)
        keep = [ix[(ix >= h) & (ix <= N - 1 - h)] for ix, h, N in zip(cidx, half, grid.points)]
        if any(len(k) == 0 for k in keep):
            continue
        sub = np.ix_(*keep)
        a = _ball_means(wv, grid, mask)[sub]
        b = _ball_means(dual, grid, mask)[sub]
        prods.append((a * b ** (p - 1)).ravel())
        ii = np.stack(np.meshgrid(*keep, indexing="ij"), -1).reshape(-1, grid.dim)
        cands.append((r, ii))
    if not prods:
        raise DomainError("no ball of the requested radii fits in the grid")
    vals = np.concatenate(prods)
    owner = np.concatenate([np.full(len(ii), j) for j, (_, ii) in enumerate(cands)])
    where = np.concatenate([ii for _, ii in cands])
    order = np.random.default_rng(seed).permutation(len(vals))
    if n_balls is not None:
        order = order[: int(n_balls)]
    j = order[np.argmax(vals[order])]
    center = tuple(float(ax[i]) for ax, i in zip(grid.axes(), where[j]))
    return ApEstimate(p, float(max(vals[j], 1.0)), len(order), (center, float(cands[owner[j]][0])))


def maximal_function(f, G, radii=None):
    """Centred maximal function ``sup_r mean_{B(x, r)} |f|`` over the given radii.

    The point value ``|f(x)|`` (the limit of vanishing radius) is included.
    Averages are periodic, matching the torus the field lives on.
    """
    grid = f.grid
    if G.dim != grid.dim:
        raise DomainError("group and grid dimensions differ")
    a = np.abs(f.samples)
    radii = radii if radii is not None else default_radii(grid, 1.0, 0.5)
    out = a.copy()
    for r in radii:
        mask, _ = ball_stencil(G, grid, r)
        np.maximum(out, _ball_means(a, grid, mask), out=out)
    return SpatialField(grid, out)


def ball_averages(f, G, radii):
    """Centred ball averages of ``|f|``, one field per radius."""
    a = np.abs(f.samples)
    return [SpatialField(f.grid, _ball_means(a, f.grid, ball_stencil(G, f.grid, r)[0])) for r in radii]


def smooth_maximal(f, G, scales):
    """``sup_t |f * phi_t|`` for the smooth cutoff ``phi_hat = phi0(rho*)`` over ``scales``."""
    grid = f.grid
    lat = frequency_lattice(G, grid)
    F = forward(f.samples, grid)
    out = np.zeros(grid.points)
    for t in scales:
        y = inverse(F * phi0(t * lat.rho_star), grid)
        np.maximum(out, np.abs(y), out=out)
    return SpatialField(grid, out)


def maximal_comparison_constant(f, G, scales=None, radii=None):
    """Fitted ``C`` in ``sup_t |f * phi_t| <= C M(f)`` on the grid."""
    if scales is None:
        scales = 2.0 ** np.arange(-4, 5, 0.25)
    top = smooth_maximal(f, G, scales).samples
    M = maximal_function(f, G, radii).samples
    ok = M > 1e-12 * M.max()
    return float(np.max(top[ok] / M[ok]))
