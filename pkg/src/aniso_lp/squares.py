"""Square functions evaluated through the spectrum.

Every square function here has the form

    S(f)(x)**2 = int_0^inf sum_c |T_{s_c(delta_t^* .)} f(x)|**2 dt / t**(1 + 2 alpha)

for one or more component symbols ``s_c``.  For each quadrature node the
spectrum is multiplied by the dilated symbols and transformed back; the
squared moduli are accumulated in node order.  Real fields with Hermitian
symbols use real FFTs.

Large scales are closed analytically when the symbol becomes an exact power
of ``t`` (kernel transforms vanish beyond the table), or by a one-period
average when the integrand is asymptotically periodic (1-D Marcinkiewicz).
Small scales are covered by extending the rule until the estimated missing
mass is negligible.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_field_batch, check_positive
from .exceptions import DomainError, QuadratureCoverageError
from .fields import SpatialField, forward, frequency_lattice, inverse
from .kernels import LargeScale, potential_profile
from .operators import check_zero_mean, riesz_symbol
from .quadrature import DEFAULT_PER_OCTAVE, TQuadrature, hybrid, log_uniform

TAIL_LIMIT = 1e-6
_AUTO_TAIL = 1e-8
_SKIP = 1e-26
_SUPPORT = 1e-24
_CACHE_BYTES = 256 * 2**20


@dataclass(frozen=True, eq=False)
class SquareFunctionResult:
    """Square function samples with the rule that produced them.

    ``field`` holds a single field; ``values`` the whole batch with a
    leading sample axis.  ``truncation_note`` gives the estimated relative
    mass missed at each end of the rule.
    """

    values: np.ndarray
    grid: object
    quadrature: TQuadrature
    truncation_note: dict = field(default_factory=dict)

    @property
    def field(self):
        return SpatialField(self.grid, self.values[0])


def _half_weights(grid, half):
    """Multiplicity of each stored frequency (2 for mirrored rfft columns)."""
    if not half:
        return 1.0
    N = grid.points[-1]
    w = np.full(N // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


class _Engine:
    def __init__(self, X, grid, G, components, alpha, closure, hermitian):
        self.grid = grid
        self.G = G
        self.components = components
        self.alpha = float(alpha)
        self.closure = closure
        self.real = X.dtype.kind == "f" and hermitian
        self.half = self.real
        self.lat = frequency_lattice(G, grid, self.half)
        self.F = forward(X, grid, self.half)
        S = np.sum(np.abs(self.F) ** 2, axis=0) * _half_weights(grid, self.half)
        self.S = S
        self.total_spec = float(S.sum())
        self._sym_cache = {}
        self._cache_bytes = 0
        self._energy = {}

    def support(self):
        if self.total_spec == 0:
            return None
        rho = self.lat.rho_star
        mask = (self.S > _SUPPORT * self.S.max()) & (rho > 0)
        if not np.any(mask):
            return None
        return float(rho[mask].min()), float(rho[mask].max())

    def symbols(self, t):
        hit = self._sym_cache.get(t)
        if hit is not None:
            return hit
        pts = self.lat.dilated(t)
        vals = [np.asarray(c(pts)) for c in self.components]
        nbytes = sum(v.nbytes for v in vals)
        if self._cache_bytes + nbytes <= _CACHE_BYTES:
            self._sym_cache[t] = vals
            self._cache_bytes += nbytes
        return vals

    def energy(self, t):
        """Spectral mass ``t**(-2 alpha) sum |s(delta_t xi)|^2 S(xi)`` at one node."""
        e = self._energy.get(t)
        if e is None:
            e = 0.0
            for v in self.symbols(t):
                a2 = v.real**2 + v.imag**2 if np.iscomplexobj(v) else v * v
                e += float(np.sum(a2 * self.S))
            e *= t ** (-2 * self.alpha)
            self._energy[t] = e
        return e

    def tails(self, quad):
        """Estimated relative mass below ``t_min`` and above ``t_max``."""
        e = np.array([self.energy(t) for t in quad.nodes]) * quad.weights
        tot = e.sum() + self.closure_energy(quad)
        if tot == 0:
            return 0.0, 0.0, 0.0
        po = quad.per_octave
        low = _geometric_tail(e[:po], e[po : 2 * po])
        ls = self.closure
        if ls is not None and ls.kind == "mean":
            high = 0.0
        elif ls is not None and ls.kind == "exact" and ls.onset is not None and self._closure_ok(quad):
            high = 0.0
        else:
            high = _geometric_tail(e[-po:], e[-2 * po : -po])
        return low / tot, high / tot, tot

    def _closure_ok(self, quad):
        sup = self.support()
        return sup is None or quad.t_max >= self.closure.onset(sup[0]) * (1 - 1e-12)

    def closure_energy(self, quad):
        ls = self.closure
        if ls is None or ls.kind != "exact" or ls.tau is None:
            return 0.0
        c = self._closure_coef(quad)
        if c == 0:
            return 0.0
        tau = self._tau()
        return float(np.sum((np.abs(tau) ** 2) * self.S)) * c

    def _closure_coef(self, quad):
        ls = self.closure
        if not self._closure_ok(quad):
            return 0.0
        q = ls.exponent + self.alpha
        if q <= 0:
            raise DomainError("large-scale closure diverges (exponent + alpha <= 0)")
        return quad.t_max ** (-2 * q) / (2 * q)

    def _tau(self):
        pts = self.lat.points()
        v = np.asarray(self.closure.tau(pts))
        v = np.broadcast_to(v, pts.rho.shape)
        return np.where(pts.rho > 0, v, 0.0)

    def run(self, quad):
        B = self.F.shape[0]
        acc = np.zeros((B,) + self.grid.points)
        total = sum(self.energy(t) * w for t, w in zip(quad.nodes, quad.weights))
        ls = self.closure
        mean_acc = None
        if ls is not None and ls.kind == "mean":
            period = max(self.grid.extent)
            lo = quad.t_max - period
            sel = quad.nodes >= lo - 1e-12
            tn = quad.nodes[sel]
            u = np.gradient(tn) if len(tn) > 1 else np.ones(1)
            u[0] *= 0.5 if len(tn) > 1 else 1.0
            u[-1] *= 0.5 if len(tn) > 1 else 1.0
            mean_w = dict(zip(tn.tolist(), (u / u.sum()).tolist()))
            mean_acc = np.zeros_like(acc)
        for t, w in zip(quad.nodes, quad.weights):
            if total > 0 and self.energy(t) * w <= _SKIP * total and mean_acc is None:
                continue
            wt = w * t ** (-2 * self.alpha)
            for v in self.symbols(t):
                y = inverse(self.F * v, self.grid, self.half)
                y2 = y * y if self.real else y.real**2 + y.imag**2
                acc += wt * y2
                if mean_acc is not None and t in mean_w:
                    mean_acc += mean_w[t] * y2 * t ** (2 * ls.exponent)
        if mean_acc is not None:
            q = ls.exponent + self.alpha
            acc += mean_acc * quad.t_max ** (-2 * q) / (2 * q)
        elif ls is not None and ls.kind == "exact" and ls.tau is not None:
            c = self._closure_coef(quad)
            if c:
                y = inverse(self.F * self._tau(), self.grid, self.half)
                acc += c * (y * y if self.real else y.real**2 + y.imag**2)
        return np.sqrt(acc)


def _geometric_tail(edge, inner):
    """Mass beyond ``edge`` assuming the per-octave ratio ``sum(edge)/sum(inner)`` persists."""
    a, b = float(np.sum(edge)), float(np.sum(inner))
    if a == 0:
        return 0.0
    if b == 0:
        return np.inf
    r = a / b
    return a * r / (1 - r) if r < 1 else np.inf


def _auto_quad(eng, per_octave):
    sup = eng.support()
    if sup is None:
        return log_uniform(0.5, 2.0, per_octave), {"low": 0.0, "high": 0.0}
    rmin, rmax = sup
    lo = 2.0**-8 / rmax
    hi = 2.0**8 / rmin
    ls = eng.closure
    if ls is not None and ls.kind == "exact" and ls.onset is not None:
        hi = ls.onset(rmin)
    for _ in range(40):
        quad = log_uniform(lo, hi, per_octave)
        low, high, _ = eng.tails(quad)
        if low <= _AUTO_TAIL and high <= _AUTO_TAIL:
            return quad, {"low": low, "high": high}
        if low > _AUTO_TAIL:
            lo /= 16
        if high > _AUTO_TAIL:
            hi *= 16
    raise QuadratureCoverageError(f"scale rule did not converge (tails {low:.3g}, {high:.3g})")


def _run(X, grid, G, components, alpha, closure, hermitian, quad, per_octave=DEFAULT_PER_OCTAVE):
    eng = _Engine(X, grid, G, components, alpha, closure, hermitian)
    if quad is None:
        quad, note = _auto_quad(eng, per_octave)
    else:
        low, high, _ = eng.tails(quad)
        note = {"low": low, "high": high}
        if low + high > TAIL_LIMIT:
            raise QuadratureCoverageError(
                f"estimated tail mass {low + high:.3g} exceeds {TAIL_LIMIT:g} of the total; widen the t-range"
            )
    return SquareFunctionResult(eng.run(quad), grid, quad, note)


def _batch(f, G):
    if isinstance(f, SpatialField):
        grid = f.grid
        X = f.samples[np.newaxis]
    else:
        X, grid = f
        X = check_field_batch(X, grid)
    if G is not None and G.dim != grid.dim:
        raise DomainError("group and grid dimensions differ")
    return X, grid


def g_psi(f, psi, G=None, quad=None):
    """Littlewood-Paley function ``(int |f * psi_t|^2 dt/t)^(1/2)``.

    Parameters
    ----------
    f : SpatialField or (ndarray, GridSpec)
        A field, or a batch ``(samples, grid)`` with samples shaped
        ``(n, *grid.points)``.
    psi : LPProfile
    G : DilationGroup, optional
        Defaults to the profile's group.
    quad : TQuadrature, optional
        Chosen from the spectral support when omitted.

    Returns
    -------
    SquareFunctionResult

    Raises
    ------
    QuadratureCoverageError
        If a supplied rule misses more than 1e-6 of the mass.
    """
    return g_vector(f, [psi], G, quad)


def g_vector(f, Psi, G=None, quad=None):
    """Vector form ``(int sum_j |f * (Psi_j)_t|^2 dt/t)^(1/2)``."""
    Psi = list(Psi)
    if not Psi:
        raise DomainError("need at least one profile")
    G = G or Psi[0].group
    X, grid = _batch(f, G)
    ls = Psi[0].large_scale if len(Psi) == 1 else None
    if ls is not None and ls.kind == "mean" and quad is None:
        return marcinkiewicz_run(X, grid, G, Psi, 0.0, ls)
    return _run(X, grid, G, Psi, 0.0, ls, all(p.hermitian for p in Psi), quad)


def _kernel_closure(Phi):
    return LargeScale(0.0, "exact", lambda pts: 1.0, lambda rmin: max(Phi.vanish_radius, 1.0) / rmin)


def _premultiply(X, grid, G, beta):
    """Batch version of ``I_beta``."""
    if beta == 0:
        return X
    if beta > 0:
        check_zero_mean(X, grid)
    lat = frequency_lattice(G, grid)
    vals = riesz_symbol(G, beta)(lat.points())
    out = inverse(forward(X, grid) * vals, grid)
    return out.real if X.dtype.kind == "f" else out


def avg_square(f, Phi, alpha, G, quad=None):
    """``G_alpha f = (int |f - Phi_t * f|^2 dt / t^(1+2 alpha))^(1/2)``; ``B_alpha`` for the ball kernel."""
    alpha = check_positive(alpha, "alpha")
    X, grid = _batch(f, G)
    return _run(X, grid, G, [Phi.complement], alpha, _kernel_closure(Phi), True, quad)


def potential_square(f, Phi, alpha, G, quad=None, route="premultiply"):
    """``H_alpha f = (int |I_a f - Phi_t * I_a f|^2 dt / t^(1+2 alpha))^(1/2)``; ``C_alpha`` for the ball.

    ``route="profile"`` evaluates ``g_psi`` with ``psi_hat = rho*^(-alpha)(1 - Phi_hat)``
    instead of transforming ``I_alpha f`` first.
    """
    alpha = check_positive(alpha, "alpha")
    if not alpha < G.gamma:
        raise DomainError(f"alpha must lie in (0, gamma={G.gamma})")
    X, grid = _batch(f, G)
    if route == "profile":
        check_zero_mean(X, grid)
        psi = potential_profile(G, alpha, Phi)
        return _run(X, grid, G, [psi], 0.0, psi.large_scale, True, quad)
    Y = _premultiply(X, grid, G, alpha)
    return _run(Y, grid, G, [Phi.complement], alpha, _kernel_closure(Phi), True, quad)


def _iterated_components(Phi, k, route):
    if route == "closed":
        return lambda pts: Phi.complement(pts) ** k
    if route == "binomial":
        import math

        def comp(pts):
            ph = Phi.fourier(pts)
            K = np.zeros(np.shape(ph), dtype=np.result_type(ph, float))
            for j in range(1, k + 1):
                K = K - (-1) ** j * math.comb(k, j) * ph**j
            return 1.0 - K

        return comp
    raise DomainError(f"unknown route {route!r}")


def iterated_square(f, Phi, alpha, k, G, quad=None, route="closed"):
    """``E_alpha^(k) f`` from the symbol ``(1 - Phi_hat)^k``.

    ``route="binomial"`` uses ``1 - K^(k)_hat`` with ``K^(k)_hat`` the
    binomial sum of powers of ``Phi_hat``.
    """
    alpha = check_positive(alpha, "alpha")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError("k must be a positive integer")
    X, grid = _batch(f, G)
    if k == 1 and route == "closed":
        return _run(X, grid, G, [Phi.complement], alpha, _kernel_closure(Phi), True, quad)
    return _run(X, grid, G, [_iterated_components(Phi, k, route)], alpha, _kernel_closure(Phi), True, quad)


def iterated_potential_square(f, Phi, alpha, k, G, quad=None, route="closed"):
    """``U_alpha^(k) f = E_alpha^(k)(I_alpha f)`` for ``0 < alpha < min(2k, gamma)``."""
    alpha = check_positive(alpha, "alpha")
    if not alpha < min(2 * k, G.gamma):
        raise DomainError(f"alpha must lie in (0, min(2k, gamma)) = (0, {min(2 * k, G.gamma)})")
    X, grid = _batch(f, G)
    Y = _premultiply(X, grid, G, alpha)
    return iterated_square((Y, grid), Phi, alpha, k, G, quad, route)


def marcinkiewicz_quadrature(grid, xi_max, periods=2, per_octave=DEFAULT_PER_OCTAVE, t_min=None):
    """Rule for 1-D Marcinkiewicz integrands: log nodes below ``1/xi_max``, then steps ``1/(16 xi_max)``."""
    L = grid.extent[0]
    t_switch = 1.0 / xi_max
    t_min = t_min or 2.0**-8 / xi_max
    return hybrid(t_min, t_switch, t_switch + periods * L, 1.0 / (16 * xi_max), per_octave)


def marcinkiewicz_run(X, grid, G, components, alpha, closure, quad=None):
    """``g`` route for profiles whose large-scale integrand is asymptotically periodic."""
    eng = _Engine(X, grid, G, components, alpha, closure, all(c.hermitian for c in components))
    if quad is None:
        quad = _marcinkiewicz_auto(eng, grid)
    low, high, _ = eng.tails(quad)
    if low + high > TAIL_LIMIT:
        raise QuadratureCoverageError(f"estimated tail mass {low + high:.3g} exceeds {TAIL_LIMIT:g}")
    return SquareFunctionResult(eng.run(quad), grid, quad, {"low": low, "high": high})


def marcinkiewicz(f, variant, quad=None):
    """Marcinkiewicz ``mu`` or ``nu`` of a 1-D band-limited field, from its primitive.

    ``mu(f)(x)**2 = int |F(x+t) + F(x-t) - 2F(x)|^2 dt/t^3`` and
    ``nu(f)(x)**2 = int |F(x) - F * Phi_t(x)|^2 dt/t^3`` with
    ``Phi = chi_[-1,1] / 2``.  ``F`` (and its primitive, for ``nu``) is formed
    spectrally; the shifted copies are combined sample by sample at each node.
    The rule defaults to the one the ``g_psi`` route picks for the same field.

    Raises
    ------
    DomainError
        If the field is not one-dimensional or ``variant`` is unknown.
    """
    from .dilation import make_dilation_group
    from .kernels import marcinkiewicz_half_profile, marcinkiewicz_sign_profile

    X, grid = _batch(f, None)
    if grid.dim != 1:
        raise DomainError("Marcinkiewicz functions are defined on the line")
    if variant not in ("mu", "nu"):
        raise DomainError(f"variant must be 'mu' or 'nu', got {variant!r}")
    check_zero_mean(X, grid)
    G = make_dilation_group(np.eye(1))
    profile = marcinkiewicz_sign_profile(G) if variant == "mu" else marcinkiewicz_half_profile(G)
    eng = _Engine(X, grid, G, [profile], 0.0, profile.large_scale, True)
    if quad is None:
        quad = _marcinkiewicz_auto(eng, grid)
    low, high, _ = eng.tails(quad)
    if low + high > TAIL_LIMIT:
        raise QuadratureCoverageError(f"estimated tail mass {low + high:.3g} exceeds {TAIL_LIMIT:g}")

    xi = grid.freq_axes()[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        prim = np.where(xi != 0, 1.0 / (2j * np.pi * xi), 0.0)
    Fh = forward(X, grid) * prim
    F = inverse(Fh, grid).real
    Gh = Fh * prim if variant == "nu" else None

    period = grid.extent[0]
    tail_sel = quad.nodes >= quad.t_max - period - 1e-12
    tn = quad.nodes[tail_sel]
    u = np.gradient(tn) if len(tn) > 1 else np.ones(1)
    if len(tn) > 1:
        u[0] *= 0.5
        u[-1] *= 0.5
    mean_w = dict(zip(tn.tolist(), (u / u.sum()).tolist()))

    acc = np.zeros_like(F)
    mean_acc = np.zeros_like(F)
    for t, w in zip(quad.nodes, quad.weights):
        if variant == "mu":
            plus = inverse(Fh * np.exp(2j * np.pi * xi * t), grid).real
            minus = inverse(Fh * np.exp(-2j * np.pi * xi * t), grid).real
            A = plus + minus - 2 * F
        else:
            plus = inverse(Gh * np.exp(2j * np.pi * xi * t), grid).real
            minus = inverse(Gh * np.exp(-2j * np.pi * xi * t), grid).real
            A = F - (plus - minus) / (2 * t)
        a2 = A * A
        acc += (w / t**2) * a2
        if t in mean_w:
            mean_acc += mean_w[t] * a2
    acc += mean_acc * quad.t_max**-2 / 2
    return SquareFunctionResult(np.sqrt(acc), grid, quad, {"low": low, "high": high})


def _marcinkiewicz_auto(eng, grid):
    sup = eng.support()
    xi_max = sup[1] if sup else 1.0
    t_min = 2.0**-8 / xi_max
    for _ in range(20):
        quad = marcinkiewicz_quadrature(grid, xi_max, t_min=t_min)
        low, _, _ = eng.tails(quad)
        if low <= _AUTO_TAIL:
            return quad
        t_min /= 16
    raise QuadratureCoverageError("small-scale tail did not converge")
