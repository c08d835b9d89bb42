"""Measurement routines behind the verification suites and the CLI.

Each ``measure_*`` function computes the quantities a check is judged on and
returns them in a dict; thresholds live with the callers.  Family sizes and
grids are arguments, so smoke runs can shrink them.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .dilation import diag12_rho, make_dilation_group, quasi_norm
from .fields import GridSpec, SpatialField, SymbolPoints, band_limit, forward, inverse, lp_norms, random_test_function
from .kernels import (
    ball_averaging_kernel,
    iterated_kernel,
    iterated_symbol,
    marcinkiewicz_half_profile,
    marcinkiewicz_sign_profile,
    poisson_gradient_family,
    potential_profile,
    radial_profile,
    smooth_bump_kernel,
    field_moment,
    _multi_indices,
)
from .operators import default_approximant, functional_calculus, lp_symbol, unit_shell
from .sobolev import DIAG12, Family, diag12_derivative_check, equivalence_sweep
from .squares import _premultiply, avg_square, g_psi, g_vector, iterated_square, marcinkiewicz, potential_square

ADMISSIBLE_P = np.array([[1.2, 0.3], [-0.1, 1.8]])
DEFAULT_PS = (1.5, 2.0, 3.0)


@dataclass(frozen=True)
class Check:
    """Outcome of one check: ``value`` compared against ``limit``."""

    name: str
    value: float
    limit: float
    passed: bool
    detail: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.value:.4g} (limit {self.limit:.4g}) {self.detail}".rstrip()


def below(name, value, limit, detail=""):
    return Check(name, float(value), float(limit), bool(value <= limit), detail)


def _family(G, grid, n, eps=0.125, master_seed=0):
    return np.stack([random_test_function(s, G, grid, eps, master_seed).samples for s in range(n)])


# --- radial isometry ---------------------------------------------------------


def measure_radial_isometry(n_fields=32, points=256, extent=16.0, P=DIAG12, master_seed=0):
    """Max ``| ||g_psi f||_2 / ||f||_2 - 1 |`` for the radial generator, and the wall time."""
    G = make_dilation_group(P)
    grid = GridSpec.cube(G.dim, extent, points)
    X = _family(G, grid, n_fields, master_seed=master_seed)
    t0 = time.perf_counter()
    r = g_psi((X, grid), radial_profile(G), G)
    elapsed = time.perf_counter() - t0
    ratio = lp_norms(r.values, grid, 2) / lp_norms(X, grid, 2)
    return {"max_dev": float(np.abs(ratio - 1).max()), "seconds": elapsed, "n": n_fields}


# --- Riesz round trip --------------------------------------------------------


def measure_riesz_round_trip(alphas=(0.5, 1.0, 1.7), n_fields=4, points=256, extent=16.0):
    """Max over alpha, group and field of ``max|I_-a I_a f - f| / max|f|``."""
    out = {}
    for name, P in (("identity", np.eye(2)), ("diag12", DIAG12)):
        G = make_dilation_group(P)
        grid = GridSpec.cube(2, extent, points)
        X = _family(G, grid, n_fields)
        for a in alphas:
            Y = _premultiply(_premultiply(X, grid, G, a), grid, G, -a)
            err = np.abs(Y - X).max(axis=(1, 2)) / np.abs(X).max(axis=(1, 2))
            out[(name, a)] = float(err.max())
    return out


# --- quasi-norm --------------------------------------------------------------


def measure_homogeneity(n=10_000, seed=0):
    """Relative homogeneity error of ``rho`` and the closed-form mismatch for ``diag(1, 2)``."""
    rng = np.random.default_rng(seed)
    res = {}
    for name, P in (("diag12", DIAG12), ("general", ADMISSIBLE_P)):
        G = make_dilation_group(P)
        x = rng.standard_normal((n, 2)) * np.exp(rng.uniform(-3, 3, (n, 1)))
        t = np.exp(rng.uniform(-4, 4, n))
        lhs = G.rho(G.dilate(t, x))
        rhs = t * G.rho(x)
        res[name] = float(np.max(np.abs(lhs - rhs) / rhs))
    G = make_dilation_group(DIAG12)
    x = rng.standard_normal((n, 2)) * np.exp(rng.uniform(-3, 3, (n, 1)))
    exact = diag12_rho(x)
    res["closed_form"] = float(np.max(np.abs(G.rho(x) - exact) / exact))
    return res


# --- iterated kernels --------------------------------------------------------


def measure_iterated_moments(ks=(1, 2, 3)):
    """Largest ``|int y^a K^(k)|`` over ``1 <= |a| < 2k`` and fitted flatness exponents."""
    G = make_dilation_group(np.eye(2))
    kernels = {"ball": ball_averaging_kernel(G), "bump": smooth_bump_kernel(2)}
    out = {}
    rng = np.random.default_rng(1)
    th = rng.uniform(0, 2 * np.pi, 16)
    omega = np.stack([np.cos(th), np.sin(th)], -1)
    for name, Phi in kernels.items():
        for k in ks:
            K = iterated_kernel(Phi, k)
            worst = max(abs(field_moment(K, a)) for a in _multi_indices(2, 2 * k - 1))
            S = iterated_symbol(Phi, k)
            r = np.geomspace(1e-3, 0.5 * Phi.taylor_radius, 24)
            xi = (r[:, None, None] * omega[None]).reshape(-1, 2)
            v = np.abs(S.complement(SymbolPoints(xi, group=G)))
            slope = np.polyfit(np.log(np.repeat(r, len(omega))), np.log(v), 1)[0]
            out[(name, k)] = {"moment": float(worst), "slope": float(slope),
                              "origin": float(S(SymbolPoints(np.zeros((1, 2)), group=G))[0])}
    return out


# --- equivalence sweep -------------------------------------------------------


def default_sweep_cells(G):
    """``(tag, alpha, k, construction)`` cells of the default sweep."""
    cells = [("T1.4", None, 1, "radial")]
    for a in (0.5, 1.0, 1.5):
        cells += [("T1.2", a, 1, "kernel"), ("T1.3", a, 1, "kernel")]
    hi = [a for a in (0.5, 1.5, 2.5) if a < G.gamma]
    for a in hi:
        cells += [("T1.4", a, 1, "kernel"), ("T1.5", a, 1, "kernel")]
    for k, alphas in ((1, (0.5, 1.5)), (2, (1.5, 2.5))):
        for a in alphas:
            if a < min(2 * k, G.gamma):
                cells += [("T4.1", a, k, "kernel"), ("T4.2", a, k, "kernel")]
    if np.array_equal(G.P, DIAG12):
        cells.append(("T5.1", 2.0, 1, "kernel"))
    return cells


def run_sweep(cells, family, G, ps=DEFAULT_PS, betas=None, refine=True, progress=None):
    """Every report of every cell; square-function sides are shared between cells."""
    cache = {}
    reports = []
    for tag, a, k, construction in cells:
        t0 = time.perf_counter()
        reps = equivalence_sweep(tag, family, a, k, ps, betas, G, construction, refine=refine, cache=cache)
        if progress:
            progress(tag, a, k, construction, time.perf_counter() - t0)
        reports += reps
    return reports


# --- square-function routes --------------------------------------------------


def measure_routes(n_fields=8, points=256, extent=16.0, alphas=(0.5, 1.0, 1.5), k=2):
    """Relative sup discrepancies between equivalent square-function routes."""
    G = make_dilation_group(DIAG12)
    grid = GridSpec.cube(2, extent, points)
    X = _family(G, grid, n_fields)
    Phi = ball_averaging_kernel(G)
    out = {}
    for a in alphas:
        Gv = avg_square((X, grid), Phi, a, G)
        Y = _premultiply(X, grid, G, -a)
        H = potential_square((Y, grid), Phi, a, G, quad=Gv.quadrature)
        out[("G=H(I_-a)", a)] = float(np.abs(Gv.values - H.values).max() / Gv.values.max())
        Hp = potential_square((Y, grid), Phi, a, G, quad=H.quadrature, route="profile")
        out[("H=g_psi", a)] = float(np.abs(Hp.values - H.values).max() / H.values.max())
    for a in (0.5, 1.5, 2.5):
        E = iterated_square((X, grid), Phi, a, k, G)
        Eb = iterated_square((X, grid), Phi, a, k, G, quad=E.quadrature, route="binomial")
        out[("E binomial", a)] = float(np.abs(E.values - Eb.values).max() / E.values.max())
    return out


# --- functional calculus -----------------------------------------------------


def measure_functional_calculus(alpha=1.0, K=40, theta_nodes=1024, width=0.05):
    """Partial-sum errors of the Cauchy series for ``1/z`` and the ``ell = m`` check.

    ``width`` is the rotation spread of :func:`default_approximant`; wider
    approximants sit further from ``m`` and converge more slowly.
    """
    G = make_dilation_group(DIAG12)
    m = lp_symbol(potential_profile(G, alpha, ball_averaging_kernel(G)), G)
    shell = unit_shell(G, 64)
    mv = m(shell)
    ell = default_approximant(m, width=width)
    fc = functional_calculus(m, ell, lambda z: 1.0 / z, K, theta_nodes, shell)
    S = fc.partial_sums(shell)
    err = np.abs(S - (1.0 / mv)[:, None]).max(axis=0) / np.abs(1.0 / mv).max()
    floor = 1e-13
    live = [j for j in range(K) if err[j] > floor and err[j + 1] > floor]
    ratios = [err[j + 1] / err[j] for j in live]
    same = functional_calculus(m, m, np.exp, K, theta_nodes, shell)
    s0 = same.partial_sums(shell)[:, 0]
    exact_err = float(np.abs(s0 - np.exp(mv)).max() / np.abs(np.exp(mv)).max())
    return {"errors": err.tolist(), "max_ratio": float(max(ratios)) if ratios else 0.0,
            "terms_measured": len(ratios), "final": float(err[K]), "ell_equals_m": exact_err, "eps0": fc.eps0}


# --- diag(1, 2) reconstruction -----------------------------------------------


def measure_diag12(n_fields=32, points=128, extent=16.0, p=2.0):
    """Reconstruction errors and the ratio spread over the family."""
    G = make_dilation_group(DIAG12)
    grid = GridSpec.cube(2, extent, points)
    errs, ratios = [], []
    for s in range(n_fields):
        d = diag12_derivative_check(random_test_function(s, G, grid, 0.125), p, None, G)
        errs.append(d["reconstruction_error"])
        ratios.append(d["norm_ratio"])
    ratios = np.array(ratios)
    return {"max_error": float(max(errs)), "spread": float(ratios.max() / ratios.min())}


# --- Marcinkiewicz functions -------------------------------------------------


def measure_marcinkiewicz(n_fields=8, points=1024, extent=64.0):
    """Relative L2 discrepancy between the defining formulas and the ``g_psi`` route."""
    G = make_dilation_group(np.eye(1))
    grid = GridSpec.cube(1, extent, points)
    X = _family(G, grid, n_fields)
    out = {}
    for variant, prof in (("mu", marcinkiewicz_sign_profile(G)), ("nu", marcinkiewicz_half_profile(G))):
        A = g_psi((X, grid), prof, G)
        B = marcinkiewicz((X, grid), variant, quad=A.quadrature)
        out[variant] = float(np.linalg.norm(A.values - B.values) / np.linalg.norm(A.values))
    return out


# --- Poisson family ----------------------------------------------------------


def measure_poisson(n_fields=8, points=256, extent=16.0):
    """``sup_t |F(Psi_t)(xi)|`` deviation from ``1/e`` and ``||g_Psi f|| / ||f||`` deviation from 1/2."""
    from scipy.optimize import minimize_scalar

    G = make_dilation_group(np.eye(2))
    fam = poisson_gradient_family(G)
    rng = np.random.default_rng(3)
    xi = rng.standard_normal((64, 2)) * np.exp(rng.uniform(-2, 2, (64, 1)))

    def modulus(t, x):
        pts = SymbolPoints(G.dilate(t, x[None], adjoint=True), group=G)
        return math.sqrt(sum(abs(complex(p(pts)[0])) ** 2 for p in fam))

    sups = []
    for x in xi:
        r = minimize_scalar(lambda s: -modulus(math.exp(s), x), bracket=(-5, 5), tol=1e-12)
        sups.append(-r.fun)
    grid = GridSpec.cube(2, extent, points)
    X = _family(G, grid, n_fields)
    r = g_vector((X, grid), fam, G)
    ratio = lp_norms(r.values, grid, 2) / lp_norms(X, grid, 2)
    return {"sup_dev": float(np.max(np.abs(np.array(sups) - math.exp(-1)))),
            "norm_dev": float(np.max(np.abs(ratio - 0.5)))}


# --- quick invariant suite ---------------------------------------------------


def verify_checks(points=128, n_fields=4):
    """Fast invariant checks across all modules, for the ``verify`` command."""
    from .kernels import check_moment_class
    from .operators import invert_multiplier
    from .weights import estimate_ap_constant, maximal_function, power_weight

    checks = []
    G = make_dilation_group(DIAG12)
    grid = GridSpec.cube(2, 16.0, points)

    h = measure_homogeneity(2000)
    checks.append(below("dilation: quasi-norm homogeneity", max(h["diag12"], h["general"]), 1e-9))
    checks.append(below("dilation: closed-form quasi-norm", h["closed_form"], 1e-9))
    checks.append(below("dilation: rho(0, 4) = 2", abs(quasi_norm(G, [0.0, 4.0]).value - 2), 1e-12))

    f = random_test_function(0, G, grid, 0.125)
    F = forward(f.samples, grid)
    checks.append(below("fields: round trip", np.abs(inverse(F, grid) - f.samples).max(), 1e-12))
    spec = math.sqrt(np.sum(np.abs(F) ** 2) / grid.volume)
    checks.append(below("fields: Parseval", abs(spec - f.l2_norm()), 1e-10))
    b = band_limit(f, G, 0.125)
    checks.append(below("fields: band-limit idempotence", np.abs(band_limit(b, G, 0.0625).samples - b.samples).max(), 1e-12))

    Phi = ball_averaging_kernel(G)
    checks.append(Check("kernels: ball kernel in M^1.5", 1.0, 1.0, check_moment_class(Phi, 1.5).passed))
    checks.append(Check("kernels: ball kernel not in M^2", 1.0, 1.0, not check_moment_class(Phi, 2).passed))
    mom = measure_iterated_moments((2,))
    checks.append(below("kernels: K^(2) moments", max(v["moment"] for v in mom.values()), 1e-7))

    rt = max(measure_riesz_round_trip(n_fields=1, points=points).values())
    checks.append(below("operators: Riesz round trip", rt, 1e-10))
    m = lp_symbol(radial_profile(G), G)
    shell = unit_shell(G, 32)
    checks.append(below("operators: radial symbol = 1", np.abs(m(shell) - 1).max(), 1e-6))
    inv = invert_multiplier(lp_symbol(potential_profile(G, 1.0, Phi), G), shell)
    checks.append(Check("operators: potential symbol invertible", 1.0, 1.0, inv is not None))

    X = _family(G, grid, n_fields)
    r = g_psi((X, grid), radial_profile(G), G)
    dev = np.abs(lp_norms(r.values, grid, 2) / lp_norms(X, grid, 2) - 1).max()
    checks.append(below("squares: radial L2 isometry", dev, 1e-5))
    routes = measure_routes(n_fields=2, points=points, alphas=(1.0,))
    checks.append(below("squares: route equivalences", max(routes.values()), 1e-9))

    w1 = estimate_ap_constant(power_weight(G, 0.0), 2.0, grid)
    checks.append(below("weights: A_p of w = 1", abs(w1.lower_bound - 1), 1e-12))
    M = maximal_function(SpatialField(grid, np.full(grid.points, 2.0)), G)
    checks.append(below("weights: M(const)", np.abs(M.samples - 2).max(), 1e-3))

    d = measure_diag12(n_fields, points)
    checks.append(below("sobolev: diag(1,2) reconstruction", d["max_error"], 1e-10))
    rep = equivalence_sweep("T1.4", Family(n_fields, grid=grid), ps=(2.0,), betas=(0.0,), G=G,
                            construction="radial", refine=False)[0]
    checks.append(below("sobolev: exact T1.4 spread - 1", rep.spread - 1, 1e-5))
    return checks
