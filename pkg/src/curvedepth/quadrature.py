"""Adaptive evaluation of the expected-depth integrals.

The plane integral

    value = (1/2 pi^2) iint integrand(x, y) / (x^2 + y^2) dx dy

is computed in polar coordinates.  The radial half-line is compactified
by r = tan(u), u in (0, pi/2); with g(u, theta) =
integrand(r cos t, r sin t) (1 + r^2) / r the value becomes

    (1/2 pi^2) int_theta int_0^(pi/2) g du dtheta.

All covariance series are even in x and in y, so theta runs over
[0, pi/2] with a factor 4.  For the Kostlan closed form g is exactly
sqrt(d), so the radial panels converge immediately and any theta rule is
exact; the generic path uses globally adaptive Gauss-Kronrod panels in
both variables.  Each panel pairs a 7-point Gauss rule with its 15-point
Kronrod extension for the local error estimate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .ensembles import CoefficientScheme
from .errors import NonConvergence
from .kernel import CLOSED_KOSTLAN, CovKernel, kac_phi

# Gauss 7 / Kronrod 15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])              # Kronrod weights
_WGFULL = np.zeros(15)
_WGFULL[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])    # Gauss weights


def _gk15_batch(f, a, b):
    """Gauss-Kronrod data for a batch of panels.

    a, b are arrays of panel endpoints; returns (values, err_ests, n_evals)
    from a single vectorized call to f.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = 0.5 * (b - a)
    x = a[:, None] + h[:, None] * (_NODES + 1.0)[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    resk = h * (fx @ _WK)
    resg = h * (fx @ _WGFULL)
    resabs = h * (np.abs(fx) @ _WK)
    mean = resk / (b - a)
    resasc = h * (np.abs(fx - mean[:, None]) @ _WK)
    err = np.abs(resk - resg)
    # QUADPACK-style rescaling, floored near machine precision
    safe = (resasc != 0.0) & (err != 0.0)
    err[safe] = resasc[safe] * np.minimum(
        1.0, (200.0 * err[safe] / resasc[safe]) ** 1.5
    )
    err = np.maximum(err, 50.0 * np.finfo(float).eps * resabs)
    return resk, err, 15 * len(a)


_SPLIT_BATCH = 8  # panels refined per vectorized evaluation


def adaptive_gk(f, a, b, tol, max_panels):
    """Globally adaptive GK15 on [a, b] to absolute tolerance tol.

    f must accept an ndarray of abscissae.  Returns (value, err_est,
    n_evals); raises NonConvergence when the panel budget is exhausted.
    Deterministic: the worst panels (ties broken by insertion order) are
    split until the summed error estimate meets tol.
    """
    vals, errs, nev = _gk15_batch(f, [a], [b])
    heap = [(-errs[0], 0, a, b, vals[0], errs[0])]
    count = 1
    total_err = errs[0]
    while total_err > tol:
        if len(heap) >= max_panels:
            value = math.fsum(item[4] for item in heap)
            raise NonConvergence(
                f"error estimate {total_err:.3e} > tol {tol:.3e} "
                f"after {len(heap)} panels",
                value=value,
                err_est=total_err,
            )
        # pop the worst few panels, but never more than needed to get the
        # running estimate under tol if their error went to zero
        popped = []
        excess = total_err
        while heap and len(popped) < _SPLIT_BATCH and excess > tol:
            item = heapq.heappop(heap)
            popped.append(item)
            excess -= item[5]
        pa = np.array([p[2] for p in popped])
        pb = np.array([p[3] for p in popped])
        mid = 0.5 * (pa + pb)
        lo = np.concatenate([pa, mid])
        hi = np.concatenate([mid, pb])
        v, e, ne = _gk15_batch(f, lo, hi)
        nev += ne
        for i in range(len(lo)):
            heapq.heappush(heap, (-e[i], count, lo[i], hi[i], v[i], e[i]))
            count += 1
        total_err += float(np.sum(e)) - sum(p[5] for p in popped)
        if count % 256 < 2 * len(popped):  # refresh against drift
            total_err = math.fsum(item[5] for item in heap)
    value = math.fsum(item[4] for item in heap)
    err_est = math.fsum(item[5] for item in heap)
    return value, err_est, nev


@dataclass(frozen=True)
class QuadConfig:
    tol: float = 1e-8
    max_panels: int = 1_000_000

    def __post_init__(self):
        if self.tol <= 0 or self.max_panels < 1:
            raise ValueError("tol must be positive and max_panels >= 1")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    err_est: float
    a_d_band: float      # 0 for even curve degree, 1/2 for odd
    degree: int          # scheme degree as requested
    scheme_kind: str
    n_evals: int
    method: str

    def __post_init__(self):
        if self.value < 0 or self.err_est < 0:
            raise ValueError("value and err_est must be nonnegative")


def _band_for(scheme: CoefficientScheme) -> float:
    """Pseudoline band: driven by the parity of the projective curve degree.

    The curve a sample defines has degree scheme.homogenization_degree
    (2d for the square Kac support), and only odd-degree curves carry the
    single pseudoline whose contribution is bounded by 1/2.
    """
    return 0.5 if scheme.homogenization_degree % 2 else 0.0


def _radial_integrand(kernel, theta):
    ct, st = math.cos(theta), math.sin(theta)

    def g(u):
        r = np.tan(u)
        return kernel.integrand(r * ct, r * st) * (1.0 + r * r) / r

    return g


def expected_depth(kernel: CovKernel, cfg: QuadConfig = QuadConfig(),
                   u_max: float = math.pi / 2) -> IntegralResult:
    """Integral term of the expected depth for an arbitrary kernel.

    u_max < pi/2 truncates the radial domain at r = tan(u_max); the
    default integrates the full half-line.
    """
    C = 2.0 / math.pi**2  # (1/2pi^2) * 4-fold theta symmetry
    theta_hi = math.pi / 2
    inner_tol = cfg.tol / (C * theta_hi) / 4.0
    nev_total = 0

    def R(thetas):
        nonlocal nev_total
        out = np.empty_like(thetas)
        for i, th in enumerate(np.atleast_1d(thetas)):
            v, _, ne = adaptive_gk(
                _radial_integrand(kernel, float(th)), 0.0, u_max,
                inner_tol, cfg.max_panels,
            )
            nev_total += ne
            out[i] = v
        return out

    if kernel.mode == CLOSED_KOSTLAN:
        # theta-independent integrand: fixed midpoint rule is exact
        m = 8
        th = (np.arange(m) + 0.5) * (theta_hi / m)
        vals = R(th)
        val_theta = theta_hi * float(np.mean(vals))
        err_theta = theta_hi * float(np.max(vals) - np.min(vals))
    else:
        val_theta, err_theta, ne = adaptive_gk(
            R, 0.0, theta_hi, cfg.tol / C / 2.0, cfg.max_panels
        )
        nev_total += ne

    value = C * val_theta
    err_est = C * (err_theta + theta_hi * inner_tol)
    return IntegralResult(
        value=max(value, 0.0),
        err_est=err_est,
        a_d_band=_band_for(kernel.scheme),
        degree=kernel.scheme.degree,
        scheme_kind=kernel.scheme.kind,
        n_evals=nev_total,
        method="kacrice",
    )


def expected_depth_kac_polar(d: int, cfg: QuadConfig = QuadConfig()) -> IntegralResult:
    """Kac expected depth through the 8-fold symmetric polar form.

    value = (4/pi^2) int_0^inf int_0^(pi/4)
            sqrt(cos^2 t phi_d(r cos t) + sin^2 t phi_d(r sin t)) dt dr
    with the same r = tan(u) compactification as the generic path.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    C = 4.0 / math.pi**2
    theta_hi = math.pi / 4
    inner_tol = cfg.tol / (C * theta_hi) / 4.0
    nev_total = 0

    def slice_integrand(theta):
        ct, st = math.cos(theta), math.sin(theta)

        def g(u):
            r = np.tan(u)
            q = ct * ct * kac_phi(d, r * ct) + st * st * kac_phi(d, r * st)
            return np.sqrt(q) * (1.0 + r * r)

        return g

    def R(thetas):
        nonlocal nev_total
        out = np.empty_like(thetas)
        for i, th in enumerate(np.atleast_1d(thetas)):
            v, _, ne = adaptive_gk(
                slice_integrand(float(th)), 0.0, math.pi / 2,
                inner_tol, cfg.max_panels,
            )
            nev_total += ne
            out[i] = v
        return out

    val_theta, err_theta, ne = adaptive_gk(
        R, 0.0, theta_hi, cfg.tol / C / 2.0, cfg.max_panels
    )
    nev_total += ne
    value = C * val_theta
    err_est = C * (err_theta + theta_hi * inner_tol)
    from .ensembles import kac_square_scheme

    return IntegralResult(
        value=max(value, 0.0),
        err_est=err_est,
        a_d_band=0.0,  # square-Kac curves have even projective degree
        degree=d,
        scheme_kind=kac_square_scheme(d).kind,
        n_evals=nev_total,
        method="kacrice-polar",
    )


def kac_1d_root_density_integral(d: int, cfg: QuadConfig = QuadConfig()) -> float:
    """Expected number of real roots of a degree-d univariate Kac polynomial.

    (1/pi) int_R sqrt(phi_d(s)) ds = (2/pi) int_0^inf sqrt(phi_d), by the
    evenness of phi_d.  For d = 1 the integrand is 1/(1 + s^2) and the
    arctan antiderivative gives exactly 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")

    def g(u):
        s = np.tan(u)
        return np.sqrt(kac_phi(d, s)) * (1.0 + s * s)

    value, _, _ = adaptive_gk(g, 0.0, math.pi / 2, cfg.tol, cfg.max_panels)
    return 2.0 / math.pi * value


def kostlan_closed_form(d: int) -> float:
    """Exact integral term for the Kostlan ensemble: sqrt(d)/2."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return math.sqrt(d) / 2.0
