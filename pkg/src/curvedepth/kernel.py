"""Covariance data of the Gaussian pair (value, radial derivative).

For a scheme with weights c_J the covariance entries are the finite series

    alpha = sum c_J^2 x^(2 j1) y^(2 j2)
    beta  = sum c_J^2 (j1 + j2)   x^(2 j1) y^(2 j2)
    gamma = sum c_J^2 (j1 + j2)^2 x^(2 j1) y^(2 j2)

and the Kac-Rice integrand is sqrt(det Sigma)/alpha = sqrt(gamma/alpha -
(beta/alpha)^2).  Closed forms are used for the Kostlan and square-Kac
schemes; the generic series is the independent oracle.

Kac one-dimensional density factor:

    phi_d(s) = 1/(s^2-1)^2 - (d+1)^2 s^(2d) / (s^(2d+2)-1)^2

has a removable singularity at s = 1 where the two terms cancel
catastrophically.  With w = 2 log s, n = d+1 and h(z) = (z/sinh z)^2 the
identity

    phi_d(s) = exp(-w) * (h(w/2) - h(n w/2)) / w^2

holds, and for |n w/2| <= 1/2 the difference of h-series is summed with
the factor (1 - n^(2m)) pulled out term by term, which is accurate
uniformly in d.  Elsewhere both terms are evaluated through expm1, which
is stable for every s not close to 1.  phi_d(1) = d(d+2)/12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import CoefficientScheme, KAC_SQUARE, KOSTLAN
from .errors import SingularEvaluation

SERIES = "series"
CLOSED_KOSTLAN = "closed_kostlan"
CLOSED_KAC = "closed_kac"

_DET_CLAMP_REL = 1e-12  # det Sigma in (-rel*alpha*gamma, 0) is rounding noise


def _h_series_coeffs(nterms=14):
    """Taylor coefficients of (z/sinh z)^2 in z^2, by exact arithmetic."""
    # sinh(z)/z = sum z^(2m) / (2m+1)!
    q = [Fraction(1, math.factorial(2 * m + 1)) for m in range(nterms)]
    # square
    r = [sum(q[i] * q[m - i] for i in range(m + 1)) for m in range(nterms)]
    # reciprocal power series
    h = [Fraction(1)]
    for m in range(1, nterms):
        h.append(-sum(r[i] * h[m - i] for i in range(1, m + 1)))
    return np.array([float(v) for v in h])


_H_COEFFS = _h_series_coeffs()  # [1, -1/3, 1/15, ...]


def kac_phi(d: int, s):
    """Kac root-density factor phi_d(|s|), finite and >= 0 everywhere."""
    if d < 1:
        raise ValueError("d must be >= 1")
    s_in = np.asarray(s, dtype=float)
    scalar = s_in.ndim == 0
    s_abs = np.abs(np.atleast_1d(s_in))
    n = d + 1
    out = np.ones_like(s_abs)  # phi_d(0) = 1

    pos = s_abs > 0.0
    w = 2.0 * np.log(s_abs[pos])
    phi = np.empty_like(w)

    near = np.abs(n * w) <= 1.0  # |n w / 2| <= 1/2
    if np.any(near):
        wn = w[near]
        t = 0.25 * wn * wn            # (w/2)^2
        T = (0.5 * n * wn) ** 2       # (n w/2)^2
        acc = np.zeros_like(wn)
        tp = np.ones_like(wn)
        Tp = np.ones_like(wn)
        n2 = float(n) * float(n)
        for m in range(1, len(_H_COEFFS)):
            acc += _H_COEFFS[m] * (tp - n2 * Tp)
            tp = tp * t
            Tp = Tp * T
        phi[near] = np.exp(-wn) * 0.25 * acc

    far = ~near
    if np.any(far):
        wf = w[far]
        term1 = 1.0 / np.expm1(wf) ** 2
        nw = n * wf
        term2 = np.zeros_like(wf)
        mid = np.abs(nw) <= 350.0
        # |nw| > 350, w > 0: term2 ~ n^2 exp(-(n+1)w) underflows to 0
        lo = nw < -350.0  # expm1(nw) = -1 exactly
        term2[mid] = n2_exp_ratio(n, wf[mid])
        term2[lo] = n * n * np.exp((n - 1) * wf[lo])
        phi[far] = term1 - term2

    out[pos] = np.maximum(phi, 0.0)
    return float(out[0]) if scalar else out.reshape(s_in.shape)


def n2_exp_ratio(n, w):
    """n^2 exp((n-1) w) / expm1(n w)^2 for moderate |n w|."""
    return n * n * np.exp((n - 1) * w) / np.expm1(n * w) ** 2


def _psi(z):
    """psi(z) = z / (1 - exp(-z)), stable for all z; psi(0) = 1."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 12.0
    big = z > 350.0
    out[big] = z[big]
    neg = z < -700.0
    out[neg] = 0.0
    rest = ~(small | big | neg)
    zr = z[rest]
    out[rest] = zr / (-np.expm1(-zr))
    return out


def _kac_geom_sum(n, X):
    """sum_{i=0}^{n-1} X^i = expm1(n log X)/expm1(log X), X >= 0."""
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    one = X == 1.0
    out[one] = float(n)
    zero = X == 0.0
    out[zero] = 1.0
    rest = ~(one | zero)
    lx = np.log(X[rest])
    num = np.where(n * lx > 700.0, np.inf, np.expm1(n * lx))
    out[rest] = num / np.expm1(lx)
    return out


def _kac_log_geom_sum(n, X):
    """log of the geometric sum, safe against overflow for X >> 1."""
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    one = X == 1.0
    out[one] = math.log(n)
    zero = X == 0.0
    out[zero] = 0.0
    rest = ~(one | zero)
    lx = np.log(X[rest])
    nlx = n * lx
    big = nlx > 700.0
    r = np.empty_like(lx)
    # log((X^n - 1)/(X - 1)) = n log X + log(1 - X^-n) - log(X - 1)
    r[big] = nlx[big] + np.log1p(-np.exp(-nlx[big])) - np.log(np.abs(np.expm1(lx[big])))
    r[~big] = np.log(np.abs(np.expm1(nlx[~big]))) - np.log(np.abs(np.expm1(lx[~big])))
    out[rest] = r
    return out


def _kac_L(d: int, x):
    """L(x) = x^2/(1-x^2) - (d+1) x^(2d+2)/(1-x^(2d+2)).

    Radial log-derivative factor of the Kac kernel: L = (x/2) d/dx log A(x)
    with A the geometric sum in x^2.  Computed as (psi(n w) - psi(w))/w,
    w = 2 log|x|, n = d+1, with a series branch for small n w.
    """
    n = d + 1
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(ax)  # L(0) = 0
    pos = ax > 0.0
    w = 2.0 * np.log(ax[pos])
    r = np.empty_like(w)
    near = np.abs(n * w) < 0.1
    wn = w[near]
    # (psi(nw) - psi(w))/w, Bernoulli series, exact n-dependent coefficients
    r[near] = (
        (n - 1) / 2.0
        + (n**2 - 1) * wn / 12.0
        - (n**4 - 1) * wn**3 / 720.0
        + (n**6 - 1) * wn**5 / 30240.0
    )
    wf = w[~near]
    r[~near] = (_psi(n * wf) - _psi(wf)) / wf
    out[pos] = r
    return out


@dataclass(frozen=True)
class CovKernel:
    scheme: CoefficientScheme
    mode: str

    def __post_init__(self):
        if self.mode not in (SERIES, CLOSED_KOSTLAN, CLOSED_KAC):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.mode == CLOSED_KOSTLAN and self.scheme.kind != KOSTLAN:
            raise ValueError("closed Kostlan form requires a Kostlan scheme")
        if self.mode == CLOSED_KAC and self.scheme.kind != KAC_SQUARE:
            raise ValueError("closed Kac form requires a square Kac scheme")

    @property
    def degree(self) -> int:
        return self.scheme.degree

    # -- covariance triple ---------------------------------------------------

    def alpha_beta_gamma(self, x, y, scaled=False):
        """(alpha, beta, gamma); with scaled=True, (a, b, g, log_scale).

        The scaled form carries a shared exponent so that huge kernels
        (large degree, large |x|) never overflow; the unscaled form may
        return inf in that regime.
        """
        a, b, g, ls = self._abg_scaled(np.asarray(x, float), np.asarray(y, float))
        if scaled:
            return a, b, g, ls
        s = np.exp(ls)
        return a * s, b * s, g * s

    def _abg_scaled(self, x, y):
        if self.mode == CLOSED_KOSTLAN:
            d = self.degree
            r2 = x * x + y * y
            u = r2 / (1.0 + r2)
            alpha = np.ones_like(r2)
            beta = d * u
            gamma = d * u + d * (d - 1) * u * u
            return alpha, beta, gamma, d * np.log1p(r2)
        if self.mode == CLOSED_KAC:
            d = self.degree
            n = d + 1
            X, Y = x * x, y * y
            logalpha = _kac_log_geom_sum(n, X) + _kac_log_geom_sum(n, Y)
            Ls = _kac_L(d, x) + _kac_L(d, y)
            q = x * x * kac_phi(d, x) + y * y * kac_phi(d, y)
            return np.ones_like(Ls), Ls, Ls * Ls + q, logalpha
        return self._abg_series(x, y)

    def _abg_series(self, x, y):
        sch = self.scheme
        c2 = sch.c * sch.c
        k = (sch.j1 + sch.j2).astype(float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        xf = np.broadcast_to(x, shape).reshape(-1)
        yf = np.broadcast_to(y, shape).reshape(-1)

        with np.errstate(divide="ignore"):
            lx = np.log(np.abs(xf))
            ly = np.log(np.abs(yf))
        # log of each term, -inf where the base is 0 and the exponent > 0
        tx = np.where(sch.j1[None, :] > 0, 2.0 * sch.j1[None, :] * lx[:, None], 0.0)
        ty = np.where(sch.j2[None, :] > 0, 2.0 * sch.j2[None, :] * ly[:, None], 0.0)
        t = tx + ty + np.log(c2)[None, :]
        t = np.where(np.isnan(t), -np.inf, t)
        m = np.max(t, axis=1)
        m = np.where(np.isfinite(m), m, 0.0)
        e = np.exp(t - m[:, None])
        alpha = e.sum(axis=1)
        beta = e @ k
        gamma = e @ (k * k)
        return (
            alpha.reshape(shape),
            beta.reshape(shape),
            gamma.reshape(shape),
            m.reshape(shape),
        )

    # -- Kac-Rice integrand ----------------------------------------------------

    def integrand(self, x, y):
        """sqrt(det Sigma)/alpha, vectorized; >= 0 after the noise clamp."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.mode == CLOSED_KOSTLAN:
            r2 = x * x + y * y
            return math.sqrt(self.degree) * np.sqrt(r2) / (1.0 + r2)
        if self.mode == CLOSED_KAC:
            d = self.degree
            q = x * x * kac_phi(d, x) + y * y * kac_phi(d, y)
            return np.sqrt(q)
        a, b, g, _ = self._abg_scaled(x, y)
        br = b / a
        det = g / a - br * br
        bad = det < 0
        if np.any(bad):
            floor = -_DET_CLAMP_REL * (g / a)
            if np.any(det < np.minimum(floor, -1e-300)):
                worst = float(np.min((det / np.maximum(g / a, 1e-300))[bad]))
                raise SingularEvaluation(
                    f"det Sigma / (alpha gamma) = {worst:.3e} < -{_DET_CLAMP_REL}"
                )
            det = np.maximum(det, 0.0)
        return np.sqrt(det)


def make_kernel(scheme: CoefficientScheme, mode: str = "auto") -> CovKernel:
    """Kernel for a scheme; 'auto' picks the closed form when one exists."""
    if mode == "auto":
        if scheme.kind == KOSTLAN:
            mode = CLOSED_KOSTLAN
        elif scheme.kind == KAC_SQUARE:
            mode = CLOSED_KAC
        else:
            mode = SERIES
    return CovKernel(scheme, mode)
