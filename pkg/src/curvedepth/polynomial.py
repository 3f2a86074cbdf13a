"""Dense bivariate polynomials and their restriction to the unit sphere.

A sample is stored as a dense coefficient grid ``coeffs[j1, j2]`` for the
affine polynomial ``f(x, y) = sum coeffs[j1, j2] x^j1 y^j2``.  The stored
``degree`` is the homogenization degree (the maximal total degree of the
nonzero support), so the homogeneous lift

    F(X, Y, Z) = sum coeffs[j1, j2] X^j1 Y^j2 Z^(degree - j1 - j2)

is well defined and satisfies F(-P) = (-1)^degree F(P).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly


@dataclass(frozen=True)
class PolySample:
    degree: int
    coeffs: np.ndarray  # shape (degree+1, degree+1), coeffs[j1, j2]
    seed_id: int = 0
    # homogeneous support, derived once at construction
    _j1: np.ndarray = field(repr=False, default=None)
    _j2: np.ndarray = field(repr=False, default=None)
    _j3: np.ndarray = field(repr=False, default=None)
    _c: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] != self.degree + 1:
            raise ValueError("coeffs must be a (degree+1) x (degree+1) grid")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        j1, j2 = np.nonzero(c)
        if len(j1) == 0:
            raise ValueError("zero polynomial has no degree")
        total = j1 + j2
        if total.max() != self.degree:
            raise ValueError(
                f"stated degree {self.degree} != max total degree {total.max()} of support"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        # lexicographic support order keeps evaluation bit-reproducible
        order = np.lexsort((j2, j1))
        object.__setattr__(self, "_j1", j1[order].astype(np.int64))
        object.__setattr__(self, "_j2", j2[order].astype(np.int64))
        object.__setattr__(self, "_j3", (self.degree - total[order]).astype(np.int64))
        object.__setattr__(self, "_c", c[j1[order], j2[order]])


def from_coeff_dict(degree, entries, seed_id=0):
    """Build a PolySample from a {(j1, j2): value} mapping."""
    c = np.zeros((degree + 1, degree + 1))
    for (j1, j2), v in entries.items():
        if j1 < 0 or j2 < 0 or j1 + j2 > degree:
            raise ValueError(f"monomial ({j1},{j2}) outside total degree {degree}")
        c[j1, j2] = v
    return PolySample(degree=degree, coeffs=c, seed_id=seed_id)


def eval_with_radial(poly: PolySample, x: float, y: float):
    """Evaluate (f, fx, fy, t) at a point, with t = x*fx + y*fy.

    Evaluation is nested (Horner in y inside Horner in x) via polyval2d.
    """
    c = poly.coeffs
    f = float(npoly.polyval2d(x, y, c))
    cx = npoly.polyder(c, axis=0)
    cy = npoly.polyder(c, axis=1)
    fx = float(npoly.polyval2d(x, y, cx))
    fy = float(npoly.polyval2d(x, y, cy))
    return f, fx, fy, x * fx + y * fy


def eval_affine_grid(poly: PolySample, x, y):
    """Vectorized (f, t) on arrays x, y; t = x*fx + y*fy."""
    c = poly.coeffs
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = npoly.polyval2d(x, y, c)
    fx = npoly.polyval2d(x, y, npoly.polyder(c, axis=0))
    fy = npoly.polyval2d(x, y, npoly.polyder(c, axis=1))
    return f, x * fx + y * fy


def eval_sphere(poly: PolySample, X, Y, Z):
    """Homogeneous value F(X, Y, Z) on arrays of sphere coordinates.

    Monomials are evaluated through cumulative power tables with a fixed
    term order, so exact coordinate negation yields exactly (-1)^degree
    times the result (IEEE sign symmetry survives every operation).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    d = poly.degree
    shape = np.broadcast_shapes(X.shape, Y.shape, Z.shape)

    def powers(V):
        P = np.empty((d + 1,) + shape)
        P[0] = np.ones(shape)
        for k in range(1, d + 1):
            P[k] = P[k - 1] * V
        return P

    Xp, Yp, Zp = powers(np.broadcast_to(X, shape)), powers(np.broadcast_to(Y, shape)), powers(np.broadcast_to(Z, shape))
    # group terms by j1: within a row, j2 + j3 = degree - j1 is constant, so
    # the row sum keeps the exact (-1)^(degree-j1) negation symmetry
    out = np.zeros(shape)
    c = poly.coeffs
    for j1 in range(d + 1):
        row = None
        for j2 in range(d + 1 - j1):
            if c[j1, j2] == 0.0:
                continue
            term = c[j1, j2] * (Yp[j2] * Zp[d - j1 - j2])
            row = term if row is None else row + term
        if row is not None:
            out += Xp[j1] * row
    return out


def homogenize_and_eval_sphere(poly: PolySample, point):
    """F at a single unit vector (X, Y, Z); rejects non-unit input."""
    p = np.asarray(point, dtype=float)
    if p.shape != (3,):
        raise ValueError("point must be a 3-vector")
    if abs(float(np.sqrt(p @ p)) - 1.0) > 1e-12:
        raise ValueError("point must lie on the unit sphere (|P|=1 within 1e-12)")
    return float(eval_sphere(poly, p[0], p[1], p[2]))


class MonomialRotation:
    """Degree-d orthogonal action on homogeneous coefficient vectors.

    F -> F o R^T is linear on coefficients; the matrix is recovered by
    evaluating rotated monomials at a fixed oversampled set of sphere
    points and re-expanding in the monomial basis (least squares).  One
    instance is reused across samples of the same degree.
    """

    def __init__(self, degree: int, R):
        R = np.asarray(R, dtype=float)
        if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-10):
            raise ValueError("R must be an orthogonal 3x3 matrix")
        self.degree = degree
        self.R = R
        mono = [(a, b, degree - a - b) for a in range(degree + 1)
                for b in range(degree + 1 - a)]
        self._mono = mono
        n = len(mono)
        rng = np.random.Generator(np.random.PCG64(20240331))
        pts = rng.standard_normal((2 * n, 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        A = np.empty((len(pts), n))
        B = np.empty((len(pts), n))
        rpts = pts @ R.T
        for j, (a, b, c) in enumerate(mono):
            A[:, j] = pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c
            B[:, j] = rpts[:, 0] ** a * rpts[:, 1] ** b * rpts[:, 2] ** c
        # columns of M: coefficients of each rotated monomial
        self._M, *_ = np.linalg.lstsq(A, B, rcond=None)

    def apply(self, poly: PolySample) -> PolySample:
        if poly.degree != self.degree:
            raise ValueError("degree mismatch")
        vec = np.array([poly.coeffs[a, b] for (a, b, _) in self._mono])
        out = self._M @ vec
        c = np.zeros_like(poly.coeffs)
        for (a, b, _), v in zip(self._mono, out):
            c[a, b] = v
        return PolySample(degree=poly.degree, coeffs=c, seed_id=poly.seed_id)


def rotate_sample(poly: PolySample, R) -> PolySample:
    """Compose the homogeneous lift with a rotation: new F = old F o R."""
    return MonomialRotation(poly.degree, R).apply(poly)
