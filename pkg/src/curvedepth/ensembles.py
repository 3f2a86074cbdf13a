"""Coefficient schemes and reproducible Gaussian sampling.

A scheme fixes deterministic positive weights c_J on a monomial support;
a sample is f = sum a_J c_J x^j1 y^j2 with a_J i.i.d. standard normal.
Sampling is counter-based (Philox keyed by (master_seed, trial)), so trial
k's coefficient vector is a pure function of (master_seed, k) regardless
of scheduling or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polynomial import PolySample

_MASK64 = (1 << 64) - 1

KOSTLAN = "kostlan"
KAC_SQUARE = "kac_square"
CUSTOM = "custom"


@dataclass(frozen=True)
class CoefficientScheme:
    kind: str
    degree: int
    j1: np.ndarray  # support, lexicographically sorted by (j1, j2)
    j2: np.ndarray
    c: np.ndarray   # positive weights c_J

    def __post_init__(self):
        for name in ("j1", "j2", "c"):
            a = getattr(self, name)
            a.setflags(write=False)
        if not np.all(np.isfinite(self.c)) or np.any(self.c <= 0):
            raise ValueError("weights must be finite and positive")

    @property
    def homogenization_degree(self) -> int:
        """Max total degree of the support: d for Kostlan, 2d for Kac."""
        return int(np.max(self.j1 + self.j2))

    @property
    def n_terms(self) -> int:
        return len(self.c)


def _sorted_support(pairs):
    pairs = sorted(pairs)
    j1 = np.array([p[0] for p in pairs], dtype=np.int64)
    j2 = np.array([p[1] for p in pairs], dtype=np.int64)
    return j1, j2


def kostlan_scheme(degree: int) -> CoefficientScheme:
    """c_J = sqrt(d!/(j1! j2! (d-j1-j2)!)) on j1+j2 <= d, via lgamma."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    j1, j2 = _sorted_support(
        (a, b) for a in range(degree + 1) for b in range(degree + 1 - a)
    )
    lg = math.lgamma
    logw = [
        0.5 * (lg(degree + 1) - lg(a + 1) - lg(b + 1) - lg(degree - a - b + 1))
        for a, b in zip(j1, j2)
    ]
    c = np.exp(np.array(logw))
    return CoefficientScheme(KOSTLAN, degree, j1, j2, c)


def kac_square_scheme(degree: int) -> CoefficientScheme:
    """c_J = 1 on the square support 0 <= j1, j2 <= d."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    j1, j2 = _sorted_support(
        (a, b) for a in range(degree + 1) for b in range(degree + 1)
    )
    return CoefficientScheme(KAC_SQUARE, degree, j1, j2, np.ones(len(j1)))


def custom_scheme(pairs_weights) -> CoefficientScheme:
    """Scheme from {(j1, j2): weight}; degree inferred from the support."""
    items = sorted(pairs_weights.items())
    if not items:
        raise ValueError("custom scheme needs at least one monomial")
    j1 = np.array([k[0] for k, _ in items], dtype=np.int64)
    j2 = np.array([k[1] for k, _ in items], dtype=np.int64)
    if np.any(j1 < 0) or np.any(j2 < 0):
        raise ValueError("monomial exponents must be nonnegative")
    c = np.array([v for _, v in items], dtype=float)
    degree = int(np.max(j1 + j2))
    return CoefficientScheme(CUSTOM, degree, j1, j2, c)


def load_custom_scheme(path) -> CoefficientScheme:
    """Parse a weight table: one record per line, "j1 j2 weight"."""
    table = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'j1 j2 weight'")
            key = (int(parts[0]), int(parts[1]))
            if key in table:
                raise ValueError(f"{path}:{lineno}: duplicate monomial {key}")
            table[key] = float(parts[2])
    return custom_scheme(table)


def scheme_by_name(name: str, degree: int) -> CoefficientScheme:
    if name == KOSTLAN:
        return kostlan_scheme(degree)
    if name in (KAC_SQUARE, "kac"):
        return kac_square_scheme(degree)
    raise ValueError(f"unknown ensemble {name!r}")


@dataclass(frozen=True)
class SampleStream:
    """Handle for a reproducible stream of trials."""

    master_seed: int
    counter: int = 0


def sample(scheme: CoefficientScheme, stream: SampleStream, trial: int) -> PolySample:
    """Draw trial's polynomial; bitwise-deterministic in (master_seed, trial)."""
    if trial < 0:
        raise ValueError("trial must be >= 0")
    a = gaussian_vector(stream.master_seed, trial, scheme.n_terms)
    hdeg = scheme.homogenization_degree
    coeffs = np.zeros((hdeg + 1, hdeg + 1))
    coeffs[scheme.j1, scheme.j2] = a * scheme.c
    return PolySample(degree=hdeg, coeffs=coeffs, seed_id=trial)


def gaussian_vector(master_seed: int, trial: int, n: int) -> np.ndarray:
    """n standard normals from a Philox stream keyed by (master_seed, trial)."""
    key = np.array([master_seed & _MASK64, trial & _MASK64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(n)
