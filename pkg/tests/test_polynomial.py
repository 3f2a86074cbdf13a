import math

import numpy as np
import pytest

from curvedepth.ensembles import SampleStream, kostlan_scheme, sample
from curvedepth.polynomial import (
    MonomialRotation,
    PolySample,
    eval_sphere,
    eval_with_radial,
    from_coeff_dict,
    homogenize_and_eval_sphere,
    rotate_sample,
)


def test_eval_with_radial_circle_at_origin():
    p = from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    assert eval_with_radial(p, 0.0, 0.0) == (-1.0, 0.0, 0.0, 0.0)


def test_eval_with_radial_circle_at_2_0():
    p = from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    assert eval_with_radial(p, 2.0, 0.0) == (3.0, 4.0, 0.0, 8.0)


def test_eval_with_radial_monomial_euler():
    # 3 x^2 y at (1, 2): gradient (12, 3); Euler gives t = 3 * f = 18
    p = from_coeff_dict(3, {(2, 1): 3.0})
    f, fx, fy, t = eval_with_radial(p, 1.0, 2.0)
    assert (f, fx, fy) == (6.0, 12.0, 3.0)
    assert t == 1.0 * fx + 2.0 * fy == 18.0
    assert t == 3 * f


def test_homogenize_example():
    p = from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    # F = X^2 + Y^2 - Z^2
    assert homogenize_and_eval_sphere(p, (0.0, 0.0, 1.0)) == -1.0
    assert homogenize_and_eval_sphere(p, (1.0, 0.0, 0.0)) == 1.0


def test_homogenize_rejects_off_sphere():
    p = from_coeff_dict(1, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        homogenize_and_eval_sphere(p, (0.5, 0.5, 0.5))


def _random_unit(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def test_antipodal_parity_even_and_odd():
    rng = np.random.default_rng(42)
    for d in (2, 5):
        poly = sample(kostlan_scheme(d), SampleStream(9), 0)
        P = _random_unit(rng, 100)
        f1 = eval_sphere(poly, P[:, 0], P[:, 1], P[:, 2])
        f2 = eval_sphere(poly, -P[:, 0], -P[:, 1], -P[:, 2])
        sign = 1.0 if d % 2 == 0 else -1.0
        assert np.all(np.abs(f2 - sign * f1) <= 1e-12 * np.abs(f1))


def test_antipodal_parity_exact_on_negated_floats():
    poly = sample(kostlan_scheme(5), SampleStream(3), 7)
    rng = np.random.default_rng(1)
    P = _random_unit(rng, 50)
    f1 = eval_sphere(poly, P[:, 0], P[:, 1], P[:, 2])
    f2 = eval_sphere(poly, np.negative(P[:, 0]), np.negative(P[:, 1]), np.negative(P[:, 2]))
    assert np.array_equal(f2, -f1)  # bitwise, by IEEE sign symmetry


def _sphere_gradient(poly, P):
    d = poly.degree
    X, Y, Z = P[:, 0], P[:, 1], P[:, 2]
    g = np.zeros_like(P)
    c = poly.coeffs
    for j1 in range(d + 1):
        for j2 in range(d + 1 - j1):
            if c[j1, j2] == 0.0:
                continue
            j3 = d - j1 - j2
            if j1 > 0:
                g[:, 0] += c[j1, j2] * j1 * X ** (j1 - 1) * Y ** j2 * Z ** j3
            if j2 > 0:
                g[:, 1] += c[j1, j2] * j2 * X ** j1 * Y ** (j2 - 1) * Z ** j3
            if j3 > 0:
                g[:, 2] += c[j1, j2] * j3 * X ** j1 * Y ** j2 * Z ** (j3 - 1)
    return g


def test_euler_identity_on_sphere():
    rng = np.random.default_rng(5)
    poly = sample(kostlan_scheme(6), SampleStream(17), 2)
    P = _random_unit(rng, 40)
    F = eval_sphere(poly, P[:, 0], P[:, 1], P[:, 2])
    G = _sphere_gradient(poly, P)
    euler = np.sum(P * G, axis=1)
    assert np.all(np.abs(euler - poly.degree * F) <= 1e-10 * (1 + np.abs(poly.degree * F)))
    # finite differences agree with the analytic gradient
    h = 1e-6
    for k in range(3):
        Ph = P.copy()
        Ph[:, k] += h
        Pl = P.copy()
        Pl[:, k] -= h
        fd = (eval_sphere(poly, Ph[:, 0], Ph[:, 1], Ph[:, 2])
              - eval_sphere(poly, Pl[:, 0], Pl[:, 1], Pl[:, 2])) / (2 * h)
        assert np.all(np.abs(fd - G[:, k]) <= 1e-5 * (1 + np.abs(G[:, k])))


def test_degree_assertion():
    with pytest.raises(ValueError):
        PolySample(degree=3, coeffs=np.zeros((4, 4)))
    c = np.zeros((4, 4))
    c[1, 0] = 1.0
    with pytest.raises(ValueError):
        PolySample(degree=3, coeffs=c)  # support max total degree is 1, not 3


def test_coeffs_immutable():
    p = from_coeff_dict(1, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        p.coeffs[0, 0] = 2.0


def test_rotation_reexpansion():
    poly = sample(kostlan_scheme(4), SampleStream(9), 5)
    th = 0.83
    R = np.array([
        [math.cos(th), -math.sin(th), 0.0],
        [math.sin(th), math.cos(th), 0.0],
        [0.0, 0.0, 1.0],
    ])
    rot = rotate_sample(poly, R)
    rng = np.random.default_rng(11)
    P = _random_unit(rng, 60)
    PR = P @ R.T
    lhs = eval_sphere(rot, P[:, 0], P[:, 1], P[:, 2])
    rhs = eval_sphere(poly, PR[:, 0], PR[:, 1], PR[:, 2])
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * (1 + np.abs(rhs)))


def test_rotation_requires_orthogonal():
    with pytest.raises(ValueError):
        MonomialRotation(3, np.eye(3) * 2.0)
