import numpy as np
import pytest

from curvedepth.polynomial import PolySample, from_coeff_dict


def poly_mul2d(a, b):
    """Dense 2-D coefficient convolution (test-side polynomial product)."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0.0:
                out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
    return out


def circle_coeffs(radius_sq, center_x=0.0):
    """(x - cx)^2 + y^2 - r^2 as a dense coefficient grid."""
    c = np.zeros((3, 3))
    c[2, 0] = 1.0
    c[0, 2] = 1.0
    c[1, 0] = -2.0 * center_x
    c[0, 0] = center_x * center_x - radius_sq
    return c


def nested_circles(radii):
    """Product of concentric circles around the origin."""
    c = circle_coeffs(radii[0] ** 2)
    for r in radii[1:]:
        c = poly_mul2d(c, circle_coeffs(r * r))
    d = c.shape[0] - 1
    full = np.zeros((d + 1, d + 1))
    full[: c.shape[0], : c.shape[1]] = c
    return PolySample(degree=d, coeffs=full)


@pytest.fixture(scope="session")
def unit_circle():
    return from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})


@pytest.fixture(scope="session")
def offset_circle():
    # (x-5)^2 + y^2 - 1: oval that does not enclose the origin
    return from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (1, 0): -10.0, (0, 0): 24.0})


@pytest.fixture(scope="session")
def empty_curve():
    return from_coeff_dict(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): 1.0})


@pytest.fixture(scope="session")
def nested2():
    return nested_circles([1.0, 2.0])


@pytest.fixture(scope="session")
def nested3():
    return nested_circles([1.0, 2.0, 3.0])
