import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qepi.classical import (
    cconv,
    classical_char,
    finite,
    gaussian,
    point_mass,
    quadrature,
    scaled,
    symmetric_cconv,
)
from qepi.errors import EmptySubset, InvalidParameter, UnsupportedMix

grid = np.array([0.3, 1.0j, -0.7 + 0.4j, 1.5 - 1.1j])
lams = st.floats(min_value=0.0, max_value=1.0)


def test_gaussian_characteristic_function():
    x = gaussian(0.7, mean=0.2 - 0.1j)
    z = 0.4 + 0.3j
    expected = np.exp(-0.7 * abs(z) ** 2 + z * np.conj(x.mean) - np.conj(z) * x.mean)
    assert classical_char(x, z) == pytest.approx(expected)


def test_finite_characteristic_function():
    x = finite([0.5, -0.5])
    # E exp(2i Im(z conj(x)))
    assert classical_char(x, 1.0j) == pytest.approx(math.cos(1.0))


def test_invalid_variables():
    with pytest.raises(InvalidParameter):
        gaussian(-1.0)
    with pytest.raises(InvalidParameter):
        finite([0, 1], [0.5, 0.6])
    with pytest.raises(InvalidParameter):
        finite([0, 1], [1.0])


@settings(max_examples=30, deadline=None)
@given(lam=lams, h1=st.floats(0, 3), h2=st.floats(0, 3))
def test_gaussian_cconv_characteristic(lam, h1, h2):
    x, y = gaussian(h1, 0.3), gaussian(h2, -0.2j)
    out = classical_char(cconv(x, y, lam), grid)
    expected = classical_char(x, math.sqrt(lam) * grid) * classical_char(y, math.sqrt(1 - lam) * grid)
    np.testing.assert_allclose(out, expected, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(lam=lams)
def test_finite_cconv_characteristic(lam):
    x, y = finite([0.5, -0.5, 1j], [0.2, 0.5, 0.3]), finite([0.1, 2.0])
    out = classical_char(cconv(x, y, lam), grid)
    expected = classical_char(x, math.sqrt(lam) * grid) * classical_char(y, math.sqrt(1 - lam) * grid)
    np.testing.assert_allclose(out, expected, atol=1e-13)


def test_gaussian_with_point_mass():
    out = cconv(gaussian(2.0), point_mass(1.0), 0.5)
    assert out.kind == "gaussian"
    assert out.h == pytest.approx(1.0)
    assert out.mean == pytest.approx(math.sqrt(0.5))


def test_gaussian_with_general_finite_is_unsupported():
    with pytest.raises(UnsupportedMix):
        cconv(gaussian(1.0), finite([0.5, -0.5]), 0.5)


def test_symmetric_cconv_keeps_gaussian_scale():
    out = symmetric_cconv([gaussian(1.0)] * 5)
    assert out.h == pytest.approx(1.0)
    with pytest.raises(EmptySubset):
        symmetric_cconv([])


def test_scaled():
    assert scaled(gaussian(1.0, 1.0), 2.0).h == pytest.approx(4.0)
    np.testing.assert_allclose(scaled(finite([1.0, 2.0]), -1).points, [-1.0, -2.0])


@pytest.mark.parametrize("tilt, rtol", [(0.0, 1e-12), (0.5, 1e-7), (1.0, 1e-7)])
def test_quadrature_moments(tilt, rtol):
    x = gaussian(0.8, mean=0.3 + 0.1j)
    pts, w = quadrature(x, nodes=20, tilt=tilt)
    assert w.sum() == pytest.approx(1.0)
    assert np.sum(w * pts) == pytest.approx(x.mean, abs=1e-12)
    # E|X - mean|^2 = h; a tilted rule is exact only for tilted integrands
    assert np.sum(w * np.abs(pts - x.mean) ** 2) == pytest.approx(0.8, rel=rtol)


def test_tilted_quadrature_is_exact_for_tilted_integrands():
    x, s = gaussian(1.0), 0.7
    pts, w = quadrature(x, nodes=12, tilt=s)
    r2 = np.abs(pts) ** 2
    # E[exp(-s|X|^2) |X|^4] for a standard complex Gaussian is 2 / (1 + s)^3
    ratio = np.sum(w * np.exp(-s * r2) * r2 ** 2) / np.sum(w * np.exp(-s * r2))
    assert ratio == pytest.approx(2.0 / (1.0 + s) ** 2, rel=1e-12)
