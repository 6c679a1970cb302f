import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qepi.classical import finite, gaussian, point_mass
from qepi.convolution import (
    CHAR_GRID,
    beam_splitter_unitary,
    char_function,
    char_qcconv_residual,
    char_qconv_residual,
    char_symmetric_residual,
    commutator_residual_classical,
    commutator_residual_quantum,
    mixed_conv_identity_check,
    qcconv,
    qconv,
    symmetric_qconv,
)
from qepi.errors import DimensionMismatch, InvalidParameter, QuadratureBudgetExceeded
from qepi.fockspace import DensityMatrix, displace, graded_basis, make_state, trace_distance

from oracles import FOCK1_SELF_CONV_ENTROPY, dense_qconv, entropy_of

etas = st.floats(min_value=0.0, max_value=1.0)
seeds = st.integers(min_value=0, max_value=10_000)


def rand_state(seed, cutoff):
    return make_state("random_full_support", cutoff, seed=seed)


def test_beam_splitter_is_unitary():
    u = beam_splitter_unitary(0.3, 6)
    assert u.unitarity_defect() < 1e-13


def test_beam_splitter_single_photon():
    eta = 0.3
    u = beam_splitter_unitary(eta, 1).dense()
    n1, n2 = graded_basis(1)
    index = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(n1, n2))}
    col = u[:, index[(1, 0)]]
    assert col[index[(1, 0)]] == pytest.approx(math.sqrt(eta))
    assert col[index[(0, 1)]] == pytest.approx(-math.sqrt(1 - eta))


@settings(max_examples=15, deadline=None)
@given(eta=etas, s1=seeds, s2=seeds)
def test_qconv_matches_dense_route(eta, s1, s2):
    rho, sigma = rand_state(s1, 4), rand_state(s2, 3)
    got = qconv(rho, sigma, eta, out_cutoff=7)
    np.testing.assert_allclose(got.matrix, dense_qconv(rho.matrix, sigma.matrix, eta), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(eta=etas, s1=seeds, s2=seeds)
def test_qconv_preserves_trace_and_positivity(eta, s1, s2):
    out = qconv(rand_state(s1, 5), rand_state(s2, 5), eta, out_cutoff=10)
    assert out.trace() == pytest.approx(1.0, abs=1e-12)
    assert out.spectrum.eigenvalues[0] > -1e-12


def test_qconv_endpoints():
    rho, sigma = rand_state(1, 6), rand_state(2, 6)
    assert trace_distance(qconv(rho, sigma, 1.0), rho) < 1e-12
    assert trace_distance(qconv(rho, sigma, 0.0), sigma) < 1e-12


def test_qconv_of_operators_is_linear():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4)) * 1j
    rho = make_state("thermal", 3, nbar=0.3, tail_tol=None)
    lhs = qconv(2 * a + 3 * b, rho, 0.4)
    assert isinstance(lhs, np.ndarray)
    np.testing.assert_allclose(lhs, 2 * qconv(a, rho, 0.4) + 3 * qconv(b, rho, 0.4), atol=1e-13)


def test_qconv_rejects_bad_input():
    rho = make_state("vacuum", 2)
    with pytest.raises(InvalidParameter):
        qconv(rho, rho, 1.5)
    with pytest.raises(DimensionMismatch):
        qconv(np.ones((2, 3)), rho, 0.5)


def test_thermal_fixed_point():
    th = make_state("thermal", 40, nbar=1.0, tail_tol=None)
    assert trace_distance(qconv(th, th, 0.5), th) <= 1e-8


def test_thermal_convex_combination():
    # thermal states combine their photon numbers linearly
    a = make_state("thermal", 40, nbar=0.5)
    b = make_state("thermal", 40, nbar=1.0, tail_tol=None)
    out = qconv(a, b, 0.25, out_cutoff=80)
    assert out.mean_photon() == pytest.approx(0.25 * 0.5 + 0.75 * 1.0, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_fock_self_convolution_entropy(n):
    f = make_state("fock", 3, n=1)
    out = symmetric_qconv([f] * n, out_cutoff=n)
    assert entropy_of(out.matrix) == pytest.approx(FOCK1_SELF_CONV_ENTROPY[n], abs=1e-12)


@pytest.mark.parametrize(
    "pair",
    [
        ("thermal", {"nbar": 0.2}, "fock", {"n": 2}),
        ("coherent", {"alpha": 0.8 + 0.3j}, "cat", {"alpha": 1.0}),
        ("random_full_support", {"seed": 3}, "phase_mixed_coherent", {"alpha": 1.0}),
        ("fock_mixture", {"weights": [0.3, 0.3, 0.4]}, "coherent", {"alpha": -0.5j}),
        ("cat", {"alpha": 1.2}, "random_full_support", {"seed": 9}),
    ],
)
def test_characteristic_factorizations(pair):
    f1, p1, f2, p2 = pair
    rho, sigma = make_state(f1, 14, **p1), make_state(f2, 14, **p2)
    assert char_qconv_residual(rho, sigma, 0.35) <= 1e-8
    assert char_qcconv_residual(rho, finite([0.5, -0.5j], [0.3, 0.7]), 0.8, out_cutoff=40) <= 1e-8
    assert char_qcconv_residual(rho, gaussian(1.0), 0.2, out_cutoff=50, nodes=30) <= 1e-8
    assert char_symmetric_residual([rho, sigma, rho]) <= 1e-8


def test_char_function_of_vacuum():
    vac = make_state("vacuum", 0)
    vals = char_function(vac, CHAR_GRID).values
    np.testing.assert_allclose(vals, np.exp(-np.abs(CHAR_GRID) ** 2 / 2), atol=1e-14)


def test_qcconv_point_mass_is_displacement():
    rho = rand_state(4, 8)
    out = qcconv(rho, point_mass(0.4 - 0.2j), 2.0, out_cutoff=30)
    assert trace_distance(out, displace(rho, math.sqrt(2.0) * (0.4 - 0.2j), 30)) < 1e-13


def test_qcconv_thermal_adds_noise():
    th = make_state("thermal", 30, nbar=1.0, tail_tol=None)
    out = qcconv(th, gaussian(1.0), 1.0, out_cutoff=60)
    ref = make_state("thermal", 60, nbar=2.0, tail_tol=None)
    assert trace_distance(out, ref) < 1e-8


def test_qcconv_budget():
    with pytest.raises(QuadratureBudgetExceeded):
        qcconv(make_state("vacuum", 2), gaussian(1.0), 0.5, nodes=200)


@pytest.mark.parametrize("seed", range(5))
def test_commutator_lemma(seed):
    rho, sigma = rand_state(seed, 20), rand_state(seed + 100, 20)
    assert commutator_residual_quantum(rho, sigma, 0.37) <= 1e-9
    assert commutator_residual_classical(rho, gaussian(1.0), 0.3) <= 1e-6


@pytest.mark.parametrize(
    "x, y, t1, t2",
    [
        (gaussian(1.0), gaussian(0.5), 0.3, 0.2),
        (point_mass(0.3), point_mass(-0.2j), 1.0, 0.5),
        (gaussian(1.0), gaussian(1.0), 0.0, 0.0),
    ],
)
def test_mixed_convolution_identity(x, y, t1, t2):
    rho = make_state("fock_mixture", 4, weights=[0.2, 0.3, 0.5])
    sigma = make_state("coherent", 12, alpha=0.6)
    assert mixed_conv_identity_check(rho, sigma, x, y, 0.4, t1, t2, out_cutoff=10) < 1e-9


def test_symmetric_qconv_of_one_state_is_identity():
    rho = rand_state(5, 6)
    out = symmetric_qconv([rho])
    assert isinstance(out, DensityMatrix)
    assert trace_distance(out, rho) < 1e-15
