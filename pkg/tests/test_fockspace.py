import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qepi.errors import CutoffTooSmall, DimensionMismatch, InvalidParameter
from qepi.fockspace import (
    DensityMatrix,
    TruncationWarning,
    annihilation,
    creation,
    displace,
    displacement,
    displacement_block,
    displacement_blocks,
    embed,
    graded_basis,
    make_state,
    matrix_log_on_support,
    mixture,
    number,
    partial_trace,
    tensor,
    thermal_entropy,
    trace_distance,
)
from qepi.information import entropy

from oracles import dense_displacement, g

complex_z = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_ladder_operators():
    a, ad, n = annihilation(5), creation(5), number(5)
    np.testing.assert_allclose(ad @ a, n, atol=1e-14)
    comm = a @ ad - ad @ a
    # identity except the truncation corner
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0)
    assert comm[-1, -1] == pytest.approx(-5.0)


def test_embed_pads_and_crops():
    m = np.arange(9.0).reshape(3, 3)
    big = embed(m, 4)
    assert big.shape == (5, 5) and big[2, 2] == 8 and big[3:].sum() == 0
    np.testing.assert_array_equal(embed(big, 2), m)


@pytest.mark.parametrize(
    "family, params",
    [
        ("vacuum", {}),
        ("fock", {"n": 3}),
        ("thermal", {"nbar": 0.5}),
        ("coherent", {"alpha": 1.2 - 0.3j}),
        ("cat", {"alpha": 1.5}),
        ("phase_mixed_coherent", {"alpha": 1.5}),
        ("fock_mixture", {"weights": [0.2, 0.5, 0.3]}),
        ("random_full_support", {"seed": 7}),
    ],
)
def test_make_state_is_a_state(family, params):
    rho = make_state(family, 30, **params)
    assert rho.trace() == pytest.approx(1.0, abs=1e-9)
    assert rho.spectrum.eigenvalues[0] > -1e-12
    np.testing.assert_allclose(rho.matrix, rho.matrix.conj().T)
    assert rho.trace_deficit < 1e-9


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_thermal_entropy_closed_form(nbar):
    rho = make_state("thermal", 60, nbar=nbar)
    assert entropy(rho) == pytest.approx(g(nbar), abs=1e-8)
    assert thermal_entropy(nbar) == pytest.approx(g(nbar), rel=1e-14)


def test_mean_photon_numbers():
    assert make_state("thermal", 40, nbar=1.0).mean_photon() == pytest.approx(1.0, abs=1e-8)
    assert make_state("coherent", 40, alpha=1.5).mean_photon() == pytest.approx(2.25, abs=1e-10)
    t = math.tanh(2.25)
    assert make_state("cat", 40, alpha=1.5).mean_photon() == pytest.approx(2.25 * t, abs=1e-10)


def test_cat_has_only_even_photons():
    rho = make_state("cat", 20, alpha=1.1)
    assert np.abs(rho.matrix[1::2, :]).max() < 1e-15


def test_tail_check():
    with pytest.raises(CutoffTooSmall):
        make_state("cat", 4, alpha=2.0)
    with pytest.raises(CutoffTooSmall):
        make_state("fock", 2, n=3)
    rho = make_state("thermal", 5, nbar=1.0, tail_tol=None)
    assert rho.trace_deficit == pytest.approx(0.5 ** 6)


def test_invalid_states():
    with pytest.raises(InvalidParameter):
        DensityMatrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidParameter):
        DensityMatrix(np.diag([1.5, 0.0]))
    with pytest.raises(InvalidParameter):
        DensityMatrix(np.diag([1.1, -0.1]))
    with pytest.raises(DimensionMismatch):
        DensityMatrix(np.ones((2, 3)))
    with pytest.raises(InvalidParameter):
        make_state("squeezed", 5)


def test_density_matrix_is_read_only():
    rho = make_state("thermal", 12, nbar=0.1)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0.0


def test_mixture_weights():
    rho = mixture([make_state("fock", 3, n=0), make_state("fock", 5, n=2)], [1, 3])
    assert rho.cutoff == 5
    np.testing.assert_allclose(np.diag(rho.matrix).real[:3], [0.25, 0, 0.75])


def test_log_on_support_matches_eigendecomposition():
    rho = make_state("random_full_support", 8, seed=1)
    log = matrix_log_on_support(rho).matrix
    w, v = np.linalg.eigh(rho.matrix)
    np.testing.assert_allclose(log, (v * np.log(w)) @ v.conj().T, atol=1e-10)


@pytest.mark.parametrize("z", [0.3, 1.0 - 0.5j, 2.5j])
@pytest.mark.parametrize("method", ["spectral", "expm"])
def test_displacement_against_dense_exponential(z, method):
    got = displacement_block(z, 12, method=method)
    np.testing.assert_allclose(got, dense_displacement(z, 12), atol=1e-11)


def test_displacement_rectangular_block():
    full = displacement_block(0.7 + 0.2j, 10)
    np.testing.assert_allclose(displacement_block(0.7 + 0.2j, 4, 10), full[:5, :], atol=1e-13)


@pytest.mark.parametrize("rows, cols", [(4, 4), (3, 15), (15, 2)])
def test_batched_displacement_blocks(rows, cols):
    zs = np.array([0.0, 0.4 - 1.1j, -2.0j, 3.5 + 0.2j, -0.7])
    batch = displacement_blocks(zs, rows, cols, chunk=2)
    assert batch.shape == (5, rows + 1, cols + 1)
    for z, block in zip(zs, batch):
        np.testing.assert_allclose(block, displacement_block(z, rows, cols), atol=1e-12)
    assert displacement_blocks([], 3).shape == (0, 4, 4)


def test_displacement_warns_and_reports_defect():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        op = displacement(3.0, 8)
    assert any(issubclass(w.category, TruncationWarning) for w in caught)
    assert op.unitarity_defect > 1e-3
    assert displacement(0.2, 30).unitarity_defect < 1e-12


@settings(max_examples=25, deadline=None)
@given(z=complex_z, w=complex_z)
def test_displacement_composition(z, w):
    # D_z D_w = exp((z conj(w) - conj(z) w) / 2) D_{z + w}
    n = 6
    left = displacement_block(z, n, 60) @ displacement_block(w, 60, n)
    phase = np.exp((z * np.conj(w) - np.conj(z) * w) / 2)
    np.testing.assert_allclose(left, phase * displacement_block(z + w, n), atol=1e-9)


def test_displaced_vacuum_is_coherent():
    vac = make_state("vacuum", 10)
    moved = displace(vac, 1.3 - 0.4j, 40)
    assert trace_distance(moved, make_state("coherent", 40, alpha=1.3 - 0.4j)) < 1e-12


def test_graded_basis_order():
    n1, n2 = graded_basis(2)
    assert list(zip(n1, n2)) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_tensor_partial_trace_roundtrip():
    rho = make_state("random_full_support", 4, seed=2)
    sigma = make_state("fock_mixture", 5, weights=[0.5, 0.2, 0, 0.1, 0, 0.2])
    t = tensor(rho, sigma)
    assert trace_distance(partial_trace(t, 2), rho) < 1e-13
    assert trace_distance(partial_trace(t, 1), sigma) < 1e-13
