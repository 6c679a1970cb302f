import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qepi.errors import ExpmDimensionLimit, InvalidParameter, SupportDeficient, SupportTooHigh
from qepi.fockspace import DensityMatrix, displace, make_state, trace_distance
from qepi.information import (
    KMB,
    InnerProductSpec,
    debruijn_check,
    entropy,
    fisher,
    heat_semigroup,
    heat_superop,
    lindbladian,
    linear_inner,
    phi_kmb,
    pi_superop,
    psi_kmb,
    score,
)

from oracles import g, thermal_fisher

LINEAR_SPECS = [
    InnerProductSpec("linear", 1, 0.0),
    InnerProductSpec("linear", 2, 0.0),
    InnerProductSpec("linear", 1, 0.5),
    InnerProductSpec("linear", 2, 1.0),
]
positive = st.floats(min_value=1e-6, max_value=10.0)


def thermal(nbar, cutoff=40):
    return make_state("thermal", cutoff, nbar=nbar, tail_tol=None)


@settings(max_examples=50, deadline=None)
@given(x=positive, y=positive)
def test_kmb_multipliers_are_reciprocal(x, y):
    assert phi_kmb(x, y) * psi_kmb(x, y) == pytest.approx(1.0, rel=1e-12)
    # logarithmic mean lies between geometric and arithmetic means
    assert math.sqrt(x * y) * (1 - 1e-12) <= psi_kmb(x, y) <= (x + y) / 2 * (1 + 1e-12)


def test_phi_kmb_near_diagonal_is_smooth():
    x = 0.3
    for eps in (1e-4, 1e-6, 1e-9):
        exact = (math.log(x + eps) - math.log(x)) / eps
        assert phi_kmb(x + eps, x) == pytest.approx(exact, rel=1e-7)
    assert phi_kmb(x, x) == pytest.approx(1 / x)


def test_inner_product_spec_validation():
    with pytest.raises(InvalidParameter):
        InnerProductSpec("linear", 3, 0.0)
    with pytest.raises(InvalidParameter):
        InnerProductSpec("linear", 1, 1.5)
    with pytest.raises(InvalidParameter):
        InnerProductSpec("wigner")


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_entropy_of_thermal(nbar):
    assert entropy(make_state("thermal", 60, nbar=nbar)) == pytest.approx(g(nbar), abs=1e-8)


def test_entropy_of_pure_states_is_zero():
    assert entropy(make_state("cat", 30, alpha=1.5)) == pytest.approx(0.0, abs=1e-12)


def test_lindbladian_generates_thermal_family():
    # -L(rho_N) is the N-derivative of the thermal family
    nbar, h = 0.5, 1e-5
    deriv = (thermal(nbar + h).matrix - thermal(nbar - h).matrix) / (2 * h)
    np.testing.assert_allclose(-lindbladian(thermal(nbar, 40).embed(80)), embed_diag(deriv, 80),
                               atol=1e-7)


def embed_diag(m, cutoff):
    out = np.zeros((cutoff + 1, cutoff + 1), complex)
    out[: m.shape[0], : m.shape[0]] = m
    return out


def test_lindbladian_rejects_high_support():
    with pytest.raises(SupportTooHigh):
        lindbladian(thermal(1.0, 10))


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_heat_semigroup_on_thermal(t):
    out = heat_semigroup(thermal(0.5, 40), t)
    assert trace_distance(out, thermal(0.5 + t, 40)) < 1e-7


def test_heat_semigroup_is_a_semigroup():
    rho = make_state("random_full_support", 10, seed=5).matrix
    two = heat_superop(heat_superop(rho, 0.2), 0.3)
    np.testing.assert_allclose(two, heat_superop(rho, 0.5), atol=1e-13)


@pytest.mark.parametrize("t", [0.1, 0.2, 0.5])
@pytest.mark.parametrize(
    "family, params",
    [("thermal", {"nbar": 1.0}), ("coherent", {"alpha": 1.5}), ("cat", {"alpha": 1.5}),
     ("random_full_support", {"seed": 2, "support": 6})],
)
def test_heat_semigroup_methods_agree(t, family, params):
    rho = make_state(family, 30, tail_tol=None, **params)
    a = heat_semigroup(rho, t, method="superoperator")
    b = heat_semigroup(rho, t, method="gauss_hermite")
    assert trace_distance(a, b) <= 1e-6


def test_heat_semigroup_dimension_limit():
    with pytest.raises(ExpmDimensionLimit):
        heat_semigroup(thermal(1.0, 50), 0.1)
    with pytest.raises(InvalidParameter):
        heat_semigroup(thermal(1.0, 10), 0.1, method="euler")


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_fisher_of_thermal(nbar):
    fi = fisher(thermal(nbar, 60))
    assert fi.value == pytest.approx(thermal_fisher(nbar), abs=1e-7)
    assert fi.path_gap <= 1e-8


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("spec", [KMB, *LINEAR_SPECS], ids=str)
def test_fisher_two_paths_agree(seed, spec):
    rho = make_state("random_full_support", 12, seed=seed)
    fi = fisher(rho, spec)
    assert not fi.divergent
    assert fi.path_gap <= 1e-8


def test_kmb_fisher_not_below_every_linear_metric():
    rho = make_state("random_full_support", 10, seed=11)
    kmb = fisher(rho).value
    lin = [fisher(rho, s).value for s in LINEAR_SPECS]
    assert min(lin) <= kmb + 1e-9


def test_fisher_of_pure_state_diverges():
    fi = fisher(make_state("coherent", 20, alpha=0.5))
    assert fi.divergent and math.isinf(fi.value)
    with pytest.raises(SupportDeficient):
        debruijn_check(make_state("fock", 10, n=2))


def test_kmb_score_is_commutator_with_log():
    rho = make_state("random_full_support", 8, seed=4)
    s = score(rho).matrix
    w, v = np.linalg.eigh(rho.matrix)
    log = (v * np.log(w)) @ v.conj().T
    a = np.diag(np.sqrt(np.arange(1, 9)), 1)
    np.testing.assert_allclose(s, a @ log - log @ a, atol=1e-8)


@pytest.mark.parametrize("spec", LINEAR_SPECS, ids=str)
def test_pi_psi_inverts_pi_phi(spec):
    rho = make_state("random_full_support", 7, seed=3)
    x = np.random.default_rng(0).standard_normal((8, 8)) + 0j
    y = pi_superop(rho, "psi", pi_superop(rho, "phi", x, spec), spec)
    np.testing.assert_allclose(y, x, atol=1e-9)


def test_linear_inner_product_definition():
    rho = make_state("random_full_support", 5, seed=6)
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((2, 6, 6)) + 1j * rng.standard_normal((2, 6, 6))
    spec = InnerProductSpec("linear", 1, 0.4)
    r = rho.matrix
    expected = (np.trace(a.conj().T @ r @ b) + 0.4 * np.trace(r @ a.conj().T @ b)) / 1.4
    assert linear_inner(rho, spec, a, b) == pytest.approx(expected)


@pytest.mark.parametrize(
    "rho",
    [
        thermal(0.5),
        thermal(1.0),
        thermal(2.0),
        DensityMatrix(displace(thermal(0.5, 60), 0.7 - 0.3j, 40).matrix),
        *(make_state("random_full_support", 40, seed=s) for s in range(3)),
    ],
    ids=["thermal0.5", "thermal1", "thermal2", "displaced", "rand0", "rand1", "rand2"],
)
def test_de_bruijn_identity(rho):
    res = debruijn_check(rho)
    assert res.residual <= 1e-3


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_de_bruijn_thermal_closed_form(nbar):
    res = debruijn_check(thermal(nbar))
    assert res.fisher == pytest.approx(thermal_fisher(nbar), abs=1e-6)
    assert res.derivative == pytest.approx(thermal_fisher(nbar), abs=1e-6)
