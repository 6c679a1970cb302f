"""Closed forms and brute-force reference routes used by the tests.

Nothing here reuses the package's sector-wise or spectral code paths: the
beam splitter is a dense matrix exponential on the full two-mode product
space and displacements are dense exponentials on a large space.
"""

import math

import numpy as np
from scipy.linalg import expm


def g(nbar):
    """Entropy of a thermal state with mean photon number ``nbar``."""
    if nbar == 0:
        return 0.0
    return (nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar)


def thermal_fisher(nbar):
    """KMB Fisher information of a thermal state, ``ln((nbar + 1) / nbar)``."""
    return math.log((nbar + 1) / nbar)


def ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def dense_beam_splitter(eta, dim):
    """``exp(theta (a^dagger b - a b^dagger))`` on two modes of dimension ``dim`` each.

    With ``theta = arccos(sqrt(eta))`` this maps ``|1,0>`` to
    ``sqrt(eta)|1,0> - sqrt(1-eta)|0,1>``.
    """
    a = ladder(dim)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    theta = math.acos(math.sqrt(eta))
    return expm(theta * (a1.conj().T @ a2 - a1 @ a2.conj().T))


def dense_qconv(rho, sigma, eta):
    """``tr_2 U (rho (x) sigma) U^dagger`` with per-mode dimension ``N_rho + N_sigma + 1``."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    dim = rho.shape[0] + sigma.shape[0] - 1
    big_r = np.zeros((dim, dim), complex)
    big_s = np.zeros((dim, dim), complex)
    big_r[: rho.shape[0], : rho.shape[0]] = rho
    big_s[: sigma.shape[0], : sigma.shape[0]] = sigma
    u = dense_beam_splitter(eta, dim)
    out = u @ np.kron(big_r, big_s) @ u.conj().T
    return np.einsum("ikjk->ij", out.reshape(dim, dim, dim, dim))


def dense_displacement(z, cutoff, work=160):
    """Block ``0..cutoff`` of ``exp(z a^dagger - conj(z) a)`` computed at dimension ``work``."""
    a = ladder(work)
    d = expm(z * a.conj().T - np.conj(z) * a)
    return d[: cutoff + 1, : cutoff + 1]


def entropy_of(matrix):
    w = np.linalg.eigvalsh(matrix)
    w = w[w > 1e-300]
    return float(-(w * np.log(w)).sum())


# Frozen reference values, each reproduced by a brute-force route in the tests.
FOCK1_SELF_CONV_ENTROPY = {2: math.log(2.0), 3: 1.0608569471580214}
GAMMA_THERMAL_1_2 = (4.0 / 10.75, 6.75 / 10.75)
