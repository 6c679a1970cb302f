"""Entropy, the heat semigroup, score operators and quantum Fisher informations.

Everything lives in the truncated Fock space of the state.  The heat
semigroup generator used here is the symmetric truncation

    L(X) = (1/2){C, X} - a X a^dagger - a^dagger X a,   C = a^dagger a + a a^dagger,

which agrees with ``[a^dagger, [a, X]]`` on operators supported away from the
cutoff, is self-adjoint for the Hilbert-Schmidt inner product, and generates
a trace-preserving completely positive semigroup on the truncated space.  In
this model the de Bruijn identity ``d/dt S(Phi_t rho)|_0 = I_KMB(rho)`` holds
exactly with truncated ladder operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import special

from . import classical
from .convolution import qcconv
from .errors import (
    ExpmDimensionLimit,
    InvalidParameter,
    SupportDeficient,
    SupportTooHigh,
)
from .fockspace import (
    EIG_FLOOR,
    DensityMatrix,
    annihilation,
    commutator,
    creation,
    embed,
    matrix_log_on_support,
)

MAX_SUPEROP_CUTOFF = 40
DIVERGENCE_TOL = 1e-9


# ---------------------------------------------------------------------------
# entropy


def entropy(rho: DensityMatrix, floor: float = EIG_FLOOR) -> float:
    """Von Neumann entropy in nats, summing over eigenvalues above ``floor``."""
    lam = rho.spectrum.eigenvalues
    lam = lam[lam > floor]
    return float(special.entr(lam).sum())


# ---------------------------------------------------------------------------
# Lindbladian and heat semigroup


def lindbladian(rho, tol: float = 1e-12) -> np.ndarray:
    """``[a^dagger, [a, rho]]`` for an operator supported below ``N - 1``.

    Raises :class:`SupportTooHigh` when rows or columns ``N - 1`` or ``N``
    carry entries above ``tol``, where truncated ladder operators would
    give the wrong answer.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    n = m.shape[0] - 1
    if n < 2:
        raise SupportTooHigh("cutoff too small for the Lindbladian")
    edge = max(np.abs(m[n - 1 :, :]).max(), np.abs(m[:, n - 1 :]).max())
    if edge > tol:
        raise SupportTooHigh(f"operator has weight {edge:.2e} at photon numbers >= {n - 1}")
    a = annihilation(n)
    return commutator(a.conj().T, commutator(a, m))


def _offset_block(n: int, d: int):
    """Tridiagonal block of the symmetric generator on ``|m + d><m|``."""
    m = np.arange(max(0, -d), min(n, n - d) + 1)
    row = m + d
    c = 2.0 * np.arange(n + 1) + 1.0
    c[n] = n
    diag = 0.5 * (c[row] + c[m])
    off = -np.sqrt((row[:-1] + 1.0) * (m[:-1] + 1.0))
    return m, row, diag, off


def heat_superop(rho_matrix: np.ndarray, t: float) -> np.ndarray:
    """``exp(-t L)`` applied to a matrix, with ``L`` the symmetric truncated generator.

    The generator only couples ``|n><m|`` to ``|n +- 1><m +- 1|``, so it splits
    into real symmetric tridiagonal blocks labelled by ``n - m``; each block
    is exponentiated through its eigendecomposition.
    """
    n = rho_matrix.shape[0] - 1
    out = np.zeros_like(rho_matrix, dtype=complex)
    for d in range(-n, n + 1):
        m, row, diag, off = _offset_block(n, d)
        vec = rho_matrix[row, m]
        if len(m) == 1:
            out[row, m] = np.exp(-t * diag) * vec
            continue
        w, v = sla.eigh_tridiagonal(diag, off)
        out[row, m] = v @ (np.exp(-t * w) * (v.T @ vec))
    return out


def heat_semigroup(
    rho: DensityMatrix,
    t: float,
    method: str = "superoperator",
    pad: int = 30,
    nodes: int = 20,
    max_cutoff: int = MAX_SUPEROP_CUTOFF,
) -> DensityMatrix:
    """Heat semigroup ``Phi_t(rho)``, cropped to the input cutoff.

    Parameters
    ----------
    method : {"superoperator", "gauss_hermite"}
        ``"superoperator"`` exponentiates the truncated generator on a space
        ``pad`` photons larger than the state; ``pad=0`` gives the semigroup
        of the truncated model itself.  ``"gauss_hermite"`` averages exact
        displacements of ``rho`` against a standard complex Gaussian.
    """
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    n = rho.cutoff
    if t == 0:
        return rho
    if method == "superoperator":
        if n > max_cutoff:
            raise ExpmDimensionLimit(f"cutoff {n} exceeds the superoperator limit {max_cutoff}")
        big = embed(rho.matrix, n + pad)
        return DensityMatrix(embed(heat_superop(big, t), n), label=rho.label)
    if method == "gauss_hermite":
        return qcconv(rho, classical.gaussian(1.0), t, nodes=nodes)
    raise InvalidParameter(f"unknown heat semigroup method {method!r}")


# ---------------------------------------------------------------------------
# multiplier functions and inner products


def phi_kmb(x, y):
    """``(log x - log y) / (x - y)`` with the diagonal limit ``1/x``; inputs > 0."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    u = (x - y) / y
    with np.errstate(divide="ignore", invalid="ignore"):
        far = np.log1p(u) / (y * u)
    near = (1.0 - 0.5 * u + u * u / 3.0) / y
    return np.where(np.abs(u) < 1e-5, near, far)


def psi_kmb(x, y):
    """Logarithmic mean ``(x - y) / (log x - log y)``; zero if either argument is zero."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    pos = (x > 0) & (y > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 1.0 / phi_kmb(np.where(pos, x, 1.0), np.where(pos, y, 1.0))
    return np.where(pos, val, 0.0)


@dataclass(frozen=True)
class InnerProductSpec:
    """Which operator-monotone weight defines the inner product.

    ``kind="kmb"`` is the Kubo-Mori-Bogoliubov metric.  ``kind="linear"``
    with ``k`` in {1, 2} and ``t`` in [0, 1] uses
    ``psi_{1,t}(x, y) = (x + t y)/(1 + t)`` or ``psi_{2,t}(x, y) = (t x + y)/(1 + t)``.
    """

    kind: str = "kmb"
    k: int = 1
    t: float = 0.0

    def __post_init__(self):
        if self.kind not in ("kmb", "linear"):
            raise InvalidParameter(f"unknown inner product {self.kind!r}")
        if self.kind == "linear":
            if self.k not in (1, 2):
                raise InvalidParameter("k must be 1 or 2")
            if not 0.0 <= self.t <= 1.0:
                raise InvalidParameter("t must lie in [0, 1]")

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def psi(self, x, y):
        if self.kind == "kmb":
            return psi_kmb(x, y)
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        if self.k == 2:
            x, y = y, x
        return (x + self.t * y) / (1.0 + self.t)

    def phi(self, x, y):
        if self.kind == "kmb":
            return phi_kmb(x, y)
        with np.errstate(divide="ignore"):
            return 1.0 / self.psi(x, y)

    def __str__(self) -> str:
        return "kmb" if self.kind == "kmb" else f"linear(k={self.k},t={self.t:g})"


KMB = InnerProductSpec("kmb")


def _eig(rho: DensityMatrix, floor: float):
    spec = rho.spectrum
    lam = np.where(spec.eigenvalues > floor, spec.eigenvalues, 0.0)
    return lam, spec.eigenvalues <= floor, spec.eigenvectors


def _phi_multipliers(spec: InnerProductSpec, lam, floored, floor):
    """Finite ``phi`` multipliers and the mask of pairs where ``phi`` is infinite."""
    clamped = np.maximum(lam, floor)
    x, y = clamped[:, None], clamped[None, :]
    mult = spec.phi(x, y)
    exact_psi = spec.psi(lam[:, None], lam[None, :])
    if spec.kind == "kmb":
        infinite = floored[:, None] | floored[None, :]
    else:
        infinite = exact_psi <= 0.0
    return mult, infinite


def pi_superop(
    rho: DensityMatrix,
    f: str,
    a,
    spec: InnerProductSpec = KMB,
    floor: float = EIG_FLOOR,
    div_tol: float = DIVERGENCE_TOL,
) -> np.ndarray:
    """Apply ``f(M_left, M_right)`` of ``rho`` to ``a``, with ``f`` one of ``"psi"``, ``"phi"``.

    In the eigenbasis of ``rho`` this multiplies entry ``(i, j)`` by
    ``f(lambda_i, lambda_j)``.  Eigenvalues at or below ``floor`` count as
    zero.  For ``phi`` the multiplier is infinite on some pairs; if those
    pairs carry weight (measured with eigenvalues clamped to ``floor``)
    above ``div_tol``, :class:`SupportDeficient` is raised, otherwise they
    are dropped.
    """
    lam, floored, v = _eig(rho, floor)
    ap = v.conj().T @ np.asarray(a, dtype=complex) @ v
    if f == "psi":
        mult = spec.psi(lam[:, None], lam[None, :])
    elif f == "phi":
        mult, infinite = _phi_multipliers(spec, lam, floored, floor)
        excess = float((np.abs(ap[infinite]) ** 2 * mult[infinite]).sum())
        if excess > div_tol:
            raise SupportDeficient(f"phi multiplier diverges on weight {excess:.2e}")
        mult = np.where(infinite, 0.0, mult)
    else:
        raise InvalidParameter("f must be 'psi' or 'phi'")
    return v @ (mult * ap) @ v.conj().T


def linear_inner(rho: DensityMatrix, spec: InnerProductSpec, a, b) -> complex:
    """``<A, B>_{rho,k,t}``, e.g. ``(tr(A^dagger rho B) + t tr(rho A^dagger B)) / (1 + t)`` for k=1."""
    if not spec.is_linear:
        raise InvalidParameter("linear_inner needs a linear inner product")
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    ad = np.asarray(a, complex).conj().T
    b = np.asarray(b, complex)
    left = np.trace(ad @ r @ b)
    right = np.trace(r @ ad @ b)
    if spec.k == 2:
        left, right = right, left
    return complex((left + spec.t * right) / (1.0 + spec.t))


# ---------------------------------------------------------------------------
# scores and Fisher information


@dataclass(frozen=True, eq=False)
class ScoreOperator:
    matrix: np.ndarray
    spec: InnerProductSpec
    state: DensityMatrix
    mode: int = 1


def score(rho: DensityMatrix, spec: InnerProductSpec = KMB, floor: float = EIG_FLOOR) -> ScoreOperator:
    """Score operator ``pi^phi([a, rho])``; for KMB this is ``[a, log rho]`` on the support."""
    a = annihilation(rho.cutoff)
    s = pi_superop(rho, "phi", commutator(a, rho.matrix), spec, floor)
    return ScoreOperator(s, spec, rho)


@dataclass(frozen=True)
class FisherValue:
    """A Fisher information with its two independent evaluations.

    ``value`` is the multiplier-sum evaluation.  For KMB, ``direct`` is
    ``tr(rho [a^dagger, [a, log rho]])``; for linear metrics it is
    ``<S, S>`` computed from the definition of the inner product.
    """

    value: float
    spec: InnerProductSpec
    divergent: bool = False
    direct: float = math.nan

    @property
    def path_gap(self) -> float:
        return abs(self.value - self.direct) / max(abs(self.value), 1e-300)


def fisher(rho: DensityMatrix, spec: InnerProductSpec = KMB, floor: float = EIG_FLOOR) -> FisherValue:
    """Fisher information of ``rho`` for displacements along the mode.

    Returns a divergent :class:`FisherValue` (value ``inf``) when the score
    is not defined because ``[a, rho]`` leaves the support of ``rho``.
    """
    a = annihilation(rho.cutoff)
    comm = commutator(a, rho.matrix)
    try:
        s = pi_superop(rho, "phi", comm, spec, floor)
    except SupportDeficient:
        return FisherValue(math.inf, spec, True, math.inf)
    value = float(np.real(np.vdot(comm, s)))
    if spec.kind == "kmb":
        log_rho = matrix_log_on_support(rho, floor).matrix
        inner = commutator(creation(rho.cutoff), commutator(a, log_rho))
        direct = float(np.real(np.trace(rho.matrix @ inner)))
    else:
        direct = float(np.real(linear_inner(rho, spec, s, s)))
    return FisherValue(value, spec, False, direct)


# ---------------------------------------------------------------------------
# de Bruijn identity


@dataclass(frozen=True)
class DeBruijnResult:
    derivative: float
    fisher: float
    residual: float
    step: float


def debruijn_check(
    rho: DensityMatrix, dt: float = 1e-3, min_dt: float = 1e-8, rtol: float = 1e-6
) -> DeBruijnResult:
    """Compare the entropy growth rate under the heat flow with ``I_KMB``.

    The derivative at ``t = 0`` is one-sided, ``D(h) = (S(Phi_h rho) - S(rho)) / h``,
    Richardson-extrapolated as ``R(h) = 2 D(h/2) - D(h)``.  Starting from
    ``dt`` the step shrinks tenfold until two successive extrapolations agree
    to ``rtol`` (states with small eigenvalues make the flow stiff) or the
    step reaches ``min_dt``.  The flow is the truncated-model semigroup, in
    which the identity is exact.  ``residual`` is relative to ``I_KMB``.
    """
    fi = fisher(rho)
    if fi.divergent:
        raise SupportDeficient("de Bruijn check needs a state with finite Fisher information")
    s0 = entropy(rho, floor=0.0)

    def rate(h):
        moved = DensityMatrix(heat_superop(rho.matrix, h))
        return (entropy(moved, floor=0.0) - s0) / h

    def extrapolated(h):
        return 2.0 * rate(h / 2) - rate(h)

    h = dt
    deriv = extrapolated(h)
    while h / 10 >= min_dt:
        nxt = extrapolated(h / 10)
        h /= 10
        done = abs(nxt - deriv) <= rtol * abs(nxt)
        deriv = nxt
        if done:
            break
    return DeBruijnResult(deriv, fi.value, abs(deriv - fi.value) / abs(fi.value), h)
