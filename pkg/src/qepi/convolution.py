"""Quantum, quantum-classical and symmetric convolutions of single-mode operators.

The beam splitter preserves total photon number, so it is stored as one
unitary block per sector ``n1 + n2 = s``.  Convolving operators with support
up to ``N_A`` and ``N_B`` only involves sectors ``s <= N_A + N_B``, so the
result below the output cutoff is exact rather than a truncation artefact.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from . import classical
from .classical import ClassicalRV
from .errors import DimensionMismatch, EmptySubset, InvalidParameter, QuadratureBudgetExceeded
from .fockspace import DensityMatrix, displacement_block, embed, trace_distance, trace_norm

MAX_QUADRATURE_TERMS = 10_000
QUADRATURE_TILT_MAX = 1.0

# |z| in {0.25, 0.5, 1, 1.5, 2}, five phases each
CHAR_GRID = np.array(
    [r * np.exp(2j * np.pi * k / 5 + 0.1j) for r in (0.25, 0.5, 1.0, 1.5, 2.0) for k in range(5)]
)


def _check_eta(eta: float):
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameter(f"eta must lie in [0, 1], got {eta}")


def _matrix(op) -> np.ndarray:
    m = op.matrix if isinstance(op, DensityMatrix) else np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def _wrap(result: np.ndarray, *inputs):
    if all(isinstance(x, DensityMatrix) for x in inputs):
        return DensityMatrix(result)
    return result


# ---------------------------------------------------------------------------
# beam splitter


@dataclass(frozen=True, eq=False)
class GradedUnitary:
    """Block-diagonal two-mode unitary; ``blocks[s]`` acts on ``|n1, s - n1>``, ``n1`` ascending."""

    blocks: tuple
    total_cutoff: int

    def dense(self) -> np.ndarray:
        return sla.block_diag(*self.blocks)

    def unitarity_defect(self) -> float:
        return max(np.abs(b.conj().T @ b - np.eye(len(b))).max() for b in self.blocks)


def _sector_generator(s: int, theta: float) -> np.ndarray:
    k = np.arange(s)
    off = theta * np.sqrt((k + 1.0) * (s - k))
    g = np.zeros((s + 1, s + 1))
    g[k + 1, k] = off
    g[k, k + 1] = -off
    return g


@functools.lru_cache(maxsize=64)
def _sector_blocks(eta: float, total_cutoff: int) -> tuple:
    theta = math.acos(math.sqrt(eta))
    blocks = []
    for s in range(total_cutoff + 1):
        b = sla.expm(_sector_generator(s, theta))
        b.setflags(write=False)
        blocks.append(b)
    return tuple(blocks)


def beam_splitter_unitary(eta: float, total_cutoff: int) -> GradedUnitary:
    """Beam splitter ``exp(arccos(sqrt(eta)) (a1^dagger a2 - a1 a2^dagger))``.

    It maps ``a1 -> sqrt(eta) a1 - sqrt(1 - eta) a2`` under ``U a U^dagger``;
    in particular ``U|1,0> = sqrt(eta)|1,0> - sqrt(1 - eta)|0,1>``.
    """
    _check_eta(eta)
    if total_cutoff < 0:
        raise InvalidParameter("total cutoff must be non-negative")
    return GradedUnitary(_sector_blocks(float(eta), int(total_cutoff)), int(total_cutoff))


# ---------------------------------------------------------------------------
# quantum convolution


def qconv(rho, sigma, eta: float, out_cutoff: int | None = None):
    """``tr_2(U_eta (rho (x) sigma) U_eta^dagger)``, extended linearly to operators.

    Parameters
    ----------
    rho, sigma : DensityMatrix or array_like
        Operators on photon numbers ``0..N_rho`` and ``0..N_sigma``.
    eta : float
        Transmissivity in ``[0, 1]``.
    out_cutoff : int, optional
        Cutoff of the result, default ``N_rho``.  Passing ``N_rho + N_sigma``
        returns the full output with nothing discarded.

    Returns
    -------
    DensityMatrix when both inputs are states, otherwise a complex array.
    """
    _check_eta(eta)
    a, b = _matrix(rho), _matrix(sigma)
    na, nb = a.shape[0] - 1, b.shape[0] - 1
    out = na if out_cutoff is None else int(out_cutoff)
    total = na + nb
    blocks = _sector_blocks(float(eta), total)

    # rows of each sector that survive the output crop, and columns that the
    # input tensor product can populate
    used = []
    for s in range(total + 1):
        lo, hi = max(0, s - nb), min(s, na)
        cols = np.arange(lo, hi + 1)
        rows = np.arange(0, min(s, out) + 1)
        used.append((rows, cols, blocks[s][np.ix_(rows, cols)]))

    res = np.zeros((out + 1, out + 1), complex)
    for s in range(total + 1):
        rows_s, cols_s, u_s = used[s]
        if len(cols_s) == 0 or len(rows_s) == 0:
            continue
        left = u_s
        for t in range(total + 1):
            d = s - t
            rows_t, cols_t, u_t = used[t]
            if len(cols_t) == 0 or len(rows_t) == 0:
                continue
            # keep output rows n with n - d a valid row of sector t
            n = rows_s[(rows_s - d >= 0) & (rows_s - d <= rows_t[-1])]
            if len(n) == 0:
                continue
            inner = a[np.ix_(cols_s, cols_t)] * b[np.ix_(s - cols_s, t - cols_t)]
            y = left[n] @ inner @ u_t[n - d].conj().T
            res[n, n - d] += np.diagonal(y)
    return _wrap(res, rho, sigma)


def symmetric_qconv(states, out_cutoff: int | None = None, work_cutoff: int | None = None):
    """Symmetric convolution ``rho_1 [+] ... [+] rho_k`` by a left fold.

    Step ``j`` convolves the running result with ``rho_j`` at ``eta = 1 - 1/j``.
    Intermediate results are kept up to ``work_cutoff`` (default: the output
    cutoff, or the exact support when that is at most 60).
    """
    states = list(states)
    if not states:
        raise EmptySubset("symmetric convolution of an empty collection")
    cut = [_matrix(s).shape[0] - 1 for s in states]
    out = max(cut) if out_cutoff is None else int(out_cutoff)
    if work_cutoff is None:
        work_cutoff = sum(cut) if sum(cut) <= 60 else out
    work = max(work_cutoff, out)
    acc = states[0]
    for j, st in enumerate(states[1:], start=2):
        acc = qconv(acc, st, 1.0 - 1.0 / j, out_cutoff=work)
    m = embed(_matrix(acc), out)
    return _wrap(m, *states)


# ---------------------------------------------------------------------------
# quantum-classical convolution


def qcconv(
    rho,
    x: ClassicalRV,
    t: float,
    out_cutoff: int | None = None,
    nodes: int = 20,
    max_terms: int = MAX_QUADRATURE_TERMS,
):
    """Random displacement ``E[D_{sqrt(t) X} rho D_{sqrt(t) X}^dagger]``.

    Finite distributions are summed exactly; Gaussians use the tensor
    Gauss-Hermite rule of :func:`qepi.classical.quadrature`.  Each displaced
    term is the exact block of the infinite-dimensional operator, so the only
    approximation is the quadrature (and the crop to ``out_cutoff``).
    """
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    a = _matrix(rho)
    n_in = a.shape[0] - 1
    out = n_in if out_cutoff is None else int(out_cutoff)
    if x.kind == "gaussian" and x.h > 0 and nodes * nodes > max_terms:
        raise QuadratureBudgetExceeded(f"{nodes}^2 quadrature terms exceed {max_terms}")
    if t == 0:
        return _wrap(embed(a, out), rho)
    # a displaced matrix element is exp(-|w|^2) times a polynomial in w, so
    # part of that Gaussian is folded into the quadrature weight
    pts, w = classical.quadrature(x, nodes, tilt=min(t * x.h, QUADRATURE_TILT_MAX))
    if len(pts) > max_terms:
        raise QuadratureBudgetExceeded(f"{len(pts)} support points exceed {max_terms}")
    res = np.zeros((out + 1, out + 1), complex)
    root = math.sqrt(t)
    for p, wk in zip(pts, w):
        d = displacement_block(root * p, out, n_in)
        res += wk * (d @ a @ d.conj().T)
    return _wrap(res, rho)


# ---------------------------------------------------------------------------
# characteristic functions


@dataclass(frozen=True, eq=False)
class CharGrid:
    points: np.ndarray
    values: np.ndarray
    label: str = ""


def char_function(op, grid=CHAR_GRID, label: str = "") -> CharGrid:
    """``chi_T(z) = tr(T D_z)`` at each grid point."""
    m = _matrix(op)
    n = m.shape[0] - 1
    pts = np.atleast_1d(np.asarray(grid, dtype=complex))
    vals = np.array([np.sum(m * displacement_block(z, n).T) for z in pts])
    if not label and isinstance(op, DensityMatrix):
        label = op.label
    return CharGrid(pts, vals, label)


def char_qconv_residual(rho, sigma, eta: float, grid=CHAR_GRID, out_cutoff=None) -> float:
    """Max over the grid of ``|chi_out(z) - chi_rho(sqrt(eta) z) chi_sigma(sqrt(1-eta) z)|``."""
    grid = np.asarray(grid, dtype=complex)
    if out_cutoff is None:
        out_cutoff = _matrix(rho).shape[0] + _matrix(sigma).shape[0] - 2
    lhs = char_function(qconv(rho, sigma, eta, out_cutoff=out_cutoff), grid).values
    rhs = (
        char_function(rho, math.sqrt(eta) * grid).values
        * char_function(sigma, math.sqrt(1.0 - eta) * grid).values
    )
    return float(np.abs(lhs - rhs).max())


def char_qcconv_residual(rho, x: ClassicalRV, t: float, grid=CHAR_GRID, **kwargs) -> float:
    grid = np.asarray(grid, dtype=complex)
    lhs = char_function(qcconv(rho, x, t, **kwargs), grid).values
    rhs = char_function(rho, grid).values * classical.classical_char(x, math.sqrt(t) * grid)
    return float(np.abs(lhs - rhs).max())


def char_symmetric_residual(states, grid=CHAR_GRID, **kwargs) -> float:
    grid = np.asarray(grid, dtype=complex)
    kwargs.setdefault("out_cutoff", sum(_matrix(s).shape[0] - 1 for s in states))
    lhs = char_function(symmetric_qconv(states, **kwargs), grid).values
    k = len(states)
    rhs = np.prod([char_function(s, grid / math.sqrt(k)).values for s in states], axis=0)
    return float(np.abs(lhs - rhs).max())


# ---------------------------------------------------------------------------
# compatibility of the two convolutions


def mixed_conv_identity_check(
    rho, sigma, x: ClassicalRV, y: ClassicalRV, eta: float, t1: float, t2: float,
    out_cutoff: int | None = None, nodes: int = 20, margin: int = 25,
) -> float:
    """Trace distance between the two sides of the mixed-convolution identity.

    Compares ``(rho *_{t1} X) [+]_eta (sigma *_{t2} Y)`` with
    ``(rho [+]_eta sigma) *_s (X [+]_lam Y)``, ``s = t1 eta + t2 (1 - eta)``,
    ``lam = t1 eta / s``.  When ``s = 0`` both sides reduce to
    ``rho [+]_eta sigma`` and that is what is compared.  Randomly displaced
    intermediates are kept ``margin`` photons above their input cutoff.
    """
    _check_eta(eta)
    na, nb = _matrix(rho).shape[0] - 1, _matrix(sigma).shape[0] - 1
    n = na if out_cutoff is None else out_cutoff
    s = t1 * eta + t2 * (1.0 - eta)
    left = qconv(
        qcconv(rho, x, t1, out_cutoff=na + margin, nodes=nodes),
        qcconv(sigma, y, t2, out_cutoff=nb + margin, nodes=nodes),
        eta,
        out_cutoff=n,
    )
    if s == 0:
        return trace_distance(left, qconv(rho, sigma, eta, out_cutoff=n))
    lam = t1 * eta / s
    mid = qconv(rho, sigma, eta, out_cutoff=na + nb)
    right = qcconv(mid, classical.cconv(x, y, lam), s, out_cutoff=n, nodes=nodes)
    return trace_distance(left, right)


# ---------------------------------------------------------------------------
# commutation with the annihilation operator


def _ladder_commutator(m: np.ndarray) -> np.ndarray:
    """``[a, M]`` computed one photon above the support of ``M``, so it is exact."""
    n = m.shape[0]
    big = embed(m, n)
    a = np.diag(np.sqrt(np.arange(1, n + 1, dtype=float)), 1)
    return a @ big - big @ a


def commutator_residual_quantum(rho, sigma, eta: float) -> float:
    """Trace norm of ``sqrt(eta) [a, rho [+]_eta sigma] - [a, rho] [+]_eta sigma``.

    Both sides are evaluated without truncation loss: the convolution keeps
    its full support and every commutator is taken one photon higher.
    """
    _check_eta(eta)
    a, b = _matrix(rho), _matrix(sigma)
    full = a.shape[0] + b.shape[0] - 1  # cutoff of [a, rho] (+) sigma
    left = math.sqrt(eta) * _ladder_commutator(qconv(a, b, eta, out_cutoff=full - 1))
    right = qconv(_ladder_commutator(a), b, eta, out_cutoff=full)
    return trace_norm(left - right)


def commutator_residual_classical(
    rho, x: ClassicalRV, t: float, out_cutoff: int | None = None, nodes: int = 20
) -> float:
    """Trace norm of ``[a, rho *_t X] - [a, rho] *_t X`` on photon numbers ``<= out_cutoff``.

    ``out_cutoff`` defaults to the input cutoff plus 40; the displaced
    operators are exact blocks, so the residual measures the quadrature and
    operator algebra rather than truncation.
    """
    a = _matrix(rho)
    out = a.shape[0] + 39 if out_cutoff is None else out_cutoff
    left = _ladder_commutator(_matrix(qcconv(a, x, t, out_cutoff=out + 1, nodes=nodes)))
    right = qcconv(_ladder_commutator(a), x, t, out_cutoff=out, nodes=nodes)
    return trace_norm(embed(left, out) - right)
