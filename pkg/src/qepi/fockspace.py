"""Truncated Fock-space linear algebra for a single bosonic mode.

States and operators are dense complex matrices in the photon-number basis
``|0>, ..., |N>``.  A truncated state is treated as an exact operator on the
infinite space that happens to vanish above ``N``; quantities whose exact
value needs photon numbers above ``N`` (displacements, convolutions) are
computed in a larger workspace and cropped, so that every matrix element that
is returned is an element of the exact infinite-dimensional operator.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg as sla
from scipy import stats

from .errors import (
    ConvergenceFailure,
    CutoffTooSmall,
    DimensionMismatch,
    InvalidParameter,
    ZeroState,
)

EIG_FLOOR = 1e-13
TAIL_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


class TruncationWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# canonical operators


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated annihilation operator with ``a[n-1, n] = sqrt(n)``."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def creation(cutoff: int) -> np.ndarray:
    return annihilation(cutoff).conj().T


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def embed(matrix: np.ndarray, cutoff: int) -> np.ndarray:
    """Zero-pad or crop a square matrix to photon numbers ``0..cutoff``."""
    d = cutoff + 1
    n = matrix.shape[0]
    if n == d:
        return matrix
    if n > d:
        return matrix[:d, :d]
    out = np.zeros((d, d), dtype=complex)
    out[:n, :n] = matrix
    return out


def hermitize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def trace_norm(matrix: np.ndarray) -> float:
    if np.allclose(matrix, matrix.conj().T, atol=1e-14, rtol=0):
        return float(np.abs(np.linalg.eigvalsh(hermitize(matrix))).sum())
    return float(np.linalg.svd(matrix, compute_uv=False).sum())


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, (DensityMatrix, FockOperator)):
        return op.matrix
    return np.asarray(op, dtype=complex)


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``; operands of different size are zero-padded."""
    a, b = _as_matrix(a), _as_matrix(b)
    n = max(a.shape[0], b.shape[0]) - 1
    return 0.5 * trace_norm(embed(a, n) - embed(b, n))


# ---------------------------------------------------------------------------
# spectral plumbing


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    floor: float = EIG_FLOOR

    @property
    def support_mask(self) -> np.ndarray:
        return self.eigenvalues > self.floor

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, func) -> np.ndarray:
        """Matrix function ``U f(L) U^dagger``."""
        v = self.eigenvectors
        return (v * func(self.eigenvalues)) @ v.conj().T


def spectral(matrix, floor: float = EIG_FLOOR) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = _as_matrix(matrix)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > 1e-10 * scale:
        raise InvalidParameter("spectral() needs a Hermitian matrix")
    try:
        w, v = np.linalg.eigh(hermitize(a))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SpectralDecomposition(w, v, floor)


@dataclass(frozen=True)
class LogOnSupport:
    matrix: np.ndarray
    support_projector: np.ndarray
    support_deficient: bool


def matrix_log_on_support(rho, floor: float = EIG_FLOOR) -> LogOnSupport:
    """Natural log on the eigenvalues above ``floor``; zero on the complement.

    ``support_deficient`` is set when any eigenvalue is at or below the floor,
    which includes exact zeros (pure states).
    """
    spec = rho.spectrum if isinstance(rho, DensityMatrix) else spectral(rho, floor)
    mask = spec.eigenvalues > floor
    if not mask.any():
        raise ZeroState("no eigenvalue above the support floor")
    logs = np.zeros_like(spec.eigenvalues)
    logs[mask] = np.log(spec.eigenvalues[mask])
    v = spec.eigenvectors
    return LogOnSupport(
        matrix=(v * logs) @ v.conj().T,
        support_projector=(v[:, mask]) @ v[:, mask].conj().T,
        support_deficient=bool((~mask).any()),
    )


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A (possibly sub-normalised) density matrix on photon numbers ``0..cutoff``.

    ``trace_deficit`` is the probability mass that does not fit below the
    cutoff.  The matrix is symmetrised on construction and stored read-only.
    """

    matrix: np.ndarray
    mode_count: int = 1
    label: str = ""
    trace_deficit: float = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        if self.mode_count != 1:
            raise InvalidParameter("only single-mode states are supported")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m - m.conj().T).max(initial=0.0) > 1e-8 * scale:
            raise InvalidParameter("density matrix is not Hermitian")
        m = hermitize(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        tr = float(np.trace(m).real)
        if tr > 1.0 + 1e-9:
            raise InvalidParameter(f"trace {tr} exceeds one")
        if self.spectrum.eigenvalues[0] < -PSD_TOL:
            raise InvalidParameter(
                f"density matrix has eigenvalue {self.spectrum.eigenvalues[0]:.3e}"
            )
        object.__setattr__(self, "trace_deficit", max(0.0, 1.0 - tr))

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        return spectral(self.matrix)

    @property
    def support_deficient(self) -> bool:
        return bool((self.spectrum.eigenvalues <= EIG_FLOOR).any())

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def embed(self, cutoff: int) -> "DensityMatrix":
        return DensityMatrix(embed(self.matrix, cutoff), label=self.label)

    def mean_photon(self) -> float:
        return float(np.real(np.diag(self.matrix) @ np.arange(self.dim)))

    def tail_mass(self, photons: int) -> float:
        """Diagonal mass on photon numbers >= ``photons``."""
        return float(np.diag(self.matrix).real[photons:].sum())

    def __repr__(self) -> str:
        name = self.label or "DensityMatrix"
        return f"<{name} cutoff={self.cutoff} trace_deficit={self.trace_deficit:.2e}>"


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    kind: str = "generic"
    unitarity_defect: float | None = None

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1


def _poisson_tail(mean: float, cutoff: int) -> float:
    return float(stats.poisson.sf(cutoff, mean)) if mean > 0 else 0.0


def _check_tail(tail: float, family: str, cutoff: int, tail_tol):
    if tail_tol is not None and tail > tail_tol:
        raise CutoffTooSmall(
            f"{family} at cutoff {cutoff} leaves tail mass {tail:.3e} > {tail_tol:.1e}"
        )


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    r = abs(alpha)
    with np.errstate(divide="ignore"):
        logmag = n * np.log(r) if r > 0 else np.where(n == 0, 0.0, -np.inf)
    logmag = logmag - 0.5 * r * r - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def _thermal_diag(nbar: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))


def thermal_entropy(nbar: float) -> float:
    """Entropy in nats of the thermal state with mean photon number ``nbar``."""
    if nbar == 0:
        return 0.0
    return (nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar)


def make_state(family: str, cutoff: int, *, tail_tol=TAIL_TOL, **params) -> DensityMatrix:
    """Build a test state.

    Families and their parameters::

        vacuum
        fock                  n
        thermal               nbar
        coherent              alpha
        cat                   alpha        (|alpha> + |-alpha>, normalised)
        phase_mixed_coherent  alpha        (coherent state averaged over phase)
        fock_mixture          weights      (weights[k] on |k><k|)
        random_full_support   seed, support=None

    Families with infinite support raise :class:`CutoffTooSmall` when the mass
    above ``cutoff`` exceeds ``tail_tol``; pass ``tail_tol=None`` to accept any
    truncation (the dropped mass shows up as ``trace_deficit``).
    """
    if cutoff < 0:
        raise InvalidParameter("cutoff must be non-negative")
    d = cutoff + 1
    label = family
    if family == "vacuum":
        m = np.zeros((d, d), complex)
        m[0, 0] = 1.0
    elif family == "fock":
        n = int(params["n"])
        if n < 0:
            raise InvalidParameter("photon number must be non-negative")
        if n > cutoff:
            raise CutoffTooSmall(f"fock({n}) does not fit below cutoff {cutoff}")
        m = np.zeros((d, d), complex)
        m[n, n] = 1.0
        label = f"fock({n})"
    elif family == "thermal":
        nbar = float(params["nbar"])
        if nbar < 0:
            raise InvalidParameter("thermal occupation must be non-negative")
        tail = (nbar / (nbar + 1)) ** (cutoff + 1) if nbar > 0 else 0.0
        _check_tail(tail, family, cutoff, tail_tol)
        m = np.diag(_thermal_diag(nbar, cutoff)).astype(complex)
        label = f"thermal({nbar:g})"
    elif family == "coherent":
        alpha = complex(params["alpha"])
        _check_tail(_poisson_tail(abs(alpha) ** 2, cutoff), family, cutoff, tail_tol)
        psi = _coherent_amplitudes(alpha, cutoff)
        m = np.outer(psi, psi.conj())
        label = f"coherent({alpha:g})"
    elif family == "cat":
        alpha = complex(params["alpha"])
        if alpha == 0:
            raise InvalidParameter("cat state needs alpha != 0")
        r2 = abs(alpha) ** 2
        norm = 2.0 * (1.0 + math.exp(-2.0 * r2))
        # only even photon numbers survive
        k = np.arange(cutoff + 1, cutoff + 400)
        k = k[k % 2 == 0]
        logp = k * math.log(r2) - r2 - np.array([math.lgamma(x + 1) for x in k])
        tail = float(np.exp(logp).sum()) * 4.0 / norm
        _check_tail(tail, family, cutoff, tail_tol)
        psi = _coherent_amplitudes(alpha, cutoff) + _coherent_amplitudes(-alpha, cutoff)
        psi = psi / math.sqrt(norm)
        m = np.outer(psi, psi.conj())
        label = f"cat({alpha:g})"
    elif family == "phase_mixed_coherent":
        alpha = complex(params["alpha"])
        r2 = abs(alpha) ** 2
        _check_tail(_poisson_tail(r2, cutoff), family, cutoff, tail_tol)
        m = np.diag(np.abs(_coherent_amplitudes(abs(alpha), cutoff)) ** 2).astype(complex)
        label = f"phase_mixed_coherent({abs(alpha):g})"
    elif family == "fock_mixture":
        w = np.asarray(params["weights"], dtype=float)
        if w.ndim != 1 or (w < 0).any() or w.sum() <= 0:
            raise InvalidParameter("fock_mixture weights must be non-negative, not all zero")
        if len(w) > d and w[d:].sum() > 0:
            raise CutoffTooSmall("fock_mixture weights extend above the cutoff")
        w = w[:d] / w.sum()
        m = np.zeros((d, d), complex)
        m[np.arange(len(w)), np.arange(len(w))] = w
        label = "fock_mixture(" + ",".join(f"{x:g}" for x in w) + ")"
    elif family == "random_full_support":
        m = _random_full_support(int(params.get("seed", 0)), cutoff, params.get("support"))
        label = f"random_full_support({params.get('seed', 0)})"
    else:
        raise InvalidParameter(f"unknown state family {family!r}")
    return DensityMatrix(m, label=label)


def _random_full_support(seed: int, cutoff: int, support=None) -> np.ndarray:
    d = cutoff + 1
    k = d if support is None else int(support) + 1
    if not 1 <= k <= d:
        raise InvalidParameter("support must lie in 0..cutoff")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    ginibre = np.zeros((d, d), complex)
    ginibre[:k, :k] = g @ g.conj().T
    ginibre /= np.trace(ginibre).real
    th = _thermal_diag(0.2, cutoff)
    th /= th.sum()
    return (1.0 - 1e-3) * ginibre + 1e-3 * np.diag(th)


def mixture(states, weights, label: str = "") -> DensityMatrix:
    """Convex combination of states (zero-padded to the largest cutoff)."""
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights) or (weights < 0).any():
        raise InvalidParameter("mixture needs one non-negative weight per state")
    weights = weights / weights.sum()
    n = max(s.cutoff for s in states)
    m = sum(w * embed(s.matrix, n) for s, w in zip(states, weights))
    return DensityMatrix(m, label=label or "mixture")


# ---------------------------------------------------------------------------
# displacement


def _working_dim(cutoff: int, z: complex) -> int:
    m = max(cutoff + 21, math.ceil((math.sqrt(cutoff) + abs(z) + 6.0) ** 2) + 10)
    return 32 * math.ceil(m / 32)


@functools.lru_cache(maxsize=32)
def _quadrature_eigs(dim: int):
    # a + a^dagger on the truncated space, tridiagonal with sqrt(n) off-diagonal
    mu, v = sla.eigh_tridiagonal(np.zeros(dim), np.sqrt(np.arange(1.0, dim)))
    return mu, v


def displacement_block(
    z: complex, rows: int, cols: int | None = None, method: str = "spectral"
) -> np.ndarray:
    """Matrix elements ``<m|D_z|n>`` for ``m <= rows`` and ``n <= cols``.

    The generator ``z a^dagger - conj(z) a`` is truncated in a workspace large
    enough that the returned block agrees with the infinite-dimensional
    operator to machine precision, then exponentiated.  ``method="spectral"``
    diagonalises the (phase-rotated) real tridiagonal generator once per
    workspace size; ``method="expm"`` uses scaling and squaring directly.
    """
    cols = rows if cols is None else cols
    z = complex(z)
    dim = _working_dim(max(rows, cols), z)
    if method == "expm":
        a = annihilation(dim - 1)
        full = sla.expm(z * a.conj().T - np.conj(z) * a)
        return full[: rows + 1, : cols + 1]
    if method != "spectral":
        raise InvalidParameter(f"unknown displacement method {method!r}")
    mu, v = _quadrature_eigs(dim)
    r = abs(z)
    block = (v[: rows + 1] * np.exp(-1j * r * mu)) @ v[: cols + 1].T
    # D_z = P S exp(-i r (a + a^dagger)) S^dagger P^dagger with S = diag(i^n), P = diag(e^{i phi n})
    m = np.arange(rows + 1)[:, None]
    n = np.arange(cols + 1)[None, :]
    return block * (1j * np.exp(1j * np.angle(z))) ** (m - n)


def displacement_blocks(zs, rows: int, cols: int | None = None, chunk: int = 256) -> np.ndarray:
    """Stack of spectral ``displacement_block(z, rows, cols)`` for every ``z`` in ``zs``.

    One workspace, sized for the largest ``|z|``, serves all points; the
    points are processed in chunks of ``chunk`` to bound memory.
    """
    zs = np.asarray(zs, dtype=complex).ravel()
    cols = rows if cols is None else cols
    out = np.empty((len(zs), rows + 1, cols + 1), dtype=complex)
    if len(zs) == 0:
        return out
    dim = _working_dim(max(rows, cols), complex(np.abs(zs).max()))
    mu, v = _quadrature_eigs(dim)
    # outer[k] = v[:rows+1, k] v[:cols+1, k]^T, so each block is one row of a matrix product
    outer = (v[: rows + 1, None, :] * v[None, : cols + 1, :]).reshape(-1, dim).T
    m, n = np.arange(rows + 1), np.arange(cols + 1)
    for start in range(0, len(zs), chunk):
        z = zs[start : start + chunk]
        block = (np.exp(-1j * np.abs(z)[:, None] * mu[None, :]) @ outer).reshape(-1, rows + 1, cols + 1)
        # (i e^{i phi})^(m - n) split into row and column phases
        u = 1j * np.exp(1j * np.angle(z))[:, None]
        out[start : start + chunk] = block * (u ** m)[:, :, None] * (u.conj() ** n)[:, None, :]
    return out


def displacement(z: complex, cutoff: int, method: str = "spectral") -> FockOperator:
    """Displacement operator block on photon numbers ``0..cutoff``.

    ``unitarity_defect`` is ``||D^dagger D - I||_F`` restricted to the columns
    whose displaced image stays well inside the cutoff (all columns if none
    do).
    """
    z = complex(z)
    if abs(z) ** 2 > cutoff / 4:
        warnings.warn(
            f"|z|^2 = {abs(z) ** 2:.3g} is large for cutoff {cutoff}; the block is not unitary",
            TruncationWarning,
            stacklevel=2,
        )
    d = displacement_block(z, cutoff, cutoff, method)
    # fall back to every column when none stays well inside the cutoff
    keep = cutoff - math.ceil((abs(z) + 3.0) ** 2)
    keep = cutoff if keep < 0 else keep
    g = d[:, : keep + 1].conj().T @ d[:, : keep + 1]
    defect = float(np.linalg.norm(g - np.eye(keep + 1)))
    return FockOperator(d, kind="displacement", unitarity_defect=defect)


def displace(rho: DensityMatrix, z: complex, cutoff: int | None = None) -> DensityMatrix:
    """``D_z rho D_z^dagger`` cropped to ``cutoff`` (default: the input cutoff)."""
    cutoff = rho.cutoff if cutoff is None else cutoff
    d = displacement_block(z, cutoff, rho.cutoff)
    return DensityMatrix(d @ rho.matrix @ d.conj().T, label=f"D({complex(z):g}){rho.label}")


# ---------------------------------------------------------------------------
# two-mode graded workspace


def graded_basis(total_cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Photon numbers ``(n1, n2)`` of the graded basis, sectors ascending in ``n1 + n2``."""
    n1 = np.concatenate([np.arange(s + 1) for s in range(total_cutoff + 1)])
    n2 = np.concatenate([s - np.arange(s + 1) for s in range(total_cutoff + 1)])
    return n1, n2


def sector_slice(s: int) -> slice:
    start = s * (s + 1) // 2
    return slice(start, start + s + 1)


@dataclass(frozen=True, eq=False)
class GradedTwoModeState:
    """Two-mode operator on the span of ``|n1, n2>`` with ``n1 + n2 <= total_cutoff``.

    Stored dense over the graded basis (see :func:`graded_basis`).
    """

    matrix: np.ndarray
    total_cutoff: int
    is_state: bool = True

    def block(self, s: int, t: int | None = None) -> np.ndarray:
        t = s if t is None else t
        return self.matrix[sector_slice(s), sector_slice(t)]

    @property
    def blocks(self) -> list[np.ndarray]:
        return [self.block(s) for s in range(self.total_cutoff + 1)]

    def trace(self) -> complex:
        return np.trace(self.matrix)


def tensor(rho, sigma, total_cutoff: int | None = None) -> GradedTwoModeState:
    """``rho (x) sigma`` on the graded workspace (default: no truncation loss)."""
    is_state = isinstance(rho, DensityMatrix) and isinstance(sigma, DensityMatrix)
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch("tensor() needs square matrices")
    na, nb = a.shape[0] - 1, b.shape[0] - 1
    total = na + nb if total_cutoff is None else total_cutoff
    n1, n2 = graded_basis(total)
    ok = (n1 <= na) & (n2 <= nb)
    i1, i2 = np.minimum(n1, na), np.minimum(n2, nb)
    m = a[np.ix_(i1, i1)] * b[np.ix_(i2, i2)]
    m = m * np.outer(ok, ok)
    return GradedTwoModeState(m, total, is_state)


def partial_trace(t: GradedTwoModeState, which: int, cutoff: int | None = None):
    """Trace out mode ``which`` (1 or 2).

    Returns a :class:`DensityMatrix` when ``t`` came from states, otherwise a
    plain matrix.  ``cutoff`` crops the result (default: the total cutoff).
    """
    if which not in (1, 2):
        raise InvalidParameter("which must be 1 or 2")
    n1, n2 = graded_basis(t.total_cutoff)
    keep, traced = (n1, n2) if which == 2 else (n2, n1)
    d = t.total_cutoff + 1
    out = np.zeros((d, d), complex)
    for k in range(d):
        idx = np.flatnonzero(traced == k)
        kept = keep[idx]
        out[np.ix_(kept, kept)] += t.matrix[np.ix_(idx, idx)]
    if cutoff is not None:
        out = embed(out, cutoff)
    return DensityMatrix(out) if t.is_state else out
