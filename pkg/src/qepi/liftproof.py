"""Numerical checks of the symmetric lifting map and the subset decomposition.

The lifting of a single-mode operator ``T`` to two registers is

    T_v = (1/pi) * integral chi_T(z) W_v(-z) d^2 z,

where ``W_v(z)`` displaces every register in ``v`` by ``z / sqrt(|v|)``.
Only the matrix elements that enter inner products weighted by
``rho_1 (x) rho_2`` are needed: rows (or columns) inside the support of the
product state and columns (or rows) up to the largest photon number the
lifted operator can reach from there.  Everything is stored in the product
basis ``|n1, n2>`` of the two registers.

Scope: two quantum registers, one mode, no classical registers in the lift.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .convolution import _matrix, beam_splitter_unitary, qconv, symmetric_qconv
from .errors import (
    EmptySubset,
    InvalidParameter,
    QuadratureBudgetExceeded,
    SlowDecay,
)
from .fockspace import DensityMatrix, displacement_blocks, embed, graded_basis
from .information import InnerProductSpec, linear_inner, score

DECAY_TOL = 1e-12
SLOW_DECAY_TOL = 1e-6
MAX_NODES = 200


# ---------------------------------------------------------------------------
# phase-space quadrature


def _char_values(t: np.ndarray, points: np.ndarray) -> np.ndarray:
    # tr(T D_z) for every point
    return np.einsum("ij,zji->z", t, displacement_blocks(points, t.shape[0] - 1))


def decay_radius(t: np.ndarray, tol: float = DECAY_TOL, r_max: float = 20.0) -> float:
    """Smallest radius beyond which ``|chi_T|`` stays below ``tol * max(1, |chi_T|)``.

    Raises :class:`SlowDecay` if ``|chi_T|`` still exceeds ``1e-6`` (relative)
    at ``r_max``.
    """
    phases = np.exp(2j * np.pi * np.arange(16) / 16)
    radii = np.arange(0.5, r_max + 1e-9, 0.5)
    vals = np.array([np.abs(_char_values(t, r * phases)).max() for r in radii])
    scale = max(1.0, float(vals.max()))
    if vals[-1] > SLOW_DECAY_TOL * scale:
        raise SlowDecay(f"|chi_T| = {vals[-1]:.2e} at radius {r_max}")
    above = np.flatnonzero(vals > tol * scale)
    if len(above) == 0:
        return float(radii[0])
    return float(radii[min(above[-1] + 2, len(radii) - 1)])


@dataclass(frozen=True)
class PhaseSpaceRule:
    """Tensor Gauss-Legendre rule on ``[-R, R]^2`` with weights including ``1/pi``."""

    points: np.ndarray
    weights: np.ndarray
    radius: float


def phase_space_rule(radius: float, nodes: int = 80) -> PhaseSpaceRule:
    if nodes > MAX_NODES:
        raise QuadratureBudgetExceeded(f"{nodes} nodes per axis exceed {MAX_NODES}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    x, w = radius * x, radius * w
    re, im = np.meshgrid(x, x, indexing="ij")
    return PhaseSpaceRule((re + 1j * im).ravel(), np.outer(w, w).ravel() / math.pi, radius)


def inversion_error(t: np.ndarray, rule: PhaseSpaceRule) -> float:
    """``max |T - (1/pi) sum w chi_T(z) D_{-z}| / max |T|``: the quadrature error on ``T`` itself."""
    chi = _char_values(t, rule.points)
    rec = _weighted_sum(chi * rule.weights, displacement_blocks(-rule.points, t.shape[0] - 1))
    return float(np.abs(rec - t).max() / max(np.abs(t).max(), 1e-300))


# ---------------------------------------------------------------------------
# lifting


@dataclass(frozen=True, eq=False)
class LiftedOperator:
    """Matrix blocks of a lifted operator on two registers (product basis).

    ``rows`` holds ``<s|T_v|k>`` and ``cols`` holds ``<k|T_v|s>`` for ``s``
    in the small box ``n1 <= state_cutoffs[0], n2 <= state_cutoffs[1]`` and
    ``k`` in the large box ``n1, n2 <= reach``.
    """

    rows: np.ndarray
    cols: np.ndarray
    subset: tuple
    state_cutoffs: tuple
    reach: int
    quad_error: float


def lift(
    t,
    subset,
    state_cutoffs: tuple[int, int],
    reach: int,
    nodes: int = 80,
    radius: float | None = None,
) -> LiftedOperator:
    """Symmetric lifting of ``t`` along ``subset`` of the two registers ``{1, 2}``.

    ``reach`` must be at least the largest photon number per register that
    the exact lifted operator connects to the small box; for the full subset
    that is ``state_cutoffs[0] + state_cutoffs[1] + N_T``.
    """
    subset = tuple(sorted(set(subset)))
    if not subset:
        raise EmptySubset("lifting needs a non-empty subset")
    if not set(subset) <= {1, 2}:
        raise InvalidParameter("only two registers are supported")
    m = _matrix(t)
    n1, n2 = state_cutoffs
    big = reach
    radius = decay_radius(m) if radius is None else radius
    rule = phase_space_rule(radius, nodes)
    chi = _char_values(m, rule.points)
    coef = rule.weights * chi
    rebuilt = _weighted_sum(coef, displacement_blocks(-rule.points, m.shape[0] - 1))
    quad_error = float(np.abs(rebuilt - m).max() / max(np.abs(m).max(), 1e-300))

    if len(subset) == 1:
        # W_v(-z) = D_{-z} on one register, identity on the other
        def single(rows, cols):
            return _weighted_sum(coef, displacement_blocks(-rule.points, rows, cols))

        cut = (n1, n2)
        j = subset[0] - 1
        other = 1 - j
        t_rows = single(cut[j], big)
        t_cols = single(big, cut[j])
        eye_rows = np.eye(cut[other] + 1, big + 1)
        eye_cols = np.eye(big + 1, cut[other] + 1)
        if j == 0:
            rows, cols = np.kron(t_rows, eye_rows), np.kron(t_cols, eye_cols)
        else:
            rows, cols = np.kron(eye_rows, t_rows), np.kron(eye_cols, t_cols)
    else:
        s = math.sqrt(2.0)
        shifts = -rule.points / s
        d1r, d2r = displacement_blocks(shifts, n1, big), displacement_blocks(shifts, n2, big)
        d1c, d2c = displacement_blocks(shifts, big, n1), displacement_blocks(shifts, big, n2)
        rows = _weighted_kron(coef, d1r, d2r)
        cols = _weighted_kron(coef, d1c, d2c)
    return LiftedOperator(rows, cols, subset, (n1, n2), big, quad_error)


def _weighted_sum(coef, blocks) -> np.ndarray:
    return np.tensordot(coef, blocks, axes=1)


def _weighted_kron(coef, d1, d2) -> np.ndarray:
    """``sum_z coef[z] kron(d1[z], d2[z])`` as one matrix product."""
    z, a, b = d1.shape
    _, c, d = d2.shape
    left = (coef[:, None] * d1.reshape(z, a * b)).T  # (a b) x z
    prod = left @ d2.reshape(z, c * d)  # (a b) x (c d)
    return prod.reshape(a, b, c, d).transpose(0, 2, 1, 3).reshape(a * c, b * d)


def lifted_inner(
    a: LiftedOperator, b: LiftedOperator, rho1, rho2, spec: InnerProductSpec
) -> complex:
    """``<A, B>`` for the linear inner product weighted by ``rho1 (x) rho2``."""
    if not spec.is_linear:
        raise InvalidParameter("lifted inner products need a linear spec")
    if a.state_cutoffs != b.state_cutoffs or a.reach != b.reach:
        raise InvalidParameter("lifted operators were built on different boxes")
    n1, n2 = a.state_cutoffs
    rho = np.kron(embed(_matrix(rho1), n1), embed(_matrix(rho2), n2))
    left = np.sum(a.rows.conj() * (rho @ b.rows))  # tr(A^dagger rho B)
    right = np.sum(rho.T * (a.cols.conj().T @ b.cols))  # tr(rho A^dagger B)
    if spec.k == 2:
        left, right = right, left
    return complex((left + spec.t * right) / (1.0 + spec.t))


def lift_exact_full(t, state_cutoffs, reach) -> LiftedOperator:
    """Lift along ``{1, 2}`` as ``U^dagger (T (x) I) U`` with the 50:50 beam splitter.

    Used as an independent oracle for the quadrature-based :func:`lift`.
    """
    m = _matrix(t)
    n1, n2 = state_cutoffs
    total = 2 * reach
    u = beam_splitter_unitary(0.5, total).dense()
    # graded index of each product-basis pair
    g1, g2 = graded_basis(total)
    index = {(int(x), int(y)): i for i, (x, y) in enumerate(zip(g1, g2))}
    t_big = embed(m, total)
    op = np.zeros((len(g1), len(g1)), complex)
    # (T (x) I) on the graded basis
    for i, (x, y) in enumerate(zip(g1, g2)):
        for x2 in range(0, total - y + 1):
            if t_big[x, x2] != 0:
                op[i, index[(x2, int(y))]] = t_big[x, x2]
    full = u.conj().T @ op @ u
    small = [index[(i, j)] for i in range(n1 + 1) for j in range(n2 + 1)]
    large = [index[(i, j)] for i in range(reach + 1) for j in range(reach + 1)]
    return LiftedOperator(
        full[np.ix_(small, large)], full[np.ix_(large, small)], (1, 2), (n1, n2), reach, 0.0
    )


# ---------------------------------------------------------------------------
# Proposition-1 and Lemma-2 style identities


def _pi_psi(rho: np.ndarray, op: np.ndarray, spec: InnerProductSpec) -> np.ndarray:
    n = max(rho.shape[0], op.shape[0]) - 1
    r, x = embed(rho, n), embed(op, n)
    left, right = r @ x, x @ r
    if spec.k == 2:
        left, right = right, left
    return (left + spec.t * right) / (1.0 + spec.t)


def _subset_state(rhos, v) -> np.ndarray:
    states = [_matrix(rhos[k - 1]) for k in sorted(v)]
    total = sum(s.shape[0] - 1 for s in states)
    return _matrix(symmetric_qconv(states, out_cutoff=total, work_cutoff=total))


def _reach(rho1, rho2, *ops) -> int:
    n1, n2 = _matrix(rho1).shape[0] - 1, _matrix(rho2).shape[0] - 1
    return n1 + n2 + max(_matrix(o).shape[0] - 1 for o in ops)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: complex
    residual: float
    quad_error: float


def _relative(lhs, rhs) -> float:
    return abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300)


def prop1_check(t, r, rho1, rho2, v, spec: InnerProductSpec, nodes: int = 80) -> IdentityCheck:
    """Compare ``<T_v, R_{[2]}>`` with its single-mode convolution formula.

    The right side is ``tr((pi^psi_{rho^v}(T)^dagger [+]_{|v|/2} rho^{v^c}) R)``
    evaluated with single-mode matrices only.
    """
    v = tuple(sorted(set(v)))
    rhos = [rho1, rho2]
    n1, n2 = _matrix(rho1).shape[0] - 1, _matrix(rho2).shape[0] - 1
    reach = _reach(rho1, rho2, t, r)
    lt = lift(t, v, (n1, n2), reach, nodes)
    lr = lift(r, (1, 2), (n1, n2), reach, nodes)
    lhs = lifted_inner(lt, lr, rho1, rho2, spec)

    x = _pi_psi(_subset_state(rhos, v), _matrix(t), spec).conj().T
    comp = [k for k in (1, 2) if k not in v]
    if comp:
        other = _subset_state(rhos, comp)
        x = qconv(x, other, len(v) / 2.0, out_cutoff=x.shape[0] + other.shape[0] - 2)
    n = max(x.shape[0], _matrix(r).shape[0]) - 1
    rhs = complex(np.trace(embed(x, n) @ embed(_matrix(r), n)))
    return IdentityCheck(lhs, rhs, _relative(lhs, rhs), max(lt.quad_error, lr.quad_error))


def _embedded_state(m: np.ndarray) -> DensityMatrix:
    # one spare photon so that [a, rho] is exact
    return DensityMatrix(embed(m, m.shape[0]))


def lemma2_check(rho1, rho2, r, v, spec: InnerProductSpec, nodes: int = 80) -> IdentityCheck:
    """Compare ``<S~_v, R_{[2]}>`` with ``sqrt(|v|/2) <S_{rho^[2]}, R>``.

    ``S~_v`` is the lift along ``v`` of the score of ``rho^v`` for ``spec``;
    the right side uses the score of the full convolution.
    """
    v = tuple(sorted(set(v)))
    rhos = [rho1, rho2]
    n1, n2 = _matrix(rho1).shape[0] - 1, _matrix(rho2).shape[0] - 1
    s_v = score(_embedded_state(_subset_state(rhos, v)), spec).matrix
    full = _embedded_state(_subset_state(rhos, (1, 2)))
    s_full = score(full, spec).matrix
    reach = _reach(rho1, rho2, s_v, r)
    lt = lift(s_v, v, (n1, n2), reach, nodes)
    lr = lift(r, (1, 2), (n1, n2), reach, nodes)
    lhs = lifted_inner(lt, lr, rho1, rho2, spec)
    n = max(full.cutoff, _matrix(r).shape[0] - 1)
    rhs = math.sqrt(len(v) / 2.0) * linear_inner(
        full.embed(n), spec, embed(s_full, n), embed(_matrix(r), n)
    )
    return IdentityCheck(lhs, rhs, _relative(lhs, rhs), max(lt.quad_error, lr.quad_error))


def classical_weight(z: complex, xs, w) -> complex:
    """``prod_{l in w} D_c(z / sqrt(|w|), x_l)`` with ``D_c(z, x) = exp(z conj(x) - conj(z) x)``."""
    w = sorted(set(w))
    if not w:
        return 1.0 + 0j
    zs = z / math.sqrt(len(w))
    return complex(np.prod([np.exp(zs * np.conj(xs[l - 1]) - np.conj(zs) * xs[l - 1]) for l in w]))


# ---------------------------------------------------------------------------
# subset projectors on finite registers


def _normalized(rho) -> np.ndarray:
    m = _matrix(rho)
    return m / np.trace(m)


def expectation(a: np.ndarray, rhos, k: int) -> np.ndarray:
    """``E_k A = tr_k((rho_k)_k A) (x) I_k`` for registers of dimensions ``len(rho_j)``."""
    dims = [r.shape[0] for r in rhos]
    n = len(dims)
    t = np.moveaxis(a.reshape(dims + dims), [k - 1, n + k - 1], [0, 1])
    # sum_{i,j} rho_k[i, j] A[.. j .., .. i ..]
    rest = np.einsum("ij,ji...->...", rhos[k - 1], t)
    eye = np.eye(dims[k - 1])
    out = np.multiply.outer(rest, eye)  # axes: rest rows, rest cols, k row, k col
    out = np.moveaxis(out, [2 * (n - 1), 2 * (n - 1) + 1], [k - 1, n + k - 1])
    d = int(np.prod(dims))
    return out.reshape(d, d)


def subset_projector(a: np.ndarray, rhos, v) -> np.ndarray:
    """``P_v A = prod_{k not in v} E_k prod_{k in v} (I - E_k) A``."""
    out = a
    for k in range(1, len(rhos) + 1):
        e = expectation(out, rhos, k)
        out = e if k not in v else out - e
    return out


def all_subsets(n: int):
    return [tuple(c) for size in range(n + 1) for c in itertools.combinations(range(1, n + 1), size)]


@dataclass(frozen=True)
class DecompositionReport:
    completeness: float
    idempotence: float
    orthogonality: float
    self_adjointness: float
    pythagoras: float
    commutation: float

    @property
    def worst(self) -> float:
        return max(
            self.completeness,
            self.idempotence,
            self.orthogonality,
            self.self_adjointness,
            self.pythagoras,
            self.commutation,
        )


def projector_decomposition_check(rhos, ops, spec: InnerProductSpec) -> DecompositionReport:
    """Residuals of the projector identities on the given test operators.

    ``rhos`` are the register states (normalised to unit trace here) and
    ``ops`` a list of operators on the product space.  Orthogonality and
    self-adjointness are measured with the linear inner product weighted by
    the product state.
    """
    rhos = [_normalized(r) for r in rhos]
    n = len(rhos)
    big = rhos[0]
    for r in rhos[1:]:
        big = np.kron(big, r)
    subsets = all_subsets(n)

    def inner(x, y):
        return linear_inner(big, spec, x, y)

    comp = idem = orth = adj = pyth = comm = 0.0
    for a in ops:
        parts = {v: subset_projector(a, rhos, v) for v in subsets}
        comp = max(comp, float(np.abs(sum(parts.values()) - a).max()))
        norm2 = inner(a, a).real
        pyth = max(pyth, abs(norm2 - sum(inner(p, p).real for p in parts.values())))
        for v, p in parts.items():
            idem = max(idem, float(np.abs(subset_projector(p, rhos, v) - p).max()))
            for w in subsets:
                if w != v:
                    orth = max(orth, float(np.abs(subset_projector(p, rhos, w)).max()))
        for b in ops:
            for v in subsets:
                adj = max(adj, abs(inner(parts[v], b) - inner(a, subset_projector(b, rhos, v))))
        for k1 in range(1, n + 1):
            for k2 in range(k1 + 1, n + 1):
                e12 = expectation(expectation(a, rhos, k2), rhos, k1)
                e21 = expectation(expectation(a, rhos, k1), rhos, k2)
                comm = max(comm, float(np.abs(e12 - e21).max()))
    return DecompositionReport(comp, idem, orth, adj, pyth, comm)
