"""Margins of the entropy power and Fisher information inequalities.

Every check returns an :class:`InequalityMargin` whose ``margin`` is
``lhs - rhs`` with the orientation chosen so that a non-negative margin
means the inequality holds.  For the Fisher information (Stam-type)
inequalities the upper bound is therefore stored as ``lhs``.

Subsets are given with 1-based indices, quantum registers ``1..n`` and
classical registers ``1..n'``.  A state ``rho^[+]v * X^[+]w`` is the
symmetric quantum convolution of the states indexed by ``v`` followed by a
unit-time random displacement with the symmetric classical sum indexed by
``w``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from . import classical
from .convolution import qcconv, qconv, symmetric_qconv
from .errors import (
    CutoffTooSmall,
    EmptySubset,
    InfeasibleConfiguration,
    InvalidParameter,
    SupportDeficient,
)
from .fockspace import DensityMatrix, trace_distance
from .information import KMB, InnerProductSpec, entropy, fisher

ENTROPY_TOL = 1e-6
FISHER_TOL = 1e-5
QC_PAD = 20
MONOTONICITY_DEFICIT_TOL = 1e-6
MAX_AUX_REGISTERS = 24


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SubsetCollection:
    """A collection of pairs ``(v, w)`` with ``v`` in ``[n]`` and ``w`` in ``[n']``.

    Every pair must satisfy ``|w| / |v| = n' / n`` exactly.  ``r`` is the
    largest number of elements that share a quantum or a classical index.
    """

    n: int
    n_classical: int
    elements: tuple
    r: int = field(init=False)

    def __post_init__(self):
        if self.n < 1 or self.n_classical < 0:
            raise InvalidParameter("need n >= 1 and n' >= 0")
        elems = []
        for item in self.elements:
            if isinstance(item, tuple) and len(item) == 2 and not isinstance(item[0], int):
                v, w = item
            else:
                v, w = item, ()
            v, w = tuple(sorted(set(v))), tuple(sorted(set(w)))
            if not v:
                raise EmptySubset("every element needs a nonempty quantum subset")
            if v[0] < 1 or v[-1] > self.n:
                raise InvalidParameter(f"quantum subset {v} is not inside [1, {self.n}]")
            if w and (w[0] < 1 or w[-1] > self.n_classical):
                raise InvalidParameter(f"classical subset {w} is not inside [1, {self.n_classical}]")
            if Fraction(len(w), len(v)) != Fraction(self.n_classical, self.n):
                raise InvalidParameter(
                    f"element ({v}, {w}) violates |w|/|v| = {self.n_classical}/{self.n}"
                )
            elems.append((v, w))
        if not elems:
            raise EmptySubset("collection has no elements")
        object.__setattr__(self, "elements", tuple(elems))
        counts = [sum(k in v for v, _ in elems) for k in range(1, self.n + 1)]
        counts += [sum(k in w for _, w in elems) for k in range(1, self.n_classical + 1)]
        object.__setattr__(self, "r", max(counts))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(v) for v, _ in self.elements], dtype=float)

    def label(self) -> str:
        def fmt(s):
            return "{" + ",".join(map(str, s)) + "}"

        parts = [fmt(v) if not self.n_classical else fmt(v) + fmt(w) for v, w in self.elements]
        return " ".join(parts)


def collection(n: int, subsets, n_classical: int = 0) -> SubsetCollection:
    return SubsetCollection(n, n_classical, tuple(subsets))


def singletons(n: int) -> SubsetCollection:
    return collection(n, [(k,) for k in range(1, n + 1)])


def subsets_of_size(n: int, size: int) -> SubsetCollection:
    """All ``size``-element subsets of ``[n]``; ``size = n - 1`` gives leave-one-out."""
    if not 1 <= size <= n:
        raise InvalidParameter(f"subset size must lie in [1, {n}]")
    return collection(n, itertools.combinations(range(1, n + 1), size))


def full(n: int) -> SubsetCollection:
    return collection(n, [tuple(range(1, n + 1))])


def paired_collection(n: int, n_classical: int, pairs) -> SubsetCollection:
    return SubsetCollection(n, n_classical, tuple(pairs))


@dataclass(frozen=True)
class WeightDistribution:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).copy()
        if mu.ndim != 1 or len(mu) == 0:
            raise InvalidParameter("weights must be a nonempty vector")
        if (mu < 0).any() or abs(mu.sum() - 1.0) > 1e-12:
            raise InvalidParameter("weights must be non-negative and sum to one")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __len__(self) -> int:
        return len(self.mu)


def uniform_weights(c: SubsetCollection) -> WeightDistribution:
    return WeightDistribution(np.full(len(c), 1.0 / len(c)))


@dataclass(frozen=True)
class InequalityMargin:
    """``margin = lhs - rhs``; ``passed`` iff ``margin >= -tolerance``."""

    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    trace_deficit: float = 0.0
    quad_error: float = math.nan
    details: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, lhs, rhs, tolerance, trace_deficit=0.0, quad_error=math.nan, **details):
        lhs, rhs = float(lhs), float(rhs)
        margin = lhs - rhs
        return cls(
            name, lhs, rhs, margin, float(tolerance), bool(margin >= -tolerance),
            float(trace_deficit), float(quad_error), details,
        )


# ---------------------------------------------------------------------------
# convolved states


class _Evaluator:
    """Builds and memoises ``rho^[+]v * X^[+]w`` and its entropy / Fisher information."""

    def __init__(self, states, variables=(), cutoff=None, nodes=20):
        self.states = list(states)
        self.variables = list(variables)
        if not self.states:
            raise EmptySubset("need at least one quantum state")
        base = max(s.cutoff for s in self.states)
        if cutoff is None:
            cutoff = base + (QC_PAD if self._needs_quadrature() else 0)
        self.cutoff = int(cutoff)
        self.nodes = nodes
        self._cache = {}

    def _needs_quadrature(self) -> bool:
        return any(x.kind == "gaussian" and x.h > 0 for x in self.variables)

    def state(self, v, w=()) -> DensityMatrix:
        key = (tuple(v), tuple(w))
        if key not in self._cache:
            self._cache[key] = self._build(v, w, self.nodes)
        return self._cache[key]

    def _build(self, v, w, nodes) -> DensityMatrix:
        rhos = [self.states[k - 1] for k in v]
        if not w:
            return symmetric_qconv(rhos, out_cutoff=self.cutoff)
        x = classical.symmetric_cconv([self.variables[k - 1] for k in w])
        q = symmetric_qconv(rhos, out_cutoff=max(s.cutoff for s in rhos))
        return qcconv(q, x, 1.0, out_cutoff=self.cutoff, nodes=nodes)

    def quad_error(self, v, w) -> float:
        """Trace distance between the quadrature at ``nodes`` and ``nodes + 8``."""
        if not w or not self._needs_quadrature():
            return 0.0
        return trace_distance(self.state(v, w), self._build(v, w, self.nodes + 8))

    def entropy(self, v, w=()) -> float:
        return entropy(self.state(v, w))

    def fisher(self, v, w=(), spec: InnerProductSpec = KMB) -> float:
        fi = fisher(self.state(v, w), spec)
        if fi.divergent:
            raise SupportDeficient(f"Fisher information of subset {v}{w or ''} diverges")
        return fi.value

    def deficit(self) -> float:
        return max(s.trace_deficit for s in self._cache.values())


def _full_key(c: SubsetCollection):
    return tuple(range(1, c.n + 1)), tuple(range(1, c.n_classical + 1))


def _check_sizes(states, variables, c: SubsetCollection):
    if len(states) != c.n or len(variables) != c.n_classical:
        raise InvalidParameter(
            f"collection expects {c.n} states and {c.n_classical} classical variables, "
            f"got {len(states)} and {len(variables)}"
        )


# ---------------------------------------------------------------------------
# two-state inequalities


def epi_basic(rho: DensityMatrix, sigma: DensityMatrix, eta: float, tolerance: float = ENTROPY_TOL):
    """Entropy and entropy-power forms of the two-state inequality.

    Returns margins of ``S(rho [+]_eta sigma) >= eta S(rho) + (1 - eta) S(sigma)``
    and of ``exp S(rho [+]_eta sigma) >= eta exp S(rho) + (1 - eta) exp S(sigma)``.
    The convolution is evaluated without cropping (cutoff ``N_rho + N_sigma``).
    """
    out = qconv(rho, sigma, eta, out_cutoff=rho.cutoff + sigma.cutoff)
    s_out, s1, s2 = entropy(out), entropy(rho), entropy(sigma)
    deficit = max(out.trace_deficit, rho.trace_deficit, sigma.trace_deficit)
    linear = InequalityMargin.build(
        "epi_entropy", s_out, eta * s1 + (1 - eta) * s2, tolerance, deficit, eta=eta
    )
    power = InequalityMargin.build(
        "epi_power", math.exp(s_out), eta * math.exp(s1) + (1 - eta) * math.exp(s2),
        tolerance, deficit, eta=eta,
    )
    return linear, power


def guha_monotonicity(rho: DensityMatrix, n_max: int, tolerance: float = ENTROPY_TOL,
                      deficit_tol: float = MONOTONICITY_DEFICIT_TOL):
    """Margins ``S(rho^[+](k+1)) - S(rho^[+]k)`` for ``k = 1 .. n_max - 1``.

    The ``k``-fold convolutions are built incrementally at the cutoff of
    ``rho``.  :class:`CutoffTooSmall` is raised when any of them loses more
    than ``deficit_tol`` of its trace to the cutoff.
    """
    if n_max < 2:
        raise InvalidParameter("n_max must be at least 2")
    acc, s_prev = rho, entropy(rho)
    out = []
    for k in range(1, n_max):
        acc = qconv(acc, rho, 1.0 - 1.0 / (k + 1), out_cutoff=rho.cutoff)
        lost = acc.trace_deficit - rho.trace_deficit
        if lost > deficit_tol:
            raise CutoffTooSmall(
                f"{k + 1}-fold convolution loses {lost:.2e} of its trace at cutoff {rho.cutoff}"
            )
        s_next = entropy(acc)
        out.append(
            InequalityMargin.build(
                "monotonicity", s_next, s_prev, tolerance, acc.trace_deficit, n=k + 1
            )
        )
        s_prev = s_next
    return out


# ---------------------------------------------------------------------------
# subset inequalities


def _power_form(name, ev: _Evaluator, c: SubsetCollection, tolerance):
    sizes = c.sizes
    terms = np.array([math.exp(ev.entropy(v, w)) for v, w in c.elements])
    lhs = math.exp(ev.entropy(*_full_key(c)))
    rhs = float(sizes @ terms) / (c.r * c.n)
    quad = max(ev.quad_error(v, w) for v, w in [_full_key(c), *c.elements])
    return InequalityMargin.build(
        name, lhs, rhs, tolerance, ev.deficit(), quad if ev.variables else math.nan,
        collection=c.label(), r=c.r,
    )


def theorem1_check(states, c: SubsetCollection, tolerance: float = ENTROPY_TOL, cutoff=None):
    """Margin of ``exp S(rho^[+][n]) >= (1/(r n)) sum_v |v| exp S(rho^[+]v)``."""
    if c.n_classical:
        raise InvalidParameter("use theorem3_check for collections with classical indices")
    _check_sizes(states, (), c)
    return _power_form("subset_epi", _Evaluator(states, cutoff=cutoff), c, tolerance)


def theorem3_check(states, variables, c: SubsetCollection, tolerance: float = ENTROPY_TOL,
                   cutoff=None, nodes: int = 20):
    """Quantum-classical version of :func:`theorem1_check`.

    Each term is ``rho^[+]v * X^[+]w``.  The default output cutoff keeps
    ``QC_PAD`` photons above the inputs to hold the added noise.
    """
    _check_sizes(states, variables, c)
    ev = _Evaluator(states, variables, cutoff, nodes)
    return _power_form("qc_subset_epi", ev, c, tolerance)


def optimal_weights(fishers, sizes) -> WeightDistribution:
    """Minimiser of ``sum_v mu_v^2 I_v / |v|`` over the simplex.

    The Lagrange condition gives ``mu_v`` proportional to ``|v| / I_v``.  If
    some ``I_v`` vanish the minimum is zero and is attained by spreading the
    mass over those elements.
    """
    fishers, sizes = np.asarray(fishers, float), np.asarray(sizes, float)
    zero = fishers <= 0
    if zero.any():
        mu = zero / zero.sum()
    else:
        mu = sizes / fishers
        mu = mu / mu.sum()
    return WeightDistribution(mu)


def _stam_form(name, ev: _Evaluator, c: SubsetCollection, mu, tolerance, spec):
    fis = np.array([ev.fisher(v, w, spec) for v, w in c.elements])
    if isinstance(mu, str):
        if mu != "optimal":
            raise InvalidParameter(f"unknown weight rule {mu!r}")
        mu = optimal_weights(fis, c.sizes)
    elif not isinstance(mu, WeightDistribution):
        mu = WeightDistribution(mu)
    if len(mu) != len(c):
        raise InvalidParameter("need one weight per collection element")
    bound = c.r * c.n * float(np.sum(mu.mu ** 2 / c.sizes * fis))
    total = ev.fisher(*_full_key(c), spec)
    quad = max(ev.quad_error(v, w) for v, w in [_full_key(c), *c.elements])
    return InequalityMargin.build(
        name, bound, total, tolerance, ev.deficit(), quad if ev.variables else math.nan,
        collection=c.label(), r=c.r, mu=[float(m) for m in mu.mu],
    )


def theorem2_check(states, c: SubsetCollection, mu="optimal", tolerance: float = FISHER_TOL,
                   cutoff=None, spec: InnerProductSpec = KMB):
    """Margin of ``r n sum_v mu_v^2 I(rho^[+]v) / |v| >= I(rho^[+][n])``.

    ``lhs`` is the upper bound and ``rhs`` the Fisher information of the
    full convolution.  ``mu="optimal"`` uses :func:`optimal_weights`.
    """
    if c.n_classical:
        raise InvalidParameter("use theorem4_check for collections with classical indices")
    _check_sizes(states, (), c)
    return _stam_form("subset_stam", _Evaluator(states, cutoff=cutoff), c, mu, tolerance, spec)


def theorem4_check(states, variables, c: SubsetCollection, mu="optimal",
                   tolerance: float = FISHER_TOL, cutoff=None, nodes: int = 20,
                   spec: InnerProductSpec = KMB):
    """Quantum-classical version of :func:`theorem2_check`."""
    _check_sizes(states, variables, c)
    ev = _Evaluator(states, variables, cutoff, nodes)
    return _stam_form("qc_subset_stam", ev, c, mu, tolerance, spec)


def entropy_sum_form_check(states, c: SubsetCollection, mu, tolerance: float = ENTROPY_TOL,
                           cutoff=None):
    """Margin of ``S(rho^[+][n]) >= sum_v mu_v S(rho^[+]v) + sum_v mu_v ln(|v| / (r mu_v n))``.

    Requires ``r mu_v <= 1``; terms with ``mu_v = 0`` contribute nothing.
    """
    if c.n_classical:
        raise InvalidParameter("entropy sum form is defined for quantum collections")
    _check_sizes(states, (), c)
    mu = mu if isinstance(mu, WeightDistribution) else WeightDistribution(mu)
    if len(mu) != len(c):
        raise InvalidParameter("need one weight per collection element")
    if (c.r * mu.mu > 1.0 + 1e-12).any():
        raise InvalidParameter(f"weights violate r * mu_v <= 1 with r = {c.r}")
    ev = _Evaluator(states, cutoff=cutoff)
    rhs = 0.0
    for (v, _), m, size in zip(c.elements, mu.mu, c.sizes):
        if m > 0:
            rhs += m * (ev.entropy(v) + math.log(size / (c.r * m * c.n)))
    lhs = ev.entropy(*_full_key(c))
    return InequalityMargin.build(
        "entropy_sum_form", lhs, rhs, tolerance, ev.deficit(), collection=c.label(), r=c.r
    )


def gamma_distribution(states, c: SubsetCollection, cutoff=None) -> WeightDistribution:
    """``gamma_v`` proportional to ``|v| exp S(rho^[+]v)``."""
    _check_sizes(states, (), c)
    ev = _Evaluator(states, cutoff=cutoff)
    s = np.array([ev.entropy(v) for v, _ in c.elements])
    # shift before exponentiating to avoid overflow
    g = c.sizes * np.exp(s - s.max())
    return WeightDistribution(g / g.sum())


# ---------------------------------------------------------------------------
# auxiliary Gaussian registers


@dataclass(frozen=True)
class AuxiliaryGaussians:
    """Gaussian scales ``h_l`` on ``n'`` registers and one subset ``w_v`` per element.

    The construction satisfies ``|w_v| / |v| = n' / n``, no register is used
    by more than ``r`` elements, the mean of ``h`` is one and the mean of
    ``h`` over ``w_v`` equals ``r n mu_v / |v|``.
    """

    h: np.ndarray
    subsets: tuple

    @property
    def n_aux(self) -> int:
        return len(self.h)

    def variables(self):
        return [classical.gaussian(float(x)) for x in self.h]


def auxiliary_gaussians(c: SubsetCollection, mu, max_registers: int = MAX_AUX_REGISTERS,
                        min_scale: float = 1e-9) -> AuxiliaryGaussians:
    """Solve for auxiliary Gaussian registers matching the weights ``mu``.

    Registers are arranged in ``n`` blocks of ``k`` (``n' = k n``) and
    ``w_v`` is the union of the blocks indexed by ``v``, which fixes the size
    ratio and the multiplicity bound.  The scales then solve the linear
    system ``sum_{l in w_v} h_l = r mu_v sum_l h_l`` with ``h_l >= min_scale``
    (found with a linear program maximising the smallest scale).  Only
    block-aligned layouts are searched; :class:`InfeasibleConfiguration`
    is raised when none of them admits positive scales.
    """
    if c.n_classical:
        raise InvalidParameter("auxiliary registers are built for quantum collections")
    mu = mu if isinstance(mu, WeightDistribution) else WeightDistribution(mu)
    if (c.r * mu.mu > 1.0 + 1e-12).any():
        raise InvalidParameter(f"weights violate r * mu_v <= 1 with r = {c.r}")
    for k in range(1, max_registers // c.n + 1):
        n_aux = k * c.n
        member = np.zeros((len(c), n_aux))
        subsets = []
        for i, (v, _) in enumerate(c.elements):
            w = tuple(sorted(l for j in v for l in range((j - 1) * k + 1, j * k + 1)))
            member[i, np.array(w) - 1] = 1.0
            subsets.append(w)
        # variables h_1..h_N and the slack s, maximise s subject to h >= s
        a_eq = np.hstack([member - c.r * mu.mu[:, None], np.zeros((len(c), 1))])
        a_eq = np.vstack([a_eq, np.append(np.ones(n_aux), 0.0)])
        b_eq = np.append(np.zeros(len(c)), float(n_aux))
        a_ub = np.hstack([-np.eye(n_aux), np.ones((n_aux, 1))])
        res = linprog(
            np.append(np.zeros(n_aux), -1.0), A_ub=a_ub, b_ub=np.zeros(n_aux),
            A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * (n_aux + 1), method="highs",
        )
        if res.status == 0 and res.x[-1] >= min_scale:
            h = res.x[:-1]
            h.setflags(write=False)
            return AuxiliaryGaussians(h, tuple(subsets))
    raise InfeasibleConfiguration(
        f"no block-aligned layout with at most {max_registers} registers fits these weights"
    )
