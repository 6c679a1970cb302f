"""Complex-valued classical random variables for quantum-classical convolution.

Two representations are supported: isotropic Gaussians and finitely supported
distributions.  A Gaussian with scale ``h`` has real and imaginary parts that
are independent with variance ``h / 2`` each, so its symplectic characteristic
function is ``exp(-h |z|^2 + z conj(mean) - conj(z) mean)``.  With ``h = 1``
convolving a state at scale ``t`` multiplies its characteristic function by
``exp(-t |z|^2)``, which is the heat-semigroup kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySubset, InvalidParameter, UnsupportedMix


@dataclass(frozen=True)
class ClassicalRV:
    """A single-mode (complex scalar) classical random variable.

    Attributes
    ----------
    kind : {"gaussian", "finite"}
    mean : complex
        Mean of a Gaussian (unused for finite distributions).
    h : float
        Gaussian variance scale; real and imaginary parts have variance ``h/2``.
    points, probs : numpy.ndarray
        Support and probabilities of a finite distribution.
    """

    kind: str
    mean: complex = 0j
    h: float = 0.0
    points: np.ndarray | None = None
    probs: np.ndarray | None = None

    @property
    def mode_count(self) -> int:
        return 1

    @property
    def is_point_mass(self) -> bool:
        if self.kind == "gaussian":
            return self.h == 0
        return len(self.points) == 1

    def __repr__(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(h={self.h:g}, mean={self.mean:g})"
        return f"finite({len(self.points)} points)"


def gaussian(h: float = 1.0, mean: complex = 0j) -> ClassicalRV:
    if not h >= 0:
        raise InvalidParameter("Gaussian scale h must be non-negative")
    return ClassicalRV("gaussian", mean=complex(mean), h=float(h))


def finite(points, probs=None) -> ClassicalRV:
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if probs is None:
        p = np.full(len(pts), 1.0 / len(pts))
    else:
        p = np.atleast_1d(np.asarray(probs, dtype=float))
    if p.shape != pts.shape or len(p) == 0:
        raise InvalidParameter("need one probability per support point")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidParameter("probabilities must be non-negative and sum to one")
    pts.setflags(write=False)
    p.setflags(write=False)
    return ClassicalRV("finite", points=pts, probs=p)


def point_mass(x: complex) -> ClassicalRV:
    return finite([x], [1.0])


def scaled(x: ClassicalRV, c: float) -> ClassicalRV:
    """The variable ``c * X`` for real ``c``."""
    if x.kind == "gaussian":
        return gaussian(c * c * x.h, c * x.mean)
    return finite(c * x.points, x.probs)


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameter(f"lambda must lie in [0, 1], got {lam}")


def cconv(x: ClassicalRV, y: ClassicalRV, lam: float) -> ClassicalRV:
    """Normalised sum ``sqrt(lam) X + sqrt(1 - lam) Y`` of independent variables.

    A Gaussian can be combined with another Gaussian or with a point mass;
    mixing a Gaussian with a general finite distribution is not representable
    here and raises :class:`UnsupportedMix`.
    """
    _check_lambda(lam)
    a, b = math.sqrt(lam), math.sqrt(1.0 - lam)
    if x.kind == "finite" and y.kind == "finite":
        pts = (a * x.points[:, None] + b * y.points[None, :]).ravel()
        p = (x.probs[:, None] * y.probs[None, :]).ravel()
        return finite(pts, p / p.sum())
    if x.kind == "gaussian" and y.kind == "gaussian":
        return gaussian(lam * x.h + (1.0 - lam) * y.h, a * x.mean + b * y.mean)
    g, f, cg, cf = (x, y, a, b) if x.kind == "gaussian" else (y, x, b, a)
    if f.is_point_mass:
        return gaussian(cg * cg * g.h, cg * g.mean + cf * f.points[0])
    if cg == 0:
        return scaled(f, cf)
    raise UnsupportedMix("cannot convolve a Gaussian with a general finite distribution")


def symmetric_cconv(variables) -> ClassicalRV:
    """``(X_1 + ... + X_k) / sqrt(k)`` by a left fold with ``lam = 1 - 1/j``."""
    variables = list(variables)
    if not variables:
        raise EmptySubset("symmetric convolution of an empty collection")
    out = variables[0]
    for j, x in enumerate(variables[1:], start=2):
        out = cconv(out, x, 1.0 - 1.0 / j)
    return out


def classical_char(x: ClassicalRV, z) -> np.ndarray:
    """Symplectic characteristic function ``E[exp(z conj(X) - conj(z) X)]``."""
    z = np.asarray(z, dtype=complex)
    if x.kind == "gaussian":
        return np.exp(-x.h * np.abs(z) ** 2 + z * np.conj(x.mean) - np.conj(z) * x.mean)
    phase = z[..., None] * np.conj(x.points) - np.conj(z)[..., None] * x.points
    return np.exp(phase) @ x.probs


def quadrature(x: ClassicalRV, nodes: int = 20, tilt: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights representing ``X`` for expectation values.

    Finite distributions are returned as is.  Gaussians use a tensor
    Gauss-Hermite rule with ``nodes`` points per real dimension.

    With ``tilt = s > 0`` the rule is built for the narrower weight
    ``exp(-(1 + s)|xi|^2)`` and the weights carry the compensating factor
    ``exp(s |xi|^2)``.  This is exact for integrands of the form
    ``exp(-s |xi|^2) * polynomial``, which is the shape of displaced Fock
    matrix elements; the weights are renormalised to sum to one.
    """
    if x.kind == "finite":
        return np.asarray(x.points), np.asarray(x.probs)
    if x.h == 0:
        return np.array([x.mean]), np.array([1.0])
    if tilt < 0:
        raise InvalidParameter("tilt must be non-negative")
    xi, w = np.polynomial.hermite.hermgauss(nodes)
    xi = xi / math.sqrt(1.0 + tilt)
    w = w * np.exp(tilt * xi * xi)
    # weight exp(-xi^2) has variance 1/2 per coordinate
    re, im = np.meshgrid(xi, xi, indexing="ij")
    pts = x.mean + math.sqrt(x.h) * (re + 1j * im).ravel()
    weights = np.outer(w, w).ravel()
    return pts, weights / weights.sum()
