"""Legendre basis on a time interval.

Provides Gauss-Legendre quadrature, the discrete (quadrature-weighted) L2
projection onto polynomials of a given degree, and calculus on vector-valued
Legendre series: evaluation, differentiation and the antiderivative that
vanishes at the left endpoint.  All polynomials live on a physical interval
(a, b) and are stored by their coefficients in the Legendre basis on the
reference interval [-1, 1], mapped affinely.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Interval",
    "QuadratureRule",
    "LocalPoly",
    "legendre_values",
    "legendre_derivatives",
    "gauss_rule",
    "project",
    "antiderivative_from_left",
    "derivative",
    "poly_eval",
]


@dataclass(frozen=True)
class Interval:
    """Time interval (a, b) with length ``k = b - a``."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got ({self.a}, {self.b})")

    @property
    def k(self) -> float:
        return self.b - self.a

    def to_reference(self, t):
        """Affine map (a, b) -> [-1, 1]."""
        return 2.0 * (np.asarray(t, dtype=float) - self.a) / self.k - 1.0

    def from_reference(self, s):
        """Affine map [-1, 1] -> (a, b)."""
        return self.a + 0.5 * self.k * (np.asarray(s, dtype=float) + 1.0)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on the reference interval [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return self.nodes.size

    def mapped_nodes(self, interval: Interval) -> np.ndarray:
        return interval.from_reference(self.nodes)

    def integrate(self, samples: np.ndarray, interval: Interval):
        """Integral over the interval of a function sampled at the mapped nodes."""
        samples = np.asarray(samples, dtype=float)
        return 0.5 * interval.k * np.tensordot(self.weights, samples, axes=1)


@dataclass(frozen=True, eq=False)
class LocalPoly:
    """Vector-valued polynomial on one interval, as Legendre coefficients.

    ``coeffs`` has shape (deg + 1, dim); row j multiplies P_j(s(t)) with
    s the affine map of the interval onto [-1, 1].  Instances are immutable;
    the coefficient array is marked read-only on construction.
    """

    interval: Interval
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError(f"coeffs must be (deg+1, dim), got shape {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c.copy()))

    @property
    def deg(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, t):
        return poly_eval(self, t)


def legendre_values(r: int, s) -> np.ndarray:
    """P_0(s), ..., P_r(s) by the three-term recurrence.

    ``s`` may be a scalar or an array; the result has shape (r+1,) + shape(s).
    """
    if r < 0:
        raise ValueError("degree must be nonnegative")
    s = np.asarray(s, dtype=float)
    out = np.empty((r + 1,) + s.shape)
    out[0] = 1.0
    if r >= 1:
        out[1] = s
    for j in range(1, r):
        # (j+1) P_{j+1} = (2j+1) s P_j - j P_{j-1}
        out[j + 1] = ((2 * j + 1) * s * out[j] - j * out[j - 1]) / (j + 1)
    return out


def legendre_derivatives(r: int, s) -> np.ndarray:
    """P_0'(s), ..., P_r'(s), via P'_{j+1} = P'_{j-1} + (2j+1) P_j."""
    if r < 0:
        raise ValueError("degree must be nonnegative")
    s = np.asarray(s, dtype=float)
    vals = legendre_values(r, s)
    out = np.empty_like(vals)
    out[0] = 0.0
    if r >= 1:
        out[1] = 1.0
    for j in range(1, r):
        out[j + 1] = out[j - 1] + (2 * j + 1) * vals[j]
    return out


@lru_cache(maxsize=None)
def gauss_rule(q: int) -> QuadratureRule:
    """q-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of P_q, found by Newton iteration started from the
    Chebyshev guesses cos(pi (i - 1/4) / (q + 1/2)).  Rules are cached; the
    returned arrays are read-only.
    """
    if q < 1:
        raise ValueError("need at least one quadrature point")
    i = np.arange(1, q + 1)
    x = np.cos(np.pi * (i - 0.25) / (q + 0.5))
    for _ in range(100):
        p = legendre_values(q, x)
        dp = legendre_derivatives(q, x)[q]
        step = p[q] / dp
        x = x - step
        if np.max(np.abs(step)) <= 1e-15:
            break
    else:
        raise RuntimeError(f"Gauss node search did not converge for q={q}")
    dp = legendre_derivatives(q, x)[q]
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # enforce exact symmetry about 0 (kills asymmetric round-off)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    order = np.argsort(x)
    return QuadratureRule(_readonly(x[order]), _readonly(w[order]))


def project(samples, rule: QuadratureRule, target_deg: int, interval: Interval) -> LocalPoly:
    """Discrete L2 projection of nodal samples onto degree ``target_deg``.

    ``samples`` holds the function values at the rule's mapped nodes, shape
    (q, dim) or (q,) for scalar data.  Coefficients follow the diagonal Gram
    formula c_j = (2j+1)/2 * sum_i w_i f_i P_j(s_i), which reproduces the
    exact projection whenever the integrand the rule sees is a polynomial of
    degree <= 2q - 1.
    """
    if target_deg < 0:
        raise ValueError("target degree must be nonnegative")
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    q = rule.npoints
    if samples.shape[0] != q:
        raise ValueError(f"expected {q} samples, got {samples.shape[0]}")
    if q < target_deg + 1:
        raise ValueError(
            f"projection onto degree {target_deg} needs at least {target_deg + 1} points, got {q}"
        )
    vals = legendre_values(target_deg, rule.nodes)  # (target_deg+1, q)
    scale = (2.0 * np.arange(target_deg + 1) + 1.0) / 2.0
    coeffs = scale[:, None] * ((vals * rule.weights) @ samples)
    return LocalPoly(interval, coeffs)


def antiderivative_from_left(p: LocalPoly) -> LocalPoly:
    """Antiderivative of ``p`` on its interval, vanishing at the left endpoint.

    Uses the identity int P_j ds = (P_{j+1} - P_{j-1}) / (2j+1) plus the
    physical scaling k/2; the constant coefficient is then adjusted so the
    value at ``a`` cancels.
    """
    c = p.coeffs
    d = p.deg
    out = np.zeros((d + 2, p.dim))
    out[1] += c[0]
    for j in range(1, d + 1):
        out[j + 1] += c[j] / (2 * j + 1)
        out[j - 1] -= c[j] / (2 * j + 1)
    out *= 0.5 * p.interval.k
    signs = (-1.0) ** np.arange(d + 2)
    out[0] -= signs @ out
    return LocalPoly(p.interval, out)


def derivative(p: LocalPoly) -> LocalPoly:
    """Derivative of ``p`` as a Legendre series of degree deg - 1."""
    c = p.coeffs
    d = p.deg
    out = np.zeros((max(d, 1), p.dim))
    for j in range(d - 1, -1, -1):
        out[j] = (2 * j + 1) * c[j + 1 :: 2].sum(axis=0)
    out *= 2.0 / p.interval.k
    return LocalPoly(p.interval, out)


def poly_eval(p: LocalPoly, t):
    """Value of ``p`` at time(s) ``t`` inside its interval.

    Accepts a scalar (returns shape (dim,)) or a 1-D array (returns
    (len(t), dim)).  Times outside the interval beyond a 1e-12 slack are
    rejected; within the slack the evaluation clamps to the endpoint.
    """
    iv = p.interval
    t_arr = np.asarray(t, dtype=float)
    tol = 1e-12 * max(1.0, abs(iv.a), abs(iv.b))
    if np.any(t_arr < iv.a - tol) or np.any(t_arr > iv.b + tol):
        raise ValueError(f"time {t} outside interval ({iv.a}, {iv.b})")
    s = np.clip(iv.to_reference(t_arr), -1.0, 1.0)
    vals = legendre_values(p.deg, s)  # (deg+1,) + shape(s)
    if t_arr.ndim == 0:
        return vals @ p.coeffs
    return vals.T @ p.coeffs
