"""Benchmark problems with orthogonal right-hand sides.

All built-ins are linear with skew-symmetric A(t), so <A(t)v, v> = 0 and
trajectories stay on the sphere ||v|| = ||u0||.  Each ships with a closed
form exact solution for error studies and is addressable by name from the
command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .solver import RhsOperator

__all__ = [
    "SkewCheckFailed",
    "BenchmarkProblem",
    "skew3x3_matrix",
    "skew3x3_exact",
    "make_linear_skew",
    "get_problem",
    "list_problems",
]

_SKEW_SAMPLES = 16


class SkewCheckFailed(ValueError):
    """The supplied matrix function is not skew-symmetric."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class BenchmarkProblem:
    """A named dynamical system, optionally with its exact solution."""

    rhs: RhsOperator
    u0: np.ndarray
    name: str
    exact: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float)
        if u0.shape != (self.rhs.dim,):
            raise ValueError("initial value does not match the operator dimension")
        u0.flags.writeable = False
        object.__setattr__(self, "u0", u0)


def skew3x3_matrix(t: float) -> np.ndarray:
    """Skew-symmetric 3x3 system matrix with decaying internal rotation.

    Couples a precession of strength 2t about a slowly turning axis with an
    internal rotation of strength 3*exp(-t); stiffness grows linearly in t.
    """
    w = 3.0 * math.exp(-t)
    c = 2.0 * t * math.cos(w)
    s = 2.0 * t * math.sin(w)
    return np.array([[0.0, -c, -s], [c, 0.0, w], [s, -w, 0.0]])


def skew3x3_exact(t: float) -> np.ndarray:
    """Closed-form unit-norm solution of the 3x3 skew system for u0 = e1:
    (cos t^2, sin t^2 * cos(3 e^-t), sin t^2 * sin(3 e^-t))."""
    w = 3.0 * math.exp(-t)
    st = math.sin(t * t)
    return np.array([math.cos(t * t), st * math.cos(w), st * math.sin(w)])


def make_linear_skew(
    A: Callable[[float], np.ndarray], *, check_window=(0.0, 4.0)
) -> RhsOperator:
    """Wrap a skew-symmetric matrix function A(t) as a right-hand side.

    Skew-symmetry is verified by sampling over ``check_window`` at
    construction time.  The returned operator advertises orthogonality, the
    lower-adjoint property, a sampled spectral-norm Lipschitz bound, and
    the matrix itself (enabling the direct step solver).
    """

    def matrix(t: float) -> np.ndarray:
        return np.asarray(A(t), dtype=float)

    first = matrix(float(check_window[0]))
    if first.ndim != 2 or first.shape[0] != first.shape[1]:
        raise ValueError(f"matrix function must return a square matrix, got {first.shape}")
    n = first.shape[0]
    for t in np.linspace(check_window[0], check_window[1], _SKEW_SAMPLES):
        mat = matrix(float(t))
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape changed to {mat.shape} at t = {t}")
        if np.linalg.norm(mat + mat.T) > 1e-12 * np.linalg.norm(mat):
            raise SkewCheckFailed(f"matrix is not skew-symmetric at t = {t:g}", float(t))

    def eval_rhs(t: float, v: np.ndarray) -> np.ndarray:
        return matrix(t) @ v

    def lipschitz(interval) -> float:
        samples = np.linspace(interval.a, interval.b, _SKEW_SAMPLES)
        return max(float(np.linalg.norm(matrix(float(t)), 2)) for t in samples)

    return RhsOperator(
        dim=n,
        eval=eval_rhs,
        lipschitz=lipschitz,
        claims_orthogonal=True,
        claims_lower_adjoint=True,
        matrix=matrix,
    )


def _build_registry():
    skew3x3 = BenchmarkProblem(
        rhs=make_linear_skew(skew3x3_matrix),
        u0=np.array([1.0, 0.0, 0.0]),
        name="paper3x3",
        exact=skew3x3_exact,
    )
    rotation = BenchmarkProblem(
        rhs=make_linear_skew(lambda t: np.array([[0.0, -1.0], [1.0, 0.0]])),
        u0=np.array([1.0, 0.0]),
        name="rotation2d",
        exact=lambda t: np.array([math.cos(t), math.sin(t)]),
    )
    zero = BenchmarkProblem(
        rhs=make_linear_skew(lambda t: np.zeros((2, 2))),
        u0=np.array([1.0, 0.0]),
        name="zero",
        exact=lambda t: np.array([1.0, 0.0]),
    )
    return {p.name: p for p in (skew3x3, rotation, zero)}


_REGISTRY = _build_registry()


def list_problems() -> tuple:
    """Names of the built-in problems, in registry order."""
    return tuple(_REGISTRY)


def get_problem(name: str) -> BenchmarkProblem:
    if name not in _REGISTRY:
        known = ", ".join(_REGISTRY)
        raise ValueError(f"unknown problem {name!r} (available: {known})")
    return _REGISTRY[name]
