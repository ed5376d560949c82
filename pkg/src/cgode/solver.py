"""Continuous Galerkin time stepping with a projected right-hand side.

One step seeks the degree-r polynomial U on I_m = (t_{m-1}, t_m) with
U(t_{m-1}) = u_prev and

    U(t) = u_prev + int_{t_{m-1}}^t  P_{r-1} F(tau, (P_{r-1} U)(tau)) dtau,

where P_{r-1} is the L2 projection onto polynomials of degree r-1 on I_m.
Feeding F the *projected* trajectory (rather than U itself) is what makes the
nodal values of the marched solution stay on the sphere ||v|| = ||u0|| for
right-hand sides with <F(t, v), v> = 0.

The fixed point is solved by Picard iteration, which contracts whenever
k_m * L_m < sqrt(2) for a Lipschitz bound L_m of F on the step.  For linear
right-hand sides F(t, v) = A(t) v the same discrete equations can instead be
assembled and solved directly; that path has no step-size restriction and is
used by default when the operator advertises its matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .basis import (
    Interval,
    LocalPoly,
    antiderivative_from_left,
    derivative,
    gauss_rule,
    legendre_values,
    poly_eval,
    project,
)

__all__ = [
    "ContractionPolicy",
    "StepSolver",
    "CgSolverError",
    "PicardDiverged",
    "ContractionViolated",
    "ContractionWarning",
    "RhsOperator",
    "TimePartition",
    "SolverOptions",
    "CgSolution",
    "locate_interval",
    "check_contraction",
    "solve_step",
    "integrate",
    "nodal_norm_drift",
    "weak_residual",
]

_SQRT2 = math.sqrt(2.0)


class ContractionPolicy(Enum):
    """What to do when a step violates k * L < sqrt(2)."""

    ERROR = "error"
    WARN = "warn"
    IGNORE = "ignore"


class StepSolver(Enum):
    """How solve_step resolves the per-step fixed point."""

    AUTO = "auto"      # direct solve for linear operators, Picard otherwise
    PICARD = "picard"  # always iterate
    DIRECT = "direct"  # require linear structure, assemble and solve


class CgSolverError(RuntimeError):
    """Base class for step-solver failures."""


class PicardDiverged(CgSolverError):
    """Fixed-point iteration hit the iteration cap (or blew up)."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ContractionViolated(CgSolverError):
    """Step refused because k * L >= sqrt(2) under the ERROR policy."""


class ContractionWarning(UserWarning):
    """Step taken although the contraction guarantee does not apply."""


@dataclass(frozen=True)
class RhsOperator:
    """Right-hand side F(t, v) of the dynamical system.

    ``eval`` maps (t, v) to a vector of the same dimension.  ``lipschitz``,
    when given, returns a Lipschitz bound of F over an interval and enables
    the contraction check.  ``claims_orthogonal`` asserts <F(t,v), v> = 0
    (trajectories stay on a sphere); ``claims_lower_adjoint`` asserts
    <F(v), w> >= -<v, F(w)>.  Neither claim is enforced at runtime; the test
    suite spot-checks them for the built-in problems.  ``matrix``, when set,
    declares F(t, v) = matrix(t) @ v and unlocks the direct step solver.
    """

    dim: int
    eval: Callable[[float, np.ndarray], np.ndarray]
    lipschitz: Optional[Callable[[Interval], float]] = None
    claims_orthogonal: bool = False
    claims_lower_adjoint: bool = False
    matrix: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")


@dataclass(frozen=True, eq=False)
class TimePartition:
    """Time nodes 0 = t_0 < ... < t_M = T with a degree r_m >= 1 per step."""

    nodes: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        degrees = np.asarray(self.degrees, dtype=int)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("need at least two time nodes")
        if nodes[0] != 0.0:
            raise ValueError("partition must start at t = 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("time nodes must be strictly increasing")
        if degrees.shape != (nodes.size - 1,):
            raise ValueError("need one polynomial degree per step")
        if np.any(degrees < 1):
            raise ValueError("polynomial degrees must be >= 1")
        for name, arr in (("nodes", nodes), ("degrees", degrees)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, T: float, num_steps: int, degree) -> "TimePartition":
        """Uniform partition of (0, T) with a common degree (or one per step)."""
        if num_steps < 1:
            raise ValueError("need at least one step")
        nodes = np.linspace(0.0, T, num_steps + 1)
        degrees = np.broadcast_to(np.asarray(degree, dtype=int), (num_steps,)).copy()
        return cls(nodes, degrees)

    @property
    def num_steps(self) -> int:
        return self.nodes.size - 1

    @property
    def final_time(self) -> float:
        return float(self.nodes[-1])

    def interval(self, m: int) -> Interval:
        return Interval(float(self.nodes[m]), float(self.nodes[m + 1]))


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the per-step solver.

    The quadrature uses q_m = r_m + quad_points_offset Gauss points; the
    default offset of 4 is exact for polynomial integrands up to degree
    2 r_m + 7.  ``standard_cg`` drops the inner projection (F is fed the
    iterate itself), giving the classical scheme for comparison runs; it
    forfeits nodal norm preservation.
    """

    quad_points_offset: int = 4
    picard_tol_rel: float = 1e-12
    picard_tol_abs: float = 1e-14
    picard_max_iters: int = 100
    contraction_policy: ContractionPolicy = ContractionPolicy.WARN
    standard_cg: bool = False
    step_solver: StepSolver = StepSolver.AUTO

    def __post_init__(self):
        if self.quad_points_offset < 0:
            raise ValueError("quadrature offset must be >= 0")
        if self.picard_tol_rel <= 0.0 or self.picard_tol_abs <= 0.0:
            raise ValueError("Picard tolerances must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("need at least one Picard iteration")


def locate_interval(partition: TimePartition, t: float) -> int:
    """Index of the partition interval containing t (the last one at t = T)."""
    nodes = partition.nodes
    tol = 1e-12 * max(1.0, abs(nodes[-1]))
    if t < nodes[0] - tol or t > nodes[-1] + tol:
        raise ValueError(f"time {t} outside partition [0, {nodes[-1]}]")
    m = int(np.searchsorted(nodes, t, side="right")) - 1
    return min(max(m, 0), partition.num_steps - 1)


@dataclass(frozen=True, eq=False)
class CgSolution:
    """Globally continuous piecewise polynomial plus solver diagnostics."""

    partition: TimePartition
    locals: tuple
    picard_iterations: tuple
    u0: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        return poly_eval(self.locals[locate_interval(self.partition, t)], t)

    def nodal_values(self) -> np.ndarray:
        """Solution values at the time nodes, shape (M + 1, dim).

        Row 0 is the initial value itself; row m is the right endpoint value
        of step m, i.e. exactly the seed the march handed to the next step.
        """
        vals = [self.u0]
        for m, piece in enumerate(self.locals):
            vals.append(poly_eval(piece, self.partition.nodes[m + 1]))
        return np.asarray(vals)


def check_contraction(interval: Interval, L: float) -> bool:
    """True iff k * L < sqrt(2), the sufficient bound for Picard contraction."""
    if L < 0.0:
        raise ValueError("Lipschitz bound must be nonnegative")
    return interval.k * L < _SQRT2


def _apply_contraction_policy(F: RhsOperator, interval: Interval, opts: SolverOptions):
    if F.lipschitz is None or opts.contraction_policy is ContractionPolicy.IGNORE:
        return
    L = float(F.lipschitz(interval))
    if check_contraction(interval, L):
        return
    msg = (
        f"step ({interval.a:g}, {interval.b:g}) has k*L = {interval.k * L:.3g} >= sqrt(2); "
        "the contraction guarantee does not apply"
    )
    if opts.contraction_policy is ContractionPolicy.ERROR:
        raise ContractionViolated(msg)
    warnings.warn(msg, ContractionWarning, stacklevel=3)


def _fixed_point_image(coeffs, fvals, u_prev, rule, interval, r):
    """u_prev + antiderivative of the degree-(r-1) projection of the F samples."""
    g = project(fvals, rule, r - 1, interval)
    acc = antiderivative_from_left(g)
    out = acc.coeffs.copy()
    out[0] += u_prev
    return out


def _eval_truncated(coeffs, leg, inner_deg):
    """Values at the quadrature nodes of the series truncated to inner_deg."""
    return leg[: inner_deg + 1].T @ coeffs[: inner_deg + 1]


def solve_step(
    F: RhsOperator,
    u_prev: np.ndarray,
    interval: Interval,
    r: int,
    opts: Optional[SolverOptions] = None,
    *,
    residuals: Optional[list] = None,
):
    """Solve one cG step on ``interval`` with trial degree ``r``.

    Returns ``(poly, iterations)`` where ``poly`` is the degree-r solution
    polynomial and ``iterations`` counts Picard sweeps (1 for a direct
    linear solve).  ``residuals``, if a list is passed, collects the max
    coefficient change per Picard iteration.

    Raises PicardDiverged when the iteration cap is exceeded and
    ContractionViolated when k * L >= sqrt(2) under the ERROR policy.
    """
    if r < 1:
        raise ValueError("trial degree must be >= 1")
    opts = opts or SolverOptions()
    u_prev = np.asarray(u_prev, dtype=float)
    if u_prev.shape != (F.dim,):
        raise ValueError(f"initial value has shape {u_prev.shape}, expected ({F.dim},)")

    _apply_contraction_policy(F, interval, opts)

    q = r + opts.quad_points_offset
    rule = gauss_rule(q)
    times = rule.mapped_nodes(interval)
    leg = legendre_values(r, rule.nodes)  # (r+1, q)
    inner_deg = r if opts.standard_cg else r - 1

    mode = opts.step_solver
    if mode is StepSolver.AUTO:
        mode = StepSolver.DIRECT if F.matrix is not None else StepSolver.PICARD
    elif mode is StepSolver.DIRECT and F.matrix is None:
        raise ValueError("direct step solver requires a linear operator (matrix is None)")

    if mode is StepSolver.DIRECT:
        coeffs = _solve_linear(F, u_prev, interval, r, rule, times, leg, inner_deg)
        return LocalPoly(interval, coeffs), 1

    coeffs = np.zeros((r + 1, F.dim))
    coeffs[0] = u_prev
    for it in range(1, opts.picard_max_iters + 1):
        vals = _eval_truncated(coeffs, leg, inner_deg)
        fvals = np.asarray([F.eval(t, v) for t, v in zip(times, vals)], dtype=float)
        new = _fixed_point_image(coeffs, fvals, u_prev, rule, interval, r)
        res = float(np.max(np.abs(new - coeffs)))
        if residuals is not None:
            residuals.append(res)
        if not np.isfinite(res):
            raise PicardDiverged(
                f"Picard iteration blew up after {it} iterations", res, it
            )
        coeffs = new
        if res <= opts.picard_tol_abs + opts.picard_tol_rel * float(np.max(np.abs(new))):
            return LocalPoly(interval, coeffs), it
    raise PicardDiverged(
        f"Picard iteration did not converge in {opts.picard_max_iters} iterations "
        f"(last residual {res:.3g})",
        res,
        opts.picard_max_iters,
    )


def _solve_linear(F, u_prev, interval, r, rule, times, leg, inner_deg):
    """Assemble and solve the step equations for F(t, v) = A(t) v directly.

    The Picard map is affine, T(c) = b + M c; its unique fixed point solves
    (I - M) c = b.  M is built column-by-column by pushing basis coefficient
    vectors through the same truncation / sample / project / integrate
    pipeline the Picard path uses, so both paths satisfy identical discrete
    equations.
    """
    n = F.dim
    amats = np.asarray([F.matrix(t) for t in times], dtype=float)  # (q, n, n)
    zero = np.zeros(n)

    def homogeneous(coeffs):
        vals = _eval_truncated(coeffs, leg, inner_deg)
        fvals = np.einsum("qij,qj->qi", amats, vals)
        return _fixed_point_image(coeffs, fvals, zero, rule, interval, r)

    ncoef = (r + 1) * n
    M = np.empty((ncoef, ncoef))
    basis = np.zeros((r + 1, n))
    for col in range(ncoef):
        basis.flat[col] = 1.0
        M[:, col] = homogeneous(basis).ravel()
        basis.flat[col] = 0.0
    b = np.zeros((r + 1, n))
    b[0] = u_prev
    try:
        coeffs = np.linalg.solve(np.eye(ncoef) - M, b.ravel())
    except np.linalg.LinAlgError as err:
        raise CgSolverError(f"direct step solve failed: {err}") from err
    return coeffs.reshape(r + 1, n)


def integrate(
    F: RhsOperator,
    partition: TimePartition,
    u0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> CgSolution:
    """March solve_step across the partition, seeding each step with the
    previous endpoint value, and return the globally continuous solution."""
    opts = opts or SolverOptions()
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (F.dim,):
        raise ValueError(f"initial value has shape {u0.shape}, expected ({F.dim},)")
    pieces = []
    iters = []
    u_prev = u0
    for m in range(partition.num_steps):
        iv = partition.interval(m)
        try:
            poly, its = solve_step(F, u_prev, iv, int(partition.degrees[m]), opts)
        except PicardDiverged as err:
            raise PicardDiverged(
                f"interval {m + 1} ({iv.a:g}, {iv.b:g}): {err}", err.residual, err.iterations
            ) from err
        except CgSolverError as err:
            raise type(err)(f"interval {m + 1} ({iv.a:g}, {iv.b:g}): {err}") from err
        pieces.append(poly)
        iters.append(its)
        u_prev = poly_eval(poly, iv.b)
    return CgSolution(partition, tuple(pieces), tuple(iters), u0)


def nodal_norm_drift(sol: CgSolution) -> float:
    """Largest deviation of the nodal solution norms from ||u0||."""
    base = float(np.linalg.norm(sol.u0))
    norms = np.linalg.norm(sol.nodal_values(), axis=1)
    return float(np.max(np.abs(norms - base)))


def weak_residual(F: RhsOperator, local: LocalPoly, opts: Optional[SolverOptions] = None) -> np.ndarray:
    """Defect of one solved step in its defining weak form.

    Returns the (r, dim) array of integrals over the step of
    (dU/dt - F(t, truncated U)) against each Legendre test polynomial of
    degree < r, evaluated with the solver's own quadrature.  All entries
    vanish to solver accuracy when ``local`` solves the step equations.
    """
    opts = opts or SolverOptions()
    r = local.deg
    interval = local.interval
    rule = gauss_rule(r + opts.quad_points_offset)
    times = rule.mapped_nodes(interval)
    leg = legendre_values(r, rule.nodes)
    inner_deg = r if opts.standard_cg else r - 1
    uvals = _eval_truncated(local.coeffs, leg, inner_deg)
    fvals = np.asarray([F.eval(t, v) for t, v in zip(times, uvals)], dtype=float)
    dvals = poly_eval(derivative(local), times)
    mismatch = dvals - fvals  # (q, dim)
    tested = leg[:r] * rule.weights  # (r, q)
    return 0.5 * interval.k * (tested @ mismatch)
