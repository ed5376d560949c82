"""Convergence study harness.

Runs grids of (degree, mesh) cells on a named benchmark problem, measures
true errors against the exact solution, evaluates the a posteriori bound,
and serializes rows as CSV or JSON.  Two canonical modes mirror the usual
convergence experiments: shrink the time step at fixed degree (h-study) or
raise the degree at fixed step (p-study).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import poly_eval
from .estimator import estimate, reconstruct
from .solver import (
    CgSolution,
    CgSolverError,
    ContractionPolicy,
    SolverOptions,
    StepSolver,
    TimePartition,
    integrate,
    nodal_norm_drift,
)

__all__ = [
    "ConfigError",
    "StudyMode",
    "OutputFormat",
    "StudyConfig",
    "StudyRow",
    "SATURATION_FLOOR",
    "linf_error",
    "eoc",
    "run_study",
    "write_rows",
    "rows_to_csv_text",
    "rows_to_json_text",
    "parse_config_file",
    "config_from_mapping",
    "CSV_HEADER",
]

SATURATION_FLOOR = 1e-12

CSV_HEADER = (
    "r",
    "M",
    "k",
    "linf_error",
    "estimator_bound",
    "effectivity",
    "eoc_error",
    "eoc_bound",
    "norm_drift",
    "picard_iters",
    "wall_time",
)


class ConfigError(ValueError):
    """Invalid study configuration (bad key, value, or combination)."""


class StudyMode(Enum):
    HSTUDY = "hstudy"
    PSTUDY = "pstudy"
    SINGLE = "single"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to run one study.

    ``mesh_counts`` drives the h-study (and the single mode, which uses its
    first entry); ``step_size`` drives the p-study, whose mesh count is
    T / step_size.  ``figures`` controls whether plots are rendered next to
    the output file.
    """

    problem: str
    mode: StudyMode
    degrees: tuple
    mesh_counts: tuple = ()
    T: float = 4.0
    step_size: float = 1.0
    solver: SolverOptions = SolverOptions()
    output_path: Optional[str] = None
    output_format: OutputFormat = OutputFormat.CSV
    figures: bool = True

    def __post_init__(self):
        if not self.problem:
            raise ConfigError("problem name must not be empty")
        if self.T <= 0.0:
            raise ConfigError("final time T must be positive")
        degrees = tuple(int(r) for r in self.degrees)
        if not degrees:
            raise ConfigError("need at least one polynomial degree")
        if any(r < 1 or r > 32 for r in degrees):
            raise ConfigError("polynomial degrees must lie in [1, 32]")
        meshes = tuple(int(M) for M in self.mesh_counts)
        if any(M < 1 for M in meshes):
            raise ConfigError("mesh counts must be positive")
        if self.mode in (StudyMode.HSTUDY, StudyMode.SINGLE) and not meshes:
            raise ConfigError(f"{self.mode.value} needs at least one mesh count")
        if self.step_size <= 0.0:
            raise ConfigError("step size must be positive")
        if self.mode is StudyMode.PSTUDY:
            self._pstudy_mesh_count()  # validates divisibility
        object.__setattr__(self, "degrees", tuple(sorted(set(degrees))))
        object.__setattr__(self, "mesh_counts", tuple(sorted(set(meshes))))

    def _pstudy_mesh_count(self) -> int:
        M = int(round(self.T / self.step_size))
        if M < 1 or abs(M * self.step_size - self.T) > 1e-9 * max(1.0, abs(self.T)):
            raise ConfigError(
                f"final time {self.T} is not an integer multiple of step size {self.step_size}"
            )
        return M

    def cells(self):
        """The (degree, mesh count) pairs this study visits, sorted."""
        if self.mode is StudyMode.HSTUDY:
            return [(r, M) for r in self.degrees for M in self.mesh_counts]
        if self.mode is StudyMode.PSTUDY:
            M = self._pstudy_mesh_count()
            return [(r, M) for r in self.degrees]
        return [(self.degrees[0], self.mesh_counts[0])]


@dataclass
class StudyRow:
    """One study cell: solve metrics plus convergence-order columns.

    ``eoc_error`` and ``eoc_bound`` are filled only for consecutive mesh
    pairs at fixed degree in an h-study, and only when both values sit
    above the round-off saturation floor.  ``error`` carries the failure
    message when the solver did not finish the cell.
    """

    r: int
    M: int
    k: float
    linf_error: float
    estimator_bound: float
    effectivity: float
    eoc_error: Optional[float] = None
    eoc_bound: Optional[float] = None
    norm_drift: float = float("nan")
    total_picard_iters: int = 0
    wall_time: float = 0.0
    error: Optional[str] = None


def linf_error(
    sol: CgSolution, exact: Callable[[float], np.ndarray], samples_per_interval: int = 33
) -> float:
    """Max distance to the exact solution over an equispaced sample grid
    per interval, endpoints included."""
    if samples_per_interval < 2:
        raise ValueError("need at least two samples per interval")
    worst = 0.0
    for m in range(sol.partition.num_steps):
        iv = sol.partition.interval(m)
        ts = np.linspace(iv.a, iv.b, samples_per_interval)
        uvals = poly_eval(sol.locals[m], ts)
        evals = np.asarray([exact(float(t)) for t in ts], dtype=float)
        worst = max(worst, float(np.max(np.linalg.norm(uvals - evals, axis=1))))
    return worst


def eoc(errors: Sequence[float], steps: Sequence[float]) -> np.ndarray:
    """Empirical convergence orders log(e_i/e_{i-1}) / log(k_i/k_{i-1})."""
    errors = np.asarray(errors, dtype=float)
    steps = np.asarray(steps, dtype=float)
    if errors.ndim != 1 or errors.shape != steps.shape or errors.size < 2:
        raise ValueError("need matching error and step sequences of length >= 2")
    if np.any(errors <= 0.0) or np.any(steps <= 0.0):
        raise ValueError("errors and steps must be positive")
    return np.log(errors[1:] / errors[:-1]) / np.log(steps[1:] / steps[:-1])


def _run_cell(problem, r: int, M: int, config: StudyConfig, measure_time: bool) -> StudyRow:
    T = config.T
    k = T / M
    start = time.perf_counter()
    try:
        partition = TimePartition.uniform(T, M, r)
        sol = integrate(problem.rhs, partition, problem.u0, config.solver)
        recon = reconstruct(problem.rhs, sol, config.solver)
        report = estimate(problem.rhs, sol, recon, None, config.solver)
    except CgSolverError as err:
        wall = time.perf_counter() - start if measure_time else 0.0
        return StudyRow(
            r=r,
            M=M,
            k=k,
            linf_error=float("nan"),
            estimator_bound=float("nan"),
            effectivity=float("nan"),
            wall_time=wall,
            error=str(err),
        )
    wall = time.perf_counter() - start if measure_time else 0.0
    err_val = linf_error(sol, problem.exact) if problem.exact is not None else float("nan")
    bound = float(report.bound[-1])
    eff = bound / err_val if err_val > 0.0 else float("nan")
    return StudyRow(
        r=r,
        M=M,
        k=k,
        linf_error=err_val,
        estimator_bound=bound,
        effectivity=eff,
        norm_drift=nodal_norm_drift(sol),
        total_picard_iters=int(sum(sol.picard_iterations)),
        wall_time=wall,
    )


def _fill_eoc(rows) -> None:
    """Convergence orders for consecutive mesh pairs at fixed degree."""
    by_degree = {}
    for row in rows:
        by_degree.setdefault(row.r, []).append(row)
    for group in by_degree.values():
        group.sort(key=lambda row: row.M)
        for prev, cur in zip(group, group[1:]):
            if prev.error is not None or cur.error is not None:
                continue
            if min(prev.linf_error, cur.linf_error) >= SATURATION_FLOOR:
                cur.eoc_error = float(eoc([prev.linf_error, cur.linf_error], [prev.k, cur.k])[0])
            if min(prev.estimator_bound, cur.estimator_bound) >= SATURATION_FLOOR:
                cur.eoc_bound = float(
                    eoc([prev.estimator_bound, cur.estimator_bound], [prev.k, cur.k])[0]
                )


def run_study(config: StudyConfig, *, measure_time: bool = True):
    """Run every cell of the study and return the rows sorted by (r, M).

    Writes the serialized rows to ``config.output_path`` when set.  With
    ``measure_time`` disabled, wall_time is reported as 0.0 so repeated
    runs serialize to identical bytes.  Figure rendering is the command
    line layer's job; see ``figures.render_study_figures``.
    """
    from .problems import get_problem

    problem = get_problem(config.problem)
    rows = [_run_cell(problem, r, M, config, measure_time) for r, M in config.cells()]
    rows.sort(key=lambda row: (row.r, row.M))
    if config.mode is StudyMode.HSTUDY:
        _fill_eoc(rows)
    if config.output_path:
        write_rows(rows, config.output_path, config.output_format)
    return rows


def _row_record(row: StudyRow) -> dict:
    return {
        "r": row.r,
        "M": row.M,
        "k": row.k,
        "linf_error": row.linf_error,
        "estimator_bound": row.estimator_bound,
        "effectivity": row.effectivity,
        "eoc_error": row.eoc_error,
        "eoc_bound": row.eoc_bound,
        "norm_drift": row.norm_drift,
        "picard_iters": row.total_picard_iters,
        "wall_time": row.wall_time,
    }


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def rows_to_csv_text(rows) -> str:
    """Serialize rows as CSV with a fixed header and newline line endings.

    A trailing ``error`` column appears only when some cell failed, so
    clean runs keep the exact canonical header.
    """
    has_error = any(row.error is not None for row in rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(CSV_HEADER) + (["error"] if has_error else [])
    writer.writerow(header)
    for row in rows:
        record = _row_record(row)
        values = [_csv_value(record[key]) for key in CSV_HEADER]
        if has_error:
            values.append(row.error or "")
        writer.writerow(values)
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def rows_to_json_text(rows) -> str:
    """Serialize rows as a JSON array of objects with the CSV field names.

    Absent orders and NaN metrics become null, keeping the output strictly
    standard JSON.
    """
    has_error = any(row.error is not None for row in rows)
    data = []
    for row in rows:
        record = {key: _json_value(value) for key, value in _row_record(row).items()}
        if has_error:
            record["error"] = row.error
        data.append(record)
    return json.dumps(data, indent=2) + "\n"


def write_rows(rows, path, fmt: OutputFormat = OutputFormat.CSV) -> None:
    text = rows_to_csv_text(rows) if fmt is OutputFormat.CSV else rows_to_json_text(rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)


_SOLVER_KEYS = {
    "quad_points_offset": int,
    "picard_tol_rel": float,
    "picard_tol_abs": float,
    "picard_max_iters": int,
    "contraction_policy": ContractionPolicy,
    "standard_cg": bool,
    "step_solver": StepSolver,
}

_CONFIG_KEYS = {
    "problem",
    "mode",
    "T",
    "degrees",
    "meshes",
    "step",
    "out",
    "format",
    "figures",
    *_SOLVER_KEYS,
}

_DEFAULT_DEGREES = {
    StudyMode.HSTUDY: (1, 2, 3, 4),
    StudyMode.PSTUDY: tuple(range(1, 17)),
    StudyMode.SINGLE: (1,),
}

_DEFAULT_MESHES = {
    StudyMode.HSTUDY: (8, 16, 32, 64, 128),
    StudyMode.PSTUDY: (),
    StudyMode.SINGLE: (8,),
}

_BOOL_WORDS = {
    "true": True,
    "false": False,
    "yes": True,
    "no": False,
    "on": True,
    "off": False,
    "1": True,
    "0": False,
}


def _parse_bool(text: str, key: str) -> bool:
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"invalid boolean for {key!r}: {text!r}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"invalid number for {key!r}: {text!r}") from None


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"invalid integer for {key!r}: {text!r}") from None


def _parse_int_list(text: str, key: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError(f"empty list for {key!r}")
    return tuple(_parse_int(p, key) for p in parts)


def _parse_enum(enum_cls, text: str, key: str):
    try:
        return enum_cls(text.strip().lower())
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"invalid value for {key!r}: {text!r} (choices: {choices})") from None


def config_from_mapping(mapping: dict) -> StudyConfig:
    """Build a validated StudyConfig from flat string key/value pairs."""
    unknown = sorted(set(mapping) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "problem" not in mapping:
        raise ConfigError("missing required key: problem")
    mode = _parse_enum(StudyMode, mapping.get("mode", "single"), "mode")

    solver_kwargs = {}
    for key, kind in _SOLVER_KEYS.items():
        if key not in mapping:
            continue
        raw = mapping[key]
        if kind is bool:
            solver_kwargs[key] = _parse_bool(raw, key)
        elif kind is int:
            solver_kwargs[key] = _parse_int(raw, key)
        elif kind is float:
            solver_kwargs[key] = _parse_float(raw, key)
        else:
            solver_kwargs[key] = _parse_enum(kind, raw, key)
    try:
        solver = SolverOptions(**solver_kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    degrees = (
        _parse_int_list(mapping["degrees"], "degrees")
        if "degrees" in mapping
        else _DEFAULT_DEGREES[mode]
    )
    meshes = (
        _parse_int_list(mapping["meshes"], "meshes")
        if "meshes" in mapping
        else _DEFAULT_MESHES[mode]
    )
    out = mapping.get("out") or None
    figures = _parse_bool(mapping["figures"], "figures") if "figures" in mapping else bool(out)
    return StudyConfig(
        problem=mapping["problem"],
        mode=mode,
        degrees=degrees,
        mesh_counts=meshes,
        T=_parse_float(mapping.get("T", "4"), "T"),
        step_size=_parse_float(mapping.get("step", "1"), "step"),
        solver=solver,
        output_path=out,
        output_format=_parse_enum(OutputFormat, mapping.get("format", "csv"), "format"),
        figures=figures,
    )


def parse_config_file(path) -> dict:
    """Read a flat ``key = value`` config file into a string mapping.

    Blank lines and ``#`` comments are skipped; duplicate keys are errors.
    """
    mapping = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in mapping:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            mapping[key] = value
    return mapping
