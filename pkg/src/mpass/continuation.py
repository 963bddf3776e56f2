"""Half-period continuation toward a localized connecting trajectory.

Solves the mountain-pass problem on a growing ladder of half-periods k,
warm-starting each window from the previous solution (tapered to zero at
the window edge, then zero-extended).  As k grows the periodic solutions
freeze on a common time window and their tails die off, which is the
numerical signature of convergence to a homoclinic-type trajectory of
the full problem.  The result bundles per-window solve records, pairwise
sup distances of the solutions and their first two derivatives on a
fixed comparison window, a tail amplitude profile in bands marching in
from the window edge, and a pointwise check of the sliding-window
derivative bound

    |q'(t)| <= sqrt(2) * ( int_{t-1/2}^{t+1/2} |q'|^2 + |q''|^2 )^(1/2)

evaluated with trapezoid window sums on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .action import ActionContext, GeometryConstants, geometry_constants
from .errors import (
    LadderAbortedError,
    NotAdmissibleError,
    WindowTooLargeError,
)
from .potential import (
    AuditConfig,
    HypothesisReport,
    PotentialSpec,
    check_admissibility,
    estimate_constants,
)
from .solver import SolveReport, SolverConfig, solve_mountain_pass
from .trajectory import TimeGrid, Trajectory, extend_by_zero

DEFAULT_LADDER = (1, 2, 5, 10, 20, 40, 80, 160, 250)


@dataclass
class ContinuationConfig:
    step: float = 0.05
    window: float = 10.0        # comparison window half-width (shrunk to fit)
    margin: float = 5.0         # tail band width measured from the window edge
    tail_tol: float = 1e-3
    window_tol: float = 1e-2
    ramp_nodes: int = 5         # taper width, in nodes, for warm starts
    solver: SolverConfig = field(default_factory=SolverConfig)
    audit: AuditConfig = field(default_factory=AuditConfig)
    threads: Optional[int] = None

    def resolved_threads(self) -> int:
        return self.threads if self.threads else self.audit.resolved_threads()


@dataclass
class LadderRecord:
    half_period: float
    level: Optional[float] = None
    gradient_norm: Optional[float] = None
    residual_sup: Optional[float] = None
    sup_norm: Optional[float] = None
    sobolev_norm: Optional[float] = None
    tail_sup: Optional[float] = None
    peak_time: Optional[float] = None
    outer_iterations: Optional[int] = None
    newton_iterations: Optional[int] = None
    converged: bool = False
    failure: Optional[str] = None
    solution: Optional[Trajectory] = None

    def as_dict(self) -> dict:
        return {
            "k": self.half_period,
            "level": self.level,
            "gradient_norm": self.gradient_norm,
            "residual_sup": self.residual_sup,
            "sup_norm": self.sup_norm,
            "sobolev_norm": self.sobolev_norm,
            "tail_sup": self.tail_sup,
            "peak_time": self.peak_time,
            "outer_iterations": self.outer_iterations,
            "newton_iterations": self.newton_iterations,
            "converged": self.converged,
            "failure": self.failure,
        }


@dataclass
class ContinuationResult:
    report: HypothesisReport
    geometry: GeometryConstants
    records: list
    window_distances: list
    tail_profile: list
    derivative_check: dict
    flags: dict

    def solutions(self) -> dict:
        return {
            r.half_period: r.solution for r in self.records if r.solution is not None
        }

    def as_dict(self) -> dict:
        return {
            "hypotheses": self.report.as_dict(),
            "geometry": {
                k: v for k, v in self.geometry.as_dict().items() if k != "endpoint"
            },
            "ladder": [r.as_dict() for r in self.records],
            "window_distances": self.window_distances,
            "tail_profile": self.tail_profile,
            "derivative_check": self.derivative_check,
            "flags": self.flags,
        }


# ----------------------------------------------------------------------
# warm-start embedding


def taper_embed(traj: Trajectory, half_period: float, ramp_nodes: int = 5) -> Trajectory:
    """Taper a loop to zero over a few edge nodes, then zero-extend.

    The linear ramp costs an O(edge amplitude / ramp) residual bump that
    the next Newton polish removes; without it the edge value, though
    tiny, would not be zero and the extension would be discontinuous.
    """
    n = traj.grid.node_count
    i = np.arange(n)
    w = np.minimum(1.0, np.minimum(i, n - i) / float(ramp_nodes))
    tapered = Trajectory(traj.grid, traj.values * w[:, None])
    if half_period == traj.grid.half_period:
        return tapered
    return extend_by_zero(tapered, half_period)


# ----------------------------------------------------------------------
# comparison diagnostics


def window_distance(a: Trajectory, b: Trajectory, window: float) -> dict:
    """Sup distances of two loops and their derivatives on [-window, window].

    Both grids must share the step; the window must fit inside both.
    """
    if not a.grid.same_step(b.grid):
        raise WindowTooLargeError(
            f"grids have different steps: {a.grid.step} vs {b.grid.step}"
        )
    if window > a.grid.half_period or window > b.grid.half_period:
        raise WindowTooLargeError(
            f"window {window} exceeds a half-period "
            f"({a.grid.half_period}, {b.grid.half_period})"
        )
    h = a.grid.step
    count = int(round(2.0 * window / h)) + 1

    def segment(values: np.ndarray, grid: TimeGrid) -> np.ndarray:
        start = int(round((grid.half_period - window) / h))
        return values[start:start + count]

    def sup(diff: np.ndarray) -> float:
        return float(np.sqrt((diff * diff).sum(axis=1)).max())

    pairs = (
        (a.values, b.values),
        (a.derivative(), b.derivative()),
        (a.second_derivative(), b.second_derivative()),
    )
    keys = ("value_sup", "derivative_sup", "second_derivative_sup")
    out = {"window": float(window)}
    for key, (va, vb) in zip(keys, pairs):
        out[key] = sup(segment(va, a.grid) - segment(vb, b.grid))
    return out


def derivative_window_check(traj: Trajectory, tol: float) -> dict:
    """Pointwise sliding-window derivative bound with trapezoid sums.

    Checks |q'(t_i)| <= sqrt(2) * W_i^(1/2) at every node, where W_i is
    the trapezoid approximation to the window integral of |q'|^2 +
    |q''|^2 over [t_i - 1/2, t_i + 1/2], windows wrapping periodically.
    """
    h = traj.grid.step
    m = int(round(0.5 / h))
    if m < 1:
        raise WindowTooLargeError(
            f"grid step {h} is too coarse for a half-unit window"
        )
    d1 = traj.derivative()
    d2 = traj.second_derivative()
    dens = (d1 * d1).sum(axis=1) + (d2 * d2).sum(axis=1)
    n = traj.grid.node_count
    idx = (np.arange(n)[:, None] + np.arange(-m, m + 1)[None, :]) % n
    weights = np.full(2 * m + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    windows = dens[idx] @ weights
    rhs = math.sqrt(2.0) * np.sqrt(windows)
    lhs = np.sqrt((d1 * d1).sum(axis=1))
    violation = float((lhs - rhs).max())
    return {
        "max_violation": violation,
        "bound_sup": float(rhs.max()),
        "derivative_sup": float(lhs.max()),
        "ok": bool(violation <= tol),
    }


# ----------------------------------------------------------------------
# ladder driver


def _grid_for(half_period: float, step: float) -> TimeGrid:
    return TimeGrid.from_step(half_period, step)


def run_sequence(spec: PotentialSpec, ladder=None,
                 cfg: Optional[ContinuationConfig] = None,
                 report: Optional[HypothesisReport] = None,
                 require_admissible: bool = True) -> ContinuationResult:
    """Audit, frame, then solve the ladder of half-periods in order.

    Two consecutive failed windows abort the ladder with the records
    collected so far attached to the error.  A failure is a solver
    exception or a window whose returned loop misses its tolerances.
    """
    cfg = cfg or ContinuationConfig()
    ladder = sorted(set(float(k) for k in (ladder or DEFAULT_LADDER)))
    threads = cfg.resolved_threads()

    if report is None:
        report = estimate_constants(spec, cfg.audit)
    verdict = check_admissibility(report)
    if require_admissible and not verdict.admissible:
        raise NotAdmissibleError(
            "problem failed its admissibility audit", reasons=verdict.reasons
        )

    ctx_unit = ActionContext(spec, _grid_for(1.0, cfg.step), constants=report,
                             threads=threads)
    geometry = geometry_constants(ctx_unit, report,
                                  require_admissible=require_admissible)

    records = []
    previous: Optional[Trajectory] = None
    consecutive_failures = 0

    for k in ladder:
        record = LadderRecord(half_period=k)
        records.append(record)
        try:
            grid = _grid_for(k, cfg.step)
            ctx = ActionContext(spec, grid, constants=report, threads=threads)
            endpoint = (geometry.endpoint if k == 1.0
                        else extend_by_zero(geometry.endpoint, k))
            warm = None
            if previous is not None:
                warm = taper_embed(previous, k, cfg.ramp_nodes)
            solved = solve_mountain_pass(ctx, endpoint, cfg=cfg.solver,
                                         geometry=geometry, warm_start=warm)
        except Exception as err:  # noqa: BLE001 - recorded, ladder decides
            record.failure = f"{type(err).__name__}: {err}"
            consecutive_failures += 1
            if consecutive_failures >= 2:
                raise LadderAbortedError(
                    f"windows k={records[-2].half_period:g} and k={k:g} failed",
                    records=records,
                ) from err
            continue

        q = solved.solution
        record.level = solved.level
        record.gradient_norm = solved.gradient_norm
        record.residual_sup = solved.residual_sup
        record.sup_norm = q.sup_norm()
        record.sobolev_norm = q.sobolev_norm()
        record.outer_iterations = solved.outer_iterations
        record.newton_iterations = solved.newton_iterations
        record.converged = solved.converged
        row_norms = np.sqrt((q.values**2).sum(axis=1))
        record.peak_time = float(ctx.times[int(np.argmax(row_norms))])
        tail_nodes = np.abs(ctx.times) >= k - cfg.margin
        record.tail_sup = float(row_norms[tail_nodes].max()) if tail_nodes.any() else 0.0
        record.solution = q

        if solved.converged:
            consecutive_failures = 0
            previous = q
        else:
            consecutive_failures += 1
            if consecutive_failures >= 2:
                raise LadderAbortedError(
                    f"windows up to k={k:g} failed to converge", records=records
                )

    solved_records = [r for r in records if r.solution is not None and r.converged]

    window_distances = []
    if len(solved_records) >= 2:
        t_window = min(cfg.window, min(r.half_period for r in solved_records))
        for a, b in zip(solved_records, solved_records[1:]):
            entry = window_distance(a.solution, b.solution, t_window)
            entry["k_from"] = a.half_period
            entry["k_to"] = b.half_period
            window_distances.append(entry)

    tail_profile = []
    derivative_check = {"ok": False, "max_violation": None}
    if solved_records:
        top = solved_records[-1]
        q = top.solution
        times = q.grid.nodes
        row_norms = np.sqrt((q.values**2).sum(axis=1))
        bands = int(top.half_period // cfg.margin)
        for j in range(1, bands + 1):
            lo = top.half_period - j * cfg.margin
            hi = top.half_period - (j - 1) * cfg.margin
            mask = (np.abs(times) >= lo) & (np.abs(times) <= hi)
            if mask.any():
                tail_profile.append(
                    {"band": [float(lo), float(hi)],
                     "sup": float(row_norms[mask].max())}
                )
        derivative_check = derivative_window_check(q, cfg.window_tol)

    flags = {
        "all_converged": bool(records) and all(r.converged for r in records),
        "levels_bracketed": bool(solved_records) and all(
            geometry.barrier_level - 5e-3 <= r.level <= geometry.ceiling + 1e-6
            for r in solved_records
        ),
        "norms_within_bound": bool(solved_records) and all(
            r.sobolev_norm <= geometry.norm_bound + 1e-6 for r in solved_records
        ),
        "window_distances_small": all(
            max(d["value_sup"], d["derivative_sup"], d["second_derivative_sup"])
            <= cfg.window_tol
            for d in window_distances
        ),
        "tail_below_tol": bool(solved_records)
        and solved_records[-1].tail_sup <= cfg.tail_tol,
        "derivative_bound_ok": bool(derivative_check["ok"]),
    }
    flags["ok"] = all(flags.values())

    return ContinuationResult(
        report=report,
        geometry=geometry,
        records=records,
        window_distances=window_distances,
        tail_profile=tail_profile,
        derivative_check=derivative_check,
        flags=flags,
    )
