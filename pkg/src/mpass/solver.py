"""Mountain-pass search: path deformation followed by Newton polish.

The search deforms a polygonal path of loops from the zero loop to the
negative-action endpoint.  Each iteration locates the path ceiling (the
highest vertex, sharpened by a line search over its two adjacent edges),
takes a preconditioned descent step at that vertex with an Armijo
backtracking rule, and re-spaces the vertices to equal chord length so
the moving maximum cannot hide between samples.

Descent at the ceiling cannot drive the gradient to zero: the maximum
hops between vertices once the path straddles the ridge, and the ceiling
settles a hair above the saddle value.  A stall detector watches for
that plateau and hands the located near-saddle point to a damped Newton
iteration on the discrete equation of motion, which converges
quadratically from there.  The reported convergence flags are always
evaluated at the returned loop, never inferred from the deformation
phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .action import ActionContext, GeometryConstants
from .errors import (
    CollapsedPathError,
    DivergedError,
    GridMismatchError,
    SingularJacobianError,
)
from .trajectory import Trajectory

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class NewtonConfig:
    max_iter: int = 40
    tol_residual: float = 1e-9
    damping_halvings: int = 25
    max_growth: int = 5   # consecutive non-improving iterations before giving up
    fd_step: float = 1e-6


@dataclass
class SolverConfig:
    path_points: int = 33          # odd, so a warm start sits on a vertex
    max_outer: int = 1500
    tol_grad: float = 1e-5
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    stall_window: int = 30         # plateau length that triggers Newton handoff
    stall_tol: float = 1e-10
    collapse_level: Optional[float] = None  # default: half the barrier level
    edge_scan: int = 9
    edge_golden_iters: int = 32
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if self.path_points < 3 or self.path_points % 2 == 0:
            raise ValueError("path_points must be an odd number >= 3")


@dataclass
class SolveReport:
    solution: Trajectory
    level: float
    gradient_norm: float
    residual_sup: float
    outer_iterations: int
    newton_iterations: int
    converged: bool                 # gradient and residual tolerances at the solution
    deformation_converged: bool     # deformation alone reached the gradient tolerance
    stop_reason: str
    barrier_ok: Optional[bool]      # level above the barrier (with audit slack)
    ceiling_ok: Optional[bool]      # level below the ray ceiling
    norm_ok: Optional[bool]         # Sobolev norm within the a-priori bound
    ceiling_history: list
    newton_history: list

    def as_dict(self) -> dict:
        return {
            "solution": self.solution.to_record(),
            "level": self.level,
            "gradient_norm": self.gradient_norm,
            "residual_sup": self.residual_sup,
            "outer_iterations": self.outer_iterations,
            "newton_iterations": self.newton_iterations,
            "converged": self.converged,
            "deformation_converged": self.deformation_converged,
            "stop_reason": self.stop_reason,
            "barrier_ok": self.barrier_ok,
            "ceiling_ok": self.ceiling_ok,
            "norm_ok": self.norm_ok,
            "ceiling_history": [float(v) for v in self.ceiling_history],
            "newton_history": [float(v) for v in self.newton_history],
        }


# ----------------------------------------------------------------------
# residual and Newton step


def equation_residual(ctx: ActionContext, values: np.ndarray) -> np.ndarray:
    """Discrete equation of motion q'' - grad A + grad B - f, zero at
    critical loops.  This is minus the action gradient."""
    return -ctx.gradient_at(values)


def _hessian_blocks(ctx: ActionContext, values: np.ndarray, fd_step: float) -> np.ndarray:
    """Per-node Jacobian of grad A - grad B in q, by central differences
    of the analytic gradients.  Shape (N, n, n)."""
    n = values.shape[1]
    out = np.empty((values.shape[0], n, n))
    for j in range(n):
        eps = fd_step * (1.0 + np.abs(values[:, j]))
        plus = values.copy()
        plus[:, j] += eps
        minus = values.copy()
        minus[:, j] -= eps
        diff = (
            ctx.fns.quad_grads(ctx.times, plus)
            - ctx.fns.quad_grads(ctx.times, minus)
            - ctx.fns.sup_grads(ctx.times, plus)
            + ctx.fns.sup_grads(ctx.times, minus)
        )
        out[:, :, j] = diff / (2.0 * eps[:, None])
    return out


def _newton_matrix(ctx: ActionContext, values: np.ndarray, fd_step: float):
    """Periodic (block-)tridiagonal Jacobian of the equation residual."""
    big_n, n = values.shape
    h2 = ctx.grid.step**2
    d2 = _hessian_blocks(ctx, values, fd_step)
    diag_blocks = -d2 - (2.0 / h2) * np.eye(n)[None, :, :]
    bi = np.arange(big_n)
    a = np.arange(n)
    shape = (big_n, n, n)
    rows_d = np.broadcast_to(bi[:, None, None] * n + a[None, :, None], shape).ravel()
    cols_d = np.broadcast_to(bi[:, None, None] * n + a[None, None, :], shape).ravel()
    rows_o = (bi[:, None] * n + a[None, :]).ravel()
    cols_next = (((bi + 1) % big_n)[:, None] * n + a[None, :]).ravel()
    cols_prev = (((bi - 1) % big_n)[:, None] * n + a[None, :]).ravel()
    rows = np.concatenate([rows_d, rows_o, rows_o])
    cols = np.concatenate([cols_d, cols_next, cols_prev])
    vals = np.concatenate([
        diag_blocks.ravel(),
        np.full(big_n * n, 1.0 / h2),
        np.full(big_n * n, 1.0 / h2),
    ])
    return csc_matrix((vals, (rows, cols)), shape=(big_n * n, big_n * n))


def newton_refine(ctx: ActionContext, values: np.ndarray,
                  cfg: Optional[NewtonConfig] = None) -> tuple:
    """Damped Newton iteration on the equation residual.

    Returns (values, iterations, residual_history).  The history holds
    the sup residual at each iteration entry plus the final value, so
    quadratic contraction is visible in consecutive entries.
    """
    cfg = cfg or NewtonConfig()
    q = np.array(values, dtype=np.float64)
    history = []
    growth = 0
    iterations = 0
    res = equation_residual(ctx, q)
    rs = float(np.sqrt((res * res).sum(axis=1)).max())
    for it in range(cfg.max_iter):
        history.append(rs)
        if not math.isfinite(rs):
            raise DivergedError(f"residual became non-finite at iteration {it}")
        if rs <= cfg.tol_residual:
            break
        iterations = it + 1
        matrix = _newton_matrix(ctx, q, cfg.fd_step)
        try:
            lu = splu(matrix)
        except RuntimeError as err:
            raise SingularJacobianError(str(err)) from err
        delta = lu.solve(-res.ravel()).reshape(q.shape)
        if not np.all(np.isfinite(delta)):
            raise SingularJacobianError("Newton step is not finite")
        lam = 1.0
        best_q, best_rs, best_res = None, math.inf, None
        for _ in range(cfg.damping_halvings):
            cand = q + lam * delta
            cres = equation_residual(ctx, cand)
            crs = float(np.sqrt((cres * cres).sum(axis=1)).max())
            if math.isfinite(crs) and crs < best_rs:
                best_q, best_rs, best_res = cand, crs, cres
            if math.isfinite(crs) and crs < rs:
                break
            lam *= 0.5
        if best_q is None:
            raise DivergedError("every damped Newton candidate was non-finite")
        q = best_q
        if best_rs >= rs:
            growth += 1
            if growth >= cfg.max_growth:
                raise DivergedError(
                    f"residual stopped improving at {best_rs:.3e} "
                    f"after {growth} attempts"
                )
        else:
            growth = 0
        res, rs = best_res, best_rs
    history.append(rs)
    return q, iterations, history


# ----------------------------------------------------------------------
# path utilities


def _initial_path(endpoint: np.ndarray, warm: Optional[np.ndarray], points: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, points)
    if warm is None:
        return s[:, None, None] * endpoint[None, :, :]
    path = np.empty((points,) + endpoint.shape)
    half = points // 2
    for j in range(points):
        if j <= half:
            path[j] = (j / half) * warm
        else:
            th = (j - half) / (points - 1 - half)
            path[j] = (1.0 - th) * warm + th * endpoint
    return path


def _redistribute(path: np.ndarray) -> np.ndarray:
    """Re-space interior vertices to equal chord length; endpoints are
    copied bit for bit."""
    points = path.shape[0]
    flat = path.reshape(points, -1)
    seg = np.sqrt(((flat[1:] - flat[:-1]) ** 2).sum(axis=1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] <= 0.0:
        return path.copy()
    targets = np.linspace(0.0, cum[-1], points)
    out = np.empty_like(path)
    out[0] = path[0]
    out[-1] = path[-1]
    for m in range(1, points - 1):
        idx = int(np.searchsorted(cum, targets[m]) - 1)
        idx = min(max(idx, 0), points - 2)
        gap = cum[idx + 1] - cum[idx]
        w = (targets[m] - cum[idx]) / gap if gap > 0 else 0.0
        out[m] = (1.0 - w) * path[idx] + w * path[idx + 1]
    return out


def _edge_max(ctx: ActionContext, a: np.ndarray, b: np.ndarray,
              scan: int, golden_iters: int) -> tuple:
    """Max of the action along the segment a -> b (excluding neither end)."""

    def at(theta: float):
        return (1.0 - theta) * a + theta * b

    thetas = np.linspace(0.0, 1.0, scan)
    vals = [ctx.value_at(at(th)) for th in thetas]
    i = int(np.argmax(vals))
    best_th, best = thetas[i], vals[i]
    lo = thetas[max(0, i - 1)]
    hi = thetas[min(scan - 1, i + 1)]
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    f1, f2 = ctx.value_at(at(x1)), ctx.value_at(at(x2))
    for _ in range(golden_iters):
        if f1 > f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = ctx.value_at(at(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = ctx.value_at(at(x2))
    if f1 > best:
        best_th, best = x1, f1
    if f2 > best:
        best_th, best = x2, f2
    return best, at(best_th)


def _refined_ceiling(ctx: ActionContext, path: np.ndarray, vals: np.ndarray,
                     cfg: SolverConfig) -> tuple:
    """Path ceiling sharpened over the edges adjacent to the top vertex.

    The vertex maximum alone can sit below the true path maximum once
    edges straddle the ridge, so the returned value is what stall
    detection and the Newton seed must use.
    """
    j = int(np.argmax(vals))
    best, point = float(vals[j]), path[j]
    if j > 0:
        v, p = _edge_max(ctx, path[j - 1], path[j], cfg.edge_scan, cfg.edge_golden_iters)
        if v > best:
            best, point = v, p
    if j < path.shape[0] - 1:
        v, p = _edge_max(ctx, path[j], path[j + 1], cfg.edge_scan, cfg.edge_golden_iters)
        if v > best:
            best, point = v, p
    return j, best, point


# ----------------------------------------------------------------------
# main driver


def solve_mountain_pass(ctx: ActionContext, endpoint: Trajectory,
                        cfg: Optional[SolverConfig] = None,
                        geometry: Optional[GeometryConstants] = None,
                        warm_start: Optional[Trajectory] = None) -> SolveReport:
    """Locate a nonzero critical loop at the mountain-pass level.

    endpoint must live on the context grid (zero-extend a unit-window
    endpoint first).  A warm start is threaded into the initial path as
    its exact middle vertex.  When geometry is supplied the report
    carries the barrier, ceiling and norm-bound checks, and a path whose
    ceiling drops below half the barrier level raises
    CollapsedPathError.
    """
    cfg = cfg or SolverConfig()
    ctx._require_same_grid(endpoint)
    if warm_start is not None:
        ctx._require_same_grid(warm_start)

    collapse = cfg.collapse_level
    if collapse is None and geometry is not None and geometry.barrier_level > 0:
        collapse = 0.5 * geometry.barrier_level

    path = _initial_path(endpoint.values,
                         None if warm_start is None else warm_start.values,
                         cfg.path_points)
    vals = np.array([ctx.value_at(p) for p in path])
    h = ctx.grid.step

    ceiling_history = []
    best_ceiling = math.inf
    plateau = 0
    deformation_converged = False
    stop_reason = "iteration_limit"
    outer = 0
    seed = None

    for outer in range(cfg.max_outer + 1):
        j, ceiling, seed = _refined_ceiling(ctx, path, vals, cfg)
        ceiling_history.append(ceiling)
        if collapse is not None and ceiling < collapse:
            raise CollapsedPathError(
                f"path ceiling {ceiling:.6g} fell below the collapse level "
                f"{collapse:.6g}"
            )
        grad = ctx.gradient_at(path[j])
        grad_norm = math.sqrt(h * float((grad * grad).sum()))
        if grad_norm <= cfg.tol_grad:
            deformation_converged = True
            stop_reason = "gradient_tolerance"
            break
        if ceiling < best_ceiling - cfg.stall_tol * (1.0 + abs(ceiling)):
            best_ceiling = ceiling
            plateau = 0
        else:
            plateau += 1
            if plateau >= cfg.stall_window:
                stop_reason = "stalled"
                break
        if outer == cfg.max_outer:
            break
        direction = -ctx.precondition(grad)
        slope = h * float((grad * direction).sum())
        sigma, accepted = 1.0, False
        for _ in range(cfg.max_backtracks):
            candidate = path[j] + sigma * direction
            cand_val = ctx.value_at(candidate)
            if cand_val <= vals[j] + cfg.armijo * sigma * slope:
                accepted = True
                break
            sigma *= cfg.backtrack
        if not accepted:
            stop_reason = "line_search"
            break
        path[j] = candidate
        vals[j] = cand_val
        # re-spacing may raise the vertex maximum: that is not a failure
        # but discovery, re-exposing a ridge crossing hidden in an edge.
        # Skipping it lets the path tunnel below the saddle.
        path = _redistribute(path)
        vals = np.array([ctx.value_at(p) for p in path])

    def polish(q0: np.ndarray):
        try:
            return newton_refine(ctx, q0, cfg.newton)
        except SingularJacobianError:
            q = np.array(q0)
            for _ in range(10):
                q = q - 0.1 * ctx.precondition(ctx.gradient_at(q))
            return newton_refine(ctx, q, cfg.newton)

    solution_values, newton_iters, newton_history = polish(seed)

    solution = Trajectory(ctx.grid, solution_values)
    level = ctx.value_at(solution_values)
    grad_final = ctx.gradient_at(solution_values)
    gradient_norm = math.sqrt(h * float((grad_final * grad_final).sum()))
    residual_sup = float(np.sqrt((grad_final * grad_final).sum(axis=1)).max())
    converged = (gradient_norm <= cfg.tol_grad
                 and residual_sup <= cfg.newton.tol_residual)

    barrier_ok = ceiling_ok = norm_ok = None
    if geometry is not None:
        barrier_ok = level >= geometry.barrier_level - 5e-3
        ceiling_ok = level <= geometry.ceiling + 1e-6
        norm_ok = solution.sobolev_norm() <= geometry.norm_bound + 1e-6

    return SolveReport(
        solution=solution,
        level=level,
        gradient_norm=gradient_norm,
        residual_sup=residual_sup,
        outer_iterations=outer,
        newton_iterations=newton_iters,
        converged=converged,
        deformation_converged=deformation_converged,
        stop_reason=stop_reason,
        barrier_ok=barrier_ok,
        ceiling_ok=ceiling_ok,
        norm_ok=norm_ok,
        ceiling_history=ceiling_history,
        newton_history=newton_history,
    )
