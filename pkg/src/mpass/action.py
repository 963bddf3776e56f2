"""Discrete action functional on a periodic window and its geometry.

On the uniform grid of a window [-k, k] the action of a closed loop q is

    h * sum_i [ |q_{i+1} - q_i|^2 / (2 h^2) + A(t_i, q_i) - B(t_i, q_i)
                + (f(t_i), q_i) ]

with indices mod N.  Its exact discrete gradient (the first variation
divided by h) is

    G_i = -(q_{i+1} - 2 q_i + q_{i-1}) / h^2 + grad A - grad B + f(t_i),

so critical points solve the discretized equation of motion and the
gradient doubles as the boundary-value residual.  The module also builds
the mountain-pass geometry: a barrier level on the sphere of radius
sqrt(2)/2, a scaled cosine endpoint with negative action, the ceiling of
the action along the ray to that endpoint, and the a-priori norm bound
implied by the superquadratic growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .errors import (
    GridMismatchError,
    MissingConstantsError,
    NotAdmissibleError,
    ScalingDivergedError,
)
from .potential import (
    SQRT2,
    HypothesisReport,
    PotentialSpec,
    SampledPotential,
    check_admissibility,
)
from .trajectory import TimeGrid, Trajectory

BARRIER_RADIUS = SQRT2 / 2.0

# ray scan resolution for the action ceiling
RAY_SCAN_POINTS = 513
RAY_TOL = 1e-10


class ActionContext:
    """Cached evaluator for one problem on one grid.

    Holds the node times, the forcing samples, and a lazily factorized
    shifted Laplacian (L + I) used to precondition gradients in the norm
    that the barrier and bounds live in.
    """

    def __init__(self, spec: PotentialSpec, grid: TimeGrid,
                 constants: Optional[HypothesisReport] = None, threads: int = 1):
        self.spec = spec
        self.grid = grid
        self.constants = constants
        self.fns = SampledPotential(spec, threads=threads)
        self.times = grid.nodes
        self.force_nodes = self.fns.force_values(self.times)
        self._lu = None
        self._force_window = None

    # -- norms of the data ------------------------------------------------

    @property
    def force_window_norm(self) -> float:
        """Discrete L2 norm of the forcing over this window."""
        if self._force_window is None:
            self._force_window = math.sqrt(
                self.grid.step * float((self.force_nodes**2).sum())
            )
        return self._force_window

    # -- validation -------------------------------------------------------

    def _require_same_grid(self, traj: Trajectory):
        g = traj.grid
        if g.half_period != self.grid.half_period or g.node_count != self.grid.node_count:
            raise GridMismatchError(
                f"trajectory grid (k={g.half_period}, N={g.node_count}) does not "
                f"match context grid (k={self.grid.half_period}, N={self.grid.node_count})"
            )
        if traj.dim != self.spec.dim:
            raise GridMismatchError(
                f"trajectory dim {traj.dim} does not match problem dim {self.spec.dim}"
            )

    # -- action and gradient ----------------------------------------------

    def value_at(self, values: np.ndarray) -> float:
        h = self.grid.step
        d = np.roll(values, -1, axis=0) - values
        kinetic = 0.5 / h * float((d * d).sum())
        kv = float(self.fns.quad_values(self.times, values).sum())
        wv = float(self.fns.sup_values(self.times, values).sum())
        fq = float((self.force_nodes * values).sum())
        return kinetic + h * (kv - wv + fq)

    def value(self, traj: Trajectory) -> float:
        self._require_same_grid(traj)
        return self.value_at(traj.values)

    def gradient_at(self, values: np.ndarray) -> np.ndarray:
        h = self.grid.step
        lap = (np.roll(values, -1, axis=0) - 2.0 * values
               + np.roll(values, 1, axis=0)) / (h * h)
        gk = self.fns.quad_grads(self.times, values)
        gw = self.fns.sup_grads(self.times, values)
        return -lap + gk - gw + self.force_nodes

    def gradient(self, traj: Trajectory) -> np.ndarray:
        self._require_same_grid(traj)
        return self.gradient_at(traj.values)

    def gradient_norm_at(self, values: np.ndarray) -> float:
        g = self.gradient_at(values)
        return math.sqrt(self.grid.step * float((g * g).sum()))

    def residual_sup_at(self, values: np.ndarray) -> float:
        """Sup over nodes of the equation-of-motion residual."""
        g = self.gradient_at(values)
        return float(np.sqrt((g * g).sum(axis=1)).max())

    # -- preconditioner ---------------------------------------------------

    def _factorization(self):
        if self._lu is None:
            n = self.grid.node_count
            h2 = self.grid.step**2
            main = np.full(n, 2.0 / h2 + 1.0)
            off = np.full(n - 1, -1.0 / h2)
            rows = np.concatenate([np.arange(n), np.arange(n - 1), np.arange(1, n),
                                   [0, n - 1]])
            cols = np.concatenate([np.arange(n), np.arange(1, n), np.arange(n - 1),
                                   [n - 1, 0]])
            vals = np.concatenate([main, off, off, [-1.0 / h2, -1.0 / h2]])
            self._lu = splu(csc_matrix((vals, (rows, cols)), shape=(n, n)))
        return self._lu

    def precondition(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (L + I) x = rhs columnwise, L the cyclic second-difference
        operator -(q_{i+1} - 2 q_i + q_{i-1}) / h^2."""
        return self._factorization().solve(rhs)


# ----------------------------------------------------------------------
# growth inequalities


def _require_constants(ctx: ActionContext) -> HypothesisReport:
    if ctx.constants is None:
        raise MissingConstantsError(
            "this bound needs audited constants; build the context with a report"
        )
    return ctx.constants


def superquadratic_lower_bound(ctx: ActionContext, scale: float,
                               traj: Trajectory) -> tuple:
    """(lhs, rhs) of the window lower bound on the superquadratic term.

    lhs is the discrete integral of B along the scaled loop; rhs is
    m |scale|^mu * int |q|^mu - 2 k m with m the audited sphere infimum.
    The subtraction pays for the nodes where the scaled loop is inside
    the unit ball.
    """
    rep = _require_constants(ctx)
    ctx._require_same_grid(traj)
    h = ctx.grid.step
    mu = ctx.spec.growth_exponent
    m_low = rep.sphere_min
    lhs = h * float(ctx.fns.sup_values(ctx.times, scale * traj.values).sum())
    mom = h * float((np.sqrt((traj.values**2).sum(axis=1)) ** mu).sum())
    rhs = m_low * abs(scale) ** mu * mom - 2.0 * ctx.grid.half_period * m_low
    return lhs, rhs


def scaled_action_upper_bound(ctx: ActionContext, scale: float,
                              traj: Trajectory) -> tuple:
    """(lhs, rhs): the action of the scaled loop against its growth bound.

    rhs combines the quadratic ceiling max(1, 2 * quad_upper) on the
    Sobolev norm, the superquadratic drain from the lower bound, and a
    Cauchy-Schwarz forcing term.
    """
    rep = _require_constants(ctx)
    ctx._require_same_grid(traj)
    h = ctx.grid.step
    mu = ctx.spec.growth_exponent
    m_low = rep.sphere_min
    quad_ceiling = max(1.0, 2.0 * rep.quad_upper)
    lhs = ctx.value_at(scale * traj.values)
    sob = traj.sobolev_norm()
    mom = h * float((np.sqrt((traj.values**2).sum(axis=1)) ** mu).sum())
    rhs = (
        0.5 * quad_ceiling * scale * scale * sob * sob
        - m_low * abs(scale) ** mu * mom
        + abs(scale) * ctx.force_window_norm * sob
        + 2.0 * ctx.grid.half_period * m_low
    )
    return lhs, rhs


# ----------------------------------------------------------------------
# mountain-pass geometry


@dataclass
class GeometryConstants:
    """Window-independent quantities that frame every solve."""

    barrier_radius: float   # sphere radius carrying the barrier
    barrier_level: float    # guaranteed action level on that sphere
    endpoint: Trajectory    # scaled cosine arc with nonpositive action
    endpoint_scale: float
    ceiling: float          # max action along the ray to the endpoint
    norm_bound: float       # a-priori Sobolev bound on critical loops
    quad_floor: float
    quad_ceiling: float

    def as_dict(self) -> dict:
        return {
            "barrier_radius": self.barrier_radius,
            "barrier_level": self.barrier_level,
            "endpoint_scale": self.endpoint_scale,
            "endpoint": self.endpoint.to_record(),
            "ceiling": self.ceiling,
            "norm_bound": self.norm_bound,
            "quad_floor": self.quad_floor,
            "quad_ceiling": self.quad_ceiling,
        }


def build_endpoint(ctx: ActionContext, direction: Optional[np.ndarray] = None) -> tuple:
    """Scaled cosine arc past the barrier with nonpositive action.

    Works on the unit half-period window, where cos(pi t / 2) vanishes at
    the window edge.  The scale doubles from 1 until the loop clears the
    barrier radius and its action drops to zero or below.
    """
    if ctx.grid.half_period != 1.0:
        raise GridMismatchError(
            f"endpoint construction needs half_period 1, got {ctx.grid.half_period}"
        )
    n = ctx.spec.dim
    if direction is None:
        direction = np.zeros(n)
        direction[0] = 1.0
    direction = np.asarray(direction, dtype=np.float64)
    base = np.cos(0.5 * np.pi * ctx.times)[:, None] * direction
    scale = 1.0
    for _ in range(61):
        traj = Trajectory(ctx.grid, scale * base)
        if traj.sobolev_norm() > BARRIER_RADIUS and ctx.value(traj) <= 0.0:
            return traj, scale
        scale *= 2.0
    raise ScalingDivergedError


def _ray_ceiling(ctx: ActionContext, endpoint: Trajectory) -> float:
    """Max action along s -> s * endpoint, scan plus golden polish."""
    vals = endpoint.values

    def at(s: float) -> float:
        return ctx.value_at(s * vals)

    grid_s = np.linspace(0.0, 1.0, RAY_SCAN_POINTS)
    samples = np.array([at(s) for s in grid_s])
    i = int(np.argmax(samples))
    best = float(samples[i])
    a = grid_s[max(0, i - 1)]
    b = grid_s[min(RAY_SCAN_POINTS - 1, i + 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - gr * (b - a), a + gr * (b - a)
    f1, f2 = at(x1), at(x2)
    while b - a > RAY_TOL:
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = at(x2)
    return max(best, f1, f2)


def geometry_constants(ctx: ActionContext, report: Optional[HypothesisReport] = None,
                       require_admissible: bool = True) -> GeometryConstants:
    """Assemble the mountain-pass frame on the unit half-period window.

    The barrier level is (sqrt(2)/2) * (budget - forcing_norm); the norm
    bound is the positive root of

        (quad_floor / 2) x^2 - budget * (mu-1)/(mu-2) x - mu/(mu-2) * ceiling

    so any critical loop with action at most the ceiling stays inside it.
    """
    if report is None:
        report = _require_constants(ctx)
    verdict = check_admissibility(report)
    if require_admissible and not verdict.admissible:
        raise NotAdmissibleError(
            "problem failed its admissibility audit", reasons=verdict.reasons
        )
    endpoint, scale = build_endpoint(ctx)
    ceiling = _ray_ceiling(ctx, endpoint)
    barrier_level = (SQRT2 / 2.0) * (report.forcing_budget - report.forcing_norm)
    mu = ctx.spec.growth_exponent
    c1 = (mu - 1.0) / (mu - 2.0)
    c2 = mu / (mu - 2.0)
    floor = report.quad_floor
    budget = report.forcing_budget
    disc = (budget * c1) ** 2 + 2.0 * floor * c2 * max(ceiling, 0.0)
    norm_bound = (budget * c1 + math.sqrt(disc)) / floor if floor > 0 else math.inf
    return GeometryConstants(
        barrier_radius=BARRIER_RADIUS,
        barrier_level=barrier_level,
        endpoint=endpoint,
        endpoint_scale=scale,
        ceiling=ceiling,
        norm_bound=norm_bound,
        quad_floor=floor,
        quad_ceiling=max(1.0, 2.0 * report.quad_upper),
    )
