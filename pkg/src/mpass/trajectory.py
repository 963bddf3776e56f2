"""Periodic trajectories on uniform time grids.

A trajectory is a sampled loop q : [-k, k] -> R^n with q(-k) = q(k),
stored as node values on the uniform grid t_i = -k + i*h, i = 0..N-1,
h = 2k/N.  The node at +k is identified with node 0 and never stored.

Norms use the discrete counterparts of the one-period integrals

    |q|_sob^2  = int (|q'|^2 + |q|^2) dt      (forward differences)
    |q|_l2^2   = int |q|^2 dt
    |q|_sup    = sup |q(t)|

with the composite trapezoid rule on the periodic grid, which under
periodicity equals the plain rectangle sum h * sum_i g_i.  Forward
differences inside the Sobolev norm keep the discrete action's gradient
exactly equal to the second-difference stencil used by the solver.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import EndpointNotZeroError, GridMismatchError

# Tolerance for "the endpoint value is zero" when zero-extending.
TOL_EMBED = 1e-10

# Relative tolerance for "two grids share the same step".
_STEP_RTOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform periodic grid on [-half_period, half_period].

    The step is always derived as 2*half_period/node_count, never given
    directly, so node_count*step recovers the period exactly in floating
    point whenever the division is exact.
    """

    half_period: float
    node_count: int

    def __post_init__(self):
        k = float(self.half_period)
        if not np.isfinite(k) or k <= 0:
            raise ValueError(f"half_period must be positive and finite, got {k}")
        if int(self.node_count) != self.node_count or self.node_count < 4:
            raise ValueError(f"node_count must be an integer >= 4, got {self.node_count}")
        object.__setattr__(self, "half_period", k)
        object.__setattr__(self, "node_count", int(self.node_count))

    @property
    def step(self) -> float:
        return 2.0 * self.half_period / self.node_count

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node times t_i = -k + i*h as a read-only array."""
        t = -self.half_period + self.step * np.arange(self.node_count)
        t.setflags(write=False)
        return t

    @classmethod
    def from_step(cls, half_period: float, step: float) -> "TimeGrid":
        """Grid whose step is as close as possible to the requested one.

        node_count is rounded; the actual step is 2k/N as always.  The
        request must land within 1e-9 of an integer node count.
        """
        n = 2.0 * half_period / step
        count = int(round(n))
        if abs(n - count) > 1e-9 * max(1.0, n):
            raise GridMismatchError(
                f"step {step} does not divide the period 2*{half_period} into whole nodes"
            )
        return cls(half_period, count)

    def same_step(self, other: "TimeGrid") -> bool:
        return abs(self.step - other.step) <= _STEP_RTOL * max(self.step, other.step)


def forward_difference(values: np.ndarray, step: float) -> np.ndarray:
    """(q_{i+1} - q_i)/h with periodic wrap."""
    return (np.roll(values, -1, axis=0) - values) / step


def backward_difference(values: np.ndarray, step: float) -> np.ndarray:
    """(q_i - q_{i-1})/h with periodic wrap."""
    return (values - np.roll(values, 1, axis=0)) / step


def central_difference(values: np.ndarray, step: float) -> np.ndarray:
    """(q_{i+1} - q_{i-1})/(2h) with periodic wrap."""
    return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * step)


def second_difference(values: np.ndarray, step: float) -> np.ndarray:
    """(q_{i-1} - 2 q_i + q_{i+1})/h^2 with periodic wrap.

    Algebraically identical to backward_difference(forward_difference(.)).
    """
    return (
        np.roll(values, 1, axis=0) - 2.0 * values + np.roll(values, -1, axis=0)
    ) / step**2


@dataclass
class Trajectory:
    """Node values of a periodic loop, shape (node_count, dim)."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.node_count:
            raise ValueError(
                f"values must have shape ({self.grid.node_count}, dim), got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory values must be finite")
        self.values = v

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    # ------------------------------------------------------------------
    # norms

    def sobolev_norm(self) -> float:
        h = self.grid.step
        dq = forward_difference(self.values, h)
        return float(np.sqrt(h * (np.sum(dq * dq) + np.sum(self.values * self.values))))

    def l2_norm(self) -> float:
        h = self.grid.step
        return float(np.sqrt(h * np.sum(self.values * self.values)))

    def sup_norm(self) -> float:
        """Max over nodes of the euclidean node norm."""
        return float(np.sqrt((self.values * self.values).sum(axis=1).max()))

    # ------------------------------------------------------------------
    # calculus

    def derivative(self) -> "Trajectory":
        """Central-difference velocity on the same grid (diagnostics)."""
        return Trajectory(self.grid, central_difference(self.values, self.grid.step))

    def second_derivative(self) -> "Trajectory":
        """Three-point second difference on the same grid."""
        return Trajectory(self.grid, second_difference(self.values, self.grid.step))

    def sample(self, t) -> np.ndarray:
        """Value at arbitrary time by periodic linear interpolation."""
        k, h, n = self.grid.half_period, self.grid.step, self.grid.node_count
        s = np.mod(np.asarray(t, dtype=np.float64) + k, 2.0 * k)
        idx = np.minimum(np.floor(s / h).astype(int), n - 1)
        w = (s - idx * h) / h
        nxt = (idx + 1) % n
        out = (1.0 - w)[..., None] * self.values[idx] + w[..., None] * self.values[nxt]
        return out if out.ndim > 1 else out

    # ------------------------------------------------------------------
    # serialization

    def to_csv(self, path) -> None:
        """Write t plus coordinates, 17 significant digits (lossless)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"q_{j + 1}" for j in range(self.dim)])
            for t, row in zip(self.grid.nodes, self.values):
                writer.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, path, half_period: float) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        grid = TimeGrid(half_period, data.shape[0])
        if abs(data[0, 0] + half_period) > 1e-9 * max(1.0, half_period):
            raise GridMismatchError(
                f"first node {data[0, 0]} does not match -half_period {-half_period}"
            )
        return cls(grid, data[:, 1:])

    def to_record(self) -> dict:
        return {
            "k": self.grid.half_period,
            "h": self.grid.step,
            "n": self.dim,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Trajectory":
        values = np.asarray(record["values"], dtype=np.float64)
        grid = TimeGrid(record["k"], values.shape[0])
        if abs(grid.step - record["h"]) > _STEP_RTOL * max(1.0, grid.step):
            raise GridMismatchError(
                f"stored step {record['h']} inconsistent with k={record['k']}, N={values.shape[0]}"
            )
        traj = cls(grid, values)
        if traj.dim != record["n"]:
            raise ValueError(f"stored dim {record['n']} != value columns {traj.dim}")
        return traj

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_record(), fh)

    @classmethod
    def from_json(cls, path) -> "Trajectory":
        with open(path) as fh:
            return cls.from_record(json.load(fh))


def extend_by_zero(traj: Trajectory, half_period: float, tol: float = TOL_EMBED) -> Trajectory:
    """Embed a loop on [-j, j] into [-k, k], k > j, padding with zeros.

    The source period endpoint (node 0, which by the periodic wrap is the
    value at both -j and +j) must be within tol of zero, otherwise the
    padded loop would jump.  The target grid keeps the source step, so
    (k - j)/h must be a whole number of nodes.

    Norms are preserved up to one boundary quadrature cell: the change in
    the Sobolev norm is bounded by 2h*(1 + max |q|)^2 and in practice is
    of the order of the endpoint magnitude.
    """
    src = traj.grid
    j, h = src.half_period, src.step
    k = float(half_period)
    if k <= j:
        raise GridMismatchError(f"target half-period {k} must exceed source {j}")
    offset_f = (k - j) / h
    offset = int(round(offset_f))
    total_f = 2.0 * k / h
    total = int(round(total_f))
    if abs(offset_f - offset) > 1e-9 * max(1.0, offset_f) or abs(
        total_f - total
    ) > 1e-9 * max(1.0, total_f):
        raise GridMismatchError(
            f"source step {h} does not fit target half-period {k} with whole nodes"
        )
    endpoint = float(np.sqrt(np.sum(traj.values[0] ** 2)))
    if endpoint > tol:
        raise EndpointNotZeroError(
            f"|q(+-{j})| = {endpoint:.3e} exceeds tol {tol:.1e}; cannot extend by zero"
        )
    target = TimeGrid(k, total)
    if not target.same_step(src):
        raise GridMismatchError(
            f"target step {target.step} differs from source step {h}"
        )
    out = np.zeros((total, traj.dim))
    out[offset : offset + src.node_count] = traj.values
    return Trajectory(target, out)
