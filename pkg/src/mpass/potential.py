"""Problem data and numerical auditing of its structural hypotheses.

A problem is the data of a forced second-order system

    q'' - grad_q A(t, q) + grad_q B(t, q) = f(t)

where A grows quadratically in q (a pinch a1|q|^2 <= A <= a2|q|^2 is
expected), B grows superquadratically (mu B <= (q, grad B) for some
mu > 2), and f is an integrable forcing.  The auditor estimates the
structural constants by dense sampling in t, a direction set on the unit
sphere, and a radius ladder, then issues an admissibility verdict that
gates the solver: the superquadratic sup on the unit sphere must stay
below half the quadratic floor, and the forcing norm below the budget

    (sqrt(2)/4) * (quad_floor - 2 * sphere_sup).

Estimates from sampling are evidence, not proof; the report carries the
full sampling plan so runs are reproducible.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    NonFiniteSampleError,
    NonIntegrableSuspectedError,
    UnknownExampleError,
)

SQRT2 = math.sqrt(2.0)

# slack used by every pass/fail flag on sampled inequalities
FLAG_SLACK = 1e-9


@dataclass
class PotentialSpec:
    """Callables defining one problem.

    Scalar signature: quadratic(t, q) -> float and superquadratic(t, q)
    -> float with q of shape (dim,); their grads return (dim,);
    forcing(t) returns (dim,).  Vectorized implementations (t of shape
    (m,) with q of shape (m, dim)) are detected and used when available.
    growth_exponent is the declared superquadratic exponent mu > 2; it is
    trusted by solver formulas while the audited infimum only cross-checks
    it.
    """

    dim: int
    quadratic: Callable
    quadratic_grad: Callable
    superquadratic: Callable
    superquadratic_grad: Callable
    forcing: Callable
    growth_exponent: float
    label: str = "custom"
    declared_quad_lower: Optional[float] = None
    declared_quad_upper: Optional[float] = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        self.dim = int(self.dim)
        if not (self.growth_exponent > 2.0):
            raise ValueError(
                f"growth_exponent must exceed 2, got {self.growth_exponent}"
            )


# ----------------------------------------------------------------------
# builtin problems


def builtin_example(index: int) -> PotentialSpec:
    """One of the three bundled scalar problems (index 1, 2 or 3)."""

    if index == 1:

        def quad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (t * t + 1.0) / (t * t + 2.0) * q[..., 0] ** 2

        def quad_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (2.0 * (t * t + 1.0) / (t * t + 2.0) * q[..., 0])[..., None]

        def sup(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (t * t + 12.0) / (3.0 * t * t + 27.0) * q[..., 0] ** 4

        def sup_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (4.0 * (t * t + 12.0) / (3.0 * t * t + 27.0) * q[..., 0] ** 3)[
                ..., None
            ]

        def force(t):
            t = np.asarray(t, dtype=np.float64)
            return (np.exp(-t * t) / 36.0)[..., None]

        return PotentialSpec(1, quad, quad_grad, sup, sup_grad, force, 4.0,
                             label="builtin-1",
                             declared_quad_lower=0.5, declared_quad_upper=1.0)

    if index == 2:

        def coeff(t):
            return np.sin(t) / 8.0 + np.sin(SQRT2 * t) / 8.0 + 0.75

        def quad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return coeff(t) * q[..., 0] ** 2

        def quad_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (2.0 * coeff(t) * q[..., 0])[..., None]

        def sup(t, q):
            t = np.asarray(t, dtype=np.float64)
            return 0.25 * q[..., 0] ** 4 + 0.0 * t

        def sup_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (q[..., 0] ** 3 + 0.0 * t)[..., None]

        def force(t):
            t = np.asarray(t, dtype=np.float64)
            return (np.exp(-t * t) / 32.0)[..., None]

        return PotentialSpec(1, quad, quad_grad, sup, sup_grad, force, 4.0,
                             label="builtin-2",
                             declared_quad_lower=0.5, declared_quad_upper=1.0)

    if index == 3:

        def quad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return q[..., 0] ** 2 + 0.0 * t

        def quad_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            return (2.0 * q[..., 0] + 0.0 * t)[..., None]

        def sup(t, q):
            t = np.asarray(t, dtype=np.float64)
            u = q[..., 0] ** 2 / (t * t + 1.0)
            return (10.0 / 33.0) * q[..., 0] ** 4 * (np.arctan(u) ** 2 + 1.0)

        def sup_grad(t, q):
            t = np.asarray(t, dtype=np.float64)
            x = q[..., 0]
            u = x * x / (t * t + 1.0)
            a = np.arctan(u)
            core = 4.0 * x**3 * (a * a + 1.0)
            extra = 4.0 * x**5 * a / ((1.0 + u * u) * (t * t + 1.0))
            return ((10.0 / 33.0) * (core + extra))[..., None]

        def force(t):
            t = np.asarray(t, dtype=np.float64)
            return ((1.0 + t * t) / 10.0 * np.exp(-t * t))[..., None]

        return PotentialSpec(1, quad, quad_grad, sup, sup_grad, force, 4.0,
                             label="builtin-3",
                             declared_quad_lower=1.0, declared_quad_upper=1.0)

    raise UnknownExampleError(f"no builtin example {index}; choose 1, 2 or 3")


# ----------------------------------------------------------------------
# vectorized adapter


class SampledPotential:
    """Uniform batched access to the spec callables.

    Each callable is probed once with a 2-sample batch; if it returns the
    right shape it is used vectorized, otherwise calls fall back to a
    python loop.  Outputs are float64 arrays: values (m,), grads and
    forcing (m, dim).
    """

    def __init__(self, spec: PotentialSpec, threads: int = 1):
        self.spec = spec
        self.n = spec.dim
        self.threads = max(1, int(threads))
        self._vectorized = {
            "quad": self._probe(spec.quadratic, "value"),
            "quad_grad": self._probe(spec.quadratic_grad, "grad"),
            "sup": self._probe(spec.superquadratic, "value"),
            "sup_grad": self._probe(spec.superquadratic_grad, "grad"),
            "force": self._probe(spec.forcing, "force"),
        }

    def _probe(self, fn, kind) -> bool:
        t = np.array([0.0, 0.5])
        q = np.full((2, self.n), 0.7)
        try:
            out = np.asarray(fn(t) if kind == "force" else fn(t, q), dtype=np.float64)
        except Exception:
            return False
        return self._shape_ok(out, 2, kind)

    def _shape_ok(self, out, m, kind) -> bool:
        if kind == "value":
            return out.shape in ((m,), (m, 1))
        want = (m, self.n)
        return out.shape == want or (self.n == 1 and out.shape == (m,))

    def _normalize(self, out, m, kind) -> np.ndarray:
        out = np.asarray(out, dtype=np.float64)
        if kind == "value":
            return out[:, 0] if out.ndim == 2 else out
        return out[:, None] if out.ndim == 1 else out

    def _eval(self, name, fn, kind, t, q=None):
        t = np.asarray(t, dtype=np.float64)
        m = t.shape[0]
        if self._vectorized[name]:
            if self.threads > 1 and m >= 4 * self.threads:
                bounds = np.linspace(0, m, self.threads + 1).astype(int)
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    futures = [
                        pool.submit(
                            fn, t[a:b]
                        ) if kind == "force" else pool.submit(fn, t[a:b], q[a:b])
                        for a, b in zip(bounds[:-1], bounds[1:])
                    ]
                    parts = [
                        self._normalize(f.result(), b - a, kind)
                        for f, a, b in zip(futures, bounds[:-1], bounds[1:])
                    ]
                return np.concatenate(parts, axis=0)
            out = fn(t) if kind == "force" else fn(t, q)
            return self._normalize(out, m, kind)
        if kind == "force":
            rows = [np.asarray(fn(float(ti)), dtype=np.float64).reshape(self.n) for ti in t]
            return np.array(rows)
        if kind == "value":
            return np.array([float(fn(float(ti), qi)) for ti, qi in zip(t, q)])
        rows = [
            np.asarray(fn(float(ti), qi), dtype=np.float64).reshape(self.n)
            for ti, qi in zip(t, q)
        ]
        return np.array(rows)

    def quad_values(self, t, q):
        return self._eval("quad", self.spec.quadratic, "value", t, q)

    def quad_grads(self, t, q):
        return self._eval("quad_grad", self.spec.quadratic_grad, "grad", t, q)

    def sup_values(self, t, q):
        return self._eval("sup", self.spec.superquadratic, "value", t, q)

    def sup_grads(self, t, q):
        return self._eval("sup_grad", self.spec.superquadratic_grad, "grad", t, q)

    def force_values(self, t):
        return self._eval("force", self.spec.forcing, "force", t)

    # fixed point in q, sweeping t
    def at_point(self, which, t, q_row):
        t = np.asarray(t, dtype=np.float64)
        q = np.broadcast_to(np.asarray(q_row, dtype=np.float64), (t.shape[0], self.n))
        return getattr(self, which)(t, q)


# ----------------------------------------------------------------------
# audit configuration and report


def _default_threads() -> int:
    raw = os.environ.get("MPASS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class AuditConfig:
    """Sampling plan for the hypothesis audit (all defaults deterministic)."""

    t_range: tuple = (-100.0, 100.0)
    t_step: float = 0.01
    limit_probes: tuple = (1e3, 1e4, 1e5, 1e6)
    ratio_radii: tuple = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3)
    small_radii: tuple = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    ball_radii: tuple = (1.0, 2.0, 5.0, 10.0)
    sphere_count: int = 64
    seed: Optional[int] = None
    refine: bool = True
    force_truncation: float = 10.0
    force_step: float = 0.005
    threads: Optional[int] = None

    def resolved_threads(self) -> int:
        return self.threads if self.threads else _default_threads()


@dataclass
class HypothesisReport:
    """Audited constants plus per-condition pass flags.

    All extremal quantities are over the sampling plan only.  Flags for
    gradient_bounded and gradient_small_origin rest on sampled evidence
    by construction (they quantify over unbounded sets); this is recorded
    in notes.
    """

    label: str
    dim: int
    declared_growth_exponent: float
    quad_lower: float          # inf of quadratic/|q|^2 over probes
    quad_upper: float          # sup of quadratic/|q|^2 over probes
    euler_ratio_min: float     # inf of (q, grad quad)/quad
    euler_ratio_max: float     # sup of (q, grad quad)/quad
    growth_exponent_inf: float  # inf of (q, grad super)/super
    sphere_min: float          # inf of superquadratic on |q| = 1
    sphere_max: float          # sup of superquadratic on |q| = 1
    quad_floor: float          # min(1, 2*quad_lower)
    small_gradient_profile: list  # [(radius, sup |grad super| / radius)]
    gradient_bounds: list      # [(ball radius, sup |grad quad|, sup |grad super|)]
    forcing_norm: float
    forcing_budget: float      # (sqrt2/4) * (quad_floor - 2*sphere_max)
    passes: dict
    notes: list
    sample_config: dict

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Verdict:
    admissible: bool
    reasons: list = field(default_factory=list)


# ----------------------------------------------------------------------
# sphere directions (deterministic by default)


def sphere_directions(dim: int, count: int, seed: Optional[int] = None) -> np.ndarray:
    """Unit direction set, shape (D, dim).

    dim 1: the two signs.  dim 2: uniform angles.  dim 3: Fibonacci
    lattice.  Higher dims: normalized Gaussians from a fixed (or given)
    seed.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3 and seed is None:
        i = np.arange(count) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / count)
        golden = np.pi * (1.0 + np.sqrt(5.0))
        theta = golden * i
        return np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
            axis=1,
        )
    rng = np.random.default_rng(0xC0FFEE if seed is None else seed)
    v = rng.normal(size=(count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ----------------------------------------------------------------------
# forcing norm


def force_norm(spec: PotentialSpec, truncation: float = 10.0, step: float = 0.005,
               threads: int = 1) -> float:
    """L2 norm of the forcing over the line, by adaptive truncation.

    Trapezoid on [-T, T]; T doubles until the norm increment drops below
    1e-12.  Four doublings without stabilizing raise
    NonIntegrableSuspectedError.
    """
    fns = SampledPotential(spec, threads=threads)

    def norm_at(T: float) -> float:
        count = max(8, int(round(2.0 * T / step)))
        t = np.linspace(-T, T, count + 1)
        fv = fns.force_values(t)
        if not np.all(np.isfinite(fv)):
            i = int(np.argmin(np.isfinite(fv).all(axis=1)))
            raise NonFiniteSampleError(
                f"forcing not finite at t={t[i]}", t=float(t[i])
            )
        dens = np.sum(fv * fv, axis=1)
        return float(np.sqrt(np.trapezoid(dens, t)))

    T = float(truncation)
    prev = norm_at(T)
    for _ in range(4):
        T *= 2.0
        cur = norm_at(T)
        if abs(cur - prev) < 1e-12:
            return cur
        prev = cur
    raise NonIntegrableSuspectedError(
        f"forcing norm kept growing after 4 doublings (last T={T}, norm={prev:.6g})"
    )


# ----------------------------------------------------------------------
# constants audit


def _check_finite(arr: np.ndarray, what: str, t: np.ndarray, q_row: np.ndarray):
    bad = ~np.isfinite(arr)
    if bad.ndim > 1:
        bad = bad.any(axis=tuple(range(1, bad.ndim)))
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteSampleError(
            f"{what} not finite at t={t[i]}, q={np.asarray(q_row).tolist()}",
            t=float(t[i]),
            q=np.asarray(q_row).copy(),
        )


class _Extremum:
    """Running extremum with the probe location that produced it."""

    def __init__(self, maximize: bool):
        self.maximize = maximize
        self.value = -np.inf if maximize else np.inf
        self.where = None  # (t, direction, radius)

    def update(self, values: np.ndarray, t: np.ndarray, direction, radius):
        i = int(np.argmax(values) if self.maximize else np.argmin(values))
        v = float(values[i])
        if (v > self.value) if self.maximize else (v < self.value):
            self.value = v
            self.where = (float(t[i]), direction, radius)


def _refine_extremum(ext: _Extremum, evaluator, halfwidth: float):
    """Golden-section polish of an extremum in t around its best probe."""
    if ext.where is None or not np.isfinite(ext.value):
        return
    t0, direction, radius = ext.where
    a, b = t0 - halfwidth, t0 + halfwidth
    sign = -1.0 if ext.maximize else 1.0

    def f(x):
        return sign * evaluator(x, direction, radius)

    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - gr * (b - a), a + gr * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(80):
        if b - a <= 1e-10 * max(1.0, abs(t0)):
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = f(x2)
    candidate = sign * min(f1, f2)
    if (candidate > ext.value) if ext.maximize else (candidate < ext.value):
        ext.value = candidate


def estimate_constants(spec: PotentialSpec, cfg: Optional[AuditConfig] = None) -> HypothesisReport:
    """Run the sampling audit and assemble the constants report."""
    cfg = cfg or AuditConfig()
    threads = cfg.resolved_threads()
    fns = SampledPotential(spec, threads=threads)

    lo, hi = cfg.t_range
    count = int(round((hi - lo) / cfg.t_step))
    t_grid = lo + cfg.t_step * np.arange(count + 1)
    t_probes = np.concatenate(
        [t_grid, np.array(cfg.limit_probes, dtype=np.float64),
         -np.array(cfg.limit_probes, dtype=np.float64)]
    )
    dirs = sphere_directions(spec.dim, cfg.sphere_count, cfg.seed)

    quad_lo, quad_hi = _Extremum(False), _Extremum(True)
    euler_lo, euler_hi = _Extremum(False), _Extremum(True)
    growth_lo = _Extremum(False)
    sphere_lo, sphere_hi = _Extremum(False), _Extremum(True)
    super_min_positive = np.inf

    for d in dirs:
        for r in cfg.ratio_radii:
            q_row = r * d
            kv = fns.at_point("quad_values", t_probes, q_row)
            kg = fns.at_point("quad_grads", t_probes, q_row)
            wv = fns.at_point("sup_values", t_probes, q_row)
            wg = fns.at_point("sup_grads", t_probes, q_row)
            for arr, name in ((kv, "quadratic"), (kg, "quadratic_grad"),
                              (wv, "superquadratic"), (wg, "superquadratic_grad")):
                _check_finite(arr, name, t_probes, q_row)
            quad_ratio = kv / (r * r)
            quad_lo.update(quad_ratio, t_probes, d, r)
            quad_hi.update(quad_ratio, t_probes, d, r)
            with np.errstate(divide="ignore", invalid="ignore"):
                euler = (kg @ q_row) / kv
                growth = (wg @ q_row) / wv
            euler = np.where(kv > 0, euler, np.inf)
            growth = np.where(wv > 0, growth, -np.inf)
            euler_lo.update(euler, t_probes, d, r)
            euler_hi.update(np.where(np.isfinite(euler), euler, -np.inf), t_probes, d, r)
            growth_lo.update(growth, t_probes, d, r)
            super_min_positive = min(super_min_positive, float(wv.min()))
        # unit sphere pass for the superquadratic extremes
        wv1 = fns.at_point("sup_values", t_probes, d)
        _check_finite(wv1, "superquadratic", t_probes, d)
        sphere_lo.update(wv1, t_probes, d, 1.0)
        sphere_hi.update(wv1, t_probes, d, 1.0)

    def scalar_quantity(kind):
        def evaluate(tval, direction, radius):
            t1 = np.array([tval])
            q_row = radius * direction
            if kind == "quad_ratio":
                return float(fns.at_point("quad_values", t1, q_row)[0]) / (radius * radius)
            if kind == "euler":
                kv = float(fns.at_point("quad_values", t1, q_row)[0])
                kg = fns.at_point("quad_grads", t1, q_row)[0]
                return float(kg @ q_row) / kv if kv > 0 else math.inf
            if kind == "growth":
                wv = float(fns.at_point("sup_values", t1, q_row)[0])
                wg = fns.at_point("sup_grads", t1, q_row)[0]
                return float(wg @ q_row) / wv if wv > 0 else -math.inf
            return float(fns.at_point("sup_values", t1, direction)[0])
        return evaluate

    if cfg.refine:
        _refine_extremum(quad_lo, scalar_quantity("quad_ratio"), cfg.t_step)
        _refine_extremum(quad_hi, scalar_quantity("quad_ratio"), cfg.t_step)
        _refine_extremum(euler_lo, scalar_quantity("euler"), cfg.t_step)
        _refine_extremum(euler_hi, scalar_quantity("euler"), cfg.t_step)
        _refine_extremum(growth_lo, scalar_quantity("growth"), cfg.t_step)
        _refine_extremum(sphere_lo, scalar_quantity("sphere"), cfg.t_step)
        _refine_extremum(sphere_hi, scalar_quantity("sphere"), cfg.t_step)

    # small-gradient profile near the origin (sampled surrogate)
    profile = []
    for r in cfg.small_radii:
        worst = 0.0
        for d in dirs:
            g = fns.at_point("sup_grads", t_probes, r * d)
            _check_finite(g, "superquadratic_grad", t_probes, r * d)
            worst = max(worst, float(np.sqrt((g * g).sum(axis=1)).max()))
        profile.append((float(r), worst / r))

    # gradient bounds on balls (sampled surrogate)
    bounds = []
    for ball in cfg.ball_radii:
        sup_kg = 0.0
        sup_wg = 0.0
        for d in dirs:
            for frac in (0.25, 0.5, 0.75, 1.0):
                q_row = ball * frac * d
                kg = fns.at_point("quad_grads", t_probes, q_row)
                wg = fns.at_point("sup_grads", t_probes, q_row)
                sup_kg = max(sup_kg, float(np.sqrt((kg * kg).sum(axis=1)).max()))
                sup_wg = max(sup_wg, float(np.sqrt((wg * wg).sum(axis=1)).max()))
        bounds.append((float(ball), sup_kg, sup_wg))

    forcing_norm = force_norm(spec, cfg.force_truncation, cfg.force_step, threads)

    quad_floor = min(1.0, 2.0 * quad_lo.value)
    budget = (SQRT2 / 4.0) * (quad_floor - 2.0 * sphere_hi.value)

    profile_vals = [p[1] for p in profile]
    decreasing = all(
        profile_vals[i + 1] <= profile_vals[i] + FLAG_SLACK
        for i in range(len(profile_vals) - 1)
    )
    passes = {
        "gradient_bounded": all(np.isfinite(b[1]) and np.isfinite(b[2]) for b in bounds),
        "quadratic_pinch": quad_lo.value >= FLAG_SLACK and np.isfinite(quad_hi.value),
        "euler_bracket": (
            euler_lo.value >= 1.0 - FLAG_SLACK and euler_hi.value <= 2.0 + FLAG_SLACK
        ),
        "gradient_small_origin": decreasing and profile_vals[-1] < 1e-3,
        "superquadratic": (
            growth_lo.value >= spec.growth_exponent - FLAG_SLACK
            and super_min_positive > 0.0
        ),
        "sphere_min_positive": sphere_lo.value >= FLAG_SLACK,
    }

    return HypothesisReport(
        label=spec.label,
        dim=spec.dim,
        declared_growth_exponent=float(spec.growth_exponent),
        quad_lower=float(quad_lo.value),
        quad_upper=float(quad_hi.value),
        euler_ratio_min=float(euler_lo.value),
        euler_ratio_max=float(euler_hi.value),
        growth_exponent_inf=float(growth_lo.value),
        sphere_min=float(sphere_lo.value),
        sphere_max=float(sphere_hi.value),
        quad_floor=float(quad_floor),
        small_gradient_profile=[(float(r), float(v)) for r, v in profile],
        gradient_bounds=[(float(b), float(x), float(y)) for b, x, y in bounds],
        forcing_norm=float(forcing_norm),
        forcing_budget=float(budget),
        passes=passes,
        notes=[
            "gradient_bounded and gradient_small_origin flags rest on sampled evidence",
            "extremal constants are over the sampling plan, not proofs",
        ],
        sample_config={
            "t_range": list(cfg.t_range),
            "t_step": cfg.t_step,
            "limit_probes": list(cfg.limit_probes),
            "ratio_radii": list(cfg.ratio_radii),
            "small_radii": list(cfg.small_radii),
            "ball_radii": list(cfg.ball_radii),
            "sphere_count": cfg.sphere_count,
            "seed": cfg.seed,
            "refine": cfg.refine,
            "force_truncation": cfg.force_truncation,
            "force_step": cfg.force_step,
            "threads": threads,
        },
    )


def check_admissibility(report: HypothesisReport) -> Verdict:
    """Gate the solver on the audited constants.

    Admissible requires the unit-sphere sup below half the quadratic
    floor, the forcing norm strictly inside the budget, and the four
    structural flags that sampling can meaningfully certify.
    """
    reasons = []
    if not (report.sphere_max < report.quad_floor / 2.0):
        reasons.append(
            f"sphere sup {report.sphere_max:.6g} is not below half the "
            f"quadratic floor {report.quad_floor / 2.0:.6g}"
        )
    if not (report.forcing_norm < report.forcing_budget):
        reasons.append(
            f"forcing norm {report.forcing_norm:.6g} is not below the "
            f"budget {report.forcing_budget:.6g}"
        )
    for flag in ("quadratic_pinch", "euler_bracket", "superquadratic",
                 "sphere_min_positive"):
        if not report.passes.get(flag, False):
            reasons.append(f"condition {flag} failed")
    return Verdict(admissible=not reasons, reasons=reasons)
