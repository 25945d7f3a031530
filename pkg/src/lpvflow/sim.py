"""Closed-loop simulation of the coupled state/gain dynamics.

The integrated state is z = (x, vec K, J): plant state, gain entries, and the
running quadratic cost. Parameter switches are integration breakpoints, the
gain is clamped back onto the box when integration drift is tiny, and larger
drift aborts rather than being silently absorbed.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .boxes import HyperRectangle
from .errors import (
    DimensionMismatch,
    DriftTooLarge,
    IntegrationError,
    MismatchedScenarios,
    NotHurwitz,
    SchemaError,
)
from .cert import hurwitz_verdict
from .linalg import Mat, unvec, vec
from .lpv_model import ParamTrajectory, PolytopicLpvSystem, eval_A
from .lqr_core import evaluate
from .projection import constraint_values, eval_constraints

INTEGRATORS = ("rk45_adaptive", "rk4_fixed")


@dataclass(frozen=True)
class SimConfig:
    """One closed-loop scenario: initial data, learning rate, horizon, stepping."""

    x0: np.ndarray
    K0: Mat
    alpha: float
    T: float
    dt: float  # fixed step (rk4) or step-size cap (rk45)
    trajectory: ParamTrajectory
    integrator: str = "rk45_adaptive"
    atol: float = 1e-9
    rtol: float = 1e-9
    clamp_threshold: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(-1))
        object.__setattr__(self, "K0", np.asarray(self.K0, dtype=float))
        if self.K0.ndim != 2:
            raise DimensionMismatch("K0 must be a matrix")
        for name in ("alpha", "T", "dt"):
            if not getattr(self, name) > 0:
                raise SchemaError(f"{name} must be positive")
        if self.integrator not in INTEGRATORS:
            raise SchemaError(f"integrator must be one of {INTEGRATORS}")
        if not (self.atol > 0 and self.rtol > 0 and self.clamp_threshold > 0):
            raise SchemaError("tolerances must be positive")


@dataclass(frozen=True)
class SimTrace:
    """Time-stamped record of a simulation run.

    Rows are duplicated at parameter switches (pre-switch value, then
    post-switch value at the same instant) so the piecewise signal is fully
    recoverable. min_g is NaN for static runs, which carry no gain box.
    """

    times: np.ndarray  # (N,)
    x: np.ndarray  # (N, n)
    k: np.ndarray  # (N, mn)
    rho: np.ndarray  # (N, p)
    cost_rate: np.ndarray  # (N,)
    cost: np.ndarray  # (N,)
    min_g: np.ndarray  # (N,)
    events: tuple[dict, ...]
    meta: dict
    completed: bool = True

    @property
    def final_cost(self) -> float:
        return float(self.cost[-1])

    def to_csv(self) -> str:
        """Deterministic CSV: 17 significant digits, switch comment lines."""
        n = self.x.shape[1]
        mn = self.k.shape[1]
        p = self.rho.shape[1]
        header = (
            ["t"]
            + [f"x{i + 1}" for i in range(n)]
            + [f"K{i + 1}" for i in range(mn)]
            + [f"rho{i + 1}" for i in range(p)]
            + ["cost_rate", "cost", "min_g"]
        )
        switch_rows = {
            ev["row"]: ev["t"] for ev in self.events if ev["kind"] == "switch"
        }
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for i in range(self.times.shape[0]):
            if i in switch_rows:
                buf.write(f"# switch t={switch_rows[i]:.17g}\n")
            row = (
                [self.times[i]]
                + list(self.x[i])
                + list(self.k[i])
                + list(self.rho[i])
                + [self.cost_rate[i], self.cost[i], self.min_g[i]]
            )
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SimTrace":
        """Rebuild arrays (and switch events) from the CSV representation."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise SchemaError("empty trace CSV")
        header = lines[0].split(",")
        n = sum(1 for h in header if h.startswith("x"))
        mn = sum(1 for h in header if h.startswith("K"))
        p = sum(1 for h in header if h.startswith("rho"))
        events = []
        rows = []
        for ln in lines[1:]:
            if ln.startswith("#"):
                if "switch" in ln:
                    t = float(ln.split("t=")[1])
                    events.append({"kind": "switch", "t": t, "row": len(rows)})
                continue
            rows.append([float(v) for v in ln.split(",")])
        data = np.asarray(rows)
        if data.shape[1] != len(header):
            raise SchemaError("trace CSV rows do not match the header")
        c = 1
        x = data[:, c : c + n]
        c += n
        k = data[:, c : c + mn]
        c += mn
        rho = data[:, c : c + p]
        c += p
        return cls(
            times=data[:, 0],
            x=x,
            k=k,
            rho=rho,
            cost_rate=data[:, c],
            cost=data[:, c + 1],
            min_g=data[:, c + 2],
            events=tuple(events),
            meta={},
        )


class _Recorder:
    """Accumulates samples and can build a (partial) trace at any moment."""

    def __init__(self, meta: dict):
        self.times: list[float] = []
        self.x: list[np.ndarray] = []
        self.k: list[np.ndarray] = []
        self.rho: list[np.ndarray] = []
        self.cost_rate: list[float] = []
        self.cost: list[float] = []
        self.min_g: list[float] = []
        self.events: list[dict] = []
        self.meta = meta

    def add(self, t, x, k, rho, cost_rate, cost, min_g):
        self.times.append(float(t))
        self.x.append(np.array(x))
        self.k.append(np.array(k))
        self.rho.append(np.array(rho))
        self.cost_rate.append(float(cost_rate))
        self.cost.append(float(cost))
        self.min_g.append(float(min_g))

    def event(self, kind: str, t: float, **extra):
        self.events.append({"kind": kind, "t": float(t), "row": len(self.times), **extra})

    def build(self, completed: bool) -> SimTrace:
        return SimTrace(
            times=np.asarray(self.times),
            x=np.asarray(self.x),
            k=np.asarray(self.k),
            rho=np.asarray(self.rho),
            cost_rate=np.asarray(self.cost_rate),
            cost=np.asarray(self.cost),
            min_g=np.asarray(self.min_g),
            events=tuple(self.events),
            meta=dict(self.meta),
            completed=completed,
        )


# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _error_norm(err, z_old, z_new, atol, rtol):
    scale = atol + rtol * np.maximum(np.abs(z_old), np.abs(z_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _integrate_segment(rhs, t0, t1, z, cfg: SimConfig, on_accept):
    """March z from t0 to t1, calling on_accept(t, z) after each accepted step.

    on_accept may modify z (clamping) and returns (z, changed). rhs may raise
    NotHurwitz: at stage 0 (an actually-reached state) it propagates to the
    caller; at a trial stage the step is rejected and retried smaller, and if
    that shrinks the step below the floor the stability failure is reported
    rather than a generic underflow.
    """
    span = t1 - t0
    if span <= 0:
        return z
    if cfg.integrator == "rk4_fixed":
        steps = max(1, math.ceil(span / cfg.dt))
        h = span / steps
        for s in range(steps):
            t = t0 + s * h
            f1 = rhs(t, z)  # stage 0: genuine state, NotHurwitz propagates
            f2 = rhs(t + 0.5 * h, z + 0.5 * h * f1)
            f3 = rhs(t + 0.5 * h, z + 0.5 * h * f2)
            f4 = rhs(t + h, z + h * f3)
            z = z + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
            z, _ = on_accept(t + h, z)
        return z

    t = t0
    h = min(cfg.dt, span)
    hmin = max(1e-14, 1e-13 * abs(span))
    k1 = rhs(t, z)  # stage 0
    last_stage_failure: NotHurwitz | None = None
    while t < t1 - 1e-14 * max(1.0, abs(t1)):
        if h < hmin:
            if last_stage_failure is not None:
                raise last_stage_failure
            raise IntegrationError(f"step size underflow at t={t:.6g} (h={h:.3e})")
        h_step = min(h, t1 - t)
        stages = [k1]
        try:
            for i in range(1, 7):
                zi = z + h_step * sum(a * ki for a, ki in zip(_DP_A[i], stages))
                stages.append(rhs(t + _DP_C[i] * h_step, zi))
        except NotHurwitz as e:
            last_stage_failure = e
            h = 0.5 * h_step
            continue
        z5 = z + h_step * sum(b * ki for b, ki in zip(_DP_B5, stages))
        err = h_step * sum((b5 - b4) * ki for b5, b4, ki in zip(_DP_B5, _DP_B4, stages))
        enorm = _error_norm(err, z, z5, cfg.atol, cfg.rtol)
        if enorm <= 1.0:
            t = t + h_step
            z, changed = on_accept(t, z5)
            # FSAL: the last stage doubles as the next first stage unless the
            # accepted state was clamped.
            k1 = stages[6] if not changed else rhs(t, z)
            last_stage_failure = None
        factor = 0.9 * (enorm**-0.2) if enorm > 0 else 5.0
        h = min(cfg.dt, h_step * min(5.0, max(0.2, factor)))
    return z


def _segments(trajectory: ParamTrajectory, t_end: float):
    cuts = [0.0] + trajectory.breakpoints(0.0, t_end) + [t_end]
    return list(zip(cuts[:-1], cuts[1:]))


def _scenario_meta(x0, T, trajectory: ParamTrajectory) -> dict:
    return {
        "x0": [float(v) for v in np.asarray(x0).reshape(-1)],
        "T": float(T),
        "trajectory": trajectory.as_dict(),
    }


def simulate_closed_loop(
    sys: PolytopicLpvSystem, box: HyperRectangle, cfg: SimConfig
) -> SimTrace:
    """Integrate the coupled plant/gain dynamics over cfg.T.

    The gain flow uses the projected gradient, so the box (and each face) is
    invariant; parameter switches restart the integrator; accepted steps whose
    gain drifted out of the box by at most clamp_threshold are clamped back
    (logged as events), larger drift raises DriftTooLarge with the partial
    trace attached.
    """
    n, m, mn = sys.n, sys.m, sys.m * sys.n
    if cfg.x0.shape[0] != n:
        raise DimensionMismatch(f"x0 has dim {cfg.x0.shape[0]}, system has n={n}")
    if cfg.K0.shape != (m, n):
        raise DimensionMismatch(f"K0 has shape {cfg.K0.shape}, expected {(m, n)}")
    if box.dim != mn:
        raise DimensionMismatch(f"gain box has dim {box.dim}, expected {mn}")
    k0 = vec(cfg.K0)
    if float(np.min(constraint_values(box, k0))) <= 0.0:
        raise SchemaError("K0 must lie strictly inside the gain box")

    meta = {
        "controller": "dynamic",
        "alpha": cfg.alpha,
        "integrator": cfg.integrator,
        "dt": cfg.dt,
        "scenario": _scenario_meta(cfg.x0, cfg.T, cfg.trajectory),
    }
    rec = _Recorder(meta)

    def make_rhs(rho_of_t):
        def rhs(t, z):
            x, kv = z[:n], z[n : n + mn]
            rho = rho_of_t(t)
            kv_in = box.clamp(kv)  # continuous extension off the box
            k = unvec(kv_in, m, n)
            ev = evaluate(sys, rho, k)  # NotHurwitz propagates
            ce = eval_constraints(box, kv_in)
            a = eval_A(sys, rho, validate=False)
            xdot = (a - sys.B @ k) @ x
            kdot = -cfg.alpha * (ce.M @ vec(ev.grad))
            jdot = float(x @ (sys.Q + k.T @ sys.R @ k) @ x)
            return np.concatenate([xdot, kdot, [jdot]])

        return rhs

    def record(t, z, rho):
        x, kv, j = z[:n], z[n : n + mn], z[-1]
        k = unvec(kv, m, n)
        rate = float(x @ (sys.Q + k.T @ sys.R @ k) @ x)
        rec.add(t, x, kv, rho, rate, j, float(np.min(constraint_values(box, kv))))

    def on_accept(t, z):
        kv = z[n : n + mn]
        gmin = float(np.min(constraint_values(box, kv)))
        if gmin < 0.0:
            drift = -gmin
            if drift > cfg.clamp_threshold:
                record(t, z, current_rho(t))
                raise DriftTooLarge(
                    f"gain drifted {drift:.3e} out of the box at t={t:.6g} "
                    f"(threshold {cfg.clamp_threshold:.0e})",
                    partial_trace=rec.build(completed=False),
                )
            z = z.copy()
            z[n : n + mn] = box.clamp(kv)
            rec.event("clamp", t, drift=drift)
            record(t, z, current_rho(t))
            return z, True
        record(t, z, current_rho(t))
        return z, False

    z = np.concatenate([cfg.x0, k0, [0.0]])
    segments = _segments(cfg.trajectory, cfg.T)
    current_rho = cfg.trajectory.value
    try:
        for idx, (ta, tb) in enumerate(segments):
            if cfg.trajectory.kind == "sinusoid":
                rho_of_t = cfg.trajectory.value
            else:
                rho_seg = cfg.trajectory.value(0.5 * (ta + tb))
                rho_of_t = lambda t, _r=rho_seg: _r
            current_rho = rho_of_t
            if idx == 0:
                record(ta, z, rho_of_t(ta))
            else:
                rec.event("switch", ta)
                record(ta, z, rho_of_t(ta))  # duplicate row, post-switch value
            z = _integrate_segment(make_rhs(rho_of_t), ta, tb, z, cfg, on_accept)
    except NotHurwitz as e:
        raise NotHurwitz(str(e), partial_trace=rec.build(completed=False)) from e
    except IntegrationError as e:
        raise IntegrationError(str(e), partial_trace=rec.build(completed=False)) from e
    return rec.build(completed=True)


def simulate_static(
    sys: PolytopicLpvSystem,
    k_fixed: Mat,
    x0,
    trajectory: ParamTrajectory,
    T: float,
    dt: float,
    integrator: str = "rk45_adaptive",
    atol: float = 1e-9,
    rtol: float = 1e-9,
) -> SimTrace:
    """Integrate the plant under one constant gain, same cost accounting.

    Stability of A(rho) - B K_fixed is checked at the start of every segment
    (i.e. at switches); the gain rows of the trace are constant.
    """
    k_fixed = np.asarray(k_fixed, dtype=float)
    n, m = sys.n, sys.m
    if k_fixed.shape != (m, n):
        raise DimensionMismatch(f"K has shape {k_fixed.shape}, expected {(m, n)}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != n:
        raise DimensionMismatch(f"x0 has dim {x0.shape[0]}, system has n={n}")
    cfg = SimConfig(
        x0=x0,
        K0=k_fixed,
        alpha=1.0,  # unused by the static dynamics
        T=T,
        dt=dt,
        trajectory=trajectory,
        integrator=integrator,
        atol=atol,
        rtol=rtol,
    )
    meta = {
        "controller": "static",
        "integrator": integrator,
        "dt": dt,
        "K": k_fixed.tolist(),
        "scenario": _scenario_meta(x0, T, trajectory),
    }
    rec = _Recorder(meta)
    kv = vec(k_fixed)
    qk = sys.Q + k_fixed.T @ sys.R @ k_fixed

    def make_rhs(rho_of_t):
        def rhs(t, z):
            x = z[:n]
            a = eval_A(sys, rho_of_t(t), validate=False)
            xdot = (a - sys.B @ k_fixed) @ x
            return np.concatenate([xdot, [float(x @ qk @ x)]])

        return rhs

    def record(t, z, rho):
        x, j = z[:n], z[-1]
        rec.add(t, x, kv, rho, float(x @ qk @ x), j, math.nan)

    z = np.concatenate([x0, [0.0]])
    segments = _segments(trajectory, T)
    try:
        for idx, (ta, tb) in enumerate(segments):
            if trajectory.kind == "sinusoid":
                rho_of_t = trajectory.value
            else:
                rho_seg = trajectory.value(0.5 * (ta + tb))
                rho_of_t = lambda t, _r=rho_seg: _r
            verdict = hurwitz_verdict(
                eval_A(sys, rho_of_t(ta), validate=False) - sys.B @ k_fixed
            )
            if not verdict.stable:
                raise NotHurwitz(
                    f"fixed gain does not stabilize the plant at t={ta:.6g}",
                    partial_trace=rec.build(completed=False),
                )
            if idx == 0:
                record(ta, z, rho_of_t(ta))
            else:
                rec.event("switch", ta)
                record(ta, z, rho_of_t(ta))

            def on_accept(t, z_new, _r=rho_of_t):
                record(t, z_new, _r(t))
                return z_new, False

            z = _integrate_segment(make_rhs(rho_of_t), ta, tb, z, cfg, on_accept)
    except IntegrationError as e:
        raise IntegrationError(str(e), partial_trace=rec.build(completed=False)) from e
    return rec.build(completed=True)


@dataclass(frozen=True)
class CostComparison:
    cost_a: float
    cost_b: float
    absolute_difference: float  # J_B - J_A
    relative_reduction: float  # (J_B - J_A) / J_B

    def as_dict(self) -> dict:
        return {
            "cost_a": self.cost_a,
            "cost_b": self.cost_b,
            "absolute_difference": self.absolute_difference,
            "relative_reduction": self.relative_reduction,
        }


def compare_costs(trace_a: SimTrace, trace_b: SimTrace) -> CostComparison:
    """Final-cost comparison of two runs of the same scenario.

    Both traces must come from the same x0, horizon, and parameter signal;
    anything else is a scenario mismatch, not a comparison.
    """
    sa = trace_a.meta.get("scenario")
    sb = trace_b.meta.get("scenario")
    if sa is None or sb is None or sa != sb:
        raise MismatchedScenarios("traces were produced from different scenarios")
    if not (trace_a.completed and trace_b.completed):
        raise MismatchedScenarios("cannot compare partial traces")
    ja, jb = trace_a.final_cost, trace_b.final_cost
    return CostComparison(
        cost_a=ja,
        cost_b=jb,
        absolute_difference=jb - ja,
        relative_reduction=(jb - ja) / jb if jb != 0 else 0.0,
    )
