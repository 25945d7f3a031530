"""Gain-box construction and containment verification.

The box of optimal gains is found by solving the Riccati equation over a
parameter grid and refining each coordinate extreme by golden-section search
along the parameter axes, then inflating by a margin so the optimal set lies
strictly inside. Containment of the box in the stabilizing-gain region is
checked through the distance of the box to each stability-polynomial zero set;
the distances found are upper bounds (multistart local search), so only
strictly positive margins count as evidence of containment.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .boxes import Box, HyperRectangle
from .cert import stability_polynomials
from .errors import (
    CareFailure,
    DegreeGuard,
    DimensionMismatch,
    NoStabilizingInit,
    NotConverged,
    NotHurwitz,
    SchemaError,
    SingularMatrix,
)
from .linalg import vec
from .lpv_model import PolytopicLpvSystem, eval_A
from .lqr_core import solve_care
from .multipoly import MultiPoly
from .parallel import map_starts

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GainBoxResult:
    tight_lo: np.ndarray  # per vec(K*) coordinate, before the margin
    tight_hi: np.ndarray
    box: HyperRectangle  # after outward inflation by epsilon
    epsilon: float
    samples: tuple[tuple[np.ndarray, np.ndarray], ...]  # (rho, vec K*_rho)

    def as_dict(self) -> dict:
        return {
            "tight_lo": self.tight_lo.tolist(),
            "tight_hi": self.tight_hi.tolist(),
            "box": self.box.as_dict(),
            "epsilon": self.epsilon,
            "sample_count": len(self.samples),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def samples_csv(self) -> str:
        """Grid samples as CSV rows (rho..., K...)."""
        p = self.samples[0][0].shape[0]
        mn = self.samples[0][1].shape[0]
        header = [f"rho{i + 1}" for i in range(p)] + [f"K{i + 1}" for i in range(mn)]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for rho, kv in self.samples:
            buf.write(",".join(f"{v:.17g}" for v in (*rho, *kv)) + "\n")
        return buf.getvalue()


def _optimal_gain(sys: PolytopicLpvSystem, rho: np.ndarray) -> np.ndarray:
    try:
        _, k = solve_care(eval_A(sys, rho, validate=False), sys.B, sys.Q, sys.R)
    except (NoStabilizingInit, NotConverged, SingularMatrix, NotHurwitz) as e:
        raise CareFailure(f"Riccati solve failed at rho={rho.tolist()}: {e}", rho=rho) from e
    return vec(k)


def _golden_min(fun, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of fun on [a, b] to bracket width tol."""
    if b - a <= tol:
        t = 0.5 * (a + b)
        return t, fun(t)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    t = c if fc < fd else d
    return t, min(fc, fd)


def compute_gain_box(
    sys: PolytopicLpvSystem,
    grid_density: int = 64,
    refine_tol: float = 1e-6,
    eps: float = 0.01,
) -> GainBoxResult:
    """Coordinatewise bounds of the optimal-gain set over the parameter box.

    Grid search (the optimal-gain map is continuous, so a fine grid brackets
    each extreme) followed by golden-section refinement along every parameter
    axis from each extreme, coordinate-descent style, then outward inflation
    by eps so the optimal set ends up strictly interior.
    """
    if sys.p > 3:
        raise DegreeGuard(f"parameter dimension {sys.p} exceeds the supported 3")
    if grid_density < 5:
        raise SchemaError("grid_density must be at least 5")
    if not eps > 0:
        raise SchemaError("eps must be positive")
    if refine_tol <= 0:
        raise SchemaError("refine_tol must be positive")
    pbox = sys.param_box
    degenerate = bool(np.all(pbox.widths() == 0.0))
    grid = pbox.grid(grid_density) if not degenerate else pbox.lo.reshape(1, -1)
    gain_rows = map_starts(lambda row: _optimal_gain(sys, row), list(grid))
    samples = [(row.copy(), kv) for row, kv in zip(grid, gain_rows)]
    gains = np.asarray(gain_rows)
    tight_lo = gains.min(axis=0).astype(float)
    tight_hi = gains.max(axis=0).astype(float)

    if not degenerate:
        step = pbox.widths() / (grid_density - 1)
        mn = gains.shape[1]
        for i in range(mn):
            for sign, start_idx in ((+1.0, int(np.argmin(gains[:, i]))),
                                    (-1.0, int(np.argmax(gains[:, i])))):
                rho = grid[start_idx].copy()
                # Coordinate descent over parameter axes around the grid winner.
                for _ in range(2):
                    for j in range(pbox.dim):
                        if step[j] == 0.0:
                            continue
                        a = max(pbox.lo[j], rho[j] - step[j])
                        b = min(pbox.hi[j], rho[j] + step[j])

                        def along(t, _j=j, _rho=rho, _i=i, _s=sign):
                            r = _rho.copy()
                            r[_j] = t
                            return _s * _optimal_gain(sys, r)[_i]

                        t_best, _ = _golden_min(along, a, b, refine_tol)
                        rho[j] = t_best
                kv = _optimal_gain(sys, rho)
                samples.append((rho.copy(), kv))
                tight_lo = np.minimum(tight_lo, kv)
                tight_hi = np.maximum(tight_hi, kv)

    box = HyperRectangle(tight_lo - eps, tight_hi + eps)
    return GainBoxResult(
        tight_lo=tight_lo,
        tight_hi=tight_hi,
        box=box,
        epsilon=float(eps),
        samples=tuple(samples),
    )


@dataclass(frozen=True)
class ContainmentWitness:
    index: int  # which stability polynomial
    k_unstable: np.ndarray  # point with f_i <= 0 (exact-arithmetic checked)
    k_box: np.ndarray  # nearest box point
    rho: np.ndarray
    distance: float
    f_value: float

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "k_unstable": self.k_unstable.tolist(),
            "k_box": self.k_box.tolist(),
            "rho": self.rho.tolist(),
            "distance": self.distance,
            "f_value": self.f_value,
        }


@dataclass(frozen=True)
class ContainmentReport:
    d: np.ndarray  # upper bounds on the true distances, one per polynomial
    witnesses: tuple[ContainmentWitness, ...]
    contained: bool
    delta_safe: float

    def as_dict(self) -> dict:
        return {
            "d": self.d.tolist(),
            "witnesses": [w.as_dict() for w in self.witnesses],
            "contained": self.contained,
            "delta_safe": self.delta_safe,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


_MU_STAGES = (1e1, 1e2, 1e3, 1e4, 1e5)


def _distance_to_box(box: HyperRectangle, kv: np.ndarray) -> tuple[float, np.ndarray]:
    clamped = box.clamp(kv)
    return float(np.linalg.norm(kv - clamped)), clamped


def verify_containment(
    sys: PolytopicLpvSystem,
    box: HyperRectangle,
    multistart_count: int = 40,
    seed: int = 0,
    delta_safe: float = 1e-3,
) -> ContainmentReport:
    """Distance from the gain box to each stability-polynomial boundary.

    For every polynomial f_i the search minimizes the distance between a box
    point and a point with f_i <= 0, by a penalized multistart local search
    with increasing penalty weight. Every reported witness is re-checked by
    exact polynomial evaluation, so a near-zero distance is hard evidence
    against containment; large distances are only as good as the local search.
    """
    mn = sys.m * sys.n
    if box.dim != mn:
        raise DimensionMismatch(f"gain box has dim {box.dim}, expected {mn}")
    polys = stability_polynomials(sys)
    pbox = sys.param_box
    rng = np.random.default_rng(seed)
    reach = float(np.max(box.widths())) + 1.0

    d_values = []
    witnesses = []
    for i, f in enumerate(polys):
        partials = [f.partial(j) for j in range(f.nvars)]

        starts = []
        for v in box.vertices():
            starts.append((v, pbox.center()))
        while len(starts) < max(multistart_count, len(starts)):
            kv0 = box.center() + reach * rng.uniform(-1.0, 1.0, size=mn)
            rho0 = pbox.sample(rng)[0]
            starts.append((kv0, rho0))
        starts = starts[:max(multistart_count, 2**mn)]

        candidates = map_starts(
            lambda s: _solve_from_start(f, partials, box, pbox, mn, s[0], s[1]),
            starts,
        )
        found = [c for c in candidates if c is not None]
        # Deterministic merge regardless of execution order: best distance,
        # ties broken lexicographically on the witness coordinates.
        best = min(found, key=lambda c: (c[0], tuple(c[1]), tuple(c[2])), default=None)

        if best is None:
            # No feasible point found at all: no evidence against containment,
            # record an infinite distance with no witness point.
            d_values.append(math.inf)
            continue
        dist, kv, rho = best
        point = np.concatenate([kv, rho])
        fv = f.eval(point)  # exact-arithmetic re-verification of the witness
        _, k_box = _distance_to_box(box, kv)
        d_values.append(dist)
        witnesses.append(
            ContainmentWitness(
                index=i,
                k_unstable=kv,
                k_box=k_box,
                rho=rho,
                distance=dist,
                f_value=fv,
            )
        )

    d = np.asarray(d_values)
    contained = bool(np.all(d > delta_safe))
    return ContainmentReport(
        d=d, witnesses=tuple(witnesses), contained=contained, delta_safe=delta_safe
    )


def _solve_from_start(
    f: MultiPoly,
    partials: list[MultiPoly],
    box: HyperRectangle,
    pbox: Box,
    mn: int,
    kv0: np.ndarray,
    rho0: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray] | None:
    """One penalized local search; returns (distance, K, rho) or None."""

    def objective(x, mu):
        kv, rho = x[:mn], x[mn:]
        point = np.concatenate([kv, rho])
        dist2 = float(np.sum((kv - box.clamp(kv)) ** 2))
        viol = max(0.0, f.eval(point))
        val = dist2 + mu * viol * viol
        grad = np.concatenate([2.0 * (kv - box.clamp(kv)), np.zeros(pbox.dim)])
        if viol > 0.0:
            g_f = np.array([p.eval(point) for p in partials])
            grad = grad + 2.0 * mu * viol * g_f
        return val, grad

    bnds = [(None, None)] * mn + list(zip(pbox.lo, pbox.hi))
    x = np.concatenate([kv0, rho0])
    for mu in _MU_STAGES:
        res = minimize(
            objective,
            x,
            args=(mu,),
            jac=True,
            method="L-BFGS-B",
            bounds=bnds,
            options={"maxiter": 200},
        )
        x = res.x
    kv, rho = x[:mn], pbox.clamp(x[mn:])
    if f.eval(np.concatenate([kv, rho])) > 0.0:
        # Push along -grad f until the constraint actually holds.
        kv = _push_to_violation(f, partials, kv, rho, mn)
        if kv is None:
            return None
    dist, _ = _distance_to_box(box, kv)
    return dist, kv.copy(), rho.copy()


def _push_to_violation(
    f: MultiPoly, partials: list[MultiPoly], kv: np.ndarray, rho: np.ndarray, mn: int
) -> np.ndarray | None:
    """Nudge the gain part along -grad_K f until f <= 0; None when that fails."""
    point = np.concatenate([kv, rho])
    g = np.array([p.eval(point) for p in partials[:mn]])
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        return None
    direction = -g / norm
    t = max(1e-12, abs(f.eval(point)) / norm)
    for _ in range(80):
        cand = kv + t * direction
        if f.eval(np.concatenate([cand, rho])) <= 0.0:
            return cand
        t *= 2.0
    return None
