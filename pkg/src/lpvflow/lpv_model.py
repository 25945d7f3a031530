"""Polytopic LPV plant models, parameter trajectories, and vertex enumeration.

The plant is ``xdot = A(rho(t)) x + B u`` with ``A(rho) = A0 + sum_i rho_i A_i``,
a constant input matrix, and the scheduling parameter confined to an
axis-aligned box.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boxes import Box, HyperRectangle
from .errors import DimensionMismatch, ParamOutOfRange, SchemaError
from .linalg import Mat, is_pd, sym_eig, sym_eig_decomp, unvec

_Q_PSD_TOL = 1e-10
_PARAM_TOL = 1e-12


@dataclass(frozen=True)
class PolytopicLpvSystem:
    """Affine-in-parameter LPV system with LQR weights.

    A(rho) = A0 + sum_i rho_i * Ai[i];  B, Q, R constant;  rho in param_box.
    """

    A0: Mat
    Ai: tuple[Mat, ...]
    B: Mat
    Q: Mat
    R: Mat
    param_box: Box

    def __post_init__(self):
        a0 = np.asarray(self.A0, dtype=float)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
            raise DimensionMismatch(f"A0 must be square, got {a0.shape}")
        n = a0.shape[0]
        ai = tuple(np.asarray(a, dtype=float) for a in self.Ai)
        for idx, a in enumerate(ai):
            if a.shape != (n, n):
                raise DimensionMismatch(f"Ai[{idx}] has shape {a.shape}, expected {(n, n)}")
        b = np.asarray(self.B, dtype=float)
        if b.ndim != 2 or b.shape[0] != n:
            raise DimensionMismatch(f"B must be {n}xm, got {b.shape}")
        m = b.shape[1]
        q = np.asarray(self.Q, dtype=float)
        r = np.asarray(self.R, dtype=float)
        if q.shape != (n, n):
            raise DimensionMismatch(f"Q has shape {q.shape}, expected {(n, n)}")
        if r.shape != (m, m):
            raise DimensionMismatch(f"R has shape {r.shape}, expected {(m, m)}")
        if float(np.min(sym_eig(q))) < -_Q_PSD_TOL:
            raise SchemaError("Q must be positive semidefinite")
        if not is_pd(r):
            raise SchemaError("R must be positive definite")
        box = self.param_box
        if not isinstance(box, Box):
            box = Box.from_pairs(box)
        if box.dim != len(ai):
            raise DimensionMismatch(
                f"param_box has dim {box.dim}, but {len(ai)} parameter matrices given"
            )
        object.__setattr__(self, "A0", a0)
        object.__setattr__(self, "Ai", ai)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "R", r)
        object.__setattr__(self, "param_box", box)

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return len(self.Ai)


def eval_A(sys: PolytopicLpvSystem, rho, validate: bool = True) -> Mat:
    """A(rho) = A0 + sum_i rho_i Ai, with rho checked against the box."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if rho.shape[0] != sys.p:
        raise DimensionMismatch(f"rho has dim {rho.shape[0]}, system has p={sys.p}")
    if validate and not sys.param_box.contains(rho, tol=_PARAM_TOL):
        raise ParamOutOfRange(
            f"rho={rho.tolist()} outside the parameter box "
            f"[{sys.param_box.lo.tolist()}, {sys.param_box.hi.tolist()}]"
        )
    a = sys.A0.copy()
    for r, ai in zip(rho, sys.Ai):
        a += r * ai
    return a


def closed_loop_vertices(sys: PolytopicLpvSystem, box: HyperRectangle) -> list[Mat]:
    """All closed-loop corner matrices A(v_P) - B*unvec(v_C).

    One matrix per (parameter corner, gain-box corner) pair, 2^(p+mn) total,
    in lexicographic order with parameter coordinates first and (lo, hi) per
    coordinate.
    """
    mn = sys.m * sys.n
    if box.dim != mn:
        raise DimensionMismatch(f"gain box has dim {box.dim}, expected m*n = {mn}")
    out = []
    for v_p in sys.param_box.vertices():
        a = eval_A(sys, v_p, validate=False)
        for v_c in box.vertices():
            out.append(a - sys.B @ unvec(v_c, sys.m, sys.n))
    return out


@dataclass(frozen=True)
class AssumptionReport:
    """Grid check of stabilizability/detectability over the parameter box."""

    verdict: str  # "PASS" or "INCONCLUSIVE"
    grid_density: int
    points_checked: int
    failures: tuple[dict, ...]  # each: {"rho": [...], "check": ..., "rank": ...}

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


def _gram_rank(mat: Mat, tol: float = 1e-10) -> int:
    """Rank of a tall/wide matrix via eigenvalues of its Gram matrix."""
    gram = mat @ mat.T if mat.shape[0] <= mat.shape[1] else mat.T @ mat
    w = sym_eig(gram)
    scale = max(1.0, float(np.max(w))) if w.size else 1.0
    return int(np.sum(w > tol * scale))


def sqrtm_psd(q: Mat) -> Mat:
    """Symmetric square root of a PSD matrix (tiny negatives floored)."""
    w, v = sym_eig_decomp(q)
    return v @ np.diag(np.sqrt(np.maximum(w, 0.0))) @ v.T


def assumption_report(sys: PolytopicLpvSystem, grid_density: int) -> AssumptionReport:
    """Check controllability of (A(rho), B) and observability of (A(rho), Q^{1/2})
    on a uniform parameter grid.

    Full rank everywhere is sufficient for the standing assumptions; a rank
    drop only means the grid check is inconclusive (the weaker PBH-style
    conditions are not tested).
    """
    if grid_density < 2:
        raise SchemaError("grid_density must be at least 2")
    n = sys.n
    q_sqrt = sqrtm_psd(sys.Q)
    failures: list[dict] = []
    points = sys.param_box.grid(grid_density)
    for rho in points:
        a = eval_A(sys, rho, validate=False)
        blocks_c = [sys.B]
        blocks_o = [q_sqrt]
        for _ in range(n - 1):
            blocks_c.append(a @ blocks_c[-1])
            blocks_o.append(blocks_o[-1] @ a)
        ctrb = np.hstack(blocks_c)
        obsv = np.vstack(blocks_o)
        rank_c = _gram_rank(ctrb)
        rank_o = _gram_rank(obsv)
        if rank_c < n:
            failures.append({"rho": rho.tolist(), "check": "controllability", "rank": rank_c})
        if rank_o < n:
            failures.append({"rho": rho.tolist(), "check": "observability", "rank": rank_o})
    verdict = "PASS" if not failures else "INCONCLUSIVE"
    return AssumptionReport(
        verdict=verdict,
        grid_density=grid_density,
        points_checked=points.shape[0],
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class ParamTrajectory:
    """Admissible parameter signal rho(t).

    kind is one of "constant", "piecewise_constant", "sinusoid". Values are
    validated against the box at construction and clamped on emission to guard
    against floating-point drift at the box faces.
    """

    kind: str
    box: Box
    values: tuple = ()  # one rho per segment (piecewise) or the single rho
    times: tuple = ()  # strictly increasing switch instants (piecewise only)
    center: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    frequency: np.ndarray | None = None

    @classmethod
    def constant(cls, rho, box: Box) -> "ParamTrajectory":
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if not box.contains(rho, tol=_PARAM_TOL):
            raise ParamOutOfRange(f"constant value {rho.tolist()} outside the parameter box")
        return cls(kind="constant", box=box, values=(rho,))

    @classmethod
    def piecewise(cls, times, values, box: Box) -> "ParamTrajectory":
        """Right-continuous steps: values[k] holds on [times[k-1], times[k])."""
        times = tuple(float(t) for t in times)
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise SchemaError("switch times must be strictly increasing")
        vals = tuple(np.atleast_1d(np.asarray(v, dtype=float)) for v in values)
        if len(vals) != len(times) + 1:
            raise SchemaError(
                f"piecewise trajectory needs len(times)+1 = {len(times) + 1} values, got {len(vals)}"
            )
        for v in vals:
            if not box.contains(v, tol=_PARAM_TOL):
                raise ParamOutOfRange(f"segment value {v.tolist()} outside the parameter box")
        return cls(kind="piecewise_constant", box=box, values=vals, times=times)

    @classmethod
    def sinusoid(cls, center, amplitude, frequency, box: Box) -> "ParamTrajectory":
        """rho_i(t) = center_i + amplitude_i * sin(2*pi*frequency_i*t)."""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        amplitude = np.atleast_1d(np.asarray(amplitude, dtype=float))
        frequency = np.atleast_1d(np.asarray(frequency, dtype=float))
        if not (center.shape == amplitude.shape == frequency.shape):
            raise DimensionMismatch("center, amplitude, frequency must share a shape")
        if np.any(amplitude < 0):
            raise SchemaError("amplitudes must be nonnegative")
        if not (
            box.contains(center - amplitude, tol=_PARAM_TOL)
            and box.contains(center + amplitude, tol=_PARAM_TOL)
        ):
            raise ParamOutOfRange("sinusoid range escapes the parameter box")
        return cls(
            kind="sinusoid", box=box, center=center, amplitude=amplitude, frequency=frequency
        )

    def value(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            rho = self.values[0]
        elif self.kind == "piecewise_constant":
            rho = self.values[bisect.bisect_right(self.times, t)]
        else:
            rho = self.center + self.amplitude * np.sin(
                2.0 * math.pi * self.frequency * t
            )
        return self.box.clamp(rho)

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        """Discontinuity instants strictly inside (t0, t1)."""
        if self.kind != "piecewise_constant":
            return []
        return [t for t in self.times if t0 < t < t1]

    def as_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.values[0].tolist()}
        if self.kind == "piecewise_constant":
            return {
                "kind": "piecewise_constant",
                "times": list(self.times),
                "values": [v.tolist() for v in self.values],
            }
        return {
            "kind": "sinusoid",
            "center": self.center.tolist(),
            "amplitude": self.amplitude.tolist(),
            "frequency": self.frequency.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, box: Box) -> "ParamTrajectory":
        try:
            kind = d["kind"]
            if kind == "constant":
                return cls.constant(d["value"], box)
            if kind == "piecewise_constant":
                return cls.piecewise(d["times"], d["values"], box)
            if kind == "sinusoid":
                return cls.sinusoid(d["center"], d["amplitude"], d["frequency"], box)
        except KeyError as e:
            raise SchemaError(f"trajectory payload missing field {e}") from e
        raise SchemaError(f"unknown trajectory kind {d.get('kind')!r}")


# -- JSON ingestion ---------------------------------------------------------


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SchemaError(f"{where}: missing required field '{key}'")
    return d[key]


def _matrix_field(d: dict, key: str, shape: tuple[int, int], where: str) -> Mat:
    raw = _require(d, key, where)
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: field '{key}' is not numeric: {e}") from e
    if arr.shape != shape:
        raise SchemaError(f"{where}: field '{key}' has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{where}: field '{key}' contains non-finite entries")
    return arr


def system_from_dict(d: dict, where: str = "system") -> PolytopicLpvSystem:
    """Strictly validated construction from the JSON document layout."""
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object, got {type(d).__name__}")
    n = _require(d, "n", where)
    m = _require(d, "m", where)
    p = _require(d, "p", where)
    for name, v in (("n", n), ("m", m), ("p", p)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise SchemaError(f"{where}: field '{name}' must be a positive integer, got {v!r}")
    a0 = _matrix_field(d, "A0", (n, n), where)
    ai_raw = _require(d, "Ai", where)
    if not isinstance(ai_raw, list) or len(ai_raw) != p:
        raise SchemaError(f"{where}: field 'Ai' must be a list of {p} matrices")
    ai = [
        _matrix_field({"Ai": a}, "Ai", (n, n), f"{where}.Ai[{i}]") for i, a in enumerate(ai_raw)
    ]
    b = _matrix_field(d, "B", (n, m), where)
    q = _matrix_field(d, "Q", (n, n), where)
    r = _matrix_field(d, "R", (m, m), where)
    pb_raw = _require(d, "param_box", where)
    try:
        box = Box.from_pairs(pb_raw)
    except SchemaError as e:
        raise SchemaError(f"{where}: field 'param_box': {e}") from e
    if box.dim != p:
        raise SchemaError(f"{where}: param_box has {box.dim} pairs, expected p = {p}")
    try:
        return PolytopicLpvSystem(A0=a0, Ai=tuple(ai), B=b, Q=q, R=r, param_box=box)
    except (DimensionMismatch, SchemaError) as e:
        raise SchemaError(f"{where}: {e}") from e


def system_to_dict(sys: PolytopicLpvSystem) -> dict:
    return {
        "n": sys.n,
        "m": sys.m,
        "p": sys.p,
        "A0": sys.A0.tolist(),
        "Ai": [a.tolist() for a in sys.Ai],
        "B": sys.B.tolist(),
        "Q": sys.Q.tolist(),
        "R": sys.R.tolist(),
        "param_box": [[float(lo), float(hi)] for lo, hi in zip(sys.param_box.lo, sys.param_box.hi)],
    }


def load_system(path) -> PolytopicLpvSystem:
    """Read and validate a system document from a JSON file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return system_from_dict(doc, where=str(path))
