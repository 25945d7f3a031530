"""Stability certification.

Routh tables and Hurwitz checks (no nonsymmetric eigensolver anywhere),
symbolic stability-region polynomials in the gain and parameter variables, and
a common-Lyapunov-matrix search with an independent verification step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegreeGuard,
    DimensionMismatch,
    NotHurwitzInput,
    SchemaError,
    ZeroPivot,
)
from .linalg import Mat, char_poly, lyap_kernel, sym_eig, sym_eig_decomp
from .lpv_model import PolytopicLpvSystem
from .multipoly import MultiPoly

FEASIBILITY_MARGIN = -1e-6


# -- Routh tables ------------------------------------------------------------


@dataclass(frozen=True)
class RouthTable:
    """Classical Routh array of a monic polynomial."""

    degree: int
    rows: tuple[tuple[float, ...], ...]
    first_column: np.ndarray  # length degree + 1

    def all_positive(self) -> bool:
        return bool(np.all(self.first_column > 0.0))


def routh_table(coeffs) -> RouthTable:
    """Build the Routh array; raises ZeroPivot when a first-column entry is 0.

    The classical singular-case workarounds (epsilon rows) are deliberately
    not applied; a zero pivot means the strict sign criterion is inconclusive.
    """
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    if c.size < 2:
        raise DimensionMismatch("polynomial degree must be at least 1")
    if c[0] != 1.0:
        raise SchemaError(f"polynomial must be monic, leading coefficient is {c[0]}")
    n = c.size - 1
    width = n // 2 + 1
    rows = np.zeros((n + 1, width))
    rows[0, : len(c[0::2])] = c[0::2]
    rows[1, : len(c[1::2])] = c[1::2]
    for i in range(2, n + 1):
        pivot = rows[i - 1, 0]
        if pivot == 0.0:
            raise ZeroPivot(f"first-column entry of row {i - 1} is exactly zero")
        for j in range(width - 1):
            rows[i, j] = (pivot * rows[i - 2, j + 1] - rows[i - 2, 0] * rows[i - 1, j + 1]) / pivot
    first = rows[:, 0].copy()
    if np.any(first == 0.0):
        raise ZeroPivot("a first-column entry is exactly zero; sign test inconclusive")
    return RouthTable(degree=n, rows=tuple(tuple(r) for r in rows), first_column=first)


@dataclass(frozen=True)
class HurwitzCheck:
    stable: bool
    inconclusive: bool
    first_column: np.ndarray | None


def hurwitz_verdict(a: Mat) -> HurwitzCheck:
    """Routh-based stability verdict; zero pivots surface as inconclusive."""
    coeffs = char_poly(a)
    try:
        table = routh_table(coeffs)
    except ZeroPivot:
        return HurwitzCheck(stable=False, inconclusive=True, first_column=None)
    return HurwitzCheck(
        stable=table.all_positive(), inconclusive=False, first_column=table.first_column
    )


def check_hurwitz(a: Mat) -> bool:
    """True iff all Routh first-column entries are strictly positive."""
    return hurwitz_verdict(a).stable


# -- Symbolic stability-region polynomials ------------------------------------


def _sym_closed_loop(sys: PolytopicLpvSystem) -> list[list[MultiPoly]]:
    """A(rho) - B*K as a matrix of polynomials in (K_1..K_mn, rho_1..rho_p).

    Gain variables come first, in column-stacked order of the m-by-n gain.
    """
    n, m, p = sys.n, sys.m, sys.p
    nv = m * n + p
    const = lambda v: MultiPoly.constant(v, nv)
    entries = [[const(sys.A0[r, c]) for c in range(n)] for r in range(n)]
    for i in range(p):
        rho_i = MultiPoly.variable(m * n + i, nv)
        for r in range(n):
            for c in range(n):
                if sys.Ai[i][r, c] != 0.0:
                    entries[r][c] = entries[r][c] + sys.Ai[i][r, c] * rho_i
    # subtract B K with K[r][c] = variable index c*m + r (column-stacked)
    for r in range(n):
        for c in range(n):
            acc = entries[r][c]
            for j in range(m):
                acc = acc - sys.B[r, j] * MultiPoly.variable(c * m + j, nv)
            entries[r][c] = acc
    return entries


def _poly_mat_mul(a: list[list[MultiPoly]], b: list[list[MultiPoly]]) -> list[list[MultiPoly]]:
    n = len(a)
    out = []
    for r in range(n):
        row = []
        for c in range(n):
            acc = a[r][0] * b[0][c]
            for k in range(1, n):
                acc = acc + a[r][k] * b[k][c]
            row.append(acc)
        out.append(row)
    return out


def _sym_char_poly(a: list[list[MultiPoly]]) -> list[MultiPoly]:
    """Faddeev-LeVerrier over polynomial entries; returns (c_0=1, c_1, ..., c_n)."""
    n = len(a)
    nv = a[0][0].nvars
    one = MultiPoly.constant(1.0, nv)
    zero = MultiPoly.constant(0.0, nv)
    coeffs = [one]
    m = [[one if r == c else zero for c in range(n)] for r in range(n)]
    for k in range(1, n + 1):
        am = _poly_mat_mul(a, m)
        trace = am[0][0]
        for r in range(1, n):
            trace = trace + am[r][r]
        ck = (-1.0 / k) * trace
        coeffs.append(ck)
        m = [
            [am[r][c] + ck if r == c else am[r][c] for c in range(n)]
            for r in range(n)
        ]
    return coeffs


SYMBOLIC_DEGREE_GUARD = 5


def stability_polynomials(sys: PolytopicLpvSystem) -> list[MultiPoly]:
    """Polynomials f_1..f_n in (K, rho) whose joint positivity marks a
    Hurwitz closed loop.

    Built from the symbolic characteristic polynomial of A(rho) - BK and a
    division-free variant of the Routh recursion (each row is a positive
    multiple of the classical one wherever the earlier entries are positive,
    so the sign criterion is unchanged).
    """
    n = sys.n
    if n > SYMBOLIC_DEGREE_GUARD:
        raise DegreeGuard(f"symbolic stability polynomials limited to n <= {SYMBOLIC_DEGREE_GUARD}")
    if n < 1:
        raise DimensionMismatch("system order must be at least 1")
    coeffs = _sym_char_poly(_sym_closed_loop(sys))
    nv = coeffs[0].nvars
    zero = MultiPoly.constant(0.0, nv)
    if n == 1:
        return [coeffs[1]]
    width = n // 2 + 1
    rows: list[list[MultiPoly]] = [
        [coeffs[j] if j < len(coeffs) else zero for j in range(0, n + 1, 2)],
        [coeffs[j] if j < len(coeffs) else zero for j in range(1, n + 1, 2)],
    ]
    for row in rows:
        while len(row) < width:
            row.append(zero)
    for i in range(2, n + 1):
        row = []
        for j in range(width):
            up2 = rows[i - 2][j + 1] if j + 1 < width else zero
            up1 = rows[i - 1][j + 1] if j + 1 < width else zero
            row.append(rows[i - 1][0] * up2 - rows[i - 2][0] * up1)
        rows.append(row)
    # rows[k] holds table row k+1; f_1 = c_1, f_k = rows[k][0] for
    # 2 <= k <= n-1, f_n = c_n (the last divisionless entry only repeats
    # earlier signs).
    polys = [coeffs[1]]
    for k in range(2, n):
        polys.append(rows[k][0])
    polys.append(coeffs[n])
    return polys


def stability_var_names(sys: PolytopicLpvSystem) -> list[str]:
    """Printing names for the polynomial variables: K1..Kmn then rho1..rhop."""
    mn = sys.m * sys.n
    names = [f"K{i + 1}" for i in range(mn)]
    if sys.p == 1:
        names.append("rho")
    else:
        names.extend(f"rho{i + 1}" for i in range(sys.p))
    return names


# -- Common Lyapunov matrix ----------------------------------------------------


@dataclass(frozen=True)
class LmiVerification:
    lambda_min_x: float
    margins: np.ndarray  # per matrix: lambda_max(A'X + XA)

    @property
    def feasible(self) -> bool:
        return self.lambda_min_x > 0.0 and bool(np.all(self.margins < 0.0))


def verify_lmi(x: Mat, mats: list[Mat]) -> LmiVerification:
    """Margins of the vertex inequalities for a candidate Lyapunov matrix."""
    w = sym_eig(x)  # raises NotSymmetric on bad input
    margins = np.array([float(sym_eig(a.T @ x + x @ a)[-1]) for a in mats])
    return LmiVerification(lambda_min_x=float(w[0]), margins=margins)


@dataclass(frozen=True)
class StabilityCertificate:
    X: Mat
    margins: np.ndarray
    feasible: bool
    iterations: int
    phi: float  # worst margin at the returned X

    def as_dict(self) -> dict:
        return {
            "X": self.X.tolist(),
            "margins": self.margins.tolist(),
            "vertex_count": int(self.margins.shape[0]),
            "iterations": self.iterations,
            "feasible": self.feasible,
            "phi": self.phi,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _phi_and_subgrad(x: Mat, mats: list[Mat]) -> tuple[float, Mat]:
    """Worst-vertex margin and one subgradient of it in X."""
    worst = -np.inf
    grad = None
    for a in mats:
        s = a.T @ x + x @ a
        w, v = sym_eig_decomp(s)
        if w[-1] > worst:
            worst = float(w[-1])
            top = v[:, -1]
            grad = np.outer(a @ top, top) + np.outer(top, a @ top)
    return worst, grad


def _project_spectrum(x: Mat, floor: float = 1.0) -> Mat:
    """Nearest symmetric matrix with eigenvalues >= floor."""
    w, v = sym_eig_decomp(x)
    return v @ np.diag(np.maximum(w, floor)) @ v.T


def find_common_lyapunov(
    mats: list[Mat],
    seed: int = 0,
    restarts: int = 8,
    max_iter: int = 400,
) -> StabilityCertificate:
    """Search for one X > 0 making every A'X + XA negative definite.

    Subgradient descent on the worst-vertex margin over the normalized cone
    {X : lambda_min(X) >= 1}, with seeded restarts. A feasible verdict is
    always re-verified through verify_lmi; an infeasible verdict only means
    no certificate was found within the budget.
    """
    mats = [np.asarray(a, dtype=float) for a in mats]
    if not mats:
        raise DimensionMismatch("need at least one matrix")
    n = mats[0].shape[0]
    for a in mats:
        if a.shape != (n, n):
            raise DimensionMismatch("all matrices must share one square shape")
    for idx, a in enumerate(mats):
        verdict = hurwitz_verdict(a)
        if not verdict.stable:
            raise NotHurwitzInput(
                f"matrix {idx} is not Hurwitz (inconclusive={verdict.inconclusive}); "
                "a common Lyapunov matrix cannot exist"
            )

    rng = np.random.default_rng(seed)
    starts: list[Mat] = [np.eye(n)]
    # Warm start: Lyapunov solution for the mean matrix, when it is stable.
    mean = sum(mats) / len(mats)
    if hurwitz_verdict(mean).stable:
        try:
            xm = lyap_kernel(mean, np.eye(n))
            starts.append(_project_spectrum(0.5 * (xm + xm.T)))
        except Exception:
            pass
    while len(starts) < restarts:
        g = rng.standard_normal((n, n))
        starts.append(_project_spectrum(np.eye(n) + g @ g.T))

    best_x = starts[0]
    best_phi = np.inf
    total_iters = 0
    for x0 in starts[:restarts]:
        x = _project_spectrum(x0)
        phi, _ = _phi_and_subgrad(x, mats)
        if phi < best_phi:
            best_phi, best_x = phi, x.copy()
        for it in range(1, max_iter + 1):
            phi, grad = _phi_and_subgrad(x, mats)
            total_iters += 1
            if phi < best_phi:
                best_phi, best_x = phi, x.copy()
            gnorm = float(np.linalg.norm(grad))
            if gnorm == 0.0:
                break
            step = max(1.0, float(np.linalg.norm(x))) / (np.sqrt(it) * 2.0)
            x = _project_spectrum(x - step * (grad / gnorm))
        if best_phi < 10 * FEASIBILITY_MARGIN:
            break

    # Pin the scale: the LMI is homogeneous in X, so report the representative
    # with lambda_min(X) = 1. Keeps phi comparable across runs and restarts.
    best_x = best_x / float(sym_eig(best_x)[0])
    check = verify_lmi(best_x, mats)
    phi = float(np.max(check.margins))
    feasible = phi < FEASIBILITY_MARGIN and check.lambda_min_x > 0.0
    return StabilityCertificate(
        X=best_x, margins=check.margins, feasible=feasible, iterations=total_iters, phi=phi
    )
