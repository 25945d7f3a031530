"""Frozen-parameter LQR machinery: Lyapunov solves, Riccati solve, cost and
cost gradient of a stabilizing gain.

Cost convention: f(K) = tr(P_K), i.e. the LQR cost averaged over an identity
covariance of initial states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cert import hurwitz_verdict
from .errors import (
    DimensionMismatch,
    NoStabilizingInit,
    NotConverged,
    NotHurwitz,
    SchemaError,
    SingularMatrix,
)
from .linalg import Mat, is_pd, lyap_kernel, require_symmetric, solve_linear
from .lpv_model import PolytopicLpvSystem, eval_A

_RESIDUAL_TOL = 1e-9
_NEWTON_MAX_ITER = 100


def _inf_norm(a: Mat) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def lyapunov_residual(a: Mat, w: Mat, p: Mat) -> float:
    return _inf_norm(a.T @ p + p @ a + w)


def solve_lyapunov(a: Mat, w: Mat) -> Mat:
    """Solve A'P + PA + W = 0 for Hurwitz A and symmetric W.

    The stability gate runs through the Routh-based check; drifting close to
    the imaginary axis surfaces as SingularMatrix from the vectorized solve or
    from the residual guard.
    """
    w = require_symmetric(w)
    verdict = hurwitz_verdict(a)
    if not verdict.stable:
        detail = "inconclusive stability test" if verdict.inconclusive else "unstable"
        raise NotHurwitz(f"Lyapunov solve needs a Hurwitz matrix ({detail})")
    p = lyap_kernel(a, w)
    p = 0.5 * (p + p.T)
    res = lyapunov_residual(a, w, p)
    tol = _RESIDUAL_TOL * (1.0 + _inf_norm(w))
    if res > tol:
        raise SingularMatrix(
            f"Lyapunov solution residual {res:.3e} exceeds {tol:.3e}; "
            "eigenvalues too close to the imaginary axis"
        )
    return p


def care_residual(a: Mat, b: Mat, q: Mat, r: Mat, p: Mat) -> float:
    """Max-abs entry of A'P + PA - P B R^{-1} B' P + Q."""
    rinv_btp = solve_linear(r, b.T @ p)
    return _inf_norm(a.T @ p + p @ a - p @ b @ rinv_btp + q)


def _bass_initial_gain(a: Mat, b: Mat) -> Mat | None:
    """Stabilizing gain via the shifted-Lyapunov construction.

    With beta exceeding the largest eigenvalue magnitude, -(A + beta I) is
    Hurwitz; the Gramian-like solution Z of (A+beta I) Z + Z (A+beta I)' = 2BB'
    is invertible for controllable pairs and K = B' Z^{-1} stabilizes A - BK.
    """
    n = a.shape[0]
    beta = 1.0 + float(np.linalg.norm(a, np.inf))
    s = -(a + beta * np.eye(n))
    try:
        z = lyap_kernel(s.T, 2.0 * b @ b.T)
        z = 0.5 * (z + z.T)
        k = solve_linear(z, b).T  # K = B' Z^{-1}  <=>  K' = Z^{-1} B (Z symmetric)
    except SingularMatrix:
        return None
    return k


def _find_stabilizing_gain(a: Mat, b: Mat, seed: int) -> Mat:
    n, m = a.shape[0], b.shape[1]
    if hurwitz_verdict(a).stable:
        return np.zeros((m, n))
    k = _bass_initial_gain(a, b)
    if k is not None and hurwitz_verdict(a - b @ k).stable:
        return k
    # Randomized fallback: widen the search box until something stabilizes.
    rng = np.random.default_rng(seed)
    for scale_pow in range(12):
        scale = 2.0**scale_pow
        for _ in range(64):
            cand = scale * rng.standard_normal((m, n))
            if hurwitz_verdict(a - b @ cand).stable:
                return cand
    raise NoStabilizingInit(
        "no stabilizing initial gain found (shifted-Lyapunov construction and "
        "randomized search both failed); is (A, B) stabilizable?"
    )


def solve_care(a: Mat, b: Mat, q: Mat, r: Mat, seed: int = 0) -> tuple[Mat, Mat]:
    """Stabilizing solution of A'P + PA - P B R^{-1} B' P + Q = 0.

    Returns (P, K) with K = R^{-1} B' P and A - BK Hurwitz. Newton iteration
    on the gain, every step a single Lyapunov solve.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"B has shape {b.shape}, expected ({a.shape[0]}, m)")
    q = require_symmetric(np.asarray(q, dtype=float))
    r = require_symmetric(np.asarray(r, dtype=float))
    if not is_pd(r):
        raise SchemaError("R must be positive definite")

    k = _find_stabilizing_gain(a, b, seed)
    tol = _RESIDUAL_TOL * (1.0 + _inf_norm(q))
    p = None
    for _ in range(_NEWTON_MAX_ITER):
        p = solve_lyapunov(a - b @ k, q + k.T @ r @ k)
        k_next = solve_linear(r, b.T @ p)
        if care_residual(a, b, q, r, p) <= tol:
            k = k_next
            break
        k = k_next
    else:
        raise NotConverged(
            f"Riccati iteration did not reach residual {tol:.3e} "
            f"within {_NEWTON_MAX_ITER} steps"
        )
    if not hurwitz_verdict(a - b @ k).stable:
        raise NotConverged("Riccati iteration returned a non-stabilizing gain")
    return p, k


@dataclass(frozen=True)
class LqrEvaluation:
    """Cost and gradient data of a stabilizing gain at one frozen parameter."""

    K: Mat
    P_K: Mat
    Y_K: Mat
    cost: float
    grad: Mat


def evaluate(sys: PolytopicLpvSystem, rho, k: Mat) -> LqrEvaluation:
    """Cost tr(P_K) and gradient 2(RK - B'P_K)Y_K at a frozen parameter.

    Raises NotHurwitz when K does not stabilize A(rho) - BK; the cost and
    gradient are undefined there and are never fabricated.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (sys.m, sys.n):
        raise DimensionMismatch(f"K has shape {k.shape}, expected {(sys.m, sys.n)}")
    a = eval_A(sys, rho)
    a_k = a - sys.B @ k
    verdict = hurwitz_verdict(a_k)
    if not verdict.stable:
        detail = "inconclusive stability test" if verdict.inconclusive else "unstable"
        raise NotHurwitz(f"gain does not stabilize the frozen-parameter plant ({detail})")
    p = solve_lyapunov(a_k, sys.Q + k.T @ sys.R @ k)
    y = solve_lyapunov(a_k.T, np.eye(sys.n))
    grad = 2.0 * (sys.R @ k - sys.B.T @ p) @ y
    return LqrEvaluation(K=k, P_K=p, Y_K=y, cost=float(np.trace(p)), grad=grad)
