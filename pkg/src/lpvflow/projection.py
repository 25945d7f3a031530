"""Box-constraint geometry for the gain flow.

The box is described by inequality values g(k) >= 0 (lower faces first, then
upper faces), and the projection matrix M(k) removes the outward-normal
component of a vector field at the faces, leaving the interior and each face
invariant under the flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import HyperRectangle
from .errors import DimensionMismatch, OutsideManifold
from .lqr_core import evaluate
from .linalg import Mat, solve_linear, vec
from .lpv_model import PolytopicLpvSystem

INSIDE_TOL = 1e-9


def constraint_values(box: HyperRectangle, k: np.ndarray) -> np.ndarray:
    """g(k): first the mn lower-face gaps k - lo, then the upper gaps hi - k."""
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.shape[0] != box.dim:
        raise DimensionMismatch(f"gain vector has dim {k.shape[0]}, box has {box.dim}")
    return np.concatenate([k - box.lo, box.hi - k])


def constraint_jacobian(box: HyperRectangle) -> Mat:
    """Rows of dg/dk: +I block for lower faces, -I block for upper faces."""
    eye = np.eye(box.dim)
    return np.vstack([eye, -eye])


@dataclass(frozen=True)
class ConstraintEval:
    g: np.ndarray  # 2mn inequality values
    J: Mat  # 2mn x mn Jacobian of g
    F: Mat  # 2 diag(g) + J J'
    M: Mat  # I - J' F^{-1} J


def eval_constraints(box: HyperRectangle, k: np.ndarray) -> ConstraintEval:
    """Inequality values and the tangent projection matrix at a point.

    Valid on the box and a -1e-9 drift band around it; beyond that the
    projection loses its definiteness guarantee and OutsideManifold is raised.
    """
    g = constraint_values(box, k)
    if float(np.min(g)) < -INSIDE_TOL:
        raise OutsideManifold(
            f"point violates the box by {-float(np.min(g)):.3e} (band is {INSIDE_TOL:.0e})"
        )
    j = constraint_jacobian(box)
    f = 2.0 * np.diag(g) + j @ j.T
    m = np.eye(box.dim) - j.T @ solve_linear(f, j)
    return ConstraintEval(g=g, J=j, F=f, M=m)


def projected_gradient(
    sys: PolytopicLpvSystem, rho, k: Mat, box: HyperRectangle, alpha: float
) -> np.ndarray:
    """Gain velocity vec(Kdot) = -alpha * M(vec K) * vec(grad f).

    On a face the outward normal component is annihilated, so the box and its
    boundary are invariant under the resulting flow.
    """
    k = np.asarray(k, dtype=float)
    ce = eval_constraints(box, vec(k))
    ev = evaluate(sys, rho, k)
    return -float(alpha) * (ce.M @ vec(ev.grad))
