"""Bundled benchmark: a second-order, single-input plant with one parameter.

The plant matrix is A(rho) = [[-rho, 1], [-0.2, 1]] with rho in [0.5, 2],
B = [1, 0.5]^T, Q = I, R = 2. The module collects the reference values the
repro command checks its artifacts against, plus the documented demonstration
scenario (initial state, initial gain, parameter trajectory, learning rate).

The reference cost pair (488.9, 660.3) was obtained on a parameter trajectory
that is not part of the reference data, so it cannot be reproduced exactly;
the demonstration scenario below is a documented stand-in and the cost
comparison is checked at the level of the relative-reduction band.
"""

from __future__ import annotations

import numpy as np

from .boxes import Box, HyperRectangle
from .lpv_model import ParamTrajectory, PolytopicLpvSystem
from .lqr_core import solve_care
from .sim import SimConfig

NOMINAL_PARAMETER = 1.25
LEARNING_RATE = 100.0
HORIZON = 6.0
MAX_STEP = 0.05

# Gain box and quadratic-stability certificate the benchmark is checked
# against (given to two decimal places, tolerances in the repro report).
REFERENCE_GAIN_BOX = HyperRectangle(
    np.array([-0.94, 4.49]), np.array([-0.23, 5.97])
)
REFERENCE_CERTIFICATE_X = np.array([[0.9, -2.2], [-2.2, 7.7]])

# Stability-boundary polynomials over (K1, K2, rho), exact coefficients:
#   f1 = K1 + K2/2 + rho - 1
#   f2 = K2*rho/2 - K2/5 - rho - K1/2 + 1/5
REFERENCE_BOUNDARY_COEFFS: tuple[dict, dict] = (
    {(1, 0, 0): 1.0, (0, 1, 0): 0.5, (0, 0, 1): 1.0, (0, 0, 0): -1.0},
    {(0, 1, 1): 0.5, (0, 1, 0): -0.2, (1, 0, 0): -0.5, (0, 0, 1): -1.0, (0, 0, 0): 0.2},
)

REFERENCE_COST_DYNAMIC = 488.9
REFERENCE_COST_STATIC = 660.3
REDUCTION_BAND = (0.15, 0.40)

GAIN_BOX_TOLERANCE = 0.05  # entrywise, on the reference box corners
FROZEN_PARAMETER_VALUES = (0.5, 1.25, 2.0)

# The optima at the extreme parameter values sit within ~0.002 of the
# reference box faces, where the projection factor damps the normal approach
# (each diagonal entry behaves like twice the face distance). Convergence
# experiments therefore use the box inflated by this margin so every frozen
# optimum is interior with usable clearance; invariance and cost experiments
# keep the reference box.
CONVERGENCE_BOX_MARGIN = 0.1

# Demonstration state: along the slowest closed-loop mode of the nominal gain
# at the low parameter extreme, where the fixed design is farthest from
# optimal, so the benefit of online adaptation is visible within the window.
DEMO_X0 = np.array([-3.0, -0.13])

# Step-change parameter trajectory: a long dwell at the low extreme followed
# by two short excursions to the high extreme. Adaptation pays off during low
# dwells (the nominal gain is nearly optimal at high rho already); excursions
# exercise the full parameter range and the switching machinery.
DEMO_SWITCH_TIMES = (5.0, 5.15, 5.5, 5.65)
DEMO_VALUES = (0.5, 2.0, 0.5, 2.0, 0.5)


def benchmark_system() -> PolytopicLpvSystem:
    return PolytopicLpvSystem(
        A0=np.array([[0.0, 1.0], [-0.2, 1.0]]),
        Ai=(np.array([[-1.0, 0.0], [0.0, 0.0]]),),
        B=np.array([[1.0], [0.5]]),
        Q=np.eye(2),
        R=np.array([[2.0]]),
        param_box=Box(np.array([0.5]), np.array([2.0])),
    )


def optimal_gain(sys: PolytopicLpvSystem, rho: float) -> np.ndarray:
    """Frozen-parameter optimal gain (m x n) via the Riccati equation."""
    from .lpv_model import eval_A

    _, k = solve_care(eval_A(sys, np.array([rho])), sys.B, sys.Q, sys.R)
    return k


def nominal_gain(sys: PolytopicLpvSystem) -> np.ndarray:
    """Optimal gain for the frozen nominal parameter (the static baseline)."""
    return optimal_gain(sys, NOMINAL_PARAMETER)


def demo_trajectory(sys: PolytopicLpvSystem) -> ParamTrajectory:
    return ParamTrajectory.piecewise(
        times=list(DEMO_SWITCH_TIMES),
        values=[np.array([v]) for v in DEMO_VALUES],
        box=sys.param_box,
    )


def demo_config(sys: PolytopicLpvSystem) -> SimConfig:
    """Dynamic-controller scenario; the static baseline shares everything
    except that its gain stays at the nominal optimum."""
    return SimConfig(
        x0=DEMO_X0.copy(),
        K0=nominal_gain(sys),
        alpha=LEARNING_RATE,
        T=HORIZON,
        dt=MAX_STEP,
        trajectory=demo_trajectory(sys),
        integrator="rk45_adaptive",
    )
