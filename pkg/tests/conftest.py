"""Shared fixtures.

Heavy artifacts (the computed gain box, the LMI certificate) are built once
per session because several acceptance criteria and module tests share them
and the runtime budget is tight.
"""

from __future__ import annotations

import numpy as np
import pytest

from lpvflow import case_study
from lpvflow.bounds import compute_gain_box
from lpvflow.cert import find_common_lyapunov
from lpvflow.lpv_model import closed_loop_vertices


@pytest.fixture(scope="session")
def benchmark():
    return case_study.benchmark_system()


@pytest.fixture(scope="session")
def reference_box():
    return case_study.REFERENCE_GAIN_BOX


@pytest.fixture(scope="session")
def reference_vertices(benchmark, reference_box):
    mats = closed_loop_vertices(benchmark, reference_box)
    assert len(mats) == 8
    return mats


@pytest.fixture(scope="session")
def own_certificate(reference_vertices):
    cert = find_common_lyapunov(reference_vertices, seed=0)
    assert cert.feasible
    return cert


@pytest.fixture(scope="session")
def computed_gain_box(benchmark):
    return compute_gain_box(benchmark, grid_density=64, refine_tol=1e-6, eps=0.01)


@pytest.fixture(scope="session")
def demo_traces(benchmark):
    """Dynamic-vs-static pair on the documented case-study scenario."""
    from lpvflow.sim import simulate_closed_loop, simulate_static

    cfg = case_study.demo_config(benchmark)
    dyn = simulate_closed_loop(benchmark, case_study.REFERENCE_GAIN_BOX, cfg)
    stat = simulate_static(
        benchmark,
        case_study.nominal_gain(benchmark).reshape(1, 2),
        cfg.x0,
        cfg.trajectory,
        cfg.T,
        cfg.dt,
    )
    return dyn, stat


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)


def random_stable_matrix(rng: np.random.Generator, n: int, spread: float = 2.0) -> np.ndarray:
    """Random Hurwitz matrix built from a known negative spectrum.

    Real eigenvalues with a random similarity transform, so the ground truth
    spectrum is available to the caller.
    """
    eigs = -rng.uniform(0.1, spread, size=n)
    t = rng.normal(size=(n, n))
    while abs(np.linalg.det(t)) < 1e-3:
        t = rng.normal(size=(n, n))
    return t @ np.diag(eigs) @ np.linalg.inv(t)


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    m = rng.normal(size=(n, n))
    return m @ m.T + floor * np.eye(n)


def lyapunov_quadrature(a: np.ndarray, w: np.ndarray, horizon: float = 40.0, step: float = 1e-3) -> np.ndarray:
    """Composite-Simpson evaluation of the integral form of the Lyapunov
    solution, integral of expm(A't) W expm(At) dt over [0, horizon].

    Independent of the solver under test: uses scipy's matrix exponential for
    one step and marches the transition matrix. The horizon must be long
    enough that the integrand tail is negligible against the tolerance; use
    spectra bounded away from the imaginary axis.
    """
    from scipy.linalg import expm

    n_steps = int(round(horizon / step))
    if n_steps % 2 == 1:
        n_steps += 1
    m = expm(a * step)
    e = np.eye(a.shape[0])
    total = np.zeros_like(w)
    for k in range(n_steps + 1):
        f = e.T @ w @ e
        if k == 0 or k == n_steps:
            weight = 1.0
        elif k % 2 == 1:
            weight = 4.0
        else:
            weight = 2.0
        total += weight * f
        e = e @ m
    return (step / 3.0) * total


def scalar_plant():
    """One-state one-input system with a = -1, b = 1, q = r = 1 and a frozen
    parameter, for closed-form checks (optimal value sqrt(2) - 1)."""
    from lpvflow.boxes import Box
    from lpvflow.lpv_model import PolytopicLpvSystem

    return PolytopicLpvSystem(
        A0=np.array([[-1.0]]),
        Ai=[np.zeros((1, 1))],
        B=np.array([[1.0]]),
        Q=np.eye(1),
        R=np.eye(1),
        param_box=Box([0.0], [0.0]),
    )
