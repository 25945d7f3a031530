"""Acceptance gate: thirteen criteria covering the full pipeline, each with
the tolerance and runtime budget it was specified with.

Every test prints one verdict line. Criterion 02 checks the gain-box
certificate matrix exactly as bundled with the case study; that matrix does
not satisfy the vertex inequalities (worst margin +0.57 at the fifth vertex),
so the criterion is red. The failure is real and kept visible: our own
independently found certificate (criterion 03) proves the underlying
quadratic-stability claim, which isolates the discrepancy to the bundled
matrix itself. See the repro report for the full analysis.
"""

from __future__ import annotations

import time

import numpy as np

from lpvflow import case_study
from lpvflow.bounds import compute_gain_box, verify_containment
from lpvflow.cert import (
    find_common_lyapunov,
    hurwitz_verdict,
    stability_polynomials,
    verify_lmi,
)
from lpvflow.errors import NotHurwitz
from lpvflow.linalg import sym_eig, unvec
from lpvflow.lpv_model import ParamTrajectory, closed_loop_vertices
from lpvflow.lqr_core import evaluate, solve_care
from lpvflow.multipoly import MultiPoly
from lpvflow.projection import eval_constraints
from lpvflow.sim import SimConfig, simulate_closed_loop

from conftest import lyapunov_quadrature, random_spd, random_stable_matrix
from test_cert import matrix_with_spectrum


def _verdict(num: int, name: str, ok: bool, elapsed: float, budget: float, detail: str):
    status = "PASS" if ok and elapsed <= budget else "FAIL"
    print(f"[{status}] criterion {num:02d} {name}: {detail} ({elapsed:.2f}s / budget {budget:.0f}s)")
    assert ok, f"criterion {num:02d} {name}: {detail}"
    assert elapsed <= budget, f"criterion {num:02d} exceeded budget: {elapsed:.2f}s > {budget}s"


def test_01_stability_polynomials_exact(benchmark):
    t0 = time.perf_counter()
    f1, f2 = stability_polynomials(benchmark)
    ref1, ref2 = case_study.REFERENCE_BOUNDARY_COEFFS
    diff = max(
        f1.max_coeff_diff(MultiPoly(f1.nvars, ref1)),
        f2.max_coeff_diff(MultiPoly(f2.nvars, ref2)),
    )
    elapsed = time.perf_counter() - t0
    _verdict(
        1,
        "stability boundary polynomials",
        diff <= 1e-12,
        elapsed,
        1.0,
        f"max coefficient deviation {diff:.1e}",
    )


def test_02_reference_certificate_matrix(benchmark, reference_vertices):
    t0 = time.perf_counter()
    x_ref = np.array(case_study.REFERENCE_CERTIFICATE_X)
    lam_min = float(sym_eig(x_ref)[0])
    check = verify_lmi(x_ref, reference_vertices)
    worst = float(np.max(check.margins))
    elapsed = time.perf_counter() - t0
    _verdict(
        2,
        "bundled certificate matrix",
        lam_min > 0 and worst < 0,
        elapsed,
        1.0,
        f"lambda_min(X) = {lam_min:.3f}, worst vertex margin {worst:+.3f} "
        "(positive margin means the matrix fails the vertex inequalities)",
    )


def test_03_certificate_search(benchmark, reference_vertices):
    t0 = time.perf_counter()
    cert = find_common_lyapunov(reference_vertices, seed=0)
    recheck = verify_lmi(cert.X, reference_vertices)
    worst = float(np.max(recheck.margins))
    ok = cert.feasible and worst < -1e-6 and recheck.lambda_min_x > 0
    elapsed = time.perf_counter() - t0
    _verdict(
        3,
        "independent certificate search",
        ok,
        elapsed,
        30.0,
        f"phi = {worst:.4e}, re-verified on all {len(reference_vertices)} vertices",
    )


def test_04_gain_box(benchmark, reference_box):
    t0 = time.perf_counter()
    result = compute_gain_box(benchmark, grid_density=64, refine_tol=1e-6, eps=0.01)
    dev = max(
        float(np.max(np.abs(result.box.lo - reference_box.lo))),
        float(np.max(np.abs(result.box.hi - reference_box.hi))),
    )
    elapsed = time.perf_counter() - t0
    _verdict(
        4,
        "optimal gain box",
        dev <= 0.05,
        elapsed,
        60.0,
        f"entrywise deviation from reference box {dev:.4f} (tolerance 0.05)",
    )


def test_05_containment(benchmark, computed_gain_box):
    t0 = time.perf_counter()
    report = verify_containment(benchmark, computed_gain_box.box, multistart_count=40, seed=0)
    polys = stability_polynomials(benchmark)
    witnesses_ok = all(
        polys[w.index].eval(np.concatenate([w.k_unstable, w.rho])) <= 1e-12
        for w in report.witnesses
    )
    ok = report.contained and bool(np.all(report.d > 0)) and witnesses_ok
    elapsed = time.perf_counter() - t0
    _verdict(
        5,
        "box containment distances",
        ok,
        elapsed,
        60.0,
        f"d = ({report.d[0]:.4f}, {report.d[1]:.4f}), witnesses re-verified",
    )


def test_06_frozen_parameter_optimality(benchmark):
    t0 = time.perf_counter()
    box = case_study.REFERENCE_GAIN_BOX.inflate(case_study.CONVERGENCE_BOX_MARGIN)
    worst_gap = 0.0
    worst_residual = 0.0
    for rho in (0.5, 1.25, 2.0):
        a_frozen = benchmark.A0 + rho * benchmark.Ai[0]
        p_star, k_star = solve_care(a_frozen, benchmark.B, benchmark.Q, benchmark.R)
        residual = float(
            np.max(
                np.abs(
                    a_frozen.T @ p_star
                    + p_star @ a_frozen
                    - p_star @ benchmark.B @ np.linalg.solve(benchmark.R, benchmark.B.T @ p_star)
                    + benchmark.Q
                )
            )
        )
        worst_residual = max(worst_residual, residual)
        cfg = SimConfig(
            x0=np.array([1.0, -1.0]),
            K0=box.center().reshape(1, 2),
            alpha=100.0,
            T=2.0,
            dt=0.05,
            trajectory=ParamTrajectory.constant([rho], benchmark.param_box),
        )
        trace = simulate_closed_loop(benchmark, box, cfg)
        gap = float(np.linalg.norm(unvec(trace.k[-1], 1, 2) - k_star))
        worst_gap = max(worst_gap, gap)
    elapsed = time.perf_counter() - t0
    _verdict(
        6,
        "frozen-parameter gain convergence",
        worst_gap < 1e-3 and worst_residual < 1e-9,
        elapsed,
        30.0,
        f"worst gain gap {worst_gap:.2e}, worst Riccati residual {worst_residual:.2e}",
    )


def test_07_box_invariance(benchmark, reference_box):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = np.inf
    for _ in range(20):
        n_switch = int(rng.integers(6, 12))
        times = np.sort(rng.uniform(0.2, 5.8, size=n_switch))
        while np.min(np.diff(times, prepend=0.0)) < 0.05:
            times = np.sort(rng.uniform(0.2, 5.8, size=n_switch))
        values = [[float(rng.uniform(0.5, 2.0))] for _ in range(n_switch + 1)]
        k0 = reference_box.center() + 0.9 * (
            reference_box.sample(rng)[0] - reference_box.center()
        )
        cfg = SimConfig(
            x0=rng.normal(size=2),
            K0=k0.reshape(1, 2),
            alpha=100.0,
            T=6.0,
            dt=0.05,
            trajectory=ParamTrajectory.piecewise(times, values, benchmark.param_box),
        )
        trace = simulate_closed_loop(benchmark, reference_box, cfg)
        assert trace.completed
        worst = min(worst, float(np.min(trace.min_g)))
    elapsed = time.perf_counter() - t0
    _verdict(
        7,
        "gain-box invariance under fast switching",
        worst >= -1e-6,
        elapsed,
        300.0,
        f"worst face clearance {worst:.3e} across 20 trajectories",
    )


def test_08_cost_improvement(benchmark, demo_traces):
    t0 = time.perf_counter()
    dyn, stat = demo_traces
    reduction = (stat.final_cost - dyn.final_cost) / stat.final_cost
    ok = dyn.final_cost < stat.final_cost and 0.15 <= reduction <= 0.40
    elapsed = time.perf_counter() - t0
    _verdict(
        8,
        "transient cost improvement",
        ok,
        elapsed,
        120.0,
        f"dynamic {dyn.final_cost:.3f} vs static {stat.final_cost:.3f}, "
        f"reduction {100 * reduction:.1f}% (band 15-40%; the bundled pair "
        "488.9/660.3 is indicative only, its schedule being unpublished)",
    )


def test_09_gradient_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    from lpvflow.boxes import Box
    from lpvflow.lpv_model import PolytopicLpvSystem

    h = 1e-5
    worst = 0.0
    done = 0
    while done < 50:
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 3))
        a = rng.normal(size=(n, n))
        b = rng.normal(size=(n, m))
        q = random_spd(rng, n)
        r = random_spd(rng, m, floor=0.5)
        try:
            _, k_star = solve_care(a, b, q, r)
        except Exception:
            continue
        sys = PolytopicLpvSystem(
            A0=a,
            Ai=[np.zeros((n, n))],
            B=b,
            Q=q,
            R=r,
            param_box=Box([0.0], [0.0]),
        )
        k = k_star + rng.normal(scale=0.1, size=(m, n))
        try:
            ev = evaluate(sys, [0.0], k)
        except NotHurwitz:
            continue
        if ev.cost > 1e3:
            # central differences at the pinned step lose ~eps*f/(2h) to
            # cancellation; beyond this cost the oracle itself is coarser
            # than the tolerance, so such draws cannot probe the gradient
            continue
        fd = np.zeros((m, n))
        for i in range(m):
            for j in range(n):
                e = np.zeros((m, n))
                e[i, j] = h
                fd[i, j] = (
                    evaluate(sys, [0.0], k + e).cost - evaluate(sys, [0.0], k - e).cost
                ) / (2 * h)
        worst = max(
            worst,
            float(np.linalg.norm(ev.grad - fd)) / float(np.linalg.norm(fd)),
        )
        done += 1
    elapsed = time.perf_counter() - t0
    _verdict(
        9,
        "analytic gradient vs central differences",
        worst < 1e-5,
        elapsed,
        60.0,
        f"max relative deviation {worst:.2e} over 50 instances",
    )


def test_10_lyapunov_quadrature_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    from lpvflow.lqr_core import solve_lyapunov

    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 4))
        a = random_stable_matrix(rng, n) - 0.3 * np.eye(n)
        w = random_spd(rng, n)
        p = solve_lyapunov(a, w)
        p_quad = lyapunov_quadrature(a, w)
        worst = max(worst, float(np.max(np.abs(p - p_quad))) / max(1.0, float(np.max(np.abs(p)))))
    elapsed = time.perf_counter() - t0
    _verdict(
        10,
        "Lyapunov solve vs integral quadrature",
        worst < 1e-6,
        elapsed,
        60.0,
        f"max deviation {worst:.2e} over 20 systems",
    )


def test_11_projection_metric_definiteness(computed_gain_box):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    box = computed_gain_box.box
    interior_ok = True
    face_floor = 0.0
    f_ok = True
    for i in range(1000):
        k = box.sample(rng)[0]
        if i % 5 == 0:  # push a fifth of the samples onto a face
            face = int(rng.integers(0, box.dim))
            k[face] = box.lo[face] if rng.random() < 0.5 else box.hi[face]
        ce = eval_constraints(box, k)
        if np.min(np.linalg.eigvalsh(ce.F)) <= 0:
            f_ok = False
        eigs_m = np.linalg.eigvalsh(ce.M)
        if np.min(ce.g) > 1e-12:
            interior_ok = interior_ok and np.min(eigs_m) > 0
        else:
            face_floor = min(face_floor, float(np.min(eigs_m)))
    elapsed = time.perf_counter() - t0
    _verdict(
        11,
        "projection metric definiteness",
        f_ok and interior_ok and face_floor >= -1e-9,
        elapsed,
        30.0,
        f"F positive definite at 1000 points, worst face eigenvalue {face_floor:.1e}",
    )


def test_12_lyapunov_decrease_along_flow(benchmark):
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    box = case_study.REFERENCE_GAIN_BOX.inflate(case_study.CONVERGENCE_BOX_MARGIN)
    worst_increase = -np.inf
    for trial in range(10):
        rho = float(rng.uniform(0.5, 2.0))
        a_frozen = benchmark.A0 + rho * benchmark.Ai[0]
        p_star, _ = solve_care(a_frozen, benchmark.B, benchmark.Q, benchmark.R)
        f_star = float(np.trace(p_star))
        k0 = box.center() + 0.8 * (box.sample(rng)[0] - box.center())
        cfg = SimConfig(
            x0=rng.normal(size=2),
            K0=k0.reshape(1, 2),
            alpha=100.0,
            T=2.0,
            dt=0.05,
            trajectory=ParamTrajectory.constant([rho], benchmark.param_box),
        )
        trace = simulate_closed_loop(benchmark, box, cfg)
        v = []
        for i in range(0, len(trace.times), 3):
            ev = evaluate(benchmark, [rho], unvec(trace.k[i], 1, 2))
            v.append(float(trace.x[i] @ ev.P_K @ trace.x[i]) + ev.cost - f_star)
        worst_increase = max(worst_increase, float(np.max(np.diff(np.array(v)))))
    elapsed = time.perf_counter() - t0
    _verdict(
        12,
        "Lyapunov decrease along frozen flows",
        worst_increase <= 1e-6,
        elapsed,
        60.0,
        f"worst inter-sample increase {worst_increase:.2e} over 10 traces",
    )


def test_13_routh_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    mismatches = 0
    excluded = 0
    total = 1000
    for trial in range(total):
        n = 2 if trial % 2 == 0 else 3
        eigs = []
        while len(eigs) < n:
            if n - len(eigs) >= 2 and rng.random() < 0.5:
                sigma = rng.uniform(-1.5, 1.5)
                omega = rng.uniform(0.1, 3.0)
                eigs.extend([sigma + 1j * omega, sigma - 1j * omega])
            else:
                eigs.append(rng.uniform(-2.0, 2.0))
        truth = all(np.real(lam) < 0 for lam in eigs)
        a = matrix_with_spectrum(rng, eigs)
        verdict = hurwitz_verdict(a)
        if verdict.inconclusive:
            excluded += 1
            continue
        if verdict.stable != truth:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    _verdict(
        13,
        "Routh verdicts vs constructed spectra",
        mismatches == 0 and excluded < 0.01 * total,
        elapsed,
        30.0,
        f"{mismatches} mismatches, {excluded} inconclusive of {total}",
    )
