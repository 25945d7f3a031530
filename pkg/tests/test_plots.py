"""Inline SVG rendering of simulation traces (pure view, no numerics)."""

from __future__ import annotations

import numpy as np
import pytest

from lpvflow import case_study
from lpvflow.lpv_model import ParamTrajectory
from lpvflow.plots import render_trace_svg
from lpvflow.sim import SimConfig, simulate_closed_loop


@pytest.fixture(scope="module")
def short_trace():
    sys = case_study.benchmark_system()
    box = case_study.REFERENCE_GAIN_BOX
    tr = ParamTrajectory.piecewise([0.3], [[0.5], [2.0]], sys.param_box)
    cfg = SimConfig(
        x0=np.array([1.0, -1.0]),
        K0=box.center().reshape(1, 2),
        alpha=50.0,
        T=0.6,
        dt=0.05,
        trajectory=tr,
    )
    return simulate_closed_loop(sys, box, cfg)


class TestRenderTraceSvg:
    def test_is_wellformed_svg(self, short_trace):
        svg = render_trace_svg(short_trace)
        assert svg.startswith("<svg")
        assert svg.rstrip().endswith("</svg>")
        assert svg.count("<svg") == 1

    def test_has_three_panels_and_series(self, short_trace):
        svg = render_trace_svg(short_trace)
        for label in ("x1", "x2", "K1", "K2", "rho1"):
            assert label in svg
        assert svg.count("<polyline") >= 5

    def test_marks_switches(self, short_trace):
        svg = render_trace_svg(short_trace)
        assert "stroke-dasharray" in svg

    def test_deterministic(self, short_trace):
        assert render_trace_svg(short_trace) == render_trace_svg(short_trace)

    def test_does_not_mutate_trace(self, short_trace):
        before = (short_trace.times.copy(), short_trace.x.copy(), short_trace.k.copy())
        render_trace_svg(short_trace)
        assert np.array_equal(short_trace.times, before[0])
        assert np.array_equal(short_trace.x, before[1])
        assert np.array_equal(short_trace.k, before[2])

    def test_long_trace_decimated(self, short_trace):
        # inflate the trace far past the decimation cap and confirm the
        # output stays bounded while keeping the final sample
        import dataclasses

        n = 12_000
        big = dataclasses.replace(
            short_trace,
            times=np.linspace(0.0, 1.0, n),
            x=np.tile(short_trace.x[:1], (n, 1)),
            k=np.tile(short_trace.k[:1], (n, 1)),
            rho=np.tile(short_trace.rho[:1], (n, 1)),
            cost_rate=np.zeros(n),
            cost=np.zeros(n),
            min_g=np.ones(n),
            events=(),
        )
        svg = render_trace_svg(big)
        assert svg.count("<polyline") < 30
        assert len(svg) < 600_000
