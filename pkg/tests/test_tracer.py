"""Tests for sphere slicing, branch tracing and limit estimation."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from milnorarc import (
    BranchTrace,
    DegenerateMilnorError,
    TraceConfig,
    default_pivot,
    estimate_limits,
    milnor_equations,
    parse,
    s_a_estimate,
    s_infinity_estimate,
    slice_solve,
    trace_branches,
)
from milnorarc.tracer import Sample

VARS2 = ["x", "y"]
F_FLAG = parse("x + x^2*y", VARS2)
F_TANGENT = parse("y*(x^2*y^2 + 3*x*y + 3)", VARS2)


def _system(f, center):
    return milnor_equations([f], center, pivot=default_pivot(f))


class TestSliceSolve:
    def test_flagship_point_count(self):
        pts = slice_solve(_system(F_FLAG, (0, 0)), 10.0, TraceConfig())
        assert len(pts) == 6

    def test_points_satisfy_the_equation(self):
        sys = _system(F_FLAG, (0, 0))
        eq = sys.equations[0]
        for R in (10.0, 80.0):
            for x in slice_solve(sys, R, TraceConfig()):
                assert abs(np.linalg.norm(x) - R) < 1e-8 * R
                # compare against the scale of the polynomial on the sphere
                scale = sum(abs(float(c)) * (R + 1) ** sum(e) for e, c in eq.terms.items())
                assert abs(float(eq.evaluate(list(map(float, x))))) < 1e-8 * scale

    def test_grid_doubling_does_not_change_the_count(self):
        sys = _system(F_FLAG, (0, 0))
        base = TraceConfig()
        for R in (10.0, 40.0):
            n1 = len(slice_solve(sys, R, base))
            n2 = len(slice_solve(sys, R, replace(base, grid=2 * base.grid)))
            assert n1 == n2

    def test_near_tangent_pair_is_split(self):
        # for this map with center (0, 1) two extra intersection points sit a
        # few 1e-4 radians apart at R = 10, far below any practical grid step
        pts0 = slice_solve(_system(F_TANGENT, (0, 0)), 10.0, TraceConfig())
        pts1 = slice_solve(_system(F_TANGENT, (0, 1)), 10.0, TraceConfig())
        assert len(pts0) == 6
        assert len(pts1) == 8

    def test_one_sided_tangency_is_not_reported(self):
        # center (0, 0): the same angular region has a local minimum of the
        # equation that does not cross zero; it must not produce fake roots
        pts = slice_solve(_system(F_TANGENT, (0, 0)), 40.0, TraceConfig())
        assert len(pts) == 6

    def test_degenerate_system_raises(self):
        # radial map, centered at the origin: the single equation vanishes
        sys = _system(parse("x^2 + y^2", VARS2), (0, 0))
        with pytest.raises(DegenerateMilnorError):
            slice_solve(sys, 10.0, TraceConfig())

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            slice_solve(_system(F_FLAG, (0, 0)), -1.0, TraceConfig())

    def test_three_variables_best_effort(self):
        f = parse("x^2 + y^2 - z^2 + x", ["x", "y", "z"])
        sys = _system(f, (Fraction(1, 3), Fraction(-1, 7), Fraction(1, 2)))
        pts = slice_solve(sys, 10.0, TraceConfig(starts=128))
        for x in pts:
            center = np.array([1 / 3, -1 / 7, 1 / 2])
            assert abs(np.linalg.norm(x - center) - 10.0) < 1e-6


class TestTraceBranches:
    def test_flagship_branches(self):
        cfg = TraceConfig()
        traces = trace_branches(F_FLAG, (0, 0), cfg)
        assert len(traces) == 6
        for t in traces:
            assert len(t.samples) == cfg.radius_count
            radii = [s.radius for s in t.samples]
            assert radii == cfg.radii()

    def test_branch_directions_are_stable(self):
        traces = trace_branches(F_FLAG, (0, 0), TraceConfig())
        for t in traces:
            dirs = [np.array(s.point) / np.linalg.norm(s.point) for s in t.samples]
            for d1, d2 in zip(dirs, dirs[1:]):
                assert np.linalg.norm(d1 - d2) < 0.5

    def test_requires_enough_radii(self):
        with pytest.raises(ValueError):
            trace_branches(F_FLAG, (0, 0), TraceConfig(), radii=[10.0, 20.0])
        with pytest.raises(ValueError):
            trace_branches(F_FLAG, (0, 0), TraceConfig(), radii=[10.0, 20.0, 15.0, 40.0])

    def test_degenerate_center(self):
        with pytest.raises(DegenerateMilnorError):
            trace_branches(parse("x^2 + y^2", VARS2), (0, 0), TraceConfig())


def _synthetic_trace(branch_id, radii, values):
    t = BranchTrace(branch_id=branch_id)
    for R, v in zip(radii, values):
        t.samples.append(Sample(radius=R, point=(R, 0.0), f_value=v,
                                malgrange=0.0, residual=0.0))
    return t


class TestEstimateLimits:
    RADII = [10.0 * 2 ** k for k in range(8)]

    def test_convergent_power_decay(self):
        values = [2.0 + 1.0 / R for R in self.RADII]
        traces = [_synthetic_trace(0, self.RADII, values)]
        clusters, divergent = estimate_limits(traces, TraceConfig())
        assert divergent == 0
        assert traces[0].status == "convergent"
        assert len(clusters) == 1
        assert clusters[0].value == pytest.approx(2.0, abs=1e-6)

    def test_divergent(self):
        values = [R ** 2 for R in self.RADII]
        traces = [_synthetic_trace(0, self.RADII, values)]
        clusters, divergent = estimate_limits(traces, TraceConfig())
        assert divergent == 1
        assert clusters == []

    def test_lost_short_branch(self):
        values = [1.0 / R for R in self.RADII[:3]]
        traces = [_synthetic_trace(0, self.RADII[:3], values),
                  _synthetic_trace(1, self.RADII, [5.0 + 1.0 / R for R in self.RADII])]
        clusters, _ = estimate_limits(traces, TraceConfig())
        assert traces[0].status == "lost"
        assert traces[1].status == "convergent"
        assert len(clusters) == 1

    def test_clustering_merges_close_estimates(self):
        a = _synthetic_trace(0, self.RADII, [1.0 + 1.0 / R for R in self.RADII])
        b = _synthetic_trace(1, self.RADII, [1.0 - 1.0 / R for R in self.RADII])
        c = _synthetic_trace(2, self.RADII, [4.0 + 1.0 / R for R in self.RADII])
        clusters, _ = estimate_limits([a, b, c], TraceConfig())
        assert len(clusters) == 2
        assert sorted(len(c.branch_ids) for c in clusters) == [1, 2]

    def test_constant_branch(self):
        traces = [_synthetic_trace(0, self.RADII, [7.0] * len(self.RADII))]
        clusters, _ = estimate_limits(traces, TraceConfig())
        assert traces[0].status == "convergent"
        assert clusters[0].value == pytest.approx(7.0, abs=1e-9)

    def test_empty_input(self):
        assert estimate_limits([], TraceConfig()) == ([], 0)


class TestReports:
    def test_flagship_single_center(self):
        report = s_a_estimate(F_FLAG, (0, 0), TraceConfig())
        assert report.status == "ok"
        assert report.certified is True
        assert len(report.limit_values) == 1
        assert report.limit_values[0].value == pytest.approx(0.0, abs=1e-3)
        assert report.divergent_count == 4
        assert report.bound_cap == 2
        assert report.bound_respected
        assert report.malgrange_monitor
        assert all(report.malgrange_monitor.values())

    def test_malgrange_decay_on_convergent_branches(self):
        report = s_a_estimate(F_FLAG, (0, 0), TraceConfig())
        for t in report.traces:
            if t.status != "convergent":
                continue
            assert t.samples[-1].malgrange < 0.1 * t.samples[0].malgrange

    def test_trivial_degree(self):
        report = s_a_estimate(parse("x + y", VARS2), (0, 0), TraceConfig())
        assert report.status == "trivial-degree"
        assert report.limit_values == []

    def test_degenerate_center_reported_not_raised(self):
        report = s_a_estimate(parse("x^2 + y^2", VARS2), (0, 0), TraceConfig())
        assert report.status == "degenerate"
        assert "zero" in report.note

    def test_determinism(self):
        cfg = TraceConfig(seed=5)
        a = s_a_estimate(F_FLAG, (0, 0), cfg).to_dict()
        b = s_a_estimate(F_FLAG, (0, 0), cfg).to_dict()
        assert a == b

    def test_s_infinity_intersects(self):
        cfg = TraceConfig()
        centers = [(0, 0), (Fraction(1, 3), Fraction(-2, 7))]
        report = s_infinity_estimate(F_FLAG, centers, cfg)
        assert len(report.per_center) == 2
        assert len(report.intersection) == 1
        assert report.intersection[0].value == pytest.approx(0.0, abs=1e-3)

    def test_s_infinity_needs_two_centers(self):
        with pytest.raises(ValueError):
            s_infinity_estimate(F_FLAG, [(0, 0)], TraceConfig())

    def test_s_infinity_excludes_degenerate_centers(self):
        f = parse("x^2 + y^2", VARS2)
        report = s_infinity_estimate(f, [(0, 0), (1, 0)], TraceConfig())
        assert "excluded" in report.note
