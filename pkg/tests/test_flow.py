import numpy as np
import pytest

from sobolab import (EnsembleSpec, HypothesisError, lambda0_series, metric_at,
                     shrinking_sphere_flow, static_torus_flow, track)
from sobolab.flow import parse_flow_spec, scale_factor
from sobolab.manifold import scale_metric


@pytest.fixture(scope="module")
def sphere_flow():
    return shrinking_sphere_flow(r0=1.0, subdiv=3, t_max=0.45)


@pytest.fixture(scope="module")
def torus_flow():
    return static_torus_flow(dim=3, resolution=8, t_max=1.0)


def test_metric_at_zero_is_base(sphere_flow):
    assert metric_at(sphere_flow, 0.0) is sphere_flow.base


def test_sphere_quarter_time_closed_form(sphere_flow):
    m = metric_at(sphere_flow, 0.25)
    mesh_ratio = sphere_flow.base.volume / (4 * np.pi)
    assert m.volume == pytest.approx(2 * np.pi * mesh_ratio, rel=1e-12)
    assert np.allclose(m.scalar_curvature, 4.0)


def test_static_torus_is_constant(torus_flow):
    m0 = metric_at(torus_flow, 0.0)
    m1 = metric_at(torus_flow, 0.7)
    assert m0 is m1  # identity scaling returns the same object


def test_flow_consistency_field_by_field(sphere_flow):
    t = 0.3
    direct = metric_at(sphere_flow, t)
    rescaled = scale_metric(metric_at(sphere_flow, 0.0), scale_factor(sphere_flow, t))
    assert np.allclose(direct.mass, rescaled.mass, rtol=1e-12)
    assert np.allclose(direct.stiffness.toarray(), rescaled.stiffness.toarray(),
                       rtol=1e-12)
    assert np.allclose(direct.scalar_curvature, rescaled.scalar_curvature,
                       rtol=1e-12)
    assert np.allclose(direct.grad.weights, rescaled.grad.weights, rtol=1e-12)


def test_horizon_validation():
    with pytest.raises(ValueError):
        shrinking_sphere_flow(r0=1.0, subdiv=2, t_max=0.5)  # singular time
    flow = shrinking_sphere_flow(r0=1.0, subdiv=2, t_max=0.4)
    with pytest.raises(ValueError):
        metric_at(flow, 0.41)
    with pytest.raises(ValueError):
        metric_at(flow, -0.1)


def test_lambda0_series_closed_forms(sphere_flow, torus_flow):
    times = [0.0, 0.1, 0.2, 0.3, 0.4]
    series = lambda0_series(sphere_flow, times)
    assert len(series) == len(times)
    for t, lam in zip(times, series):
        assert lam == pytest.approx(1.0 / (2.0 * (1.0 - 2.0 * t)), abs=1e-6)
    assert all(a < b for a, b in zip(series, series[1:]))  # increasing here
    flat = lambda0_series(torus_flow, [0.0, 0.5, 1.0])
    assert np.allclose(flat, 0.0, atol=1e-9)


def test_track_a2_shrinking_sphere(sphere_flow):
    times = np.arange(0.0, 0.401, 0.05)
    spec = EnsembleSpec(seed=7, size=80, generator="mixed")
    traj = track(sphere_flow, times, "a2", 1.5, spec, p0=1.2)
    assert traj.total_violations == 0
    assert traj.worst_ratio <= 1.0 + 1e-9
    mesh_ratio = sphere_flow.base.volume / (4 * np.pi)
    for rec in traj.records:
        t = rec["t"]
        assert rec["vol"] == pytest.approx(4 * np.pi * (1 - 2 * t) * mesh_ratio,
                                           rel=1e-12)
        assert rec["r_max_plus"] == pytest.approx(2.0 / (1.0 - 2.0 * t), rel=1e-12)
        assert rec["kappa"] == 0.0
        assert rec["bracket"] == pytest.approx(
            (2.0 / (1.0 - 2.0 * t) + 1.0) * rec["vol"], rel=1e-12)


def test_track_hypothesis_error_on_flat_start(torus_flow):
    spec = EnsembleSpec(seed=3, size=10, generator="mixed")
    with pytest.raises(HypothesisError):
        track(torus_flow, [0.0, 0.5], "a2", 2.5, spec)
    with pytest.raises(HypothesisError):
        track(torus_flow, [0.0, 0.5], "d2", 2.5, spec)


def test_track_static_torus_records_identical(torus_flow):
    spec = EnsembleSpec(seed=3, size=40, generator="mixed")
    for sel in ("a3", "b3", "d3", "e3"):
        traj = track(torus_flow, [0.0, 0.5, 1.0], sel, 2.5, spec)
        assert traj.total_violations == 0
        ratios = [r["worst_ratio"] for r in traj.records]
        assert max(ratios) - min(ratios) < 1e-12


def test_track_sphere_other_families(sphere_flow):
    spec = EnsembleSpec(seed=5, size=40, generator="mixed")
    for sel in ("b2", "d2", "e2"):
        traj = track(sphere_flow, [0.0, 0.2, 0.4], sel, 1.5, spec, p0=1.2)
        assert traj.total_violations == 0, sel


def test_track_validates_inputs(sphere_flow):
    spec = EnsembleSpec(seed=5, size=5, generator="mixed")
    with pytest.raises(ValueError):
        track(sphere_flow, [0.1, 0.1], "a2", 1.5, spec, p0=1.2)
    with pytest.raises(ValueError):
        track(sphere_flow, [], "a2", 1.5, spec, p0=1.2)
    with pytest.raises(ValueError):
        track(sphere_flow, [0.0], "z9", 1.5, spec, p0=1.2)
    with pytest.raises(ValueError):
        track(sphere_flow, [0.0], "a2", 2.5, spec, p0=1.2)  # p >= n


def test_parse_flow_spec():
    flow = parse_flow_spec("sphere:r0=2", t_max=1.0)
    assert flow.variant == "shrinking-sphere" and flow.r0 == 2.0
    flow = parse_flow_spec("torus:n=3,res=6")
    assert flow.variant == "static-torus"
    with pytest.raises(ValueError):
        parse_flow_spec("klein:res=3")
