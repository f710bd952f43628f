import math

import numpy as np
import pytest

import pharnack as ph
from conftest import eigenpair_for
from pharnack.barriers import (fit_linear_lower_slope, fit_upper_linear_bound,
                               lower_barrier_profile)


def test_minimal_a_zero_potential():
    assert ph.lower_barrier_params(2.0, 2, 0.0).a == pytest.approx(16.0, abs=1e-10)
    assert ph.lower_barrier_params(2.0, 3, 0.0).a == pytest.approx(24.0, abs=1e-10)


def test_minimal_a_quadratic_oracle():
    # p=2, N=2, C0~=1: a^2/8 - 2a - 1 = 0, positive root a = 8 + sqrt(72)
    params = ph.lower_barrier_params(2.0, 2, 1.0)
    assert params.a == pytest.approx(8.0 + math.sqrt(72.0), abs=1e-8)


def test_threshold_equality_at_minimal_a():
    for (p, N, c0) in [(2.0, 2, 0.0), (2.0, 2, 1.0), (3.0, 3, 1.0), (1.5, 2, 0.5)]:
        params = ph.lower_barrier_params(p, N, c0)
        assert abs(params.threshold_value()) <= 1e-10


def test_c0_monotonicity_of_minimal_a():
    for (p, N) in [(2.0, 2), (3.0, 3), (1.5, 2)]:
        a_vals = [ph.lower_barrier_params(p, N, c0).a for c0 in (0.0, 0.5, 1.0, 2.0)]
        assert all(a1 >= a0 for a0, a1 in zip(a_vals, a_vals[1:]))


def test_lower_barrier_endpoint_values():
    params = ph.lower_barrier_params(2.0, 2, 0.0, r=0.8, center=(0.0, 0.4))
    assert lower_barrier_profile(params, 0.8 / 2.0) == pytest.approx(0.0, abs=1e-15)
    assert lower_barrier_profile(params, 0.8 / 4.0) == pytest.approx(1.0, abs=1e-14)
    # point evaluation against the radial profile
    x = (0.1, 0.4 + 0.25)
    s = math.hypot(x[0], x[1] - 0.4)
    assert ph.eval_lower_barrier(params, x) == \
        pytest.approx(float(lower_barrier_profile(params, s)))


def test_lower_barrier_against_mpmath():
    import mpmath as mp
    mp.mp.dps = 50
    p, N, c0 = 2.0, 2, 0.0
    params = ph.lower_barrier_params(p, N, c0)     # a = 16, alpha = 2
    r, s = 1.0, 1.0 / 3.0
    a, al = mp.mpf(16), mp.mpf(2)
    den = mp.e ** (-a / 4 ** al) - mp.e ** (-a / 2 ** al)
    want = (mp.e ** (-a * mp.mpf(s) ** al) - mp.e ** (-a / 2 ** al)) / den
    got = lower_barrier_profile(params, s)
    assert abs(got - float(want)) < 1e-13


def test_lower_linear_slope_positive():
    params = ph.lower_barrier_params(3.0, 2, 1.0)
    cprime = fit_linear_lower_slope(params)
    assert cprime > 0.0
    # spot check the bound V(N_t(P)) >= C' t/r at a few depths
    for t in (0.05, 0.2, 0.45):
        assert lower_barrier_profile(params, params.r / 2 - t * params.r) \
            >= cprime * t - 1e-12


@pytest.mark.parametrize("p,N", [(2.0, 2), (2.0, 3), (3.0, 2), (3.0, 3)])
@pytest.mark.parametrize("c0", [0.0, 1.0])
def test_lower_certification_passes(p, N, c0):
    params = ph.lower_barrier_params(p, N, c0)
    report = ph.certify_barriers(params)
    assert report.passed, report.failures[:3]


def test_lower_certification_sharpness():
    good = ph.lower_barrier_params(2.0, 2, 1.0)
    bad = ph.LowerBarrierParams(p=2.0, N=2, C0_tilde=1.0, a=good.a / 2.0)
    report = ph.certify_barriers(bad)
    assert not report.passed
    assert len(report.failures) > 10


def test_upper_barrier_selection_and_eval():
    pair = eigenpair_for(2.0, 2)
    params = ph.upper_barrier_params(2.0, 2, 1.0, r=0.5, eigenpair=pair)
    assert pair.lam1 / params.rb ** 2.0 >= 2.0
    rb = params.rb
    assert ph.eval_upper_barrier(params, (rb, 0.0)) == pytest.approx(0.0, abs=1e-8)
    assert ph.eval_upper_barrier(params, (3 * rb, 0.0)) == pytest.approx(0.0, abs=1e-5)
    assert ph.eval_upper_barrier(params, (2 * rb, 0.0)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(Exception, match="annulus"):
        ph.eval_upper_barrier(params, (4 * rb, 0.0))


def test_upper_linear_bound():
    pair = eigenpair_for(2.0, 2)
    C = fit_upper_linear_bound(pair)
    assert 0.0 < C < 10.0
    s = np.linspace(1.0, 2.0, 200)[1:]
    assert np.all(pair.phi_at(s) <= C * (s - 1.0) + 1e-12)


@pytest.mark.parametrize("p,N", [(2.0, 2), (2.0, 3), (3.0, 2), (3.0, 3)])
def test_upper_certification_passes(p, N):
    pair = eigenpair_for(p, N)
    params = ph.upper_barrier_params(p, N, 1.0, r=0.5, eigenpair=pair)
    report = ph.certify_barriers(params)
    assert report.passed, report.failures[:3]


def test_upper_containment_veto():
    pair = eigenpair_for(2.0, 2)
    params = ph.upper_barrier_params(2.0, 2, 0.0, r=0.5, eigenpair=pair,
                                     containment=lambda b: b <= 0.2)
    assert params.b == pytest.approx(1.0 / 6.0)


def test_certification_report_json(tmp_path):
    params = ph.lower_barrier_params(2.0, 2, 0.0)
    report = ph.certify_barriers(params)
    doc = report.to_json(tmp_path / "cert.json")
    assert doc["passed"] is True
    assert doc["annulus"] == [0.25, 0.5]
    import json
    on_disk = json.loads((tmp_path / "cert.json").read_text())
    assert on_disk == doc


def test_upper_barrier_dominates_solution(half_disk):
    """Comparison mechanism: u below the scaled eigen-barrier on the cap ball.

    The solved field is dominated on the boundary sphere of B_2rb(center) by
    scale * phi(2) = scale, hence everywhere inside the intersection with
    the domain.
    """
    eps = 2.0 ** -6
    g = ph.build_polar_grid(half_disk, 49, 49, eps, 0.9)
    A = 1.0 / (1.0 - eps ** 2)
    f = ph.solve_dirichlet(g, 2.0, ph.PotentialSpec.zero(),
                           {"truncation-arc":
                            lambda r, t: A * (1.0 / r - r) * np.sin(t)},
                           tol=1e-12)
    pair = eigenpair_for(2.0, 2)
    P = (0.5, 0.0)
    params = ph.upper_barrier_params(2.0, 2, 0.0, r=0.2, eigenpair=pair)
    rb = params.rb
    # exterior ball of radius rb tangent at P from below
    import dataclasses
    params = dataclasses.replace(params, center=(P[0], -rb))
    center = np.array(params.center)
    # dominance scale from the boundary sphere of B_2rb(center) inside the domain
    angs = np.linspace(0.0, 2 * np.pi, 128, endpoint=False)
    ring = center[None, :] + 2 * rb * np.stack([np.cos(angs), np.sin(angs)], axis=1)
    inside = np.array([half_disk.contains(pt) and pt[1] > 1e-9 and
                       np.hypot(*pt) > 2 * eps for pt in ring])
    scale = max(float(np.max(f.eval_xy(ring[inside]))), 1e-30)
    # check u <= scale * phi at interior grid nodes within the ball
    xs, ys = g.nodes_xy()
    d = np.hypot(xs - center[0], ys - center[1])
    sel = (d < 2 * rb) & (d > rb * 1.001)
    sel[0, :] = sel[-1, :] = False
    vals = f.values[sel]
    bar = scale * pair.phi_at(d[sel] / rb)
    slack = 5e-3 * scale
    assert np.all(vals <= bar + slack)
