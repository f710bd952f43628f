import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pharnack as ph
from pharnack.geometry import (DIRICHLET_ZERO, INTERIOR, TRUNCATION_ARC,
                               ConfigurationError, GeometryError,
                               geometric_radii)


def test_distance_half_disk_flat():
    dom = ph.DomainSpec.half_disk(1.0)
    assert ph.distance_to_boundary(dom, (0.0, 0.3)) == pytest.approx(0.3)


def test_distance_sector_bisector():
    dom = ph.DomainSpec.sector(math.pi / 2, 1.0)
    r = 0.37
    x = (r * math.cos(math.pi / 4), r * math.sin(math.pi / 4))
    assert ph.distance_to_boundary(dom, x) == pytest.approx(r * math.sin(math.pi / 4))


def test_distance_boundary_point_is_zero():
    dom = ph.DomainSpec.half_disk(1.0)
    assert ph.distance_to_boundary(dom, (0.5, 0.0)) == pytest.approx(0.0, abs=1e-15)
    sec = ph.DomainSpec.sector(3 * math.pi / 2, 1.0)
    assert ph.distance_to_boundary(sec, (0.25, 0.0)) == pytest.approx(0.0, abs=1e-15)


def test_membership_error():
    dom = ph.DomainSpec.half_disk(1.0)
    with pytest.raises(GeometryError):
        ph.distance_to_boundary(dom, (0.0, -0.5))
    with pytest.raises(GeometryError):
        ph.distance_to_boundary(dom, (2.0, 0.5))


def test_polygon_distance_and_membership():
    dom = ph.DomainSpec.lipschitz_polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert dom.contains((0.5, 0.5))
    assert not dom.contains((1.5, 0.5))
    assert ph.distance_to_boundary(dom, (0.5, 0.25)) == pytest.approx(0.25)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, math.pi - 0.05),
       st.floats(0.05, 0.95), st.floats(0.05, math.pi - 0.05))
def test_distance_is_one_lipschitz(r1, t1, r2, t2):
    dom = ph.DomainSpec.half_disk(1.0)
    x = (r1 * math.cos(t1), r1 * math.sin(t1))
    y = (r2 * math.cos(t2), r2 * math.sin(t2))
    dx = ph.distance_to_boundary(dom, x)
    dy = ph.distance_to_boundary(dom, y)
    assert abs(dx - dy) <= math.hypot(x[0] - y[0], x[1] - y[1]) + 1e-12


def test_normal_point_flat():
    dom = ph.DomainSpec.half_disk(1.0)
    assert ph.normal_point(dom, (0.5, 0.0), 0.1, "inward") == \
        pytest.approx((0.5, 0.1))
    assert ph.normal_point(dom, (0.5, 0.0), 0.1, "outward") == \
        pytest.approx((0.5, -0.1))


def test_normal_point_tube_property():
    dom = ph.DomainSpec.half_disk(1.0)
    for P in [(0.3, 0.0), (-0.4, 0.0), (math.cos(1.0), math.sin(1.0))]:
        for r in (0.05, 0.2, 0.25):
            q = ph.normal_point(dom, P, r, "inward")
            assert ph.distance_to_boundary(dom, q) == pytest.approx(r, abs=1e-12)


def test_normal_point_out_of_tube():
    dom = ph.DomainSpec.half_disk(1.0)
    with pytest.raises(GeometryError):
        ph.normal_point(dom, (0.5, 0.0), 0.5, "inward")   # beyond R0 = R/4


def test_chain_degenerate_single_ball():
    dom = ph.DomainSpec.half_disk(1.0)
    x = (0.5, 0.05)
    balls, n0 = ph.chain_of_balls(dom, (0.5, 0.0), 0.1, x, x, 2)
    assert len(balls) == 1 and n0 == 1
    assert balls[0].contains(x)


def _check_clauses(dom, Q, r, x, y, balls):
    assert balls[0].contains(x)
    assert balls[-1].contains(y)
    for b0, b1 in zip(balls, balls[1:]):
        gap = math.hypot(b0.center[0] - b1.center[0], b0.center[1] - b1.center[1])
        assert gap <= b0.radius + b1.radius
    for b in balls[:-1]:
        # sample 2B_i on a ring to confirm inclusion in B_2r(Q) and the domain
        for ang in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
            pt = (b.center[0] + 2 * b.radius * math.cos(ang) * (1 - 1e-12),
                  b.center[1] + 2 * b.radius * math.sin(ang) * (1 - 1e-12))
            assert dom.contains(pt, tol=1e-9)
            assert math.hypot(pt[0] - Q[0], pt[1] - Q[1]) <= 2 * r * (1 + 1e-9)


def test_chain_shallow_pair_half_disk():
    dom = ph.DomainSpec.half_disk(1.0)
    Q, r = (0.5, 0.0), 0.1
    x, y = (0.46, 0.055), (0.54, 0.06)       # rho >= r/2, |x - y| < r
    balls, n0 = ph.chain_of_balls(dom, Q, r, x, y, 1)
    _check_clauses(dom, Q, r, x, y, balls)
    assert len(balls) <= n0 * 1


def test_chain_sector_depth_three():
    dom = ph.DomainSpec.sector(math.pi / 2, 1.0)
    Q, r, h = (0.4, 0.0), 0.3, 3
    x = (0.35, r / 2 ** 3 * 1.2)
    y = (0.45, r / 2 ** 3 * 1.5)
    balls, n0 = ph.chain_of_balls(dom, Q, r, x, y, h)
    _check_clauses(dom, Q, r, x, y, balls)
    assert len(balls) <= n0 * h


def test_chain_precondition_errors():
    dom = ph.DomainSpec.half_disk(1.0)
    with pytest.raises(GeometryError, match="rho"):
        ph.chain_of_balls(dom, (0.5, 0.0), 0.1, (0.5, 1e-4), (0.5, 0.05), 2)
    with pytest.raises(GeometryError, match="B_"):
        ph.chain_of_balls(dom, (0.5, 0.0), 0.1, (0.1, 0.05), (0.5, 0.05), 2)


def test_grid_construction_and_grading():
    dom = ph.DomainSpec.half_disk(1.0)
    g = ph.build_polar_grid(dom, 64, 64, 2.0 ** -6, 0.85)
    assert g.radii[0] == 2.0 ** -6
    assert g.radii[-1] == 1.0
    steps = np.diff(g.radii)
    assert np.allclose(steps[:-1] / steps[1:], 0.85, rtol=0, atol=1e-12)


def test_grid_tags_partition():
    dom = ph.DomainSpec.half_disk(1.0)
    g = ph.build_polar_grid(dom, 16, 12, 0.1, 0.9)
    n_int = (g.tags == INTERIOR).sum()
    n_dir = (g.tags == DIRICHLET_ZERO).sum()
    n_arc = (g.tags == TRUNCATION_ARC).sum()
    assert n_int + n_dir + n_arc == g.n_r * g.n_theta
    assert n_arc == g.n_theta - 2
    assert (g.tags[1:-1, 1:-1] == INTERIOR).all()


def test_grid_resolution_errors():
    dom = ph.DomainSpec.half_disk(1.0)
    with pytest.raises(ConfigurationError):
        ph.build_polar_grid(dom, 3, 64, 0.1, 0.9)
    with pytest.raises(ConfigurationError):
        ph.build_polar_grid(dom, 64, 3, 0.1, 0.9)
    with pytest.raises(ConfigurationError):
        ph.build_polar_grid(dom, 16, 16, 1.5, 0.9)


def test_geometric_radii_nesting():
    # refinement (n-1 -> 2(n-1), q -> sqrt(q)) nests the coarse nodes exactly
    coarse = geometric_radii(0.1, 1.0, 17, 0.8)
    fine = geometric_radii(0.1, 1.0, 33, 0.8 ** 0.5)
    assert np.allclose(fine[::2], coarse, rtol=0, atol=1e-13)


def test_grid_export_csv(tmp_path):
    dom = ph.DomainSpec.half_disk(1.0)
    g = ph.build_polar_grid(dom, 6, 5, 0.2, 0.9)
    path = tmp_path / "grid.csv"
    g.export_csv(path, header_comment="config_hash=deadbeef")
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=deadbeef"
    assert lines[1] == "node_id,r,theta,x,y,tag"
    assert len(lines) == 2 + 6 * 5
    assert lines[2].endswith("dirichlet-zero")
