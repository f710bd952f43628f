import math

import numpy as np
import pytest

import pharnack as ph
from conftest import exact_halfdisk_solution, ladder_for, profile_for
from pharnack.geometry import GeometryError
from pharnack.singular import (SchemeViolationError, monotonicity_report,
                               sandwich_report, singular_half_space_profile)


def small_ladder():
    return ladder_for(2.0, 0.0, K=5, n_r=380, n_theta=129, tag="small")


def test_truncated_solve_requires_half_disk():
    sec = ph.DomainSpec.sector(math.pi / 2, 1.0)
    with pytest.raises(GeometryError):
        ph.truncated_solve(sec, 2.0, 0.0, 0.1)


def test_single_level_matches_exact_solution(half_disk, harmonic_profile):
    eps = 0.125
    f = ph.truncated_solve(half_disk, 2.0, 0.0, eps, profile=harmonic_profile,
                           n_r=200, n_theta=65)
    # exact: A (1/r - r) sin(theta) with A matching the arc trace of r^-1 sin
    A = 1.0 / (1.0 - eps ** 2)
    ex = exact_halfdisk_solution(f.grid, eps)
    assert np.abs(f.values - ex).max() / ex.max() < 2e-4


def test_ladder_monotone_and_sandwiched():
    lad = small_ladder()
    for k in range(lad.K):
        rep = monotonicity_report(lad, k)
        assert rep["ok"], rep
    for k in range(lad.K + 1):
        rep = sandwich_report(lad, k)
        assert rep["lower_ok"] and rep["upper_ok"], rep
        assert rep["max_defect"] <= lad.Kbar + rep["max_slack"]


def test_limit_matches_exact_harmonic(half_disk):
    lad = small_ladder()
    limit, diag = ph.singular_limit(lad)
    assert diag["converged"]
    # decreasing up to the cross-grid measurement floor
    assert all(d1 <= 1.05 * d0 for d0, d1 in zip(diag["convergence_diffs"],
                                                 diag["convergence_diffs"][1:]))
    # exact limit of the scheme: (1/r - r) sin(theta) up to O(eps_K^2)
    g = limit.grid
    ex = (1.0 / g.radii[:, None] - g.radii[:, None]) * np.sin(g.angles[None, :])
    sel = g.radii > 2 * g.eps
    rel = np.abs(limit.values[sel][:, 1:-1] - ex[sel][:, 1:-1]).max() \
        / ex[sel].max()
    assert rel < 2e-3


def test_proportional_data_scales_limit(half_disk, harmonic_profile):
    f1 = ph.truncated_solve(half_disk, 2.0, 0.0, 0.0625,
                            profile=harmonic_profile, n_r=160, n_theta=49)
    f2 = ph.truncated_solve(half_disk, 2.0, 0.0, 0.0625,
                            profile=harmonic_profile, n_r=160, n_theta=49,
                            weight=lambda t: 2.0 * np.ones_like(t))
    assert np.abs(f2.values - 2.0 * f1.values).max() <= 1e-9 * f2.values.max()


def test_scheme_violation_detected(half_disk, harmonic_profile):
    lad = small_ladder()
    import copy
    broken = copy.copy(lad)
    broken.fields = list(lad.fields)
    bad = ph.ScalarField(lad.fields[1].grid, lad.fields[1].values * 1.5)
    broken.fields[1] = bad
    with pytest.raises(SchemeViolationError):
        ph.singular_limit(broken)


def test_blowup_separable_field_is_exact(half_disk, harmonic_profile):
    g = ph.build_polar_grid(half_disk, 65, 65, 2.0 ** -6, 0.9)
    fld = ph.separable_field(harmonic_profile, g)
    out = ph.blowup_rate(fld, harmonic_profile)
    devs = [d for _, d in out["radii_deviation"]]
    assert max(devs) < 1e-9 * out["eta_max"]
    assert out["homothety"] == pytest.approx(1.0, rel=1e-9)


def test_blowup_limit_decreasing():
    lad = small_ladder()
    limit, _ = ph.singular_limit(lad)
    out = ph.blowup_rate(limit, lad.profile)
    devs = [d for _, d in out["radii_deviation"]]
    assert all(d1 < d0 for d0, d1 in zip(devs, devs[1:]))


def test_cone_fit_harmonic_quarter_plane():
    res = ph.tolksdorff_cone_fit(math.pi / 2.0, 2.0, c=0.0, n_r=193, n_theta=65,
                                 R_out=256.0, fit_window=(4.0, 32.0))
    assert res["beta_hat"] == pytest.approx(2.0, rel=0.02)
    assert not res["extend_domain_advisory"]


def test_cone_fit_rejects_small_domain():
    with pytest.raises(Exception, match="2"):
        ph.tolksdorff_cone_fit(math.pi, 2.0, R_out=32.0)


def test_moebius_x2_and_separable(half_disk, harmonic_profile):
    res = []
    for n, q in [(49, 0.9), (97, 0.9 ** 0.5)]:
        g = ph.build_polar_grid(half_disk, n, n, 2.0 ** -6, q)
        fld = ph.separable_field(harmonic_profile, g)   # r^-1 sin -> x2
        res.append(ph.moebius_check(fld))
    assert res[1] < 0.5 * res[0]
    assert res[1] < 1e-3


def test_moebius_negative_control(half_disk):
    g = ph.build_polar_grid(half_disk, 65, 65, 2.0 ** -6, 0.9)
    vals = np.sin(np.pi * g.radii[:, None]) * np.sin(g.angles[None, :])
    fld = ph.ScalarField(g, np.abs(vals))
    assert ph.moebius_check(fld) > 1e-1


def test_ladder_report_json(tmp_path):
    lad = small_ladder()
    limit, diag = ph.singular_limit(lad)
    from pharnack.singular import blowup_csv, ladder_report_json
    doc = ladder_report_json(lad, diag, tmp_path / "ladder.json")
    assert set(doc) == {"epsilons", "monotonicity_min", "sandwich_max",
                        "convergence_diffs"}
    out = ph.blowup_rate(limit, lad.profile)
    blowup_csv(out, tmp_path / "blow.csv", header_comment="config_hash=aa")
    lines = (tmp_path / "blow.csv").read_text().splitlines()
    assert lines[1] == "r,sup_deviation"
