import numpy as np
import pytest

import pharnack as ph

# shared heavyweight artifacts, built once per session
_CACHE = {}


def cached(key, builder):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


@pytest.fixture(scope="session")
def half_disk():
    return ph.DomainSpec.half_disk(1.0)


@pytest.fixture(scope="session")
def harmonic_profile():
    """Singular planar profile for p=2, c=0 (beta = 1, eta = sin)."""
    return cached(("prof", 2.0, 0.0), lambda: ph.exponent_for_opening(
        np.pi, 2.0, 2, "singular", 0.0, "planar-sector"))


def ladder_for(p, c, K=5, n_r=None, n_theta=65, weight=None, tag=""):
    """Session-cached truncation ladder on the unit half-disk."""
    sizes = {(2.0, 0.0): 320, (2.0, 1.0): 420, (3.0, 0.0): 260, (3.0, 1.0): 300,
             (1.5, 0.0): 400, (1.5, 1.0): 400}
    if n_r is None:
        n_r = sizes.get((float(p), float(c)), 320)
    key = ("ladder", float(p), float(c), K, n_r, n_theta, tag)

    def build():
        dom = ph.DomainSpec.half_disk(1.0)
        return ph.run_truncation_ladder(dom, p, c, K=K, n_r=n_r,
                                        n_theta=n_theta, weight=weight)
    return cached(key, build)


def profile_for(p, c, theta0=np.pi, N=2, kind="singular",
                geometry="planar-sector"):
    key = ("prof", float(p), float(c), float(theta0), N, kind, geometry)
    return cached(key, lambda: ph.exponent_for_opening(theta0, p, N, kind, c,
                                                       geometry))


def eigenpair_for(p, N):
    return cached(("eig", float(p), N), lambda: ph.eigen_annulus_radial(p, N))


def exact_halfdisk_solution(grid, eps, R=1.0):
    """Harmonic oracle: A (1/r - r/R^2) sin(theta), zero on outer arc/sides."""
    A = R ** 2 / (R ** 2 - eps ** 2)
    return A * (1.0 / grid.radii[:, None] - grid.radii[:, None] / R ** 2) \
        * np.sin(grid.angles[None, :])
