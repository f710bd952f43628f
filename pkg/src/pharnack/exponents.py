"""Separable-solution exponents by shooting on the angular ODE.

A field r^(+a) eta(theta) (regular) or r^(-a) eta(theta) (singular) solves
the p-Laplace equation with potential -c|x|^(-p) on a cone exactly when eta
solves the angular problem

    -( W(theta) (a^2 eta^2 + eta'^2)^((p-2)/2) eta' )' / W(theta)
        + c eta^(p-1)
        = lambda(a) (a^2 eta^2 + eta'^2)^((p-2)/2) eta

with lambda(a) = a(a(p-1) + p - N) for the singular family and
lambda(a) = a(a(p-1) + N - p) for the regular one.  Two geometries:

  planar sector   (N = 2):  weight W = 1, Dirichlet start eta(0)=0,
                            normalization eta'(0)=1;
  axisymmetric cap (N >= 3): functions of the polar angle on S^(N-1);
                            testing the weak form against axisymmetric test
                            functions carries the surface measure factor
                            W = sin^(N-2)(theta), so the flux term gains
                            (N-2) cot(theta) * (...) eta'.  Axis start
                            eta(0)=1, eta'(0)=0 with the symmetric expansion
                            eta = 1 + eta2 theta^2,
                            eta2 = (c a^(2-p) - lambda) / (2(N-1)).

Solved for eta'' and integrated adaptively; the exponent for a prescribed
opening is the root of  theta*(a) = theta0  by bracketed bisection, where
theta*(a) is the first zero of eta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .solver import InputError, ScalarField

A_BRACKET = (1e-3, 50.0)        # search range for exponents
BISECTION_TOL = 1e-8


class ShootingError(RuntimeError):
    pass


class NoCrossingError(ShootingError):
    """The angular function never vanishes before the geometric limit."""


class AmbiguousRootError(ShootingError):
    """theta*(a) = theta0 has several crossings in the bracket."""

    def __init__(self, message, crossings):
        super().__init__(message)
        self.crossings = crossings


def lambda_of(a: float, p: float, N: int, kind: str) -> float:
    if a < 0:
        raise InputError("exponent a must be nonnegative")
    if kind == "singular":
        return a * (a * (p - 1.0) + p - N)
    if kind == "regular":
        return a * (a * (p - 1.0) + N - p)
    raise InputError("kind must be 'singular' or 'regular'")


def _rhs(theta, y, a, p, N, c, lam, cap):
    eta, deta = y
    S = a * a * eta * eta + deta * deta
    W = (N - 2.0) / np.tan(theta) if cap else 0.0
    pot = c * np.sign(eta) * abs(eta) ** (p - 1.0) * S ** ((4.0 - p) / 2.0) if c else 0.0
    num = pot - lam * S * eta - W * S * deta - (p - 2.0) * a * a * eta * deta * deta
    den = a * a * eta * eta + (p - 1.0) * deta * deta
    return (deta, num / den)


def _integrate(a, p, N, kind, c, geometry, rtol, dense=False, until=None):
    cap = geometry == "axisymmetric-cap"
    lam = lambda_of(a, p, N, kind)
    if cap:
        if N < 3:
            raise InputError("the axisymmetric cap needs N >= 3")
        th0 = 1e-6
        eta2 = (c * a ** (2.0 - p) - lam) / (2.0 * (N - 1.0))
        y0 = (1.0 + eta2 * th0 * th0, 2.0 * eta2 * th0)
        th_max = np.pi - 1e-9
    else:
        if geometry != "planar-sector":
            raise InputError("geometry must be 'planar-sector' or 'axisymmetric-cap'")
        th0 = 0.0
        y0 = (0.0, 1.0)
        th_max = 2.0 * np.pi
    if until is not None:
        th_max = min(th_max, until)

    def crossing(theta, y, *args):
        return y[0] - (1.0 if theta < th0 + 1e-5 else 0.0)
    crossing.terminal = True
    crossing.direction = -1

    sol = solve_ivp(_rhs, (th0, th_max), y0, args=(a, p, N, c, lam, cap),
                    events=crossing, rtol=rtol, atol=1e-13, dense_output=dense)
    if not sol.success:
        raise ShootingError(f"integrator failure at a={a}: {sol.message}")
    theta_star = float(sol.t_events[0][0]) if sol.t_events[0].size else np.inf
    return theta_star, sol, th_max


def angular_shoot(a: float, p: float, N: int, kind: str, c: float = 0.0,
                  geometry: str = "planar-sector", rtol: float = 1e-10) -> float:
    """First zero theta*(a) of the angular function, or NoCrossingError."""
    if a <= 0:
        raise InputError("shooting requires a > 0")
    theta_star, _, th_max = _integrate(a, p, N, kind, c, geometry, rtol)
    if not np.isfinite(theta_star):
        raise NoCrossingError(
            f"no zero crossing before theta={th_max:.6f} for a={a}, p={p}, N={N}, "
            f"kind={kind}, c={c}")
    return theta_star


@dataclass
class AngularProfile:
    """Exponent a with its angular function eta on [0, theta0]."""
    a: float
    kind: str
    p: float
    N: int
    c: float
    geometry: str
    theta0: float
    thetas: np.ndarray = field(repr=False)
    etas: np.ndarray = field(repr=False)
    _dense: object = field(default=None, repr=False, compare=False)

    @property
    def lam(self):
        return lambda_of(self.a, self.p, self.N, self.kind)

    def eta(self, theta):
        """Angular function, clamped to 0 beyond the Dirichlet endpoint."""
        th = np.asarray(theta, dtype=float)
        if self._dense is not None:
            clipped = np.clip(th, self._dense.t_min, self._dense.t_max)
            vals = np.asarray(self._dense(clipped))[0]
        else:
            vals = np.interp(th, self.thetas, self.etas)
        return np.maximum(vals, 0.0)

    def max_eta(self):
        return float(self.etas.max())

    def export_csv(self, path, header_comment=None):
        with open(path, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write("theta,eta\n")
            for t, e in zip(self.thetas, self.etas):
                f.write(f"{float(t)!r},{float(e)!r}\n")


def _theta_star_quiet(a, p, N, kind, c, geometry, rtol):
    try:
        return angular_shoot(a, p, N, kind, c, geometry, rtol=rtol)
    except NoCrossingError:
        return np.inf


def exponent_for_opening(theta0: float, p: float, N: int, kind: str, c: float = 0.0,
                         geometry: str = "planar-sector",
                         tol: float = BISECTION_TOL, n_scan: int = 48) -> AngularProfile:
    """Exponent whose angular function first vanishes at the opening theta0.

    Scans a in [1e-3, 50] for brackets of theta*(a) = theta0, reports an
    ambiguity error when several crossings exist, and refines the unique
    bracket by bisection to `tol`.
    """
    cap = geometry == "axisymmetric-cap"
    limit = np.pi if cap else 2.0 * np.pi
    if not (0.0 < theta0 < limit):
        raise InputError(f"opening must lie in (0, {limit:.6f}) for {geometry}")

    grid = np.geomspace(A_BRACKET[0], A_BRACKET[1], n_scan)
    fvals = np.array([_theta_star_quiet(a, p, N, kind, c, geometry, 1e-6) - theta0
                      for a in grid])
    brackets = []
    for k in range(n_scan - 1):
        f0, f1 = fvals[k], fvals[k + 1]
        if np.isfinite(f0) and np.isfinite(f1) and f0 == 0.0:
            brackets.append((grid[k], grid[k]))
        elif np.isfinite(f0) and np.isfinite(f1) and f0 * f1 < 0.0:
            brackets.append((grid[k], grid[k + 1]))
        elif not np.isfinite(f0) and np.isfinite(f1) and f1 < 0.0:
            # crossing emerges from the no-zero region
            brackets.append((grid[k], grid[k + 1]))
    if not brackets:
        raise ShootingError(
            f"no bracket for theta0={theta0:.6f} with a in [{A_BRACKET[0]}, "
            f"{A_BRACKET[1]}] (p={p}, N={N}, kind={kind}, c={c})")
    if len(brackets) > 1:
        raise AmbiguousRootError(
            f"theta*(a) = theta0 has {len(brackets)} crossings", brackets)

    lo, hi = brackets[0]
    flo = _theta_star_quiet(lo, p, N, kind, c, geometry, 1e-10) - theta0
    if not np.isfinite(flo):
        flo = np.inf           # treat no-crossing as theta* = +inf > theta0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = _theta_star_quiet(mid, p, N, kind, c, geometry, 1e-10) - theta0
        if not np.isfinite(fm):
            fm = np.inf
        if (flo > 0.0) == (fm > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    a = 0.5 * (lo + hi)

    theta_star, sol, _ = _integrate(a, p, N, kind, c, geometry, 1e-12, dense=True)
    ts = np.linspace(sol.t[0], theta_star if np.isfinite(theta_star) else theta0, 801)
    etas = sol.sol(ts)[0]
    if cap:
        # prepend the axis value; the series start point sits at 1e-6
        ts = np.concatenate(([0.0], ts))
        etas = np.concatenate(([etas[0]], etas))
    etas[-1] = 0.0
    etas = np.maximum(etas, 0.0)
    return AngularProfile(a=a, kind=kind, p=p, N=N, c=c, geometry=geometry,
                          theta0=theta0, thetas=ts, etas=etas, _dense=sol.sol)


def separable_field(profile: AngularProfile, grid) -> ScalarField:
    """Nodal r^(+-a) eta(theta) on a polar grid with matching extent."""
    if abs(grid.theta0 - profile.theta0) > 1e-9:
        raise InputError(
            f"grid extent {grid.theta0:.6f} does not match profile opening "
            f"{profile.theta0:.6f}")
    sgn = -1.0 if profile.kind == "singular" else 1.0
    vals = grid.radii[:, None] ** (sgn * profile.a) * profile.eta(grid.angles)[None, :]
    return ScalarField(grid, vals, residual=0.0,
                       meta={"separable": True, "a": profile.a, "kind": profile.kind,
                             "p": profile.p, "potential_c": profile.c})


def rayleigh_quotient_p2(profile: AngularProfile) -> float:
    """Discrete Laplace-Beltrami Rayleigh quotient of eta (p = 2 check).

    planar: int eta'^2 / int eta^2;  cap: same with sin^(N-2) weight.
    """
    t, e = profile.thetas, profile.etas
    tm = 0.5 * (t[:-1] + t[1:])
    de = np.diff(e) / np.diff(t)
    em = 0.5 * (e[:-1] + e[1:])
    w = np.sin(tm) ** (profile.N - 2) if profile.geometry == "axisymmetric-cap" else 1.0
    num = np.sum(w * de ** 2 * np.diff(t)) + profile.c * np.sum(w * em ** 2 * np.diff(t))
    den = np.sum(w * em ** 2 * np.diff(t))
    return float(num / den)


def exponent_table(rows, path=None, header_comment=None):
    """Sweep rows of (p, N, theta0, kind, c, geometry) -> list of records.

    Writes CSV `p,N,theta0,kind,c,a,lambda` when path is given.
    """
    records = []
    for (p, N, theta0, kind, c, geometry) in rows:
        prof = exponent_for_opening(theta0, p, N, kind, c, geometry)
        records.append({"p": p, "N": N, "theta0": theta0, "kind": kind, "c": c,
                        "a": prof.a, "lambda": prof.lam})
    if path is not None:
        with open(path, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write("p,N,theta0,kind,c,a,lambda\n")
            for r in records:
                f.write(f"{float(r['p'])!r},{r['N']},{float(r['theta0'])!r},"
                        f"{r['kind']},{float(r['c'])!r},{float(r['a'])!r},"
                        f"{float(r['lambda'])!r}\n")
    return records
