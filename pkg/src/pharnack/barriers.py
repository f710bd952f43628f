"""The two explicit comparison functions and their certification.

Lower barrier (annulus r/4 <= s <= r/2 around an inward offset center):

    V(s) = (exp(-a (s/r)^alpha) - exp(-a/2^alpha))
         / (exp(-a/4^alpha) - exp(-a/2^alpha)),      alpha = p/(p-1),

which is a subsolution of  -div(|Dv|^(p-2) Dv) + C0~ v^(p-1) <= 0  as soon
as  a^(p-1) (a p / 4^alpha - N) >= C0~ ;  the minimal such a is computed by
bisection and certified on a radial stencil.

Upper barrier: the first radial Dirichlet eigenfunction phi_1 of the
p-Laplacian on B_3 \\ B_1, normalized phi_1(2) = 1 and rescaled to the
annulus rb <= s <= 3rb around an outward offset center.  It satisfies
-div(|Dphi|^(p-2) Dphi) = lambda_1/(rb)^p phi^(p-1); picking b on the
dyadic ladder 2/3, 1/3, 1/6, ... small enough that
lambda_1/(rb)^p >= 1 + C0~ makes it a supersolution with margin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .solver import (InputError, RadialEigenpair, RadialGrid, ScalarField,
                     SideConditionReport, eigen_annulus_radial,
                     side_condition_check)


@dataclass(frozen=True)
class LowerBarrierParams:
    p: float
    N: int
    C0_tilde: float
    a: float
    r: float = 1.0
    center: tuple = (0.0, 0.5)

    @property
    def alpha(self):
        return self.p / (self.p - 1.0)

    def threshold_value(self):
        """a^(p-1) (a p / 4^alpha - N) - C0~; >= 0 at admissible a."""
        return self.a ** (self.p - 1.0) * (self.a * self.p / 4.0 ** self.alpha
                                           - self.N) - self.C0_tilde


@dataclass(frozen=True)
class UpperBarrierParams:
    p: float
    N: int
    C0_tilde: float
    b: float
    r: float
    eigenpair: RadialEigenpair = field(repr=False)
    center: tuple = (0.0, 0.0)
    scale: float = 1.0

    @property
    def rb(self):
        return self.r * self.b


def lower_barrier_params(p: float, N: int, C0_tilde: float, r: float = 1.0,
                         center=(0.0, 0.5)) -> LowerBarrierParams:
    """Least a > 0 with a^(p-1)(a p/4^alpha - N) >= C0~, by bisection."""
    if p <= 1.0:
        raise InputError("p must exceed 1")
    if C0_tilde < 0.0:
        raise InputError("C0~ must be nonnegative")
    alpha = p / (p - 1.0)

    def g(a):
        return a ** (p - 1.0) * (a * p / 4.0 ** alpha - N) - C0_tilde

    lo, hi = 1e-9, max(2.0 * N * 4.0 ** alpha / p, 4.0)
    while g(hi) <= 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return LowerBarrierParams(p=p, N=N, C0_tilde=C0_tilde, a=hi, r=r,
                              center=tuple(center))


def lower_barrier_profile(params: LowerBarrierParams, s):
    """V(s) for radial distance s from the barrier center."""
    a, al, r = params.a, params.alpha, params.r
    den = math.exp(-a / 4.0 ** al) - math.exp(-a / 2.0 ** al)
    return (np.exp(-a * (np.asarray(s, dtype=float) / r) ** al)
            - math.exp(-a / 2.0 ** al)) / den


def eval_lower_barrier(params: LowerBarrierParams, x) -> float:
    x = np.asarray(x, dtype=float)
    s = float(np.linalg.norm(x - np.asarray(params.center, dtype=float)))
    return float(lower_barrier_profile(params, s))


def upper_barrier_params(p: float, N: int, C0_tilde: float, r: float,
                         eigenpair: RadialEigenpair | None = None,
                         center=(0.0, 0.0), scale: float = 1.0,
                         containment=None) -> UpperBarrierParams:
    """Largest dyadic b in {2/3, 1/3, 1/6, ...} passing both smallness tests.

    Eigenvalue condition: lambda_1/(r b)^p >= 1 + C0~.  The optional
    `containment` callable receives b and may veto it (geometric inclusion
    B_2br(center_b) inside the reference ball).
    """
    if eigenpair is None:
        eigenpair = eigen_annulus_radial(p, N)
    b = 2.0 / 3.0
    while b > 1e-12:
        ok = eigenpair.lam1 / (r * b) ** p >= 1.0 + C0_tilde
        if ok and containment is not None:
            ok = bool(containment(b))
        if ok:
            return UpperBarrierParams(p=p, N=N, C0_tilde=C0_tilde, b=b, r=r,
                                      eigenpair=eigenpair, center=tuple(center),
                                      scale=scale)
        b /= 2.0
    raise InputError("no admissible b on the dyadic ladder")


def eval_upper_barrier(params: UpperBarrierParams, x) -> float:
    x = np.asarray(x, dtype=float)
    s = float(np.linalg.norm(x - np.asarray(params.center, dtype=float)))
    rb = params.rb
    if not (rb * (1.0 - 1e-12) <= s <= 3.0 * rb * (1.0 + 1e-12)):
        raise InputError(f"point at distance {s} lies outside the annulus "
                         f"[{rb}, {3 * rb}]")
    return params.scale * float(params.eigenpair.phi_at(s / rb))


def fit_linear_lower_slope(params: LowerBarrierParams, n: int = 200):
    """Fitted C' with V(N_t(P)) >= C' t / r on 0 <= t <= r/2.

    The barrier center sits at depth r/2 over P, so the normal point N_t(P)
    has s = r/2 - t.
    """
    t = np.linspace(0.0, params.r / 2.0, n + 1)[1:]
    V = lower_barrier_profile(params, params.r / 2.0 - t)
    return float(np.min(V / (t / params.r)))


def fit_upper_linear_bound(pair: RadialEigenpair, n: int = 400):
    """Fitted C with phi_1(s) <= C (s - 1) on (1, 2]."""
    s = np.linspace(1.0, 2.0, n + 1)[1:]
    return float(np.max(pair.phi_at(s) / (s - 1.0)))


@dataclass
class CertificationReport:
    barrier: str
    params: dict
    annulus: tuple
    n_nodes: int
    failures: list
    max_violation: float

    @property
    def passed(self):
        return not self.failures

    def to_json(self, path=None):
        doc = {"barrier": self.barrier, "params": self.params,
               "annulus": list(self.annulus), "n_nodes": self.n_nodes,
               "failures": [[int(i), float(v)] for i, v in self.failures],
               "passed": self.passed}
        if path is not None:
            with open(path, "w") as f:
                json.dump(doc, f, indent=2, sort_keys=True)
                f.write("\n")
        return doc


def certify_barriers(params, n: int = 400, rtol: float = 1e-8) -> CertificationReport:
    """Stencil certification of the barrier differential inequality.

    LowerBarrierParams -> subsolution check on s in [r/4, r/2];
    UpperBarrierParams -> supersolution check on s in [rb, 3rb].
    """
    if isinstance(params, LowerBarrierParams):
        s = np.linspace(params.r / 4.0, params.r / 2.0, n)
        fld = ScalarField(RadialGrid(s, dim=params.N), lower_barrier_profile(params, s))
        report = side_condition_check(fld, params.p, params.C0_tilde,
                                      "subsolution", rtol=rtol)
        pdoc = {"p": params.p, "N": params.N, "C0_tilde": params.C0_tilde,
                "a": params.a, "alpha": params.alpha, "r": params.r}
        annulus = (params.r / 4.0, params.r / 2.0)
    elif isinstance(params, UpperBarrierParams):
        rb = params.rb
        s = np.linspace(rb, 3.0 * rb, n)
        fld = ScalarField(RadialGrid(s, dim=params.N),
                          params.scale * params.eigenpair.phi_at(s / rb))
        report = side_condition_check(fld, params.p, params.C0_tilde,
                                      "supersolution", rtol=rtol)
        pdoc = {"p": params.p, "N": params.N, "C0_tilde": params.C0_tilde,
                "b": params.b, "r": params.r, "lambda1": params.eigenpair.lam1,
                "scale": params.scale}
        annulus = (rb, 3.0 * rb)
    else:
        raise InputError("params must be LowerBarrierParams or UpperBarrierParams")
    return CertificationReport(
        barrier="lower" if isinstance(params, LowerBarrierParams) else "upper",
        params=pdoc, annulus=annulus, n_nodes=report.n_checked,
        failures=report.failures, max_violation=report.max_violation)
