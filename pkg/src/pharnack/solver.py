"""Finite-volume solver for  -div(|Du|^(p-2) Du) - d(x) u^(p-1) = 0.

The potential is d(x) = -c |x|^(-p) with c >= 0 (absorption), so the
operator obeys the comparison principle.  Discretization: vertex-centered
finite volumes on the polar tensor grid.  Fluxes live on cell faces; the
face coefficient sigma = (|Du|^2 + ereg^2)^((p-2)/2) uses the full face
gradient (normal difference + averaged tangential difference), which keeps
the frozen-coefficient matrix an M-matrix and the scheme second order.

Nonlinear strategy: continuation over the regularization floor
ereg = 1e-2 ... 1e-8, warm-started; at each stage one frozen-coefficient
(Picard) step and then damped Newton steps with an analytic Jacobian.
If a Newton step cannot reduce the residual it falls back to a Picard
step.  The residual is measured relative to the largest per-cell flux
magnitude, so tolerances are scale-free.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.interpolate import RegularGridInterpolator

from .geometry import (DIRICHLET_ZERO, INTERIOR, TRUNCATION_ARC,
                       ConfigurationError, PolarGrid)

EREG_LADDER = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
MAX_OUTER_ITERATIONS = 200


class SolverError(RuntimeError):
    """Non-convergence; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """d(x) = 0 or d(x) = -c |x|^(-p); |d| <= C0 |x|^(-p) with C0 = c."""
    form: str = "zero"
    c: float = 0.0

    @staticmethod
    def zero():
        return PotentialSpec("zero", 0.0)

    @staticmethod
    def inverse_power(c):
        if c < 0:
            raise InputError("potential strength c must be nonnegative")
        return PotentialSpec("inverse-power", float(c))

    @property
    def C0(self):
        return self.c

    def d_values(self, r, p):
        if self.form == "zero" or self.c == 0.0:
            return np.zeros_like(np.asarray(r, dtype=float))
        return -self.c * np.asarray(r, dtype=float) ** (-p)


@dataclass
class RadialGrid:
    """1D radial sample line in R^dim, for radial operator checks."""
    s: np.ndarray
    dim: int = 2

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        if np.any(np.diff(self.s) <= 0) or self.s[0] <= 0:
            raise ConfigurationError("radial samples must be positive and increasing")


@dataclass
class ScalarField:
    """Nodal values of a nonnegative solution plus solver metadata.

    Lives on a PolarGrid (2D) or a RadialGrid (1D profile checks)."""
    grid: object
    values: np.ndarray
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if isinstance(self.grid, RadialGrid):
            if self.values.shape != self.grid.s.shape:
                raise InputError("profile shape does not match its radial grid")
        elif self.values.shape != (self.grid.n_r, self.grid.n_theta):
            raise InputError("field shape does not match its grid")

    # -- evaluation ------------------------------------------------------
    def interpolator(self):
        return RegularGridInterpolator((self.grid.radii, self.grid.angles),
                                       self.values, method="linear")

    def eval_xy(self, pts):
        """Evaluate at cartesian points (k, 2) by bilinear (r, theta) interpolation."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
        th = np.clip(th, self.grid.angles[0], self.grid.angles[-1])
        out = self.interpolator()(np.stack([r, th], axis=1))
        return out if len(out) > 1 else float(out[0])

    def scaled(self, k):
        return ScalarField(self.grid, k * self.values, residual=self.residual,
                           meta=dict(self.meta))

    # -- I/O --------------------------------------------------------------
    def to_csv(self, path, header_comment=None):
        g = self.grid
        with open(path, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write("node_id,r,theta,value\n")
            for i in range(g.n_r):
                for j in range(g.n_theta):
                    f.write(f"{g.node_id(i, j)},{float(g.radii[i])!r},"
                            f"{float(g.angles[j])!r},{float(self.values[i, j])!r}\n")

    @staticmethod
    def from_csv(path, dom=None):
        with open(path) as f:
            lines = [ln for ln in f if ln.strip() and not ln.startswith("#")]
        rows = np.loadtxt(io.StringIO("".join(lines[1:])), delimiter=",")
        radii = np.unique(rows[:, 1])
        angles = np.unique(rows[:, 2])
        vals = np.full((len(radii), len(angles)), np.nan)
        ir = np.searchsorted(radii, rows[:, 1])
        it = np.searchsorted(angles, rows[:, 2])
        vals[ir, it] = rows[:, 3]
        if np.isnan(vals).any():
            raise InputError(f"field file {path} does not cover a tensor grid")
        return ScalarField(PolarGrid(radii, angles, dom=dom), vals)

    def solver_log(self):
        return {
            "iterations": int(self.meta.get("iterations", 0)),
            "final_residual": float(self.residual),
            "regularization_floor": float(self.meta.get("regularization_floor", 0.0)),
            "p": float(self.meta.get("p", 0.0)),
            "potential_c": float(self.meta.get("potential_c", 0.0)),
        }


@dataclass
class RadialEigenpair:
    """First radial Dirichlet eigenpair of the p-Laplacian on B_3 \\ B_1."""
    p: float
    N: int
    lam1: float
    s: np.ndarray
    phi: np.ndarray
    _dense: object = None

    def phi_at(self, s):
        if self._dense is not None:
            out = self._dense(np.clip(s, 1.0, 3.0))[0] / self._norm
            return out
        return np.interp(s, self.s, self.phi)


# --------------------------------------------------------------------------
# discrete operator
# --------------------------------------------------------------------------

class _Discretization:
    """Faces, measures and index maps for one polar grid and exponent p."""

    def __init__(self, grid, p, c):
        self.grid, self.p, self.c = grid, p, c
        nr, nt = grid.n_r, grid.n_theta
        r = grid.radii
        self.r = r
        self.ht = grid.h_theta
        self.hr = np.diff(r)
        self.rp = 0.5 * (r[:-1] + r[1:])
        self.fr_i, self.fr_j = np.meshgrid(np.arange(nr - 1), np.arange(1, nt - 1),
                                           indexing="ij")
        self.fa_i, self.fa_j = np.meshgrid(np.arange(1, nr - 1), np.arange(nt - 1),
                                           indexing="ij")
        self.Lr = self.rp[self.fr_i] * self.ht / self.hr[self.fr_i]
        self.La = np.log(self.rp[self.fa_i] / self.rp[self.fa_i - 1]) / self.ht
        i = np.arange(1, nr - 1)
        self.area_int = 0.5 * (self.rp[i] ** 2 - self.rp[i - 1] ** 2) * self.ht
        self.area = np.zeros((nr, nt))
        self.area[1:-1, 1:-1] = self.area_int[:, None]
        self.rpow = np.zeros((nr, nt))
        if c:
            self.rpow[1:-1, 1:-1] = r[1:-1, None] ** (-p)
        self.drc = r[2:] - r[:-2]
        self.idx = -np.ones((nr, nt), dtype=np.int64)
        ii, jj = np.meshgrid(np.arange(1, nr - 1), np.arange(1, nt - 1), indexing="ij")
        self.n_unknowns = ii.size
        self.idx[ii, jj] = np.arange(self.n_unknowns).reshape(ii.shape)

    def face_gradients(self, u):
        g, r, ht = self.grid, self.r, self.ht
        gth = np.zeros_like(u)
        gth[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * ht) / r[:, None]
        grr = np.zeros_like(u)
        grr[1:-1, :] = (u[2:, :] - u[:-2, :]) / self.drc[:, None]
        fr_i, fr_j, fa_i, fa_j = self.fr_i, self.fr_j, self.fa_i, self.fa_j
        gn_r = (u[fr_i + 1, fr_j] - u[fr_i, fr_j]) / self.hr[fr_i]
        gt_r = 0.5 * (gth[fr_i, fr_j] + gth[fr_i + 1, fr_j])
        gn_a = (u[fa_i, fa_j + 1] - u[fa_i, fa_j]) / (ht * r[fa_i])
        gt_a = 0.5 * (grr[fa_i, fa_j] + grr[fa_i, fa_j + 1])
        return gn_r, gt_r, gn_a, gt_a

    def residual(self, u, ereg, with_scale=False):
        p, c = self.p, self.c
        fr_i, fr_j, fa_i, fa_j = self.fr_i, self.fr_j, self.fa_i, self.fa_j
        gn_r, gt_r, gn_a, gt_a = self.face_gradients(u)
        sig_r = (gn_r ** 2 + gt_r ** 2 + ereg ** 2) ** ((p - 2.0) / 2.0)
        sig_a = (gn_a ** 2 + gt_a ** 2 + ereg ** 2) ** ((p - 2.0) / 2.0)
        Fr = self.Lr * sig_r * (u[fr_i + 1, fr_j] - u[fr_i, fr_j])
        Fa = self.La * sig_a * (u[fa_i, fa_j + 1] - u[fa_i, fa_j])
        R = np.zeros_like(u)
        np.subtract.at(R, (fr_i, fr_j), Fr)
        np.add.at(R, (fr_i + 1, fr_j), Fr)
        np.subtract.at(R, (fa_i, fa_j), Fa)
        np.add.at(R, (fa_i, fa_j + 1), Fa)
        if c:
            R += c * self.rpow * np.abs(u) ** (p - 1.0) * np.sign(u) * self.area
        if not with_scale:
            return R[1:-1, 1:-1]
        S = np.zeros_like(u)
        np.add.at(S, (fr_i, fr_j), np.abs(Fr))
        np.add.at(S, (fr_i + 1, fr_j), np.abs(Fr))
        np.add.at(S, (fa_i, fa_j), np.abs(Fa))
        np.add.at(S, (fa_i, fa_j + 1), np.abs(Fa))
        if c:
            S += c * self.rpow * np.abs(u) ** (p - 1.0) * self.area
        return R[1:-1, 1:-1], max(float(S[1:-1, 1:-1].max()), 1e-300)

    def jacobian(self, u, ereg, newton):
        p, c = self.p, self.c
        r, ht = self.r, self.ht
        fr_i, fr_j, fa_i, fa_j = self.fr_i, self.fr_j, self.fa_i, self.fa_j
        idx = self.idx
        gn_r, gt_r, gn_a, gt_a = self.face_gradients(u)
        S_r = gn_r ** 2 + gt_r ** 2 + ereg ** 2
        S_a = gn_a ** 2 + gt_a ** 2 + ereg ** 2
        sig_r = S_r ** ((p - 2.0) / 2.0)
        sig_a = S_a ** ((p - 2.0) / 2.0)
        if newton:
            cn_r = sig_r * (1.0 + (p - 2.0) * gn_r ** 2 / S_r)
            cn_a = sig_a * (1.0 + (p - 2.0) * gn_a ** 2 / S_a)
        else:
            cn_r, cn_a = sig_r, sig_a

        rows, cols, vals = [], [], []

        def add(ri, rj, ci, cj, v, sgn):
            rid, cid = idx[ri, rj], idx[ci, cj]
            msk = (rid >= 0) & (cid >= 0)
            rows.append(rid[msk])
            cols.append(cid[msk])
            vals.append(sgn * v[msk])

        a_r = self.Lr * cn_r
        for ro, sgn in (((fr_i, fr_j), -1.0), ((fr_i + 1, fr_j), 1.0)):
            add(*ro, fr_i + 1, fr_j, a_r, sgn)
            add(*ro, fr_i, fr_j, a_r, -sgn)
        a_a = self.La * cn_a
        for ro, sgn in (((fa_i, fa_j), -1.0), ((fa_i, fa_j + 1), 1.0)):
            add(*ro, fa_i, fa_j + 1, a_a, sgn)
            add(*ro, fa_i, fa_j, a_a, -sgn)

        if newton and p != 2.0:
            # tangential couplings of the face flux: dPhi/dgt = sigma (p-2) gn gt / S
            b_r = (self.rp[fr_i] * ht) * sig_r * (p - 2.0) * gn_r * gt_r / S_r
            cL = 0.5 / (2.0 * ht) / r[fr_i]
            cR = 0.5 / (2.0 * ht) / r[fr_i + 1]
            for ro, sgn in (((fr_i, fr_j), -1.0), ((fr_i + 1, fr_j), 1.0)):
                add(*ro, fr_i, fr_j + 1, b_r * cL, sgn)
                add(*ro, fr_i, fr_j - 1, b_r * cL, -sgn)
                add(*ro, fr_i + 1, fr_j + 1, b_r * cR, sgn)
                add(*ro, fr_i + 1, fr_j - 1, b_r * cR, -sgn)
            b_a = (self.La * ht * r[fa_i]) * sig_a * (p - 2.0) * gn_a * gt_a / S_a
            cc = 0.5 / self.drc[fa_i - 1]
            for ro, sgn in (((fa_i, fa_j), -1.0), ((fa_i, fa_j + 1), 1.0)):
                add(*ro, fa_i + 1, fa_j, b_a * cc, sgn)
                add(*ro, fa_i - 1, fa_j, b_a * cc, -sgn)
                add(*ro, fa_i + 1, fa_j + 1, b_a * cc, sgn)
                add(*ro, fa_i - 1, fa_j + 1, b_a * cc, -sgn)

        if c:
            # clamp keeps the linearization bounded where u -> 0 and p < 2
            up = np.maximum(np.abs(u[1:-1, 1:-1]), 1e-6)
            dpot = c * self.rpow[1:-1, 1:-1] * (p - 1.0) * up ** (p - 2.0) \
                * self.area[1:-1, 1:-1]
            diag = idx[1:-1, 1:-1].ravel()
            rows.append(diag)
            cols.append(diag)
            vals.append(dpot.ravel())

        return sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_unknowns, self.n_unknowns))


def assemble_boundary_values(grid, boundary_data):
    """Full nodal array from {tag-name: scalar | callable(r, theta) | array}."""
    vals = np.zeros((grid.n_r, grid.n_theta))
    rr, tt = np.meshgrid(grid.radii, grid.angles, indexing="ij")
    for tag, value in boundary_data.items():
        code = {"dirichlet-zero": DIRICHLET_ZERO, "truncation-arc": TRUNCATION_ARC}.get(tag)
        if code is None:
            raise InputError(f"unknown boundary tag {tag!r}")
        mask = grid.tags == code
        if callable(value):
            vals[mask] = value(rr[mask], tt[mask])
        else:
            vals[mask] = value
    return vals


def solve_dirichlet(grid: PolarGrid, p: float, pot: PotentialSpec, boundary_data,
                    tol: float = 1e-10) -> ScalarField:
    """Dirichlet solve on the tagged grid; boundary_data maps tags to values.

    boundary_data may also be a full (n_r, n_theta) array whose entries are
    read on the tagged boundary nodes.
    """
    if p <= 1.0:
        raise InputError("p must exceed 1")
    if tol <= 0.0:
        raise InputError("tol must be positive")
    if isinstance(boundary_data, dict):
        bvals = assemble_boundary_values(grid, boundary_data)
    else:
        bvals = np.asarray(boundary_data, dtype=float)
    bmask = grid.tags != INTERIOR
    if np.any(bvals[bmask] < 0.0):
        raise InputError("boundary data must be nonnegative")

    scale = float(np.abs(bvals[bmask]).max())
    if scale == 0.0:
        # unique solution of the homogeneous problem
        f = ScalarField(grid, np.zeros_like(bvals), residual=0.0,
                        meta={"iterations": 0, "regularization_floor": 0.0,
                              "p": p, "potential_c": pot.c})
        return f

    disc = _Discretization(grid, p, pot.c)
    u = np.zeros((grid.n_r, grid.n_theta))
    u[bmask] = bvals[bmask] / scale

    ladder = (0.0,) if p == 2.0 else EREG_LADDER
    iterations = 0
    res = np.inf
    for stage, ereg in enumerate(ladder):
        stage_tol = tol if stage == len(ladder) - 1 else max(tol, 1e-6)
        newton = False
        for it in range(MAX_OUTER_ITERATIONS):
            R, sc = disc.residual(u, ereg, with_scale=True)
            res = float(np.abs(R).max() / sc)
            if res < stage_tol:
                break
            J = disc.jacobian(u, ereg, newton)
            delta = spla.spsolve(J, -R.ravel()).reshape(grid.n_r - 2, grid.n_theta - 2)
            step, accepted = 1.0, False
            for _ in range(12):
                u_try = u.copy()
                u_try[1:-1, 1:-1] += step * delta
                if float(np.abs(disc.residual(u_try, ereg)).max() / sc) < res:
                    accepted = True
                    break
                step *= 0.5
            if newton and not accepted:
                # damped Newton failed; take a frozen-coefficient step instead
                J = disc.jacobian(u, ereg, False)
                delta = spla.spsolve(J, -R.ravel()).reshape(grid.n_r - 2,
                                                            grid.n_theta - 2)
                u_try = u.copy()
                u_try[1:-1, 1:-1] += delta
            u = u_try
            iterations += 1
            newton = True          # frozen-coefficient warm start, then Newton
        else:
            raise SolverError(
                f"no convergence within {MAX_OUTER_ITERATIONS} outer steps "
                f"(stage ereg={ereg:g}, residual={res:.3e})", residual=res)

    interior = u[1:-1, 1:-1]
    if interior.min() < -1e-9:
        raise SolverError(f"maximum principle violated: min u = {interior.min():.3e}",
                          residual=res)
    np.clip(u, 0.0, None, out=u)
    u *= scale
    return ScalarField(grid, u, residual=res,
                       meta={"iterations": iterations,
                             "regularization_floor": ladder[-1],
                             "p": p, "potential_c": pot.c})


def weak_residual(fld: ScalarField, p: float, pot: PotentialSpec,
                  ereg: float = 0.0) -> float:
    """Relative defect of the discrete balance law on interior cells.

    Zero (to rounding) for outputs of solve_dirichlet at their tolerance;
    scale-free: residual(k*u) = residual(u).
    """
    disc = _Discretization(fld.grid, p, pot.c)
    R, sc = disc.residual(fld.values, ereg, with_scale=True)
    return float(np.abs(R).max() / sc)


def apply_operator(grid: PolarGrid, values, p: float) -> np.ndarray:
    """Pointwise -div(|Du|^(p-2) Du) per unit cell area at interior nodes."""
    disc = _Discretization(grid, p, 0.0)
    R = disc.residual(np.asarray(values, dtype=float), 0.0)
    return R / disc.area_int[:, None]


@dataclass
class SideConditionReport:
    side: str
    failures: list          # [(node_id, residual magnitude), ...]
    n_checked: int
    max_violation: float

    @property
    def passed(self):
        return not self.failures


def _radial_operator(s, v, p, dim):
    """Conservative stencil for -(s^(dim-1) |v'|^(p-2) v')' / s^(dim-1)."""
    h = np.diff(s)
    g = np.diff(v) / h
    sf = 0.5 * (s[:-1] + s[1:])
    flux = sf ** (dim - 1) * np.abs(g) ** (p - 2.0) * g
    span = 0.5 * (s[2:] - s[:-2])
    return -(flux[1:] - flux[:-1]) / span / s[1:-1] ** (dim - 1)


def side_condition_check(fld, p: float, C0_tilde: float, side: str,
                         rtol: float = 1e-8) -> SideConditionReport:
    """Check the differential inequality satisfied by a barrier candidate.

    side='subsolution':    -div(|Dv|^(p-2) Dv) + C0~ v^(p-1) <= 0
    side='supersolution':  -div(|Dv|^(p-2) Dv) - C0~ v^(p-1) >= v^(p-1)

    Evaluated with the conservative difference stencil on the field's grid
    (2D polar, or 1D radial in any dimension).  Nodes whose residual breaks
    the inequality beyond rtol*max|operator| are reported.
    """
    if side not in ("subsolution", "supersolution"):
        raise InputError("side must be 'subsolution' or 'supersolution'")
    if isinstance(fld.grid, RadialGrid):
        v = fld.values
        op = _radial_operator(fld.grid.s, v, p, fld.grid.dim)
        vmid = v[1:-1]
        ids = np.arange(1, len(v) - 1)
    else:
        op = apply_operator(fld.grid, fld.values, p)
        vmid = fld.values[1:-1, 1:-1]
        g = fld.grid
        ii, jj = np.meshgrid(np.arange(1, g.n_r - 1), np.arange(1, g.n_theta - 1),
                             indexing="ij")
        ids = (ii * g.n_theta + jj).ravel()
        op, vmid = op.ravel(), vmid.ravel()
    vpow = np.abs(vmid) ** (p - 1.0)
    if side == "subsolution":
        viol = op + C0_tilde * vpow
    else:
        viol = -(op - C0_tilde * vpow - vpow)
    floor = rtol * float(np.abs(op).max())
    bad = viol > floor
    failures = [(int(i), float(vv)) for i, vv in zip(ids[bad], viol[bad])]
    return SideConditionReport(side=side, failures=failures, n_checked=int(viol.size),
                               max_violation=float(viol.max()))


def eigen_annulus_radial(p: float, N: int, lam_rtol: float = 1e-12) -> RadialEigenpair:
    """First Dirichlet eigenpair of the radial p-Laplacian on 1 < |x| < 3.

    Shooting in flux variables (phi, w = s^(N-1)|phi'|^(p-2) phi') with
    bisection on the eigenvalue; the first mode is the one whose first zero
    lands exactly at s = 3.  Normalized by phi(2) = 1.
    """
    if p <= 1.0 or N < 2:
        raise InputError("need p > 1 and N >= 2")
    pm1 = p - 1.0

    def rhs(s, y, lam):
        phi, w = y
        dphi = np.sign(w) * (abs(w) / s ** (N - 1)) ** (1.0 / pm1)
        dw = -lam * s ** (N - 1) * np.sign(phi) * abs(phi) ** pm1
        return (dphi, dw)

    def crossing(s, y, lam):
        return y[0] - (1.0 if s < 1.0 + 1e-9 else 0.0)
    crossing.terminal = True
    crossing.direction = -1

    def first_zero(lam):
        sol = solve_ivp(rhs, (1.0, 3.5), (0.0, 1.0), args=(lam,), events=crossing,
                        rtol=1e-11, atol=1e-14)
        return float(sol.t_events[0][0]) if sol.t_events[0].size else np.inf

    lo, hi = 0.01, 1.0
    guard = 0
    while first_zero(hi) > 3.0:
        hi *= 2.0
        guard += 1
        if guard > 40:
            raise SolverError(f"eigenvalue bracket failure: first zero still beyond 3 "
                              f"at lambda={hi:g}")
    while first_zero(lo) <= 3.0:
        lo /= 2.0
        guard += 1
        if guard > 80:
            raise SolverError(f"eigenvalue bracket failure: zero before 3 at "
                              f"lambda={lo:g}")
    while hi - lo > lam_rtol * hi:
        mid = 0.5 * (lo + hi)
        if first_zero(mid) <= 3.0:
            hi = mid
        else:
            lo = mid
    lam1 = 0.5 * (lo + hi)
    sol = solve_ivp(rhs, (1.0, 3.0), (0.0, 1.0), args=(lam1,), rtol=1e-11, atol=1e-14,
                    dense_output=True)
    s = np.linspace(1.0, 3.0, 2001)
    phi = sol.sol(s)[0]
    norm = float(sol.sol(np.array([2.0]))[0][0])
    pair = RadialEigenpair(p=p, N=N, lam1=lam1, s=s, phi=phi / norm, _dense=sol.sol)
    pair._norm = norm
    return pair


@dataclass
class ComparisonReport:
    ordered: bool
    max_violation: float
    slack: float


def comparison_check(u1: ScalarField, u2: ScalarField,
                     slack_constant: float = 10.0) -> ComparisonReport:
    """Verify u1 >= u2 - slack pointwise, given u1 >= u2 on the data arc.

    slack is the O(h^2) discretization allowance, scaled by the local field
    magnitude through the grid's local resolution.
    """
    g = u1.grid
    if u2.grid.n_r != g.n_r or u2.grid.n_theta != g.n_theta or \
            not np.allclose(u2.grid.radii, g.radii):
        raise InputError("comparison_check requires a common grid")
    arc = g.tags == TRUNCATION_ARC
    if np.any(u1.values[arc] < u2.values[arc] - 1e-12 * max(1.0, u1.values[arc].max())):
        raise InputError("boundary ordering violated on the truncation arc")
    loc = g.local_resolution()
    scale = np.maximum(np.abs(u1.values), np.abs(u2.values))[1:-1, 1:-1]
    slack = 1e-12 * float(scale.max()) + slack_constant * (loc[:, None] ** 2) * scale
    diff = (u1.values - u2.values)[1:-1, 1:-1]
    worst = float((-diff - slack).max())
    return ComparisonReport(ordered=bool(worst <= 0.0),
                            max_violation=max(worst, 0.0),
                            slack=float(slack.max()))


def save_solver_log(fld: ScalarField, path):
    with open(path, "w") as f:
        json.dump(fld.solver_log(), f, indent=2, sort_keys=True)
        f.write("\n")
