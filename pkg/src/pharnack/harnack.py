"""Measurement of the Harnack-type constants on computed fields.

Every operation returns a measured ratio/fit together with the radii and
sample sets it used, so reports are refinement-comparable.  All measured
quantities are ratios of field values and are therefore exactly invariant
under scaling the field; denominators below 1e-14 are excluded and the
exclusion count recorded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import DIRICHLET_ZERO, INTERIOR, GeometryError, normal_point
from .solver import InputError, ScalarField

DENOM_FLOOR = 1e-14

ESTIMATE_IDS = ("harn-int", "harn-h", "harn-hold", "norm-est", "norm-est2",
                "a-prior0", "unif1", "unif1'", "bhi1", "bhi2", "sing1",
                "quotient-k")

REPORT_SCHEMA = {
    "type": "object",
    "required": ["records", "grid_id", "refinement_level"],
    "properties": {
        "grid_id": {"type": "string"},
        "refinement_level": {"type": "integer"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["estimate_id", "constants", "radii"],
                "properties": {
                    "estimate_id": {"enum": list(ESTIMATE_IDS)},
                    "constants": {"type": "object"},
                    "radii": {"type": "array", "items": {"type": "number"}},
                    "samples": {"type": "integer"},
                    "excluded": {"type": "integer"},
                },
            },
        },
    },
}


class SamplingError(RuntimeError):
    pass


@dataclass
class HarnackReport:
    grid_id: str
    refinement_level: int = 0
    records: list = field(default_factory=list)

    def add(self, estimate_id, constants, radii, samples=0, excluded=0):
        if estimate_id not in ESTIMATE_IDS:
            raise InputError(f"unknown estimate id {estimate_id!r}")
        clean = {k: ([float(x) for x in v] if isinstance(v, (list, tuple))
                     else float(v)) for k, v in constants.items()}
        self.records.append({
            "estimate_id": estimate_id,
            "constants": clean,
            "radii": [float(r) for r in radii],
            "samples": int(samples),
            "excluded": int(excluded),
        })

    def to_json(self, path=None):
        doc = {"grid_id": self.grid_id, "refinement_level": self.refinement_level,
               "records": self.records}
        if path is not None:
            with open(path, "w") as f:
                json.dump(doc, f, indent=2, sort_keys=True)
                f.write("\n")
        return doc

    def validate(self):
        import jsonschema
        jsonschema.validate(self.to_json(), REPORT_SCHEMA)

    def ladder_csv(self, path, header_comment=None):
        """Plot-ready `estimate_id,r,constant`, one row per measured radius."""
        with open(path, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write("estimate_id,r,constant\n")
            for rec in self.records:
                cs = rec["constants"]
                ladder = cs.get("ladder")
                if ladder is None:
                    main = next(iter(sorted(cs)))
                    for r in rec["radii"]:
                        f.write(f"{rec['estimate_id']},{float(r)!r},{float(cs[main])!r}\n")
                else:
                    for r, c in zip(rec["radii"], ladder):
                        f.write(f"{rec['estimate_id']},{float(r)!r},{float(c)!r}\n")


# --------------------------------------------------------------------------
# node selections
# --------------------------------------------------------------------------

def _interior_nodes(fld):
    g = fld.grid
    ii, jj = np.nonzero(g.tags == INTERIOR)
    rr = g.radii[ii]
    tt = g.angles[jj]
    xs = rr * np.cos(tt)
    ys = rr * np.sin(tt)
    return ii, jj, xs, ys, rr


def _values_at_nodes(fld, ii, jj):
    return fld.values[ii, jj]


def _dom_of(fld):
    dom = fld.grid.dom
    if dom is None:
        raise InputError("field grid carries no domain descriptor")
    return dom


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------

def _disk_lattice(center, radius, n_s=10, n_phi=24):
    """Fixed polar sample lattice in B_radius(center): grid-independent, so
    measurements are refinement-comparable."""
    s = radius * (np.arange(n_s) + 0.5) / n_s
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    ss, pp = np.meshgrid(s, phi, indexing="ij")
    pts = np.stack([center[0] + ss.ravel() * np.cos(pp.ravel()),
                    center[1] + ss.ravel() * np.sin(pp.ravel())], axis=1)
    return np.concatenate([np.asarray([center], dtype=float), pts], axis=0)


def _ball_samples(fld, center, radius, rho_floor=0.0, n_s=12, n_phi=24):
    """Fixed-lattice sample points in B_radius(center) inside the domain,
    the grid's radial coverage, and above a depth floor."""
    dom = _dom_of(fld)
    g = fld.grid
    keep = []
    for x, y in _disk_lattice(center, radius, n_s=n_s, n_phi=n_phi):
        rr = np.hypot(x, y)
        if not (g.radii[0] * (1 + 1e-12) <= rr <= g.radii[-1] * (1 - 1e-12)):
            continue
        if not dom.contains((x, y)):
            continue
        if rho_floor > 0.0 and dom.distance_to_boundary((x, y)) < rho_floor:
            continue
        keep.append((x, y))
    return np.asarray(keep)


def interior_harnack(fld: ScalarField, P, r: float):
    """sup/inf of the field over a fixed sample lattice in B_r(P).

    Preconditions: B_2r(P) inside the domain and |P| >= 4r (clearance from
    the singular point).
    """
    dom = _dom_of(fld)
    if np.hypot(*P) < 4.0 * r * (1.0 - 1e-12):
        raise GeometryError("clearance |P| >= 4r violated")
    if dom.distance_to_boundary(P) < 2.0 * r * (1.0 - 1e-12):
        raise GeometryError("B_2r(P) is not contained in the domain")
    pts = _disk_lattice(P, r * (1.0 - 1e-9))
    vals = np.atleast_1d(fld.eval_xy(pts))
    lo = float(vals.min())
    if lo < DENOM_FLOOR:
        raise SamplingError("field vanishes inside the Harnack ball")
    return float(vals.max()) / lo


def chained_harnack(fld: ScalarField, Q, r: float, h: int):
    """Measured c with u(x) <= c^h u(y), over the fixed depth-graded lattice
    of sample points in B_(3r/2)(Q) with rho >= r/2^h."""
    dom = _dom_of(fld)
    pts = _disk_lattice(Q, 1.5 * r, n_s=14, n_phi=28)
    g = fld.grid
    keep = []
    floor = r / 2.0 ** h
    for x, y in pts:
        rr = np.hypot(x, y)
        if not (g.radii[0] * (1 + 1e-12) <= rr <= g.radii[-1] * (1 - 1e-12)):
            continue
        if not dom.contains((x, y)):
            continue
        if dom.distance_to_boundary((x, y)) < floor:
            continue
        keep.append((x, y))
    if not keep:
        raise SamplingError("no sample points with rho >= r/2^h inside "
                            "B_(3r/2)(Q)")
    vals = np.atleast_1d(fld.eval_xy(np.asarray(keep)))
    vals = vals[vals > DENOM_FLOOR]
    if vals.size == 0:
        raise SamplingError("all candidate values below the denominator floor")
    return float((vals.max() / vals.min()) ** (1.0 / h))


def boundary_decay(fld: ScalarField, P, s: float, n_samples: int = 8):
    """Hoelder fit along the inward normal at a boundary point P != 0.

    Returns (delta, c3): log u(N_t(P)) ~ delta log t by least squares on a
    dyadic ladder t = s/2, s/4, ...; c3 calibrated against max u on B_s(P).
    """
    dom = _dom_of(fld)
    ts = s * 0.5 ** np.arange(1, n_samples + 1)
    pts, us = [], []
    for t in ts:
        try:
            q = normal_point(dom, P, t, "inward")
        except GeometryError:
            continue
        val = fld.eval_xy([q])
        if val > DENOM_FLOOR:
            pts.append(t)
            us.append(val)
    if len(pts) < 4:
        raise SamplingError(f"only {len(pts)} usable samples along the normal")
    pts, us = np.array(pts), np.array(us)
    delta, logc = np.polyfit(np.log(pts), np.log(us), 1)
    ii, jj, xs, ys, _ = _interior_nodes(fld)
    ball = (xs - P[0]) ** 2 + (ys - P[1]) ** 2 <= s * s
    M = float(_values_at_nodes(fld, ii[ball], jj[ball]).max()) if ball.any() \
        else float(np.exp(logc) * s ** delta)
    c3 = float(np.max(us / ((pts / s) ** delta * M)))
    return float(delta), c3


def carleson_constant(fld: ScalarField, Q, r: float):
    """max over B_r(Q) of u divided by u at the interior reference point."""
    dom = _dom_of(fld)
    A = normal_point(dom, Q, r / 2.0, "inward")
    uA = fld.eval_xy([A])
    if uA < DENOM_FLOOR:
        raise SamplingError("reference value u(A_(r/2)(Q)) vanishes")
    pts = _ball_samples(fld, Q, r)
    if pts.size == 0:
        raise SamplingError("no sample points in B_r(Q)")
    return float(np.max(fld.eval_xy(pts)) / uA)


def two_sided_slope(fld: ScalarField, Q, r: float, b: float = 0.5,
                    n_P: int = 5, n_t: int = 5):
    """Smallest c6 with t/(c6 r) <= u(N_t(P))/u(N_(r/2)(Q)) <= c6 t/r.

    P runs over a uniform angular ladder of boundary points in B_r(Q);
    t over the dyadic ladder rb/2, rb/4, ...
    """
    dom = _dom_of(fld)
    ref = fld.eval_xy([normal_point(dom, Q, r / 2.0, "inward")])
    if ref < DENOM_FLOOR:
        raise SamplingError("degenerate field: u(N_(r/2)(Q)) = 0")
    thQ = np.arctan2(Q[1], Q[0])
    on_flat = abs(Q[1]) < 1e-12 or abs(thQ - dom.opening) < 1e-9
    c6 = 1.0
    samples = 0
    excluded = 0
    for k in range(n_P):
        if on_flat:
            # slide along the flat boundary piece through Q
            shift = (k - n_P // 2) * r / (n_P + 1)
            P = (Q[0] + shift * np.cos(thQ), Q[1] + shift * np.sin(thQ))
        else:
            dth = (k - n_P // 2) * (r / np.hypot(*Q)) / (n_P + 1)
            P = (np.hypot(*Q) * np.cos(thQ + dth), np.hypot(*Q) * np.sin(thQ + dth))
        if np.hypot(P[0] - Q[0], P[1] - Q[1]) > r:
            continue
        for t in r * b / 2.0 * 0.5 ** np.arange(n_t):
            try:
                x = normal_point(dom, P, t, "inward")
            except GeometryError:
                continue
            val = fld.eval_xy([x])
            if val < DENOM_FLOOR:
                excluded += 1
                continue
            gamma = val / ref
            c6 = max(c6, gamma * r / t, t / (r * gamma))
            samples += 1
    if samples == 0:
        raise SamplingError("no usable (P, t) samples")
    return float(c6), samples, excluded


def apriori_alpha(fld: ScalarField, A, n_annuli: int = 6):
    """Envelope fit of u(x)/(rho(x) u(A)) over dyadic annuli.

    upper envelope ~ |x|^(-alpha-1)  ->  alpha_upper = -slope_up - 1
    lower envelope ~ |x|^(+alpha-1)  ->  alpha_lower = +slope_lo + 1
    """
    dom = _dom_of(fld)
    uA = fld.eval_xy([A])
    if uA < DENOM_FLOOR:
        raise SamplingError("reference value u(A) vanishes")
    g = fld.grid
    rmax = 0.5 * g.outer_radius
    radii, ups, los = [], [], []
    for k in range(n_annuli):
        r_hi, r_lo = rmax * 0.5 ** k, rmax * 0.5 ** (k + 1)
        if r_lo < 2.0 * g.eps:
            break
        ii, jj, xs, ys, rr = _interior_nodes(fld)
        ann = (rr >= r_lo) & (rr < r_hi)
        if not ann.any():
            continue
        vals = _values_at_nodes(fld, ii[ann], jj[ann])
        rho = np.array([dom.distance_to_boundary((x, y))
                        for x, y in zip(xs[ann], ys[ann])])
        ok = (rho > DENOM_FLOOR) & (vals > DENOM_FLOOR)
        if not ok.any():
            continue
        w = vals[ok] / (rho[ok] * uA)
        radii.append(np.sqrt(r_lo * r_hi))
        ups.append(w.max())
        los.append(w.min())
    if len(radii) < 3:
        raise SamplingError(f"only {len(radii)} usable annuli")
    radii, ups, los = map(np.array, (radii, ups, los))
    slope_up, logc_up = np.polyfit(np.log(radii), np.log(ups), 1)
    slope_lo, logc_lo = np.polyfit(np.log(radii), np.log(los), 1)
    return {
        "alpha_upper": float(-slope_up - 1.0),
        "alpha_lower": float(slope_lo + 1.0),
        "slope_upper": float(slope_up),
        "slope_lower": float(slope_lo),
        "c_upper": float(np.exp(logc_up)),
        "c_lower": float(np.exp(-logc_lo)),
        "radii": radii.tolist(),
    }


def ratio_uniformity(fld: ScalarField, r: float):
    """c9 = sup u(x) rho(y) / (u(y) rho(x)) over |x|,|y| in [r/2, 2r], |x| <= 2|y|;
    c9' = max u over the annulus divided by u(N_r(0))."""
    dom = _dom_of(fld)
    if dom.R0 is not None and r > dom.R0 / 2.0 * (1.0 + 1e-12):
        raise GeometryError("precondition r <= R0/2 violated")
    g = fld.grid
    shells = [i for i in range(1, g.n_r - 1)
              if r / 2.0 <= g.radii[i] <= 2.0 * r]
    if not shells:
        raise SamplingError("no radial shells in [r/2, 2r]")
    vmax = {}
    vmin = {}
    excluded = 0
    for i in shells:
        tt = g.angles[1:-1]
        vals = fld.values[i, 1:-1]
        rho = np.array([dom.distance_to_boundary((g.radii[i] * np.cos(t),
                                                  g.radii[i] * np.sin(t)))
                        for t in tt])
        ok = (rho > DENOM_FLOOR) & (vals > DENOM_FLOOR)
        excluded += int((~ok).sum())
        if ok.any():
            w = vals[ok] / rho[ok]
            vmax[i], vmin[i] = float(w.max()), float(w.min())
    c9 = 1.0
    for i in vmax:
        for k in vmax:
            if g.radii[k] / 2.0 <= g.radii[i] <= 2.0 * g.radii[k]:
                c9 = max(c9, vmax[i] / vmin[k])
    # vertical form
    nu = dom.inward_normal((0.0, 0.0)) if dom.shape == "half-disk" else None
    if nu is None:
        # sector: inward direction at the origin along the bisector
        half = dom.opening / 2.0
        nu = (np.cos(half), np.sin(half))
    Nr0 = (r * nu[0], r * nu[1])
    ref = fld.eval_xy([Nr0])
    c9p = np.nan
    if ref > DENOM_FLOOR:
        ii, jj, xs, ys, rr = _interior_nodes(fld)
        ann = (rr >= r / 2.0) & (rr <= 2.0 * r)
        if ann.any():
            c9p = float(_values_at_nodes(fld, ii[ann], jj[ann]).max() / ref)
    return float(c9), float(c9p), excluded


def boundary_harnack(u1: ScalarField, u2: ScalarField, Q, r: float):
    """c10 = max over sampled pairs in B_r(Q) of the double ratio
    (u2(x)/u2(y)) / (u1(x)/u1(y)) = w(x)/w(y) with w = u2/u1.

    Samples stay a small depth (r/32) off the Dirichlet boundary, where the
    interpolated ratio of two vanishing fields is meaningful.
    """
    pts = _ball_samples(u1, Q, r, rho_floor=r / 32.0)
    if pts.size == 0:
        raise SamplingError("no usable pairs in B_r(Q)")
    v1 = np.atleast_1d(u1.eval_xy(pts))
    v2 = np.atleast_1d(u2.eval_xy(pts))
    ok = (v1 > DENOM_FLOOR) & (v2 > DENOM_FLOOR)
    excluded = int((~ok).sum())
    if not ok.any():
        raise SamplingError("no usable pairs in B_r(Q)")
    w = v2[ok] / v1[ok]
    return float(w.max() / w.min()), int(ok.sum()), excluded


def annulus_ratio_bound(u1: ScalarField, u2: ScalarField, r: float):
    """c11 = sup/inf of u1/u2 over the annulus r/2 < |x| < r."""
    ii, jj, xs, ys, rr = _interior_nodes(u1)
    ann = (rr >= r / 2.0) & (rr <= r)
    v1 = _values_at_nodes(u1, ii[ann], jj[ann])
    v2 = _values_at_nodes(u2, ii[ann], jj[ann])
    ok = (v1 > DENOM_FLOOR) & (v2 > DENOM_FLOOR)
    excluded = int((~ok).sum())
    if not ok.any():
        raise SamplingError("no usable nodes in the annulus")
    w = v1[ok] / v2[ok]
    return float(w.max() / w.min()), int(ok.sum()), excluded


def singularity_test(fld: ScalarField, n_levels: int = 6,
                     grow_factor: float = 1.4, flat_band: float = 0.10):
    """Verdict on m(r) = min over the shell |x| = r of |x| u(x) / rho(x).

    Measured on the dyadic ladder r_k = r_max 2^(-k); 'singular' when m
    grows by >= grow_factor per halving over the last three levels,
    'bounded' when the growth stays below 1 + flat_band, else
    'inconclusive'.  The growth cutoff sits below 2^(1/sqrt(3)) ~ 1.4916,
    the slowest blow-up among the shipped default exponents, with the flat
    band far below it.
    """
    dom = _dom_of(fld)
    g = fld.grid
    rmax = g.outer_radius / 4.0
    ladder_r, ms = [], []
    for k in range(n_levels):
        target = rmax * 0.5 ** k
        if target < 2.0 * g.eps:
            break
        i = int(np.argmin(np.abs(g.radii - target)))
        if i <= 0 or i >= g.n_r - 1:
            continue
        tt = g.angles[1:-1]
        vals = fld.values[i, 1:-1]
        rho = np.array([dom.distance_to_boundary((g.radii[i] * np.cos(t),
                                                  g.radii[i] * np.sin(t)))
                        for t in tt])
        ok = rho > DENOM_FLOOR
        if not ok.any():
            continue
        ladder_r.append(float(g.radii[i]))
        ms.append(float(np.min(g.radii[i] * vals[ok] / rho[ok])))
    if len(ms) < 4:
        return "inconclusive", ladder_r, ms
    growth = [ms[k + 1] / ms[k] for k in range(len(ms) - 1)]
    last = growth[-3:]
    if all(gf >= grow_factor for gf in last):
        return "singular", ladder_r, ms
    if all(gf <= 1.0 + flat_band for gf in last):
        return "bounded", ladder_r, ms
    return "inconclusive", ladder_r, ms


def quotient_constancy(u: ScalarField, v: ScalarField, r0: float = None,
                       r_inner: float = None):
    """k = median of v/u over interior nodes with |x| <= r0; max deviation.

    Nodes inside r_inner (default 8x the truncation radius) are excluded:
    they sit in the data layer of the truncated scheme, which carries the
    arc data's angular shape rather than the limit object's.
    """
    ii, jj, xs, ys, rr = _interior_nodes(u)
    if r0 is None:
        r0 = u.grid.outer_radius / 4.0
    if r_inner is None:
        r_inner = 8.0 * u.grid.eps
    sel = (rr <= r0) & (rr >= r_inner)
    vu = _values_at_nodes(u, ii[sel], jj[sel])
    vv = _values_at_nodes(v, ii[sel], jj[sel])
    ok = vu > DENOM_FLOOR
    if not ok.any():
        raise SamplingError("u vanishes on every node of the region")
    ratios = vv[ok] / vu[ok]
    k = float(np.median(ratios))
    if k == 0.0:
        return 0.0, float(np.max(np.abs(vv[ok])))
    dev = float(np.max(np.abs(ratios / k - 1.0)))
    return k, dev
