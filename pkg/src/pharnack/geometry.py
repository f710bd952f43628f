"""Planar domains with a boundary singularity at the origin.

Supported shapes: circular sector {0 < theta < omega, |x| < R}, half-disk
{|x| < R, y > 0}, and simple Lipschitz polygons with a vertex at the origin.
All carry the origin on their boundary.  The module provides the exact
distance-to-boundary, inward/outward normal offsets, a constructive
chain-of-balls connector between interior points, and graded polar grids
with boundary tags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# node tags
INTERIOR = 0
DIRICHLET_ZERO = 1
TRUNCATION_ARC = 2

TAG_NAMES = {INTERIOR: "interior", DIRICHLET_ZERO: "dirichlet-zero",
             TRUNCATION_ARC: "truncation-arc"}


class GeometryError(ValueError):
    """Domain membership / tube / chain construction failures."""


class ConfigurationError(ValueError):
    """Bad grid or domain parameters."""


def _norm(v):
    return math.hypot(v[0], v[1])


def _seg_distance(x, a, b):
    """Distance from point x to segment [a, b], plus the nearest point."""
    ax, ay = b[0] - a[0], b[1] - a[1]
    L2 = ax * ax + ay * ay
    if L2 == 0.0:
        return _norm((x[0] - a[0], x[1] - a[1])), (a[0], a[1])
    t = ((x[0] - a[0]) * ax + (x[1] - a[1]) * ay) / L2
    t = min(1.0, max(0.0, t))
    q = (a[0] + t * ax, a[1] + t * ay)
    return _norm((x[0] - q[0], x[1] - q[1])), q


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")

    def contains(self, x, slack=1e-12):
        return _norm((x[0] - self.center[0], x[1] - self.center[1])) <= self.radius + slack


@dataclass(frozen=True)
class DomainSpec:
    """Planar domain with singular boundary point at the origin.

    shape: 'sector' | 'half-disk' | 'polygon'
    m:  Lipschitz graph constant of the boundary (>= 1 by convention)
    R0: interior/exterior sphere radius; None for shapes with corners on
        every boundary chart (sector apex).  The half-disk gets R0 = R/4,
        valid away from the two outer corners; normal_point re-checks the
        tube property pointwise.
    """
    shape: str
    radius: float = 1.0
    opening: float = math.pi
    vertices: tuple = ()
    m: float = 1.0
    R0: float | None = None

    # ---- constructors -------------------------------------------------
    @staticmethod
    def sector(opening, radius=1.0):
        if not (0.0 < opening < 2.0 * math.pi):
            raise ConfigurationError("sector opening must lie in (0, 2*pi)")
        half = min(opening, 2.0 * math.pi - opening) / 2.0
        m = max(1.0, abs(math.cos(half) / math.sin(half)))
        return DomainSpec("sector", radius=radius, opening=opening, m=m,
                          R0=None if abs(opening - math.pi) > 1e-12 else radius / 4.0)

    @staticmethod
    def half_disk(radius=1.0):
        return DomainSpec("half-disk", radius=radius, opening=math.pi, m=1.0,
                          R0=radius / 4.0)

    @staticmethod
    def lipschitz_polygon(vertices):
        vs = [tuple(map(float, v)) for v in vertices]
        if len(vs) < 3:
            raise ConfigurationError("polygon needs at least 3 vertices")
        if min(_norm(v) for v in vs) > 1e-12:
            raise GeometryError("polygon must carry the origin as a vertex")
        m = 1.0
        n = len(vs)
        for k in range(n):
            a, b, c = vs[k - 1], vs[k], vs[(k + 1) % n]
            u = (a[0] - b[0], a[1] - b[1])
            w = (c[0] - b[0], c[1] - b[1])
            ang = abs(math.atan2(u[0] * w[1] - u[1] * w[0], u[0] * w[0] + u[1] * w[1]))
            half = min(ang, 2.0 * math.pi - ang) / 2.0
            if half > 1e-9:
                m = max(m, abs(math.cos(half) / math.sin(half)))
        return DomainSpec("polygon", vertices=tuple(vs), m=m, R0=None)

    # ---- predicates ---------------------------------------------------
    def contains(self, x, tol=1e-12):
        """Closure membership."""
        r = _norm(x)
        if self.shape == "half-disk":
            return x[1] >= -tol and r <= self.radius + tol
        if self.shape == "sector":
            if r <= tol:
                return True
            if r > self.radius + tol:
                return False
            th = math.atan2(x[1], x[0]) % (2.0 * math.pi)
            if th <= self.opening:
                return True
            e0 = (math.cos(self.opening), math.sin(self.opening))
            d0, _ = _seg_distance(x, (0.0, 0.0), (self.radius, 0.0))
            d1, _ = _seg_distance(x, (0.0, 0.0), (self.radius * e0[0], self.radius * e0[1]))
            return min(d0, d1) <= tol
        # polygon: ray casting on the closure
        if self._poly_boundary_distance(x)[0] <= tol:
            return True
        return self._poly_contains_open(x)

    def _poly_contains_open(self, x):
        inside = False
        vs = self.vertices
        n = len(vs)
        for k in range(n):
            a, b = vs[k], vs[(k + 1) % n]
            if (a[1] > x[1]) != (b[1] > x[1]):
                t = (x[1] - a[1]) / (b[1] - a[1])
                if x[0] < a[0] + t * (b[0] - a[0]):
                    inside = not inside
        return inside

    def _poly_boundary_distance(self, x):
        best, bestq = math.inf, None
        vs = self.vertices
        for k in range(len(vs)):
            d, q = _seg_distance(x, vs[k], vs[(k + 1) % len(vs)])
            if d < best:
                best, bestq = d, q
        return best, bestq

    # ---- distance and normals ------------------------------------------
    def nearest_boundary_point(self, x):
        if self.shape == "half-disk":
            r = _norm(x)
            d_flat = abs(x[1])
            d_arc = abs(self.radius - r)
            if d_flat <= d_arc:
                return (x[0], 0.0)
            if r == 0.0:
                return (0.0, 0.0)
            s = self.radius / r
            return (x[0] * s, x[1] * s)
        if self.shape == "sector":
            cands = []
            e0 = (math.cos(self.opening), math.sin(self.opening))
            L = self.radius
            for a, b in (((0.0, 0.0), (L, 0.0)), ((0.0, 0.0), (L * e0[0], L * e0[1]))):
                cands.append(_seg_distance(x, a, b))
            r = _norm(x)
            if r > 0:
                th = math.atan2(x[1], x[0]) % (2.0 * math.pi)
                th = min(max(th, 0.0), self.opening)
                cands.append((abs(self.radius - r) if 0.0 <= th <= self.opening else math.inf,
                              (self.radius * math.cos(th), self.radius * math.sin(th))))
            d, q = min(cands, key=lambda c: c[0])
            return q
        return self._poly_boundary_distance(x)[1]

    def distance_to_boundary(self, x):
        if not self.contains(x, tol=1e-9 * max(1.0, self.radius)):
            raise GeometryError(f"point {tuple(x)} lies outside the domain closure")
        q = self.nearest_boundary_point(x)
        return _norm((x[0] - q[0], x[1] - q[1]))

    def inward_normal(self, P, tol=1e-9):
        """Unit inward normal at a boundary point P (away from corners)."""
        if self.shape in ("half-disk", "sector"):
            r = _norm(P)
            if abs(r - self.radius) <= tol * self.radius:
                return (-P[0] / r, -P[1] / r)
            if self.shape == "half-disk":
                if abs(P[1]) <= tol:
                    return (0.0, 1.0)
            else:
                if abs(P[1]) <= tol * max(1.0, r) and P[0] >= -tol:
                    return (0.0, 1.0)
                e0 = (math.cos(self.opening), math.sin(self.opening))
                if abs(P[0] * e0[1] - P[1] * e0[0]) <= tol * max(1.0, r):
                    return (e0[1], -e0[0])  # rotate edge direction by -90deg into the sector
            raise GeometryError(f"{tuple(P)} is not on the boundary")
        # polygon: normal of the supporting edge, oriented inward by probing
        d, q = self._poly_boundary_distance(P)
        if d > tol * max(1.0, _norm(P), 1.0):
            raise GeometryError(f"{tuple(P)} is not on the boundary")
        vs = self.vertices
        best = None
        for k in range(len(vs)):
            dd, _ = _seg_distance(P, vs[k], vs[(k + 1) % len(vs)])
            if best is None or dd < best[0]:
                a, b = vs[k], vs[(k + 1) % len(vs)]
                best = (dd, a, b)
        a, b = best[1], best[2]
        t = (b[0] - a[0], b[1] - a[1])
        L = _norm(t)
        n1 = (-t[1] / L, t[0] / L)
        probe = (P[0] + 1e-7 * n1[0], P[1] + 1e-7 * n1[1])
        return n1 if self.contains(probe) else (-n1[0], -n1[1])


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------

def distance_to_boundary(dom: DomainSpec, x) -> float:
    return dom.distance_to_boundary(x)


def normal_point(dom: DomainSpec, P, r: float, side: str = "inward"):
    """P -+ r*nu_P.  The inward point is validated to satisfy rho = r."""
    if side not in ("inward", "outward"):
        raise ConfigurationError("side must be 'inward' or 'outward'")
    if r <= 0:
        raise ConfigurationError("offset r must be positive")
    if dom.R0 is not None and r > dom.R0 * (1.0 + 1e-12):
        raise GeometryError(f"offset r={r} exceeds the sphere radius R0={dom.R0}")
    nu = dom.inward_normal(P)
    s = 1.0 if side == "inward" else -1.0
    q = (P[0] + s * r * nu[0], P[1] + s * r * nu[1])
    if side == "inward":
        rho = dom.distance_to_boundary(q)
        if abs(rho - r) > 1e-9 * max(r, 1.0):
            raise GeometryError(
                f"tube property violated at {tuple(P)}: rho(N_r(P))={rho} != r={r}")
    return q


def _away_direction(dom, z):
    q = dom.nearest_boundary_point(z)
    d = (z[0] - q[0], z[1] - q[1])
    L = _norm(d)
    if L == 0.0:
        raise GeometryError("cannot take the away-direction at a boundary point")
    return (d[0] / L, d[1] / L)


def _ascend(dom, z, level, cap_center, cap_radius, max_steps=4000):
    """Greedy walk raising rho(z) to `level`; returns the path and the level reached."""
    path = [tuple(z)]
    rho = dom.distance_to_boundary(z)
    stall = 0
    for _ in range(max_steps):
        if rho >= level or stall >= 4:
            break
        d = _away_direction(dom, z)
        step = rho / 8.0
        cands = [ (z[0] + step * d[0], z[1] + step * d[1]) ]
        # tangential escapes for medial-axis stalls
        cands.append((z[0] - step * d[1], z[1] + step * d[0]))
        cands.append((z[0] + step * d[1], z[1] - step * d[0]))
        best, best_rho = None, rho
        for czz in cands:
            if _norm((czz[0] - cap_center[0], czz[1] - cap_center[1])) > cap_radius:
                continue
            try:
                rr = dom.distance_to_boundary(czz)
            except GeometryError:
                continue
            if rr > best_rho:
                best, best_rho = czz, rr
        if best is None:
            stall += 1
            continue
        stall = stall + 1 if best_rho < rho + rho / 64.0 else 0
        z, rho = best, best_rho
        path.append(tuple(z))
    return path, rho


def _descend(dom, z, level, max_steps=4000):
    """Walk toward the nearest boundary until rho(z) drops to `level`."""
    path = [tuple(z)]
    rho = dom.distance_to_boundary(z)
    for _ in range(max_steps):
        if rho <= level * (1.0 + 1e-9):
            break
        d = _away_direction(dom, z)
        step = min(rho / 8.0, rho - level)
        z = (z[0] - step * d[0], z[1] - step * d[1])
        rho = dom.distance_to_boundary(z)
        path.append(tuple(z))
    return path, rho


def chain_of_balls(dom: DomainSpec, Q, r: float, x, y, h: int):
    """Connected chain of balls linking x and y inside B_2r(Q) & the domain.

    Returns (balls, N0) with N0 = ceil(len(balls)/h), the constructive
    chain-length constant achieved on this instance.  Every output is
    re-validated clause by clause; violations raise GeometryError.
    """
    if h < 1:
        raise ConfigurationError("h must be a positive integer")
    for pt, name in ((x, "x"), (y, "y")):
        if _norm((pt[0] - Q[0], pt[1] - Q[1])) > 1.5 * r * (1.0 + 1e-12):
            raise GeometryError(f"precondition failed: {name} outside B_(3r/2)(Q)")
    rho_x = dom.distance_to_boundary(x)
    rho_y = dom.distance_to_boundary(y)
    floor = r / 2.0 ** h
    if min(rho_x, rho_y) < floor * (1.0 - 1e-12):
        raise GeometryError("precondition failed: min(rho(x), rho(y)) < r/2^h")

    if x == y or _norm((x[0] - y[0], x[1] - y[1])) <= 1e-15:
        return [Ball(tuple(x), rho_x / 4.0)], 1

    cap_c, cap_r = Q, 1.75 * r
    level = r / 8.0
    px, lx = _ascend(dom, x, level, cap_c, cap_r)
    py, ly = _ascend(dom, y, level, cap_c, cap_r)
    level = min(level, lx, ly)
    # endpoints that sit deeper than the walk level get a descent bridge
    dx_path, _ = _descend(dom, px[-1], level)
    dy_path, _ = _descend(dom, py[-1], level)
    px = px + dx_path[1:]
    py = py + dy_path[1:]

    # level walk from the end of px to the end of py
    z, target = px[-1], py[-1]
    walk = []
    for _ in range(4000):
        gap = _norm((z[0] - target[0], z[1] - target[1]))
        if gap <= level / 4.0:
            break
        d = _away_direction(dom, z)
        t = (-d[1], d[0])
        if t[0] * (target[0] - z[0]) + t[1] * (target[1] - z[1]) < 0.0:
            t = (-t[0], -t[1])
        step = min(level / 8.0, gap)
        z = (z[0] + step * t[0], z[1] + step * t[1])
        # project back onto the level set (one correction is enough at step/level ~ 1/8)
        rho = dom.distance_to_boundary(z)
        d2 = _away_direction(dom, z)
        z = (z[0] + (level - rho) * d2[0], z[1] + (level - rho) * d2[1])
        walk.append(tuple(z))
    else:
        raise GeometryError("level walk failed to reach the target point")

    centers = px + walk + py[::-1]
    balls = []
    last = None
    for czz in centers:
        rho = dom.distance_to_boundary(czz)
        b = Ball(czz, rho / 4.0)
        if last is None or _norm((czz[0] - last.center[0], czz[1] - last.center[1])) > 1e-14:
            balls.append(b)
            last = b

    _validate_chain(dom, Q, r, x, y, balls)
    n0 = max(1, math.ceil(len(balls) / h))
    return balls, n0


def _validate_chain(dom, Q, r, x, y, balls):
    if not balls:
        raise GeometryError("chain clause failed: empty chain")
    if not balls[0].contains(x):
        raise GeometryError("chain clause failed: x not in B_1")
    if not balls[-1].contains(y):
        raise GeometryError("chain clause failed: y not in B_j")
    for k in range(len(balls) - 1):
        b0, b1 = balls[k], balls[k + 1]
        d = _norm((b0.center[0] - b1.center[0], b0.center[1] - b1.center[1]))
        if d > b0.radius + b1.radius:
            raise GeometryError(f"chain clause failed: B_{k+1} and B_{k+2} are disjoint")
    for k, b in enumerate(balls[:-1]):
        rho = dom.distance_to_boundary(b.center)
        if 2.0 * b.radius > rho * (1.0 + 1e-9):
            raise GeometryError(f"chain clause failed: 2B_{k+1} not inside the domain")
        if _norm((b.center[0] - Q[0], b.center[1] - Q[1])) + 2.0 * b.radius > 2.0 * r * (1.0 + 1e-9):
            raise GeometryError(f"chain clause failed: 2B_{k+1} not inside B_2r(Q)")


# --------------------------------------------------------------------------
# polar grids
# --------------------------------------------------------------------------

def geometric_radii(eps, R, n_r, q):
    """Radii from eps to R whose consecutive steps satisfy h_k/h_{k+1} = q."""
    m = n_r - 1
    w = q ** np.arange(m - 1, -1, -1)
    C = (R - eps) / w.sum()
    radii = eps + np.concatenate(([0.0], np.cumsum(C * w)))
    radii[0], radii[-1] = eps, R
    return radii


def power_graded_radii(eps, R, beta, n_target):
    """Radii with local resolution h/r ~ kappa*(r/R)^(min(beta,2)/2).

    Matches the truncation error (h/r)^2 * r^(-beta) of a power-type field
    to a uniform absolute level; kappa is calibrated so roughly n_target
    points are produced.
    """
    expo = min(beta, 2.0) / 2.0

    def build(kappa):
        rs = [R]
        rr = R
        while rr > eps and len(rs) < 200000:
            step = kappa * rr * min(1.0, (rr / R) ** expo)
            rr = max(rr - step, eps)
            rs.append(rr)
        out = np.array(rs[::-1])
        out[0] = eps
        # the clamp at eps may leave a degenerate sliver cell; merge it
        if len(out) > 2 and out[1] - out[0] < 0.2 * (out[2] - out[1]):
            out = np.delete(out, 1)
        return out

    lo, hi = 1e-5, 1.0
    for _ in range(50):
        mid = math.sqrt(lo * hi)
        if len(build(mid)) > n_target:
            lo = mid
        else:
            hi = mid
    return build(math.sqrt(lo * hi))


@dataclass
class PolarGrid:
    """Tensor grid in (r, theta) over a sector-like domain.

    radii increase from the truncation radius eps to the outer radius;
    angles are uniform on [0, theta0].  Tags partition the nodes into
    interior / dirichlet-zero / truncation-arc.
    """
    radii: np.ndarray
    angles: np.ndarray
    tags: np.ndarray = field(default=None)
    dom: DomainSpec | None = None

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        if np.any(np.diff(self.radii) <= 0.0):
            raise ConfigurationError("radii must be strictly increasing")
        if self.radii[0] <= 0.0:
            raise ConfigurationError("innermost radius must be positive")
        if self.tags is None:
            self.tags = self._default_tags()

    def _default_tags(self):
        t = np.full((self.n_r, self.n_theta), INTERIOR, dtype=np.uint8)
        t[:, 0] = DIRICHLET_ZERO
        t[:, -1] = DIRICHLET_ZERO
        t[-1, :] = DIRICHLET_ZERO
        t[0, 1:-1] = TRUNCATION_ARC
        t[0, 0] = DIRICHLET_ZERO
        t[0, -1] = DIRICHLET_ZERO
        return t

    @property
    def n_r(self):
        return len(self.radii)

    @property
    def n_theta(self):
        return len(self.angles)

    @property
    def eps(self):
        return float(self.radii[0])

    @property
    def outer_radius(self):
        return float(self.radii[-1])

    @property
    def theta0(self):
        return float(self.angles[-1])

    @property
    def h_theta(self):
        return float(self.angles[1] - self.angles[0])

    def nodes_xy(self):
        rr, tt = np.meshgrid(self.radii, self.angles, indexing="ij")
        return rr * np.cos(tt), rr * np.sin(tt)

    def node_id(self, i, j):
        return i * self.n_theta + j

    def local_resolution(self):
        """max(h_r/r, h_theta) per radial row (interior rows)."""
        hr = np.diff(self.radii)
        loc = np.maximum(np.maximum(hr[:-1], hr[1:]) / self.radii[1:-1], self.h_theta)
        return loc

    def export_csv(self, path, header_comment=None):
        xs, ys = self.nodes_xy()
        with open(path, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write("node_id,r,theta,x,y,tag\n")
            for i in range(self.n_r):
                for j in range(self.n_theta):
                    f.write(f"{self.node_id(i, j)},{float(self.radii[i])!r},"
                            f"{float(self.angles[j])!r},{float(xs[i, j])!r},"
                            f"{float(ys[i, j])!r},{TAG_NAMES[self.tags[i, j]]}\n")


def build_polar_grid(dom: DomainSpec, n_r: int, n_theta: int, eps: float,
                     q: float = 0.85) -> PolarGrid:
    """Graded tensor grid covering dom minus the ball B_eps(0)."""
    if dom.shape not in ("sector", "half-disk"):
        raise ConfigurationError("polar grids require a sector or half-disk domain")
    if n_r < 4 or n_theta < 4:
        raise ConfigurationError("insufficient resolution: need n_r >= 4 and n_theta >= 4")
    if not (0.0 < q < 1.0):
        raise ConfigurationError("grading ratio q must lie in (0, 1)")
    if not (0.0 < eps < dom.radius):
        raise ConfigurationError("eps must lie strictly between 0 and the domain radius")
    radii = geometric_radii(eps, dom.radius, n_r, q)
    angles = np.linspace(0.0, dom.opening, n_theta)
    return PolarGrid(radii, angles, dom=dom)


def grid_from_radii(dom: DomainSpec, radii, n_theta: int) -> PolarGrid:
    """Grid over an explicit (strictly increasing) radii list."""
    if n_theta < 4:
        raise ConfigurationError("insufficient resolution: need n_theta >= 4")
    angles = np.linspace(0.0, dom.opening, n_theta)
    return PolarGrid(np.asarray(radii, dtype=float), angles, dom=dom)
