"""Geodesic metric-space kernel for three concrete Hadamard spaces.

Supported spaces:

* ``Euclidean`` — R^d with the usual norm;
* ``Tripod`` — the R-tree made of three rays glued at one origin (the
  minimal branching example of nonpositive curvature);
* ``HalfPlane`` — the hyperbolic upper half-plane (a curved smooth example).

The module provides distances, geodesic interpolation ((1-t)x (+) t y),
geodesic rays toward ideal directions, metric projections onto convex sets,
and the two residuals used to certify the geometry numerically: the CN
(quadratic convexity) inequality along geodesics and the weak quasi-triangle
inequality for the d^q family.

All geometric tolerances are the single constant :data:`GEOM_TOL`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from . import rng

#: Absolute tolerance for every geometric identity check in the package.
GEOM_TOL = 1e-10

#: Parameter tolerance of the golden-section segment projection.
GOLDEN_TOL = 1e-12

#: Relative threshold under which two half-plane abscissae are treated as
#: equal (vertical geodesic) instead of solving for a semicircle center.
_VERTICAL_EPS = 1e-13


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Euclidean:
    """A point of R^d, d >= 1."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise ValueError("Euclidean point needs dimension >= 1")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))


@dataclass(frozen=True)
class Tripod:
    """A point of the tripod R-tree: (ray index, nonnegative coordinate).

    The origin (coordinate 0) is canonically stored on ray 0 so that point
    equality is unambiguous.
    """

    ray: int
    coord: float

    def __post_init__(self) -> None:
        if self.ray not in (0, 1, 2):
            raise ValueError(f"tripod ray must be 0, 1 or 2, got {self.ray}")
        c = float(self.coord)
        if c < 0.0:
            raise ValueError(f"tripod coordinate must be >= 0, got {c}")
        if c == 0.0:
            object.__setattr__(self, "ray", 0)
            c = 0.0  # normalize -0.0
        object.__setattr__(self, "coord", c)


@dataclass(frozen=True)
class HalfPlane:
    """A point of the hyperbolic upper half-plane (y > 0)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not self.y > 0.0:
            raise ValueError(f"half-plane point needs y > 0, got y={self.y}")


Point = Union[Euclidean, Tripod, HalfPlane]

TRIPOD_ORIGIN = Tripod(0, 0.0)


def space_of(p: Point) -> str:
    if isinstance(p, Euclidean):
        return "euclidean"
    if isinstance(p, Tripod):
        return "tripod"
    if isinstance(p, HalfPlane):
        return "halfplane"
    raise TypeError(f"not a point: {p!r}")


def _require_same_space(x: Point, y: Point) -> None:
    if type(x) is not type(y):
        raise ValueError(
            f"points live in different spaces: {space_of(x)} vs {space_of(y)}"
        )
    if isinstance(x, Euclidean) and len(x.coords) != len(y.coords):
        raise ValueError(
            f"Euclidean dimension mismatch: {len(x.coords)} vs {len(y.coords)}"
        )


# ---------------------------------------------------------------------------
# Convex sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WholeSpace:
    """The whole space (trivial constraint)."""


@dataclass(frozen=True)
class Ball:
    """Closed metric ball; radius 0 describes a singleton."""

    center: Point
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0.0:
            raise ValueError("ball radius must be >= 0")


@dataclass(frozen=True)
class Halfspace:
    """Euclidean halfspace {x : <normal, x> <= offset}; normal is unit."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self) -> None:
        n = tuple(float(c) for c in self.normal)
        nrm = math.sqrt(sum(c * c for c in n))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"halfspace normal must be a unit vector, |n|={nrm}")
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class Box:
    """Euclidean axis-aligned box; bounds may be +-inf."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(c) for c in self.lo)
        hi = tuple(float(c) for c in self.hi)
        if len(lo) != len(hi):
            raise ValueError("box bounds must have equal dimension")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("box has empty side (lo > hi)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass(frozen=True)
class TripodSegment:
    """Subtree of the tripod: points with coord <= max_coords[ray]."""

    max_coords: tuple[float, float, float]

    def __post_init__(self) -> None:
        m = tuple(float(c) for c in self.max_coords)
        if len(m) != 3 or any(c < 0.0 for c in m):
            raise ValueError("tripod segment needs three nonnegative maxima")
        object.__setattr__(self, "max_coords", m)


@dataclass(frozen=True)
class Segment:
    """Geodesic segment between two points of the same space."""

    a: Point
    b: Point

    def __post_init__(self) -> None:
        _require_same_space(self.a, self.b)


ConvexSet = Union[WholeSpace, Ball, Halfspace, Box, TripodSegment, Segment]


# ---------------------------------------------------------------------------
# Directions (ideal points / ends)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EuclideanDir:
    """Unit vector of R^d (equivalence class of parallel rays)."""

    vector: tuple[float, ...]

    def __post_init__(self) -> None:
        v = tuple(float(c) for c in self.vector)
        nrm = math.sqrt(sum(c * c for c in v))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |v|={nrm}")
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class TripodEnd:
    """The ideal end of one tripod ray."""

    ray: int

    def __post_init__(self) -> None:
        if self.ray not in (0, 1, 2):
            raise ValueError(f"tripod ray must be 0, 1 or 2, got {self.ray}")


@dataclass(frozen=True)
class HalfPlaneIdealPoint:
    """Boundary point of the half-plane: finite abscissa or None for infinity
    (the common endpoint of all upward vertical geodesics)."""

    boundary_x: float | None


Direction = Union[EuclideanDir, TripodEnd, HalfPlaneIdealPoint]


# ---------------------------------------------------------------------------
# Distance
# ---------------------------------------------------------------------------


def sqdist(x: Point, y: Point) -> float:
    """Squared distance; for Euclidean points computed without the square
    root (exact sum of squared coordinate differences)."""
    _require_same_space(x, y)
    if isinstance(x, Euclidean):
        acc = 0.0
        xc, yc = x.coords, y.coords
        for i in range(len(xc)):
            d = xc[i] - yc[i]
            acc += d * d
        return acc
    d = distance(x, y)
    return d * d


def distance(x: Point, y: Point) -> float:
    """The metric of the space both points live in."""
    _require_same_space(x, y)
    if isinstance(x, Euclidean):
        acc = 0.0
        xc, yc = x.coords, y.coords
        for i in range(len(xc)):
            d = xc[i] - yc[i]
            acc += d * d
        return math.sqrt(acc)
    if isinstance(x, Tripod):
        if x.ray == y.ray or x.coord == 0.0 or y.coord == 0.0:
            return abs(x.coord - y.coord)
        return x.coord + y.coord
    # Hyperbolic metric in the numerically stable asinh form, algebraically
    # identical to arcosh(1 + ((dx)^2+(dy)^2)/(2 y1 y2)) but without the
    # catastrophic cancellation of arcosh near coincident points.
    dx = x.x - y.x
    dy = x.y - y.y
    arg = (dx * dx + dy * dy) / (4.0 * x.y * y.y)
    return 2.0 * math.asinh(math.sqrt(arg))


# ---------------------------------------------------------------------------
# Geodesics
# ---------------------------------------------------------------------------


def _halfplane_is_vertical(x1: float, x2: float) -> bool:
    return abs(x2 - x1) <= _VERTICAL_EPS * max(1.0, abs(x1), abs(x2))


def _halfplane_circle(x: HalfPlane, y: HalfPlane) -> tuple[float, float]:
    """Center abscissa and radius of the semicircle geodesic through x, y."""
    c = ((y.x * y.x + y.y * y.y) - (x.x * x.x + x.y * x.y)) / (2.0 * (y.x - x.x))
    r = math.hypot(x.x - c, x.y)
    return c, r


def _halfplane_angle_param(theta: float) -> float:
    """Arclength parameter u = log tan(theta/2) along a semicircle."""
    return math.log(math.tan(0.5 * theta))


def _halfplane_point_at(c: float, r: float, u: float) -> HalfPlane:
    theta = 2.0 * math.atan(math.exp(u))
    return HalfPlane(c + r * math.cos(theta), r * math.sin(theta))


def geodesic_point(x: Point, y: Point, t: float) -> Point:
    """The point (1-t)x (+) t y on the unique geodesic from x to y."""
    _require_same_space(x, y)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"geodesic parameter must be in [0,1], got {t}")
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    if isinstance(x, Euclidean):
        return Euclidean(
            tuple(xc + t * (yc - xc) for xc, yc in zip(x.coords, y.coords))
        )
    if isinstance(x, Tripod):
        if x.coord == 0.0:
            return Tripod(y.ray, t * y.coord)
        if y.coord == 0.0:
            return Tripod(x.ray, (1.0 - t) * x.coord)
        if x.ray == y.ray:
            return Tripod(x.ray, x.coord + t * (y.coord - x.coord))
        traveled = t * (x.coord + y.coord)
        if traveled <= x.coord:
            return Tripod(x.ray, x.coord - traveled)
        return Tripod(y.ray, traveled - x.coord)
    if _halfplane_is_vertical(x.x, y.x):
        ylog = (1.0 - t) * math.log(x.y) + t * math.log(y.y)
        return HalfPlane(x.x + t * (y.x - x.x), math.exp(ylog))
    c, r = _halfplane_circle(x, y)
    u1 = _halfplane_angle_param(math.atan2(x.y, x.x - c))
    u2 = _halfplane_angle_param(math.atan2(y.y, y.x - c))
    return _halfplane_point_at(c, r, (1.0 - t) * u1 + t * u2)


def ray_point(x: Point, direction: Direction, s: float) -> Point:
    """The point at arclength s >= 0 on the geodesic ray from x toward
    the ideal direction."""
    if s < 0.0:
        raise ValueError(f"ray arclength must be >= 0, got {s}")
    if isinstance(x, Euclidean):
        if not isinstance(direction, EuclideanDir):
            raise ValueError("Euclidean point needs a EuclideanDir direction")
        if len(direction.vector) != len(x.coords):
            raise ValueError("direction dimension mismatch")
        return Euclidean(
            tuple(xc + s * u for xc, u in zip(x.coords, direction.vector))
        )
    if isinstance(x, Tripod):
        if not isinstance(direction, TripodEnd):
            raise ValueError("tripod point needs a TripodEnd direction")
        j = direction.ray
        if x.coord == 0.0 or x.ray == j:
            base = x.coord if x.ray == j else 0.0
            return Tripod(j, base + s)
        # Descend ray x.ray to the origin, then climb ray j.
        if s <= x.coord:
            return Tripod(x.ray, x.coord - s)
        return Tripod(j, s - x.coord)
    if not isinstance(direction, HalfPlaneIdealPoint):
        raise ValueError("half-plane point needs a HalfPlaneIdealPoint direction")
    b = direction.boundary_x
    if b is None:
        return HalfPlane(x.x, x.y * math.exp(s))
    if _halfplane_is_vertical(x.x, b):
        return HalfPlane(x.x, x.y * math.exp(-s))
    # Semicircle through x with ideal endpoint (b, 0): its center c solves
    # (x.x - c)^2 + x.y^2 = (b - c)^2.
    c = (x.x * x.x + x.y * x.y - b * b) / (2.0 * (x.x - b))
    r = abs(b - c)
    u0 = _halfplane_angle_param(math.atan2(x.y, x.x - c))
    # theta -> 0 approaches the boundary point c + r, theta -> pi the point
    # c - r; u = log tan(theta/2) is increasing in theta.
    u = u0 - s if b > c else u0 + s
    return _halfplane_point_at(c, r, u)


# ---------------------------------------------------------------------------
# Metric projections
# ---------------------------------------------------------------------------


def _project_segment_golden(seg: Segment, x: Point) -> Point:
    """Golden-section search on the geodesic parameter: t -> d(gamma(t), x)
    is convex in CAT(0) spaces, so unimodal on [0,1]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 1.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    gc = distance(geodesic_point(seg.a, seg.b, c), x)
    gd = distance(geodesic_point(seg.a, seg.b, d), x)
    while hi - lo > GOLDEN_TOL:
        if gc < gd:
            hi, d, gd = d, c, gc
            c = hi - invphi * (hi - lo)
            gc = distance(geodesic_point(seg.a, seg.b, c), x)
        else:
            lo, c, gc = c, d, gd
            d = lo + invphi * (hi - lo)
            gd = distance(geodesic_point(seg.a, seg.b, d), x)
    return geodesic_point(seg.a, seg.b, 0.5 * (lo + hi))


def _project_segment_euclid(seg: Segment, x: Euclidean) -> Euclidean:
    a, b = seg.a.coords, seg.b.coords
    num = 0.0
    den = 0.0
    for i in range(len(a)):
        ab = b[i] - a[i]
        num += (x.coords[i] - a[i]) * ab
        den += ab * ab
    if den == 0.0:
        return Euclidean(a)
    t = num / den
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return Euclidean(tuple(ac + t * (bc - ac) for ac, bc in zip(a, b)))


def project_convex(cset: ConvexSet, x: Point) -> Point:
    """Metric projection onto a closed convex set (unique in CAT(0))."""
    if isinstance(cset, WholeSpace):
        return x
    if isinstance(cset, Ball):
        d = distance(x, cset.center)
        if d <= cset.radius:
            return x
        return geodesic_point(cset.center, x, cset.radius / d)
    if isinstance(cset, Halfspace):
        if not isinstance(x, Euclidean):
            raise ValueError("halfspace projection is Euclidean-only")
        v = sum(n * c for n, c in zip(cset.normal, x.coords)) - cset.offset
        if v <= 0.0:
            return x
        return Euclidean(
            tuple(c - v * n for n, c in zip(cset.normal, x.coords))
        )
    if isinstance(cset, Box):
        if not isinstance(x, Euclidean):
            raise ValueError("box projection is Euclidean-only")
        if len(cset.lo) != len(x.coords):
            raise ValueError("box dimension mismatch")
        return Euclidean(
            tuple(min(max(c, l), h) for c, l, h in zip(x.coords, cset.lo, cset.hi))
        )
    if isinstance(cset, TripodSegment):
        if not isinstance(x, Tripod):
            raise ValueError("tripod-segment projection needs a tripod point")
        m = cset.max_coords[x.ray]
        if x.coord <= m:
            return x
        return Tripod(x.ray, m)
    if isinstance(cset, Segment):
        _require_same_space(cset.a, x)
        if isinstance(x, Euclidean):
            return _project_segment_euclid(cset, x)
        return _project_segment_golden(cset, x)
    raise TypeError(f"not a convex set: {cset!r}")


def contains(cset: ConvexSet, x: Point, tol: float = GEOM_TOL) -> bool:
    """Whether x lies in the set, up to the geometric tolerance."""
    return distance(x, project_convex(cset, x)) <= tol


# ---------------------------------------------------------------------------
# Geometry residuals
# ---------------------------------------------------------------------------


def cn_residual(x: Point, a: Point, b: Point, t: float) -> float:
    """Defect of the quadratic convexity (CN) inequality along the geodesic
    from a to b:  d^2(gamma(t), x) - [(1-t)d^2(a,x) + t d^2(b,x)
    - t(1-t)d^2(a,b)].  Nonpositive (up to rounding) in Hadamard spaces.
    """
    g = geodesic_point(a, b, t)
    return sqdist(g, x) - (
        (1.0 - t) * sqdist(a, x) + t * sqdist(b, x) - t * (1.0 - t) * sqdist(a, b)
    )


def quasi_triangle_residual(q: float, x: Point, y: Point, o: Point) -> float:
    """Defect of the weak quasi-triangle inequality for d^q:
    d^q(x,y) - 2^(q-1) (d^q(x,o) + d^q(y,o)).  Nonpositive for q >= 1."""
    if q < 1.0:
        raise ValueError(f"quasi-triangle exponent must be >= 1, got {q}")
    return distance(x, y) ** q - 2.0 ** (q - 1.0) * (
        distance(x, o) ** q + distance(y, o) ** q
    )


# ---------------------------------------------------------------------------
# Randomized geometry certification suite
# ---------------------------------------------------------------------------


def _draw(state: rng.RngState) -> tuple[float, rng.RngState]:
    return rng.next_uniform(state)


def _sample_point(space: str, dim: int, state: rng.RngState):
    if space == "euclidean":
        coords = []
        for _ in range(dim):
            u, state = _draw(state)
            coords.append(10.0 * u - 5.0)
        return Euclidean(tuple(coords)), state
    if space == "tripod":
        u, state = _draw(state)
        v, state = _draw(state)
        return Tripod(int(u * 3.0) % 3, 5.0 * v), state
    if space == "halfplane":
        u, state = _draw(state)
        v, state = _draw(state)
        return HalfPlane(6.0 * u - 3.0, math.exp(3.2 * v - 1.6)), state
    raise ValueError(f"unknown space kind: {space!r}")


def _suite_sets(space: str, dim: int) -> list[ConvexSet]:
    if space == "euclidean":
        e1 = tuple([1.0] + [0.0] * (dim - 1))
        mid = Euclidean(tuple([0.5] + [-0.25] * (dim - 1)))
        lo = tuple([-1.0] * dim)
        hi = tuple([0.5] * dim)
        sa = Euclidean(tuple([-1.0] * dim))
        sb = Euclidean(tuple([2.0] + [0.5] * (dim - 1)))
        return [
            Halfspace(e1, 0.0),
            Ball(mid, 1.2),
            Box(lo, hi),
            Segment(sa, sb),
        ]
    if space == "tripod":
        return [
            TripodSegment((1.5, 1.0, 2.0)),
            Ball(Tripod(0, 0.5), 1.0),
            Segment(Tripod(1, 2.0), Tripod(2, 1.0)),
        ]
    return [
        Ball(HalfPlane(0.0, 1.0), 0.8),
        Segment(HalfPlane(-1.0, 1.0), HalfPlane(1.5, 2.0)),
    ]


def _set_samples(cset: ConvexSet) -> list[Point]:
    if isinstance(cset, Halfspace):
        d = len(cset.normal)
        pts = [Euclidean(tuple(o * n for n in cset.normal)) for o in (cset.offset,)]
        interior = Euclidean(tuple((cset.offset - 1.0) * n for n in cset.normal))
        side = Euclidean(
            tuple(
                cset.offset * n + (0.7 if i == d - 1 and d > 1 else 0.0)
                for i, n in enumerate(cset.normal)
            )
        )
        return pts + [interior, project_convex(cset, side)]
    if isinstance(cset, Ball):
        return [cset.center]
    if isinstance(cset, Box):
        lo, hi = cset.lo, cset.hi
        corners = [Euclidean(lo), Euclidean(hi)]
        corners.append(Euclidean(tuple(0.5 * (l + h) for l, h in zip(lo, hi))))
        return corners
    if isinstance(cset, Segment):
        return [cset.a, cset.b, geodesic_point(cset.a, cset.b, 0.5)]
    if isinstance(cset, TripodSegment):
        return [TRIPOD_ORIGIN] + [
            Tripod(i, cset.max_coords[i]) for i in range(3) if cset.max_coords[i] > 0
        ]
    return []


def _sample_direction(space: str, dim: int, state: rng.RngState):
    if space == "euclidean":
        # Spherically symmetric direction from a Box-Muller pair per 2 dims.
        comps: list[float] = []
        while len(comps) < dim:
            u1, state = _draw(state)
            u2, state = _draw(state)
            r = math.sqrt(-2.0 * math.log(1.0 - u1))
            comps.append(r * math.cos(2.0 * math.pi * u2))
            comps.append(r * math.sin(2.0 * math.pi * u2))
        v = comps[:dim]
        nrm = math.sqrt(sum(c * c for c in v))
        if nrm == 0.0:
            v, nrm = [1.0] + [0.0] * (dim - 1), 1.0
        return EuclideanDir(tuple(c / nrm for c in v)), state
    if space == "tripod":
        u, state = _draw(state)
        return TripodEnd(int(u * 3.0) % 3), state
    u, state = _draw(state)
    if u < 0.25:
        return HalfPlaneIdealPoint(None), state
    v, state = _draw(state)
    return HalfPlaneIdealPoint(8.0 * v - 4.0), state


def geometry_suite(
    space: str,
    samples: int = 10_000,
    seed: int = 0,
    dim: int = 2,
    projection_samples: int = 1_000,
) -> dict:
    """Randomized certification of the metric geometry of one space.

    Checks metric axioms (symmetry, identity, triangle inequality), the
    geodesic parameter identity, the CN inequality, the weak quasi-triangle
    inequality for q in {1,2,3}, projection nonexpansiveness (plus the
    firmly-nonexpansive inner-product test in the Euclidean case) and ray
    additivity.  Returns a dict of maximal residuals and a ``pass`` flag
    (every residual <= GEOM_TOL).
    """
    state = rng.make_state(seed, 0)
    max_sym = 0.0
    max_self = 0.0
    max_tri = 0.0
    max_geo = 0.0
    max_cn = 0.0
    max_qt = 0.0
    for _ in range(samples):
        x, state = _sample_point(space, dim, state)
        y, state = _sample_point(space, dim, state)
        o, state = _sample_point(space, dim, state)
        t, state = _draw(state)
        dxy = distance(x, y)
        dxo = distance(x, o)
        dyo = distance(y, o)
        max_sym = max(max_sym, abs(dxy - distance(y, x)))
        max_self = max(max_self, distance(x, x))
        max_tri = max(max_tri, dxy - (dxo + dyo))
        g = geodesic_point(x, y, t)
        max_geo = max(
            max_geo,
            abs(distance(x, g) - t * dxy),
            abs(distance(g, y) - (1.0 - t) * dxy),
        )
        max_cn = max(max_cn, cn_residual(o, x, y, t))
        for q in (1.0, 2.0, 3.0):
            max_qt = max(
                max_qt,
                dxy ** q - 2.0 ** (q - 1.0) * (dxo ** q + dyo ** q),
            )

    max_proj = 0.0
    max_firm = 0.0
    sets = _suite_sets(space, dim)
    for _ in range(projection_samples):
        x, state = _sample_point(space, dim, state)
        y, state = _sample_point(space, dim, state)
        for cset in sets:
            px = project_convex(cset, x)
            py = project_convex(cset, y)
            max_proj = max(max_proj, distance(px, py) - distance(x, y))
            if space == "euclidean":
                for c in _set_samples(cset):
                    ip = sum(
                        (xc - pc) * (cc - pc)
                        for xc, pc, cc in zip(x.coords, px.coords, c.coords)
                    )
                    max_firm = max(max_firm, ip)

    max_ray = 0.0
    for _ in range(projection_samples):
        x, state = _sample_point(space, dim, state)
        direction, state = _sample_direction(space, dim, state)
        u1, state = _draw(state)
        u2, state = _draw(state)
        s1, s2 = 3.0 * u1, 3.0 * u2
        p1 = ray_point(x, direction, s1)
        p2 = ray_point(p1, direction, s2)
        p12 = ray_point(x, direction, s1 + s2)
        max_ray = max(max_ray, distance(p2, p12), abs(distance(x, p1) - s1))

    residuals = {
        "symmetry": max_sym,
        "identity": max_self,
        "triangle": max_tri,
        "geodesic_parameter": max_geo,
        "cn": max_cn,
        "quasi_triangle": max_qt,
        "projection_nonexpansive": max_proj,
        "projection_firm": max_firm,
        "ray_additivity": max_ray,
    }
    return {
        "space": space,
        "samples": samples,
        "tolerance": GEOM_TOL,
        "residuals": residuals,
        "pass": all(v <= GEOM_TOL for v in residuals.values()),
    }


# ---------------------------------------------------------------------------
# JSON serialization (experiment configs and reports)
# ---------------------------------------------------------------------------


def _finite_or_none(v: float) -> float | None:
    return None if math.isinf(v) else v


def _none_to_inf(v, sign: float) -> float:
    if v is None:
        return sign * math.inf
    return float(v)


def point_to_spec(p: Point) -> dict:
    if isinstance(p, Euclidean):
        return {"space": "euclidean", "coords": list(p.coords)}
    if isinstance(p, Tripod):
        return {"space": "tripod", "ray": p.ray, "coord": p.coord}
    return {"space": "halfplane", "x": p.x, "y": p.y}


def point_from_spec(spec: dict) -> Point:
    kind = spec.get("space")
    if kind == "euclidean":
        return Euclidean(tuple(float(c) for c in spec["coords"]))
    if kind == "tripod":
        return Tripod(int(spec["ray"]), float(spec["coord"]))
    if kind == "halfplane":
        return HalfPlane(float(spec["x"]), float(spec["y"]))
    raise ValueError(f"unknown point space: {kind!r}")


def convex_set_to_spec(cset: ConvexSet) -> dict:
    if isinstance(cset, WholeSpace):
        return {"kind": "whole_space"}
    if isinstance(cset, Ball):
        return {"kind": "ball", "center": point_to_spec(cset.center), "radius": cset.radius}
    if isinstance(cset, Halfspace):
        return {"kind": "halfspace", "normal": list(cset.normal), "offset": cset.offset}
    if isinstance(cset, Box):
        return {
            "kind": "box",
            "lo": [_finite_or_none(v) for v in cset.lo],
            "hi": [_finite_or_none(v) for v in cset.hi],
        }
    if isinstance(cset, TripodSegment):
        return {"kind": "tripod_segment", "max_coords": list(cset.max_coords)}
    return {"kind": "segment", "a": point_to_spec(cset.a), "b": point_to_spec(cset.b)}


def convex_set_from_spec(spec: dict) -> ConvexSet:
    kind = spec.get("kind")
    if kind == "whole_space":
        return WholeSpace()
    if kind == "ball":
        return Ball(point_from_spec(spec["center"]), float(spec["radius"]))
    if kind == "halfspace":
        return Halfspace(tuple(float(c) for c in spec["normal"]), float(spec["offset"]))
    if kind == "box":
        lo = tuple(_none_to_inf(v, -1.0) for v in spec["lo"])
        hi = tuple(_none_to_inf(v, 1.0) for v in spec["hi"])
        return Box(lo, hi)
    if kind == "tripod_segment":
        return TripodSegment(tuple(float(v) for v in spec["max_coords"]))
    if kind == "segment":
        return Segment(point_from_spec(spec["a"]), point_from_spec(spec["b"]))
    raise ValueError(f"unknown convex set kind: {kind!r}")
