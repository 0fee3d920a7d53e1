"""Concrete stochastic problem instances.

Three families are supported, each bundling a sampler over a finite index
set, per-sample data, an exact solution-set projector, Lipschitz data, and a
regularity-modulus provider:

* :class:`MeanMinProblem` — minimize the mean of per-atom costs (half squared
  distance, i.e. Frechet-mean / proximal instances, or plain distance, i.e.
  median instances);
* :class:`FixedPointProblem` — find a common fixed point of metric
  projections drawn at random (convex feasibility);
* :class:`BusemannProblem` — minimize a mean of distance costs over a
  constraint set by moving along geodesic rays toward ideal points.

All integrals are exact finite sums, so regularity validation carries no
Monte-Carlo error.  Solution sets are derived in closed form at
construction; instance shapes without a known closed form are rejected
rather than approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .moduli import Linear, Modulus, Power, pointwise_to_mean
from .spaces import (
    Ball,
    Box,
    ConvexSet,
    Direction,
    Euclidean,
    EuclideanDir,
    Halfspace,
    HalfPlane,
    HalfPlaneIdealPoint,
    Point,
    Segment,
    TRIPOD_ORIGIN,
    Tripod,
    TripodEnd,
    TripodSegment,
    contains,
    distance,
    geodesic_point,
    project_convex,
    space_of,
    sqdist,
)

HALF_SQUARED = "half_squared_distance"
DISTANCE = "distance"


class NoModulusKnownError(ValueError):
    """Raised when no regularity modulus is known for an instance shape.

    A guessed modulus would silently invalidate every certificate built on
    top of it, so unsupported shapes fail loudly instead.
    """


def _check_weights(weights: tuple[float, ...]) -> None:
    if not weights:
        raise ValueError("need at least one atom/operator")
    if any(w <= 0.0 for w in weights):
        raise ValueError("weights must be positive")
    total = math.fsum(weights)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {total}")


def _cum_weights(weights: tuple[float, ...]) -> np.ndarray:
    return np.cumsum(np.asarray(weights, dtype=np.float64))


# ---------------------------------------------------------------------------
# Problem types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeanMinProblem:
    """Minimize f_bar(x) = sum_i w_i f(i, x) over the whole space."""

    space: str
    atoms: tuple[tuple[Point, float], ...]
    cost_kind: str
    region_bound: float
    solution_set: ConvexSet
    solution_anchor: Point
    min_value: float = field(init=False)
    cum_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.cost_kind not in (HALF_SQUARED, DISTANCE):
            raise ValueError(f"unknown cost kind: {self.cost_kind!r}")
        if not self.region_bound > 0.0:
            raise ValueError("region bound must be > 0")
        _check_weights(tuple(w for _, w in self.atoms))
        for a, _ in self.atoms:
            if space_of(a) != self.space:
                raise ValueError("atom lies outside the declared space")
        object.__setattr__(self, "cum_weights", _cum_weights(tuple(w for _, w in self.atoms)))
        object.__setattr__(self, "min_value", mean_cost_exact(self, self.solution_anchor))

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.atoms)


@dataclass(frozen=True, eq=False)
class FixedPointProblem:
    """Find a common fixed point of the metric projections onto the sets."""

    space: str
    sets: tuple[ConvexSet, ...]
    weights: tuple[float, ...]
    v: float
    solution_set: ConvexSet
    solution_anchor: Point
    region_bound: float = math.inf
    cum_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        _check_weights(self.weights)
        if len(self.sets) != len(self.weights):
            raise ValueError("need one weight per operator")
        if not self.v >= 1.0:
            raise ValueError(f"linear-regularity constant must be >= 1, got {self.v}")
        if not contains(self.solution_set, self.solution_anchor):
            raise ValueError("anchor does not lie in the solution set")
        object.__setattr__(self, "cum_weights", _cum_weights(self.weights))


@dataclass(frozen=True, eq=False)
class BusemannProblem:
    """Minimize a mean of distance costs over a constraint set C by
    Busemann-subgradient steps (distance costs only)."""

    space: str
    atoms: tuple[tuple[Point, float], ...]
    constraint: ConvexSet
    lipschitz_cap: float
    region_bound: float
    solution_set: ConvexSet
    solution_anchor: Point
    min_value: float = field(init=False)
    cum_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.space not in ("euclidean", "tripod"):
            raise ValueError("Busemann instances support euclidean and tripod spaces")
        if not self.lipschitz_cap >= 1.0:
            raise ValueError("Lipschitz cap must be >= 1 (subgradients have s=1)")
        if not self.region_bound > 0.0:
            raise ValueError("region bound must be > 0")
        _check_weights(tuple(w for _, w in self.atoms))
        for a, _ in self.atoms:
            if space_of(a) != self.space:
                raise ValueError("atom lies outside the declared space")
        if not contains(self.constraint, self.solution_anchor):
            raise ValueError("solution anchor does not lie in the constraint set")
        object.__setattr__(self, "cum_weights", _cum_weights(tuple(w for _, w in self.atoms)))
        object.__setattr__(self, "min_value", mean_cost_exact(self, self.solution_anchor))

    @property
    def cost_kind(self) -> str:
        return DISTANCE

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.atoms)


Problem = MeanMinProblem | FixedPointProblem | BusemannProblem


# ---------------------------------------------------------------------------
# Solution-set derivation
# ---------------------------------------------------------------------------


def _euclid_mean_point(atoms: tuple[tuple[Point, float], ...]) -> Euclidean:
    dim = len(atoms[0][0].coords)
    coords = []
    for i in range(dim):
        coords.append(math.fsum(w * a.coords[i] for a, w in atoms))
    return Euclidean(tuple(coords))


def _tripod_frechet_point(atoms) -> Tripod:
    # On ray j at coordinate t the mean half-squared cost is
    # (t^2 + 2 t (M - 2 S_j) + sum w c^2) / 2 with S_j the weighted atom
    # coordinate mass on ray j and M the total; the candidate minimizer on
    # ray j is t_j = max(0, 2 S_j - M), positive for at most one ray.
    S = [0.0, 0.0, 0.0]
    for a, w in atoms:
        if a.coord > 0.0:
            S[a.ray] += w * a.coord
    M = math.fsum(S)
    best = TRIPOD_ORIGIN
    for j in range(3):
        t = 2.0 * S[j] - M
        if t > 0.0:
            best = Tripod(j, t)
    return best


def _derive_mean_min_solution(space, atoms, cost_kind):
    """Closed-form solution set (and designated anchor) for the supported
    mean-minimization shapes."""
    if len(atoms) == 1:
        anchor = atoms[0][0]
        return Ball(anchor, 0.0), anchor
    if cost_kind == HALF_SQUARED:
        if space == "euclidean":
            anchor = _euclid_mean_point(atoms)
            return Ball(anchor, 0.0), anchor
        if space == "tripod":
            anchor = _tripod_frechet_point(atoms)
            return Ball(anchor, 0.0), anchor
        raise ValueError(
            "no closed-form Frechet mean is available for several half-plane atoms"
        )
    # Distance costs.  A majority atom (weight > 1/2) is the weighted median
    # in any metric space: moving distance t away raises its term by w*t and
    # lowers the rest by at most (1-w)*t < w*t.  Otherwise the geometry is
    # only derived for the tripod with one atom per ray and every weight
    # below 1/2 (the median then sits at the branch point).
    heaviest = max(atoms, key=lambda aw: aw[1])
    if heaviest[1] > 0.5:
        return Ball(heaviest[0], 0.0), heaviest[0]
    if space == "tripod":
        rays = sorted(a.ray for a, _ in atoms if a.coord > 0.0)
        if len(atoms) == 3 and rays == [0, 1, 2] and max(w for _, w in atoms) < 0.5:
            return Ball(TRIPOD_ORIGIN, 0.0), TRIPOD_ORIGIN
    raise ValueError(
        "no closed-form median is available for this distance-cost instance"
    )


def build_mean_min(
    space: str,
    atoms: tuple[tuple[Point, float], ...],
    cost_kind: str,
    region_bound: float,
) -> MeanMinProblem:
    solution_set, anchor = _derive_mean_min_solution(space, tuple(atoms), cost_kind)
    return MeanMinProblem(space, tuple(atoms), cost_kind, region_bound, solution_set, anchor)


def _axis_normal_index(normal: tuple[float, ...]) -> tuple[int, float] | None:
    """(axis, sign) when the unit normal is +-e_i within 1e-12, else None."""
    idx = None
    for i, c in enumerate(normal):
        if abs(c) > 1e-12:
            if idx is not None:
                return None
            idx = i
    if idx is None:
        return None
    sign = 1.0 if normal[idx] > 0 else -1.0
    if abs(abs(normal[idx]) - 1.0) > 1e-12:
        return None
    return idx, sign


def _representative_point(cset: ConvexSet, space: str, dim: int) -> Point:
    if isinstance(cset, Ball):
        return cset.center
    if isinstance(cset, Box):
        return Euclidean(tuple(min(max(0.0, l), h) for l, h in zip(cset.lo, cset.hi)))
    if isinstance(cset, Halfspace):
        return Euclidean(tuple(cset.offset * n for n in cset.normal))
    if isinstance(cset, Segment):
        return geodesic_point(cset.a, cset.b, 0.5)
    if isinstance(cset, TripodSegment):
        return TRIPOD_ORIGIN
    # WholeSpace
    if space == "euclidean":
        return Euclidean((0.0,) * dim)
    if space == "tripod":
        return TRIPOD_ORIGIN
    return HalfPlane(0.0, 1.0)


def _derive_intersection(space: str, sets: tuple[ConvexSet, ...]):
    """Closed-form intersection for the supported operator families:
    a single set, or Euclidean axis-aligned halfspaces and boxes."""
    if len(sets) == 1:
        cset = sets[0]
        dim = len(cset.normal) if isinstance(cset, Halfspace) else 2
        return cset, _representative_point(cset, space, dim)
    if space != "euclidean":
        raise ValueError(
            "no closed-form intersection for several non-Euclidean operator sets"
        )
    dim = None
    for cset in sets:
        if isinstance(cset, Halfspace):
            d = len(cset.normal)
        elif isinstance(cset, Box):
            d = len(cset.lo)
        else:
            raise ValueError(
                "operator intersections are derived only for axis-aligned "
                "halfspaces and boxes"
            )
        if dim is None:
            dim = d
        elif dim != d:
            raise ValueError("operator sets have mismatched dimensions")
    lo = [-math.inf] * dim
    hi = [math.inf] * dim
    for cset in sets:
        if isinstance(cset, Box):
            for i in range(dim):
                lo[i] = max(lo[i], cset.lo[i])
                hi[i] = min(hi[i], cset.hi[i])
        else:
            axis = _axis_normal_index(cset.normal)
            if axis is None:
                raise ValueError(
                    "operator intersections are derived only for axis-aligned "
                    "halfspace normals"
                )
            i, sign = axis
            if sign > 0:
                hi[i] = min(hi[i], cset.offset)
            else:
                lo[i] = max(lo[i], -cset.offset)
    if any(l > h for l, h in zip(lo, hi)):
        raise ValueError("operator sets have empty intersection")
    box = Box(tuple(lo), tuple(hi))
    anchor = Euclidean(
        tuple(min(max(0.0, l), h) for l, h in zip(lo, hi))
    )
    return box, anchor


def build_fixed_point(
    space: str,
    sets: tuple[ConvexSet, ...],
    weights: tuple[float, ...],
    v: float,
) -> FixedPointProblem:
    solution_set, anchor = _derive_intersection(space, tuple(sets))
    return FixedPointProblem(space, tuple(sets), tuple(weights), v, solution_set, anchor)


def _derive_busemann_solution(space, atoms, constraint):
    """Closed-form constrained argmin for the supported Busemann shapes."""
    if len(atoms) == 1:
        anchor = atoms[0][0]
        if not contains(constraint, anchor):
            raise ValueError("single-atom argmin requires the atom inside C")
        return Ball(anchor, 0.0), anchor
    if len(atoms) == 2 and space == "euclidean":
        (a1, w1), (a2, w2) = atoms
        if abs(w1 - w2) <= 1e-12:
            if not (contains(constraint, a1) and contains(constraint, a2)):
                raise ValueError("segment argmin requires both atoms inside C")
            seg = Segment(a1, a2)
            return seg, geodesic_point(a1, a2, 0.5)
        heavy = a1 if w1 > w2 else a2
        if not contains(constraint, heavy):
            raise ValueError("two-atom argmin requires the heavier atom inside C")
        return Ball(heavy, 0.0), heavy
    if space == "tripod":
        rays = sorted(a.ray for a, _ in atoms if a.coord > 0.0)
        if len(atoms) == 3 and rays == [0, 1, 2] and max(w for _, w in atoms) < 0.5:
            if not contains(constraint, TRIPOD_ORIGIN):
                raise ValueError("median argmin requires the origin inside C")
            return Ball(TRIPOD_ORIGIN, 0.0), TRIPOD_ORIGIN
    raise ValueError("no closed-form constrained argmin for this atom layout")


def build_busemann(
    space: str,
    atoms: tuple[tuple[Point, float], ...],
    constraint: ConvexSet,
    lipschitz_cap: float,
    region_bound: float,
) -> BusemannProblem:
    solution_set, anchor = _derive_busemann_solution(space, tuple(atoms), constraint)
    return BusemannProblem(
        space, tuple(atoms), constraint, lipschitz_cap, region_bound, solution_set, anchor
    )


# ---------------------------------------------------------------------------
# Sampling and per-sample data
# ---------------------------------------------------------------------------


def sample_index(problem: Problem, state: rng.RngState) -> tuple[int, rng.RngState]:
    """Draw an atom/operator index with the problem's weights."""
    u, state = rng.next_uniform(state)
    return int(rng.categorical(problem.cum_weights, u)), state


def cost(problem, e: int, x: Point) -> float:
    """Per-sample cost f(e, x)."""
    a = problem.atoms[e][0]
    if problem.cost_kind == HALF_SQUARED:
        return 0.5 * sqdist(x, a)
    return distance(x, a)


def mean_cost_exact(problem, x: Point) -> float:
    """f_bar(x) = sum_i w_i f(i, x), an exact finite sum."""
    total = 0.0
    for a, w in problem.atoms:
        if problem.cost_kind == HALF_SQUARED:
            total += w * (0.5 * sqdist(x, a))
        else:
            total += w * distance(x, a)
    return total


def gap_F(problem: Problem, x: Point) -> float:
    """The optimality gap F(x): f_bar(x) - min f_bar for minimization
    instances, the mean squared displacement sum_i p_i d^2(T_i x, x) for
    fixed-point instances.  Zero exactly on the solution set."""
    if isinstance(problem, FixedPointProblem):
        total = 0.0
        for cset, p in zip(problem.sets, problem.weights):
            total += p * sqdist(project_convex(cset, x), x)
        return total
    return max(0.0, mean_cost_exact(problem, x) - problem.min_value)


def dist_to_solutions(problem: Problem, x: Point, q: int = 1) -> float:
    """d(x, solution set)^q for q in {1, 2}."""
    if q not in (1, 2):
        raise ValueError(f"distance power must be 1 or 2, got {q}")
    d = distance(x, project_convex(problem.solution_set, x))
    return d if q == 1 else d * d


def prox_step(problem: MeanMinProblem, e: int, lam: float, x: Point) -> Point:
    """Closed-form proximal point of f(e, .) with step lam at x."""
    if not lam > 0.0:
        raise ValueError(f"prox step must be > 0, got {lam}")
    a = problem.atoms[e][0]
    if problem.cost_kind == HALF_SQUARED:
        return geodesic_point(x, a, lam / (1.0 + lam))
    d = distance(x, a)
    if d == 0.0:
        return x
    t = min(lam, d) / d
    return geodesic_point(x, a, t)


def operator_apply(problem: FixedPointProblem, k: int, x: Point) -> Point:
    """T_k x, the metric projection onto the k-th set."""
    return project_convex(problem.sets[k], x)


# ---------------------------------------------------------------------------
# Busemann machinery
# ---------------------------------------------------------------------------


def busemann_subgradient(
    problem: BusemannProblem, e: int, x: Point
) -> tuple[Direction | None, float]:
    """Busemann subgradient of f(e, .) = d(., a_e) at x.

    For x != a_e the subgradient is the ideal point of the geodesic ray that
    starts at x, passes through a_e, and continues to infinity (the descent
    direction of the distance cost), with weight s = 1; at x = a_e the zero
    element (s = 0) is returned.
    """
    a = problem.atoms[e][0]
    d = distance(x, a)
    if d == 0.0:
        return None, 0.0
    if isinstance(x, Euclidean):
        u = tuple((ac - xc) / d for ac, xc in zip(a.coords, x.coords))
        return EuclideanDir(u), 1.0
    # Tripod: classify how the geodesic from x arrives at a and extend it.
    if a.coord == 0.0:
        # The ray descends x's ray through the origin; continue along the
        # lowest-index ray different from the arrival ray.
        return TripodEnd(min(j for j in range(3) if j != x.ray)), 1.0
    if x.coord == 0.0 or x.ray != a.ray or x.coord < a.coord:
        # Arrives climbing a's ray; the extension keeps climbing it.
        return TripodEnd(a.ray), 1.0
    # Same ray, from above: arrives descending, passes a, reaches the
    # origin and continues along the lowest-index other ray.
    return TripodEnd(min(j for j in range(3) if j != x.ray)), 1.0


def busemann_pairing(
    space: str, x: Point, direction: Direction | None, s: float, basepoint: Point
) -> float:
    """The cone pairing <x, [xi, s]> = s * b_xi(x), with the Busemann
    function b_xi normalized to vanish at the basepoint.  s = 0 denotes the
    zero cone element and pairs to 0 with everything."""
    if s < 0.0:
        raise ValueError(f"cone weight must be >= 0, got {s}")
    if s == 0.0:
        return 0.0
    if space == "euclidean":
        if not isinstance(direction, EuclideanDir):
            raise ValueError("euclidean pairing needs a EuclideanDir")
        b = sum((bc - xc) * u for bc, xc, u in zip(basepoint.coords, x.coords, direction.vector))
        return s * b
    if space == "tripod":
        if not isinstance(direction, TripodEnd):
            raise ValueError("tripod pairing needs a TripodEnd")

        def raw(y: Tripod) -> float:
            return -y.coord if y.ray == direction.ray else y.coord

        return s * (raw(x) - raw(basepoint))
    if space == "halfplane":
        if not isinstance(direction, HalfPlaneIdealPoint):
            raise ValueError("half-plane pairing needs a HalfPlaneIdealPoint")

        def busemann(y: HalfPlane) -> float:
            if direction.boundary_x is None:
                return -math.log(y.y)
            dxb = y.x - direction.boundary_x
            return math.log((dxb * dxb + y.y * y.y) / y.y)

        return s * (busemann(x) - busemann(basepoint))
    raise ValueError(f"unknown space kind: {space!r}")


# ---------------------------------------------------------------------------
# Regularity moduli
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaggedModulus:
    """A mean-valid regularity modulus together with the radius of the ball
    around the solution anchor on which it is valid (inf when global)."""

    modulus: Modulus
    region: float


def _tag(modulus: Modulus, region: float) -> TaggedModulus:
    return TaggedModulus(pointwise_to_mean(modulus), region)


def regularity_modulus_for(problem: Problem, q: int) -> TaggedModulus:
    """The exact regularity modulus tau of the instance for dist^q, q in
    {1,2}: a convex nondecreasing function with tau(dist^q(x)) <= F(x) on
    the tagged region, hence (by the Jensen lifting) a modulus in mean.

    Only catalogued instance shapes are supported; anything else raises
    NoModulusKnownError rather than guessing.
    """
    if q not in (1, 2):
        raise ValueError(f"distance power must be 1 or 2, got {q}")
    B = problem.region_bound
    if isinstance(problem, FixedPointProblem):
        # Linear regularity: dist^2 <= v * E[d^2(T_k x, x)] = v * F(x).
        if q == 2:
            return _tag(Linear(1.0 / problem.v), math.inf)
        return _tag(Power(1.0 / problem.v, 2.0), math.inf)
    if isinstance(problem, MeanMinProblem) and problem.cost_kind == HALF_SQUARED:
        if problem.space == "euclidean" or len(problem.atoms) == 1:
            # F(x) = dist^2 / 2 identically.
            if q == 2:
                return _tag(Linear(0.5), math.inf)
            return _tag(Power(0.5, 2.0), math.inf)
        # Strong convexity of the mean half-squared cost (parameter 1).
        if q == 2:
            return _tag(Linear(1.0 / 8.0), math.inf)
        return _tag(Power(1.0 / 8.0, 2.0), math.inf)
    # Distance costs (mean-min or Busemann).
    atoms = problem.atoms
    if len(atoms) == 1:
        # F(x) = dist(x, a) exactly.
        if q == 1:
            return _tag(Linear(1.0), math.inf)
        return _tag(Linear(1.0 / B), B)
    if problem.space == "tripod":
        rays = sorted(a.ray for a, _ in atoms if a.coord > 0.0)
        wmax = max(w for _, w in atoms)
        if len(atoms) == 3 and rays == [0, 1, 2] and wmax < 0.5:
            slope = 1.0 - 2.0 * wmax
            if q == 1:
                return _tag(Linear(slope), math.inf)
            return _tag(Linear(slope / B), B)
    if (
        isinstance(problem, BusemannProblem)
        and problem.space == "euclidean"
        and len(atoms) == 2
    ):
        (a1, w1), (a2, w2) = atoms
        if abs(w1 - w2) > 1e-12:
            # Weak sharp minimum at the heavier atom with slope |w1 - w2|.
            slope = abs(w1 - w2)
            if q == 1:
                return _tag(Linear(slope), math.inf)
            return _tag(Linear(slope / B), B)
    raise NoModulusKnownError(
        f"no regularity modulus is known for this instance shape "
        f"({type(problem).__name__}, space={problem.space!r}, "
        f"{len(getattr(problem, 'atoms', getattr(problem, 'sets', ())))} terms, q={q})"
    )


def linear_regularity_margin(problem: FixedPointProblem, points) -> float:
    """min over the points of v * F(x) - dist^2(x): nonnegative exactly when
    the declared linear-regularity constant v is valid on the sample."""
    margin = math.inf
    for x in points:
        margin = min(margin, problem.v * gap_F(problem, x) - dist_to_solutions(problem, x, 2))
    return margin


# ---------------------------------------------------------------------------
# Catalogue instances
# ---------------------------------------------------------------------------


def frechet_r1() -> MeanMinProblem:
    """Frechet mean of the two points +-1 on the line (half squared costs):
    minimizer 0, minimum value 1/2, F(t) = t^2 / 2."""
    atoms = ((Euclidean((-1.0,)), 0.5), (Euclidean((1.0,)), 0.5))
    return build_mean_min("euclidean", atoms, HALF_SQUARED, 4.0)


def tripod_median(region_bound: float = 2.0) -> MeanMinProblem:
    """Weighted median of one unit atom per tripod ray (equal weights):
    minimizer at the branch point, minimum value 1."""
    w = 1.0 / 3.0
    atoms = ((Tripod(0, 1.0), w), (Tripod(1, 1.0), w), (Tripod(2, 1.0), w))
    return build_mean_min("tripod", atoms, DISTANCE, region_bound)


def tripod_frechet() -> MeanMinProblem:
    """Frechet mean (half squared costs) of three tripod atoms with unequal
    weights; the minimizer sits strictly inside the heaviest ray."""
    atoms = ((Tripod(0, 2.0), 0.5), (Tripod(1, 1.0), 0.3), (Tripod(2, 1.0), 0.2))
    return build_mean_min("tripod", atoms, HALF_SQUARED, 4.0)


def halfplane_single_atom() -> MeanMinProblem:
    """Half squared distance to one hyperbolic atom (prox flows along the
    geodesic toward it)."""
    return build_mean_min("halfplane", ((HalfPlane(0.0, 1.0), 1.0),), HALF_SQUARED, 3.0)


def two_halfspace(v: float = 2.0) -> FixedPointProblem:
    """Common fixed points of the projections onto {x1 <= 0} and {x2 <= 0}
    in the plane (equal probabilities): the third quadrant, with exact
    linear-regularity constant v = 2."""
    sets = (Halfspace((1.0, 0.0), 0.0), Halfspace((0.0, 1.0), 0.0))
    return build_fixed_point("euclidean", sets, (0.5, 0.5), v)


def segment_argmin() -> BusemannProblem:
    """Mean distance to the two foci (+-1, 0) over the box [-2,2]^2: the
    argmin is the whole segment between the foci (minimum value 1)."""
    atoms = ((Euclidean((-1.0, 0.0)), 0.5), (Euclidean((1.0, 0.0)), 0.5))
    box = Box((-2.0, -2.0), (2.0, 2.0))
    return build_busemann("euclidean", atoms, box, 1.0, 4.0)


def r1_single_atom_busemann() -> BusemannProblem:
    """|x - 1| over C = [-2, 2] on the line."""
    atoms = ((Euclidean((1.0,)), 1.0),)
    return build_busemann("euclidean", atoms, Box((-2.0,), (2.0,)), 1.0, 3.0)


def euclid_two_atom_busemann() -> BusemannProblem:
    """Unequally weighted two-atom mean distance: a weak sharp minimum at
    the heavier atom."""
    atoms = ((Euclidean((-1.0, 0.0)), 0.7), (Euclidean((1.0, 0.0)), 0.3))
    box = Box((-3.0, -3.0), (3.0, 3.0))
    return build_busemann("euclidean", atoms, box, 1.0, 4.0)


def tripod_median_busemann(region_bound: float = 2.0) -> BusemannProblem:
    """The tripod median solved with Busemann subgradient steps, constrained
    to the subtree of radius 2."""
    w = 1.0 / 3.0
    atoms = ((Tripod(0, 1.0), w), (Tripod(1, 1.0), w), (Tripod(2, 1.0), w))
    cset = TripodSegment((2.0, 2.0, 2.0))
    return build_busemann("tripod", atoms, cset, 1.0, region_bound)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def problem_to_spec(problem: Problem) -> dict:
    from .spaces import convex_set_to_spec, point_to_spec

    if isinstance(problem, MeanMinProblem):
        return {
            "kind": "mean_min",
            "space": problem.space,
            "cost": problem.cost_kind,
            "atoms": [
                {"point": point_to_spec(a), "weight": w} for a, w in problem.atoms
            ],
            "region_bound": problem.region_bound,
        }
    if isinstance(problem, FixedPointProblem):
        return {
            "kind": "fixed_point",
            "space": problem.space,
            "operators": [
                {"set": convex_set_to_spec(c), "weight": w}
                for c, w in zip(problem.sets, problem.weights)
            ],
            "v": problem.v,
        }
    return {
        "kind": "busemann",
        "space": problem.space,
        "atoms": [{"point": point_to_spec(a), "weight": w} for a, w in problem.atoms],
        "constraint": convex_set_to_spec(problem.constraint),
        "lipschitz_cap": problem.lipschitz_cap,
        "region_bound": problem.region_bound,
    }


def problem_from_spec(spec: dict) -> Problem:
    from .spaces import convex_set_from_spec, point_from_spec

    kind = spec.get("kind")
    space = spec.get("space")
    if kind == "mean_min":
        atoms = tuple(
            (point_from_spec(a["point"]), float(a["weight"])) for a in spec["atoms"]
        )
        return build_mean_min(
            space, atoms, spec["cost"], float(spec.get("region_bound", 4.0))
        )
    if kind == "fixed_point":
        sets = tuple(convex_set_from_spec(o["set"]) for o in spec["operators"])
        weights = tuple(float(o["weight"]) for o in spec["operators"])
        return build_fixed_point(space, sets, weights, float(spec.get("v", 1.0)))
    if kind == "busemann":
        atoms = tuple(
            (point_from_spec(a["point"]), float(a["weight"])) for a in spec["atoms"]
        )
        return build_busemann(
            space,
            atoms,
            convex_set_from_spec(spec["constraint"]),
            float(spec.get("lipschitz_cap", 1.0)),
            float(spec.get("region_bound", 4.0)),
        )
    raise ValueError(f"unknown problem kind: {kind!r}")
