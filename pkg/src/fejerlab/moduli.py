"""The modulus calculus behind the convergence-rate certificates.

This module represents moduli — monotone functions (0, inf) -> (0, inf) used
for regularity (tau), consistency (theta), and probability weights (sigma) —
as symbolic values, so that convexity and monotonicity can be machine-checked
and certificates serialized.  On top of the moduli it provides the
step-schedule witnesses (the tail-rate chi and the divergence witness theta)
and the assembly of explicit iteration-index certificates for the stochastic
algorithms: the generic rho(eps) = liminf_bound(tau(eps/3K), chi(eps/3K))
assembly, the metric-rate quadruple, the Nemirovski-type recursion constant,
and the fast-rate mean/tail envelopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import mpmath
from scipy.special import digamma, polygamma

#: Tolerance for the second-difference convexity check on table moduli.
CONVEXITY_TOL = 1e-12

#: Relative shave applied before taking integer ceilings of analytically
#: computed indices, guarding against a 1-ulp float overshoot turning an
#: exact integer into the next one.
CEIL_GUARD = 5e-13

#: Above this many requested decimal digits the exact minimal divergence
#: witness is abandoned in favor of the sound analytic upper index.
_MAX_DPS = 1200


def _guarded_ceil(x: float) -> int:
    """Ceiling with a tiny relative shave (see CEIL_GUARD)."""
    return math.ceil(x * (1.0 - CEIL_GUARD))


# ---------------------------------------------------------------------------
# Moduli
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """eps -> c * eps."""

    c: float
    mean_valid: bool = False

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise ValueError(f"linear modulus needs c > 0, got {self.c}")


@dataclass(frozen=True)
class Power:
    """eps -> c * eps**p with p >= 1."""

    c: float
    p: float
    mean_valid: bool = False

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise ValueError(f"power modulus needs c > 0, got {self.c}")
        if not self.p >= 1.0:
            raise ValueError(f"power modulus needs p >= 1, got {self.p}")


@dataclass(frozen=True)
class Table:
    """Piecewise-linear modulus through sorted breakpoints (eps_i, v_i).

    Below the first breakpoint the value is held constant at v_0 (keeping
    the function positive and, for nondecreasing tables, convexity intact);
    beyond the last breakpoint the last chord slope is extended.
    """

    points: tuple[tuple[float, float], ...]
    mean_valid: bool = False

    def __post_init__(self) -> None:
        pts = tuple((float(e), float(v)) for e, v in self.points)
        if not pts:
            raise ValueError("table modulus needs at least one breakpoint")
        for (e1, v1), (e2, v2) in zip(pts, pts[1:]):
            if not e2 > e1:
                raise ValueError("table breakpoints must be strictly increasing")
            if v2 < v1:
                raise ValueError("table values must be nondecreasing")
        if any(v <= 0.0 for _, v in pts):
            raise ValueError("table values must be positive")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class Scaled:
    """eps -> factor * inner(eps)."""

    inner: "Modulus"
    factor: float
    mean_valid: bool = False

    def __post_init__(self) -> None:
        if not self.factor > 0.0:
            raise ValueError(f"scale factor must be > 0, got {self.factor}")


@dataclass(frozen=True)
class Min:
    """Pointwise minimum of several moduli."""

    members: tuple["Modulus", ...]
    mean_valid: bool = False

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("min modulus needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))


Modulus = Union[Linear, Power, Table, Scaled, Min]


def eval_modulus(m: Modulus, eps: float) -> float:
    """Evaluate the represented function at eps > 0."""
    if not eps > 0.0:
        raise ValueError(f"modulus argument must be > 0, got {eps}")
    if isinstance(m, Linear):
        return m.c * eps
    if isinstance(m, Power):
        return m.c * eps ** m.p
    if isinstance(m, Table):
        pts = m.points
        if eps <= pts[0][0]:
            return pts[0][1]
        for (e1, v1), (e2, v2) in zip(pts, pts[1:]):
            if eps <= e2:
                t = (eps - e1) / (e2 - e1)
                return v1 + t * (v2 - v1)
        if len(pts) == 1:
            return pts[0][1]
        (e1, v1), (e2, v2) = pts[-2], pts[-1]
        slope = (v2 - v1) / (e2 - e1)
        return v2 + slope * (eps - e2)
    if isinstance(m, Scaled):
        return m.factor * eval_modulus(m.inner, eps)
    if isinstance(m, Min):
        return min(eval_modulus(mm, eps) for mm in m.members)
    raise TypeError(f"not a modulus: {m!r}")


def _table_slopes(pts: tuple[tuple[float, float], ...]) -> list[float]:
    return [(v2 - v1) / (e2 - e1) for (e1, v1), (e2, v2) in zip(pts, pts[1:])]


def is_convex(m: Modulus) -> bool:
    """Whether the represented function is known to be convex on (0, inf).

    Linear and Power (p >= 1) are convex by construction; a Table is convex
    iff its chord slopes are nondecreasing (within CONVEXITY_TOL, the
    second-difference test); a Min is conservatively reported non-convex
    unless it has a single member.
    """
    if isinstance(m, (Linear, Power)):
        return True
    if isinstance(m, Table):
        slopes = _table_slopes(m.points)
        return all(s2 >= s1 - CONVEXITY_TOL for s1, s2 in zip(slopes, slopes[1:]))
    if isinstance(m, Scaled):
        return is_convex(m.inner)
    if isinstance(m, Min):
        return len(m.members) == 1 and is_convex(m.members[0])
    raise TypeError(f"not a modulus: {m!r}")


def convex_envelope(m: Table) -> Table:
    """Greatest convex minorant of a table modulus on its breakpoint grid
    (the lower convex hull of the breakpoints, re-sampled at the original
    abscissae)."""
    if not isinstance(m, Table):
        raise ValueError("convex_envelope expects a table modulus")
    pts = m.points
    for (_, v1), (_, v2) in zip(pts, pts[1:]):
        if not v2 > v1:
            raise ValueError("convex_envelope needs strictly increasing values")
    if len(pts) <= 2:
        return m
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            cross = (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox)
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(p)
    hull_mod = Table(tuple(hull))
    new_pts = tuple((e, eval_modulus(hull_mod, e)) for e, _ in pts)
    return Table(new_pts, mean_valid=m.mean_valid)


def pointwise_to_mean(tau: Modulus) -> Modulus:
    """Jensen lifting: a convex nondecreasing pointwise modulus is also a
    modulus in mean; returns tau unchanged but tagged mean-valid."""
    if not is_convex(tau):
        raise ValueError(
            "modulus is not convex, so the Jensen lifting to a modulus in "
            "mean does not apply; take its convex_envelope first"
        )
    return replace(tau, mean_valid=True)


def _constant_value(m: Modulus) -> float | None:
    """The constant c if m represents eps -> c, else None."""
    if isinstance(m, Table):
        vals = {v for _, v in m.points}
        if len(vals) == 1 and len(m.points) >= 1:
            # A single breakpoint, or equal values throughout, extends
            # constant below and (slope 0) above.
            if len(m.points) == 1 or _table_slopes(m.points)[-1] == 0.0:
                return m.points[0][1]
        return None
    if isinstance(m, Scaled):
        inner = _constant_value(m.inner)
        return None if inner is None else m.factor * inner
    if isinstance(m, Min):
        consts = [_constant_value(mm) for mm in m.members]
        if all(c is not None for c in consts):
            return min(consts)  # type: ignore[type-var]
        return None
    return None


def probabilistic_combine(sigma: Modulus, tau: Modulus) -> Modulus:
    """Pointwise product modulus (sigma * tau)(eps) = sigma(eps) * tau(eps),
    used to weight a regularity modulus by a probability modulus.

    The product is returned in closed form for the representable
    combinations (constant factors, products of linear/power shapes,
    distribution over scaling and pointwise minima); other combinations
    have no exact representative among the modulus variants and raise.
    """
    c_sigma = _constant_value(sigma)
    if c_sigma is not None:
        if c_sigma == 1.0:
            return tau
        return Scaled(tau, c_sigma, mean_valid=tau.mean_valid)
    c_tau = _constant_value(tau)
    if c_tau is not None:
        return Scaled(sigma, c_tau, mean_valid=tau.mean_valid)
    if isinstance(sigma, Scaled):
        inner = probabilistic_combine(sigma.inner, tau)
        return Scaled(inner, sigma.factor, mean_valid=tau.mean_valid)
    if isinstance(tau, Scaled):
        inner = probabilistic_combine(sigma, tau.inner)
        return Scaled(inner, tau.factor, mean_valid=tau.mean_valid)
    if isinstance(tau, Min):
        members = tuple(probabilistic_combine(sigma, mm) for mm in tau.members)
        return Min(members, mean_valid=tau.mean_valid)
    shapes = {}
    for name, m in (("sigma", sigma), ("tau", tau)):
        if isinstance(m, Linear):
            shapes[name] = (m.c, 1.0)
        elif isinstance(m, Power):
            shapes[name] = (m.c, m.p)
    if len(shapes) == 2:
        (c1, p1), (c2, p2) = shapes["sigma"], shapes["tau"]
        return Power(c1 * c2, p1 + p2, mean_valid=tau.mean_valid)
    raise ValueError(
        "pointwise product of these modulus shapes has no exact "
        "representation among the supported variants"
    )


def modulus_to_spec(m: Modulus) -> dict:
    """JSON-serializable description of a modulus."""
    if isinstance(m, Linear):
        return {"kind": "linear", "c": m.c, "mean_valid": m.mean_valid}
    if isinstance(m, Power):
        return {"kind": "power", "c": m.c, "p": m.p, "mean_valid": m.mean_valid}
    if isinstance(m, Table):
        return {
            "kind": "table",
            "points": [[e, v] for e, v in m.points],
            "mean_valid": m.mean_valid,
        }
    if isinstance(m, Scaled):
        return {
            "kind": "scaled",
            "factor": m.factor,
            "inner": modulus_to_spec(m.inner),
            "mean_valid": m.mean_valid,
        }
    if isinstance(m, Min):
        return {
            "kind": "min",
            "members": [modulus_to_spec(mm) for mm in m.members],
            "mean_valid": m.mean_valid,
        }
    raise TypeError(f"not a modulus: {m!r}")


def modulus_from_spec(spec: dict) -> Modulus:
    kind = spec.get("kind")
    mv = bool(spec.get("mean_valid", False))
    if kind == "linear":
        return Linear(float(spec["c"]), mean_valid=mv)
    if kind == "power":
        return Power(float(spec["c"]), float(spec["p"]), mean_valid=mv)
    if kind == "table":
        return Table(tuple((float(e), float(v)) for e, v in spec["points"]), mean_valid=mv)
    if kind == "scaled":
        return Scaled(modulus_from_spec(spec["inner"]), float(spec["factor"]), mean_valid=mv)
    if kind == "min":
        return Min(tuple(modulus_from_spec(s) for s in spec["members"]), mean_valid=mv)
    raise ValueError(f"unknown modulus kind: {kind!r}")


# ---------------------------------------------------------------------------
# Step schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Harmonic:
    """lambda_n = a / (n + s) with a > 0 and shift s >= 1."""

    a: float
    s: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise ValueError(f"harmonic schedule needs a > 0, got {self.a}")
        if not self.s >= 1.0:
            raise ValueError(f"harmonic schedule needs shift >= 1, got {self.s}")


@dataclass(frozen=True)
class Constant:
    """lambda_n = c with c in (0, 1]."""

    c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"constant schedule needs c in (0,1], got {self.c}")


@dataclass(frozen=True)
class TableSchedule:
    """Explicit leading values, then a harmonic tail (global index)."""

    values: tuple[float, ...]
    tail: Harmonic

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if any(v <= 0.0 for v in vals):
            raise ValueError("table schedule values must be positive")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class RootSchedule:
    """lambda_n = (1 - sqrt(1 - 4q/(n+r))) / 2, the smaller root of
    lambda(1-lambda) = q/(n+r); requires 4q <= r.  Used by the fast-rate
    construction, where the product lambda_n(1-lambda_n) must equal an exact
    harmonic sequence."""

    q: float
    r: int

    def __post_init__(self) -> None:
        if not self.q > 0.0:
            raise ValueError(f"root schedule needs q > 0, got {self.q}")
        if self.r < 1 or 4.0 * self.q > self.r:
            raise ValueError(
                f"root schedule needs 4q <= r for solvability, got q={self.q}, r={self.r}"
            )


StepSchedule = Union[Harmonic, Constant, TableSchedule, RootSchedule]


def schedule_value(sched: StepSchedule, n: int) -> float:
    """lambda_n of the schedule."""
    if n < 0:
        raise ValueError(f"schedule index must be >= 0, got {n}")
    if isinstance(sched, Harmonic):
        return sched.a / (n + sched.s)
    if isinstance(sched, Constant):
        return sched.c
    if isinstance(sched, TableSchedule):
        if n < len(sched.values):
            return sched.values[n]
        return sched.tail.a / (n + sched.tail.s)
    if isinstance(sched, RootSchedule):
        return 0.5 * (1.0 - math.sqrt(1.0 - 4.0 * sched.q / (n + sched.r)))
    raise TypeError(f"not a schedule: {sched!r}")


def schedule_to_spec(sched: StepSchedule) -> dict:
    if isinstance(sched, Harmonic):
        return {"kind": "harmonic", "a": sched.a, "s": sched.s}
    if isinstance(sched, Constant):
        return {"kind": "constant", "c": sched.c}
    if isinstance(sched, TableSchedule):
        return {
            "kind": "table",
            "values": list(sched.values),
            "tail": {"a": sched.tail.a, "s": sched.tail.s},
        }
    if isinstance(sched, RootSchedule):
        return {"kind": "root", "q": sched.q, "r": sched.r}
    raise TypeError(f"not a schedule: {sched!r}")


def schedule_from_spec(spec: dict) -> StepSchedule:
    kind = spec.get("kind")
    if kind == "harmonic":
        return Harmonic(float(spec["a"]), float(spec.get("s", 1.0)))
    if kind == "constant":
        return Constant(float(spec["c"]))
    if kind == "table":
        tail = spec["tail"]
        return TableSchedule(
            tuple(float(v) for v in spec["values"]),
            Harmonic(float(tail["a"]), float(tail.get("s", 1.0))),
        )
    if kind == "root":
        return RootSchedule(float(spec["q"]), int(spec["r"]))
    raise ValueError(f"unknown schedule kind: {kind!r}")


def schedule_square_sum_bound(sched: StepSchedule) -> float:
    """A strict upper bound T > sum_n lambda_n^2, rounded up to 3 decimals.

    The harmonic square sum is the trigamma value a^2 * psi_1(s) (exact up
    to float rounding); the returned T is the smallest 3-decimal number
    strictly above it.
    """
    if isinstance(sched, Harmonic):
        exact = sched.a * sched.a * float(polygamma(1, sched.s))
    elif isinstance(sched, TableSchedule):
        m = len(sched.values)
        tail = sched.tail.a ** 2 * float(polygamma(1, m + sched.tail.s))
        exact = math.fsum(v * v for v in sched.values) + tail
    else:
        raise ValueError("square sum diverges for this schedule")
    t = math.ceil(exact * 1000.0) / 1000.0
    if t <= exact:
        t += 0.001
    return t


# ---------------------------------------------------------------------------
# Tail-rate witness chi
# ---------------------------------------------------------------------------


def _transform_scale(transform) -> float:
    """Scale c of the square transform: 'square' -> 1, ('square_times', c)."""
    if transform == "square":
        return 1.0
    if (
        isinstance(transform, (tuple, list))
        and len(transform) == 2
        and transform[0] == "square_times"
    ):
        scale = float(transform[1])
        if not scale > 0.0:
            raise ValueError(f"square_times scale must be > 0, got {scale}")
        return scale
    raise ValueError(f"unknown tail transform: {transform!r}")


def tail_rate_chi(sched: StepSchedule, transform, eps: float) -> int:
    """Smallest N with sum_{n>=N} scale * lambda_n^2 < eps.

    The harmonic tail is the trigamma value scale * a^2 * psi_1(N+s); the
    minimal N is located by monotone bisection against that closed form.
    Constant schedules have a divergent square series and are rejected.
    """
    if not eps > 0.0:
        raise ValueError(f"tail budget must be > 0, got {eps}")
    scale = _transform_scale(transform)
    if isinstance(sched, (Constant, RootSchedule)):
        raise ValueError(
            "squared-step series is not summable for this schedule; "
            "no tail-rate witness exists"
        )
    if isinstance(sched, Harmonic):

        def tail(n: int) -> float:
            return scale * sched.a ** 2 * float(polygamma(1, n + sched.s))

    else:
        m = len(sched.values)
        a, s = sched.tail.a, sched.tail.s

        def tail(n: int) -> float:
            harm = scale * a * a * float(polygamma(1, max(n, m) + s))
            if n >= m:
                return harm
            return harm + math.fsum(scale * v * v for v in sched.values[n:m])

    if tail(0) < eps:
        return 0
    hi = 1
    while tail(hi) >= eps:
        hi *= 2
    lo = hi // 2  # tail(lo) >= eps
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Divergence witness theta
# ---------------------------------------------------------------------------

_IDENTITY = "identity"
_MEAN = "mean_lambda_one_minus_lambda"


def _check_divergent(sched: StepSchedule, transform: str) -> None:
    if transform not in (_IDENTITY, _MEAN):
        raise ValueError(f"unknown divergence transform: {transform!r}")
    if isinstance(sched, RootSchedule):
        raise ValueError("divergence witnesses are not provided for root schedules")
    if transform == _MEAN:
        if isinstance(sched, Constant) and sched.c == 1.0:
            raise ValueError(
                "lambda(1-lambda) vanishes for the constant-1 schedule; "
                "the transformed series does not diverge"
            )
        if isinstance(sched, TableSchedule) and any(v > 1.0 for v in sched.values):
            raise ValueError(
                "table schedule exceeds 1; lambda(1-lambda) terms would be "
                "negative"
            )
        tail = sched if not isinstance(sched, TableSchedule) else sched.tail
        if isinstance(tail, Harmonic) and tail.a > tail.s:
            raise ValueError(
                "harmonic schedule exceeds 1 at the start; the "
                "lambda(1-lambda) series is not monotone-sum certified"
            )


def _harmonic_partial(a: float, s: float, k: int, m: int, mean: bool) -> float:
    """sum_{n=k}^{m} of a/(n+s), optionally minus a^2/(n+s)^2 (the
    lambda(1-lambda) transform), via digamma/trigamma closed forms."""
    if m < k:
        return 0.0
    val = a * (float(digamma(m + s + 1)) - float(digamma(k + s)))
    if mean:
        val -= a * a * (float(polygamma(1, k + s)) - float(polygamma(1, m + s + 1)))
    return val


def _harmonic_partial_mp(a: float, s: float, k: int, m: int, mean: bool):
    if m < k:
        return mpmath.mpf(0)
    val = a * (mpmath.digamma(m + s + 1) - mpmath.digamma(k + s))
    if mean:
        val -= a * a * (
            mpmath.polygamma(1, k + s) - mpmath.polygamma(1, m + s + 1)
        )
    return val


def divergence_witness_theta(
    sched: StepSchedule, transform: str, k: int, b: float
) -> int:
    """Smallest m >= k with sum_{n=k}^{m} transformed(lambda_n) >= b.

    Constant schedules use the closed form; harmonic schedules locate the
    minimal index by bisection against digamma partial sums, switching to
    arbitrary-precision evaluation when the witness is too large for float
    resolution.  For witnesses beyond ~10^520 the sound analytic upper
    index ceil((k+s) e^{b/a} - s - 1) (from the integral lower bound on the
    partial sum) is returned instead of the exact minimum.
    """
    if k < 0:
        raise ValueError(f"start index must be >= 0, got {k}")
    if not b > 0.0:
        raise ValueError(f"divergence budget must be > 0, got {b}")
    _check_divergent(sched, transform)
    mean = transform == _MEAN

    if isinstance(sched, Constant):
        w = sched.c * (1.0 - sched.c) if mean else sched.c
        return k + math.ceil(b / w) - 1

    if isinstance(sched, TableSchedule):
        tbl = sched.values
        acc = 0.0
        for m in range(k, len(tbl)):
            lam = tbl[m]
            acc += lam * (1.0 - lam) if mean else lam
            if acc >= b:
                return m
        return _harmonic_theta(sched.tail, mean, max(k, len(tbl)), b - acc)

    return _harmonic_theta(sched, mean, k, b)


def _harmonic_theta(sched: Harmonic, mean: bool, k: int, b: float) -> int:
    a, s = sched.a, sched.s
    budget_id = b
    if mean:
        budget_id = b + a * a * float(polygamma(1, k + s))
    log_hi = budget_id / a + math.log(k + s)
    if log_hi < 27.0:  # witness below ~5e11: float digamma resolves it
        hi = int(math.ceil((k + s) * math.exp(budget_id / a))) + 2
        while _harmonic_partial(a, s, k, hi, mean) < b:
            hi *= 2
        lo = k - 1  # partial(k-1) = 0 < b
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _harmonic_partial(a, s, k, mid, mean) >= b:
                hi = mid
            else:
                lo = mid
        return hi
    dps = 40 + int(0.44 * budget_id / a)
    if dps > _MAX_DPS:
        # Integral bound: sum_{n=k}^{m} a/(n+s) >= a ln((m+s+1)/(k+s)), so
        # any m >= (k+s) e^{budget/a} - s - 1 certifies the budget.
        with mpmath.workdps(60):
            hi = int(
                mpmath.ceil(
                    (k + s) * mpmath.e ** (mpmath.mpf(budget_id) / a) - s - 1
                )
            )
            return max(hi, k)
    with mpmath.workdps(dps):
        hi = int(mpmath.ceil((k + s) * mpmath.e ** (mpmath.mpf(budget_id) / a))) + 2
        while _harmonic_partial_mp(a, s, k, hi, mean) < b:
            hi *= 2
        lo = k - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _harmonic_partial_mp(a, s, k, mid, mean) >= b:
                hi = mid
            else:
                lo = mid
        return hi


def divergence_witness_magnitude(
    sched: StepSchedule, transform: str, k: int, b: float
) -> float:
    """log10 estimate of divergence_witness_theta, cheap for any budget."""
    _check_divergent(sched, transform)
    mean = transform == _MEAN
    if isinstance(sched, Constant):
        w = sched.c * (1.0 - sched.c) if mean else sched.c
        return math.log10(max(k + b / w, 1.0))
    tail = sched.tail if isinstance(sched, TableSchedule) else sched
    a, s = tail.a, tail.s
    budget = b
    if mean:
        budget = b + a * a * float(polygamma(1, k + s))
    return (budget / a) * math.log10(math.e) + math.log10(k + s)


# ---------------------------------------------------------------------------
# Rate assembly
# ---------------------------------------------------------------------------


def assemble_rho(
    liminf_bound: Callable[[float, int], int],
    tau: Modulus,
    chi: Callable[[float], int],
    K: float,
    eps: float,
) -> int:
    """Generic certificate assembly rho(eps) = liminf_bound(tau(eps/3K),
    chi(eps/3K))."""
    if not K >= 1.0:
        raise ValueError(f"uniform bound K must be >= 1, got {K}")
    if not eps > 0.0:
        raise ValueError(f"certificate argument must be > 0, got {eps}")
    e3 = eps / (3.0 * K)
    return liminf_bound(eval_modulus(tau, e3), chi(e3))


def metric_rates(
    rho: Callable[[float], int],
    consistency: Modulus,
    eps: float,
    lam: float,
) -> tuple[int, int, int, int]:
    """The four metric iteration indices derived from a certificate rho and
    a consistency modulus theta: (rho(theta(eps/2)), rho(lam*theta(eps/2)),
    rho(theta(eps)), rho(lam*theta(eps))).

    The first pair serves the mean/almost-sure statements about the distance
    to the limit; the second pair the corresponding statements about the
    distance to the solution set.
    """
    if not eps > 0.0:
        raise ValueError(f"metric tolerance must be > 0, got {eps}")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"confidence level must be in (0,1], got {lam}")
    th_half = eval_modulus(consistency, eps / 2.0)
    th_full = eval_modulus(consistency, eps)
    return (
        rho(th_half),
        rho(lam * th_half),
        rho(th_full),
        rho(lam * th_full),
    )


def recursion_bound_u(c: float, d: float, r: int, x0: float) -> float:
    """The constant u = max{d/(c-1), r*x0} for which the recursion
    x_{n+1} <= (1 - c/(n+r)) x_n + d/(n+r)^2 implies x_n <= u/(n+r)."""
    if not c > 1.0:
        raise ValueError(f"recursion constant needs c > 1, got {c}")
    if d < 0.0:
        raise ValueError(f"recursion offset must be >= 0, got {d}")
    if r < 1:
        raise ValueError(f"recursion shift must be >= 1, got {r}")
    if x0 < 0.0:
        raise ValueError(f"recursion start must be >= 0, got {x0}")
    return max(d / (c - 1.0), r * x0)


@dataclass(frozen=True)
class FastCertificate:
    """Fast-rate parameters: E[dist_sq] <= u/(n+r) and the tail envelope
    K(u+2d)/(eps (n+r))."""

    K: float
    u: float
    d: float
    r: int

    def __post_init__(self) -> None:
        if not self.K >= 1.0:
            raise ValueError(f"fast certificate needs K >= 1, got {self.K}")
        if self.u < 0.0 or self.d < 0.0 or self.r < 1:
            raise ValueError("fast certificate needs u, d >= 0 and r >= 1")


def fast_bounds(cert: FastCertificate, n: int, eps: float) -> tuple[float, float]:
    """(mean bound u/(n+r), tail bound min(1, K(u+2d)/(eps(n+r))))."""
    if not eps > 0.0:
        raise ValueError(f"tail threshold must be > 0, got {eps}")
    if n < 0:
        raise ValueError(f"iteration index must be >= 0, got {n}")
    denom = n + cert.r
    mean = cert.u / denom
    tail = min(1.0, cert.K * (cert.u + 2.0 * cert.d) / (eps * denom))
    return mean, tail


# ---------------------------------------------------------------------------
# Rate certificates
# ---------------------------------------------------------------------------


@dataclass
class RateCertificate:
    """The ingredient tuple of an explicit convergence-rate certificate,
    plus the assembled index functions.

    ``rho`` maps a gap tolerance to an iteration index; ``liminf_bound``
    maps (gap tolerance, start index) to the right end of a window that
    must contain an iterate with mean gap below the tolerance.
    """

    algorithm: str
    tau: Modulus
    consistency: Modulus
    chi: Callable[[float], int]
    divergence: Callable[[int, float], int]
    K: float
    b: float
    L: float
    L_bar: float
    T: float
    rho: Callable[[float], int]
    liminf_bound: Callable[[float, int], int]
    chi_spec: dict = field(default_factory=dict)
    divergence_spec: dict = field(default_factory=dict)

    def metric_rates(self, eps: float, lam: float) -> tuple[int, int, int, int]:
        return metric_rates(self.rho, self.consistency, eps, lam)

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "tau": modulus_to_spec(self.tau),
            "consistency": modulus_to_spec(self.consistency),
            "chi": self.chi_spec,
            "divergence": self.divergence_spec,
            "K": self.K,
            "b": self.b,
            "L": self.L,
            "L_bar": self.L_bar,
            "T": self.T,
        }
