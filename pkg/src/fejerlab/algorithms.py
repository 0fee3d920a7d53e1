"""The three stochastic iterations and their explicit rate certificates.

Runners are deterministic given (problem, schedule, x0, horizon, seed,
path_index): each step consumes exactly one uniform draw from the path's
counter-based stream to select an atom/operator index, so trajectories are
bit-reproducible and independent paths never share randomness.

Certificate builders assemble, per algorithm, the printed rate function

* proximal (sppa):    rho(eps) = theta(chi(eps / 24 Lbar), (b + 4 L^2 T) / tau(eps/6))
* Krasnoselskii-Mann (skm):  rho(eps) = theta(0, b / tau(eps/6))
* Busemann subgradient (sb): rho(eps) = theta(chi(eps / 6 L^2), (b + L^2 T) / tau(eps/6))

with theta the divergence witness of the step schedule (under the step
transform the analysis uses), chi the squared-step tail witness, tau the
instance's mean regularity modulus for squared distances, b a strict upper
bound on max{d(x0,z), d^2(x0,z)}, and T a strict upper bound on the squared
step sum.  The tau-free liminf windows theta(N, budget/eps) are exposed
separately so gap-window audits work even when no modulus is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import rng
from .moduli import (
    Constant,
    FastCertificate,
    Harmonic,
    Power,
    RateCertificate,
    RootSchedule,
    StepSchedule,
    TableSchedule,
    _guarded_ceil,
    divergence_witness_theta,
    eval_modulus,
    recursion_bound_u,
    schedule_square_sum_bound,
    schedule_to_spec,
    schedule_value,
    tail_rate_chi,
)
from .problems import (
    HALF_SQUARED,
    BusemannProblem,
    FixedPointProblem,
    MeanMinProblem,
    Problem,
    busemann_subgradient,
    dist_to_solutions,
    operator_apply,
    prox_step,
    regularity_modulus_for,
    sample_index,
)
from .spaces import (
    Point,
    contains,
    distance,
    geodesic_point,
    project_convex,
    ray_point,
    space_of,
    sqdist,
)

_IDENTITY = "identity"
_MEAN = "mean_lambda_one_minus_lambda"


@dataclass
class Trajectory:
    """One realized sample path: points (length horizon+1), the drawn
    indices and the schedule values used (length horizon each)."""

    points: list
    indices: list[int]
    steps: list[float]
    seed: int
    path_index: int = 0


def _init_state(seed: int, path_index: int) -> rng.RngState:
    return rng.make_state(seed, path_index)


def _check_run_args(problem: Problem, x0: Point, horizon: int) -> None:
    if space_of(x0) != problem.space:
        raise ValueError(
            f"start point lies in {space_of(x0)!r}, problem in {problem.space!r}"
        )
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")


def run_sppa(
    problem: MeanMinProblem,
    sched: StepSchedule,
    x0: Point,
    horizon: int,
    seed: int,
    path_index: int = 0,
) -> Trajectory:
    """Stochastic proximal point: x_{n+1} = prox of the drawn cost at x_n.

    The schedule must be divergent with summable squares; only harmonic
    schedules are accepted (a constant schedule in particular is rejected).
    """
    if not isinstance(problem, MeanMinProblem):
        raise TypeError("the proximal iteration needs a mean-minimization problem")
    if not isinstance(sched, Harmonic):
        raise ValueError(
            "proximal steps need a divergent, square-summable schedule; "
            "use a harmonic schedule"
        )
    _check_run_args(problem, x0, horizon)
    state = _init_state(seed, path_index)
    x = x0
    points, indices, steps = [x0], [], []
    for n in range(horizon):
        e, state = sample_index(problem, state)
        lam = schedule_value(sched, n)
        x = prox_step(problem, e, lam, x)
        points.append(x)
        indices.append(e)
        steps.append(lam)
    return Trajectory(points, indices, steps, seed, path_index)


def _check_unit_steps(sched: StepSchedule) -> None:
    """Relaxation parameters must lie in (0, 1]."""
    if isinstance(sched, (Constant, RootSchedule)):
        return
    if isinstance(sched, Harmonic):
        if sched.a > sched.s:
            raise ValueError(
                f"harmonic schedule starts at {sched.a / sched.s} > 1; "
                "relaxation parameters must lie in (0, 1]"
            )
        return
    if isinstance(sched, TableSchedule):
        if any(v > 1.0 for v in sched.values):
            raise ValueError("table schedule exceeds 1; relaxations must lie in (0, 1]")
        if sched.tail.a > len(sched.values) + sched.tail.s:
            raise ValueError("table schedule tail exceeds 1 at its first index")
        return
    raise TypeError(f"not a schedule: {sched!r}")


def run_skm(
    problem: FixedPointProblem,
    sched: StepSchedule,
    x0: Point,
    horizon: int,
    seed: int,
    path_index: int = 0,
) -> Trajectory:
    """Randomized Krasnoselskii-Mann: move the fraction lambda_n along the
    geodesic from x_n to T x_n for a randomly drawn projection T."""
    if not isinstance(problem, FixedPointProblem):
        raise TypeError("the Krasnoselskii-Mann iteration needs a fixed-point problem")
    _check_unit_steps(sched)
    _check_run_args(problem, x0, horizon)
    state = _init_state(seed, path_index)
    x = x0
    points, indices, steps = [x0], [], []
    for n in range(horizon):
        k, state = sample_index(problem, state)
        lam = schedule_value(sched, n)
        x = geodesic_point(x, operator_apply(problem, k, x), lam)
        points.append(x)
        indices.append(k)
        steps.append(lam)
    return Trajectory(points, indices, steps, seed, path_index)


def run_sb(
    problem: BusemannProblem,
    sched: StepSchedule,
    x0: Point,
    horizon: int,
    seed: int,
    path_index: int = 0,
) -> Trajectory:
    """Projected Busemann subgradient: move s_n * t_n along the subgradient
    ray of the drawn cost, then project back onto the constraint set.  A
    zero subgradient (x at the drawn atom) leaves the point in place."""
    if not isinstance(problem, BusemannProblem):
        raise TypeError("the subgradient iteration needs a Busemann problem")
    if not isinstance(sched, Harmonic):
        raise ValueError(
            "subgradient steps need a divergent, square-summable schedule; "
            "use a harmonic schedule"
        )
    _check_run_args(problem, x0, horizon)
    if not contains(problem.constraint, x0):
        raise ValueError("start point must lie in the constraint set")
    state = _init_state(seed, path_index)
    x = x0
    points, indices, steps = [x0], [], []
    for n in range(horizon):
        e, state = sample_index(problem, state)
        t = schedule_value(sched, n)
        xi, s = busemann_subgradient(problem, e, x)
        y = x if s == 0.0 else ray_point(x, xi, s * t)
        x = project_convex(problem.constraint, y)
        points.append(x)
        indices.append(e)
        steps.append(t)
    return Trajectory(points, indices, steps, seed, path_index)


# ---------------------------------------------------------------------------
# Certificate ingredients
# ---------------------------------------------------------------------------


def fejer_budget(x0: Point, z: Point, cushion: float) -> float:
    """b = max{d(x0,z), d^2(x0,z)} + cushion, a strict upper bound on both
    the initial distance and squared distance to the solution z."""
    if not cushion > 0.0:
        raise ValueError(f"budget cushion must be > 0, got {cushion}")
    d = distance(x0, z)
    return max(d, d * d) + cushion


def _budget_witness(sched: StepSchedule, transform: str) -> Callable[[int, float], int]:
    """theta(k, budget): an index m >= k with sum_{n=k}^{m} w_n >= budget,
    where w_n is the schedule value (identity transform) or
    lambda_n(1-lambda_n) (mean transform).

    Constant schedules use the closed count form k + ceil(budget/w) (with
    the guarded ceiling, so budgets that are exact integer multiples of w
    are not bumped by float noise); other schedules return the minimal
    witness index.
    """
    if isinstance(sched, Constant):
        w = sched.c * (1.0 - sched.c) if transform == _MEAN else sched.c
        if not w > 0.0:
            raise ValueError(
                "transformed step weights vanish; the step series does not diverge"
            )

        def theta(k: int, budget: float) -> int:
            if k < 0:
                raise ValueError(f"start index must be >= 0, got {k}")
            if not budget > 0.0:
                raise ValueError(f"divergence budget must be > 0, got {budget}")
            return k + _guarded_ceil(budget / w)

        return theta

    def theta(k: int, budget: float) -> int:
        return divergence_witness_theta(sched, transform, k, budget)

    return theta


def _liminf_window(theta: Callable[[int, float], int], budget_scale: float):
    """phi(eps, N) = theta(N, budget_scale / eps): the right end of a window
    starting at N that must contain an iterate with mean gap below eps."""

    def phi(eps: float, N: int) -> int:
        if not eps > 0.0:
            raise ValueError(f"gap tolerance must be > 0, got {eps}")
        return theta(N, budget_scale / eps)

    return phi


def liminf_bound_sppa(sched: StepSchedule, b: float, L: float, T: float):
    """Window bound for the proximal iteration: theta(N, (b + 4 L^2 T)/eps)
    with the identity step transform."""
    theta = _budget_witness(sched, _IDENTITY)
    return _liminf_window(theta, b + 4.0 * L * L * T)


def liminf_bound_skm(sched: StepSchedule, b: float):
    """Window bound for the Krasnoselskii-Mann iteration: theta(N, b/eps)
    with the lambda(1-lambda) step transform."""
    theta = _budget_witness(sched, _MEAN)
    return _liminf_window(theta, b)


def liminf_bound_sb(sched: StepSchedule, b: float, L: float, T: float):
    """Window bound for the subgradient iteration: theta(N, (b + L^2 T)/eps)
    with the identity step transform."""
    theta = _budget_witness(sched, _IDENTITY)
    return _liminf_window(theta, b + L * L * T)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def certificate_sppa(
    problem: MeanMinProblem,
    sched: StepSchedule,
    x0: Point,
    z: Point | None = None,
    lam_cushion: float = 0.1,
) -> RateCertificate:
    """Rate certificate for the proximal iteration on this instance."""
    if not isinstance(problem, MeanMinProblem):
        raise TypeError("the proximal certificate needs a mean-minimization problem")
    if not isinstance(sched, Harmonic):
        raise ValueError(
            "proximal certificates need a divergent, square-summable schedule"
        )
    z = problem.solution_anchor if z is None else z
    if not contains(problem.solution_set, z):
        raise ValueError("reference point z must lie in the solution set")
    tau = regularity_modulus_for(problem, 2).modulus
    anchor = problem.solution_anchor
    if problem.cost_kind == HALF_SQUARED:
        # Local Lipschitz data of the half-squared costs on the ball of
        # radius B around the anchor: |grad| = d(., a_e) <= B + d(a_e, anchor).
        per_atom = [problem.region_bound + distance(a, anchor) for a, _ in problem.atoms]
        L = max(per_atom)
        L_bar = math.fsum(w * le * le for (_, w), le in zip(problem.atoms, per_atom))
    else:
        L = L_bar = 1.0
    T = schedule_square_sum_bound(sched)
    b = fejer_budget(x0, z, lam_cushion)
    budget_scale = b + 4.0 * L * L * T
    theta = _budget_witness(sched, _IDENTITY)

    def chi(eps: float) -> int:
        return tail_rate_chi(sched, "square", eps)

    def rho(eps: float) -> int:
        if not eps > 0.0:
            raise ValueError(f"rate argument must be > 0, got {eps}")
        return theta(chi(eps / (24.0 * L_bar)), budget_scale / eval_modulus(tau, eps / 6.0))

    return RateCertificate(
        algorithm="sppa",
        tau=tau,
        consistency=Power(1.0, 2.0),
        chi=chi,
        divergence=theta,
        K=1.0,
        b=b,
        L=L,
        L_bar=L_bar,
        T=T,
        rho=rho,
        liminf_bound=_liminf_window(theta, budget_scale),
        chi_spec={"kind": "squared_step_tail", "schedule": schedule_to_spec(sched)},
        divergence_spec={
            "kind": "windowed_step_sum",
            "transform": _IDENTITY,
            "budget_scale": budget_scale,
            "schedule": schedule_to_spec(sched),
        },
    )


def certificate_skm(
    problem: FixedPointProblem,
    sched: StepSchedule,
    x0: Point,
    z: Point | None = None,
    cushion: float = 0.5,
) -> RateCertificate:
    """Rate certificate for the Krasnoselskii-Mann iteration."""
    if not isinstance(problem, FixedPointProblem):
        raise TypeError("the Krasnoselskii-Mann certificate needs a fixed-point problem")
    _check_unit_steps(sched)
    z = problem.solution_anchor if z is None else z
    if not contains(problem.solution_set, z):
        raise ValueError("reference point z must lie in the solution set")
    tau = regularity_modulus_for(problem, 2).modulus
    b = fejer_budget(x0, z, cushion)
    theta = _budget_witness(sched, _MEAN)

    def chi(eps: float) -> int:
        if not eps > 0.0:
            raise ValueError(f"tail budget must be > 0, got {eps}")
        return 0

    def rho(eps: float) -> int:
        if not eps > 0.0:
            raise ValueError(f"rate argument must be > 0, got {eps}")
        return theta(0, b / eval_modulus(tau, eps / 6.0))

    return RateCertificate(
        algorithm="skm",
        tau=tau,
        consistency=Power(1.0, 2.0),
        chi=chi,
        divergence=theta,
        K=1.0,
        b=b,
        L=0.0,
        L_bar=0.0,
        T=0.0,
        rho=rho,
        liminf_bound=_liminf_window(theta, b),
        chi_spec={"kind": "zero"},
        divergence_spec={
            "kind": "windowed_step_sum",
            "transform": _MEAN,
            "budget_scale": b,
            "schedule": schedule_to_spec(sched),
        },
    )


def certificate_sb(
    problem: BusemannProblem,
    sched: StepSchedule,
    x0: Point,
    z: Point | None = None,
    cushion: float = 0.1,
) -> RateCertificate:
    """Rate certificate for the Busemann subgradient iteration."""
    if not isinstance(problem, BusemannProblem):
        raise TypeError("the subgradient certificate needs a Busemann problem")
    if not isinstance(sched, Harmonic):
        raise ValueError(
            "subgradient certificates need a divergent, square-summable schedule"
        )
    z = problem.solution_anchor if z is None else z
    if not contains(problem.solution_set, z):
        raise ValueError("reference point z must lie in the solution set")
    tau = regularity_modulus_for(problem, 2).modulus
    L = problem.lipschitz_cap
    T = schedule_square_sum_bound(sched)
    b = fejer_budget(x0, z, cushion)
    budget_scale = b + L * L * T
    theta = _budget_witness(sched, _IDENTITY)

    def chi(eps: float) -> int:
        return tail_rate_chi(sched, "square", eps)

    def rho(eps: float) -> int:
        if not eps > 0.0:
            raise ValueError(f"rate argument must be > 0, got {eps}")
        return theta(chi(eps / (6.0 * L * L)), budget_scale / eval_modulus(tau, eps / 6.0))

    return RateCertificate(
        algorithm="sb",
        tau=tau,
        consistency=Power(1.0, 2.0),
        chi=chi,
        divergence=theta,
        K=1.0,
        b=b,
        L=L,
        L_bar=L * L,
        T=T,
        rho=rho,
        liminf_bound=_liminf_window(theta, budget_scale),
        chi_spec={"kind": "squared_step_tail", "schedule": schedule_to_spec(sched)},
        divergence_spec={
            "kind": "windowed_step_sum",
            "transform": _IDENTITY,
            "budget_scale": budget_scale,
            "schedule": schedule_to_spec(sched),
        },
    )


def fast_certificate_skm(
    problem: FixedPointProblem, c: float, r: int, x0: Point
) -> tuple[FastCertificate, RootSchedule]:
    """Fast-rate parameters and the tailored schedule for a linearly regular
    fixed-point instance.

    With lambda_n(1-lambda_n) = v c / (n+r) the one-step contraction becomes
    E[dist^2(x_{n+1})] <= (1 - c/(n+r)) E[dist^2(x_n)], so the recursion
    bound yields E[dist^2(x_n)] <= u/(n+r) with u = r * dist^2(x_0).
    """
    if not isinstance(problem, FixedPointProblem):
        raise TypeError("the fast certificate needs a fixed-point problem")
    if not c > 1.0:
        raise ValueError(f"contraction parameter must be > 1, got {c}")
    if r < 1:
        raise ValueError(f"offset must be a positive integer, got {r}")
    q = problem.v * c
    if 4.0 * q > r:
        raise ValueError(
            f"infeasible parameters: need v*c <= r/4 so the relaxation "
            f"equation is solvable, got v*c={q}, r={r}"
        )
    sched = RootSchedule(q, r)
    L0 = dist_to_solutions(problem, x0, 2)
    u = recursion_bound_u(c, 0.0, r, L0)
    return FastCertificate(K=1.0, u=u, d=0.0, r=r), sched
