"""Deterministic Monte-Carlo ensembles and certificate audits.

The ensemble runner evaluates many independent trajectories of one
algorithm and aggregates, per iteration index, the distance to the solution
set, its square, the optimality gap, and exceedance tails.  Determinism is
absolute: path p always draws from counter-based stream p, paths are
processed in fixed chunks of ``CHUNK``, per-chunk reductions are fixed
numpy operations, and chunk results are folded in ascending chunk order
after all workers finish — so the aggregate is bit-identical no matter how
many threads run, and bit-identical across runs.

For Euclidean instances a vectorized kernel advances a whole chunk at once;
it mirrors the scalar runners operation for operation (same per-coordinate
accumulation order, same branch shortcuts), so a chunk computed vectorized
equals the same chunk computed from scalar trajectories bit for bit.  The
tree and half-plane spaces use the scalar runners directly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .algorithms import _check_unit_steps, run_sb, run_skm, run_sppa
from .moduli import (
    FastCertificate,
    Harmonic,
    RateCertificate,
    StepSchedule,
    fast_bounds,
    schedule_value,
)
from .problems import (
    HALF_SQUARED,
    BusemannProblem,
    FixedPointProblem,
    MeanMinProblem,
    Problem,
    busemann_subgradient,
    dist_to_solutions,
    gap_F,
    mean_cost_exact,
    operator_apply,
    prox_step,
)
from .spaces import (
    Ball,
    Box,
    Euclidean,
    Halfspace,
    Point,
    Segment,
    WholeSpace,
    contains,
    distance,
    geodesic_point,
    project_convex,
    ray_point,
    space_of,
    sqdist,
)

CHUNK = 512

_RUNNERS = {"sppa": run_sppa, "skm": run_skm, "sb": run_sb}


# ---------------------------------------------------------------------------
# Ensemble statistics
# ---------------------------------------------------------------------------


@dataclass
class EnsembleStats:
    """Per-iteration ensemble aggregates over all paths.

    ``tail[eps][n]`` is the fraction of paths with sup_{m >= n} dist_m >=
    eps (the running-supremum tail, truncated at the horizon), while
    ``point_tail[eps][n]`` is the fraction with dist_n >= eps.
    """

    algorithm: str
    space: str
    paths: int
    horizon: int
    seed: int
    epsilons: tuple[float, ...]
    mean_dist: np.ndarray
    mean_sq_dist: np.ndarray
    mean_gap: np.ndarray
    std_dist: np.ndarray
    std_sq_dist: np.ndarray
    std_gap: np.ndarray
    tail: dict[float, np.ndarray] = field(default_factory=dict)
    point_tail: dict[float, np.ndarray] = field(default_factory=dict)

    def stderr_dist(self) -> np.ndarray:
        return self.std_dist / math.sqrt(self.paths)

    def stderr_sq_dist(self) -> np.ndarray:
        return self.std_sq_dist / math.sqrt(self.paths)

    def stderr_gap(self) -> np.ndarray:
        return self.std_gap / math.sqrt(self.paths)


def tail_probability(stats: EnsembleStats, n: int, eps: float) -> float:
    """P(sup_{m >= n} dist_m >= eps), estimated over the ensemble (tail
    truncated at the horizon)."""
    if not 0 <= n <= stats.horizon:
        raise ValueError(f"index must lie in [0, {stats.horizon}], got {n}")
    if eps <= 0.0:
        return 1.0  # distances are nonnegative, so the sup always clears 0
    if eps not in stats.tail:
        raise ValueError(
            f"ensemble was not run with threshold {eps!r}; have {sorted(stats.tail)}"
        )
    return float(stats.tail[eps][n])


# ---------------------------------------------------------------------------
# Vectorized Euclidean geometry (mirrors the scalar kernels bit for bit)
# ---------------------------------------------------------------------------


def _rows_sqdist_to(X: np.ndarray, coords) -> np.ndarray:
    """Row-wise squared distance to a fixed point, accumulated coordinate by
    coordinate in the same order as the scalar loop."""
    acc = np.zeros(len(X))
    for i, c in enumerate(coords):
        diff = X[:, i] - c
        acc += diff * diff
    return acc


def _rows_sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    acc = np.zeros(len(A))
    for i in range(A.shape[1]):
        diff = A[:, i] - B[:, i]
        acc += diff * diff
    return acc


def _vproject(cset, X: np.ndarray) -> np.ndarray:
    """Vectorized metric projection for Euclidean convex sets."""
    if isinstance(cset, WholeSpace):
        return X
    if isinstance(cset, Ball):
        c = cset.center.coords
        d = np.sqrt(_rows_sqdist_to(X, c))
        inside = d <= cset.radius
        t = cset.radius / np.where(inside, 1.0, d)
        C = np.array(c)
        P = C + t[:, None] * (X - C)
        # Rounding can push radius/d to exactly 1 for d barely outside; the
        # scalar geodesic shortcut then returns x itself, so mirror that.
        P = np.where((t == 1.0)[:, None], X, P)
        return np.where(inside[:, None], X, P)
    if isinstance(cset, Halfspace):
        v = np.zeros(len(X))
        for i, nc in enumerate(cset.normal):
            v += nc * X[:, i]
        v -= cset.offset
        inside = v <= 0.0
        P = X - v[:, None] * np.array(cset.normal)
        return np.where(inside[:, None], X, P)
    if isinstance(cset, Box):
        return np.minimum(np.maximum(X, np.array(cset.lo)), np.array(cset.hi))
    if isinstance(cset, Segment):
        a, b = cset.a.coords, cset.b.coords
        num = np.zeros(len(X))
        den = 0.0
        for i in range(len(a)):
            ab = b[i] - a[i]
            num += (X[:, i] - a[i]) * ab
            den += ab * ab
        if den == 0.0:
            return np.tile(np.array(a), (len(X), 1))
        t = num / den
        t = np.minimum(np.maximum(t, 0.0), 1.0)
        cols = [a[i] + t * (b[i] - a[i]) for i in range(len(a))]
        return np.stack(cols, axis=1)
    raise ValueError(f"no vectorized projection for {type(cset).__name__}")


def _rows_dist_to_solutions(problem: Problem, X: np.ndarray) -> np.ndarray:
    P = _vproject(problem.solution_set, X)
    return np.sqrt(_rows_sqdist(X, P))


def _rows_gap(problem: Problem, X: np.ndarray) -> np.ndarray:
    if isinstance(problem, FixedPointProblem):
        total = np.zeros(len(X))
        for cset, p in zip(problem.sets, problem.weights):
            total += p * _rows_sqdist(_vproject(cset, X), X)
        return total
    total = np.zeros(len(X))
    for a, w in problem.atoms:
        acc = _rows_sqdist_to(X, a.coords)
        if problem.cost_kind == HALF_SQUARED:
            total += w * (0.5 * acc)
        else:
            total += w * np.sqrt(acc)
    return np.maximum(0.0, total - problem.min_value)


# ---------------------------------------------------------------------------
# Chunk kernels
# ---------------------------------------------------------------------------


def _reduce_chunk(dist: np.ndarray, gap: np.ndarray, epsilons) -> dict:
    sq = dist * dist
    sup = np.maximum.accumulate(dist[:, ::-1], axis=1)[:, ::-1]
    return {
        "sd": dist.sum(axis=0),
        "sd2": sq.sum(axis=0),
        "sd4": (sq * sq).sum(axis=0),
        "sg": gap.sum(axis=0),
        "sg2": (gap * gap).sum(axis=0),
        "tail": (
            np.stack([(sup >= e).sum(axis=0) for e in epsilons])
            if epsilons
            else np.zeros((0, dist.shape[1]))
        ),
        "point": (
            np.stack([(dist >= e).sum(axis=0) for e in epsilons])
            if epsilons
            else np.zeros((0, dist.shape[1]))
        ),
    }


def _euclid_chunk(
    problem: Problem,
    algorithm: str,
    sched: StepSchedule,
    x0: Euclidean,
    horizon: int,
    seed: int,
    start: int,
    stop: int,
    epsilons,
) -> dict:
    m = stop - start
    keys = rng.stream_keys(seed, np.arange(start, stop))
    X = np.tile(np.array(x0.coords, dtype=np.float64), (m, 1))
    dist = np.empty((m, horizon + 1))
    gap = np.empty((m, horizon + 1))
    dist[:, 0] = _rows_dist_to_solutions(problem, X)
    gap[:, 0] = _rows_gap(problem, X)

    if algorithm in ("sppa", "sb"):
        atom_coords = np.array([a.coords for a, _ in problem.atoms], dtype=np.float64)

    for n in range(horizon):
        u = rng.uniforms(keys, n)
        idx = rng.categorical(problem.cum_weights, u)
        lam = schedule_value(sched, n)
        if algorithm == "sppa":
            A = atom_coords[idx]
            if problem.cost_kind == HALF_SQUARED:
                t = lam / (1.0 + lam)
                X = X + t * (A - X)
            else:
                d = np.sqrt(_rows_sqdist(X, A))
                at_atom = d == 0.0
                t = np.minimum(lam, d) / np.where(at_atom, 1.0, d)
                Xn = X + t[:, None] * (A - X)
                Xn = np.where((t == 1.0)[:, None], A, Xn)
                X = np.where(at_atom[:, None], X, Xn)
        elif algorithm == "skm":
            P = np.empty_like(X)
            for j, cset in enumerate(problem.sets):
                rows = idx == j
                if np.any(rows):
                    P[rows] = _vproject(cset, X[rows])
            X = P if lam == 1.0 else X + lam * (P - X)
        else:  # sb
            A = atom_coords[idx]
            diff = A - X
            d = np.sqrt(_rows_sqdist(A, X))
            at_atom = d == 0.0
            U = diff / np.where(at_atom, 1.0, d)[:, None]
            Y = X + (1.0 * lam) * U
            Y = np.where(at_atom[:, None], X, Y)
            X = _vproject(problem.constraint, Y)
        dist[:, n + 1] = _rows_dist_to_solutions(problem, X)
        gap[:, n + 1] = _rows_gap(problem, X)

    return _reduce_chunk(dist, gap, epsilons)


def _scalar_chunk(
    problem: Problem,
    algorithm: str,
    sched: StepSchedule,
    x0: Point,
    horizon: int,
    seed: int,
    start: int,
    stop: int,
    epsilons,
) -> dict:
    run = _RUNNERS[algorithm]
    m = stop - start
    dist = np.empty((m, horizon + 1))
    gap = np.empty((m, horizon + 1))
    for i in range(m):
        traj = run(problem, sched, x0, horizon, seed, path_index=start + i)
        for n, pt in enumerate(traj.points):
            dist[i, n] = dist_to_solutions(problem, pt, 1)
            gap[i, n] = gap_F(problem, pt)
    return _reduce_chunk(dist, gap, epsilons)


def _validate_run(problem: Problem, algorithm: str, sched, x0: Point) -> None:
    if algorithm not in _RUNNERS:
        raise ValueError(f"unknown algorithm: {algorithm!r}")
    if space_of(x0) != problem.space:
        raise ValueError(
            f"start point lies in {space_of(x0)!r}, problem in {problem.space!r}"
        )
    if algorithm == "sppa":
        if not isinstance(problem, MeanMinProblem):
            raise TypeError("the proximal iteration needs a mean-minimization problem")
        if not isinstance(sched, Harmonic):
            raise ValueError("proximal steps need a harmonic schedule")
    elif algorithm == "skm":
        if not isinstance(problem, FixedPointProblem):
            raise TypeError("the Krasnoselskii-Mann iteration needs a fixed-point problem")
        _check_unit_steps(sched)
    else:
        if not isinstance(problem, BusemannProblem):
            raise TypeError("the subgradient iteration needs a Busemann problem")
        if not isinstance(sched, Harmonic):
            raise ValueError("subgradient steps need a harmonic schedule")
        if not contains(problem.constraint, x0):
            raise ValueError("start point must lie in the constraint set")


def run_ensemble(
    problem: Problem,
    algorithm: str,
    sched: StepSchedule,
    x0: Point,
    paths: int,
    horizon: int,
    seed: int,
    epsilons,
    threads: int = 1,
    kernel: str = "auto",
) -> EnsembleStats:
    """Run `paths` independent trajectories and aggregate their statistics.

    ``kernel`` selects the chunk evaluator: "auto" uses the vectorized
    Euclidean kernel when available, "scalar" forces per-path runs (useful
    to cross-check the vectorized kernel), "vector" demands it.
    """
    _validate_run(problem, algorithm, sched, x0)
    if paths < 1:
        raise ValueError(f"need at least one path, got {paths}")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if threads < 1:
        raise ValueError(f"need at least one thread, got {threads}")
    epsilons = tuple(float(e) for e in epsilons)
    if any(not e > 0.0 for e in epsilons):
        raise ValueError("tail thresholds must be > 0")
    if len(set(epsilons)) != len(epsilons):
        raise ValueError("tail thresholds must be distinct")

    vector_ok = problem.space == "euclidean"
    if kernel == "auto":
        use_vector = vector_ok
    elif kernel == "vector":
        if not vector_ok:
            raise ValueError("vectorized kernel is only available in Euclidean spaces")
        use_vector = True
    elif kernel == "scalar":
        use_vector = False
    else:
        raise ValueError(f"unknown kernel: {kernel!r}")
    chunk_fn = _euclid_chunk if use_vector else _scalar_chunk

    bounds = [(s, min(s + CHUNK, paths)) for s in range(0, paths, CHUNK)]

    def job(se):
        return chunk_fn(problem, algorithm, sched, x0, horizon, seed, se[0], se[1], epsilons)

    if threads == 1 or len(bounds) == 1:
        results = [job(se) for se in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(job, bounds))

    # Fold in ascending chunk order (fixed regardless of thread scheduling).
    tot = results[0]
    for res in results[1:]:
        for k in tot:
            tot[k] = tot[k] + res[k]

    def finalize_std(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
        if paths < 2:
            return np.zeros_like(s1)
        var = (s2 - s1 * s1 / paths) / (paths - 1)
        return np.sqrt(np.maximum(var, 0.0))

    return EnsembleStats(
        algorithm=algorithm,
        space=problem.space,
        paths=paths,
        horizon=horizon,
        seed=seed,
        epsilons=epsilons,
        mean_dist=tot["sd"] / paths,
        mean_sq_dist=tot["sd2"] / paths,
        mean_gap=tot["sg"] / paths,
        std_dist=finalize_std(tot["sd"], tot["sd2"]),
        std_sq_dist=finalize_std(tot["sd2"], tot["sd4"]),
        std_gap=finalize_std(tot["sg"], tot["sg2"]),
        tail={e: tot["tail"][i] / paths for i, e in enumerate(epsilons)},
        point_tail={e: tot["point"][i] / paths for i, e in enumerate(epsilons)},
    )


# ---------------------------------------------------------------------------
# One-step supermartingale inequality audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FejerMargin:
    """One-step inequality audit: lhs = E[d^2(x^+, z)] after one step from
    x, rhs = the supermartingale bound; slack = rhs - lhs should be
    nonnegative (within float error for exact sums, within Monte-Carlo
    error otherwise)."""

    lhs: float
    rhs: float
    slack: float
    stderr: float


def fejer_margin(
    problem: Problem,
    algorithm: str,
    x: Point,
    step: float,
    z: Point | None = None,
    mc_samples: int | None = None,
    seed: int = 0,
) -> FejerMargin:
    """Audit the one-step Fejér inequality of the algorithm at state x.

    With ``mc_samples`` unset the expectation over the drawn index is the
    exact finite sum; otherwise it is a Monte-Carlo estimate (the returned
    stderr is then nonzero).
    """
    if not step > 0.0:
        raise ValueError(f"step must be > 0, got {step}")
    z = problem.solution_anchor if z is None else z
    if not contains(problem.solution_set, z):
        raise ValueError("reference point z must lie in the solution set")
    d2 = sqdist(x, z)

    if algorithm == "skm":
        if not isinstance(problem, FixedPointProblem):
            raise TypeError("one-step audit: skm needs a fixed-point problem")
        if step > 1.0:
            raise ValueError("relaxation must lie in (0, 1]")
        weights = problem.weights
        vals = [
            sqdist(geodesic_point(x, operator_apply(problem, k, x), step), z)
            for k in range(len(problem.sets))
        ]
        rhs = d2 - step * (1.0 - step) * gap_F(problem, x)
    elif algorithm == "sppa":
        if not isinstance(problem, MeanMinProblem):
            raise TypeError("one-step audit: sppa needs a mean-minimization problem")
        weights = problem.weights
        vals = [
            sqdist(prox_step(problem, e, step, x), z)
            for e in range(len(problem.atoms))
        ]
        if problem.cost_kind == HALF_SQUARED:
            # Local Lipschitz constants along the prox segments at x.
            lips = [distance(x, a) for a, _ in problem.atoms]
        else:
            lips = [1.0] * len(problem.atoms)
        l_bar = math.fsum(w * l * l for w, l in zip(weights, lips))
        drop = mean_cost_exact(problem, x) - mean_cost_exact(problem, z)
        rhs = d2 - 2.0 * step * drop + 4.0 * step * step * l_bar
    elif algorithm == "sb":
        if not isinstance(problem, BusemannProblem):
            raise TypeError("one-step audit: sb needs a Busemann problem")
        if not contains(problem.constraint, x):
            raise ValueError("state x must lie in the constraint set")
        weights = problem.weights
        vals = []
        s_sq = 0.0
        for e, (_, w) in enumerate(problem.atoms):
            xi, s = busemann_subgradient(problem, e, x)
            y = x if s == 0.0 else project_convex(problem.constraint, ray_point(x, xi, s * step))
            vals.append(sqdist(y, z))
            s_sq += w * s * s
        drop = mean_cost_exact(problem, x) - mean_cost_exact(problem, z)
        rhs = d2 - 2.0 * step * drop + step * step * s_sq
    else:
        raise ValueError(f"unknown algorithm: {algorithm!r}")

    if mc_samples is None:
        lhs = math.fsum(w * v for w, v in zip(weights, vals))
        stderr = 0.0
    else:
        if mc_samples < 2:
            raise ValueError("need at least two Monte-Carlo draws")
        u = rng.uniforms(rng.stream_keys(seed, np.arange(mc_samples)), 0)
        idx = rng.categorical(problem.cum_weights, u)
        counts = np.bincount(idx, minlength=len(vals))
        varr = np.array(vals)
        lhs = float(counts @ varr) / mc_samples
        var = float(counts @ (varr - lhs) ** 2) / (mc_samples - 1)
        stderr = math.sqrt(var / mc_samples)
    return FejerMargin(lhs=lhs, rhs=rhs, slack=rhs - lhs, stderr=stderr)


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------

_TRUNCATED = "sup-tail truncated at the horizon (later exceedances unobserved)"


@dataclass
class AuditRecord:
    epsilon: float
    criterion: str
    predicted_index: int
    observed_value_at_index: float | None
    bound_satisfied: bool | None
    mc_margin: float | None
    note: str

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "criterion": self.criterion,
            "predicted_index": self.predicted_index,
            "observed_value_at_index": self.observed_value_at_index,
            "bound_satisfied": self.bound_satisfied,
            "mc_margin": self.mc_margin,
            "note": self.note,
        }


@dataclass
class AuditReport:
    kind: str
    algorithm: str
    paths: int
    horizon: int
    lam: float | None
    records: list[AuditRecord]

    @property
    def all_pass(self) -> bool:
        """True when no checked record failed (unchecked records are not
        failures: their predicted index lies beyond the horizon)."""
        return all(r.bound_satisfied is not False for r in self.records)

    def to_json_dict(self) -> dict:
        return {
            "schema": "fejerlab-audit-v1",
            "kind": self.kind,
            "algorithm": self.algorithm,
            "paths": self.paths,
            "horizon": self.horizon,
            "lambda": self.lam,
            "records": [r.to_json_dict() for r in self.records],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "AuditReport":
        if doc.get("schema") != "fejerlab-audit-v1":
            raise ValueError(f"unknown audit schema: {doc.get('schema')!r}")
        records = [
            AuditRecord(
                epsilon=r["epsilon"],
                criterion=r["criterion"],
                predicted_index=r["predicted_index"],
                observed_value_at_index=r["observed_value_at_index"],
                bound_satisfied=r["bound_satisfied"],
                mc_margin=r["mc_margin"],
                note=r["note"],
            )
            for r in doc["records"]
        ]
        return AuditReport(
            kind=doc["kind"],
            algorithm=doc["algorithm"],
            paths=doc["paths"],
            horizon=doc["horizon"],
            lam=doc["lambda"],
            records=records,
        )


def liminf_witness_check(
    stats: EnsembleStats, eps: float, start: int, bound_index: int
) -> int | None:
    """First index n in [start, min(bound_index, horizon)] with mean gap
    below eps, or None if the window contains no such iterate."""
    if start < 0:
        raise ValueError(f"window start must be >= 0, got {start}")
    end = min(bound_index, stats.horizon)
    if start > end:
        return None
    window = stats.mean_gap[start : end + 1]
    hits = np.nonzero(window < eps)[0]
    return int(start + hits[0]) if len(hits) else None


def certificate_audit(
    stats: EnsembleStats,
    cert: RateCertificate | FastCertificate,
    epsilons,
    lam: float,
) -> AuditReport:
    """Check the certificate's mean and almost-sure rate indices against
    the ensemble.  Fast certificates dispatch to the envelope/tail audit
    (which does not use the confidence level).

    Per epsilon, all four assembled indices are reported; the mean check
    runs at rho(theta(eps/2)) (largest mean distance over n >= index must
    be below eps up to 3 standard errors) and the almost-sure check at the
    relaxed index rho(lam * theta(eps)) (running-sup exceedance fraction
    must be below lam up to 3 binomial standard errors).  Indices beyond
    the horizon yield "unchecked" records, which never count as failures.
    """
    if isinstance(cert, FastCertificate):
        return fast_audit(stats, cert, epsilons)
    if not 0.0 < lam < 1.0:
        raise ValueError(f"confidence level must lie in (0,1), got {lam}")
    records: list[AuditRecord] = []
    sqrt_paths = math.sqrt(stats.paths)
    for eps in epsilons:
        eps = float(eps)
        rates = cert.metric_rates(eps, lam)
        idx_note = (
            f"indices: mean={rates[0]}, as_strict={rates[1]}, "
            f"mean_relaxed={rates[2]}, as_relaxed={rates[3]}"
        )

        idx = rates[0]
        if idx > stats.horizon:
            records.append(
                AuditRecord(
                    eps, "mean", idx, None, None, None,
                    note=f"unchecked: index beyond horizon {stats.horizon}; {idx_note}",
                )
            )
        else:
            seg = stats.mean_dist[idx:]
            j = int(np.argmax(seg))
            observed = float(seg[j])
            se = float(stats.std_dist[idx + j]) / sqrt_paths
            records.append(
                AuditRecord(
                    eps, "mean", idx, observed,
                    bool(observed < eps + 3.0 * se),
                    eps - observed,
                    note=(
                        f"max mean distance over n >= {idx}, tolerance 3 stderr "
                        f"= {3.0 * se:.3g}; {idx_note}"
                    ),
                )
            )

        idx = rates[3]
        se = math.sqrt(lam * (1.0 - lam) / stats.paths)
        if idx > stats.horizon:
            records.append(
                AuditRecord(
                    eps, "almost_sure", idx, None, None, None,
                    note=(
                        f"unchecked: index beyond horizon {stats.horizon}; "
                        f"{_TRUNCATED}; {idx_note}"
                    ),
                )
            )
        else:
            if eps not in stats.tail:
                raise ValueError(
                    f"ensemble lacks the tail threshold {eps!r}; have {sorted(stats.tail)}"
                )
            observed = float(stats.tail[eps][idx])
            records.append(
                AuditRecord(
                    eps, "almost_sure", idx, observed,
                    bool(observed < lam + 3.0 * se),
                    lam - observed,
                    note=(
                        f"exceedance fraction vs lambda={lam:g}, tolerance 3 binomial "
                        f"stderr = {3.0 * se:.3g}; audited at the relaxed index "
                        f"rho(lam*theta(eps)), strict index {rates[1]}; {_TRUNCATED}; {idx_note}"
                    ),
                )
            )
    return AuditReport(
        kind="rate",
        algorithm=stats.algorithm,
        paths=stats.paths,
        horizon=stats.horizon,
        lam=lam,
        records=records,
    )


def _default_grid(horizon: int) -> list[int]:
    grid = {0}
    n = 1
    while n <= horizon:
        grid.add(n)
        n *= 10
    grid.add(horizon)
    return sorted(grid)


def fast_audit(
    stats: EnsembleStats, cert: FastCertificate, epsilons, grid=None
) -> AuditReport:
    """Check the fast-rate envelope E[dist^2(x_n)] <= u/(n+r) at every n and
    the tail bound P(sup_{m>=n} dist_m >= sqrt(eps)) <= K(u+2d)/(eps(n+r))
    on a grid of indices.  Tail thresholds sqrt(eps) must be among the
    ensemble's thresholds."""
    records: list[AuditRecord] = []
    n_arr = np.arange(stats.horizon + 1)
    env = cert.u / (n_arr + cert.r)
    se = stats.stderr_sq_dist()
    slack = env + 3.0 * se - stats.mean_sq_dist
    worst = int(np.argmin(slack))
    records.append(
        AuditRecord(
            0.0,
            "fast_mean_envelope",
            worst,
            float(stats.mean_sq_dist[worst]),
            bool(slack[worst] >= 0.0),
            float(slack[worst]),
            note=(
                f"E[dist^2] vs u/(n+r) over all n in [0, {stats.horizon}]; "
                f"tightest index {worst}, bound {env[worst]:.6g}, "
                f"tolerance 3 stderr = {3.0 * float(se[worst]):.3g}"
            ),
        )
    )
    grid = _default_grid(stats.horizon) if grid is None else sorted(set(grid))
    for eps in epsilons:
        eps = float(eps)
        thr = math.sqrt(eps)
        if thr not in stats.tail:
            raise ValueError(
                f"ensemble lacks the tail threshold sqrt({eps!r}) = {thr!r}; "
                f"have {sorted(stats.tail)}"
            )
        for n in grid:
            if n > stats.horizon:
                continue
            _, tail_bound = fast_bounds(cert, n, eps)
            observed = float(stats.tail[thr][n])
            if 0.0 < tail_bound < 1.0:
                se_b = math.sqrt(tail_bound * (1.0 - tail_bound) / stats.paths)
            else:
                se_b = 0.0
            ok = tail_bound >= 1.0 or observed <= tail_bound + 3.0 * se_b
            records.append(
                AuditRecord(
                    eps,
                    "fast_tail",
                    n,
                    observed,
                    bool(ok),
                    tail_bound + 3.0 * se_b - observed,
                    note=(
                        f"P(sup dist >= sqrt(eps)={thr:g}) at n={n} vs bound "
                        f"{tail_bound:.6g} (+3 binomial stderr); {_TRUNCATED}"
                    ),
                )
            )
    return AuditReport(
        kind="fast",
        algorithm=stats.algorithm,
        paths=stats.paths,
        horizon=stats.horizon,
        lam=None,
        records=records,
    )


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def curves_csv_text(stats: EnsembleStats) -> str:
    """The per-iteration curves as CSV text (deterministic byte for byte)."""
    cols = ["n", "mean_dist", "mean_sq_dist", "mean_gap"]
    cols += [f"tail_eps_{e!r}" for e in stats.epsilons]
    cols += [f"point_tail_eps_{e!r}" for e in stats.epsilons]
    cols += ["std_dist", "std_sq_dist", "std_gap"]
    lines = [",".join(cols)]
    for n in range(stats.horizon + 1):
        row = [
            str(n),
            _fmt(stats.mean_dist[n]),
            _fmt(stats.mean_sq_dist[n]),
            _fmt(stats.mean_gap[n]),
        ]
        row += [_fmt(stats.tail[e][n]) for e in stats.epsilons]
        row += [_fmt(stats.point_tail[e][n]) for e in stats.epsilons]
        row += [_fmt(stats.std_dist[n]), _fmt(stats.std_sq_dist[n]), _fmt(stats.std_gap[n])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def export_results(
    stats: EnsembleStats, report: AuditReport | None, path_prefix: str
) -> list[str]:
    """Write {prefix}curves.csv (always) and {prefix}audit.json (when a
    report is given); returns the written paths."""
    written = []
    curves_path = f"{path_prefix}curves.csv"
    try:
        with open(curves_path, "w") as fh:
            fh.write(curves_csv_text(stats))
    except OSError as exc:
        raise OSError(f"cannot write curves to {curves_path}: {exc}") from exc
    written.append(curves_path)
    if report is not None:
        audit_path = f"{path_prefix}audit.json"
        try:
            with open(audit_path, "w") as fh:
                json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise OSError(f"cannot write audit to {audit_path}: {exc}") from exc
        written.append(audit_path)
    return written


def load_curves(path: str) -> dict[str, np.ndarray]:
    """Parse a curves CSV back into named columns."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines:
        raise ValueError(f"empty curves file: {path}")
    header = lines[0].split(",")
    expected = {"n", "mean_dist", "mean_sq_dist", "mean_gap", "std_dist", "std_sq_dist", "std_gap"}
    missing = expected - set(header)
    if missing:
        raise ValueError(f"curves file {path} lacks columns: {sorted(missing)}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"malformed curves row (got {len(parts)} fields): {ln[:60]}")
        rows.append([float(p) for p in parts])
    data = np.array(rows)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    n = cols["n"]
    if not np.array_equal(n, np.arange(len(n))):
        raise ValueError(f"curves file {path} has non-contiguous iteration indices")
    return cols


def stats_from_curves(
    cols: dict[str, np.ndarray], algorithm: str, space: str, paths: int, seed: int
) -> EnsembleStats:
    """Rebuild ensemble statistics from parsed curves (for re-audit)."""
    if paths < 1:
        raise ValueError(f"need the original path count >= 1, got {paths}")
    horizon = len(cols["n"]) - 1
    tail = {}
    point_tail = {}
    for name, arr in cols.items():
        if name.startswith("tail_eps_"):
            tail[float(name[len("tail_eps_"):])] = arr
        elif name.startswith("point_tail_eps_"):
            point_tail[float(name[len("point_tail_eps_"):])] = arr
    return EnsembleStats(
        algorithm=algorithm,
        space=space,
        paths=paths,
        horizon=horizon,
        seed=seed,
        epsilons=tuple(sorted(tail)),
        mean_dist=cols["mean_dist"],
        mean_sq_dist=cols["mean_sq_dist"],
        mean_gap=cols["mean_gap"],
        std_dist=cols["std_dist"],
        std_sq_dist=cols["std_sq_dist"],
        std_gap=cols["std_gap"],
        tail=tail,
        point_tail=point_tail,
    )
