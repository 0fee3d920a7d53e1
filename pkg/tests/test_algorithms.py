"""Runners, budgets, liminf windows, and rate certificates."""

from __future__ import annotations

import math

import pytest

from fejerlab.algorithms import (
    certificate_sb,
    certificate_skm,
    certificate_sppa,
    fast_certificate_skm,
    fejer_budget,
    liminf_bound_sb,
    liminf_bound_skm,
    liminf_bound_sppa,
    run_sb,
    run_skm,
    run_sppa,
)
from fejerlab.moduli import (
    Constant,
    Harmonic,
    Linear,
    Power,
    RootSchedule,
    divergence_witness_theta,
    eval_modulus,
    schedule_value,
    tail_rate_chi,
)
from fejerlab.problems import (
    HALF_SQUARED,
    NoModulusKnownError,
    build_mean_min,
    euclid_two_atom_busemann,
    operator_apply,
    r1_single_atom_busemann,
    segment_argmin,
    tripod_median,
    two_halfspace,
)
from fejerlab.spaces import Euclidean, Tripod, distance

H11 = Harmonic(1.0, 1.0)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def test_sppa_rejects_constant_schedule_and_wrong_problem():
    with pytest.raises(ValueError):
        run_sppa(frechet := build_mean_min(
            "euclidean", ((Euclidean((1.0,)), 1.0),), HALF_SQUARED, 4.0
        ), Constant(0.5), Euclidean((0.0,)), 5, 0)
    with pytest.raises(TypeError):
        run_sppa(two_halfspace(), H11, Euclidean((1.0, 1.0)), 5, 0)
    with pytest.raises(ValueError):  # space mismatch
        run_sppa(frechet, H11, Tripod(0, 1.0), 5, 0)
    with pytest.raises(ValueError):  # negative horizon
        run_sppa(frechet, H11, Euclidean((0.0,)), -1, 0)


def test_sppa_single_atom_contracts_each_step():
    p = build_mean_min("euclidean", ((Euclidean((1.0,)), 1.0),), HALF_SQUARED, 4.0)
    a = Euclidean((1.0,))
    traj = run_sppa(p, H11, Euclidean((5.0,)), 20, 3)
    assert len(traj.points) == 21
    assert len(traj.indices) == len(traj.steps) == 20
    assert traj.points[0] == Euclidean((5.0,))
    for n in range(20):
        lam = schedule_value(H11, n)
        assert traj.steps[n] == lam
        expect = distance(traj.points[n], a) / (1.0 + lam)
        assert abs(distance(traj.points[n + 1], a) - expect) <= 1e-12


def test_sppa_constant_on_solution_set():
    p = build_mean_min("euclidean", ((Euclidean((1.0,)), 1.0),), HALF_SQUARED, 4.0)
    traj = run_sppa(p, H11, Euclidean((1.0,)), 10, 5)
    assert all(pt == Euclidean((1.0,)) for pt in traj.points)


def test_skm_rejects_steps_above_one():
    with pytest.raises(ValueError):
        run_skm(two_halfspace(), Harmonic(2.0, 1.0), Euclidean((1.0, 1.0)), 5, 0)


def test_skm_unit_step_is_picard():
    p = two_halfspace()
    traj = run_skm(p, Constant(1.0), Euclidean((1.0, 1.0)), 3, 7)
    x = Euclidean((1.0, 1.0))
    for n in range(3):
        x = operator_apply(p, traj.indices[n], x)
        assert traj.points[n + 1] == x


def test_skm_half_step_one_step_enumeration():
    p = two_halfspace()
    seen = set()
    for seed in range(24):
        traj = run_skm(p, Constant(0.5), Euclidean((1.0, 1.0)), 1, seed)
        seen.add(traj.points[1].coords)
    assert seen == {(0.5, 1.0), (1.0, 0.5)}


def test_skm_constant_on_fixed_points():
    traj = run_skm(two_halfspace(), Constant(0.5), Euclidean((-1.0, -1.0)), 10, 0)
    assert all(pt == Euclidean((-1.0, -1.0)) for pt in traj.points)


def test_sb_first_step_moves_toward_atom():
    p = r1_single_atom_busemann()  # atom 1, C = [-2, 2]
    traj = run_sb(p, Harmonic(1.0, 2.0), Euclidean((0.0,)), 1, 0)
    assert traj.steps[0] == 0.5
    assert traj.points[1] == Euclidean((0.5,))


def test_sb_constant_at_atom():
    p = r1_single_atom_busemann()
    traj = run_sb(p, H11, Euclidean((1.0,)), 10, 4)
    assert all(pt == Euclidean((1.0,)) for pt in traj.points)


def test_sb_rejects_start_outside_constraint_and_constant_schedule():
    p = r1_single_atom_busemann()
    with pytest.raises(ValueError):
        run_sb(p, H11, Euclidean((3.0,)), 5, 0)
    with pytest.raises(ValueError):
        run_sb(p, Constant(0.5), Euclidean((0.0,)), 5, 0)


def test_sb_iterates_stay_in_constraint():
    p = segment_argmin()
    traj = run_sb(p, H11, Euclidean((2.0, 2.0)), 50, 11)
    from fejerlab.spaces import contains

    assert all(contains(p.constraint, pt, tol=1e-9) for pt in traj.points)


def test_runs_are_seed_deterministic_and_path_dependent():
    p = segment_argmin()
    a = run_sb(p, H11, Euclidean((2.0, 2.0)), 30, 123, path_index=0)
    b = run_sb(p, H11, Euclidean((2.0, 2.0)), 30, 123, path_index=0)
    assert a.points == b.points and a.indices == b.indices
    c = run_sb(p, H11, Euclidean((2.0, 2.0)), 30, 123, path_index=1)
    assert c.points != a.points


# ---------------------------------------------------------------------------
# Budgets and liminf windows
# ---------------------------------------------------------------------------


def test_fejer_budget():
    b = fejer_budget(Euclidean((1.0, 1.0)), Euclidean((0.0, 0.0)), 0.5)
    assert b == pytest.approx(2.5, abs=1e-12)  # max(sqrt(2), 2) + 1/2
    small = fejer_budget(Euclidean((0.5,)), Euclidean((0.0,)), 0.1)
    assert small == pytest.approx(0.6, abs=1e-12)  # distance dominates its square
    with pytest.raises(ValueError):
        fejer_budget(Euclidean((1.0,)), Euclidean((0.0,)), 0.0)


def test_liminf_window_sppa_tripod_median():
    phi = liminf_bound_sppa(H11, 9.1, 1.0, 1.645)
    assert phi(2.0, 0) == 1425
    assert phi(2.0, 10) > 1425  # later start, later window end
    with pytest.raises(ValueError):
        phi(0.0, 0)


def test_liminf_window_sb_segment_argmin():
    phi = liminf_bound_sb(H11, 4.1, 1.0, 1.645)
    assert phi(1.0, 0) == 175


def test_liminf_window_skm_constant_schedule():
    phi = liminf_bound_skm(Constant(0.5), 2.5)
    # budget 2.5/eps over weights lambda(1-lambda) = 1/4, count form
    assert phi(1.0, 0) == 10
    assert phi(1.0, 7) == 17
    assert phi(0.5, 0) == 20


def test_certificate_windows_match_standalone_builders():
    cert = certificate_sppa(tripod_median(4.0), H11, Tripod(0, 3.0))
    assert cert.b == pytest.approx(9.1, abs=1e-12)
    assert cert.liminf_bound(2.0, 0) == 1425


# ---------------------------------------------------------------------------
# Rate certificates
# ---------------------------------------------------------------------------


def test_certificate_skm_flagship_constants():
    cert = certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)))
    assert cert.algorithm == "skm"
    assert cert.K == 1.0 and cert.L == 0.0 and cert.T == 0.0
    assert cert.b == pytest.approx(2.5, abs=1e-12)
    assert isinstance(cert.tau, Linear) and cert.tau.c == 0.5
    assert cert.consistency == Power(1.0, 2.0)
    assert cert.chi(0.3) == 0


def test_certificate_skm_flagship_rho_values():
    cert = certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)))
    # rho(eps) = ceil(120 / eps) for this instance
    assert cert.rho(0.01) == 12000
    assert cert.rho(0.02) == 6000  # doubling eps halves the index
    assert cert.rho(1.0) == 120


def test_certificate_skm_metric_rates():
    cert = certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)))
    assert cert.metric_rates(0.2, 0.1) == (12000, 120000, 3000, 30000)
    assert cert.metric_rates(0.3, 0.1) == (5334, 53334, 1334, 13334)
    lam_one = cert.metric_rates(0.2, 1.0)
    assert lam_one[0] == lam_one[1] and lam_one[2] == lam_one[3]


def test_certificate_divergence_uses_count_form():
    # the certificate witness counts ceil(b/w) terms from k, which is one
    # more than the minimal witness index when the budget is an exact
    # multiple of the step weight
    cert = certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)))
    assert cert.divergence(0, 1.0) == 4
    assert divergence_witness_theta(Constant(0.5), "mean_lambda_one_minus_lambda", 0, 1.0) == 3


def test_certificate_sppa_tripod_constants():
    cert = certificate_sppa(tripod_median(2.0), H11, Tripod(0, 1.0), Tripod(0, 0.0))
    assert cert.algorithm == "sppa"
    assert cert.L == 1.0 and cert.L_bar == 1.0
    assert cert.T == 1.645
    assert cert.b == pytest.approx(1.1, abs=1e-12)
    assert isinstance(cert.tau, Linear)
    assert cert.tau.c == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert cert.consistency == Power(1.0, 2.0)


def test_certificate_sppa_rho_assembles_printed_formula():
    cert = certificate_sppa(tripod_median(2.0), H11, Tripod(0, 1.0))
    budget_scale = cert.b + 4.0 * cert.L * cert.L * cert.T
    for eps in (30.0, 90.0):
        expected = cert.divergence(
            tail_rate_chi(H11, "square", eps / (24.0 * cert.L_bar)),
            budget_scale / eval_modulus(cert.tau, eps / 6.0),
        )
        assert cert.rho(eps) == expected


def test_certificate_sppa_lipschitz_from_half_squared_data():
    p = build_mean_min("euclidean", ((Euclidean((1.0,)), 1.0),), HALF_SQUARED, 4.0)
    cert = certificate_sppa(p, H11, Euclidean((0.5,)))
    # |grad| of d^2/2 on the ball of radius B around the anchor: B + d(a, anchor)
    assert cert.L == pytest.approx(4.0, abs=1e-12)
    assert cert.L_bar == pytest.approx(16.0, abs=1e-12)


def test_certificate_sb_constants_and_rho_shape():
    p = euclid_two_atom_busemann()
    x0 = Euclidean((2.0, 2.0))
    cert = certificate_sb(p, H11, x0)
    assert cert.algorithm == "sb"
    assert cert.L == 1.0 and cert.T == 1.645
    assert cert.b == pytest.approx(13.1, abs=1e-12)  # d^2 = 13 dominates
    budget_scale = cert.b + cert.L * cert.L * cert.T
    for eps in (40.0, 120.0):
        expected = cert.divergence(
            tail_rate_chi(H11, "square", eps / (6.0 * cert.L * cert.L)),
            budget_scale / eval_modulus(cert.tau, eps / 6.0),
        )
        assert cert.rho(eps) == expected


def test_certificate_sb_single_atom_works():
    cert = certificate_sb(r1_single_atom_busemann(), H11, Euclidean((0.0,)))
    assert cert.b == pytest.approx(1.1, abs=1e-12)
    assert cert.rho(60.0) >= 0


def test_certificate_sb_equal_weights_has_no_modulus():
    with pytest.raises(NoModulusKnownError):
        certificate_sb(segment_argmin(), H11, Euclidean((0.0, 2.0)))


def test_certificate_rejects_bad_reference_point():
    with pytest.raises(ValueError):
        certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)), Euclidean((1.0, 1.0)))
    with pytest.raises(ValueError):
        certificate_sppa(tripod_median(), Constant(0.5), Tripod(0, 1.0))


def test_certificate_rho_rejects_nonpositive_eps():
    cert = certificate_skm(two_halfspace(), Constant(0.5), Euclidean((1.0, 1.0)))
    with pytest.raises(ValueError):
        cert.rho(0.0)


# ---------------------------------------------------------------------------
# Fast-rate certificate
# ---------------------------------------------------------------------------


def test_fast_certificate_flagship():
    cert, sched = fast_certificate_skm(two_halfspace(), 2.0, 16, Euclidean((1.0, 1.0)))
    assert cert.K == 1.0 and cert.d == 0.0 and cert.r == 16
    assert cert.u == pytest.approx(32.0, rel=1e-12)
    assert sched == RootSchedule(4.0, 16)
    assert schedule_value(sched, 0) == 0.5


def test_fast_certificate_preconditions():
    with pytest.raises(ValueError):
        fast_certificate_skm(two_halfspace(), 1.0, 16, Euclidean((1.0, 1.0)))
    with pytest.raises(ValueError):
        fast_certificate_skm(two_halfspace(), 2.0, 15, Euclidean((1.0, 1.0)))
    with pytest.raises(TypeError):
        fast_certificate_skm(segment_argmin(), 2.0, 16, Euclidean((0.0, 0.0)))


def test_fast_certificate_zero_start():
    cert, _ = fast_certificate_skm(two_halfspace(), 2.0, 16, Euclidean((-1.0, -1.0)))
    assert cert.u == 0.0
