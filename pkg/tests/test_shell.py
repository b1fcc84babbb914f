"""Tests for the shallow-shell indentation solver.

The [derived] expectations (annulus location, forces, profiles) are
cross-checked live against tests/shooting_oracle.py, an independent
inward shooting solver of the same ODE system built on a different
numerical route (RK45 + nested bisection instead of collocation).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inflatekit.errors import ValidationError
from inflatekit.shell import (
    ShellParams,
    ShellSolution,
    SolverOptions,
    cap_profile,
    cap_volume_change,
    critical_depth,
    solve_indentation,
    solution_to_csv,
    wrinkle_count,
)

from shooting_oracle import solve_membrane_shooting

BALL = ShellParams(R=0.13, h=8.6e-4, E=2.3e6, nu=0.4, Pg=1300.0)


@pytest.fixture(scope="module")
def sol_m1():
    return solve_indentation(BALL, -1.0)


@pytest.fixture(scope="module")
def sol_m4():
    return solve_indentation(BALL, -4.0)


@pytest.fixture(scope="module")
def oracle_m1():
    return solve_membrane_shooting(-1.0)


@pytest.fixture(scope="module")
def oracle_m4():
    return solve_membrane_shooting(-4.0)


class TestShellParams:
    def test_derived_quantities(self):
        # direct evaluation of B, l_p, tau definitions
        b = BALL.E * BALL.h**3 / (12 * (1 - BALL.nu**2))
        assert BALL.bending_stiffness == pytest.approx(b)
        lp = math.sqrt(BALL.Pg * BALL.R**3 / (BALL.E * BALL.h))
        assert BALL.capillary_length == pytest.approx(lp)
        tau = BALL.Pg * BALL.R**2 / math.sqrt(BALL.E * BALL.h * b)
        assert BALL.tau == pytest.approx(tau)
        # the reference ball sits in the tau ~ 40 regime
        assert 35 < BALL.tau < 45

    @pytest.mark.parametrize("field,value", [("R", -1.0), ("h", 0.0), ("E", -2.0), ("Pg", 0.0), ("nu", 0.6)])
    def test_invalid_parameters(self, field, value):
        kwargs = dict(R=0.13, h=8.6e-4, E=2.3e6, nu=0.4, Pg=1300.0)
        kwargs[field] = value
        with pytest.raises(ValidationError):
            ShellParams(**kwargs)


class TestSolverOptions:
    def test_grid_size_floor(self):
        with pytest.raises(ValidationError):
            SolverOptions(grid_size=100)

    def test_rho_inf_floor(self):
        with pytest.raises(ValidationError):
            SolverOptions(rho_inf=10)

    def test_inner_radius_scales_with_domain(self):
        assert SolverOptions(rho_inf=30.0).rho0 == pytest.approx(0.03)


class TestTrivialSolution:
    def test_unindented_state(self):
        sol = solve_indentation(BALL, 0.0)
        assert np.max(np.abs(sol.W)) < 1e-6
        assert np.max(np.abs(sol.Psi - sol.rho / 2.0)) < 1e-4 * sol.rho[-1]
        assert sol.force == 0.0

    def test_positive_depth_rejected(self):
        with pytest.raises(ValidationError):
            solve_indentation(BALL, 0.5)


class TestShallowIndentation:
    def test_no_compression_at_minus_one(self, sol_m1):
        # compression appears only past the onset depth ~ -2.52
        assert sol_m1.min_hoop_stress() >= 0.0
        assert sol_m1.annulus is None

    def test_force_matches_shooting_oracle(self, sol_m1, oracle_m1):
        c, _ = oracle_m1
        assert sol_m1.force == pytest.approx(2.0 * math.pi * c, rel=0.03)

    def test_profile_matches_shooting_oracle(self, sol_m1, oracle_m1):
        _, ivp = oracle_m1
        for rho in (0.1, 0.5, 1.0, 2.0, 3.0):
            w_oracle = ivp.sol(rho)[3]
            w_pkg = np.interp(rho, sol_m1.rho, sol_m1.W)
            assert abs(w_pkg - w_oracle) < 0.02


class TestDeepIndentation:
    def test_annulus_present_and_off_axis(self, sol_m4):
        assert sol_m4.annulus is not None
        lo, hi = sol_m4.annulus
        assert lo > sol_m4.rho[0]
        assert hi > lo

    def test_annulus_confirmed_by_shooting_oracle(self, sol_m4, oracle_m4):
        # hoop stress along the oracle trajectory is its Psi' component
        _, ivp = oracle_m4
        rho = np.linspace(0.05, 8.0, 800)
        hoop = ivp.sol(rho)[1]
        assert np.min(hoop) < 0.0
        neg = rho[hoop < 0]
        lo, hi = sol_m4.annulus
        assert neg.min() == pytest.approx(lo, rel=0.15)
        assert neg.max() == pytest.approx(hi, rel=0.15)

    def test_force_matches_shooting_oracle(self, sol_m4, oracle_m4):
        c, _ = oracle_m4
        assert sol_m4.force == pytest.approx(2.0 * math.pi * c, rel=0.03)

    def test_profile_matches_shooting_oracle(self, sol_m4, oracle_m4):
        _, ivp = oracle_m4
        for rho in (0.1, 0.5, 1.0, 2.0, 3.0):
            w_oracle = ivp.sol(rho)[3]
            w_pkg = np.interp(rho, sol_m4.rho, sol_m4.W)
            assert abs(w_pkg - w_oracle) < 0.02 * 4.0


def test_force_monotone_in_depth():
    forces = [solve_indentation(BALL, w).force for w in (0.0, -0.5, -1.5, -3.0, -4.5, -6.0)]
    assert all(f2 > f1 for f1, f2 in zip(forces, forces[1:]))


def test_full_solution_close_to_membrane_limit():
    # tau = 100 parameter set; bending changes the profile by < 2 percent
    params = ShellParams(R=0.11, h=1.2e-3, E=1.1e6, nu=0.4, Pg=2000.0)
    params = _rescale_to_tau(params, 100.0)
    membrane = solve_indentation(params, -3.0, SolverOptions(membrane_limit=True))
    full = solve_indentation(params, -3.0, SolverOptions(membrane_limit=False))
    grid = np.linspace(membrane.rho[0], membrane.rho[-1], 2000)
    w_m = np.interp(grid, membrane.rho, membrane.W)
    w_f = np.interp(grid, full.rho, full.W)
    rms = np.sqrt(np.mean((w_f - w_m) ** 2)) / 3.0
    assert rms < 0.02


def _rescale_to_tau(params: ShellParams, tau: float) -> ShellParams:
    """Adjust Pg so the parameter set has exactly the requested tau."""
    scale = tau / params.tau
    return ShellParams(R=params.R, h=params.h, E=params.E, nu=params.nu, Pg=params.Pg * scale)


class TestCriticalDepth:
    def test_onset_near_universal_value(self):
        assert critical_depth(BALL) == pytest.approx(-2.52, abs=0.08)

    def test_universality_under_parameter_change(self):
        # order-of-magnitude change in a dimensional parameter, tau >= 10
        other = ShellParams(R=1.3, h=8.6e-3, E=2.3e6, nu=0.4, Pg=1300.0)
        assert other.tau >= 10
        assert critical_depth(other) == pytest.approx(critical_depth(BALL), abs=2e-3)

    def test_low_tau_warns(self):
        soft = ShellParams(R=0.05, h=5e-3, E=1e6, nu=0.4, Pg=500.0)
        assert soft.tau < 10
        with pytest.warns(UserWarning, match="membrane limit"):
            critical_depth(soft)


class TestWrinkleCount:
    def test_reference_ball_regime(self):
        params = _rescale_to_tau(BALL, 40.0)
        result = wrinkle_count(params)
        assert result.unrounded == pytest.approx(1.33 * math.sqrt(40.0), abs=0.01)
        assert result.count == 8

    def test_tau_one(self):
        params = _rescale_to_tau(BALL, 1.0)
        result = wrinkle_count(params)
        assert result.unrounded == pytest.approx(1.33, abs=1e-9)
        assert result.count == 1

    def test_tau_four_hundred_rounds_up(self):
        params = _rescale_to_tau(BALL, 400.0)
        assert wrinkle_count(params).count == 27


class TestCapProfile:
    def test_apex_value(self):
        assert cap_profile(-4.0)(0.0) == pytest.approx(-4.0)

    def test_continuity_at_junction(self):
        cap = cap_profile(-4.0)
        assert cap(2.0) == pytest.approx(0.0)
        assert cap(2.0 + 1e-9) == 0.0

    def test_inside_value(self):
        assert cap_profile(-9.0)(1.0) == pytest.approx(-8.0)

    def test_shallow_depth_warns(self):
        with pytest.warns(UserWarning, match="cap approximation"):
            cap_profile(-0.5)

    def test_positive_depth_rejected(self):
        with pytest.raises(ValidationError):
            cap_profile(1.0)

    def test_matches_deep_solution_within_15_percent_rms(self):
        # Uniform-grid RMS over [rho0, sqrt(|W0|)] normalized by |W0| at
        # W0 = -8.  Known red: the measured value is ~25% (the inverted-cap
        # form is only asymptotic and W0 = -8 is not deep enough); the
        # independent shooting oracle confirms the solver profile itself to
        # 0.4%, so the deviation is a property of the approximation, not a
        # solver defect.  Only mesh-weighted evaluations (which depend on
        # solver discretization settings and swing 13.6-19.6%) reach 15%.
        sol = solve_indentation(BALL, -8.0)
        cap = cap_profile(-8.0)
        rc = math.sqrt(8.0)
        grid = np.linspace(sol.rho[0], rc, 500)
        w_sol = np.interp(grid, sol.rho, sol.W)
        w_cap = np.array([cap(r) for r in grid])
        rms = np.sqrt(np.mean((w_cap - w_sol) ** 2)) / 8.0
        assert rms < 0.15


class TestCapVolumeChange:
    def test_reference_value(self):
        # half pi R w0^2 with R = 0.13 m, w0 = 0.01 m
        assert cap_volume_change(BALL, 0.01) == pytest.approx(2.042e-5, rel=1e-3)

    def test_zero_depth_rejected(self):
        with pytest.raises(ValidationError):
            cap_volume_change(BALL, 0.0)

    @given(w0=st.floats(min_value=1e-6, max_value=0.1))
    @settings(max_examples=50, deadline=None)
    def test_quadratic_scaling(self, w0):
        assert cap_volume_change(BALL, 2 * w0) == pytest.approx(
            4 * cap_volume_change(BALL, w0), rel=1e-12
        )


class TestShellSolutionInvariants:
    def test_far_field_enforced(self):
        rho = np.linspace(0.03, 30.0, 500)
        with pytest.raises(ValidationError, match="far field"):
            ShellSolution(
                rho=rho,
                W=np.full_like(rho, -0.5),  # does not decay
                Psi=rho / 2.0,
                hoop_stress=np.full_like(rho, 0.5),
                radial_stress=np.full_like(rho, 0.5),
                W0=-1.0,
                force=1.0,
            )

    def test_csv_export(self, tmp_path, sol_m1):
        path = tmp_path / "profile.csv"
        solution_to_csv(sol_m1, path)
        header = path.read_text().splitlines()[0]
        assert header == "rho,W,Psi,hoop_stress,radial_stress"
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape[0] == len(sol_m1.rho)
