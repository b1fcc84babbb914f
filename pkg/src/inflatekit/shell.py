"""Axisymmetric pressurized shallow-shell indentation solver.

Solves the nondimensional shell equations for the displacement W(rho) and
Airy-stress derivative Psi(rho) under a point indentation, displacement
controlled: the depth W0 at the inner boundary is prescribed and the
dimensionless point force is recovered as a free parameter of the boundary
value problem via the vertical force-balance first integral.

Membrane limit (bending term dropped, valid for tau >> 1):

    first integral of the normal balance:
        rho*Psi - Psi*W' = rho^2/2 - c        (c = F / (2*pi))
    compatibility:
        Psi''' + 2 Psi''/rho - Psi'/rho^2 + Psi/rho^3
            = lap(W) - (W' W'')/rho

with F the force scaled by P_g * l_p^2.  The full system keeps the
biharmonic bending term with prefactor 1/tau^2 and a clamped slope under
the indenter.  Boundary conditions: zero horizontal displacement at the
load point (rho*Psi' - nu*Psi -> 0), and the far field W -> 0,
Psi -> rho/2 of the unindented pressurized state.

Hoop stress is Psi', radial stress Psi/rho; a compressive (negative) hoop
annulus signals the onset of radial wrinkles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_bvp

from .errors import NonConvergenceError, ValidationError

# membrane-limit onset of compressive hoop stress (indentation depth)
CRITICAL_DEPTH_REF = -2.52

# wrinkle-count scaling n ~ WRINKLE_FACTOR * sqrt(tau)
WRINKLE_FACTOR = 1.33

DEFAULT_NU = 0.4

# continuation step cap in |W0|
MAX_CONTINUATION_STEP = 0.25


@dataclass(frozen=True)
class ShellParams:
    """Local shell patch: radius R, thickness h, modulus E, nu, pressure Pg."""

    R: float
    h: float
    E: float
    nu: float = DEFAULT_NU
    Pg: float = 0.0

    def __post_init__(self):
        for name in ("R", "h", "E", "Pg"):
            if not (getattr(self, name) > 0):
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if not (0 < self.nu < 0.5):
            raise ValidationError(f"nu must be in (0, 0.5), got {self.nu}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValidationError("tau must be finite and positive")

    @property
    def bending_stiffness(self) -> float:
        """B = E h^3 / (12 (1 - nu^2))."""
        return self.E * self.h**3 / (12.0 * (1.0 - self.nu**2))

    @property
    def capillary_length(self) -> float:
        """l_p = sqrt(Pg R^3 / (E h))."""
        return math.sqrt(self.Pg * self.R**3 / (self.E * self.h))

    @property
    def tau(self) -> float:
        """Bendability: Pg R^2 / sqrt(E h B)."""
        return self.Pg * self.R**2 / math.sqrt(self.E * self.h * self.bending_stiffness)


@dataclass(frozen=True)
class SolverOptions:
    membrane_limit: bool = True
    grid_size: int = 400
    rho_inf: float = 30.0
    # mesh-refinement residual tolerance; the full system keeps a looser
    # target because its inner bending layer over-refines at 1e-8
    tol: float | None = None
    max_nodes: int = 200_000
    # warm-start meshes larger than this are subsampled between
    # continuation steps to stop refinement from snowballing
    restart_cap: int = 12_000

    @property
    def effective_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-8 if self.membrane_limit else 1e-6

    def __post_init__(self):
        if self.grid_size < 200:
            raise ValidationError("grid_size must be >= 200")
        if self.rho_inf < 20:
            raise ValidationError("rho_inf must be >= 20")

    @property
    def rho0(self) -> float:
        # inner regularization radius replacing the point-load delta
        return 1e-3 * self.rho_inf


@dataclass(frozen=True)
class ShellSolution:
    """Converged radial profiles on an ascending grid [rho0, rho_inf]."""

    rho: np.ndarray
    W: np.ndarray
    Psi: np.ndarray
    hoop_stress: np.ndarray
    radial_stress: np.ndarray
    W0: float
    force: float  # dimensionless, F / (Pg * l_p^2)
    annulus: tuple[float, float] | None = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho[0] <= 0 or np.any(np.diff(rho) <= 0):
            raise ValidationError("rho grid must be strictly increasing from rho0 > 0")
        rho_inf = rho[-1]
        if abs(self.W[-1]) >= 1e-4:
            raise ValidationError(f"far field |W(rho_inf)| = {abs(self.W[-1]):.3g} >= 1e-4")
        # Psi -> rho/2 up to the point-load tail -c/rho (c = force / 2 pi)
        tail = self.force / (2.0 * math.pi * rho_inf)
        if abs(self.Psi[-1] - (rho_inf / 2.0 - tail)) >= 1e-3 * rho_inf:
            raise ValidationError("far field Psi(rho_inf) deviates from rho_inf/2 - c/rho_inf")
        if self.annulus is not None:
            lo, hi = self.annulus
            inside = (rho >= lo) & (rho <= hi)
            if not np.any(self.hoop_stress[inside] < 0):
                raise ValidationError("annulus interval contains no negative hoop stress")

    def force_newtons(self, params: ShellParams) -> float:
        """Dimensional point force for the given shell parameters."""
        return self.force * params.Pg * params.capillary_length**2

    def min_hoop_stress(self) -> float:
        return float(np.min(self.hoop_stress))


@dataclass(frozen=True)
class CapProfile:
    """Inverted-spherical-cap approximation, valid for W0 << -1."""

    W0: float

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = rho <= math.sqrt(abs(self.W0))
        return np.where(inside, self.W0 + rho**2, 0.0)


def _trivial_solution(options: SolverOptions) -> ShellSolution:
    """Exact unindented state: W = 0, Psi = rho/2 (zero force)."""
    rho = np.geomspace(options.rho0, options.rho_inf, options.grid_size)
    return ShellSolution(
        rho=rho,
        W=np.zeros_like(rho),
        Psi=rho / 2.0,
        hoop_stress=np.full_like(rho, 0.5),
        radial_stress=np.full_like(rho, 0.5),
        W0=0.0,
        force=0.0,
        annulus=None,
    )


def _membrane_rhs(rho, y, p):
    psi, dpsi, d2psi, _w = y
    c = p[0]
    psi_safe = np.where(np.abs(psi) < 1e-12, 1e-12, psi)
    q = rho**2 / 2.0 - c
    g = rho - q / psi_safe  # W'
    dg = (1.0 - rho / psi_safe) + q / psi_safe**2 * dpsi
    d3psi = (
        -2.0 * d2psi / rho
        + dpsi / rho**2
        - psi / rho**3
        + dg
        + g / rho
        - g * dg / rho
    )
    return np.vstack([dpsi, d2psi, d3psi, g])


def _membrane_bc_factory(W0, nu, rho0, rho_inf):
    # The far field approaches the unindented state with the algebraic tail
    # Psi = rho/2 - c/rho forced by the point load; truncating without the
    # tail would inject an O(c) error growing inward as 1/rho.
    # At the inner boundary the membrane has the point-load local behavior
    # W = W(0) + const * rho^(2/3), so the apex depth is extrapolated as
    # W(0) = W(rho0) - (3/2) rho0 W'(rho0); W0 prescribes the apex value.
    def bc(ya, yb, p):
        c = p[0]
        psi0 = ya[0]
        w_slope0 = rho0 - (rho0**2 / 2.0 - c) / psi0
        return np.array(
            [
                rho0 * ya[1] - nu * ya[0],  # regularity at the load point
                ya[3] - 1.5 * rho0 * w_slope0 - W0,  # prescribed apex depth
                yb[3],  # W -> 0
                yb[0] - (rho_inf / 2.0 - c / rho_inf),
                yb[1] - (0.5 + c / rho_inf**2),
            ]
        )

    return bc


def _full_rhs_factory(tau):
    tau2 = tau * tau

    def rhs(rho, y, p):
        w, phi, dphi, psi, dpsi, d2psi = y
        c = p[0]
        q = rho**2 / 2.0 - c
        d2phi = tau2 * (q - rho * psi + psi * phi) / rho - dphi / rho + phi / rho**2
        d3psi = (
            -2.0 * d2psi / rho
            + dpsi / rho**2
            - psi / rho**3
            + dphi
            + phi / rho
            - phi * dphi / rho
        )
        return np.vstack([phi, dphi, d2phi, dpsi, d2psi, d3psi])

    return rhs


def _full_bc_factory(W0, nu, rho0, rho_inf):
    def bc(ya, yb, p):
        return np.array(
            [
                ya[0] - W0,
                ya[1],  # clamped slope under the indenter
                rho0 * ya[4] - nu * ya[3],
                yb[0],
                yb[1],
                yb[3] - (rho_inf / 2.0 - p[0] / rho_inf),
                yb[4] - (0.5 + p[0] / rho_inf**2),
            ]
        )

    return bc


def _solution_from_bvp(sol, W0, options: SolverOptions, membrane: bool) -> ShellSolution:
    rho = sol.x
    if membrane:
        psi, dpsi = sol.y[0], sol.y[1]
        w = sol.y[3]
    else:
        w = sol.y[0]
        psi, dpsi = sol.y[3], sol.y[4]
    c = float(sol.p[0])
    hoop = dpsi
    radial = psi / rho
    neg = np.where(hoop < 0)[0]
    annulus = (float(rho[neg[0]]), float(rho[neg[-1]])) if neg.size else None
    return ShellSolution(
        rho=rho,
        W=w,
        Psi=psi,
        hoop_stress=hoop,
        radial_stress=radial,
        W0=float(W0),
        force=2.0 * math.pi * c,
        annulus=annulus,
    )


class _ContinuationState:
    """Carries the last converged BVP mesh/profile between depth steps."""

    def __init__(self, options: SolverOptions, membrane: bool, nu: float, tau: float):
        self.options = options
        self.membrane = membrane
        self.nu = nu
        self.tau = tau
        self.W0 = 0.0
        rho = np.geomspace(options.rho0, options.rho_inf, options.grid_size)
        if membrane:
            self.x = rho
            self.y = np.vstack([rho / 2.0, np.full_like(rho, 0.5), np.zeros_like(rho), np.zeros_like(rho)])
        else:
            self.x = rho
            zeros = np.zeros_like(rho)
            self.y = np.vstack([zeros, zeros, zeros, rho / 2.0, np.full_like(rho, 0.5), zeros])
        self.p = np.array([0.0])
        self.sol = None

    def advance(self, W0_target: float) -> None:
        """One Newton solve at W0_target from the stored guess."""
        opts = self.options
        if self.membrane:
            rhs = _membrane_rhs
            bc = _membrane_bc_factory(W0_target, self.nu, opts.rho0, opts.rho_inf)
            w_row = 3
        else:
            rhs = _full_rhs_factory(self.tau)
            bc = _full_bc_factory(W0_target, self.nu, opts.rho0, opts.rho_inf)
            w_row = 0
        x = self.x
        y = self.y.copy()
        if len(x) > opts.restart_cap:
            keep = np.unique(
                np.round(np.linspace(0, len(x) - 1, opts.restart_cap)).astype(int)
            )
            x = x[keep]
            y = y[:, keep]
        # shift the depth guess so the inner BC starts near-satisfied
        if self.W0 != W0_target:
            if self.W0 != 0.0:
                y[w_row] *= W0_target / self.W0
            else:
                y[w_row] = W0_target * np.exp(-(x - opts.rho0))
        p = self.p.copy()
        if p[0] == 0.0 and W0_target != 0.0:
            p[0] = abs(W0_target) / 2.0  # cap-theory force scale
        sol = solve_bvp(
            rhs, bc, x, y, p=p, tol=opts.effective_tol, max_nodes=opts.max_nodes
        )
        if sol.status != 0:
            raise NonConvergenceError(
                f"BVP solver failed at W0={W0_target} ({sol.message})",
                last_good_w0=self.W0,
            )
        self.x, self.y, self.p = sol.x, sol.y, sol.p
        self.W0 = W0_target
        self.sol = sol

    def continue_to(self, W0: float, max_step: float = MAX_CONTINUATION_STEP) -> None:
        """March W0 downward in steps <= max_step, halving on failure."""
        while not math.isclose(self.W0, W0, abs_tol=1e-14):
            step = float(np.clip(W0 - self.W0, -max_step, max_step))
            target = self.W0 + step
            attempt = target
            substep = step
            while True:
                try:
                    self.advance(attempt)
                    break
                except NonConvergenceError:
                    substep /= 2.0
                    if abs(substep) < 1e-3:
                        raise
                    attempt = self.W0 + substep
            # after a substep, loop continues toward W0

    def solution(self) -> ShellSolution:
        return _solution_from_bvp(self.sol, self.W0, self.options, self.membrane)


def solve_indentation(
    params: ShellParams, W0: float, options: SolverOptions | None = None
) -> ShellSolution:
    """Solve the indentation BVP at prescribed dimensionless depth W0 <= 0.

    Continuation marches from the unindented state in |W0| steps of at most
    0.25, warm-starting each collocation solve from the previous one.  The
    dimensionless force comes from the vertical force balance at the inner
    boundary (the first-integral constant).
    """
    if options is None:
        options = SolverOptions()
    if W0 > 0:
        raise ValidationError(f"W0 must be <= 0, got {W0}")
    if W0 == 0.0:
        return _trivial_solution(options)
    state = _ContinuationState(options, options.membrane_limit, params.nu, params.tau)
    state.continue_to(float(W0))
    return state.solution()


def critical_depth(params: ShellParams, options: SolverOptions | None = None) -> float:
    """Depth W0 at which compressive hoop stress (wrinkling) first appears.

    Membrane-limit bisection to 1e-3 in W0; the result is a universal
    dimensionless constant (~ -2.52), independent of the dimensional
    parameters while tau stays large.
    """
    if options is None:
        options = SolverOptions(membrane_limit=True)
    if params.tau < 10:
        warnings.warn(
            f"tau = {params.tau:.3g} < 10: membrane limit is questionable",
            stacklevel=2,
        )
    state = _ContinuationState(options, True, params.nu, params.tau)

    # march down until compression appears
    lo = 0.0  # shallower bound (no compression)
    hi = None
    w = 0.0
    while hi is None:
        w -= MAX_CONTINUATION_STEP
        if w < -6.0:
            raise NonConvergenceError(
                "no compressive hoop stress found down to W0 = -6", last_good_w0=w
            )
        state.continue_to(w)
        if state.solution().min_hoop_stress() < 0:
            hi = w  # deeper bound (compression present)
        else:
            lo = w

    # bisect; warm start from the nearest converged depth each time
    for _ in range(60):
        if abs(lo - hi) < 1e-3:
            break
        mid = 0.5 * (lo + hi)
        state.continue_to(mid)
        if state.solution().min_hoop_stress() < 0:
            hi = mid
        else:
            lo = mid
        if abs(lo - hi) < 1e-3:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WrinkleCount:
    count: int
    unrounded: float


def wrinkle_count(params: ShellParams) -> WrinkleCount:
    """Predicted number of radial wrinkles, n ~ 1.33 sqrt(tau).

    Rounds half-up to the nearest integer (the observed count is an
    integer; no rounding rule is physically mandated).
    """
    unrounded = WRINKLE_FACTOR * math.sqrt(params.tau)
    return WrinkleCount(count=int(math.floor(unrounded + 0.5)), unrounded=unrounded)


def cap_profile(W0: float) -> CapProfile:
    """Inverted-cap displacement profile W0 + rho^2 inside rho <= sqrt(|W0|)."""
    if W0 > 0:
        raise ValidationError(f"W0 must be <= 0, got {W0}")
    if abs(W0) < 1.0:
        warnings.warn(
            f"|W0| = {abs(W0):.3g} < 1: cap approximation assumes W0 << -1",
            stacklevel=2,
        )
    return CapProfile(W0=float(W0))


def cap_volume_change(params: ShellParams, w0: float) -> float:
    """Enclosed-volume change under indentation depth w0 (m): pi*R*w0^2/2."""
    if not (w0 > 0):
        raise ValidationError(f"w0 must be > 0, got {w0}")
    return 0.5 * math.pi * params.R * w0**2


def solution_to_csv(sol: ShellSolution, path) -> None:
    """Export profiles as CSV: rho,W,Psi,hoop_stress,radial_stress."""
    data = np.column_stack([sol.rho, sol.W, sol.Psi, sol.hoop_stress, sol.radial_stress])
    header = "rho,W,Psi,hoop_stress,radial_stress"
    np.savetxt(path, data, delimiter=",", header=header, comments="")
