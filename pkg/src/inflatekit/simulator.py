"""Forward simulator for a pressurized closed triangle-mesh membrane.

Explicit (semi-implicit Euler) dynamics of a Neo-Hookean membrane under
internal gauge pressure, gravity, frictionless plane contacts with a
restitution target, and quasi-static point indentation.  Serves as the
synthetic-data oracle for the pressure/modulus estimators: indent_virtual
emits the same IndentationSeries the estimator consumes.

The digitized (inflated) mesh is treated as a prestressed equilibrium:
elastic strain is measured from the inflated shape and the initial pressure
load is balanced by a constant per-vertex offset computed at init.  This
sidesteps the (out-of-scope) inverse problem of recovering a deflated rest
shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import (
    EmptyContactError,
    InsufficientDataError,
    RelaxationTimeoutError,
    SimulationInstabilityError,
    TopologyError,
    ValidationError,
)
from .geometry import TriMesh, signed_volume
from .measurement import IndentationSample, IndentationSeries

P_ATM = 101325.0  # Pa

GAS_MODELS = ("constant_pressure", "isothermal")

# kinetic-energy threshold (J) declaring quasi-static equilibrium
RELAX_KE_TOL = 1e-6

# vertices closer than this to a plane count as contact (m)
CONTACT_TOL = 1e-4


@dataclass(frozen=True)
class MaterialSpec:
    """Membrane material and gas description."""

    E: float  # Pa
    nu: float
    h: float  # m, membrane thickness
    density: float  # kg/m^3 of the membrane material
    Pg0: float  # Pa, initial gauge pressure
    gas_model: str = "constant_pressure"

    def __post_init__(self):
        for name in ("E", "h", "density", "Pg0"):
            if not (getattr(self, name) > 0):
                raise ValidationError(f"{name} must be > 0")
        if not (0 < self.nu < 0.5):
            raise ValidationError(f"nu must be in (0, 0.5), got {self.nu}")
        if self.gas_model not in GAS_MODELS:
            raise ValidationError(
                f"gas_model must be one of {GAS_MODELS}, got {self.gas_model!r}"
            )

    @property
    def mu(self) -> float:
        """Shear modulus."""
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self) -> float:
        """Plane-stress first Lame parameter."""
        return self.E * self.nu / (1.0 - self.nu**2)


@dataclass(frozen=True)
class Plane:
    """Half-space collider: points with (x - point) . normal < 0 are inside."""

    point: tuple
    normal: tuple

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if not norm > 0:
            raise ValidationError("plane normal must be nonzero")
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))
        object.__setattr__(self, "normal", tuple(n / norm))


@dataclass(frozen=True)
class Indenter:
    """Point indenter: drives one mesh vertex along a fixed axis."""

    vertex: int
    axis: tuple = (0.0, 0.0, -1.0)  # direction of advance (into the surface)
    speed: float = 0.005  # m/s advance between relaxations

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(a)
        if not norm > 0:
            raise ValidationError("indenter axis must be nonzero")
        object.__setattr__(self, "axis", tuple(a / norm))
        if not (0 < self.speed <= 0.01):
            raise ValidationError(
                f"indenter speed must be in (0, 0.01] m/s, got {self.speed}"
            )


@dataclass(frozen=True)
class ScenarioConfig:
    """External conditions for a simulation run."""

    gravity: tuple = (0.0, 0.0, -9.81)
    planes: tuple = ()
    restitution: float = 1.0
    indenter: Indenter | None = None
    dt: float = 1e-4
    duration: float = 1.0
    damping: float = 0.0  # 1/s viscous rate (used for quasi-static relaxation)

    def __post_init__(self):
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        object.__setattr__(self, "planes", tuple(self.planes))
        if not (self.dt > 0):
            raise ValidationError("dt must be > 0")
        if not (0 < self.restitution <= 1):
            raise ValidationError("restitution must be in (0, 1]")
        if self.damping < 0:
            raise ValidationError("damping must be >= 0")


def _equibiaxial_stretch(material: MaterialSpec, tension: float) -> float:
    """Stretch ratio at which the Neo-Hookean membrane tension equals
    ``tension`` (N/m) under equibiaxial in-plane stretch."""

    def current_tension(lam):
        lam2 = lam * lam
        nominal = material.mu * (1.0 - 1.0 / lam2) + (
            2.0 * material.lam * math.log(lam) / lam2
        )
        return material.h * nominal

    hi = 10.0
    if current_tension(hi) < tension:
        raise ValidationError(
            "membrane cannot carry the initial pressure: required tension "
            f"{tension:.3g} N/m exceeds the material's capacity"
        )
    return brentq(lambda lam: current_tension(lam) - tension, 1.0 + 1e-12, hi)


class _MembraneModel:
    """Precomputed discretization shared by all states of one simulation."""

    def __init__(self, mesh: TriMesh, material: MaterialSpec):
        self.material = material
        self.faces = mesh.faces
        x = mesh.vertices
        i0, i1, i2 = self.faces[:, 0], self.faces[:, 1], self.faces[:, 2]
        e1 = x[i1] - x[i0]
        e2 = x[i2] - x[i0]
        # in-plane material coordinates of each rest triangle
        l1 = np.linalg.norm(e1, axis=1)
        if np.any(l1 == 0):
            bad = int(np.nonzero(l1 == 0)[0][0])
            raise SimulationInstabilityError(
                "degenerate rest triangle", face_id=bad, frame=0
            )
        t1 = e1 / l1[:, None]
        proj = np.einsum("fi,fi->f", e2, t1)
        perp = e2 - proj[:, None] * t1
        l2 = np.linalg.norm(perp, axis=1)
        if np.any(l2 == 0):
            bad = int(np.nonzero(l2 == 0)[0][0])
            raise SimulationInstabilityError(
                "degenerate rest triangle", face_id=bad, frame=0
            )
        # lumped vertex masses from the digitized (inflated) areal density
        inflated_area = 0.5 * l1 * l2
        masses = np.zeros(mesh.n_vertices)
        np.add.at(
            masses,
            self.faces.ravel(),
            np.repeat(material.density * material.h * inflated_area / 3.0, 3),
        )
        self.masses = masses
        self.total_mass = float(masses.sum())
        rest_volume = signed_volume(mesh)
        if not rest_volume > 0:
            raise ValidationError(
                "mesh volume must be positive (outward-oriented faces)"
            )
        self.rest_volume = rest_volume
        # Prestress: shrink the stress-free reference uniformly so the
        # equibiaxial membrane tension at the inflated shape balances
        # Pg0 * R / 2 for the volume-equivalent sphere.  Without real
        # tension the pressure follower load makes transverse perturbation
        # modes unstable (the membrane has no bending stiffness).
        r_eq = (3.0 * rest_volume / (4.0 * math.pi)) ** (1.0 / 3.0)
        self.prestretch = _equibiaxial_stretch(
            material, material.Pg0 * r_eq / 2.0
        )
        l1 = l1 / self.prestretch
        proj = proj / self.prestretch
        l2 = l2 / self.prestretch
        # rest shape matrix Dm = [[l1, proj], [0, l2]] and its inverse
        dm_inv = np.zeros((len(self.faces), 2, 2))
        dm_inv[:, 0, 0] = 1.0 / l1
        dm_inv[:, 0, 1] = -proj / (l1 * l2)
        dm_inv[:, 1, 1] = 1.0 / l2
        self.dm_inv = dm_inv
        self.rest_area = 0.5 * l1 * l2
        # constant offset absorbing the residual imbalance at init
        # (zero for a perfect sphere; reported for irregular shapes)
        self.pressure_offset = -(
            self._pressure_forces(x, material.Pg0) + self._elastic_forces(x, 0)
        )
        self.offset_residual = float(
            np.abs(self.pressure_offset).max()
        )

    def _pressure_forces(self, x: np.ndarray, pg: float) -> np.ndarray:
        """Pg times face vector area, lumped equally to the face's vertices."""
        i0, i1, i2 = self.faces[:, 0], self.faces[:, 1], self.faces[:, 2]
        vec_area = 0.5 * np.cross(x[i1] - x[i0], x[i2] - x[i0])
        f = np.zeros_like(x)
        np.add.at(f, self.faces.ravel(), np.repeat(pg * vec_area / 3.0, 3, axis=0))
        return f

    def _elastic_forces(self, x: np.ndarray, frame: int) -> np.ndarray:
        """Neo-Hookean membrane forces (plane-stress, thickness-integrated)."""
        mat = self.material
        i0, i1, i2 = self.faces[:, 0], self.faces[:, 1], self.faces[:, 2]
        d = np.stack([x[i1] - x[i0], x[i2] - x[i0]], axis=2)  # (nf, 3, 2)
        f_grad = d @ self.dm_inv  # deformation gradient, (nf, 3, 2)
        c = np.einsum("fij,fik->fjk", f_grad, f_grad)  # right Cauchy-Green
        det_c = c[:, 0, 0] * c[:, 1, 1] - c[:, 0, 1] * c[:, 1, 0]
        if np.any(det_c <= 1e-16):
            bad = int(np.nonzero(det_c <= 1e-16)[0][0])
            raise SimulationInstabilityError(
                "membrane element collapsed (det C -> 0)", face_id=bad, frame=frame
            )
        c_inv = np.empty_like(c)
        c_inv[:, 0, 0] = c[:, 1, 1]
        c_inv[:, 1, 1] = c[:, 0, 0]
        c_inv[:, 0, 1] = -c[:, 0, 1]
        c_inv[:, 1, 0] = -c[:, 1, 0]
        c_inv /= det_c[:, None, None]
        log_j = 0.5 * np.log(det_c)
        eye = np.eye(2)
        # first Piola-Kirchhoff stress P = F (mu (I - C^-1) + lam ln J C^-1)
        s = mat.mu * (eye - c_inv) + (mat.lam * log_j)[:, None, None] * c_inv
        p = f_grad @ s
        h_mat = -(self.rest_area * mat.h)[:, None, None] * (
            p @ np.transpose(self.dm_inv, (0, 2, 1))
        )
        f = np.zeros_like(x)
        f1 = h_mat[:, :, 0]
        f2 = h_mat[:, :, 1]
        np.add.at(f, i1, f1)
        np.add.at(f, i2, f2)
        np.add.at(f, i0, -f1 - f2)
        return f

    def internal_forces(self, x: np.ndarray, pg: float, frame: int) -> np.ndarray:
        """Elastic + pressure + prestress offset (sums to ~0 at rest)."""
        return (
            self._elastic_forces(x, frame)
            + self._pressure_forces(x, pg)
            + self.pressure_offset
        )


@dataclass(frozen=True)
class SimState:
    """Snapshot of the membrane simulation at one instant."""

    mesh: TriMesh
    velocities: np.ndarray  # (n, 3) m/s
    rest_mesh: TriMesh
    volume: float  # m^3
    Pg: float  # Pa
    time: float  # s
    # per-plane contact bookkeeping: (in_contact, incoming COM normal speed)
    contact_state: tuple = ()
    _model: _MembraneModel | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.velocities, dtype=float)
        if v.shape != (self.mesh.n_vertices, 3):
            raise ValidationError(
                f"velocities must have shape ({self.mesh.n_vertices}, 3)"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "velocities", v)
        if not (self.volume > 0):
            raise ValidationError("volume must be > 0")

    @property
    def kinetic_energy(self) -> float:
        m = self._model.masses
        return float(0.5 * np.sum(m * np.sum(self.velocities**2, axis=1)))

    @property
    def centroid(self) -> np.ndarray:
        """Center of mass of the lumped vertex masses."""
        m = self._model.masses
        return (m[:, None] * self.mesh.vertices).sum(axis=0) / m.sum()

    @property
    def momentum(self) -> np.ndarray:
        m = self._model.masses
        return (m[:, None] * self.velocities).sum(axis=0)

    @property
    def total_mass(self) -> float:
        return self._model.total_mass


def init_sim(mesh: TriMesh, material: MaterialSpec) -> SimState:
    """Build the initial quiescent state from a watertight inflated mesh."""
    if not mesh.is_watertight:
        raise TopologyError(
            "mesh must be watertight for pressure/volume computations",
            boundary_edges=mesh.boundary_edges(),
        )
    model = _MembraneModel(mesh, material)
    return SimState(
        mesh=mesh,
        velocities=np.zeros((mesh.n_vertices, 3)),
        rest_mesh=mesh,
        volume=model.rest_volume,
        Pg=material.Pg0,
        time=0.0,
        contact_state=(),
        _model=model,
    )


def _gas_pressure(model: _MembraneModel, volume: float) -> float:
    mat = model.material
    if mat.gas_model == "isothermal":
        return (P_ATM + mat.Pg0) * model.rest_volume / volume - P_ATM
    return mat.Pg0


def step(
    state: SimState,
    config: ScenarioConfig,
    pinned: np.ndarray | None = None,
    pinned_positions: np.ndarray | None = None,
) -> SimState:
    """Advance one semi-implicit Euler step of size config.dt.

    Optional pinned vertices are held at pinned_positions with zero
    velocity (used by indent_virtual's point constraint).  Deterministic:
    identical inputs produce bit-identical successors.
    """
    model = state._model
    dt = config.dt
    frame = int(round(state.time / dt))
    x = state.mesh.vertices
    v = state.velocities.copy()
    m = model.masses[:, None]

    forces = model.internal_forces(x, state.Pg, frame)
    forces += m * np.asarray(config.gravity)
    if config.damping > 0:
        forces -= config.damping * m * v
    v = v + dt * forces / m

    # frictionless plane contacts with per-episode restitution
    prev = state.contact_state
    if len(prev) != len(config.planes):
        prev = ((False, 0.0),) * len(config.planes)
    new_contact = []
    com_v = (model.masses[:, None] * v).sum(axis=0) / model.total_mass
    x_new = x + dt * v
    for k, plane in enumerate(config.planes):
        n_hat = np.asarray(plane.normal)
        p0 = np.asarray(plane.point)
        dist = (x_new - p0) @ n_hat
        touching = dist < CONTACT_TOL
        was_in, v_in = prev[k]
        if touching.any():
            if not was_in:
                # entering contact: record incoming COM normal speed
                v_in = max(0.0, -float(com_v @ n_hat))
            # project penetrating vertices; remove inward normal velocity
            pen = dist < 0
            if pen.any():
                x_new[pen] -= dist[pen, None] * n_hat
                vn = v[pen] @ n_hat
                inward = vn < 0
                v[np.nonzero(pen)[0][inward]] -= vn[inward, None] * n_hat
            new_contact.append((True, v_in))
        else:
            if was_in:
                # separation: set outgoing COM normal speed to e * v_in
                out = float(com_v @ n_hat)
                shift = config.restitution * v_in - out
                v = v + shift * n_hat
                x_new = x + dt * v
            new_contact.append((False, 0.0))

    if pinned is not None:
        x_new[pinned] = pinned_positions
        v[pinned] = 0.0

    if not np.isfinite(x_new).all() or not np.isfinite(v).all():
        raise SimulationInstabilityError(
            "non-finite state after step", frame=frame + 1
        )

    mesh = state.mesh.with_vertices(x_new)
    volume = signed_volume(mesh)
    if not volume > 0:
        raise SimulationInstabilityError("enclosed volume collapsed", frame=frame + 1)
    return replace(
        state,
        mesh=mesh,
        velocities=v,
        volume=volume,
        Pg=_gas_pressure(model, volume),
        time=state.time + dt,
        contact_state=tuple(new_contact),
    )


def run(state: SimState, config: ScenarioConfig) -> SimState:
    """Step for config.duration seconds."""
    n_steps = int(round(config.duration / config.dt))
    for _ in range(n_steps):
        state = step(state, config)
    return state


RELAX_FORCE_TOL = 1e-4  # N, max net vertex force at quasi-static equilibrium
RELAX_DAMPING = 50.0  # 1/s viscous rate during relaxation


def _relax(state, config, pinned, pinned_pos, max_steps):
    """Damped stepping to quasi-static equilibrium.

    Stops when kinetic energy is below RELAX_KE_TOL and the largest net
    force on any free vertex is below RELAX_FORCE_TOL (kinetic energy
    alone can vanish far from equilibrium under strong damping).
    """
    model = state._model
    relax_cfg = replace(config, damping=max(config.damping, RELAX_DAMPING))
    free = np.ones(state.mesh.n_vertices, dtype=bool)
    free[pinned] = False
    check_every = 200
    for i in range(max_steps):
        state = step(state, relax_cfg, pinned=pinned, pinned_positions=pinned_pos)
        if state.kinetic_energy < RELAX_KE_TOL and (i + 1) % check_every == 0:
            frame = int(round(state.time / relax_cfg.dt))
            f = model.internal_forces(state.mesh.vertices, state.Pg, frame)
            f += model.masses[:, None] * np.asarray(relax_cfg.gravity)
            if np.linalg.norm(f[free], axis=1).max() < RELAX_FORCE_TOL:
                return state
    raise RelaxationTimeoutError(
        f"kinetic energy {state.kinetic_energy:.3e} J / force residual still "
        f"above tolerance after {max_steps} steps"
    )


def equivalent_radius(state: SimState) -> float:
    """Radius of the sphere with the state's enclosed volume."""
    return (3.0 * state.volume / (4.0 * math.pi)) ** (1.0 / 3.0)


def indent_virtual(
    state: SimState,
    config: ScenarioConfig,
    target_depth: float,
    n_levels: int | None = None,
    max_relax_steps: int = 200_000,
    object_id: str = "simulated",
) -> IndentationSeries:
    """Quasi-static point indentation; returns the measured force-depth series.

    The indenter vertex advances along the axis in depth increments, the
    membrane relaxes to quasi-static equilibrium (damped, kinetic energy
    below 1e-6 J) at each level, and the constraint reaction force is
    recorded.  A cap of vertices around the antipode of the indentation
    axis is held fixed as the support (otherwise the pin would simply
    translate the whole object).  R is the volume-equivalent sphere
    radius, h the material thickness.
    """
    if config.indenter is None:
        raise ValidationError("config.indenter must be set")
    if not (target_depth > 0):
        raise InsufficientDataError(
            f"target_depth must be > 0 to collect samples, got {target_depth}"
        )
    ind = config.indenter
    if not (0 <= ind.vertex < state.mesh.n_vertices):
        raise ValidationError(f"indenter vertex {ind.vertex} out of range")
    if n_levels is None:
        n_levels = max(3, math.ceil(target_depth / 0.005))
    if n_levels < 3:
        raise InsufficientDataError("need at least 3 depth levels")

    axis = np.asarray(ind.axis)
    x = state.mesh.vertices
    x0 = x[ind.vertex].copy()
    radius = equivalent_radius(state)
    model = state._model
    # support: hold the 30-degree cap around the axis antipode fixed
    centered = x - x.mean(axis=0)
    along = centered @ axis
    cap = along >= np.linalg.norm(centered, axis=1) * math.cos(math.radians(30.0))
    cap[ind.vertex] = False
    support = np.nonzero(cap)[0]
    pinned = np.concatenate(([ind.vertex], support))
    support_pos = x[support]
    # per-step advance keeps the constrained vertex at quasi-static speed
    advance_per_step = ind.speed * config.dt
    advance_cfg = replace(config, damping=max(config.damping, RELAX_DAMPING))

    samples = []
    depth = 0.0
    for level in range(1, n_levels + 1):
        depth_target = target_depth * level / n_levels
        while depth < depth_target:
            depth = min(depth + advance_per_step, depth_target)
            pos = np.vstack([(x0 + depth * axis)[None, :], support_pos])
            state = step(state, advance_cfg, pinned=pinned, pinned_positions=pos)
        state = _relax(state, config, pinned, pos, max_relax_steps)
        frame = int(round(state.time / config.dt))
        f_applied = model.internal_forces(state.mesh.vertices, state.Pg, frame)[
            ind.vertex
        ] + model.masses[ind.vertex] * np.asarray(config.gravity)
        # the constraint balances the applied force; the indenter feels -f
        reaction = -float(f_applied @ axis)
        if reaction <= 0:
            raise SimulationInstabilityError(
                f"non-positive reaction force {reaction:.3e} N at depth {depth}",
                frame=frame,
            )
        samples.append(IndentationSample(force=reaction, depth=depth))

    return IndentationSeries(
        samples=tuple(samples),
        object_id=object_id,
        region_radius=radius,
        region_thickness=model.material.h,
    )


def measure_deformation(
    state: SimState,
    plane_point=(0.0, 0.0, 0.0),
    plane_normal=(0.0, 0.0, 1.0),
    contact_tol: float = CONTACT_TOL,
) -> dict:
    """Deformation descriptors of a vertically loaded state.

    H: total height; Dl: diameter of the ground-contact set; Du: diameter
    of the rim ring around the vertical axis; d: rim-to-apex depth of the
    sunken region.  The vertical axis passes through the horizontal
    centroid.
    """
    n_hat = np.asarray(plane_normal, dtype=float)
    n_hat = n_hat / np.linalg.norm(n_hat)
    p0 = np.asarray(plane_point, dtype=float)
    x = state.mesh.vertices
    height = (x - p0) @ n_hat
    h_total = float(height.max() - height.min())

    on_plane = np.abs((x - p0) @ n_hat) <= contact_tol
    if not on_plane.any():
        raise EmptyContactError("no vertices within tolerance of the ground plane")
    lateral = x - np.outer(height, n_hat)
    pts = lateral[on_plane]
    d_l = float(
        max(
            (np.linalg.norm(pts[i] - pts[j]) for i in range(len(pts)) for j in range(i)),
            default=0.0,
        )
    )

    # rim of the sunken region: the highest ring around the vertical axis
    center = lateral.mean(axis=0)
    radial = np.linalg.norm(lateral - center, axis=1)
    z_max = height.max()
    rim_band = height >= z_max - max(contact_tol, 0.01 * h_total)
    d_u = float(2.0 * radial[rim_band].mean())
    # apex of the dip: the on-axis vertex at the top
    top_half = height >= height.min() + 0.5 * h_total
    idx_top = np.nonzero(top_half)[0]
    apex = idx_top[np.argmin(radial[idx_top])]
    d_depth = float(z_max - height[apex])
    return {"H": h_total, "Du": d_u, "Dl": d_l, "d": d_depth}
