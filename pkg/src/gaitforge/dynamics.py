"""Reduced-coordinate rigid-body simulation with penalty ground contact.

The model is deliberately compact rather than high-fidelity: the base is
a free 6-DoF rigid body carrying the robot's whole mass with an
isotropic rotational inertia, and each hinge joint integrates
independently against a lumped inertia compiled from its rest-pose
subtree.  Legs are therefore kinematic from the base's point of view;
ground contact on the feet acts on the base (force at the contact point,
torque about the base origin) but does not react through joint
coordinates.  The isotropic base inertia makes the gyroscopic torque
identically zero, so a torque-free base in zero gravity conserves linear
and angular momentum to roundoff.

Contact is a spring-damper penalty on spheres: normal force
k_n * penetration - c_n * normal velocity (clamped nonnegative),
tangential force viscous (-c_t * slip velocity) capped at mu times the
normal force.  All geoms collide with the ground plane z = 0 only.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import kernels, mathutil
from .errors import DimensionMismatch, InvalidInput, NumericalBlowup
from .model import MorphologySpec, joint_order, leg_partition

STATE_BASE_DIM = 13  # pos(3) + quat(4) + linvel(3) + angvel(3)


@dataclass(frozen=True)
class SimParams:
    """Integrator and contact constants.

    dt_sub and frame_skip fix the control period at 0.05 s.  k_lim is a
    soft spring engaging outside joint limits; joint_damping bleeds off
    energy the penalty contact would otherwise pump into the joints.
    """

    gravity: float = 9.81
    dt_sub: float = 0.002
    frame_skip: int = 25
    k_n: float = 2.0e4
    c_n: float = 200.0
    c_t: float = 400.0
    mu: float = 1.0
    joint_damping: float = 0.1
    k_lim: float = 60.0
    penetration_cap: float = 0.05

    @property
    def control_dt(self) -> float:
        return self.dt_sub * self.frame_skip


@dataclass
class SimState:
    """Full mechanical state plus elapsed simulated time.

    base_angvel is expressed in the body frame; everything else is world
    frame.  as_vector/from_vector define the canonical flat layout used
    by the kernel and by snapshot serialisation.
    """

    base_pos: np.ndarray
    base_quat: np.ndarray
    base_linvel: np.ndarray
    base_angvel: np.ndarray
    q_joints: np.ndarray
    qd_joints: np.ndarray
    time: float = 0.0

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.base_pos,
                self.base_quat,
                self.base_linvel,
                self.base_angvel,
                self.q_joints,
                self.qd_joints,
            ]
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray, time: float = 0.0) -> "SimState":
        vec = np.asarray(vec, dtype=np.float64)
        n_u = (vec.shape[0] - STATE_BASE_DIM) // 2
        return cls(
            base_pos=vec[0:3].copy(),
            base_quat=vec[3:7].copy(),
            base_linvel=vec[7:10].copy(),
            base_angvel=vec[10:13].copy(),
            q_joints=vec[13 : 13 + n_u].copy(),
            qd_joints=vec[13 + n_u : 13 + 2 * n_u].copy(),
            time=time,
        )

    def copy(self) -> "SimState":
        return SimState.from_vector(self.as_vector(), self.time)


@dataclass
class ContactState:
    """External contact measurements at one state.

    wrenches[i] = (force, torque-about-body-origin) on body i in world
    frame; rows of bodies not in contact are exactly zero.  foot_heights
    are foot sphere bottom heights, one per leg in leg order.
    """

    wrenches: np.ndarray
    foot_heights: np.ndarray


class CompiledModel:
    """Kernel-ready arrays derived from a MorphologySpec.

    Lumped inertias are evaluated once at the default configuration:
    the base gets an isotropic moment (own inertia plus 2/3 m d^2 per
    body, the isotropic average of a point mass at distance d), each
    joint the rest-pose moment of its subtree about its pivot.
    """

    def __init__(self, spec: MorphologySpec):
        self.spec = spec
        nb = spec.n_body
        n_u = spec.n_u
        bodies = spec.bodies

        self.parent = np.array([b.parent for b in bodies], dtype=np.int64)
        self.attach = np.array([b.attach for b in bodies], dtype=np.float64)
        self.r0mat = np.stack(
            [mathutil.quat_to_mat(np.asarray(b.r0, dtype=np.float64)) for b in bodies]
        )
        axis = np.zeros((nb, 3))
        jointof = np.full(nb, -1, dtype=np.int64)
        order = joint_order(spec)
        for j, bi in enumerate(order):
            a = np.asarray(bodies[bi].axis, dtype=np.float64)
            axis[bi] = a / np.linalg.norm(a)
            jointof[bi] = j
        self.axis = axis
        self.jointof = jointof
        self.jbody = np.array(order, dtype=np.int64)

        self.geom_off = np.array(
            [b.geom_offset if b.geom_offset is not None else (0.0, 0.0, 0.0) for b in bodies]
        )
        self.geom_r = np.array(
            [b.geom_radius if b.geom_radius is not None else -1.0 for b in bodies]
        )
        legs = leg_partition(spec)
        self.foot_body = np.array(
            [next(i for i in leg if bodies[i].is_foot) for leg in legs], dtype=np.int64
        )

        self.gear = np.asarray(spec.gear, dtype=np.float64)
        self.lim_lo = np.array([lo for lo, _ in spec.joint_limits])
        self.lim_hi = np.array([hi for _, hi in spec.joint_limits])
        self.q_def = np.asarray(spec.q_def, dtype=np.float64)

        self.total_mass = float(sum(b.mass for b in bodies))

        # rest-pose forward kinematics at q_def, base at origin
        rot = [None] * nb
        org = [None] * nb
        for i, b in enumerate(bodies):
            r0 = mathutil.quat_to_mat(np.asarray(b.r0, dtype=np.float64))
            if jointof[i] >= 0:
                r0 = r0 @ mathutil.mat_from_axis_angle(axis[i], self.q_def[jointof[i]])
            if b.parent < 0:
                rot[i] = r0
                org[i] = np.zeros(3)
            else:
                rot[i] = rot[b.parent] @ r0
                org[i] = org[b.parent] + rot[b.parent] @ self.attach[i]
        com_world = [org[i] + rot[i] @ np.asarray(bodies[i].com) for i in range(nb)]

        base_i = bodies[0].inertia
        for i in range(1, nb):
            d2 = float(com_world[i] @ com_world[i])
            base_i += (2.0 / 3.0) * bodies[i].mass * d2
        self.base_inertia = float(base_i)

        subtree = [[] for _ in range(nb)]
        for i in range(nb - 1, -1, -1):
            subtree[i].append(i)
            if bodies[i].parent >= 0:
                subtree[bodies[i].parent].extend(subtree[i])
        ji = np.empty(n_u)
        for j, bi in enumerate(order):
            pivot = org[bi]
            total = 0.0
            for k in subtree[bi]:
                d = com_world[k] - pivot
                total += bodies[k].mass * float(d @ d) + bodies[k].inertia
            ji[j] = max(total, 1e-8)
        self.joint_inertia = ji

        self.n_body = nb
        self.n_u = n_u
        self.n_legs = spec.n_legs


@functools.lru_cache(maxsize=None)
def compile_model(spec: MorphologySpec) -> CompiledModel:
    return CompiledModel(spec)


def default_state(spec: MorphologySpec, z: float | None = None) -> SimState:
    """Rest state: base level at z (default: middle of the healthy band),
    joints at q_def, all velocities zero."""
    if z is None:
        z = 0.5 * (spec.healthy_z[0] + spec.healthy_z[1])
    return SimState(
        base_pos=np.array([0.0, 0.0, float(z)]),
        base_quat=np.array([1.0, 0.0, 0.0, 0.0]),
        base_linvel=np.zeros(3),
        base_angvel=np.zeros(3),
        q_joints=np.asarray(spec.q_def, dtype=np.float64).copy(),
        qd_joints=np.zeros(spec.n_u),
        time=0.0,
    )


def apply_action(action: np.ndarray, spec: MorphologySpec) -> np.ndarray:
    """Per-joint torques: clip(action, -1, 1) * gear."""
    a = np.asarray(action, dtype=np.float64)
    if a.shape != (spec.n_u,):
        raise DimensionMismatch(
            f"action shape {a.shape} != ({spec.n_u},) for morphology {spec.name!r}"
        )
    if not np.all(np.isfinite(a)):
        raise InvalidInput("action contains non-finite entries")
    return np.clip(a, -1.0, 1.0) * compile_model(spec).gear


def _run_kernel(spec, params, state, torques, n_sub, dt, backend):
    m = compile_model(spec)
    vec = state.as_vector()
    wrench = np.zeros((m.n_body, 6))
    foot_h = np.zeros(m.n_legs)
    kern = kernels.get_kernel(backend)
    blown = kern(
        vec,
        np.asarray(torques, dtype=np.float64),
        n_sub,
        dt,
        m.parent,
        m.jointof,
        m.attach,
        m.r0mat,
        m.axis,
        m.geom_off,
        m.geom_r,
        m.total_mass,
        m.base_inertia,
        m.joint_inertia,
        m.lim_lo,
        m.lim_hi,
        params.k_lim,
        params.joint_damping,
        params.gravity,
        params.k_n,
        params.c_n,
        params.c_t,
        params.mu,
        m.foot_body,
        wrench,
        foot_h,
    )
    new_state = SimState.from_vector(vec, state.time + n_sub * dt)
    contact = ContactState(wrenches=wrench, foot_heights=foot_h)
    if blown:
        raise NumericalBlowup(
            f"state entry exceeded {kernels.BLOWUP_LIMIT:g} at t={new_state.time:.3f}s"
        )
    return new_state, contact


def substep(
    state: SimState,
    torques: np.ndarray,
    dt_sub: float,
    spec: MorphologySpec,
    params: SimParams | None = None,
    backend: str | None = None,
):
    """One semi-implicit Euler substep; returns (SimState, ContactState)."""
    if dt_sub <= 0:
        raise InvalidInput(f"dt_sub must be positive, got {dt_sub}")
    if params is None:
        params = SimParams()
    return _run_kernel(spec, params, state, torques, 1, dt_sub, backend)


def control_step(
    state: SimState,
    action: np.ndarray,
    spec: MorphologySpec,
    params: SimParams | None = None,
    backend: str | None = None,
):
    """Apply one action for frame_skip substeps; returns (SimState, ContactState).

    The returned contact state is measured at the final state, so its
    wrenches are the ones an observation of that state should contain.
    """
    if params is None:
        params = SimParams()
    torques = apply_action(action, spec)
    return _run_kernel(
        spec, params, state, torques, params.frame_skip, params.dt_sub, backend
    )


def measure_contacts(
    state: SimState,
    spec: MorphologySpec,
    params: SimParams | None = None,
    backend: str | None = None,
) -> ContactState:
    """Contact wrenches and foot heights at a state, with no integration."""
    if params is None:
        params = SimParams()
    _, contact = _run_kernel(
        spec, params, state, np.zeros(spec.n_u), 0, params.dt_sub, backend
    )
    return contact


def body_poses(state: SimState, spec: MorphologySpec):
    """World origin and rotation of every body, for replay dumps."""
    m = compile_model(spec)
    nb = m.n_body
    R = np.empty((nb, 3, 3))
    O = np.empty((nb, 3))
    R[0] = mathutil.quat_to_mat(state.base_quat)
    O[0] = state.base_pos
    for i in range(1, nb):
        pa = m.parent[i]
        mount = R[pa] @ m.r0mat[i]
        j = m.jointof[i]
        if j >= 0:
            mount = mount @ mathutil.mat_from_axis_angle(m.axis[i], state.q_joints[j])
        R[i] = mount
        O[i] = O[pa] + R[pa] @ m.attach[i]
    return O, R


class Simulator:
    """Mutable-state convenience wrapper over the functional layer.

    Single-threaded; independent instances share nothing and may run
    concurrently.
    """

    def __init__(
        self,
        spec: MorphologySpec,
        params: SimParams | None = None,
        backend: str | None = None,
    ):
        self.spec = spec
        self.params = params if params is not None else SimParams()
        self.backend = backend if backend is not None else kernels.default_backend()
        self.model = compile_model(spec)
        self.state = default_state(spec)
        self.contact = measure_contacts(self.state, spec, self.params, self.backend)

    def reset(self, state: SimState | None = None) -> SimState:
        self.state = state.copy() if state is not None else default_state(self.spec)
        self.contact = measure_contacts(
            self.state, self.spec, self.params, self.backend
        )
        return self.state

    def step(self, action: np.ndarray):
        self.state, self.contact = control_step(
            self.state, action, self.spec, self.params, self.backend
        )
        return self.state, self.contact
