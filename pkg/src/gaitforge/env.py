"""Episode shell: reset/step contract over dynamics, reward, and clock.

Observation layout, concatenated in this fixed order (float64):

  block 1  posture   [z_torso, base quaternion wxyz, q_joints]
  block 2  velocity  [base linear velocity (world), base angular
                      velocity (body frame), qd_joints]
  block 3  contact   per-body 6D wrenches clipped to [-1, 1], flattened
                     in body order (torso first, then legs root-to-tip)
  block 4  phase     [sin phi, cos phi]

Total length 13 + 2*n_u + 6*n_body.  Horizontal base coordinates are
deliberately absent, so the observation is translation invariant in the
plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .dynamics import ContactState, SimParams, SimState
from .errors import DimensionMismatch, InvalidInput, NotReset, NumericalBlowup
from .model import MorphologySpec, load_morphology
from .reward import GaitClock, RewardBreakdown, ZERO_BREAKDOWN_FIELDS, advance_clock, total_reward

_PARAM_OVERRIDES = ("gravity", "k_n", "c_n", "c_t", "mu", "joint_damping")
_ENV_OVERRIDES = ("reset_z", "reset_q", "reset_noise", "horizon")


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict


def observe(state: SimState, contact: ContactState, clock: GaitClock, spec: MorphologySpec):
    """Assemble the four observation blocks at one state."""
    clipped = np.clip(contact.wrenches, -1.0, 1.0)
    return np.concatenate(
        [
            [state.base_pos[2]],
            state.base_quat,
            state.q_joints,
            state.base_linvel,
            state.base_angvel,
            state.qd_joints,
            clipped.reshape(-1),
            [math.sin(clock.phi), math.cos(clock.phi)],
        ]
    )


class Env:
    """One seeded episode stream for one morphology.

    overrides may adjust contact/integrator constants (gravity, k_n,
    c_n, c_t, mu, joint_damping) and reset behaviour (reset_z, reset_q,
    reset_noise, horizon).  Instances are independent and single
    threaded; the per-step info dict's field names are stable API.
    """

    def __init__(self, morphology, seed: int | None = None, overrides: dict | None = None,
                 backend: str | None = None):
        if isinstance(morphology, MorphologySpec):
            self.spec = morphology
        else:
            self.spec = load_morphology(morphology)
        ov = dict(overrides) if overrides else {}
        unknown = set(ov) - set(_PARAM_OVERRIDES) - set(_ENV_OVERRIDES)
        if unknown:
            raise InvalidInput(f"unknown override keys: {sorted(unknown)}")
        params = SimParams(**{k: float(ov[k]) for k in _PARAM_OVERRIDES if k in ov})
        self.params = params
        self.backend = backend
        self.horizon = int(ov.get("horizon", self.spec.horizon))
        self._reset_z = ov.get("reset_z")
        self._reset_q = None if ov.get("reset_q") is None else np.asarray(
            ov["reset_q"], dtype=np.float64
        )
        if self._reset_q is not None and self._reset_q.shape != (self.spec.n_u,):
            raise DimensionMismatch(
                f"reset_q shape {self._reset_q.shape} != ({self.spec.n_u},)"
            )
        self._reset_noise = float(ov.get("reset_noise", 0.01))
        self._seed = seed

        self.state: SimState | None = None
        self.contact: ContactState | None = None
        self.clock = GaitClock(phi=0.0, f_g=self.spec.f_g)
        self.a_prev = np.zeros(self.spec.n_u)
        self.step_index = 0
        self._done = True

    @property
    def obs_dim(self) -> int:
        return self.spec.obs_dim

    @property
    def n_u(self) -> int:
        return self.spec.n_u

    @property
    def control_dt(self) -> float:
        return self.params.control_dt

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Start a new episode; returns the initial observation."""
        if seed is None:
            seed = self._seed
        rng = np.random.default_rng(seed)
        z = self._reset_z
        if z is None:
            z = 0.5 * (self.spec.healthy_z[0] + self.spec.healthy_z[1])
        q0 = self._reset_q if self._reset_q is not None else np.asarray(
            self.spec.q_def, dtype=np.float64
        )
        noise = rng.uniform(-self._reset_noise, self._reset_noise, self.spec.n_u)
        state = dynamics.default_state(self.spec, z=float(z))
        state.q_joints = q0 + noise
        self.state = state
        self.contact = dynamics.measure_contacts(
            state, self.spec, self.params, self.backend
        )
        self.clock = GaitClock(phi=0.0, f_g=self.spec.f_g)
        self.a_prev = np.zeros(self.spec.n_u)
        self.step_index = 0
        self._done = False
        return observe(self.state, self.contact, self.clock, self.spec)

    def step(self, action) -> StepResult:
        if self.state is None or self._done:
            raise NotReset("episode is not active; call reset() first")
        a = np.asarray(action, dtype=np.float64)
        if a.shape != (self.spec.n_u,):
            raise DimensionMismatch(
                f"action shape {a.shape} != ({self.spec.n_u},)"
            )
        if not np.all(np.isfinite(a)):
            raise InvalidInput("action contains non-finite entries")
        a = np.clip(a, -1.0, 1.0)

        blowup = False
        try:
            self.state, self.contact = dynamics.control_step(
                self.state, a, self.spec, self.params, self.backend
            )
        except NumericalBlowup:
            blowup = True

        self.clock = advance_clock(self.clock, self.params.control_dt)
        self.step_index += 1

        if blowup:
            # state is unusable; report failure against the last valid view
            breakdown = RewardBreakdown(
                **ZERO_BREAKDOWN_FIELDS,
                stance_target=(False,) * self.spec.n_legs,
                stance_actual=(False,) * self.spec.n_legs,
                n_errors=0,
            )
            obs = observe(self.state, self.contact, self.clock, self.spec)
            terminated = True
            truncated = False
            v_x = float("nan")
            z = float("nan")
        else:
            breakdown = total_reward(
                self.state, self.contact, a, self.a_prev, self.clock, self.spec
            )
            obs = observe(self.state, self.contact, self.clock, self.spec)
            z = float(self.state.base_pos[2])
            v_x = float(self.state.base_linvel[0])
            z_min, z_max = self.spec.healthy_z
            terminated = not (z_min <= z <= z_max)
            truncated = (not terminated) and self.step_index >= self.horizon

        self.a_prev = a
        self._done = terminated or truncated
        info = {
            "breakdown": breakdown.terms(),
            "stance_target": breakdown.stance_target,
            "stance_actual": breakdown.stance_actual,
            "n_errors": breakdown.n_errors,
            "phi": self.clock.phi,
            "v_x": v_x,
            "z_torso": z,
            "step": self.step_index,
            "blowup": blowup,
        }
        return StepResult(
            observation=obs,
            reward=breakdown.total,
            terminated=terminated,
            truncated=truncated,
            info=info,
        )
