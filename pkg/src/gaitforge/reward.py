"""Ten-term locomotion reward and the gait phase clock.

Every term is a pure function; total_reward composes them into a
RewardBreakdown whose total is the signed sum of the parts.  The stance
schedule comparison lives in one place (stance_split) and is shared with
the gait generator, so the reward's target stance and the generator's
stance/swing mode can never disagree, not even at phase boundaries.

Conventions fixed here: the healthy height band is inclusive on both
ends, actual and target stance use strict less-than, v_x is the world
x velocity of the base, and roll/pitch rates come from the body-frame
angular velocity with yaw left unpenalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput
from .model import TWO_PI, MorphologySpec


@dataclass(frozen=True)
class GaitClock:
    phi: float
    f_g: float


def advance_clock(clock: GaitClock, dt: float) -> GaitClock:
    """New clock advanced by dt seconds: phi' = (phi + 2*pi*f_g*dt) mod 2*pi."""
    if dt < 0:
        raise InvalidInput(f"dt must be nonnegative, got {dt}")
    if dt == 0.0:
        return clock
    phi = math.fmod(clock.phi + TWO_PI * clock.f_g * dt, TWO_PI)
    return GaitClock(phi=phi, f_g=clock.f_g)


def stance_split(phi: float, delta: float, duty: float):
    """(in_stance, leg-local phase m) for one leg.

    m = (phi + delta) mod 2*pi; stance iff m < 2*pi*duty.  Single source
    of truth for the schedule; target_stance and the gait generator both
    call this, which keeps their boundary behaviour identical.
    """
    m = math.fmod(phi + delta, TWO_PI)
    return m < TWO_PI * duty, m


def target_stance(phi: float, delta_i: float, duty: float) -> bool:
    return stance_split(phi, delta_i, duty)[0]


def actual_stance(z_foot: float, z_thr: float) -> bool:
    return z_foot < z_thr


def forward_reward(v_x: float, spec: MorphologySpec) -> float:
    """Tent over v_x: peak w_fwd at v_star, zero outside v_star +/- sigma_v."""
    return spec.weights.w_fwd * max(0.0, 1.0 - abs(v_x - spec.v_star) / spec.sigma_v)


def healthy_bonus(z_torso: float, spec: MorphologySpec) -> float:
    z_min, z_max = spec.healthy_z
    return spec.weights.w_h if z_min <= z_torso <= z_max else 0.0


def gait_terms(stance_actual_flags, stance_target_flags, spec: MorphologySpec):
    """(bonus, cost, n_errors) from per-leg stance agreement."""
    n = spec.n_legs
    if len(stance_actual_flags) != n or len(stance_target_flags) != n:
        raise DimensionMismatch(
            f"stance flag lengths ({len(stance_actual_flags)}, "
            f"{len(stance_target_flags)}) != n_legs ({n})"
        )
    n_errors = sum(
        1 for a, t in zip(stance_actual_flags, stance_target_flags) if bool(a) != bool(t)
    )
    bonus = spec.weights.w_gb * (1.0 - n_errors / n)
    cost = spec.weights.w_gc * float(n_errors)
    return bonus, cost, n_errors


def action_costs(a_t, a_prev, spec: MorphologySpec):
    """(c_ctrl, c_smooth): squared magnitude and squared change of the action."""
    a_t = np.asarray(a_t, dtype=np.float64)
    a_prev = np.asarray(a_prev, dtype=np.float64)
    if a_t.shape != (spec.n_u,) or a_prev.shape != (spec.n_u,):
        raise DimensionMismatch(
            f"action shapes {a_t.shape}, {a_prev.shape} != ({spec.n_u},)"
        )
    c_ctrl = spec.w_c * float(a_t @ a_t)
    d = a_t - a_prev
    c_smooth = spec.weights.w_s * float(d @ d)
    return c_ctrl, c_smooth


def safety_costs(contact, angvel, v_z: float, spec: MorphologySpec):
    """(c_contact, c_ang, c_zvel).

    c_contact squares the clipped wrench matrix; the clip matches the
    observation's [-1,1] clip on raw values, with contact_clip_scale
    applied first (default 1.0, making the clip aggressive by design).
    c_ang penalises body-frame roll and pitch rates; yaw stays free.
    """
    wr = np.asarray(contact.wrenches, dtype=np.float64)
    if wr.ndim != 2 or wr.shape != (spec.n_body, 6):
        raise DimensionMismatch(
            f"wrench matrix shape {wr.shape} != ({spec.n_body}, 6)"
        )
    clipped = np.clip(wr * spec.contact_clip_scale, -1.0, 1.0)
    c_contact = spec.weights.w_cc * float(np.sum(clipped * clipped))
    w_roll = float(angvel[0])
    w_pitch = float(angvel[1])
    c_ang = spec.weights.w_a * (w_roll * w_roll + w_pitch * w_pitch)
    vz = float(v_z)
    c_zvel = spec.weights.w_z * (vz * vz)
    return c_contact, c_ang, c_zvel


def posture_cost(q_joints, spec: MorphologySpec) -> float:
    q = np.asarray(q_joints, dtype=np.float64)
    if q.shape != (spec.n_u,):
        raise DimensionMismatch(f"q_joints shape {q.shape} != ({spec.n_u},)")
    d = q - np.asarray(spec.q_def, dtype=np.float64)
    return spec.weights.w_p * float(d @ d)


@dataclass(frozen=True)
class RewardBreakdown:
    """All ten terms, their signed sum, and the stance diagnostics."""

    r_fwd: float
    r_h: float
    r_gait_bonus: float
    c_gait: float
    c_ctrl: float
    c_smooth: float
    c_contact: float
    c_ang: float
    c_zvel: float
    c_post: float
    total: float
    stance_target: tuple
    stance_actual: tuple
    n_errors: int

    def terms(self) -> dict:
        """The eleven scalar fields as a plain dict (stable key names)."""
        return {
            "r_fwd": self.r_fwd,
            "r_h": self.r_h,
            "r_gait_bonus": self.r_gait_bonus,
            "c_gait": self.c_gait,
            "c_ctrl": self.c_ctrl,
            "c_smooth": self.c_smooth,
            "c_contact": self.c_contact,
            "c_ang": self.c_ang,
            "c_zvel": self.c_zvel,
            "c_post": self.c_post,
            "total": self.total,
        }


ZERO_BREAKDOWN_FIELDS = dict(
    r_fwd=0.0,
    r_h=0.0,
    r_gait_bonus=0.0,
    c_gait=0.0,
    c_ctrl=0.0,
    c_smooth=0.0,
    c_contact=0.0,
    c_ang=0.0,
    c_zvel=0.0,
    c_post=0.0,
    total=0.0,
)


def total_reward(state, contact, action, a_prev, clock: GaitClock, spec: MorphologySpec):
    """Evaluate all terms at the post-step state under the current phase."""
    stance_t = tuple(
        target_stance(clock.phi, spec.offsets[i], spec.duty) for i in range(spec.n_legs)
    )
    stance_a = tuple(
        actual_stance(float(contact.foot_heights[i]), spec.z_thr)
        for i in range(spec.n_legs)
    )
    r_fwd = forward_reward(float(state.base_linvel[0]), spec)
    r_h = healthy_bonus(float(state.base_pos[2]), spec)
    r_gait_bonus, c_gait, n_errors = gait_terms(stance_a, stance_t, spec)
    c_ctrl, c_smooth = action_costs(action, a_prev, spec)
    c_contact, c_ang, c_zvel = safety_costs(
        contact, state.base_angvel, float(state.base_linvel[2]), spec
    )
    c_post = posture_cost(state.q_joints, spec)
    total = (
        r_fwd
        + r_h
        + r_gait_bonus
        - (c_gait + c_ctrl + c_smooth + c_contact + c_ang + c_zvel + c_post)
    )
    return RewardBreakdown(
        r_fwd=r_fwd,
        r_h=r_h,
        r_gait_bonus=r_gait_bonus,
        c_gait=c_gait,
        c_ctrl=c_ctrl,
        c_smooth=c_smooth,
        c_contact=c_contact,
        c_ang=c_ang,
        c_zvel=c_zvel,
        c_post=c_post,
        total=total,
        stance_target=stance_t,
        stance_actual=stance_a,
        n_errors=n_errors,
    )
