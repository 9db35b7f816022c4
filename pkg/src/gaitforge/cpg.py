"""Open-loop gait generator with PD joint tracking.

Each leg runs the shared stance/swing schedule (reward.stance_split);
within each mode a normalised progress s in [0,1) drives simple motion
primitives: a triangle wave on the hip (sweep +A_hip to -A_hip during
stance, back during swing) and half-sine bells on the distal joints
(A_push push-off in stance, A_knee/A_ankle lift in swing).  All
primitives return to their q_def-relative base value at s in {0,1}, so
targets are continuous across touchdown and lift-off.

The PD loop is feedback on joint coordinates only; no base-state
feedback enters anywhere, so the gait pattern itself is open loop.
A linear ramp over t_ramp seconds scales torques at episode start.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch
from .model import CpgParams, MorphologySpec
from .reward import stance_split

STANCE = "stance"
SWING = "swing"


def leg_phase(phi: float, delta_i: float, duty: float):
    """(mode, s): mode is "stance" or "swing", s the progress in [0,1)."""
    in_stance, m = stance_split(phi, delta_i, duty)
    span = 2.0 * math.pi
    if in_stance:
        return STANCE, m / (span * duty)
    return SWING, (m - span * duty) / (span * (1.0 - duty))


def joint_targets(
    leg_index: int, mode: str, s: float, params: CpgParams, spec: MorphologySpec
):
    """Target angles for one leg's joints, clipped to joint limits."""
    jpl = spec.joints_per_leg
    base = leg_index * jpl
    q_def = spec.q_def
    stance = mode == STANCE
    bell = math.sin(math.pi * s)

    hip = q_def[base] + (params.A_hip * (1.0 - 2.0 * s) if stance
                         else params.A_hip * (2.0 * s - 1.0))
    knee = q_def[base + 1] + (params.A_push if stance else params.A_knee) * bell
    out = [hip, knee]
    if jpl == 3:
        ankle = q_def[base + 2] + (
            0.5 * params.A_push if stance else params.A_ankle
        ) * bell
        out.append(ankle)

    targets = np.array(out)
    for k in range(jpl):
        lo, hi = spec.joint_limits[base + k]
        if targets[k] < lo:
            targets[k] = lo
        elif targets[k] > hi:
            targets[k] = hi
    return targets


def pd_action(q_targets, state, t: float, params: CpgParams, spec: MorphologySpec):
    """Ramp-scaled PD torques expressed as a normalised action in [-1,1]."""
    qt = np.asarray(q_targets, dtype=np.float64)
    if qt.shape != (spec.n_u,):
        raise DimensionMismatch(f"q_targets shape {qt.shape} != ({spec.n_u},)")
    kp = np.asarray(params.kp)
    kd = np.asarray(params.kd)
    tau = kp * (qt - state.q_joints) - kd * state.qd_joints
    rho = 1.0 if params.t_ramp <= 0.0 else min(1.0, t / params.t_ramp)
    return np.clip(rho * tau / np.asarray(spec.gear), -1.0, 1.0)


def cpg_policy(state, t: float, clock, params: CpgParams, spec: MorphologySpec):
    """Full-robot action for the current phase: schedule -> targets -> PD."""
    qt = np.empty(spec.n_u)
    jpl = spec.joints_per_leg
    for leg in range(spec.n_legs):
        mode, s = leg_phase(clock.phi, params.offsets[leg], params.duty)
        qt[leg * jpl : (leg + 1) * jpl] = joint_targets(leg, mode, s, params, spec)
    return pd_action(qt, state, t, params, spec)
