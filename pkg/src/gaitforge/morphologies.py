"""Built-in morphology definitions.

Four robots share two leg layouts:

* lateral legs (queen, tick, bastion): a yaw hip sweeps the foot
  fore-aft on a flat arc, pitch joints raise and lower the distal links.
  Local +x runs outward along the leg; the mount rotation of the leg
  root absorbs the left/right mirror, so pitch axes read the same on
  both sides (+q lifts the foot tip).
* sagittal legs (leaper): links hang along local -z, a pitch hip sweeps
  the leg fore-aft, knee and ankle fold in the sagittal plane.

All masses and lengths are invented desk-scale values; none are
measurements of a physical robot.  Distal link lengths are solved so
the foot spheres rest exactly on the ground with the torso at the
midpoint of its healthy height band and every joint at zero, which is
each robot's default configuration.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from . import mathutil
from .model import (
    BodyDef,
    CpgParams,
    MorphologySpec,
    RewardWeights,
    leg_partition,
    tripod_offsets,
    trot_offsets,
    validate,
)

_HALF_PI = 0.5 * math.pi


def _rot_quat(axis, angle):
    return tuple(float(v) for v in mathutil.quat_from_axis_angle(axis, angle))


def _rest_frames(bodies):
    """World rotation and origin of every body at q = 0 with the base at origin."""
    rots = []
    origins = []
    for b in bodies:
        r0 = mathutil.quat_to_mat(np.asarray(b.r0))
        if b.parent < 0:
            rots.append(r0)
            origins.append(np.zeros(3))
        else:
            rp = rots[b.parent]
            rots.append(rp @ r0)
            origins.append(origins[b.parent] + rp @ np.asarray(b.attach))
    return rots, origins


def _foot_bottom(bodies, foot_idx):
    rots, origins = _rest_frames(bodies)
    b = bodies[foot_idx]
    center = origins[foot_idx] + rots[foot_idx] @ np.asarray(b.geom_offset)
    return float(center[2]) - float(b.geom_radius)


def _settle_feet(bodies, target_bottom):
    """Stretch each foot's attachment so its sphere bottom hits target_bottom.

    The adjustment slides the foot along its parent link's rest direction,
    which is linear in the slide distance, so one correction is exact.
    """
    bodies = list(bodies)
    rots, _ = _rest_frames(bodies)
    feet = [i for i, b in enumerate(bodies) if b.is_foot]
    for fi in feet:
        b = bodies[fi]
        attach = np.asarray(b.attach)
        unit = attach / np.linalg.norm(attach)
        dz = float((rots[b.parent] @ unit)[2])
        residual = target_bottom - _foot_bottom(bodies, fi)
        bodies[fi] = BodyDef(
            name=b.name,
            mass=b.mass,
            inertia=b.inertia,
            com=b.com,
            parent=b.parent,
            attach=tuple(float(v) for v in attach + unit * (residual / dz)),
            r0=b.r0,
            axis=b.axis,
            geom_offset=b.geom_offset,
            geom_radius=b.geom_radius,
            is_foot=True,
        )
        assert abs(_foot_bottom(bodies, fi) - target_bottom) < 1e-9
    return bodies


def _rod(mass, length):
    # slender-rod moment about the com, used as an isotropic stand-in
    return mass * length * length / 12.0


def _lateral_leg(bodies, side, mount, seg, joint_suffix):
    """Append one lateral leg; returns nothing (bodies grows in place).

    seg holds lengths/masses; layout: [hip-yaw root][pitch links...][welded foot].
    """
    prefix = ("L" if side > 0 else "R") + joint_suffix
    mount_rot = _rot_quat((0.0, 0.0, 1.0), side * _HALF_PI)
    yaw_axis = (0.0, 0.0, -float(side))
    parent = 0
    for k, link in enumerate(seg["links"]):
        name, length, mass, tilt = link
        if k == 0:
            r0 = mathutil.quat_mul(
                np.asarray(mount_rot), mathutil.quat_from_axis_angle((0.0, -1.0, 0.0), tilt)
            )
            r0 = tuple(float(v) for v in r0)
            axis = yaw_axis
            attach = mount
        else:
            r0 = _rot_quat((0.0, -1.0, 0.0), tilt)
            axis = (0.0, -1.0, 0.0)
            attach = (seg["links"][k - 1][1], 0.0, 0.0)
        bodies.append(
            BodyDef(
                name=f"{prefix}_{name}",
                mass=mass,
                inertia=_rod(mass, length),
                com=(length / 2.0, 0.0, 0.0),
                parent=parent,
                attach=attach,
                r0=r0,
                axis=axis,
            )
        )
        parent = len(bodies) - 1
    last_len = seg["links"][-1][1]
    bodies.append(
        BodyDef(
            name=f"{prefix}_foot",
            mass=seg["foot_mass"],
            inertia=_rod(seg["foot_mass"], seg["foot_radius"]),
            com=(0.0, 0.0, 0.0),
            parent=parent,
            attach=(last_len, 0.0, 0.0),
            r0=(1.0, 0.0, 0.0, 0.0),
            axis=None,
            geom_offset=(0.0, 0.0, 0.0),
            geom_radius=seg["foot_radius"],
            is_foot=True,
        )
    )


def _hexapod(name, *, torso_mass, torso_inertia, torso_radius, mount_x, mount_y,
             mount_z, seg, healthy_z, z_thr, gear_value, kp_class, kd_class,
             amplitudes, joint_limits_class):
    mid_z = 0.5 * (healthy_z[0] + healthy_z[1])
    bodies = [
        BodyDef(
            name="torso",
            mass=torso_mass,
            inertia=torso_inertia,
            com=(0.0, 0.0, 0.0),
            parent=-1,
            attach=(0.0, 0.0, 0.0),
            geom_offset=(0.0, 0.0, 0.0),
            geom_radius=torso_radius,
        )
    ]
    pair_labels = ("1", "2", "3")
    for row, label in enumerate(pair_labels):
        x = mount_x[row]
        for side in (1, -1):
            _lateral_leg(bodies, side, (x, side * mount_y, mount_z), seg, label)
    bodies = _settle_feet(bodies, -mid_z)

    joints_per_leg = len(seg["links"])
    n_legs = 6
    n_u = n_legs * joints_per_leg
    return _assemble(
        name=name,
        bodies=bodies,
        n_legs=n_legs,
        joints_per_leg=joints_per_leg,
        offsets=tripod_offsets(),
        healthy_z=healthy_z,
        z_thr=z_thr,
        gear_value=gear_value,
        kp_class=kp_class,
        kd_class=kd_class,
        amplitudes=amplitudes,
        joint_limits_class=joint_limits_class,
    )


def _leaper():
    healthy_z = (0.25, 0.9)
    mid_z = 0.5 * (healthy_z[0] + healthy_z[1])
    torso = BodyDef(
        name="torso",
        mass=12.0,
        inertia=0.35,
        com=(0.0, 0.0, 0.0),
        parent=-1,
        attach=(0.0, 0.0, 0.0),
        geom_offset=(0.0, 0.0, 0.0),
        geom_radius=0.13,
    )
    bodies = [torso]

    mount_z = -0.04
    hip_len, thigh_len, shank_len = 0.06, 0.21, 0.21
    bend = 0.7
    # Rest triangle: thigh tilted forward, shank back, foot directly under hip.
    alpha = math.atan2(
        shank_len * math.sin(bend), thigh_len + shank_len * math.cos(bend)
    )
    # Legs cant outward so the feet straddle the torso; the high center of
    # mass tips over a narrow stance long before the swing pair can catch it.
    sprawl = 0.3
    foot_len = 0.05

    for leg_label, sx, sy in (("FL", 1, 1), ("FR", 1, -1), ("HL", -1, 1), ("HR", -1, -1)):
        mount = (sx * 0.3, sy * 0.28, mount_z)
        hip = BodyDef(
            name=f"{leg_label}_hip_mount",
            mass=0.25,
            inertia=_rod(0.25, hip_len),
            com=(0.0, 0.0, -hip_len / 2.0),
            parent=0,
            attach=mount,
            axis=(0.0, -1.0, 0.0),
        )
        bodies.append(hip)
        cant = mathutil.quat_mul(
            np.asarray(_rot_quat((1.0, 0.0, 0.0), sy * sprawl)),
            np.asarray(_rot_quat((0.0, -1.0, 0.0), alpha)),
        )
        thigh = BodyDef(
            name=f"{leg_label}_thigh",
            mass=0.5,
            inertia=_rod(0.5, thigh_len),
            com=(0.0, 0.0, -thigh_len / 2.0),
            parent=len(bodies) - 1,
            attach=(0.0, 0.0, -hip_len),
            r0=tuple(float(v) for v in cant),
            axis=(0.0, 1.0, 0.0),
        )
        bodies.append(thigh)
        shank = BodyDef(
            name=f"{leg_label}_shank",
            mass=0.4,
            inertia=_rod(0.4, shank_len),
            com=(0.0, 0.0, -shank_len / 2.0),
            parent=len(bodies) - 1,
            attach=(0.0, 0.0, -thigh_len),
            r0=_rot_quat((0.0, 1.0, 0.0), bend),
            axis=(0.0, 1.0, 0.0),
        )
        bodies.append(shank)
        # Foot cants back upright so the toe points forward at rest.
        foot = BodyDef(
            name=f"{leg_label}_foot",
            mass=0.1,
            inertia=_rod(0.1, foot_len),
            com=(0.0, 0.0, -foot_len / 2.0),
            parent=len(bodies) - 1,
            attach=(0.0, 0.0, -shank_len),
            r0=_rot_quat((0.0, -1.0, 0.0), bend - alpha),
            axis=None,
        )
        bodies.append(foot)
        # Vertical attach keeps the settled toe under the hip in x; a forward
        # component would slide both front and hind toes forward and unbalance
        # the standing load toward the hind pair.  The ball sits ahead of the
        # attach point; a heel sphere added below pairs with it so each stance
        # leg contacts along a segment instead of a point.  Two point contacts
        # per diagonal pair give a support line through the center of mass,
        # which leaves roll unresisted and tips the trot over within a couple
        # of strides.
        toe = BodyDef(
            name=f"{leg_label}_toe",
            mass=0.05,
            inertia=_rod(0.05, foot_len),
            com=(0.0, 0.0, 0.0),
            parent=len(bodies) - 1,
            attach=(0.0, 0.0, -foot_len),
            axis=None,
            geom_offset=(0.1, 0.0, 0.0),
            geom_radius=0.03,
            is_foot=True,
        )
        bodies.append(toe)

    bodies = _settle_feet(bodies, -mid_z)
    rots, origins = _rest_frames(bodies)
    for ti, b in enumerate(bodies):
        if not b.is_foot:
            continue
        fi = b.parent
        toe_center = origins[ti] + rots[ti] @ np.asarray(b.geom_offset)
        heel_center = toe_center + np.array([-0.2, 0.0, 0.0])
        f = bodies[fi]
        bodies[fi] = BodyDef(
            name=f.name,
            mass=f.mass,
            inertia=f.inertia,
            com=f.com,
            parent=f.parent,
            attach=f.attach,
            r0=f.r0,
            axis=f.axis,
            geom_offset=tuple(
                float(v) for v in rots[fi].T @ (heel_center - origins[fi])
            ),
            geom_radius=b.geom_radius,
        )
    return _assemble(
        name="leaper",
        bodies=bodies,
        n_legs=4,
        joints_per_leg=3,
        offsets=trot_offsets(),
        healthy_z=healthy_z,
        z_thr=0.08,
        gear_value=60.0,
        kp_class=(120.0, 100.0, 60.0),
        kd_class=(5.0, 4.0, 2.0),
        amplitudes=dict(A_hip=0.47, A_knee=0.12, A_ankle=0.45, A_push=0.35),
        joint_limits_class=((-1.2, 1.2), (-1.0, 1.5), (-1.0, 1.5)),
    )


def _assemble(*, name, bodies, n_legs, joints_per_leg, offsets, healthy_z, z_thr,
              gear_value, kp_class, kd_class, amplitudes, joint_limits_class,
              f_g=1.25, duty=0.6, t_ramp=0.5):
    n_u = n_legs * joints_per_leg
    spec = MorphologySpec(
        name=name,
        n_legs=n_legs,
        joints_per_leg=joints_per_leg,
        n_u=n_u,
        bodies=tuple(bodies),
        n_body=len(bodies),
        gear=tuple([gear_value] * n_u),
        q_def=tuple([0.0] * n_u),
        joint_limits=tuple(joint_limits_class[j % joints_per_leg] for j in range(n_u)),
        healthy_z=tuple(healthy_z),
        v_star=1.0,
        sigma_v=0.5,
        f_g=f_g,
        duty=duty,
        offsets=tuple(offsets),
        z_thr=z_thr,
        weights=RewardWeights(),
        horizon=1000,
        cpg=CpgParams(
            f_g=f_g,
            duty=duty,
            offsets=tuple(offsets),
            kp=tuple(kp_class[j % joints_per_leg] for j in range(n_u)),
            kd=tuple(kd_class[j % joints_per_leg] for j in range(n_u)),
            **amplitudes,
        ),
    )
    errs = validate(spec)
    if errs:
        raise AssertionError(f"built-in {name} failed validation: {errs}")
    return spec


def _queen_like(name, scale, *, torso_mass, torso_inertia, torso_radius, masses,
                healthy_z, z_thr, gear_value, kp_class, kd_class, amplitudes):
    """Queen and tick share one lateral 3-link layout at different scales."""
    coxa_m, femur_m, tibia_m, foot_m = masses
    seg = {
        "links": [
            ("coxa", 0.15 * scale, coxa_m, 0.0),
            ("femur", 0.45 * scale, femur_m, 0.25),
            ("tibia", 1.05 * scale, tibia_m, -1.5),
        ],
        "foot_mass": foot_m,
        "foot_radius": 0.055 * scale,
    }
    return _hexapod(
        name,
        torso_mass=torso_mass,
        torso_inertia=torso_inertia,
        torso_radius=torso_radius,
        mount_x=(0.45 * scale, 0.0, -0.45 * scale),
        mount_y=0.3 * scale,
        mount_z=-0.1 * scale,
        seg=seg,
        healthy_z=healthy_z,
        z_thr=z_thr,
        gear_value=gear_value,
        kp_class=kp_class,
        kd_class=kd_class,
        amplitudes=amplitudes,
        joint_limits_class=((-1.2, 1.2), (-1.0, 1.5), (-1.0, 1.5)),
    )


def _queen():
    return _queen_like(
        "queen",
        1.0,
        torso_mass=40.0,
        torso_inertia=4.0,
        torso_radius=0.3,
        masses=(0.5, 0.7, 0.9, 0.2),
        healthy_z=(0.6, 1.6),
        z_thr=0.08,
        gear_value=80.0,
        kp_class=(240.0, 240.0, 200.0),
        kd_class=(10.0, 10.0, 8.0),
        amplitudes=dict(A_hip=0.28, A_knee=0.32, A_ankle=0.3, A_push=0.04),
    )


def _tick():
    return _queen_like(
        "tick",
        0.26,
        torso_mass=8.0,
        torso_inertia=0.08,
        torso_radius=0.08,
        masses=(0.05, 0.07, 0.09, 0.02),
        healthy_z=(0.12, 0.45),
        z_thr=0.04,
        gear_value=12.0,
        kp_class=(14.0, 14.0, 10.0),
        kd_class=(0.5, 0.5, 0.35),
        amplitudes=dict(A_hip=0.75, A_knee=0.32, A_ankle=0.3, A_push=0.04),
    )


def _bastion():
    seg = {
        "links": [
            ("femur", 0.25, 0.5, 0.0),
            ("tibia", 0.4526, 0.6, 0.35 - _HALF_PI),
        ],
        "foot_mass": 0.2,
        "foot_radius": 0.04,
    }
    return _hexapod(
        "bastion",
        torso_mass=25.0,
        torso_inertia=1.2,
        torso_radius=0.16,
        mount_x=(0.35, 0.0, -0.35),
        mount_y=0.22,
        mount_z=-0.06,
        seg=seg,
        healthy_z=(0.25, 0.8),
        z_thr=0.08,
        gear_value=60.0,
        kp_class=(100.0, 80.0),
        kd_class=(4.0, 3.0),
        amplitudes=dict(A_hip=0.6, A_knee=0.5, A_ankle=0.0, A_push=0.06),
        joint_limits_class=((-1.3, 1.3), (-1.0, 1.5)),
    )


_BUILDERS = {
    "queen": _queen,
    "bastion": _bastion,
    "tick": _tick,
    "leaper": _leaper,
}


@functools.lru_cache(maxsize=None)
def builtin(name: str) -> MorphologySpec:
    return _BUILDERS[name]()
