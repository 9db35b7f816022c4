"""Robot morphology descriptions.

A MorphologySpec is the single static input consumed by the dynamics,
reward, gait generator, and environment layers: body tree, actuator
scales, gait schedule, reward weights, and episode bookkeeping.  Specs
are frozen dataclasses built from plain tuples, so they are hashable,
comparable field-by-field, and safe to share read-only across threads.

Built-in specs are embedded constants (see morphologies.py).  User
specs load from a JSON config file with an explicit schema version;
serialising a spec and re-loading it reproduces it exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace

from .errors import UnknownMorphology, ValidationError

CONFIG_SCHEMA_VERSION = 1
CONFIG_DIR_ENV = "GAITFORGE_CONFIG_DIR"
BUILTIN_NAMES = ("queen", "bastion", "tick", "leaper")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RewardWeights:
    """Weights of the ten reward terms.

    w_c_hat is the control-magnitude weight before dimensional scaling;
    the effective per-joint weight is w_c_hat / n_u.
    """

    w_fwd: float = 1.0
    w_h: float = 0.5
    w_gb: float = 0.5
    w_gc: float = 0.1
    w_c_hat: float = 0.6
    w_s: float = 0.05
    w_cc: float = 5e-4
    w_a: float = 0.05
    w_z: float = 0.1
    w_p: float = 0.05


@dataclass(frozen=True)
class CpgParams:
    """Parameters of the scripted gait generator and its PD tracking loop.

    f_g, duty, and offsets mirror the owning spec's gait schedule and must
    match it; amplitudes are radians, gains are per-joint torque units.
    """

    f_g: float
    duty: float
    offsets: tuple
    A_hip: float
    A_knee: float
    A_ankle: float
    A_push: float
    kp: tuple
    kd: tuple
    t_ramp: float = 0.5


@dataclass(frozen=True)
class BodyDef:
    """One rigid body of the kinematic tree.

    attach is the joint pivot in the parent frame; r0 a fixed mounting
    rotation (scalar-first quaternion) applied before the joint angle;
    axis the hinge axis in the mounted frame, or None for a welded body.
    inertia is an isotropic moment about the body's own com.  Bodies with
    geom_radius carry a contact sphere centred at geom_offset.
    """

    name: str
    mass: float
    inertia: float
    com: tuple
    parent: int
    attach: tuple
    r0: tuple = (1.0, 0.0, 0.0, 0.0)
    axis: tuple | None = None
    geom_offset: tuple | None = None
    geom_radius: float | None = None
    is_foot: bool = False


@dataclass(frozen=True)
class MorphologySpec:
    name: str
    n_legs: int
    joints_per_leg: int
    n_u: int
    bodies: tuple
    n_body: int
    gear: tuple
    q_def: tuple
    joint_limits: tuple
    healthy_z: tuple
    v_star: float
    sigma_v: float
    f_g: float
    duty: float
    offsets: tuple
    z_thr: float
    weights: RewardWeights
    horizon: int
    cpg: CpgParams
    contact_clip_scale: float = 1.0

    @property
    def obs_dim(self) -> int:
        # z(1) + quat(4) + q(n_u) + linvel(3) + angvel(3) + qd(n_u)
        # + wrenches(6 * n_body) + [sin phi, cos phi]
        return 13 + 2 * self.n_u + 6 * self.n_body

    @property
    def w_c(self) -> float:
        return self.weights.w_c_hat / self.n_u


def tripod_offsets(n_legs: int = 6) -> tuple:
    """Alternating-tripod phase offsets for legs ordered L1,R1,L2,R2,L3,R3."""
    if n_legs != 6:
        raise ValidationError(f"tripod gait requires 6 legs, got {n_legs}")
    return (0.0, math.pi, math.pi, 0.0, 0.0, math.pi)


def trot_offsets() -> tuple:
    """Diagonal-pair trot offsets for legs ordered FL,FR,HL,HR."""
    return (0.0, math.pi, math.pi, 0.0)


def body_children(spec: MorphologySpec) -> list:
    """children[i] = indices of bodies whose parent is i, in body order."""
    children = [[] for _ in spec.bodies]
    for i, b in enumerate(spec.bodies):
        if b.parent >= 0:
            children[b.parent].append(i)
    return children


def leg_partition(spec: MorphologySpec) -> list:
    """Per-leg body indices, root link first, in canonical leg order."""
    children = body_children(spec)
    legs = []
    for root in children[0]:
        chain = []
        stack = [root]
        while stack:
            i = stack.pop()
            chain.append(i)
            stack.extend(reversed(children[i]))
        legs.append(chain)
    return legs


def joint_order(spec: MorphologySpec) -> list:
    """Body index carrying each actuated joint, in joint-index order."""
    out = []
    for leg in leg_partition(spec):
        for i in leg:
            if spec.bodies[i].axis is not None:
                out.append(i)
    return out


def validate(spec: MorphologySpec) -> list:
    """Return the list of violated constraints (empty when the spec is sound)."""
    errs = []
    nb = len(spec.bodies)

    if spec.n_u != spec.n_legs * spec.joints_per_leg:
        errs.append(
            f"n_u={spec.n_u} but n_legs*joints_per_leg={spec.n_legs * spec.joints_per_leg}"
        )
    if spec.n_legs not in (4, 6):
        errs.append(f"n_legs must be 4 or 6, got {spec.n_legs}")
    if spec.joints_per_leg not in (2, 3):
        errs.append(f"joints_per_leg must be 2 or 3, got {spec.joints_per_leg}")
    if spec.n_body != nb:
        errs.append(f"n_body={spec.n_body} but bodies list has {nb} entries")

    if nb == 0 or spec.bodies[0].parent != -1:
        errs.append("body 0 must be the root (parent -1)")
    for i, b in enumerate(spec.bodies[1:], start=1):
        if not (0 <= b.parent < i):
            errs.append(f"body {i} ({b.name}) parent {b.parent} must precede it")
        if b.mass <= 0:
            errs.append(f"body {i} ({b.name}) mass must be positive")
    if any(b.parent == -1 for b in spec.bodies[1:]):
        errs.append("only body 0 may be the root")

    n_joints = sum(1 for b in spec.bodies if b.axis is not None)
    if n_joints != spec.n_u:
        errs.append(f"{n_joints} hinge joints in body tree, expected n_u={spec.n_u}")

    if len(spec.gear) != spec.n_u:
        errs.append(f"gear length {len(spec.gear)} != n_u")
    elif any(g <= 0 for g in spec.gear):
        errs.append("gear entries must be positive")
    if len(spec.q_def) != spec.n_u:
        errs.append(f"q_def length {len(spec.q_def)} != n_u")
    if len(spec.joint_limits) != spec.n_u:
        errs.append(f"joint_limits length {len(spec.joint_limits)} != n_u")
    else:
        for j, (lo, hi) in enumerate(spec.joint_limits):
            if not lo < hi:
                errs.append(f"joint {j} limits [{lo}, {hi}] must satisfy lo < hi")
        if len(spec.q_def) == spec.n_u and all(
            lo < hi for lo, hi in spec.joint_limits
        ):
            for j, q in enumerate(spec.q_def):
                lo, hi = spec.joint_limits[j]
                if not (lo <= q <= hi):
                    errs.append(f"q_def[{j}]={q} outside joint limits [{lo}, {hi}]")

    if not (0.0 < spec.duty < 1.0):
        errs.append(f"duty={spec.duty} must lie in (0, 1)")
    if spec.sigma_v <= 0:
        errs.append("sigma_v must be positive")
    if spec.f_g <= 0:
        errs.append("f_g must be positive")
    if not spec.healthy_z[0] < spec.healthy_z[1]:
        errs.append(f"healthy_z {spec.healthy_z} must satisfy z_min < z_max")
    if spec.z_thr <= 0:
        errs.append("z_thr must be positive")
    if spec.horizon < 1:
        errs.append("horizon must be at least 1")
    if spec.contact_clip_scale <= 0:
        errs.append("contact_clip_scale must be positive")

    if len(spec.offsets) != spec.n_legs:
        errs.append(f"offsets length {len(spec.offsets)} != n_legs")
    elif any(not (0.0 <= d < TWO_PI) for d in spec.offsets):
        errs.append("offsets must lie in [0, 2*pi)")

    for w_name, w_val in vars(spec.weights).items():
        if w_val < 0:
            errs.append(f"weight {w_name}={w_val} must be nonnegative")

    cpg = spec.cpg
    for a_name in ("A_hip", "A_knee", "A_ankle", "A_push"):
        if getattr(cpg, a_name) < 0:
            errs.append(f"cpg.{a_name} must be nonnegative")
    if cpg.t_ramp < 0:
        errs.append("cpg.t_ramp must be nonnegative")
    if len(cpg.kp) != spec.n_u or len(cpg.kd) != spec.n_u:
        errs.append("cpg gains kp/kd must have length n_u")
    elif any(k < 0 for k in cpg.kp) or any(k < 0 for k in cpg.kd):
        errs.append("cpg gains must be nonnegative")
    if cpg.f_g != spec.f_g or cpg.duty != spec.duty or tuple(cpg.offsets) != tuple(spec.offsets):
        errs.append("cpg schedule (f_g, duty, offsets) must match the spec schedule")

    # Structural leg checks only make sense on a well-formed tree.
    if not errs:
        legs = leg_partition(spec)
        if len(legs) != spec.n_legs:
            errs.append(f"root has {len(legs)} leg subtrees, expected {spec.n_legs}")
        else:
            for li, leg in enumerate(legs):
                jn = sum(1 for i in leg if spec.bodies[i].axis is not None)
                if jn != spec.joints_per_leg:
                    errs.append(f"leg {li} has {jn} joints, expected {spec.joints_per_leg}")
                feet = [i for i in leg if spec.bodies[i].is_foot]
                if len(feet) != 1:
                    errs.append(f"leg {li} must designate exactly one foot body")
                elif spec.bodies[feet[0]].geom_radius is None:
                    errs.append(f"leg {li} foot body has no contact sphere")

    return errs


def _body_to_dict(b: BodyDef) -> dict:
    return {
        "name": b.name,
        "mass": b.mass,
        "inertia": b.inertia,
        "com": list(b.com),
        "parent": b.parent,
        "attach": list(b.attach),
        "r0": list(b.r0),
        "axis": None if b.axis is None else list(b.axis),
        "geom_offset": None if b.geom_offset is None else list(b.geom_offset),
        "geom_radius": b.geom_radius,
        "is_foot": b.is_foot,
    }


def _body_from_dict(d: dict) -> BodyDef:
    return BodyDef(
        name=str(d["name"]),
        mass=float(d["mass"]),
        inertia=float(d["inertia"]),
        com=tuple(float(v) for v in d["com"]),
        parent=int(d["parent"]),
        attach=tuple(float(v) for v in d["attach"]),
        r0=tuple(float(v) for v in d["r0"]),
        axis=None if d["axis"] is None else tuple(float(v) for v in d["axis"]),
        geom_offset=None
        if d["geom_offset"] is None
        else tuple(float(v) for v in d["geom_offset"]),
        geom_radius=None if d["geom_radius"] is None else float(d["geom_radius"]),
        is_foot=bool(d["is_foot"]),
    )


def spec_to_config(spec: MorphologySpec) -> dict:
    """Plain-dict form of a spec, JSON-serialisable and round-trip exact."""
    return {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "name": spec.name,
        "n_legs": spec.n_legs,
        "joints_per_leg": spec.joints_per_leg,
        "n_u": spec.n_u,
        "bodies": [_body_to_dict(b) for b in spec.bodies],
        "n_body": spec.n_body,
        "gear": list(spec.gear),
        "q_def": list(spec.q_def),
        "joint_limits": [list(lim) for lim in spec.joint_limits],
        "healthy_z": list(spec.healthy_z),
        "v_star": spec.v_star,
        "sigma_v": spec.sigma_v,
        "f_g": spec.f_g,
        "duty": spec.duty,
        "offsets": list(spec.offsets),
        "z_thr": spec.z_thr,
        "weights": dict(vars(spec.weights)),
        "horizon": spec.horizon,
        "cpg": {
            "f_g": spec.cpg.f_g,
            "duty": spec.cpg.duty,
            "offsets": list(spec.cpg.offsets),
            "A_hip": spec.cpg.A_hip,
            "A_knee": spec.cpg.A_knee,
            "A_ankle": spec.cpg.A_ankle,
            "A_push": spec.cpg.A_push,
            "kp": list(spec.cpg.kp),
            "kd": list(spec.cpg.kd),
            "t_ramp": spec.cpg.t_ramp,
        },
        "contact_clip_scale": spec.contact_clip_scale,
    }


def config_to_spec(config: dict) -> MorphologySpec:
    """Build and validate a spec from its dict form.

    Raises ValidationError listing every violated constraint.
    """
    version = config.get("schema_version")
    if version != CONFIG_SCHEMA_VERSION:
        raise ValidationError(
            f"config schema_version {version!r} unsupported (expected {CONFIG_SCHEMA_VERSION})"
        )
    try:
        w = config["weights"]
        c = config["cpg"]
        spec = MorphologySpec(
            name=str(config["name"]),
            n_legs=int(config["n_legs"]),
            joints_per_leg=int(config["joints_per_leg"]),
            n_u=int(config["n_u"]),
            bodies=tuple(_body_from_dict(d) for d in config["bodies"]),
            n_body=int(config["n_body"]),
            gear=tuple(float(v) for v in config["gear"]),
            q_def=tuple(float(v) for v in config["q_def"]),
            joint_limits=tuple(
                (float(lo), float(hi)) for lo, hi in config["joint_limits"]
            ),
            healthy_z=tuple(float(v) for v in config["healthy_z"]),
            v_star=float(config["v_star"]),
            sigma_v=float(config["sigma_v"]),
            f_g=float(config["f_g"]),
            duty=float(config["duty"]),
            offsets=tuple(float(v) for v in config["offsets"]),
            z_thr=float(config["z_thr"]),
            weights=RewardWeights(**{k: float(v) for k, v in w.items()}),
            horizon=int(config["horizon"]),
            cpg=CpgParams(
                f_g=float(c["f_g"]),
                duty=float(c["duty"]),
                offsets=tuple(float(v) for v in c["offsets"]),
                A_hip=float(c["A_hip"]),
                A_knee=float(c["A_knee"]),
                A_ankle=float(c["A_ankle"]),
                A_push=float(c["A_push"]),
                kp=tuple(float(v) for v in c["kp"]),
                kd=tuple(float(v) for v in c["kd"]),
                t_ramp=float(c["t_ramp"]),
            ),
            contact_clip_scale=float(config.get("contact_clip_scale", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed config: {exc!r}") from exc

    errs = validate(spec)
    if errs:
        raise ValidationError(errs)
    return spec


def save_config(spec: MorphologySpec, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_config(spec), fh, indent=2)
        fh.write("\n")


def load_config(path: str) -> MorphologySpec:
    with open(path) as fh:
        return config_to_spec(json.load(fh))


def spec_hash(spec: MorphologySpec) -> str:
    """Stable content hash of a spec's canonical serialised form."""
    blob = json.dumps(spec_to_config(spec), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def load_morphology(name: str) -> MorphologySpec:
    """Load a built-in morphology by name, or any spec from a config path.

    When GAITFORGE_CONFIG_DIR is set, <dir>/<name>.json takes precedence
    over the built-in of the same name.
    """
    from . import morphologies

    key = str(name).lower()
    config_dir = os.environ.get(CONFIG_DIR_ENV)
    if config_dir:
        candidate = os.path.join(config_dir, key + ".json")
        if os.path.isfile(candidate):
            return load_config(candidate)
    if key in BUILTIN_NAMES:
        return morphologies.builtin(key)
    if os.path.isfile(name):
        return load_config(name)
    raise UnknownMorphology(
        f"unknown morphology {name!r}; expected one of {', '.join(BUILTIN_NAMES)} "
        "or a path to a config file"
    )
