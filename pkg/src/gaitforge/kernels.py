"""Inner simulation kernel, compiled with numba when available.

One source function implements the whole substep rollout; it is exported
twice, as `kernel_py` (plain Python on numpy scalars) and `kernel_jit`
(the same function under numba.njit).  Both backends must produce
bit-identical trajectories, which constrains the style here: explicit
scalar arithmetic in a fixed evaluation order, no vectorised reductions,
no fastmath.  Mount rotations arrive as precomputed matrices so only the
base quaternion is converted per pass.

The kernel integrates `n_sub` semi-implicit Euler substeps (velocities
first, then positions) and always finishes with one extra force pass at
the final state that fills `wrench` and `foot_h` (foot sphere bottom
heights) without integrating, so callers get contact measurements
consistent with the state they observe.  `n_sub=0` is therefore a pure
measurement pass.

State vector layout (length 13 + 2*n_u):
  [0:3]  base position, world frame
  [3:7]  base orientation quaternion, scalar first
  [7:10] base linear velocity, world frame
  [10:13] base angular velocity, body frame
  [13:13+n_u]      joint angles
  [13+n_u:13+2n_u] joint velocities

Returns 0, or 1 when any state entry left the +/-1e6 trust region.
"""

from __future__ import annotations

import math
import os

import numpy as np

BLOWUP_LIMIT = 1e6
NUMBA_ENV = "GAITFORGE_NUMBA"

try:
    import numba as _numba
except ImportError:
    _numba = None


def _rollout(
    state,
    tau,
    n_sub,
    dt,
    parent,
    jointof,
    attach,
    r0mat,
    axis,
    geom_off,
    geom_r,
    total_mass,
    base_inertia,
    joint_inertia,
    lim_lo,
    lim_hi,
    k_lim,
    joint_damping,
    gravity,
    k_n,
    c_n,
    c_t,
    mu,
    foot_body,
    wrench,
    foot_h,
):
    n_body = parent.shape[0]
    n_u = joint_inertia.shape[0]

    R = np.empty((n_body, 3, 3))
    O = np.empty((n_body, 3))
    W = np.empty((n_body, 3))
    V = np.empty((n_body, 3))

    for it in range(n_sub + 1):
        # ----- forward kinematics + body velocities -------------------
        qw = state[3]
        qx = state[4]
        qy = state[5]
        qz = state[6]
        R[0, 0, 0] = 1.0 - 2.0 * (qy * qy + qz * qz)
        R[0, 0, 1] = 2.0 * (qx * qy - qw * qz)
        R[0, 0, 2] = 2.0 * (qx * qz + qw * qy)
        R[0, 1, 0] = 2.0 * (qx * qy + qw * qz)
        R[0, 1, 1] = 1.0 - 2.0 * (qx * qx + qz * qz)
        R[0, 1, 2] = 2.0 * (qy * qz - qw * qx)
        R[0, 2, 0] = 2.0 * (qx * qz - qw * qy)
        R[0, 2, 1] = 2.0 * (qy * qz + qw * qx)
        R[0, 2, 2] = 1.0 - 2.0 * (qx * qx + qy * qy)
        O[0, 0] = state[0]
        O[0, 1] = state[1]
        O[0, 2] = state[2]
        # base angular velocity lives in the body frame; children need world frame
        wbx = state[10]
        wby = state[11]
        wbz = state[12]
        W[0, 0] = R[0, 0, 0] * wbx + R[0, 0, 1] * wby + R[0, 0, 2] * wbz
        W[0, 1] = R[0, 1, 0] * wbx + R[0, 1, 1] * wby + R[0, 1, 2] * wbz
        W[0, 2] = R[0, 2, 0] * wbx + R[0, 2, 1] * wby + R[0, 2, 2] * wbz
        V[0, 0] = state[7]
        V[0, 1] = state[8]
        V[0, 2] = state[9]

        for i in range(1, n_body):
            pa = parent[i]
            # M = R[pa] @ r0mat[i] (mounted frame, before the joint angle)
            m00 = (
                R[pa, 0, 0] * r0mat[i, 0, 0]
                + R[pa, 0, 1] * r0mat[i, 1, 0]
                + R[pa, 0, 2] * r0mat[i, 2, 0]
            )
            m01 = (
                R[pa, 0, 0] * r0mat[i, 0, 1]
                + R[pa, 0, 1] * r0mat[i, 1, 1]
                + R[pa, 0, 2] * r0mat[i, 2, 1]
            )
            m02 = (
                R[pa, 0, 0] * r0mat[i, 0, 2]
                + R[pa, 0, 1] * r0mat[i, 1, 2]
                + R[pa, 0, 2] * r0mat[i, 2, 2]
            )
            m10 = (
                R[pa, 1, 0] * r0mat[i, 0, 0]
                + R[pa, 1, 1] * r0mat[i, 1, 0]
                + R[pa, 1, 2] * r0mat[i, 2, 0]
            )
            m11 = (
                R[pa, 1, 0] * r0mat[i, 0, 1]
                + R[pa, 1, 1] * r0mat[i, 1, 1]
                + R[pa, 1, 2] * r0mat[i, 2, 1]
            )
            m12 = (
                R[pa, 1, 0] * r0mat[i, 0, 2]
                + R[pa, 1, 1] * r0mat[i, 1, 2]
                + R[pa, 1, 2] * r0mat[i, 2, 2]
            )
            m20 = (
                R[pa, 2, 0] * r0mat[i, 0, 0]
                + R[pa, 2, 1] * r0mat[i, 1, 0]
                + R[pa, 2, 2] * r0mat[i, 2, 0]
            )
            m21 = (
                R[pa, 2, 0] * r0mat[i, 0, 1]
                + R[pa, 2, 1] * r0mat[i, 1, 1]
                + R[pa, 2, 2] * r0mat[i, 2, 1]
            )
            m22 = (
                R[pa, 2, 0] * r0mat[i, 0, 2]
                + R[pa, 2, 1] * r0mat[i, 1, 2]
                + R[pa, 2, 2] * r0mat[i, 2, 2]
            )

            # joint pivot offset in world frame
            rx = (
                R[pa, 0, 0] * attach[i, 0]
                + R[pa, 0, 1] * attach[i, 1]
                + R[pa, 0, 2] * attach[i, 2]
            )
            ry = (
                R[pa, 1, 0] * attach[i, 0]
                + R[pa, 1, 1] * attach[i, 1]
                + R[pa, 1, 2] * attach[i, 2]
            )
            rz = (
                R[pa, 2, 0] * attach[i, 0]
                + R[pa, 2, 1] * attach[i, 1]
                + R[pa, 2, 2] * attach[i, 2]
            )
            O[i, 0] = O[pa, 0] + rx
            O[i, 1] = O[pa, 1] + ry
            O[i, 2] = O[pa, 2] + rz
            V[i, 0] = V[pa, 0] + W[pa, 1] * rz - W[pa, 2] * ry
            V[i, 1] = V[pa, 1] + W[pa, 2] * rx - W[pa, 0] * rz
            V[i, 2] = V[pa, 2] + W[pa, 0] * ry - W[pa, 1] * rx

            j = jointof[i]
            if j >= 0:
                qj = state[13 + j]
                cj = math.cos(qj)
                sj = math.sin(qj)
                one = 1.0 - cj
                ax = axis[i, 0]
                ay = axis[i, 1]
                az = axis[i, 2]
                j00 = cj + ax * ax * one
                j01 = ax * ay * one - az * sj
                j02 = ax * az * one + ay * sj
                j10 = ay * ax * one + az * sj
                j11 = cj + ay * ay * one
                j12 = ay * az * one - ax * sj
                j20 = az * ax * one - ay * sj
                j21 = az * ay * one + ax * sj
                j22 = cj + az * az * one
                R[i, 0, 0] = m00 * j00 + m01 * j10 + m02 * j20
                R[i, 0, 1] = m00 * j01 + m01 * j11 + m02 * j21
                R[i, 0, 2] = m00 * j02 + m01 * j12 + m02 * j22
                R[i, 1, 0] = m10 * j00 + m11 * j10 + m12 * j20
                R[i, 1, 1] = m10 * j01 + m11 * j11 + m12 * j21
                R[i, 1, 2] = m10 * j02 + m11 * j12 + m12 * j22
                R[i, 2, 0] = m20 * j00 + m21 * j10 + m22 * j20
                R[i, 2, 1] = m20 * j01 + m21 * j11 + m22 * j21
                R[i, 2, 2] = m20 * j02 + m21 * j12 + m22 * j22
                # hinge axis is invariant under its own rotation
                awx = m00 * ax + m01 * ay + m02 * az
                awy = m10 * ax + m11 * ay + m12 * az
                awz = m20 * ax + m21 * ay + m22 * az
                qdj = state[13 + n_u + j]
                W[i, 0] = W[pa, 0] + awx * qdj
                W[i, 1] = W[pa, 1] + awy * qdj
                W[i, 2] = W[pa, 2] + awz * qdj
            else:
                R[i, 0, 0] = m00
                R[i, 0, 1] = m01
                R[i, 0, 2] = m02
                R[i, 1, 0] = m10
                R[i, 1, 1] = m11
                R[i, 1, 2] = m12
                R[i, 2, 0] = m20
                R[i, 2, 1] = m21
                R[i, 2, 2] = m22
                W[i, 0] = W[pa, 0]
                W[i, 1] = W[pa, 1]
                W[i, 2] = W[pa, 2]

        # ----- ground contact forces ----------------------------------
        for i in range(n_body):
            for k in range(6):
                wrench[i, k] = 0.0
        fbx = 0.0
        fby = 0.0
        fbz = 0.0
        tbx = 0.0
        tby = 0.0
        tbz = 0.0
        for i in range(n_body):
            r = geom_r[i]
            if r < 0.0:
                continue
            gx = (
                R[i, 0, 0] * geom_off[i, 0]
                + R[i, 0, 1] * geom_off[i, 1]
                + R[i, 0, 2] * geom_off[i, 2]
            )
            gy = (
                R[i, 1, 0] * geom_off[i, 0]
                + R[i, 1, 1] * geom_off[i, 1]
                + R[i, 1, 2] * geom_off[i, 2]
            )
            gz = (
                R[i, 2, 0] * geom_off[i, 0]
                + R[i, 2, 1] * geom_off[i, 1]
                + R[i, 2, 2] * geom_off[i, 2]
            )
            cx = O[i, 0] + gx
            cy = O[i, 1] + gy
            cz = O[i, 2] + gz
            pen = r - cz
            if pen <= 0.0:
                continue
            vcx = V[i, 0] + W[i, 1] * gz - W[i, 2] * gy
            vcy = V[i, 1] + W[i, 2] * gx - W[i, 0] * gz
            vcz = V[i, 2] + W[i, 0] * gy - W[i, 1] * gx
            fz = k_n * pen - c_n * vcz
            if fz < 0.0:
                fz = 0.0
            fx = -c_t * vcx
            fy = -c_t * vcy
            ft = math.sqrt(fx * fx + fy * fy)
            cap = mu * fz
            if ft > cap:
                if ft > 0.0:
                    scale = cap / ft
                    fx = fx * scale
                    fy = fy * scale
            wrench[i, 0] += fx
            wrench[i, 1] += fy
            wrench[i, 2] += fz
            wrench[i, 3] += gy * fz - gz * fy
            wrench[i, 4] += gz * fx - gx * fz
            wrench[i, 5] += gx * fy - gy * fx
            fbx += fx
            fby += fy
            fbz += fz
            dx = cx - state[0]
            dy = cy - state[1]
            dz = cz - state[2]
            tbx += dy * fz - dz * fy
            tby += dz * fx - dx * fz
            tbz += dx * fy - dy * fx

        if it == n_sub:
            for l in range(foot_body.shape[0]):
                i = foot_body[l]
                gz = (
                    R[i, 2, 0] * geom_off[i, 0]
                    + R[i, 2, 1] * geom_off[i, 1]
                    + R[i, 2, 2] * geom_off[i, 2]
                )
                foot_h[l] = O[i, 2] + gz - geom_r[i]
            break

        # ----- integrate: velocities first, then positions ------------
        for j in range(n_u):
            qj = state[13 + j]
            qdj = state[13 + n_u + j]
            t = tau[j] - joint_damping * qdj
            if qj < lim_lo[j]:
                t += k_lim * (lim_lo[j] - qj)
            elif qj > lim_hi[j]:
                t += k_lim * (lim_hi[j] - qj)
            qdj = qdj + dt * (t / joint_inertia[j])
            state[13 + n_u + j] = qdj
            state[13 + j] = qj + dt * qdj

        vx = state[7] + dt * (fbx / total_mass)
        vy = state[8] + dt * (fby / total_mass)
        vz = state[9] + dt * (fbz / total_mass - gravity)
        state[7] = vx
        state[8] = vy
        state[9] = vz
        state[0] = state[0] + dt * vx
        state[1] = state[1] + dt * vy
        state[2] = state[2] + dt * vz

        # base torque was accumulated in world frame; the isotropic base
        # inertia makes the gyroscopic term exactly zero, so momentum is
        # conserved to roundoff when no force acts
        ttx = R[0, 0, 0] * tbx + R[0, 1, 0] * tby + R[0, 2, 0] * tbz
        tty = R[0, 0, 1] * tbx + R[0, 1, 1] * tby + R[0, 2, 1] * tbz
        ttz = R[0, 0, 2] * tbx + R[0, 1, 2] * tby + R[0, 2, 2] * tbz
        wx = state[10] + dt * (ttx / base_inertia)
        wy = state[11] + dt * (tty / base_inertia)
        wz = state[12] + dt * (ttz / base_inertia)
        state[10] = wx
        state[11] = wy
        state[12] = wz
        wn = math.sqrt(wx * wx + wy * wy + wz * wz)
        th = wn * dt
        if th > 0.0:
            half = 0.5 * th
            ch = math.cos(half)
            sh = math.sin(half) / wn
            dw = ch
            dx_ = sh * wx
            dy_ = sh * wy
            dz_ = sh * wz
            nw = qw * dw - qx * dx_ - qy * dy_ - qz * dz_
            nx = qw * dx_ + qx * dw + qy * dz_ - qz * dy_
            ny = qw * dy_ - qx * dz_ + qy * dw + qz * dx_
            nz = qw * dz_ + qx * dy_ - qy * dx_ + qz * dw
            norm = math.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
            state[3] = nw / norm
            state[4] = nx / norm
            state[5] = ny / norm
            state[6] = nz / norm

        for k in range(13 + 2 * n_u):
            v = state[k]
            if v > BLOWUP_LIMIT or v < -BLOWUP_LIMIT or v != v:
                return 1

    return 0


kernel_py = _rollout

if _numba is not None:
    kernel_jit = _numba.njit(cache=True)(_rollout)
else:
    kernel_jit = None


def numba_available() -> bool:
    return kernel_jit is not None


def default_backend() -> str:
    """Backend used when callers don't ask for one explicitly.

    GAITFORGE_NUMBA=0 forces the plain numpy path; otherwise numba is
    used whenever it imports.
    """
    if os.environ.get(NUMBA_ENV, "1") == "0":
        return "numpy"
    return "numba" if kernel_jit is not None else "numpy"


def get_kernel(backend: str | None = None):
    name = backend if backend is not None else default_backend()
    if name == "numpy":
        return kernel_py
    if name == "numba":
        if kernel_jit is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return kernel_jit
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
