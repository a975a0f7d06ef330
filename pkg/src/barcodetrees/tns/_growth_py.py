"""Pure-Python growth kernel.

Mirrors the compiled kernel in ``_growth.pyx`` operation for operation: both
consume the PCG64 stream through scalar doubles in the same order and apply
the same float arithmetic, so a fixed seed produces bit-identical trees
whichever kernel is selected at import time.

Growth model: all active tips advance in lockstep rounds of one segment per
round.  A tip carries its bar (b, d), a termination threshold d + Exp(lam),
and, while unused bars strictly contained in its own bar remain, a
bifurcation target j (the unused one with the smallest birth) with threshold
max(b_j, x) + Exp(lam).  Crossing a threshold truncates the segment so the
event lands exactly at the threshold distance; bifurcation is checked before
termination, and a tip holding a target never terminates.  Thresholds are
exact, so realized birth/death overshoots are exactly Exp(lam) whenever the
target lies ahead of the tip.

The direction memory is the half-decay weighted sum of the last 20 segment
directions, maintained incrementally (halving is exact, so the weights stay
exact powers of two); the ring buffer only feeds the dropped tail term.
"""

from __future__ import annotations

import math

import numpy as np

KERNEL_NAME = "python"

_TWO_PI = 6.283185307179586
_MEM_LEN = 20
_HALF_TAIL = 0.5 ** (_MEM_LEN - 1)
_BUF = 8192

# per-tip state list layout
_X, _PX, _PY, _PZ, _TX, _TY, _TZ, _SX, _SY, _SZ, _TB, _TD, _CNT, _HEAD, \
    _BAR, _TARGET, _PARENT = range(17)


def memory_sums(memory):
    """Replay the incremental half-decay sums over a direction history
    (most recent last); reference helper for the single-step operation."""
    sx = sy = sz = 0.0
    ring = [0.0] * (3 * _MEM_LEN)
    count = head = 0
    for dx, dy, dz in memory:
        if count >= _MEM_LEN:
            base = 3 * head
            sx = dx + 0.5 * (sx - _HALF_TAIL * ring[base])
            sy = dy + 0.5 * (sy - _HALF_TAIL * ring[base + 1])
            sz = dz + 0.5 * (sz - _HALF_TAIL * ring[base + 2])
        else:
            sx = dx + 0.5 * sx
            sy = dy + 0.5 * sy
            sz = dz + 0.5 * sz
        base = 3 * head
        ring[base] = dx
        ring[base + 1] = dy
        ring[base + 2] = dz
        head = (head + 1) % _MEM_LEN
        count = min(count + 1, _MEM_LEN)
    return sx, sy, sz, count


def step_direction(uniform, rho, tau, mu, tx, ty, tz, sx, sy, sz, count):
    """One elongation direction: normalize(rho*r + tau*t + mu*m).

    ``r`` is uniform on the unit sphere, ``m`` the unit-normalized memory
    sum (the target substitutes while there is no history).  Resamples r on
    an exactly-zero resultant.
    """
    if count == 0:
        mx, my, mz = tx, ty, tz
    else:
        norm = math.sqrt(sx * sx + sy * sy + sz * sz)
        if norm > 0.0:
            mx, my, mz = sx / norm, sy / norm, sz / norm
        else:
            mx, my, mz = tx, ty, tz
    while True:
        z = 2.0 * uniform() - 1.0
        phi = _TWO_PI * uniform()
        s = math.sqrt(1.0 - z * z)
        rx = s * math.cos(phi)
        ry = s * math.sin(phi)
        rz = z
        vx = rho * rx + tau * tx + mu * mx
        vy = rho * ry + tau * ty + mu * my
        vz = rho * rz + tau * tz + mu * mz
        norm = math.sqrt(vx * vx + vy * vy + vz * vz)
        if norm > 0.0:
            return vx / norm, vy / norm, vz / norm


def grow(births, deaths, lam, rho, tau, mu, step, polar_min, polar_max,
         rng, store_vertices=True):
    """Run the growth process; see the module docstring for the model.

    Returns a dict with the realized per-bar record (birth, death, host) and,
    when ``store_vertices``, the full polyline (positions, parents) plus the
    branch-point and leaf vertex of every bar.
    """
    births = [float(v) for v in births]
    deaths = [float(v) for v in deaths]
    n1 = len(births)

    sqrt, cos, sin, log1p = math.sqrt, math.cos, math.sin, math.log1p
    two_pi = _TWO_PI
    half_tail = _HALF_TAIL
    mem_len = _MEM_LEN

    buf: list = []
    buf_i = _BUF

    def u():
        nonlocal buf, buf_i
        if buf_i == _BUF:
            buf = rng.random(_BUF).tolist()
            buf_i = 0
        v = buf[buf_i]
        buf_i += 1
        return v

    def exp_draw():
        return -log1p(-u()) / lam

    used = [False] * n1
    bar_birth = [0.0] * n1
    bar_death = [0.0] * n1
    bar_host = [-1] * n1
    bar_attach = [-1] * n1
    bar_leaf = [-1] * n1
    used[0] = True

    tips = []   # state lists, layout per the module constants
    rings = []  # flat 3 * MEM_LEN direction history per tip

    vx_list: list = []
    vp_list: list = []

    def acquire_target(st):
        tb = st[_BAR]
        d_own = deaths[tb]
        found = -1
        for j in range(tb + 1, n1):
            if not used[j] and deaths[j] < d_own:
                found = j
                break
        st[_TARGET] = found
        if found >= 0:
            bj = births[found]
            x = st[_X]
            base = bj if bj > x else x
            st[_TB] = base + exp_draw()
        elif st[_TD] <= st[_X]:
            # obligations outlived the death target: re-arm from here
            st[_TD] = st[_X] + exp_draw()

    root = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, deaths[0] + exp_draw(), 0, 0, 0, -1, -1]
    tips.append(root)
    rings.append([0.0] * (3 * mem_len))
    acquire_target(root)
    if store_vertices:
        vx_list.append((0.0, 0.0, 0.0))
        vp_list.append(-1)
        root[_PARENT] = 0
    n_alive = 1

    while n_alive > 0:
        count_now = len(tips)
        for t in range(count_now):
            st = tips[t]
            bar = st[_BAR]
            if bar < 0:
                continue  # dead tip (bar index is flipped negative)
            target = st[_TARGET]
            if target >= 0 and used[target]:
                acquire_target(st)
                target = st[_TARGET]
            x = st[_X]
            step_end = x + step
            event = 0
            if target >= 0:
                if st[_TB] <= step_end:
                    event = 1
                    length = st[_TB] - x
                else:
                    length = step
            elif st[_TD] <= step_end:
                event = 2
                length = st[_TD] - x
            else:
                length = step

            # direction = normalize(rho*r + tau*t + mu*m), inlined
            tx, ty, tz = st[_TX], st[_TY], st[_TZ]
            count = st[_CNT]
            if count == 0:
                mx, my, mz = tx, ty, tz
            else:
                sx, sy, sz = st[_SX], st[_SY], st[_SZ]
                norm = sqrt(sx * sx + sy * sy + sz * sz)
                if norm > 0.0:
                    mx, my, mz = sx / norm, sy / norm, sz / norm
                else:
                    mx, my, mz = tx, ty, tz
            while True:
                if buf_i == _BUF:
                    buf = rng.random(_BUF).tolist()
                    buf_i = 0
                z = 2.0 * buf[buf_i] - 1.0
                buf_i += 1
                if buf_i == _BUF:
                    buf = rng.random(_BUF).tolist()
                    buf_i = 0
                phi = two_pi * buf[buf_i]
                buf_i += 1
                s = sqrt(1.0 - z * z)
                rx = s * cos(phi)
                ry = s * sin(phi)
                rz = z
                vx = rho * rx + tau * tx + mu * mx
                vy = rho * ry + tau * ty + mu * my
                vz = rho * rz + tau * tz + mu * mz
                norm = sqrt(vx * vx + vy * vy + vz * vz)
                if norm > 0.0:
                    break
            dx = vx / norm
            dy = vy / norm
            dz = vz / norm

            st[_PX] += length * dx
            st[_PY] += length * dy
            st[_PZ] += length * dz
            ring = rings[t]
            head = st[_HEAD]
            base = 3 * head
            if count >= mem_len:
                st[_SX] = dx + 0.5 * (st[_SX] - half_tail * ring[base])
                st[_SY] = dy + 0.5 * (st[_SY] - half_tail * ring[base + 1])
                st[_SZ] = dz + 0.5 * (st[_SZ] - half_tail * ring[base + 2])
            else:
                st[_SX] = dx + 0.5 * st[_SX]
                st[_SY] = dy + 0.5 * st[_SY]
                st[_SZ] = dz + 0.5 * st[_SZ]
                st[_CNT] = count + 1
            ring[base] = dx
            ring[base + 1] = dy
            ring[base + 2] = dz
            st[_HEAD] = (head + 1) % mem_len

            if event == 0:
                st[_X] = x + step
                if store_vertices:
                    vx_list.append((st[_PX], st[_PY], st[_PZ]))
                    vp_list.append(st[_PARENT])
                    st[_PARENT] = len(vp_list) - 1
                continue

            if event == 1:
                # bifurcation: land exactly on the threshold, claim the bar
                st[_X] = st[_TB]
                j = target
                used[j] = True
                bar_birth[j] = st[_X]
                bar_host[j] = bar
                if store_vertices:
                    vx_list.append((st[_PX], st[_PY], st[_PZ]))
                    vp_list.append(st[_PARENT])
                    st[_PARENT] = len(vp_list) - 1
                    bar_attach[j] = st[_PARENT]
                a = polar_min + u() * (polar_max - polar_min)
                psi = two_pi * u()
                if abs(dz) <= 0.9:
                    e1x, e1y, e1z = -dy, dx, 0.0
                else:
                    e1x, e1y, e1z = 0.0, -dz, dy
                norm = sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
                e1x, e1y, e1z = e1x / norm, e1y / norm, e1z / norm
                e2x = dy * e1z - dz * e1y
                e2y = dz * e1x - dx * e1z
                e2z = dx * e1y - dy * e1x
                ca, sa = cos(a), sin(a)
                cp, sp = cos(psi), sin(psi)
                ctx = ca * dx + sa * (cp * e1x + sp * e2x)
                cty = ca * dy + sa * (cp * e1y + sp * e2y)
                ctz = ca * dz + sa * (cp * e1z + sp * e2z)
                td_child = deaths[j] + exp_draw()
                if td_child <= st[_X]:
                    td_child = st[_X] + exp_draw()
                acquire_target(st)
                child = [st[_X], st[_PX], st[_PY], st[_PZ], ctx, cty, ctz,
                         0.0, 0.0, 0.0, 0.0, td_child, 0, 0, j, -1, st[_PARENT]]
                tips.append(child)
                rings.append([0.0] * (3 * mem_len))
                acquire_target(child)
                n_alive += 1
            else:
                # termination: land exactly on the threshold
                st[_X] = st[_TD]
                bar_death[bar] = st[_X]
                if store_vertices:
                    vx_list.append((st[_PX], st[_PY], st[_PZ]))
                    vp_list.append(st[_PARENT])
                    st[_PARENT] = len(vp_list) - 1
                    bar_leaf[bar] = st[_PARENT]
                st[_BAR] = -1
                n_alive -= 1

    return {
        "positions": np.asarray(vx_list, dtype=np.float64).reshape(len(vp_list), 3),
        "parents": np.asarray(vp_list, dtype=np.int64),
        "bar_birth": np.asarray(bar_birth, dtype=np.float64),
        "bar_death": np.asarray(bar_death, dtype=np.float64),
        "bar_host": np.asarray(bar_host, dtype=np.int64),
        "bar_attach_vertex": np.asarray(bar_attach, dtype=np.int64),
        "bar_leaf_vertex": np.asarray(bar_leaf, dtype=np.int64),
    }
