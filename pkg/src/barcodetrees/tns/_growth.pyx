# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled growth kernel.

Twin of ``_growth_py.grow``: same PCG64 draw order, same float arithmetic
(compiled with fp-contraction off), so the two kernels produce bit-identical
trees for a fixed seed.  See the Python module for the model description.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, fabs, log1p, sin, sqrt
from libc.stdlib cimport free, malloc, realloc

import numpy as np

from numpy.random cimport bitgen_t

cdef double TWO_PI = 6.283185307179586
cdef enum:
    MEM_LEN = 20
cdef double HALF_TAIL = 0.5 ** (MEM_LEN - 1)

KERNEL_NAME = "compiled"


cdef struct GrowState:
    bitgen_t *bitgen
    double lam


cdef inline double uniform(GrowState *gs) noexcept nogil:
    return gs.bitgen.next_double(gs.bitgen.state)


cdef inline double exp_draw(GrowState *gs) noexcept nogil:
    return -log1p(-uniform(gs)) / gs.lam


cdef inline void _frame(double hx, double hy, double hz,
                        double *e1, double *e2) noexcept nogil:
    cdef double e1x, e1y, e1z, norm
    if fabs(hz) <= 0.9:
        e1x = -hy; e1y = hx; e1z = 0.0
    else:
        e1x = 0.0; e1y = -hz; e1z = hy
    norm = sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
    e1x = e1x / norm; e1y = e1y / norm; e1z = e1z / norm
    e1[0] = e1x; e1[1] = e1y; e1[2] = e1z
    e2[0] = hy * e1z - hz * e1y
    e2[1] = hz * e1x - hx * e1z
    e2[2] = hx * e1y - hy * e1x


cdef inline void step_direction(GrowState *gs, double rho, double tau, double mu,
                                double tx, double ty, double tz,
                                double sx, double sy, double sz, long long count,
                                double *out) noexcept nogil:
    cdef double mx, my, mz, norm, z, phi, s, rx, ry, rz, vx, vy, vz
    if count == 0:
        mx = tx; my = ty; mz = tz
    else:
        norm = sqrt(sx * sx + sy * sy + sz * sz)
        if norm > 0.0:
            mx = sx / norm; my = sy / norm; mz = sz / norm
        else:
            mx = tx; my = ty; mz = tz
    while True:
        z = 2.0 * uniform(gs) - 1.0
        phi = TWO_PI * uniform(gs)
        s = sqrt(1.0 - z * z)
        rx = s * cos(phi)
        ry = s * sin(phi)
        rz = z
        vx = rho * rx + tau * tx + mu * mx
        vy = rho * ry + tau * ty + mu * my
        vz = rho * rz + tau * tz + mu * mz
        norm = sqrt(vx * vx + vy * vy + vz * vz)
        if norm > 0.0:
            out[0] = vx / norm
            out[1] = vy / norm
            out[2] = vz / norm
            return


cdef long long _acquire(GrowState *gs, double[::1] births, double[::1] deaths,
                        unsigned char[::1] used, long long[::1] t_bar,
                        double[:, ::1] st, long long[::1] t_target,
                        Py_ssize_t t) noexcept nogil:
    # st columns: 0 x, 1-3 pos, 4-6 target dir, 7 Tb, 8 Td
    cdef long long tb = t_bar[t]
    cdef double d_own = deaths[tb]
    cdef long long found = -1
    cdef long long j
    cdef double bj, base
    for j in range(tb + 1, births.shape[0]):
        if used[j] == 0 and deaths[j] < d_own:
            found = j
            break
    t_target[t] = found
    if found >= 0:
        bj = births[found]
        base = bj if bj > st[t, 0] else st[t, 0]
        st[t, 7] = base + exp_draw(gs)
    elif st[t, 8] <= st[t, 0]:
        # obligations outlived the death target: re-arm from here
        st[t, 8] = st[t, 0] + exp_draw(gs)
    return found


cdef inline void _push(double[:, ::1] st, double[::1] t_ring,
                       long long[:, ::1] t_mem, Py_ssize_t t,
                       double length, double *dirv) noexcept nogil:
    cdef Py_ssize_t base = 3 * MEM_LEN * t
    cdef long long head = t_mem[t, 1]
    cdef Py_ssize_t slot = base + 3 * head
    st[t, 1] += length * dirv[0]
    st[t, 2] += length * dirv[1]
    st[t, 3] += length * dirv[2]
    if t_mem[t, 0] >= MEM_LEN:
        st[t, 9] = dirv[0] + 0.5 * (st[t, 9] - HALF_TAIL * t_ring[slot])
        st[t, 10] = dirv[1] + 0.5 * (st[t, 10] - HALF_TAIL * t_ring[slot + 1])
        st[t, 11] = dirv[2] + 0.5 * (st[t, 11] - HALF_TAIL * t_ring[slot + 2])
    else:
        st[t, 9] = dirv[0] + 0.5 * st[t, 9]
        st[t, 10] = dirv[1] + 0.5 * st[t, 10]
        st[t, 11] = dirv[2] + 0.5 * st[t, 11]
        t_mem[t, 0] = t_mem[t, 0] + 1
    t_ring[slot] = dirv[0]
    t_ring[slot + 1] = dirv[1]
    t_ring[slot + 2] = dirv[2]
    t_mem[t, 1] = (head + 1) % MEM_LEN


def grow(births_in, deaths_in, double lam, double rho, double tau, double mu,
         double step, double polar_min, double polar_max, rng,
         bint store_vertices=True):
    """Compiled twin of ``_growth_py.grow`` (same signature and output)."""
    cdef double[::1] births = np.ascontiguousarray(births_in, dtype=np.float64)
    cdef double[::1] deaths = np.ascontiguousarray(deaths_in, dtype=np.float64)
    cdef Py_ssize_t n1 = births.shape[0]

    capsule = rng.bit_generator.capsule
    cdef GrowState gs
    gs.bitgen = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    gs.lam = lam

    used_np = np.zeros(n1, dtype=np.uint8)
    bar_birth_np = np.zeros(n1, dtype=np.float64)
    bar_death_np = np.zeros(n1, dtype=np.float64)
    bar_host_np = np.full(n1, -1, dtype=np.int64)
    bar_attach_np = np.full(n1, -1, dtype=np.int64)
    bar_leaf_np = np.full(n1, -1, dtype=np.int64)
    cdef unsigned char[::1] used = used_np
    cdef double[::1] bar_birth = bar_birth_np
    cdef double[::1] bar_death = bar_death_np
    cdef long long[::1] bar_host = bar_host_np
    cdef long long[::1] bar_attach = bar_attach_np
    cdef long long[::1] bar_leaf = bar_leaf_np

    t_bar_np = np.zeros(n1, dtype=np.int64)
    t_alive_np = np.zeros(n1, dtype=np.uint8)
    t_state_np = np.zeros((n1, 12), dtype=np.float64)
    t_ring_np = np.zeros(n1 * 3 * MEM_LEN, dtype=np.float64)
    t_mem_np = np.zeros((n1, 2), dtype=np.int64)  # count, head
    t_target_np = np.full(n1, -1, dtype=np.int64)
    t_parent_np = np.full(n1, -1, dtype=np.int64)
    cdef long long[::1] t_bar = t_bar_np
    cdef unsigned char[::1] t_alive = t_alive_np
    cdef double[:, ::1] st = t_state_np
    cdef double[::1] t_ring = t_ring_np
    cdef long long[:, ::1] t_mem = t_mem_np
    cdef long long[::1] t_target = t_target_np
    cdef long long[::1] t_parent = t_parent_np

    cdef Py_ssize_t vcap = 1024, vn = 0
    cdef double *vxyz = <double *> malloc(3 * vcap * sizeof(double))
    cdef long long *vpar = <long long *> malloc(vcap * sizeof(long long))
    if vxyz == NULL or vpar == NULL:
        free(vxyz); free(vpar)
        raise MemoryError()

    cdef Py_ssize_t n_tips, n_alive, count_now, t, c
    cdef long long target, j, found
    cdef double d_own, bj, base, step_end, length
    cdef double dirv[3]
    cdef double e1[3]
    cdef double e2[3]
    cdef double a, psi, ca, sa, cp, sp, ctx, cty, ctz, td_child, dx, dy, dz
    cdef double *new_xyz
    cdef long long *new_par
    cdef double[:, ::1] pos_view
    cdef long long[::1] par_view

    try:
        # root tip
        used[0] = 1
        t_bar[0] = 0
        t_alive[0] = 1
        st[0, 4] = 0.0; st[0, 5] = 0.0; st[0, 6] = 1.0
        st[0, 8] = deaths[0] + exp_draw(&gs)
        n_tips = 1
        n_alive = 1
        _acquire(&gs, births, deaths, used, t_bar, st, t_target, 0)
        if store_vertices:
            vxyz[0] = 0.0; vxyz[1] = 0.0; vxyz[2] = 0.0
            vpar[0] = -1
            t_parent[0] = 0
            vn = 1

        while n_alive > 0:
            count_now = n_tips
            for t in range(count_now):
                if t_alive[t] == 0:
                    continue
                target = t_target[t]
                if target >= 0 and used[target] != 0:
                    target = _acquire(&gs, births, deaths, used, t_bar, st,
                                      t_target, t)
                step_end = st[t, 0] + step
                if target >= 0 and st[t, 7] <= step_end:
                    # bifurcation wins the step; land exactly on the threshold
                    length = st[t, 7] - st[t, 0]
                    step_direction(&gs, rho, tau, mu, st[t, 4], st[t, 5], st[t, 6],
                                   st[t, 9], st[t, 10], st[t, 11],
                                   t_mem[t, 0], dirv)
                    _push(st, t_ring, t_mem, t, length, dirv)
                    st[t, 0] = st[t, 7]
                    j = target
                    used[j] = 1
                    bar_birth[j] = st[t, 0]
                    bar_host[j] = t_bar[t]
                    if store_vertices:
                        if vn == vcap:
                            vcap *= 2
                            new_xyz = <double *> realloc(vxyz, 3 * vcap * sizeof(double))
                            new_par = <long long *> realloc(vpar, vcap * sizeof(long long))
                            if new_xyz == NULL or new_par == NULL:
                                raise MemoryError()
                            vxyz = new_xyz; vpar = new_par
                        vxyz[3 * vn] = st[t, 1]
                        vxyz[3 * vn + 1] = st[t, 2]
                        vxyz[3 * vn + 2] = st[t, 3]
                        vpar[vn] = t_parent[t]
                        t_parent[t] = vn
                        bar_attach[j] = vn
                        vn += 1
                    a = polar_min + uniform(&gs) * (polar_max - polar_min)
                    psi = TWO_PI * uniform(&gs)
                    dx = dirv[0]; dy = dirv[1]; dz = dirv[2]
                    _frame(dx, dy, dz, e1, e2)
                    ca = cos(a); sa = sin(a)
                    cp = cos(psi); sp = sin(psi)
                    ctx = ca * dx + sa * (cp * e1[0] + sp * e2[0])
                    cty = ca * dy + sa * (cp * e1[1] + sp * e2[1])
                    ctz = ca * dz + sa * (cp * e1[2] + sp * e2[2])
                    td_child = deaths[j] + exp_draw(&gs)
                    if td_child <= st[t, 0]:
                        td_child = st[t, 0] + exp_draw(&gs)
                    _acquire(&gs, births, deaths, used, t_bar, st, t_target, t)
                    c = n_tips
                    n_tips += 1
                    t_bar[c] = j
                    t_alive[c] = 1
                    st[c, 0] = st[t, 0]
                    st[c, 1] = st[t, 1]; st[c, 2] = st[t, 2]; st[c, 3] = st[t, 3]
                    st[c, 4] = ctx; st[c, 5] = cty; st[c, 6] = ctz
                    st[c, 9] = 0.0; st[c, 10] = 0.0; st[c, 11] = 0.0
                    t_mem[c, 0] = 0
                    t_mem[c, 1] = 0
                    st[c, 8] = td_child
                    t_parent[c] = t_parent[t]
                    _acquire(&gs, births, deaths, used, t_bar, st, t_target, c)
                    n_alive += 1
                elif target < 0 and st[t, 8] <= step_end:
                    length = st[t, 8] - st[t, 0]
                    step_direction(&gs, rho, tau, mu, st[t, 4], st[t, 5], st[t, 6],
                                   st[t, 9], st[t, 10], st[t, 11],
                                   t_mem[t, 0], dirv)
                    _push(st, t_ring, t_mem, t, length, dirv)
                    st[t, 0] = st[t, 8]
                    bar_death[t_bar[t]] = st[t, 0]
                    if store_vertices:
                        if vn == vcap:
                            vcap *= 2
                            new_xyz = <double *> realloc(vxyz, 3 * vcap * sizeof(double))
                            new_par = <long long *> realloc(vpar, vcap * sizeof(long long))
                            if new_xyz == NULL or new_par == NULL:
                                raise MemoryError()
                            vxyz = new_xyz; vpar = new_par
                        vxyz[3 * vn] = st[t, 1]
                        vxyz[3 * vn + 1] = st[t, 2]
                        vxyz[3 * vn + 2] = st[t, 3]
                        vpar[vn] = t_parent[t]
                        t_parent[t] = vn
                        bar_leaf[t_bar[t]] = vn
                        vn += 1
                    t_alive[t] = 0
                    n_alive -= 1
                else:
                    step_direction(&gs, rho, tau, mu, st[t, 4], st[t, 5], st[t, 6],
                                   st[t, 9], st[t, 10], st[t, 11],
                                   t_mem[t, 0], dirv)
                    _push(st, t_ring, t_mem, t, step, dirv)
                    st[t, 0] = st[t, 0] + step
                    if store_vertices:
                        if vn == vcap:
                            vcap *= 2
                            new_xyz = <double *> realloc(vxyz, 3 * vcap * sizeof(double))
                            new_par = <long long *> realloc(vpar, vcap * sizeof(long long))
                            if new_xyz == NULL or new_par == NULL:
                                raise MemoryError()
                            vxyz = new_xyz; vpar = new_par
                        vxyz[3 * vn] = st[t, 1]
                        vxyz[3 * vn + 1] = st[t, 2]
                        vxyz[3 * vn + 2] = st[t, 3]
                        vpar[vn] = t_parent[t]
                        t_parent[t] = vn
                        vn += 1

        positions = np.empty((vn, 3), dtype=np.float64)
        parents = np.empty(vn, dtype=np.int64)
        if vn > 0:
            pos_view = positions
            par_view = parents
            for t in range(vn):
                pos_view[t, 0] = vxyz[3 * t]
                pos_view[t, 1] = vxyz[3 * t + 1]
                pos_view[t, 2] = vxyz[3 * t + 2]
                par_view[t] = vpar[t]
    finally:
        free(vxyz)
        free(vpar)

    return {
        "positions": positions,
        "parents": parents,
        "bar_birth": bar_birth_np,
        "bar_death": bar_death_np,
        "bar_host": bar_host_np,
        "bar_attach_vertex": bar_attach_np,
        "bar_leaf_vertex": bar_leaf_np,
    }
