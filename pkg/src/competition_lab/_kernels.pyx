# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  ``_pykernels`` mirrors every function here."""

from libc.math cimport log, INFINITY
from libc.stdint cimport int64_t, uint64_t
from libc.string cimport memcpy

import numpy as np

NAME = "compiled"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.1102230246251565e-16
cdef int64_t OFFSET = 2147483648LL
cdef uint64_t LOW32 = 0xFFFFFFFFULL


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _weight(uint64_t seed, int64_t x, int64_t y) noexcept nogil:
    cdef uint64_t idx = ((<uint64_t>(x + OFFSET) & LOW32) << 32) | (<uint64_t>(y + OFFSET) & LOW32)
    cdef uint64_t bits = _mix(seed + GAMMA * (idx + 1))
    return -log(<double>((bits >> 12) * 2 + 1) * TWO_M53)


def fill_weights(uint64_t seed, int64_t x0, int64_t x1, int64_t y0, int64_t y1):
    out = np.empty((y1 - y0 + 1, x1 - x0 + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef int64_t x, y
    with nogil:
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                o[y - y0, x - x0] = _weight(seed, x, y)
    return out


def passage_sweep(const int64_t[::1] row_start, int64_t x_lo, int64_t y_lo, int64_t top,
                  uint64_t seed, const double[:, ::1] weights, bint use_weights,
                  int64_t store_x0, int64_t store_y0, double[:, ::1] out):
    """Row-by-row last-passage recursion over the interior of a box.

    ``row_start[y - y_lo]`` is the first interior column of row ``y``; cells
    left of it are on or below the boundary and hold 0.  Only two rows are
    kept live; cells with ``x >= store_x0`` and ``y >= store_y0`` are written
    to ``out``.  Returns the number of interior cells.
    """
    cdef Py_ssize_t nx = top - x_lo + 1
    prev_arr = np.zeros(nx, dtype=np.float64)
    cur_arr = np.zeros(nx, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef int64_t x, y, s, count = 0
    cdef double gl, gd, g, w
    cdef bint store_row
    for y in range(y_lo + 1, top + 1):
        s = row_start[y - y_lo]
        store_row = y >= store_y0
        with nogil:
            for x in range(s, top + 1):
                gl = cur[x - 1 - x_lo]
                gd = prev[x - x_lo]
                if use_weights:
                    w = weights[y - y_lo, x - x_lo]
                else:
                    w = _weight(seed, x, y)
                g = (gl if gl > gd else gd) + w
                cur[x - x_lo] = g
                if store_row and x >= store_x0:
                    out[y - store_y0, x - store_x0] = g
            count += top + 1 - s
        tmp = prev
        prev = cur
        cur = tmp
    return count


def label_sweep(const double[:, ::1] G, const int64_t[::1] row_start, int64_t x_lo, int64_t y_lo,
                int64_t top, signed char[:, ::1] labels):
    """Cluster labels: each interior site copies the label of its later-occupied
    predecessor.  ``labels`` must arrive pre-filled with boundary labels."""
    cdef int64_t x, y
    cdef double gl, gd
    with nogil:
        for y in range(y_lo + 1, top + 1):
            for x in range(row_start[y - y_lo], top + 1):
                gl = G[y - y_lo, x - 1 - x_lo]
                gd = G[y - 1 - y_lo, x - x_lo]
                if gl > gd or (gl == gd and not (x == 2 and y == 1)):
                    labels[y - y_lo, x - x_lo] = labels[y - y_lo, x - 1 - x_lo]
                else:
                    labels[y - y_lo, x - x_lo] = labels[y - 1 - y_lo, x - x_lo]


cdef inline bint _jumpable(signed char a, signed char b) noexcept nogil:
    return (b == 0 and a != 0) or (a == 1 and b == 2)


cdef inline void _refresh(int64_t k, int64_t n, signed char* v, int64_t* pos,
                          int64_t* elig, int64_t* n_el) noexcept nogil:
    cdef int64_t p, last
    if k < 0 or k >= n - 1:
        return
    if _jumpable(v[k], v[k + 1]):
        if pos[k] < 0:
            pos[k] = n_el[0]
            elig[n_el[0]] = k
            n_el[0] += 1
    elif pos[k] >= 0:
        p = pos[k]
        n_el[0] -= 1
        last = elig[n_el[0]]
        elig[p] = last
        pos[last] = p
        pos[k] = -1


cdef inline int _left_rate(int64_t f, signed char* v) noexcept nogil:
    # the jump across bond (f, f+1) already carries the front when v[f] == 1
    if v[f + 1] == 0 and (f < 0 or v[f] != 1):
        return 1
    return 0


cdef inline int _right_rate(int64_t g, int64_t n, signed char* v) noexcept nogil:
    if v[g - 1] == 1 and (g >= n or v[g] != 0):
        return 1
    return 0


def tasep_run(signed char[::1] v, int64_t x_index, uint64_t seed, double t_max,
              const double[::1] obs_times, int64_t guard, bint snapshots):
    """Gillespie simulation of TASEP with one second-class particle (value 2).

    Returns ``(status, recorded, events, obs, snaps)``.  ``obs`` holds rows
    ``(X, forward, backward, left_front, right_front)`` per observation time;
    ``status`` is 1 when a contamination front came within ``guard`` sites of
    the second-class particle, in which case only ``recorded`` rows are valid.
    """
    cdef int64_t n = v.shape[0]
    cdef int64_t n_obs = obs_times.shape[0]
    pos_arr = np.full(n, -1, dtype=np.int64)
    elig_arr = np.empty(n, dtype=np.int64)
    obs_arr = np.zeros((n_obs, 5), dtype=np.int64)
    snap_arr = np.zeros((n_obs if snapshots else 0, n), dtype=np.int8)
    cdef int64_t[::1] pos_v = pos_arr
    cdef int64_t[::1] elig_v = elig_arr
    cdef int64_t[:, ::1] obs = obs_arr
    cdef signed char[:, ::1] snap = snap_arr
    cdef signed char* vp = &v[0]
    cdef int64_t* pos = &pos_v[0]
    cdef int64_t* elig = &elig_v[0]
    cdef int64_t n_el = 0
    cdef int64_t k, b, oi = 0, events = 0, fwd = 0, bwd = 0
    cdef int64_t X = x_index, f = -1, g = n
    cdef int fl, fr
    cdef uint64_t state = seed, r
    cdef double t = 0.0, t_next, u
    cdef int64_t R
    cdef signed char a, c
    cdef int status = 0

    with nogil:
        for k in range(n - 1):
            _refresh(k, n, vp, pos, elig, &n_el)
        fl = _left_rate(f, vp)
        fr = _right_rate(g, n, vp)
        while True:
            R = n_el + fl + fr
            if R == 0:
                t_next = INFINITY
            else:
                state = state + GAMMA
                u = <double>(_mix(state) >> 11) * TWO_M53
                t_next = t + (-log(1.0 - u)) / <double>R
            while oi < n_obs and obs_times[oi] < t_next:
                obs[oi, 0] = X - x_index
                obs[oi, 1] = fwd
                obs[oi, 2] = bwd
                obs[oi, 3] = f
                obs[oi, 4] = g
                if snapshots:
                    memcpy(&snap[oi, 0], vp, n)
                oi += 1
            if t_next > t_max:
                break
            t = t_next
            state = state + GAMMA
            r = _mix(state)
            k = <int64_t>(((r >> 32) * <uint64_t>R) >> 32)
            if k < n_el:
                b = elig[k]
                a = vp[b]
                c = vp[b + 1]
                vp[b] = c
                vp[b + 1] = a
                if a == 2:
                    X += 1
                    fwd += 1
                elif c == 2:
                    X -= 1
                    bwd += 1
                if b == f:
                    f += 1
                if b + 1 == g:
                    g -= 1
                _refresh(b - 1, n, vp, pos, elig, &n_el)
                _refresh(b, n, vp, pos, elig, &n_el)
                _refresh(b + 1, n, vp, pos, elig, &n_el)
                events += 1
            elif k < n_el + fl:
                f += 1
            else:
                g -= 1
            fl = _left_rate(f, vp)
            fr = _right_rate(g, n, vp)
            if X - f <= guard or g - X <= guard:
                status = 1
                break
    return status, oi, events, obs_arr, (snap_arr if snapshots else None)


def pair_replay(const int64_t[::1] ev_i, const int64_t[::1] ev_j, signed char[::1] occ,
                int64_t[::1] plab, int64_t[::1] hlab, int64_t site_lo, int64_t[:, ::1] jumps):
    """Replay exclusion events (i, j) -- particle j swaps with hole i -- and
    follow the (hole, particle) couple that starts on sites (0, 1).

    Each row of ``jumps`` receives ``(event, s, I, J)`` after a jump of the
    couple.  Returns ``(n_jumps, identity_violations, bad_events)``.
    """
    cdef int64_t m = ev_i.shape[0]
    cdef int64_t e, i, j, a, s = 0, nj = 0, viol = 0, bad = 0
    cdef int64_t I, J
    cdef bint moved
    with nogil:
        for e in range(m):
            i = ev_i[e]
            j = ev_j[e]
            a = i - j - site_lo
            if occ[a] != 1 or occ[a + 1] != 0 or plab[a] != j or hlab[a + 1] != i:
                bad += 1
            occ[a] = 0
            occ[a + 1] = 1
            plab[a + 1] = j
            hlab[a] = i
            moved = False
            if i - j == s + 1:
                s += 1
                moved = True
            elif i - j + 1 == s:
                s -= 1
                moved = True
            I = hlab[s - site_lo]
            J = plab[s + 1 - site_lo]
            if s != I - J or occ[s - site_lo] != 0 or occ[s + 1 - site_lo] != 1:
                viol += 1
            if moved:
                jumps[nj, 0] = e
                jumps[nj, 1] = s
                jumps[nj, 2] = I
                jumps[nj, 3] = J
                nj += 1
    return nj, viol, bad
