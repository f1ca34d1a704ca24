"""Pure-Python versions of the compiled kernels.

Same signatures, same arithmetic, same random streams: results agree with
``_kernels`` bit for bit.  Used when the extension is not built or when
``COMPETITION_LAB_BACKEND=python``.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import GAMMA, MASK64, TWO_M53, mix64, site_weight, site_weights_block

NAME = "python"


def fill_weights(seed, x0, x1, y0, y1):
    return site_weights_block(seed, x0, x1, y0, y1)


def passage_sweep(row_start, x_lo, y_lo, top, seed, weights, use_weights, store_x0, store_y0, out):
    nx = top - x_lo + 1
    prev = [0.0] * nx
    cur = [0.0] * nx
    count = 0
    for y in range(y_lo + 1, top + 1):
        s = int(row_start[y - y_lo])
        if use_weights:
            wrow = weights[y - y_lo].tolist()
        orow = out[y - store_y0] if y >= store_y0 else None
        for x in range(s, top + 1):
            k = x - x_lo
            gl = cur[k - 1]
            gd = prev[k]
            w = wrow[k] if use_weights else site_weight(seed, x, y)
            g = (gl if gl > gd else gd) + w
            cur[k] = g
            if orow is not None and x >= store_x0:
                orow[x - store_x0] = g
        count += top + 1 - s
        prev, cur = cur, prev
    return count


def label_sweep(G, row_start, x_lo, y_lo, top, labels):
    for y in range(y_lo + 1, top + 1):
        r, rd = y - y_lo, y - 1 - y_lo
        grow, gdown = G[r], G[rd]
        lrow, ldown = labels[r], labels[rd]
        for x in range(int(row_start[r]), top + 1):
            k = x - x_lo
            gl = grow[k - 1]
            gd = gdown[k]
            if gl > gd or (gl == gd and not (x == 2 and y == 1)):
                lrow[k] = lrow[k - 1]
            else:
                lrow[k] = ldown[k]


def _jumpable(a, b):
    return (b == 0 and a != 0) or (a == 1 and b == 2)


def tasep_run(v, x_index, seed, t_max, obs_times, guard, snapshots):
    n = v.shape[0]
    n_obs = len(obs_times)
    vals = v.tolist()
    pos = [-1] * n
    elig = []
    obs = np.zeros((n_obs, 5), dtype=np.int64)
    snaps = np.zeros((n_obs, n), dtype=np.int8) if snapshots else None

    def refresh(k):
        if k < 0 or k >= n - 1:
            return
        if _jumpable(vals[k], vals[k + 1]):
            if pos[k] < 0:
                pos[k] = len(elig)
                elig.append(k)
        elif pos[k] >= 0:
            p = pos[k]
            last = elig.pop()
            if last != k:
                elig[p] = last
                pos[last] = p
            pos[k] = -1

    def left_rate(f):
        return 1 if vals[f + 1] == 0 and (f < 0 or vals[f] != 1) else 0

    def right_rate(g):
        return 1 if vals[g - 1] == 1 and (g >= n or vals[g] != 0) else 0

    for k in range(n - 1):
        refresh(k)
    X, f, g = x_index, -1, n
    fl, fr = left_rate(f), right_rate(g)
    state = seed & MASK64
    t = 0.0
    oi = events = fwd = bwd = 0
    status = 0
    while True:
        R = len(elig) + fl + fr
        if R == 0:
            t_next = math.inf
        else:
            state = (state + GAMMA) & MASK64
            u = (mix64(state) >> 11) * TWO_M53
            t_next = t + (-math.log(1.0 - u)) / R
        while oi < n_obs and obs_times[oi] < t_next:
            obs[oi] = (X - x_index, fwd, bwd, f, g)
            if snapshots:
                snaps[oi] = vals
            oi += 1
        if t_next > t_max:
            break
        t = t_next
        state = (state + GAMMA) & MASK64
        k = ((mix64(state) >> 32) * R) >> 32
        n_el = len(elig)
        if k < n_el:
            b = elig[k]
            a, c = vals[b], vals[b + 1]
            vals[b], vals[b + 1] = c, a
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
            refresh(b - 1)
            refresh(b)
            refresh(b + 1)
            events += 1
        elif k < n_el + fl:
            f += 1
        else:
            g -= 1
        fl, fr = left_rate(f), right_rate(g)
        if X - f <= guard or g - X <= guard:
            status = 1
            break
    v[:] = vals
    return status, oi, events, obs, snaps


def pair_replay(ev_i, ev_j, occ, plab, hlab, site_lo, jumps):
    o = occ.tolist()
    pl = plab.tolist()
    hl = hlab.tolist()
    s = nj = viol = bad = 0
    for e, (i, j) in enumerate(zip(ev_i.tolist(), ev_j.tolist())):
        a = i - j - site_lo
        if o[a] != 1 or o[a + 1] != 0 or pl[a] != j or hl[a + 1] != i:
            bad += 1
        o[a], o[a + 1] = 0, 1
        pl[a + 1] = j
        hl[a] = i
        moved = False
        if i - j == s + 1:
            s += 1
            moved = True
        elif i - j + 1 == s:
            s -= 1
            moved = True
        I = hl[s - site_lo]
        J = pl[s + 1 - site_lo]
        if s != I - J or o[s - site_lo] != 0 or o[s + 1 - site_lo] != 1:
            viol += 1
        if moved:
            jumps[nj] = (e, s, I, J)
            nj += 1
    occ[:] = o
    plab[:] = pl
    hlab[:] = hl
    return nj, viol, bad
