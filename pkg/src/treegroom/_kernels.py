"""Compiled grooming primitives shared by ``GroomingState`` and the decoder.

State layout (``W`` wavelengths of capacity, ``M`` patterns, ``L`` directed
links, ``n`` nodes, ``N`` demands), all 0-based:

    load[W, M, L]   used capacity per link
    nadd[W, M, n]   units originated electronically at a node
    ndrop[W, M, n]  units terminated electronically at a node
    drops[W, n]     ADM present
    rem[N, M]       unassigned units
    nparts[N]       Part fragments placed so far
    frag[F, 7]      demand, kind, ordinal, wavelength, cut node, route start, route stop
    famt[F, M]      per-pattern units of each fragment
    meta[1]         fragment count

A segment of demand ``k`` covers route positions ``[start, stop)``.
"""

import numpy as np
from numba import njit

WHOLE = 0
PART = 1
SEG_SRC = 2
SEG_DST = 3

PLACED = 0
REFUSED_BUDGET = 1
REFUSED_ENDPOINT = 2
REFUSED_NO_SPARE = 3
REFUSED_SHORT = 4
REFUSED_NO_PARTNER = 5
REFUSED_NO_ROOM = 6

MODE_DIVIDE = 1
MODE_CUT = 2


@njit(cache=True)
def seg_fits(load, nadd, ndrop, g, w, links, start, stop, a, b, amt):
    for m in range(amt.shape[0]):
        x = amt[m]
        if x == 0:
            continue
        if nadd[w, m, a] + x > g or ndrop[w, m, b] + x > g:
            return False
        for t in range(start, stop):
            if load[w, m, links[t]] + x > g:
                return False
    return True


@njit(cache=True)
def seg_place(load, nadd, ndrop, drops, w, links, start, stop, a, b, amt):
    for m in range(amt.shape[0]):
        x = amt[m]
        if x == 0:
            continue
        nadd[w, m, a] += x
        ndrop[w, m, b] += x
        for t in range(start, stop):
            load[w, m, links[t]] += x
    drops[w, a] = True
    drops[w, b] = True


@njit(cache=True)
def record(frag, famt, meta, k, kind, ordinal, w, cut, start, stop, amt):
    f = meta[0]
    frag[f, 0] = k
    frag[f, 1] = kind
    frag[f, 2] = ordinal
    frag[f, 3] = w
    frag[f, 4] = cut
    frag[f, 5] = start
    frag[f, 6] = stop
    for m in range(amt.shape[0]):
        famt[f, m] = amt[m]
    meta[0] = f + 1


@njit(cache=True)
def adm_delta(drops, w, a, b):
    return (0 if drops[w, a] else 1) + (0 if drops[w, b] else 1)


@njit(cache=True)
def fits_whole(load, nadd, ndrop, g, w, k, rem, src, dst, rlen, rlinks):
    return seg_fits(load, nadd, ndrop, g, w, rlinks[k], 0, rlen[k], src[k], dst[k], rem[k])


@njit(cache=True)
def place_whole(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, w, k, src, dst, rlen, rlinks):
    amt = rem[k].copy()
    seg_place(load, nadd, ndrop, drops, w, rlinks[k], 0, rlen[k], src[k], dst[k], amt)
    if nparts[k] == 0:
        record(frag, famt, meta, k, WHOLE, 0, w, -1, 0, rlen[k], amt)
    else:
        # remainder of a divided demand is its last part
        record(frag, famt, meta, k, PART, nparts[k], w, -1, 0, rlen[k], amt)
        nparts[k] += 1
    rem[k, :] = 0


@njit(cache=True)
def try_divide(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, g, w, k, max_parts,
               src, dst, rlen, rlinks):
    # the placed part plus the remainder it leaves must both fit the budget
    if nparts[k] + 2 > max_parts:
        return REFUSED_BUDGET
    a = src[k]
    b = dst[k]
    if not (drops[w, a] and drops[w, b]):
        return REFUSED_ENDPOINT
    M = rem.shape[1]
    links = rlinks[k]
    part = np.zeros(M, np.int64)
    for m in range(M):
        r = rem[k, m]
        if r == 0:
            continue
        d = r
        s = g - nadd[w, m, a]
        if s < d:
            d = s
        s = g - ndrop[w, m, b]
        if s < d:
            d = s
        for t in range(rlen[k]):
            s = g - load[w, m, links[t]]
            if s < d:
                d = s
        if d <= 0:
            return REFUSED_NO_SPARE
        part[m] = d
    seg_place(load, nadd, ndrop, drops, w, links, 0, rlen[k], a, b, part)
    record(frag, famt, meta, k, PART, nparts[k], w, -1, 0, rlen[k], part)
    nparts[k] += 1
    for m in range(M):
        rem[k, m] -= part[m]
    return PLACED


@njit(cache=True)
def find_cut(load, nadd, ndrop, drops, rem, g, w, k, src, dst, rlen, rlinks, rnodes):
    """Best cut of demand ``k`` anchored on wavelength ``w``.

    Returns ``(code, pos, s, side)``: ``pos`` is the route position of the
    cut node, ``s`` the partner wavelength and ``side`` 0 when the on-``w``
    segment is the source-side one.
    """
    L = rlen[k]
    if L < 2:
        return REFUSED_SHORT, -1, -1, -1
    a = src[k]
    b = dst[k]
    links = rlinks[k]
    nodes = rnodes[k]
    amt = rem[k]
    best_len = -1
    best_f = -1
    best_s = -1
    best_pos = -1
    best_side = -1
    any_partner = False
    for side in range(2):
        e = a if side == 0 else b
        other = b if side == 0 else a
        if not drops[w, e]:
            continue
        for pos in range(1, L):
            f = nodes[pos]
            if not drops[w, f]:
                continue
            seg_len = pos if side == 0 else L - pos
            if seg_len < best_len:
                continue
            on_w_ok = False
            checked = False
            for s in range(w):
                if not (drops[s, f] and drops[s, other]):
                    continue
                any_partner = True
                if seg_len == best_len and (f > best_f or (f == best_f and s >= best_s)):
                    continue
                if not checked:
                    checked = True
                    if side == 0:
                        on_w_ok = seg_fits(load, nadd, ndrop, g, w, links, 0, pos, a, f, amt)
                    else:
                        on_w_ok = seg_fits(load, nadd, ndrop, g, w, links, pos, L, f, b, amt)
                if not on_w_ok:
                    break
                if side == 0:
                    ok = seg_fits(load, nadd, ndrop, g, s, links, pos, L, f, b, amt)
                else:
                    ok = seg_fits(load, nadd, ndrop, g, s, links, 0, pos, a, f, amt)
                if ok:
                    best_len = seg_len
                    best_f = f
                    best_s = s
                    best_pos = pos
                    best_side = side
                    break
    if best_pos < 0:
        return (REFUSED_NO_ROOM if any_partner else REFUSED_NO_PARTNER), -1, -1, -1
    return PLACED, best_pos, best_s, best_side


@njit(cache=True)
def try_cut(load, nadd, ndrop, drops, rem, frag, famt, meta, g, w, k, src, dst, rlen, rlinks, rnodes):
    code, pos, s, side = find_cut(load, nadd, ndrop, drops, rem, g, w, k, src, dst, rlen, rlinks, rnodes)
    if code != PLACED:
        return code
    L = rlen[k]
    f = rnodes[k][pos]
    amt = rem[k].copy()
    w_src = w if side == 0 else s
    w_dst = s if side == 0 else w
    seg_place(load, nadd, ndrop, drops, w_src, rlinks[k], 0, pos, src[k], f, amt)
    seg_place(load, nadd, ndrop, drops, w_dst, rlinks[k], pos, L, f, dst[k], amt)
    record(frag, famt, meta, k, SEG_SRC, 0, w_src, f, 0, pos, amt)
    record(frag, famt, meta, k, SEG_DST, 1, w_dst, f, pos, L, amt)
    rem[k, :] = 0
    return PLACED


@njit(cache=True)
def _is_open(rem, k):
    for m in range(rem.shape[1]):
        if rem[k, m] > 0:
            return True
    return False


@njit(cache=True)
def decode_kernel(order, demands, g, mode, max_parts, n, src, dst, rlen, rlinks, rnodes):
    """First-fit decode of ``order`` (a permutation of demand indices).

    Per wavelength ``w``: repeatedly grow ``w`` with the first open demand
    that fits whole, then reuse wavelengths ``0..w`` for demands costing at
    most one new ADM, then fill ``w`` with zero-ADM demands. Once nothing
    fits whole, run one divide scan and one cut scan, then open ``w+1``.
    """
    N, M = demands.shape
    L = 2 * (n - 1)
    rem = demands.astype(np.int64).copy()
    n_open = 0
    for k in range(N):
        if _is_open(rem, k):
            n_open += 1
    W = max(n_open, 1)
    load = np.zeros((W, M, L), np.int64)
    nadd = np.zeros((W, M, n), np.int64)
    ndrop = np.zeros((W, M, n), np.int64)
    drops = np.zeros((W, n), np.bool_)
    nparts = np.zeros(N, np.int64)
    F = n_open * (max_parts + 2) + 1
    frag = np.zeros((F, 7), np.int64)
    famt = np.zeros((F, M), np.int64)
    meta = np.zeros(1, np.int64)
    is_open = np.zeros(N, np.bool_)
    for k in range(N):
        is_open[k] = _is_open(rem, k)

    w = -1
    while n_open > 0:
        w += 1
        while True:
            grown = False
            for idx in range(N):
                k = order[idx]
                if is_open[k] and fits_whole(load, nadd, ndrop, g, w, k, rem, src, dst, rlen, rlinks):
                    place_whole(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, w, k,
                                src, dst, rlen, rlinks)
                    is_open[k] = False
                    n_open -= 1
                    grown = True
                    break
            if not grown:
                break
            for idx in range(N):
                k = order[idx]
                if not is_open[k]:
                    continue
                for f in range(w + 1):
                    if adm_delta(drops, f, src[k], dst[k]) <= 1 and fits_whole(
                        load, nadd, ndrop, g, f, k, rem, src, dst, rlen, rlinks
                    ):
                        place_whole(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, f, k,
                                    src, dst, rlen, rlinks)
                        is_open[k] = False
                        n_open -= 1
                        break
            for idx in range(N):
                k = order[idx]
                if is_open[k] and adm_delta(drops, w, src[k], dst[k]) == 0 and fits_whole(
                    load, nadd, ndrop, g, w, k, rem, src, dst, rlen, rlinks
                ):
                    place_whole(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, w, k,
                                src, dst, rlen, rlinks)
                    is_open[k] = False
                    n_open -= 1
        if mode & MODE_DIVIDE:
            for idx in range(N):
                k = order[idx]
                if is_open[k]:
                    try_divide(load, nadd, ndrop, drops, rem, nparts, frag, famt, meta, g, w, k,
                               max_parts, src, dst, rlen, rlinks)
        if mode & MODE_CUT:
            for idx in range(N):
                k = order[idx]
                if is_open[k]:
                    if try_cut(load, nadd, ndrop, drops, rem, frag, famt, meta, g, w, k,
                               src, dst, rlen, rlinks, rnodes) == PLACED:
                        is_open[k] = False
                        n_open -= 1
    nw = w + 1
    return frag[: meta[0]], famt[: meta[0]], drops[:nw], load[:nw], nadd[:nw], ndrop[:nw]


@njit(cache=True)
def fitness_kernel(order, demands, g, mode, max_parts, n, src, dst, rlen, rlinks, rnodes):
    frag, famt, drops, load, nadd, ndrop = decode_kernel(
        order, demands, g, mode, max_parts, n, src, dst, rlen, rlinks, rnodes
    )
    return drops.sum(), drops.shape[0]
