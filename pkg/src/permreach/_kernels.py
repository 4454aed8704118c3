"""Numeric kernels for the exhaustive oracle and the random-walk calibration.

Each kernel has a numba implementation and a vectorised numpy one with the
same results. Numba is used when importable unless ``PERMREACH_DISABLE_NUMBA``
is set to a true-ish value.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

__all__ = [
    "USE_NUMBA", "bfs_reach", "bfs_reach_numpy", "walk_steps", "walk_steps_numpy",
    "bfs_reach_numba", "walk_steps_numba",
]

_FLAG = os.environ.get("PERMREACH_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xBF58476D1CE4E5B9)
_M3 = np.uint64(0x94D049BB133111EB)


# ---------------------------------------------------------------- BFS oracle

def bfs_reach_numpy(n_bits, init, cmask, cval, tbit, tval, gmask, gval):
    """Breadth-first search over bit-encoded global states.

    Returns ``(found, parent, via)`` where ``found`` is the first goal state
    in FIFO discovery order (or -1), ``parent[s]`` the predecessor of ``s``
    and ``via[s]`` the index of the transition that produced it.
    """
    n_states = 1 << n_bits
    parent = np.full(n_states, -1, dtype=np.int64)
    via = np.full(n_states, -1, dtype=np.int64)
    seen = np.zeros(n_states, dtype=np.bool_)
    seen[init] = True
    if (init & gmask) == gval:
        return init, parent, via
    cmask = np.asarray(cmask, dtype=np.int64)
    cval = np.asarray(cval, dtype=np.int64)
    tbit = np.asarray(tbit, dtype=np.int64)
    tval = np.asarray(tval, dtype=np.int64)
    flip = np.left_shift(np.int64(1), tbit)
    frontier = np.array([init], dtype=np.int64)
    n_tr = len(cmask)
    if n_tr == 0:
        return -1, parent, via
    while frontier.size:
        s = frontier[:, None]
        ok = ((s & cmask[None, :]) == cval[None, :]) & (((s >> tbit[None, :]) & 1) == (1 - tval)[None, :])
        nxt = s ^ flip[None, :]
        # row-major flattening reproduces FIFO order: state first, then transition
        ok_flat = ok.ravel()
        cand = nxt.ravel()[ok_flat]
        src = np.repeat(frontier, n_tr)[ok_flat]
        trs = np.tile(np.arange(n_tr, dtype=np.int64), frontier.size)[ok_flat]
        fresh = ~seen[cand]
        cand, src, trs = cand[fresh], src[fresh], trs[fresh]
        if cand.size == 0:
            break
        uniq, first = np.unique(cand, return_index=True)
        order = np.sort(first)
        cand, src, trs = cand[order], src[order], trs[order]
        seen[cand] = True
        parent[cand] = src
        via[cand] = trs
        hit = np.nonzero((cand & gmask) == gval)[0]
        if hit.size:
            return int(cand[hit[0]]), parent, via
        frontier = cand
    return -1, parent, via


def _bfs_reach_loop(n_bits, init, cmask, cval, tbit, tval, gmask, gval):
    n_states = 1 << n_bits
    parent = np.full(n_states, -1, dtype=np.int64)
    via = np.full(n_states, -1, dtype=np.int64)
    seen = np.zeros(n_states, dtype=np.bool_)
    queue = np.empty(n_states, dtype=np.int64)
    seen[init] = True
    if (init & gmask) == gval:
        return init, parent, via
    head = 0
    tail = 1
    queue[0] = init
    n_tr = cmask.shape[0]
    while head < tail:
        s = queue[head]
        head += 1
        for j in range(n_tr):
            if (s & cmask[j]) != cval[j]:
                continue
            if ((s >> tbit[j]) & 1) != 1 - tval[j]:
                continue
            t = s ^ (np.int64(1) << tbit[j])
            if seen[t]:
                continue
            seen[t] = True
            parent[t] = s
            via[t] = j
            if (t & gmask) == gval:
                return t, parent, via
            queue[tail] = t
            tail += 1
    return -1, parent, via


# -------------------------------------------------------------- random walks

def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * _M2
    x = (x ^ (x >> np.uint64(27))) * _M3
    return x ^ (x >> np.uint64(31))


def _coin(seed, run, step):
    # counter-based: the same bit on every backend for a given (seed, run, step)
    x = _mix(seed * _M1 + run)
    return _mix(x + step * _M1) & np.uint64(1)


def walk_steps_numpy(n, runs, seed):
    """Steps taken by ``runs`` independent +-1 walks from 0 to ``n``, reflecting at 0."""
    seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    pos = np.zeros(runs, dtype=np.int64)
    steps = np.zeros(runs, dtype=np.int64)
    run_ids = np.arange(runs, dtype=np.uint64)
    active = np.nonzero(pos < n)[0]
    t = 0
    with np.errstate(over="ignore"):
        while active.size:
            p = pos[active]
            coin = _coin(seed, run_ids[active], np.uint64(t)).astype(np.int64)
            move = np.where(p == 0, 1, 2 * coin - 1)
            pos[active] = p + move
            steps[active] += 1
            active = active[pos[active] < n]
            t += 1
    return steps


def _walk_steps_loop(n, runs, seed):
    # scalar copy of _coin, kept inline so the loop compiles on its own
    s31 = np.uint64(31)
    s30 = np.uint64(30)
    s27 = np.uint64(27)
    steps = np.zeros(runs, dtype=np.int64)
    for r in range(runs):
        x = seed * _M1 + np.uint64(r)
        x = (x ^ (x >> s30)) * _M2
        x = (x ^ (x >> s27)) * _M3
        base = x ^ (x >> s31)
        pos = 0
        t = 0
        while pos < n:
            if pos == 0:
                pos = 1
            else:
                y = base + np.uint64(t) * _M1
                y = (y ^ (y >> s30)) * _M2
                y = (y ^ (y >> s27)) * _M3
                y = y ^ (y >> s31)
                if (y & np.uint64(1)) == np.uint64(1):
                    pos += 1
                else:
                    pos -= 1
            t += 1
        steps[r] = t
    return steps


if numba is not None:
    bfs_reach_numba = numba.njit(cache=True)(_bfs_reach_loop)
    walk_steps_numba = numba.njit(cache=True)(_walk_steps_loop)
else:  # pragma: no cover
    bfs_reach_numba = None
    walk_steps_numba = None


def bfs_reach(n_bits, init, cmask, cval, tbit, tval, gmask, gval):
    args = (np.asarray(cmask, dtype=np.int64), np.asarray(cval, dtype=np.int64),
            np.asarray(tbit, dtype=np.int64), np.asarray(tval, dtype=np.int64))
    if USE_NUMBA:
        found, parent, via = bfs_reach_numba(int(n_bits), np.int64(init), *args,
                                             np.int64(gmask), np.int64(gval))
        return int(found), parent, via
    found, parent, via = bfs_reach_numpy(int(n_bits), np.int64(init), *args,
                                         np.int64(gmask), np.int64(gval))
    return int(found), parent, via


def walk_steps(n, runs, seed):
    if USE_NUMBA:
        return walk_steps_numba(int(n), int(runs), np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    return walk_steps_numpy(int(n), int(runs), int(seed))
