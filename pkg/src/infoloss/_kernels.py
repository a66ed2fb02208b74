"""Hot numeric kernels: grid binning and entropy reductions over sorted keys.

Two interchangeable implementations exist for each kernel: a numba @njit
loop and a vectorized pure-numpy fallback. The numba path is used when
numba imports cleanly; set ``INFOLOSS_NO_NUMBA=1`` to force the numpy path
(``benchmarks/bench_kernels.py`` compares the two). Both paths reduce over
keys in ascending sorted order, so a given path is bit-reproducible
regardless of worker count; across paths results agree to ~1e-12 (summation
associativity only).
"""

from __future__ import annotations

import math
import os

import numpy as np

#: Products n*x closer than this (from below) to an integer bin upward.
BOUNDARY_SNAP = 1e-12

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# loop bodies (numba-compilable; also the reference for the numpy fallbacks)
# ---------------------------------------------------------------------------

def _floor_snap_loop(p):
    out = np.empty(p.size, np.int64)
    for i in range(p.size):
        v = p[i]
        f = math.floor(v)
        if v - f >= 1.0 - BOUNDARY_SNAP:
            f += 1.0
        out[i] = int(f)
    return out


def _entropy_sorted_loop(keys):
    # keys ascending; returns (entropy_bits, distinct)
    t = keys.size
    if t == 0:
        return 0.0, 0
    acc = 0.0
    distinct = 1
    run = 1
    for i in range(1, t):
        if keys[i] != keys[i - 1]:
            acc += run * math.log(run)
            distinct += 1
            run = 1
        else:
            run += 1
    acc += run * math.log(run)
    h = (math.log(t) - acc / t) / _LN2
    return h, distinct


def _joint_entropy_sorted_loop(gkeys, xkeys):
    # rows sorted lexicographically by (g, x);
    # returns (h_joint_bits, h_group_bits, distinct_pairs, distinct_groups)
    t = gkeys.size
    if t == 0:
        return 0.0, 0.0, 0, 0
    acc_pair = 0.0
    acc_g = 0.0
    n_pair = 1
    n_g = 1
    run_pair = 1
    run_g = 1
    for i in range(1, t):
        new_g = gkeys[i] != gkeys[i - 1]
        if new_g or xkeys[i] != xkeys[i - 1]:
            acc_pair += run_pair * math.log(run_pair)
            n_pair += 1
            run_pair = 1
        else:
            run_pair += 1
        if new_g:
            acc_g += run_g * math.log(run_g)
            n_g += 1
            run_g = 1
        else:
            run_g += 1
    acc_pair += run_pair * math.log(run_pair)
    acc_g += run_g * math.log(run_g)
    h_joint = (math.log(t) - acc_pair / t) / _LN2
    h_g = (math.log(t) - acc_g / t) / _LN2
    return h_joint, h_g, n_pair, n_g


def _group_modal_loop(gkeys, xkeys):
    # rows sorted lexicographically by (g, x);
    # returns (unique groups, modal x per group): max count, ties -> smallest x
    t = gkeys.size
    if t == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    n_g = 1
    for i in range(1, t):
        if gkeys[i] != gkeys[i - 1]:
            n_g += 1
    groups = np.empty(n_g, np.int64)
    modal = np.empty(n_g, np.int64)
    gi = 0
    best_x = xkeys[0]
    best_c = 0
    run_x = xkeys[0]
    run_c = 0
    for i in range(t):
        if i > 0 and gkeys[i] != gkeys[i - 1]:
            if run_c > best_c:
                best_c = run_c
                best_x = run_x
            groups[gi] = gkeys[i - 1]
            modal[gi] = best_x
            gi += 1
            best_c = 0
            best_x = xkeys[i]
            run_c = 1
            run_x = xkeys[i]
        elif i > 0 and xkeys[i] != xkeys[i - 1]:
            if run_c > best_c:
                best_c = run_c
                best_x = run_x
            run_c = 1
            run_x = xkeys[i]
        else:
            run_c += 1
    if run_c > best_c:
        best_c = run_c
        best_x = run_x
    groups[gi] = gkeys[t - 1]
    modal[gi] = best_x
    return groups, modal


# ---------------------------------------------------------------------------
# vectorized numpy fallbacks
# ---------------------------------------------------------------------------

def _floor_snap_np(p):
    f = np.floor(p)
    f += (p - f) >= (1.0 - BOUNDARY_SNAP)
    return f.astype(np.int64)


def _run_bounds(keys):
    starts = np.concatenate(([0], np.flatnonzero(keys[1:] != keys[:-1]) + 1))
    counts = np.diff(np.append(starts, keys.size))
    return starts, counts


def _entropy_sorted_np(keys):
    t = keys.size
    if t == 0:
        return 0.0, 0
    _, counts = _run_bounds(keys)
    acc = float(np.sum(counts * np.log(counts)))
    h = (math.log(t) - acc / t) / _LN2
    return h, int(counts.size)


def _joint_entropy_sorted_np(gkeys, xkeys):
    t = gkeys.size
    if t == 0:
        return 0.0, 0.0, 0, 0
    new_g = gkeys[1:] != gkeys[:-1]
    new_pair = new_g | (xkeys[1:] != xkeys[:-1])
    pc = np.diff(np.append(np.concatenate(([0], np.flatnonzero(new_pair) + 1)), t))
    gc = np.diff(np.append(np.concatenate(([0], np.flatnonzero(new_g) + 1)), t))
    h_joint = (math.log(t) - float(np.sum(pc * np.log(pc))) / t) / _LN2
    h_g = (math.log(t) - float(np.sum(gc * np.log(gc))) / t) / _LN2
    return h_joint, h_g, int(pc.size), int(gc.size)


def _group_modal_np(gkeys, xkeys):
    if gkeys.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    new_pair = (gkeys[1:] != gkeys[:-1]) | (xkeys[1:] != xkeys[:-1])
    starts = np.concatenate(([0], np.flatnonzero(new_pair) + 1))
    counts = np.diff(np.append(starts, gkeys.size))
    pg = gkeys[starts]
    px = xkeys[starts]
    # per group: max count first, ties by smallest x
    order = np.lexsort((px, -counts, pg))
    sg = pg[order]
    first = np.concatenate(([True], sg[1:] != sg[:-1]))
    return sg[first], px[order][first]


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

def _select_backend():
    if os.environ.get("INFOLOSS_NO_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


BACKEND = _select_backend()

if BACKEND == "numba":
    from numba import njit

    _floor_snap_1d = njit(cache=True)(_floor_snap_loop)
    entropy_sorted = njit(cache=True)(_entropy_sorted_loop)
    joint_entropy_sorted = njit(cache=True)(_joint_entropy_sorted_loop)
    group_modal = njit(cache=True)(_group_modal_loop)
else:
    _floor_snap_1d = _floor_snap_np
    entropy_sorted = _entropy_sorted_np
    joint_entropy_sorted = _joint_entropy_sorted_np
    group_modal = _group_modal_np


def floor_snap(p):
    """floor(p) rounding toward -inf, snapping near-integers upward.

    Values of ``p`` within BOUNDARY_SNAP below an integer are treated as that
    integer, so points sitting on a cell edge bin deterministically into the
    upper cell.
    """
    arr = np.ascontiguousarray(p, dtype=np.float64)
    return _floor_snap_1d(arr.ravel()).reshape(arr.shape)
