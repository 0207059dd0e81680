"""Jitted kernels for the array-backed sequential structures.

The sequential splay list stores its nodes in flat numpy arrays (one row per
node, one column per level) so the hot loops can be compiled with numba.
Slot 0 is the head sentinel, slot 1 the tail sentinel; user nodes are
allocated sequentially and only reclaimed by a rebuild.

Levels are absolute indices 0..63 (MAX_LEVEL = 64).  The conventional height
of a node is ``level - zeroLevel`` and the structure height parameter is
``k = 63 - zeroLevel``.  Thresholds are evaluated with integer shifts of m,
never floating point: ``sum <= m >> (63 - L)`` is the descent condition at
absolute level L, ``potential > m >> (63 - L - 1)`` the ascent condition.
"""

import numpy as np
from numba import njit, uint64

MAX_LEVEL = 64
TOP = MAX_LEVEL - 1
HEAD = 0
TAIL = 1
KEY_MIN = np.iinfo(np.int64).min
KEY_MAX = np.iinfo(np.int64).max

# state vector indices
ST_M = 0        # total hits on physically present keys
ST_MM = 1       # hits on unmarked keys ("M")
ST_ZL = 2       # global zero level (absolute)
ST_ALLOC = 3    # next free node slot
ST_PROMOS = 4   # cumulative promotions
ST_DEMOS = 5    # cumulative demotions
ST_LIVE = 6     # unmarked user nodes
ST_PHYS = 7     # physical user nodes (marked or not)
ST_LEN = 8

# per-op record indices
R_FOUND = 0     # key was physically present before the op
R_RESULT = 1    # boolean result of the op
R_GATED = 2     # counter/rebalance pass executed
R_LEVELS = 3    # sub-lists visited by the forward pass
R_FWD = 4       # forward node visits (entries + right steps)
R_BWD = 5       # backward node visits
R_DEMOS = 6     # demotions performed by this op
R_PROMOS = 7    # promotions performed by this op
R_NONDESC = 8   # max per-level count of visited nodes not satisfying descent
R_M = 9         # m after the op
R_SH = 10       # selfHits of the target after the op (0 on miss)
R_PATH = 11     # search steps (down + right), the benchmark path length
R_REBUILD = 12  # rebuild trigger fired
R_LEN = 13

# batch accumulator indices
A_OPS = 0
A_PATH = 1
A_STATUS = 2    # 0 done, 1 rebuild needed, 2 capacity needed
A_LEN = 3

OP_CONTAINS = 0
OP_INSERT = 1
OP_DELETE = 2


@njit(cache=True, inline="always")
def rng_next(state):
    """splitmix64: advance the one-cell uint64 state and return a draw."""
    state[0] = state[0] + uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def rng_uniform(state):
    return (rng_next(state) >> uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _mat_to(zlv, hits, nxt, u, lvl):
    """Materialize u's links down to lvl (lazy level expansion)."""
    z = zlv[u]
    while z > lvl:
        nxt[u, z - 1] = nxt[u, z]
        hits[u, z - 1] = 0
        z -= 1
    zlv[u] = z


@njit(cache=True, inline="always")
def _hits_at(zlv, hits, u, lvl):
    if zlv[u] <= lvl:
        return hits[u, lvl]
    return 0


@njit(cache=True)
def op(kind, key, p, rng,
       keys, top, zlv, sh, hits, nxt, dele, st,
       path, lstart, rec):
    """One contains/insert/delete with exact or gated rebalancing.

    The caller guarantees one free node slot for inserts.  ``p`` is the
    rebalance probability; the gate is drawn (one splitmix64 draw) only for
    operations that could count a hit, and never when p >= 1.
    """
    for i in range(R_LEN):
        rec[i] = 0
    zl = st[ST_ZL]
    m_pre = st[ST_M]

    # ---- forward search, recording the path per level -------------------
    cur = HEAD
    idx = 0
    found = -1
    tl = zl
    right = 0
    nondesc_max = 0
    L = TOP
    while L >= zl:
        lstart[TOP - L] = idx
        path[idx] = cur
        idx += 1
        _mat_to(zlv, hits, nxt, cur, L)
        nondesc = 1  # the entry node
        while True:
            nx = nxt[cur, L]
            if keys[nx] > key:
                break
            _mat_to(zlv, hits, nxt, nx, L)
            path[idx] = nx
            idx += 1
            right += 1
            # instrumentation: would (cur, nx) satisfy descent right now?
            tot = sh[nx] + hits[nx, L] + sh[cur] + hits[cur, L]
            if not (top[nx] == L and L > zl and tot <= (m_pre >> (TOP - L))):
                nondesc += 1
            cur = nx
            if keys[nx] == key:
                found = nx
        if nondesc > nondesc_max:
            nondesc_max = nondesc
        if found >= 0:
            tl = L
            break
        L -= 1

    rec[R_NONDESC] = nondesc_max
    rec[R_LEVELS] = TOP - tl + 1
    rec[R_PATH] = right + (TOP - tl)
    rec[R_FWD] = idx
    rec[R_FOUND] = 1 if found >= 0 else 0

    # ---- physical phase and gate decision --------------------------------
    gate = 0
    if found >= 0 or kind == OP_INSERT:
        if p >= 1.0:
            gate = 1
        elif rng_uniform(rng) < p:
            gate = 1

    target = found
    revived = 0
    if found >= 0:
        marked = dele[found] == 1
        if kind == OP_CONTAINS:
            rec[R_RESULT] = 0 if marked else 1
        elif kind == OP_INSERT:
            if marked:
                dele[found] = 0
                st[ST_LIVE] += 1
                revived = 1
                rec[R_RESULT] = 1
            else:
                rec[R_RESULT] = 0
        else:  # delete
            if marked:
                rec[R_RESULT] = 0
            else:
                dele[found] = 1
                st[ST_LIVE] -= 1
                rec[R_RESULT] = 1
    else:
        if kind == OP_INSERT:
            # always physically link at the bottom; cur is the bottom pred
            new = st[ST_ALLOC]
            st[ST_ALLOC] += 1
            keys[new] = key
            top[new] = zl
            zlv[new] = zl
            sh[new] = 1
            dele[new] = 0
            hits[new, zl] = 0
            nxt[new, zl] = nxt[cur, zl]
            nxt[cur, zl] = new
            st[ST_PHYS] += 1
            st[ST_LIVE] += 1
            rec[R_RESULT] = 1
            if gate == 1:
                target = new
                path[idx] = new
                idx += 1
        else:
            rec[R_M] = st[ST_M]
            # pure miss: no counters move, but the rebuild trigger is still
            # checked after every operation
            if st[ST_M] > 0 and 2 * st[ST_MM] <= st[ST_M]:
                rec[R_REBUILD] = 1
            return

    rec[R_GATED] = gate

    # ---- counter maintenance ---------------------------------------------
    if gate == 1:
        st[ST_M] += 1
        if found >= 0:
            sh[found] += 1
            if kind == OP_DELETE and rec[R_RESULT] == 1:
                # the mark itself: hit counted on an unmarked node,
                # then its whole tally leaves M
                st[ST_MM] += 1 - sh[found]
            elif dele[found] == 0 and revived == 0:
                st[ST_MM] += 1
            # hits on marked nodes move m only
        else:
            st[ST_MM] += 1  # fresh insert: sh = 1 counts as its first hit
        if revived == 1:
            st[ST_MM] += sh[found]
        # eager expansion: k = floor(log2 m)
        m = st[ST_M]
        kk = -1
        mm = m
        while mm > 0:
            mm >>= 1
            kk += 1
        if TOP - kk < st[ST_ZL]:
            st[ST_ZL] = TOP - kk
    else:
        # structural mark/unmark effects still move M (bookkeeping tied to
        # the flag, not to hit counting)
        if found >= 0:
            if kind == OP_DELETE and rec[R_RESULT] == 1:
                st[ST_MM] -= sh[found]
            elif revived == 1:
                st[ST_MM] += sh[found]

    if gate == 1 and target >= 0:
        m = st[ST_M]
        zl = st[ST_ZL]
        # level-parent increments above the target
        lv = TOP
        while lv > tl:
            par = path[lstart[TOP - lv + 1] - 1]
            hits[par, lv] += 1
            lv -= 1

        # ---- backward pass ------------------------------------------------
        L = tl
        pos = idx - 1
        bwd = 0
        while True:
            s = lstart[TOP - L]
            promoted = False
            while pos > s:
                u = path[pos]
                v = path[pos - 1]
                bwd += 1
                if top[u] == L and L > zl:
                    tot = sh[u] + _hits_at(zlv, hits, u, L) \
                        + sh[v] + _hits_at(zlv, hits, v, L)
                    if tot <= (m >> (TOP - L)):
                        _mat_to(zlv, hits, nxt, v, L - 1)
                        _mat_to(zlv, hits, nxt, u, L - 1)
                        hits[v, L] += sh[u] + hits[u, L]
                        nxt[v, L] = nxt[u, L]
                        hits[u, L] = 0
                        nxt[u, L] = -1
                        top[u] = L - 1
                        st[ST_DEMOS] += 1
                        rec[R_DEMOS] += 1
                        pos -= 1
                        continue
                # only the leftmost node of a same-height run can ascend,
                # i.e. the path predecessor is the level parent
                if L < TOP and top[v] > L and top[u] == L:
                    pot = hits[v, L + 1] - hits[v, L]
                    if pot > (m >> (TOP - L - 1)):
                        top[u] = L + 1
                        hits[u, L + 1] = pot - sh[u]
                        nxt[u, L + 1] = nxt[v, L + 1]
                        hits[v, L + 1] -= pot
                        nxt[v, L + 1] = u
                        st[ST_PROMOS] += 1
                        rec[R_PROMOS] += 1
                        # keep rebalancing one level up, u rightmost
                        path[s] = u
                        pos = s
                        L += 1
                        promoted = True
                        break
                pos -= 1
            if promoted:
                continue
            if L == TOP:
                break
            L += 1
            pos = s - 1
        rec[R_BWD] = bwd

    rec[R_M] = st[ST_M]
    if target >= 0:
        rec[R_SH] = sh[target]
    elif found >= 0:
        rec[R_SH] = sh[found]
    if st[ST_M] > 0 and 2 * st[ST_MM] <= st[ST_M]:
        rec[R_REBUILD] = 1


@njit(cache=True)
def batch_insert(new_keys, p, rng,
                 keys, top, zlv, sh, hits, nxt, dele, st,
                 path, lstart, rec):
    """Insert a batch of keys; returns how many were processed."""
    for i in range(new_keys.size):
        if st[ST_ALLOC] >= keys.shape[0]:
            return i
        op(OP_INSERT, new_keys[i], p, rng,
           keys, top, zlv, sh, hits, nxt, dele, st, path, lstart, rec)
    return new_keys.size


# workload kinds
WL_SKEWED = 0
WL_UNIFORM = 1
WL_ZIPF = 2
WL_GENERAL = 3


@njit(cache=True, inline="always")
def _pick(arr, rng):
    i = int(rng_uniform(rng) * arr.size)
    if i >= arr.size:
        i = arr.size - 1
    return arr[i]


@njit(cache=True)
def batch_run(nops, wl, hot, cold, xfrac, cum, wkeys, nkeys, rfrac, p, rng,
              keys, top, zlv, sh, hits, nxt, dele, st,
              path, lstart, rec, acc, tally):
    """Run up to nops sampled operations; stop early on rebuild/capacity."""
    acc[A_STATUS] = 0
    done = 0
    while done < nops:
        kind = OP_CONTAINS
        key = np.int64(1)
        if wl == WL_SKEWED:
            if rng_uniform(rng) < xfrac:
                key = _pick(hot, rng)
            else:
                key = _pick(cold, rng)
        elif wl == WL_UNIFORM:
            i = int(rng_uniform(rng) * nkeys)
            if i >= nkeys:
                i = nkeys - 1
            key = np.int64(1 + i)
        elif wl == WL_ZIPF:
            u = rng_uniform(rng)
            key = np.int64(1 + np.searchsorted(cum, u))
            if key > nkeys:
                key = np.int64(nkeys)
        else:  # general
            if rng_uniform(rng) < rfrac:
                if rng_uniform(rng) < xfrac:
                    key = _pick(hot, rng)
                else:
                    key = _pick(cold, rng)
            else:
                kind = OP_INSERT if rng_uniform(rng) < 0.5 else OP_DELETE
                key = _pick(wkeys, rng)
        if kind == OP_INSERT and st[ST_ALLOC] >= keys.shape[0]:
            acc[A_STATUS] = 2
            break
        if kind == OP_CONTAINS and p < 1.0:
            # Fast path: a relaxed contains is, with probability 1-p, a pure
            # read.  Search without the adjustment-pass instrumentation and
            # only fall into the full kernel when the gate fires (the forced
            # p=2.0 skips the second draw, keeping one draw per hit-op).
            zl = st[ST_ZL]
            cur = HEAD
            right = 0
            found = -1
            L = TOP
            while True:
                zc = zlv[cur]
                nx = nxt[cur, L] if L >= zc else nxt[cur, zc]
                if keys[nx] <= key:
                    cur = nx
                    right += 1
                    if keys[nx] == key:
                        found = nx
                        break
                    continue
                if L == zl:
                    break
                L -= 1
            if found >= 0 and rng_uniform(rng) < p:
                op(kind, key, 2.0, rng,
                   keys, top, zlv, sh, hits, nxt, dele, st,
                   path, lstart, rec)
                acc[A_PATH] += rec[R_PATH]
                if rec[R_REBUILD] == 1:
                    tally[key] += 1
                    done += 1
                    acc[A_STATUS] = 1
                    break
            else:
                acc[A_PATH] += right + (TOP - L)
            tally[key] += 1
            done += 1
            continue
        op(kind, key, p, rng,
           keys, top, zlv, sh, hits, nxt, dele, st, path, lstart, rec)
        acc[A_PATH] += rec[R_PATH]
        tally[key] += 1
        done += 1
        if rec[R_REBUILD] == 1:
            acc[A_STATUS] = 1
            break
    acc[A_OPS] += done
    return done


# ---------------------------------------------------------------------------
# plain skip-list baseline (no counters, fixed geometric heights)
# ---------------------------------------------------------------------------

@njit(cache=True)
def skip_insert(key, max_level, rng, skeys, stop, snxt, sstate, preds):
    """sstate: [alloc, top_hint]; preds: int64 scratch of MAX_LEVEL."""
    lvl = 0
    while lvl + 1 < max_level and (rng_next(rng) & uint64(1)) == uint64(1):
        lvl += 1
    start = sstate[1] if sstate[1] > lvl else lvl
    cur = HEAD
    for h in range(start, -1, -1):
        while skeys[snxt[cur, h]] < key:
            cur = snxt[cur, h]
        preds[h] = cur
    if skeys[snxt[cur, 0]] == key:
        return 0
    new = sstate[0]
    sstate[0] += 1
    skeys[new] = key
    stop[new] = lvl
    for h in range(lvl + 1):
        snxt[new, h] = snxt[preds[h], h]
        snxt[preds[h], h] = new
    if lvl > sstate[1]:
        sstate[1] = lvl
    return 1


@njit(cache=True)
def skip_delete(key, skeys, stop, snxt, sstate, preds):
    cur = HEAD
    for h in range(sstate[1], -1, -1):
        while skeys[snxt[cur, h]] < key:
            cur = snxt[cur, h]
        preds[h] = cur
    t = snxt[cur, 0]
    if skeys[t] != key:
        return 0
    for h in range(stop[t] + 1):
        if snxt[preds[h], h] == t:
            snxt[preds[h], h] = snxt[t, h]
    return 1


@njit(cache=True, inline="always")
def skip_contains(key, skeys, snxt, sstate):
    """Returns (found, search steps: rights + downs from the top hint)."""
    cur = HEAD
    rights = 0
    hstop = 0
    found = 0
    for h in range(sstate[1], -1, -1):
        while skeys[snxt[cur, h]] <= key:
            cur = snxt[cur, h]
            rights += 1
        if skeys[cur] == key:
            hstop = h
            found = 1
            break
    return found, rights + (sstate[1] - hstop)


@njit(cache=True)
def skip_batch(nops, wl, hot, cold, xfrac, cum, wkeys, nkeys, rfrac,
               max_level, rng, skeys, stop, snxt, sstate, preds, acc, tally):
    """Sampled ops on the baseline; counts search steps for reads."""
    acc[A_STATUS] = 0
    done = 0
    while done < nops:
        kind = OP_CONTAINS
        key = np.int64(1)
        if wl == WL_SKEWED:
            if rng_uniform(rng) < xfrac:
                key = _pick(hot, rng)
            else:
                key = _pick(cold, rng)
        elif wl == WL_UNIFORM:
            i = int(rng_uniform(rng) * nkeys)
            if i >= nkeys:
                i = nkeys - 1
            key = np.int64(1 + i)
        elif wl == WL_ZIPF:
            u = rng_uniform(rng)
            key = np.int64(1 + np.searchsorted(cum, u))
            if key > nkeys:
                key = np.int64(nkeys)
        else:  # general
            if rng_uniform(rng) < rfrac:
                if rng_uniform(rng) < xfrac:
                    key = _pick(hot, rng)
                else:
                    key = _pick(cold, rng)
            else:
                kind = OP_INSERT if rng_uniform(rng) < 0.5 else OP_DELETE
                key = _pick(wkeys, rng)
        if kind == OP_CONTAINS:
            _, steps = skip_contains(key, skeys, snxt, sstate)
            acc[A_PATH] += steps
        elif kind == OP_INSERT:
            if sstate[0] >= skeys.shape[0]:
                acc[A_STATUS] = 2
                break
            skip_insert(key, max_level, rng, skeys, stop, snxt, sstate, preds)
        else:
            skip_delete(key, skeys, stop, snxt, sstate, preds)
        tally[key] += 1
        done += 1
    acc[A_OPS] += done
    return done
