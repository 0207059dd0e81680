"""Height assignment for full rebuilds.

Given live entries (sorted keys with their hit counts, total H) the recursive
split places the "median" key — the smallest split whose prefix stays at or
below H/2 while the suffix stays strictly below H/2 — at height floor(log2 H)
and recurses on both sides.  Two implementations of the same rule:

* ``assign_heights_linear``: works on the cumulative-hit array, cost
  O(n log H) — preferred when H is much larger than n.
* ``assign_heights_repeated``: materializes the repeated-keys array (each key
  appearing hitCount times) and picks the cell at index floor(H/2), cost O(H).

Both pick identical split points by construction, and both are followed by
``cleanup_demotions``: the raw recursion can leave pairs satisfying the
descent condition (e.g. hits [6, 1, 5]), so a deterministic top-down sweep
demotes until no pair qualifies.  Demotions only merge subtree counts into
predecessors, which never creates an ascent opportunity.
"""

import math

import numpy as np


def choose_variant(n, total):
    """Pick the split implementation the way the cost analysis suggests."""
    if total > n * max(1.0, math.log2(max(total, 2))):
        return "linear"
    return "repeated"


def _split_heights(counts, pick_split):
    n = counts.size
    heights = np.zeros(n, dtype=np.int64)
    cum = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=cum[1:])
    stack = [(0, n)]
    while stack:
        lo, hi = stack.pop()
        if lo >= hi:
            continue
        total = int(cum[hi] - cum[lo])
        j = pick_split(cum, lo, hi, total)
        heights[j] = total.bit_length() - 1  # floor(log2 total)
        stack.append((lo, j))
        stack.append((j + 1, hi))
    return heights


def assign_heights_linear(counts):
    counts = np.asarray(counts, dtype=np.int64)

    def pick(cum, lo, hi, total):
        # smallest j with prefix(lo..j] > total/2, i.e. prefix(lo..j-1]
        # <= total/2 and suffix < total/2
        t = int(cum[lo]) + total // 2
        return int(np.searchsorted(cum[lo + 1:hi + 1], t, side="right")) + lo

    return _split_heights(counts, pick)


def assign_heights_repeated(counts):
    counts = np.asarray(counts, dtype=np.int64)
    rep = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    cum = np.zeros(counts.size + 1, dtype=np.int64)
    np.cumsum(counts, out=cum[1:])

    def pick(cum_, lo, hi, total):
        # owner of cell floor(H/2) (0-based) in this segment's repeated array
        return int(rep[int(cum[lo]) + total // 2])

    return _split_heights(counts, pick)


def _level_lists(counts, heights, k):
    """Per level: (member indices, their subtree totals, head's hits)."""
    members = np.arange(counts.size, dtype=np.int64)
    totals = counts.astype(np.int64).copy()
    out = [(members, totals, 0)]
    head_hits = 0
    for _lv in range(1, k + 1):
        up = members[heights[members] >= _lv]
        cs = np.zeros(members.size + 1, dtype=np.int64)
        np.cumsum(totals, out=cs[1:])
        if up.size == 0:
            head_hits += int(cs[-1])
            members = up
            totals = np.zeros(0, dtype=np.int64)
            out.append((members, totals, head_hits))
            continue
        b = np.searchsorted(members, up)
        bnext = np.append(b[1:], members.size)
        child_sums = cs[bnext] - cs[b + 1]
        head_hits += int(cs[b[0]])
        totals = totals[b] + child_sums
        members = up
        out.append((members, totals, head_hits))
    return out


def cleanup_demotions(counts, heights, total):
    """Demote until no adjacent pair satisfies the descent condition."""
    counts = np.asarray(counts, dtype=np.int64)
    heights = np.asarray(heights, dtype=np.int64).copy()
    if counts.size == 0 or total <= 0:
        return heights
    k = int(total).bit_length() - 1
    changed = True
    while changed:
        changed = False
        for lv in range(k, 0, -1):
            mem, tot, head_extra = _level_lists(counts, heights, lv)[lv]
            if mem.size == 0:
                continue
            thr = total >> (k - lv)
            vtot = 1 + head_extra  # head: selfHits 1 by convention
            for i in range(mem.size):
                u = int(mem[i])
                tu = int(tot[i])
                if heights[u] == lv and tu + vtot <= thr:
                    heights[u] = lv - 1
                    vtot += tu
                    changed = True
                else:
                    vtot = tu
    return heights
