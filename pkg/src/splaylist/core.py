"""Sequential splay list: a skip list whose node heights track hit counts.

Every contains/insert/delete that touches a physically present key is a
"hit": it bumps the global counter m, the node's selfHits and the hits[]
counter of each level parent on the search path, then rebalances the path
backwards with the ascent/descent rules.  Frequently hit keys drift up,
rarely hit keys drift down, so search cost approaches log2(m / selfHits).

Deletion is logical (a mark).  When the hits on marked keys reach half of m
the structure is rebuilt from the live entries.

Node storage is flat numpy arrays driven by the jitted kernels in
``_kernels``; this class owns allocation, rebuilds, serialization and the
Python-facing API.
"""

import numpy as np

from . import _kernels as K
from .policy import RebalancePolicy
from .rebuild import assign_heights_linear, assign_heights_repeated, \
    cleanup_demotions, choose_variant

MAX_LEVEL = K.MAX_LEVEL
TOP = K.TOP
_HEAD, _TAIL = K.HEAD, K.TAIL

_OPS = {"contains": K.OP_CONTAINS, "insert": K.OP_INSERT,
        "delete": K.OP_DELETE}


class SplayList:
    """Ordered map with self-adjusting heights (single-threaded)."""

    def __init__(self, policy=None, capacity=256):
        self.policy = policy if policy is not None else RebalancePolicy.exact()
        self.rebuilds = 0
        self._alloc_arrays(max(capacity, 16))
        self._init_sentinels()
        self._values = {}

    # ---- storage ---------------------------------------------------------

    def _alloc_arrays(self, cap):
        self._cap = cap
        self.keys = np.zeros(cap, dtype=np.int64)
        self.top = np.zeros(cap, dtype=np.int64)
        self.zlv = np.zeros(cap, dtype=np.int64)
        self.sh = np.zeros(cap, dtype=np.int64)
        self.hits = np.zeros((cap, MAX_LEVEL), dtype=np.int64)
        self.nxt = np.full((cap, MAX_LEVEL), -1, dtype=np.int32)
        self.dele = np.zeros(cap, dtype=np.uint8)
        self.st = np.zeros(K.ST_LEN, dtype=np.int64)
        self._path = np.zeros(cap + 2 * MAX_LEVEL + 8, dtype=np.int64)
        self._lstart = np.zeros(MAX_LEVEL + 2, dtype=np.int64)
        # keep the last-op record across reallocations (rebuild/grow happen
        # in the middle of an operation, before its result is read back)
        rec = getattr(self, "_rec", None)
        self._rec = np.zeros(K.R_LEN, dtype=np.int64)
        if rec is not None:
            self._rec[:] = rec

    def _init_sentinels(self):
        self.keys[_HEAD] = K.KEY_MIN
        self.keys[_TAIL] = K.KEY_MAX
        self.top[_HEAD] = self.top[_TAIL] = TOP
        self.zlv[_HEAD] = self.zlv[_TAIL] = TOP
        self.sh[_HEAD] = self.sh[_TAIL] = 1  # by convention
        self.nxt[_HEAD, TOP] = _TAIL
        self.st[K.ST_ZL] = TOP
        self.st[K.ST_ALLOC] = 2

    def _grow(self):
        cap = self._cap * 2
        old = (self.keys, self.top, self.zlv, self.sh, self.hits,
               self.nxt, self.dele, self._path)
        n = self._cap
        self._cap = cap
        self.keys = np.zeros(cap, dtype=np.int64)
        self.top = np.zeros(cap, dtype=np.int64)
        self.zlv = np.zeros(cap, dtype=np.int64)
        self.sh = np.zeros(cap, dtype=np.int64)
        self.hits = np.zeros((cap, MAX_LEVEL), dtype=np.int64)
        self.nxt = np.full((cap, MAX_LEVEL), -1, dtype=np.int32)
        self.dele = np.zeros(cap, dtype=np.uint8)
        self._path = np.zeros(cap + 2 * MAX_LEVEL + 8, dtype=np.int64)
        self.keys[:n] = old[0]
        self.top[:n] = old[1]
        self.zlv[:n] = old[2]
        self.sh[:n] = old[3]
        self.hits[:n] = old[4]
        self.nxt[:n] = old[5]
        self.dele[:n] = old[6]

    def _arrays(self):
        return (self.keys, self.top, self.zlv, self.sh, self.hits,
                self.nxt, self.dele, self.st)

    # ---- operations ------------------------------------------------------

    def _check_key(self, key):
        key = int(key)
        if not (K.KEY_MIN < key < K.KEY_MAX):
            raise ValueError("key out of range (sentinel values reserved)")
        return key

    def _op(self, kind, key):
        key = self._check_key(key)
        if kind == K.OP_INSERT and self.st[K.ST_ALLOC] >= self._cap:
            self._grow()
        K.op(kind, key, self.policy.p, self.policy.state,
             *self._arrays(), self._path, self._lstart, self._rec)
        if self._rec[K.R_REBUILD]:
            self._rebuild()
        return bool(self._rec[K.R_RESULT])

    def contains(self, key):
        return self._op(K.OP_CONTAINS, key)

    def insert(self, key, value=None):
        added = self._op(K.OP_INSERT, key)
        if value is not None or added:
            self._values[int(key)] = value
        return added

    def delete(self, key):
        removed = self._op(K.OP_DELETE, key)
        if removed:
            self._values.pop(int(key), None)
        return removed

    def get(self, key, default=None):
        if self.contains(key):
            return self._values.get(int(key), default)
        return default

    def __contains__(self, key):
        return self.contains(key)

    def __len__(self):
        return int(self.st[K.ST_LIVE])

    def last_record(self):
        """Instrumentation of the most recent operation (copied)."""
        r = self._rec
        return {
            "found": int(r[K.R_FOUND]), "result": int(r[K.R_RESULT]),
            "gated": int(r[K.R_GATED]), "levelsVisited": int(r[K.R_LEVELS]),
            "forwardLen": int(r[K.R_FWD]), "backwardLen": int(r[K.R_BWD]),
            "demotions": int(r[K.R_DEMOS]), "promotions": int(r[K.R_PROMOS]),
            "maxNonDescending": int(r[K.R_NONDESC]),
            "m": int(r[K.R_M]), "selfHits": int(r[K.R_SH]),
            "pathLen": int(r[K.R_PATH]),
        }

    # ---- derived state ---------------------------------------------------

    @property
    def m(self):
        return int(self.st[K.ST_M])

    @property
    def M(self):
        return int(self.st[K.ST_MM])

    @property
    def zero_level(self):
        return int(self.st[K.ST_ZL])

    @property
    def k(self):
        return TOP - self.zero_level

    @property
    def stats(self):
        return {
            "m": self.m, "M": self.M, "k": self.k,
            "zeroLevel": self.zero_level,
            "promotions": int(self.st[K.ST_PROMOS]),
            "demotions": int(self.st[K.ST_DEMOS]),
            "live": int(self.st[K.ST_LIVE]),
            "physical": int(self.st[K.ST_PHYS]),
            "rebuilds": self.rebuilds,
        }

    def _slots(self):
        """Physical user slots in key order."""
        n = int(self.st[K.ST_ALLOC])
        idx = np.arange(2, n)
        return idx[np.argsort(self.keys[2:n], kind="stable")]

    def keys_live(self):
        s = self._slots()
        return self.keys[s[self.dele[s] == 0]]

    # ---- rebuild ---------------------------------------------------------

    def _rebuild(self):
        slots = self._slots()
        slots = slots[self.dele[slots] == 0]
        entries_keys = self.keys[slots].copy()
        entries_sh = self.sh[slots].copy()
        self.rebuilds += 1
        rebuilds = self.rebuilds
        values = self._values
        self.rebuild_from(entries_keys, entries_sh)
        self.rebuilds = rebuilds
        self._values = values

    def rebuild_from(self, sorted_keys, hit_counts, variant=None):
        """Replace contents with a freshly balanced structure.

        ``sorted_keys`` strictly increasing, ``hit_counts >= 1``; the new
        structure has m = M = sum(hit_counts) and no node satisfying either
        the ascent or the descent condition.
        """
        sorted_keys = np.asarray(sorted_keys, dtype=np.int64)
        hit_counts = np.asarray(hit_counts, dtype=np.int64)
        if sorted_keys.size != hit_counts.size:
            raise ValueError("keys/hits length mismatch")
        if np.any(np.diff(sorted_keys) <= 0):
            raise ValueError("keys must be strictly increasing")
        if np.any(hit_counts < 1):
            raise ValueError("hit counts must be >= 1")
        n = sorted_keys.size
        pol, vals, reb = self.policy, self._values, self.rebuilds
        self._alloc_arrays(max(16, int(n * 3 // 2) + 16))
        self._init_sentinels()
        self.policy, self._values, self.rebuilds = pol, vals, reb
        if n == 0:
            return
        total = int(hit_counts.sum())
        if variant is None:
            variant = choose_variant(n, total)
        if variant == "linear":
            heights = assign_heights_linear(hit_counts)
        elif variant == "repeated":
            heights = assign_heights_repeated(hit_counts)
        else:
            raise ValueError("unknown rebuild variant: %r" % (variant,))
        k = total.bit_length() - 1
        zl = TOP - k
        heights = cleanup_demotions(hit_counts, heights, total)
        self._install(sorted_keys, hit_counts, heights + zl,
                      np.zeros(n, dtype=np.uint8), total, total, zl)

    def _install(self, keys, sh, tops, deleted, m, M, zl, node_hits=None):
        """Build the physical lists for fully materialized nodes.

        ``node_hits``: optional (n, MAX_LEVEL) per-node hits; when absent the
        counters are recomputed from subtree sums.  Sentinel counters are
        always recomputed.
        """
        n = keys.size
        if n + 2 > self._cap:
            self._alloc_arrays(n + 18)
            self._init_sentinels()
        slots = np.arange(2, n + 2)
        self.keys[slots] = keys
        self.sh[slots] = sh
        self.top[slots] = tops
        self.zlv[slots] = zl
        self.dele[slots] = deleted
        self.zlv[_HEAD] = self.zlv[_TAIL] = zl
        self.st[K.ST_M] = m
        self.st[K.ST_MM] = M
        self.st[K.ST_ZL] = zl
        self.st[K.ST_ALLOC] = n + 2
        self.st[K.ST_LIVE] = int((deleted == 0).sum())
        self.st[K.ST_PHYS] = n
        if node_hits is not None:
            self.hits[slots, :] = node_hits
        # link every level and recompute sentinel (and optionally node) hits
        totals = self.sh[slots] + 0  # level-(zl) totals per node
        if node_hits is None:
            self.hits[slots, :] = 0
        members = slots  # nodes present at the current level
        self.nxt[_HEAD, zl] = 2 if n else _TAIL
        if n:
            self.nxt[slots[:-1], zl] = slots[1:]
            self.nxt[slots[-1], zl] = _TAIL
        head_hits = 0
        self.hits[_HEAD, zl] = 0
        for lv in range(zl + 1, TOP + 1):
            up = members[self.top[members] >= lv]
            cs = np.zeros(members.size + 1, dtype=np.int64)
            np.cumsum(totals, out=cs[1:])
            if up.size == 0:
                head_hits += int(cs[-1])
                self.hits[_HEAD, lv] = head_hits
                self.nxt[_HEAD, lv] = _TAIL
                members = up
                totals = np.zeros(0, dtype=np.int64)
                continue
            # members strictly between an up-node and the next up-node are
            # its direct children at level lv-1
            b = np.searchsorted(members, up)
            bnext = np.append(b[1:], members.size)
            child_sums = cs[bnext] - cs[b + 1]
            head_hits += int(cs[b[0]])
            self.hits[_HEAD, lv] = head_hits
            if node_hits is None:
                self.hits[up, lv] = self.hits[up, lv - 1] + child_sums
            totals = self.sh[up] + self.hits[up, lv]
            self.nxt[_HEAD, lv] = up[0]
            self.nxt[up[:-1], lv] = up[1:]
            self.nxt[up[-1], lv] = _TAIL
            members = up

    # ---- serialization ---------------------------------------------------

    def dump(self):
        """Line dump: header `m M k zeroLevel`, then one line per physical
        node in bottom order: `key topLevel selfHits hits[0..topLevel]
        deleted` (heights relative to zeroLevel)."""
        zl = self.zero_level
        out = ["%d %d %d %d" % (self.m, self.M, self.k, zl)]
        for s in self._slots():
            t = int(self.top[s])
            hv = [int(self.hits[s, lv]) if self.zlv[s] <= lv else 0
                  for lv in range(zl, t + 1)]
            out.append("%d %d %d %s %d" % (
                int(self.keys[s]), t - zl, int(self.sh[s]),
                " ".join(str(h) for h in hv), int(self.dele[s])))
        return "\n".join(out) + "\n"

    @classmethod
    def load(cls, text, policy=None):
        """Rebuild a structure from :meth:`dump` output."""
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        m, M, k, zl = (int(x) for x in lines[0].split())
        n = len(lines) - 1
        keys = np.zeros(n, dtype=np.int64)
        sh = np.zeros(n, dtype=np.int64)
        tops = np.zeros(n, dtype=np.int64)
        deleted = np.zeros(n, dtype=np.uint8)
        hits = np.zeros((n, MAX_LEVEL), dtype=np.int64)
        for i, ln in enumerate(lines[1:]):
            parts = [int(x) for x in ln.split()]
            keys[i], t, sh[i] = parts[0], parts[1], parts[2]
            tops[i] = t + zl
            deleted[i] = parts[-1]
            hv = parts[3:-1]
            if len(hv) != t + 1:
                raise ValueError("bad hits vector on line %d" % (i + 2,))
            hits[i, zl:zl + t + 1] = hv
        if np.any(np.diff(keys) <= 0):
            raise ValueError("dump keys not strictly increasing")
        self = cls(policy=policy, capacity=n + 18)
        self._install(keys, sh, tops, deleted, m, M, zl, node_hits=hits)
        return self
