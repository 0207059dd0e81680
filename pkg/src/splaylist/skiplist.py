"""Classic randomized skip list (baseline for benchmarks).

Array-backed, same storage layout as the adaptive list but with geometric
node heights (p = 1/2) and no counters.  Used as the non-adaptive baseline.
"""

import numpy as np

from . import _kernels as K


class SkipList:
    """Ordered set with O(log n) expected search, fixed random heights."""

    __slots__ = ("keys", "top", "nxt", "sstate", "_rng", "_preds",
                 "max_level", "_values", "_size")

    def __init__(self, capacity=256, seed=0, max_level=None):
        capacity = max(int(capacity), 8)
        if max_level is None:
            max_level = K.MAX_LEVEL
        self.max_level = int(max_level)
        self._rng = np.array([np.uint64(seed) + np.uint64(0x9E3779B9)],
                             dtype=np.uint64)
        self._preds = np.zeros(K.MAX_LEVEL, dtype=np.int64)
        self._values = {}
        self._size = 0
        self._alloc_arrays(capacity)
        self._init_sentinels()

    def _alloc_arrays(self, capacity):
        self.keys = np.zeros(capacity, dtype=np.int64)
        self.top = np.zeros(capacity, dtype=np.int64)
        self.nxt = np.full((capacity, K.MAX_LEVEL), -1, dtype=np.int32)
        self.sstate = np.zeros(4, dtype=np.int64)

    def _init_sentinels(self):
        self.keys[K.HEAD] = K.KEY_MIN
        self.keys[K.TAIL] = K.KEY_MAX
        self.top[K.HEAD] = self.max_level - 1
        self.top[K.TAIL] = self.max_level - 1
        self.nxt[K.HEAD, :self.max_level] = K.TAIL
        self.sstate[0] = 2      # next free slot
        self.sstate[1] = 0      # highest occupied level (top hint)

    def _grow(self):
        old = self.keys.shape[0]
        new = old * 2
        keys, top, nxt = self.keys, self.top, self.nxt
        self.keys = np.zeros(new, dtype=np.int64)
        self.top = np.zeros(new, dtype=np.int64)
        self.nxt = np.full((new, K.MAX_LEVEL), -1, dtype=np.int32)
        self.keys[:old] = keys
        self.top[:old] = top
        self.nxt[:old] = nxt

    def insert(self, key, value=None):
        key = int(key)
        if not (K.KEY_MIN < key < K.KEY_MAX):
            raise ValueError("key out of range")
        if int(self.sstate[0]) >= self.keys.shape[0]:
            self._grow()
        ok = bool(K.skip_insert(key, self.max_level, self._rng, self.keys,
                                self.top, self.nxt, self.sstate,
                                self._preds))
        if ok:
            self._size += 1
        if value is not None:
            self._values[key] = value
        return ok

    def delete(self, key):
        ok = bool(K.skip_delete(int(key), self.keys, self.top, self.nxt,
                                self.sstate, self._preds))
        if ok:
            self._size -= 1
            self._values.pop(int(key), None)
        return ok

    def contains(self, key):
        found, _steps = K.skip_contains(int(key), self.keys, self.nxt,
                                        self.sstate)
        return bool(found)

    def get(self, key, default=None):
        if self.contains(key):
            return self._values.get(int(key), default)
        return default

    def __contains__(self, key):
        return self.contains(key)

    def __len__(self):
        return self._size

    def keys_live(self):
        out = []
        node = int(self.nxt[K.HEAD, 0])
        while node != K.TAIL:
            out.append(int(self.keys[node]))
            node = int(self.nxt[node, 0])
        return out
