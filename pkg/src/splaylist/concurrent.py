"""Thread-safe self-adjusting skip list.

Lock-based variant of the adaptive list:

* searches are latch-free and only read links, materializing lazily-copied
  levels on the way down;
* counter maintenance and rebalancing happen in a separate locked *update
  pass* that walks the same path with hand-over-hand per-node locks and
  applies demotions/promotions on the fly (top-down, left-to-right);
* ``m``/``M`` and the global zero level live behind a small mutex;
* periodic rebuilds stop the world via a readers-writer gate.

Locks are always acquired in increasing key order (the head counts as the
smallest key), which rules out deadlock.  Set ``debug_lock_order=True`` to
assert that discipline at runtime.
"""

import threading

import numpy as np

from . import rebuild as _rebuild
from .policy import RebalancePolicy

MAX_LEVEL = 64
_TOP = MAX_LEVEL - 1
_KEY_MIN = -(2 ** 63) + 1
_KEY_MAX = 2 ** 63 - 2


class _Node:
    __slots__ = ("key", "value", "top", "zlv", "sh", "hits", "nxt",
                 "deleted", "lock")

    def __init__(self, key, top, zlv, sh=1):
        self.key = key
        self.value = None
        self.top = top
        self.zlv = zlv          # lowest materialized level
        self.sh = sh
        self.hits = [0] * MAX_LEVEL
        self.nxt = [None] * MAX_LEVEL
        self.deleted = False
        self.lock = threading.Lock()


class _RWGate:
    """Many readers (normal ops) / one writer (rebuild)."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    def acquire_read(self):
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1

    def release_read(self):
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self):
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._writing = True
            while self._readers:
                self._cond.wait()

    def release_write(self):
        with self._cond:
            self._writing = False
            self._cond.notify_all()


class ConcurrentSplayList:
    """Concurrent ordered set whose node heights track access frequency."""

    def __init__(self, policy=None, debug_lock_order=False):
        self.policy = policy if policy is not None else RebalancePolicy.exact()
        self.head = _Node(_KEY_MIN, _TOP, _TOP)
        self.tail = _Node(_KEY_MAX, _TOP, _TOP)
        self.head.nxt[_TOP] = self.tail
        self.m = 0
        self.M = 0
        self.zero_level = _TOP
        self._glock = threading.Lock()
        self._gate = _RWGate()
        self._rebuilds = 0
        self._promotions = 0
        self._demotions = 0
        self._debug = debug_lock_order
        self._tls = threading.local()
        self._stream_counter = 0

    # ------------------------------------------------------------------
    # lock discipline helpers
    # ------------------------------------------------------------------

    def _acquire(self, node):
        if self._debug:
            held = getattr(self._tls, "held", None)
            if held is None:
                held = self._tls.held = []
            if held and held[-1] >= node.key:
                raise RuntimeError(
                    "lock order violation: %r after %r" % (node.key, held[-1]))
            node.lock.acquire()
            held.append(node.key)
        else:
            node.lock.acquire()

    def _release(self, node):
        node.lock.release()
        if self._debug:
            self._tls.held.remove(node.key)

    # ------------------------------------------------------------------
    # lazy level materialization (caller holds node.lock)
    # ------------------------------------------------------------------

    @staticmethod
    def _materialize(node, lvl):
        while node.zlv > lvl:
            z = node.zlv
            node.nxt[z - 1] = node.nxt[z]
            node.hits[z - 1] = 0
            node.zlv = z - 1

    def _ensure(self, node, lvl):
        """Materialize while holding only this node's lock (used by reads)."""
        if node.zlv > lvl:
            with node.lock:
                self._materialize(node, lvl)

    # ------------------------------------------------------------------
    # latch-free search
    # ------------------------------------------------------------------

    def _find(self, key):
        """Returns (node-or-None, search steps)."""
        zl = self.zero_level
        node = self.head
        rights = 0
        h = _TOP
        while h >= zl:
            self._ensure(node, h)
            curr = node.nxt[h]
            while curr is not None and curr.key <= key:
                node = curr
                rights += 1
                if node.key == key:
                    return node, rights + (_TOP - h)
                self._ensure(node, h)
                curr = node.nxt[h]
            h -= 1
            zl = self.zero_level
        return None, rights + (_TOP - zl)

    # ------------------------------------------------------------------
    # locked update pass: counters + rebalancing along the path
    # ------------------------------------------------------------------

    def _update(self, key):
        with self._glock:
            self.m += 1
            curr_m = self.m
        prev = self.head
        self._acquire(prev)
        h = _TOP
        try:
            while True:
                curr = prev.nxt[h]
                while curr is not None and curr.key <= key:
                    self._acquire(curr)
                    self._materialize(curr, h)
                    if (curr.key < key and curr.top == h
                            and self._try_demote(prev, curr, h, curr_m)):
                        self._release(curr)
                        curr = prev.nxt[h]
                        continue
                    self._release(prev)
                    prev = curr
                    curr = prev.nxt[h]
                if prev.key == key:
                    # land the selfHit and its M contribution under the
                    # node's lock, where deleted/sh changes are serialized;
                    # doing M earlier races with a concurrent delete's
                    # M -= sh and strands the increment
                    prev.sh += 1
                    if not prev.deleted:
                        with self._glock:
                            self.M += 1
                    return
                prev.hits[h] += 1
                if h <= self.zero_level:
                    # target vanished in a race; nothing left to adjust
                    return
                self._materialize(prev, h - 1)
                self._try_promote(prev, h - 1, curr_m, key)
                h -= 1
        finally:
            self._release(prev)

    def _try_demote(self, prev, curr, h, curr_m):
        """Both locked, curr.top == h; returns True if curr was demoted."""
        tot = prev.sh + prev.hits[h] + curr.sh + curr.hits[h]
        if tot > (curr_m >> (_TOP - h)):
            return False
        if h <= self.zero_level:
            # the pair would sink below the current bottom: deepen the list
            with self._glock:
                if self.zero_level >= h:
                    self.zero_level = h - 1
        self._materialize(prev, h - 1)
        self._materialize(curr, h - 1)
        prev.hits[h] += curr.sh + curr.hits[h]
        prev.nxt[h] = curr.nxt[h]
        curr.hits[h] = 0
        curr.nxt[h] = None
        curr.top = h - 1
        self._demotions += 1
        return True

    def _try_promote(self, prev, h, curr_m, key):
        """prev locked and materialized to h; promote its first child at h
        while the ascent condition holds (it is the only candidate).

        ``key`` is the in-flight target: prev's counter above u already holds
        this op's hit, but the hit below has not landed yet, so the
        transferred potential must route it to whoever will own it (u's
        pending selfHit, u's new subtree, or prev's retained subtree).

        The pending hit skews ``pot`` only where exactly one of the two
        counters holds it: at the entry level it sits in prev's upper counter
        alone; above that, a key left of u is counted in both (cancelling
        out), a key right of u travels in u's column, and a key equal to u
        is held out of the hit counters entirely until it lands as selfHits
        — so only the entry level's key<u case and every level's key==u case
        need a one-off correction."""
        u = prev.nxt[h]
        if u is None or u is self.tail or u.top != h:
            return
        self._acquire(u)
        try:
            lvl = h
            while (lvl < _TOP and lvl < prev.top and u.top == lvl):
                pot = prev.hits[lvl + 1] - prev.hits[lvl]
                if pot <= (curr_m >> (_TOP - lvl - 1)):
                    break
                if key < u.key:
                    # the pending hit stays in prev's retained interval; it
                    # inflates pot only at the entry level (above that it is
                    # already counted on both sides of the subtraction)
                    moved = pot - 1 if lvl == h else pot
                    u.hits[lvl + 1] = moved - u.sh
                elif key == u.key:
                    # the pending hit becomes u's own selfHit
                    moved = pot
                    u.hits[lvl + 1] = moved - u.sh - 1
                else:
                    moved = pot
                    u.hits[lvl + 1] = moved - u.sh
                u.top = lvl + 1
                u.nxt[lvl + 1] = prev.nxt[lvl + 1]
                prev.hits[lvl + 1] -= moved
                prev.nxt[lvl + 1] = u
                self._promotions += 1
                lvl += 1
        finally:
            self._release(u)

    # ------------------------------------------------------------------
    # policy gate (one independent stream per thread)
    # ------------------------------------------------------------------

    def _gate_draw(self):
        pol = getattr(self._tls, "policy", None)
        if pol is None:
            with self._glock:
                idx = self._stream_counter
                self._stream_counter += 1
            pol = self._tls.policy = self.policy.stream(idx)
        return pol.should_rebalance()

    # ------------------------------------------------------------------
    # public operations
    # ------------------------------------------------------------------

    def contains(self, key):
        key = int(key)
        self._gate.acquire_read()
        try:
            node, _steps = self._find(key)
            if node is None:
                self._tls.last = {"gated": False, "found": False}
                return False
            result = not node.deleted
            gated = self._gate_draw()
            if gated:
                self._update(key)
            self._tls.last = {"gated": gated, "found": True}
        finally:
            self._gate.release_read()
        self._maybe_rebuild()
        return result

    def contains_counted(self, key):
        """contains() that also reports the search path length."""
        key = int(key)
        self._gate.acquire_read()
        try:
            node, steps = self._find(key)
            if node is None:
                return False, steps
            result = not node.deleted
            if self._gate_draw():
                self._update(key)
        finally:
            self._gate.release_read()
        self._maybe_rebuild()
        return result, steps

    def insert(self, key, value=None):
        key = int(key)
        if not (_KEY_MIN < key < _KEY_MAX):
            raise ValueError("key out of range")
        self._gate.acquire_read()
        try:
            result = self._insert_inner(key, value)
        finally:
            self._gate.release_read()
        self._maybe_rebuild()
        return result

    def _insert_inner(self, key, value):
        while True:
            node, _steps = self._find(key)
            if node is not None:
                self._acquire(node)
                try:
                    if node.deleted:
                        node.deleted = False
                        if value is not None:
                            node.value = value
                        # the update pass adds the pending hit's own +1
                        with self._glock:
                            self.M += node.sh
                        revived = True
                    else:
                        if value is not None:
                            node.value = value
                        revived = False
                finally:
                    self._release(node)
                if revived:
                    # successful insert always runs an update pass
                    self._update(key)
                    self._tls.last = {"gated": True, "found": True}
                    return True
                gated = self._gate_draw()
                if gated:
                    self._update(key)
                self._tls.last = {"gated": gated, "found": True}
                return False
            if self._link_new(key, value):
                self._update(key)
                self._tls.last = {"gated": True, "found": False}
                return True
            # lost a race; retry from the search

    def _link_new(self, key, value):
        """Physically link a fresh node at the bottom level; False on race."""
        zl = self.zero_level
        pred = self.head
        h = _TOP
        while h >= zl:
            self._ensure(pred, h)
            curr = pred.nxt[h]
            while curr is not None and curr.key < key:
                pred = curr
                self._ensure(pred, h)
                curr = pred.nxt[h]
            h -= 1
            zl = self.zero_level
        self._acquire(pred)
        try:
            zl = self.zero_level
            self._materialize(pred, zl)
            succ = pred.nxt[zl]
            if succ is None or succ.key <= key or pred.key >= key:
                return False
            # selfHits starts at 0: the mandatory update pass brings it to 1
            node = _Node(key, zl, zl, sh=0)
            node.value = value
            node.nxt[zl] = succ
            pred.nxt[zl] = node
        finally:
            self._release(pred)
        return True

    def delete(self, key):
        key = int(key)
        self._gate.acquire_read()
        try:
            node, _steps = self._find(key)
            if node is None:
                self._tls.last = {"gated": False, "found": False}
                return False
            self._acquire(node)
            try:
                if node.deleted:
                    removed = False
                else:
                    node.deleted = True
                    removed = True
                    with self._glock:
                        self.M -= node.sh
            finally:
                self._release(node)
            gated = self._gate_draw()
            if gated:
                self._update(key)
            self._tls.last = {"gated": gated, "found": True}
        finally:
            self._gate.release_read()
        self._maybe_rebuild()
        return removed

    def get(self, key, default=None):
        node, _steps = self._find(int(key))
        if node is None or node.deleted:
            return default
        return node.value if node.value is not None else default

    def __contains__(self, key):
        node, _steps = self._find(int(key))
        return node is not None and not node.deleted

    def __len__(self):
        return sum(1 for _ in self._iter_live())

    def last_record(self):
        """Gate/result info for the latest op issued by this thread."""
        return dict(getattr(self._tls, "last", {"gated": False,
                                                "found": False}))

    def _iter_live(self):
        node = self.head
        while True:
            node = node.nxt[max(node.zlv, self.zero_level)]
            if node is None or node is self.tail:
                return
            if not node.deleted:
                yield node

    def keys_live(self):
        return [n.key for n in self._iter_live()]

    # ------------------------------------------------------------------
    # stop-the-world rebuild
    # ------------------------------------------------------------------

    def _maybe_rebuild(self):
        with self._glock:
            due = self.m > 0 and 2 * self.M <= self.m
        if due:
            self._rebuild()

    def _rebuild(self):
        self._gate.acquire_write()
        try:
            if not (self.m > 0 and 2 * self.M <= self.m):
                return
            entries = []
            node = self.head
            while True:
                node = node.nxt[max(node.zlv, self.zero_level)]
                if node is None or node is self.tail:
                    break
                if not node.deleted:
                    entries.append((node.key, max(node.sh, 1), node.value))
            self.head = _Node(_KEY_MIN, _TOP, _TOP)
            self.tail = _Node(_KEY_MAX, _TOP, _TOP)
            self.head.nxt[_TOP] = self.tail
            self.zero_level = _TOP
            self.m = 0
            self.M = 0
            if entries:
                counts = np.array([e[1] for e in entries], dtype=np.int64)
                total = int(counts.sum())
                variant = _rebuild.choose_variant(len(entries), total)
                if variant == "linear":
                    heights = _rebuild.assign_heights_linear(counts)
                else:
                    heights = _rebuild.assign_heights_repeated(counts)
                _rebuild.cleanup_demotions(counts, heights, total)
                k = max(total.bit_length() - 1, 0)
                zl = _TOP - k
                self.zero_level = zl
                self.head.zlv = zl
                nodes = []
                for (key, sh, value), hgt in zip(entries, heights):
                    nd = _Node(key, zl + int(hgt), zl, sh=int(sh))
                    nd.value = value
                    nodes.append(nd)
                # link every level; a member's hits at lv is the selfHits
                # sum over keys strictly between it and the next lv member
                for lv in range(zl, _TOP + 1):
                    prev = self.head
                    subtree = 0
                    for nd in nodes:
                        if nd.top >= lv:
                            prev.hits[lv] = subtree
                            prev.nxt[lv] = nd
                            prev = nd
                            subtree = 0
                        else:
                            subtree += nd.sh
                    prev.hits[lv] = subtree
                    prev.nxt[lv] = self.tail
                self.m = total
                self.M = total
            self._rebuilds += 1
        finally:
            self._gate.release_write()

    @property
    def stats(self):
        return {"m": self.m, "M": self.M, "zeroLevel": self.zero_level,
                "k": _TOP - self.zero_level, "rebuilds": self._rebuilds,
                "promotions": self._promotions,
                "demotions": self._demotions}

    def dump(self):
        """Quiescent snapshot in the same text format as the sequential list."""
        zl = self.zero_level
        k = _TOP - zl
        lines = ["%d %d %d %d" % (self.m, self.M, k, zl)]
        node = self.head
        while True:
            node = node.nxt[max(node.zlv, zl)]
            if node is None or node is self.tail:
                break
            hv = [str(node.hits[lv]) if node.zlv <= lv else "0"
                  for lv in range(zl, node.top + 1)]
            lines.append("%d %d %d %s %d" % (
                node.key, node.top - zl, node.sh, " ".join(hv),
                1 if node.deleted else 0))
        return "\n".join(lines) + "\n"
