"""Oracles and checkers for the splay list.

Everything here recomputes structure properties from scratch (raw arrays /
node walks), independently of the incremental bookkeeping in the kernels, so
tests can use these as ground truth:

* ``ReferenceModel``       — dict-based hit-counting oracle
* ``validate_structure``   — full-scan invariant check (sortedness, links,
                             subtree sums, no-ascent, optionally no-descent)
* ``check_cost_bounds``    — per-op bounds from instrumented records
* ``check_linearizable``   — Wing/Gong-style history search
* ``binomial_log_moment_check`` — Monte-Carlo log-moment bound
* ``oracle_equivalence_run``    — step-by-step comparison vs the model
* op-stream file helpers (replayable `C|I|D <key>` format)
"""

import math
import random

import numpy as np

from . import _kernels as K

TOP = K.TOP
_HEAD, _TAIL = K.HEAD, K.TAIL


# ---------------------------------------------------------------------------
# reference model
# ---------------------------------------------------------------------------

class ReferenceModel:
    """Membership + counter oracle with no structural component."""

    def __init__(self):
        self.sh = {}        # key -> selfHits (physically present keys)
        self.marked = set()
        self.m = 0
        self.M = 0

    def present(self, key):
        return key in self.sh and key not in self.marked

    def _hit(self, key):
        self.m += 1
        self.sh[key] += 1
        if key not in self.marked:
            self.M += 1

    def apply(self, kind, key, gated=True):
        """kind in {'C','I','D'}; ``gated`` mirrors the structure's gate."""
        key = int(key)
        if kind == "C":
            if key in self.sh and gated:
                self._hit(key)
            return self.present(key)
        if kind == "I":
            if key in self.sh:
                if key in self.marked:
                    if gated:
                        self._hit(key)
                    self.marked.discard(key)
                    self.M += self.sh[key]
                    return True
                if gated:
                    self._hit(key)
                return False
            self.sh[key] = 1
            if gated:
                self.m += 1
                self.M += 1
            return True
        if kind == "D":
            if key not in self.sh:
                return False
            if key in self.marked:
                if gated:
                    self._hit(key)
                return False
            if gated:
                self._hit(key)
            self.marked.add(key)
            self.M -= self.sh[key]
            return True
        raise ValueError("unknown op kind %r" % (kind,))

    def drop_marked(self):
        """Mirror a rebuild: marked keys vanish, m collapses onto M."""
        for key in self.marked:
            del self.sh[key]
        self.marked.clear()
        self.m = sum(self.sh.values())
        self.M = self.m

    def members(self):
        return {k for k in self.sh if k not in self.marked}


# ---------------------------------------------------------------------------
# structure validator
# ---------------------------------------------------------------------------

def _snapshot(sl):
    """Uniform view of a structure: sorted physical nodes and raw fields."""
    if hasattr(sl, "st"):  # array-backed sequential structure
        n = int(sl.st[K.ST_ALLOC])
        slots = np.arange(2, n)
        order = slots[np.argsort(sl.keys[2:n], kind="stable")]
        nxt = {(int(s), lv): int(sl.nxt[s, lv])
               for s in order for lv in range(int(sl.zlv[s]),
                                              int(sl.top[s]) + 1)}
        zl = int(sl.st[K.ST_ZL])
        for lv in range(int(sl.zlv[_HEAD]), TOP + 1):
            nxt[(_HEAD, lv)] = int(sl.nxt[_HEAD, lv])
        return {
            "m": int(sl.st[K.ST_M]), "M": int(sl.st[K.ST_MM]), "zl": zl,
            "ids": [int(s) for s in order],
            "key": {int(s): int(sl.keys[s]) for s in order},
            "top": {int(s): int(sl.top[s]) for s in order},
            "zlv": {int(s): int(sl.zlv[s]) for s in order},
            "sh": {int(s): int(sl.sh[s]) for s in order},
            "dele": {int(s): bool(sl.dele[s]) for s in order},
            "hits": {int(s): sl.hits[s].copy() for s in order},
            "head_hits": sl.hits[_HEAD].copy(),
            "head_zlv": int(sl.zlv[_HEAD]),
            "head_sh": int(sl.sh[_HEAD]), "tail_sh": int(sl.sh[_TAIL]),
            "nxt": nxt, "head": _HEAD, "tail": _TAIL,
        }
    # concurrent structure: walk the bottom list of node objects, following
    # each node at its own lowest materialized level
    zl = sl.zero_level
    ids, key, top_, zlv, sh, dele, hits, nxt = [], {}, {}, {}, {}, {}, {}, {}
    seen = []
    node = sl.head
    while node is not None:
        node = node.nxt[max(zl, node.zlv)]
        if node is None or node is sl.tail:
            break
        seen.append(node)
    for i, nd in enumerate(seen):
        nid = i + 2
        ids.append(nid)
        key[nid] = nd.key
        top_[nid] = nd.top
        zlv[nid] = nd.zlv
        sh[nid] = nd.sh
        dele[nid] = nd.deleted
        hv = np.zeros(K.MAX_LEVEL, dtype=np.int64)
        for lv in range(nd.zlv, nd.top + 1):
            hv[lv] = nd.hits[lv]
        hits[nid] = hv
        for lv in range(nd.zlv, nd.top + 1):
            succ = nd.nxt[lv]
            if succ is sl.tail:
                nxt[(nid, lv)] = _TAIL
            elif succ is None:
                nxt[(nid, lv)] = -1
            else:
                nxt[(nid, lv)] = None  # patched below via object identity
    # second pass: map successor objects to ids
    obj_to_id = {id(nd): i + 2 for i, nd in enumerate(seen)}
    for i, nd in enumerate(seen):
        for lv in range(nd.zlv, nd.top + 1):
            succ = nd.nxt[lv]
            if succ is not None and succ is not sl.tail:
                nxt[(i + 2, lv)] = obj_to_id.get(id(succ), -1)
    hh = np.zeros(K.MAX_LEVEL, dtype=np.int64)
    for lv in range(sl.head.zlv, TOP + 1):
        hh[lv] = sl.head.hits[lv]
        succ = sl.head.nxt[lv]
        if succ is sl.tail:
            nxt[(_HEAD, lv)] = _TAIL
        else:
            nxt[(_HEAD, lv)] = obj_to_id.get(id(succ), -1)
    return {
        "m": sl.m, "M": sl.M, "zl": zl, "ids": ids, "key": key,
        "top": top_, "zlv": zlv, "sh": sh, "dele": dele, "hits": hits,
        "head_hits": hh, "head_zlv": sl.head.zlv,
        "head_sh": sl.head.sh, "tail_sh": sl.tail.sh,
        "nxt": nxt, "head": _HEAD, "tail": _TAIL,
    }


def _validate_arrays(sl, check_descent, check_exact_accounting):
    """Vectorized validate_structure for the array-backed structure.

    Same checks and messages as the snapshot walk below, but operating on
    the raw numpy arrays so per-operation validation stays affordable.
    """
    bad = []
    n_alloc = int(sl.st[K.ST_ALLOC])
    slots = np.arange(2, n_alloc)
    order = slots[np.argsort(sl.keys[2:n_alloc], kind="stable")]
    keys = sl.keys[order]
    tops = sl.top[order]
    zlvs = sl.zlv[order]
    shs = sl.sh[order]
    deles = sl.dele[order]
    zl = int(sl.st[K.ST_ZL])
    m = int(sl.st[K.ST_M])
    M = int(sl.st[K.ST_MM])
    head_zlv = int(sl.zlv[_HEAD])

    if sl.sh[_HEAD] != 1 or sl.sh[_TAIL] != 1:
        bad.append("sentinel selfHits must be 1")
    if np.any(np.diff(keys) <= 0):
        bad.append("duplicate or unsorted keys")
    for i in np.nonzero((zlvs < zl) | (tops < zlvs) | (tops > TOP))[0]:
        bad.append("node %d: bad level span zlv=%d top=%d (zl=%d)"
                   % (keys[i], zlvs[i], tops[i], zl))
    for i in np.nonzero(shs < 1)[0]:
        bad.append("node %d: selfHits < 1" % (keys[i],))

    cs = np.zeros(order.size + 1, dtype=np.int64)
    np.cumsum(shs, out=cs[1:])

    for lv in range(zl, TOP + 1):
        pos = np.nonzero(tops >= lv)[0]
        ids = order[pos]
        mat = zlvs[pos] <= lv

        # expected links (materialized entries only)
        succ = np.append(ids[1:], _TAIL).astype(np.int64)
        actual = sl.nxt[ids, lv].astype(np.int64)
        for j in np.nonzero(mat & (actual != succ))[0]:
            bad.append("level %d: node %s links to %s, expected %s"
                       % (lv, ids[j], actual[j], succ[j]))
        if head_zlv <= lv:
            first = int(ids[0]) if ids.size else _TAIL
            if int(sl.nxt[_HEAD, lv]) != first:
                bad.append("level %d: node %s links to %s, expected %s"
                           % (lv, _HEAD, int(sl.nxt[_HEAD, lv]), first))
        if ids.size and mat[-1] and int(sl.nxt[ids[-1], lv]) != _TAIL:
            bad.append("level %d: chain does not end at tail" % (lv,))

        # subtree sums: hits of a level-lv member = selfHits of keys
        # strictly between it and the next level-lv member
        nxt_bound = np.append(pos[1:], order.size)
        expect = cs[nxt_bound] - cs[pos + 1]
        stored = np.where(mat, sl.hits[ids, lv], 0)
        head_expect = int(cs[pos[0]]) if pos.size else int(cs[-1])
        if lv >= head_zlv and int(sl.hits[_HEAD, lv]) != head_expect:
            bad.append("level %d: head hits %d != %d"
                       % (lv, int(sl.hits[_HEAD, lv]), head_expect))
        for j in np.nonzero(stored != expect)[0]:
            bad.append("level %d: node %d hits %d != %d"
                       % (lv, keys[pos[j]], stored[j], expect[j]))

        totals = shs[pos] + expect
        at = tops[pos] == lv

        # ascent condition must not hold for any run of level-lv nodes:
        # right-to-left running sums over maximal runs of top==lv nodes
        if lv < TOP and m > 0 and pos.size:
            thr = m >> (TOP - lv - 1)
            rat = at[::-1]
            rtot = np.where(rat, totals[::-1], 0)
            rcs = np.cumsum(rtot)
            brk = np.maximum.accumulate(
                np.where(~rat, np.arange(rat.size), -1))
            run = rcs - np.where(brk >= 0, rcs[np.maximum(brk, 0)], 0)
            for j in np.nonzero(rat & (run > thr))[0]:
                orig = pos.size - 1 - j
                bad.append("level %d: node %d satisfies ascent "
                           "(potential %d, m=%d)"
                           % (lv, keys[pos[orig]], run[j], m))

        if check_descent and lv > zl and pos.size:
            thr = m >> (TOP - lv)
            prev_tot = np.concatenate(([1 + head_expect], totals[:-1]))
            for j in np.nonzero(at & (totals + prev_tot <= thr))[0]:
                bad.append("level %d: node %d satisfies descent"
                           % (lv, keys[pos[j]]))

    if check_exact_accounting:
        live = int(shs[deles == 0].sum())
        allhits = int(shs.sum())
        if M != live:
            bad.append("M=%d != live selfHits sum %d" % (M, live))
        if m != allhits:
            bad.append("m=%d != selfHits sum %d" % (m, allhits))
    if M > m:
        bad.append("M > m")
    return bad


def validate_structure(sl, check_descent=False, check_exact_accounting=False):
    """Full-scan invariant check; returns a list of violation strings."""
    if hasattr(sl, "st"):
        return _validate_arrays(sl, check_descent, check_exact_accounting)
    s = _snapshot(sl)
    bad = []
    ids = s["ids"]
    zl = s["zl"]
    m = s["m"]
    k = TOP - zl

    if s["head_sh"] != 1 or s["tail_sh"] != 1:
        bad.append("sentinel selfHits must be 1")
    keys = [s["key"][i] for i in ids]
    if any(b <= a for a, b in zip(keys, keys[1:])):
        bad.append("duplicate or unsorted keys")
    for i in ids:
        if not (zl <= s["zlv"][i] <= s["top"][i] <= TOP):
            bad.append("node %d: bad level span zlv=%d top=%d (zl=%d)"
                       % (s["key"][i], s["zlv"][i], s["top"][i], zl))
        if s["sh"][i] < 1:
            bad.append("node %d: selfHits < 1" % (s["key"][i],))

    # per-level membership in key order
    sh_arr = np.array([s["sh"][i] for i in ids], dtype=np.int64)
    cs = np.zeros(len(ids) + 1, dtype=np.int64)
    np.cumsum(sh_arr, out=cs[1:])
    tops = np.array([s["top"][i] for i in ids], dtype=np.int64)

    for lv in range(zl, TOP + 1):
        pos = np.nonzero(tops >= lv)[0]
        # expected links (materialized entries only)
        chain = [(s["head"], -1, s["head_zlv"] <= lv)]
        for p in pos:
            i = ids[p]
            chain.append((i, int(p), s["zlv"][i] <= lv))
        for (a, pa, mat_a), (b, pb, _mb) in zip(chain, chain[1:]):
            if mat_a:
                actual = s["nxt"].get((a, lv), None)
                if actual != b:
                    bad.append("level %d: node %s links to %s, expected %s"
                               % (lv, a, actual, b))
        last, pl, mat_l = chain[-1]
        if mat_l and s["nxt"].get((last, lv), None) != s["tail"]:
            bad.append("level %d: chain does not end at tail" % (lv,))

        # subtree sums: hits of a level-lv member = selfHits of keys strictly
        # between it and the next level-lv member
        bounds = list(pos) + [len(ids)]
        head_expect = int(cs[bounds[0]]) if len(bounds) else 0
        if int(s["head_hits"][lv]) != head_expect and lv >= s["head_zlv"]:
            bad.append("level %d: head hits %d != %d"
                       % (lv, int(s["head_hits"][lv]), head_expect))
        for j, p in enumerate(pos):
            i = ids[p]
            expect = int(cs[bounds[j + 1]] - cs[p + 1])
            stored = int(s["hits"][i][lv]) if s["zlv"][i] <= lv else 0
            if stored != expect:
                bad.append("level %d: node %d hits %d != %d"
                           % (lv, s["key"][i], stored, expect))

        # true totals (selfHits + subtree hits) for the rebalance conditions
        bounds_arr = list(pos) + [len(ids)]
        totals = [s["sh"][ids[p]] + int(cs[bounds_arr[j + 1]] - cs[p + 1])
                  for j, p in enumerate(pos)]

        # ascent condition must not hold for any run of level-lv nodes
        if lv < TOP:
            run_sum = 0
            for j in range(len(pos) - 1, -1, -1):
                i = ids[pos[j]]
                if s["top"][i] == lv:
                    run_sum += totals[j]
                    if m > 0 and run_sum > (m >> (TOP - lv - 1)):
                        bad.append(
                            "level %d: node %d satisfies ascent "
                            "(potential %d, m=%d)"
                            % (lv, s["key"][i], run_sum, m))
                else:
                    run_sum = 0

        if check_descent and lv > zl:
            vtot = 1 + head_expect
            for j, p in enumerate(pos):
                i = ids[p]
                if s["top"][i] == lv and totals[j] + vtot <= (m >> (TOP - lv)):
                    bad.append("level %d: node %d satisfies descent"
                               % (lv, s["key"][i]))
                vtot = totals[j]

    if check_exact_accounting:
        live = sum(s["sh"][i] for i in ids if not s["dele"][i])
        allhits = sum(s["sh"][i] for i in ids)
        if s["M"] != live:
            bad.append("M=%d != live selfHits sum %d" % (s["M"], live))
        if s["m"] != allhits:
            bad.append("m=%d != selfHits sum %d" % (s["m"], allhits))
    if s["M"] > s["m"]:
        bad.append("M > m")
    return bad


# ---------------------------------------------------------------------------
# cost bounds
# ---------------------------------------------------------------------------

def check_cost_bounds(records):
    """Check per-operation cost bounds on instrumented op records.

    ``records`` is a list of dicts as produced by ``SplayList.last_record``.
    Per hit-operation: levels visited <= 3 + log2(m/selfHits), and forward +
    backward pass length <= 2*demotions + 8*(3 + log2(m/selfHits)).  Per
    forward pass: at most 4 non-descending nodes per level.  In aggregate:
    cumulative demotions <= cumulative promotions.  Returns violation
    strings.
    """
    bad = []
    demos = promos = 0
    for idx, r in enumerate(records):
        demos += r["demotions"]
        promos += r["promotions"]
        if r["maxNonDescending"] > 4:
            bad.append("op %d: %d non-descending nodes on one level"
                       % (idx, r["maxNonDescending"]))
        if not r["gated"] or r["selfHits"] < 1 or r["m"] < 1:
            continue
        budget = 3.0 + math.log2(r["m"] / r["selfHits"])
        if r["levelsVisited"] > budget + 1e-9:
            bad.append("op %d: visited %d levels, bound %.3f"
                       % (idx, r["levelsVisited"], budget))
        total = r["forwardLen"] + r["backwardLen"]
        if total > 2 * r["demotions"] + 8 * budget + 1e-9:
            bad.append("op %d: pass length %d, bound %.3f"
                       % (idx, total, 2 * r["demotions"] + 8 * budget))
    if demos > promos:
        bad.append("cumulative demotions %d > promotions %d"
                   % (demos, promos))
    return bad


# ---------------------------------------------------------------------------
# linearizability
# ---------------------------------------------------------------------------

def _op_ok(kind, key, result, members):
    """Apply one sequential op to ``members``; False if result contradicts."""
    if kind == "C":
        return result == (key in members)
    if kind == "I":
        if key in members:
            return not result
        if result:
            members.add(key)
            return True
        return False
    if kind == "D":
        if key in members:
            if result:
                members.discard(key)
                return True
            return False
        return not result
    raise ValueError("unknown op kind %r" % (kind,))


def check_linearizable(history, initial=(), budget=10_000_000):
    """Search for a legal sequential witness of a concurrent history.

    ``history`` is a list of ``(thread, kind, key, result, invoked, returned)``
    tuples with ``kind`` in {'C','I','D'}.  Returns True if a witness exists,
    False if provably none does, and None if the search budget is exhausted
    first (inconclusive).
    """
    per_thread = {}
    for ev in history:
        per_thread.setdefault(ev[0], []).append(ev)
    for ops in per_thread.values():
        ops.sort(key=lambda ev: ev[4])
    threads = sorted(per_thread)
    seqs = [per_thread[t] for t in threads]
    frontier = [0] * len(seqs)
    members = set(initial)
    # depth-first over (frontier, member-set) states with memoisation
    seen = set()
    expansions = 0

    def candidates(frontier):
        # an op can go first iff no other pending op returned before it
        pend = [(ti, seqs[ti][fi]) for ti, fi in enumerate(frontier)
                if fi < len(seqs[ti])]
        if not pend:
            return None
        min_ret = min(ev[5] for _, ev in pend)
        return [(ti, ev) for ti, ev in pend if ev[4] <= min_ret]

    def dfs(frontier, members):
        nonlocal expansions
        state = (frontier, frozenset(members))
        if state in seen:
            return False
        seen.add(state)
        cand = candidates(frontier)
        if cand is None:
            return True
        for ti, ev in cand:
            expansions += 1
            if expansions > budget:
                raise _Budget()
            trial = set(members)
            if _op_ok(ev[1], ev[2], ev[3], trial):
                nf = list(frontier)
                nf[ti] += 1
                if dfs(tuple(nf), trial):
                    return True
        return False

    class _Budget(Exception):
        pass

    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(history) + 1000))
    try:
        return dfs(tuple(frontier), members)
    except _Budget:
        return None
    finally:
        sys.setrecursionlimit(limit)


# ---------------------------------------------------------------------------
# statistical check for the relaxed counter
# ---------------------------------------------------------------------------

def binomial_log_moment_check(n, p, trials=200_000, seed=0):
    """Monte-Carlo check that E[log2(Bin(n,p)+1)] >= log2(np) - 4.

    Returns a dict with the estimate, the analytic reference, the standard
    error, and ``ok``.  The bound is asserted only in the regime
    np >= 3 * n**(2/3); outside it ``ok`` is None (hypothesis not applicable).
    """
    rng = np.random.default_rng(seed)
    draws = rng.binomial(n, p, size=trials)
    logs = np.log2(draws + 1.0)
    est = float(logs.mean())
    se = float(logs.std(ddof=1) / math.sqrt(trials))
    ref = math.log2(n * p) - 4.0
    applicable = n * p >= 3.0 * n ** (2.0 / 3.0)
    ok = (est - 3.0 * se >= ref) if applicable else None
    return {"estimate": est, "reference": ref, "stderr": se,
            "applicable": applicable, "ok": ok}


# ---------------------------------------------------------------------------
# oracle equivalence and op-stream files
# ---------------------------------------------------------------------------

def oracle_equivalence_run(structure, ops, compare_counters=False,
                           validate_every=0):
    """Replay ``ops`` (list of ('C'|'I'|'D', key)) against ``structure`` and
    a ``ReferenceModel`` simultaneously, comparing every boolean result (and
    the exact counters when ``compare_counters`` is set).  Returns a report
    dict with any divergences."""
    ref = ReferenceModel()
    divergences = []
    rebuilds = structure.stats["rebuilds"] if hasattr(structure, "stats") \
        else 0
    for idx, (kind, key) in enumerate(ops):
        if kind == "C":
            got = structure.contains(key)
        elif kind == "I":
            got = structure.insert(key)
        else:
            got = structure.delete(key)
        rec = structure.last_record()
        want = ref.apply(kind, key, gated=rec["gated"])
        if got != want:
            divergences.append("op %d %s %d: structure %s, oracle %s"
                               % (idx, kind, key, got, want))
        now = structure.stats["rebuilds"]
        if now != rebuilds:
            rebuilds = now
            ref.drop_marked()
        if compare_counters:
            if structure.m != ref.m or structure.M != ref.M:
                divergences.append(
                    "op %d: counters (m=%d,M=%d) vs oracle (m=%d,M=%d)"
                    % (idx, structure.m, structure.M, ref.m, ref.M))
        if validate_every and (idx + 1) % validate_every == 0:
            for v in validate_structure(
                    structure, check_exact_accounting=compare_counters):
                divergences.append("op %d: %s" % (idx, v))
        if divergences and len(divergences) > 20:
            break
    final = set(structure.keys_live()) if hasattr(structure, "keys_live") \
        else set(structure.keys())
    if final != ref.members():
        divergences.append("final membership differs: %d vs %d keys"
                           % (len(final), len(ref.members())))
    return {"ops": len(ops), "divergences": divergences,
            "final_size": len(final)}


def random_op_stream(n, keyspace, seed, weights=(0.5, 0.3, 0.2)):
    """Generate n random ops over keys 1..keyspace (contains/insert/delete
    drawn with the given weights)."""
    rng = random.Random(seed)
    kinds = "CID"
    ops = []
    for _ in range(n):
        r = rng.random()
        kind = kinds[0] if r < weights[0] else (
            kinds[1] if r < weights[0] + weights[1] else kinds[2])
        ops.append((kind, rng.randrange(1, keyspace + 1)))
    return ops


def write_op_stream(path, ops, seed=0):
    with open(path, "w") as fh:
        fh.write("# seed %d\n" % (seed,))
        for kind, key in ops:
            fh.write("%s %d\n" % (kind, key))


def read_op_stream(path):
    """Returns (seed, ops)."""
    seed = 0
    ops = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "seed":
                    seed = int(parts[1])
                continue
            kind, key = line.split()
            if kind not in ("C", "I", "D"):
                raise ValueError("bad op kind %r" % (kind,))
            ops.append((kind, int(key)))
    return seed, ops
