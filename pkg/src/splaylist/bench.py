"""Benchmark harness: workload generation, timed runs, result emission.

Workload families (``--workload``):

* ``n-x-y``                skewed reads: x% of ops hit a random hot set of
                           y%·n keys, the rest hit the complement
* ``general:n-r-x-y-s``    r% skewed reads; inserts/deletes each (100-r)/2%,
                           over a fixed update set of s%·n keys
* ``zipf:n:exp``           reads with Zipf(exp) rank frequencies
* ``uniform:n``            uniform reads

Single-threaded runs drive the compiled batch kernels; multi-threaded runs
drive the lock-based list with Python workers.  Results go to CSV (fixed
header ``structure,p,threads,workload,seed,ops_per_sec,mean_path_len``, one
row per repetition) or JSON (full result including the height/popularity
dump).  ``SPLAYLIST_BENCH_DIR`` sets the default output directory.
"""

import argparse
import json
import os
import random
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import _kernels as K
from .concurrent import ConcurrentSplayList
from .core import SplayList
from .policy import RebalancePolicy
from .skiplist import SkipList

CSV_HEADER = "structure,p,threads,workload,seed,ops_per_sec,mean_path_len"

_KIND_CODE = {"skewed": K.WL_SKEWED, "uniform": K.WL_UNIFORM,
              "zipf": K.WL_ZIPF, "general": K.WL_GENERAL}


@dataclass
class WorkloadSpec:
    """One benchmark configuration."""
    kind: str                   # skewed | uniform | zipf | general
    n: int
    hot_ops_pct: float = 100.0      # x
    hot_keys_pct: float = 100.0     # y
    read_pct: float = 100.0         # r (general mode)
    update_keys_pct: float = 0.0    # s (general mode)
    zipf_exponent: float = 1.0
    structure: str = "splaylist"
    p: float = 1.0
    threads: int = 1
    duration: float = 10.0
    reps: int = 10
    seed: int = 1
    ops: int = 0                # fixed op count instead of duration when > 0
    warmup_ops: int = 0         # untimed adaptation ops before measuring
    text: str = ""              # original --workload string

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("keyspace size must be >= 1")
        for name in ("hot_ops_pct", "hot_keys_pct", "read_pct",
                     "update_keys_pct"):
            v = getattr(self, name)
            if not (0 <= v <= 100):
                raise ValueError("%s must be in [0, 100]" % name)
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.kind == "skewed" and self.n * self.hot_keys_pct < 100:
            raise ValueError("hot set would be empty (y*n < 1)")


def parse_workload(text):
    """Parse a --workload string into (kind, params) for WorkloadSpec."""
    if text.startswith("general:"):
        parts = text[len("general:"):].split("-")
        if len(parts) != 5:
            raise ValueError("general workload needs n-r-x-y-s")
        n, r, x, y, s = (float(v) for v in parts)
        return dict(kind="general", n=int(n), read_pct=r, hot_ops_pct=x,
                    hot_keys_pct=y, update_keys_pct=s, text=text)
    if text.startswith("zipf:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("zipf workload needs zipf:n:exponent")
        return dict(kind="zipf", n=int(parts[1]),
                    zipf_exponent=float(parts[2]), text=text)
    if text.startswith("uniform:"):
        return dict(kind="uniform", n=int(text.split(":")[1]), text=text)
    parts = text.split("-")
    if len(parts) != 3:
        raise ValueError("skewed workload needs n-x-y")
    return dict(kind="skewed", n=int(parts[0]), hot_ops_pct=float(parts[1]),
                hot_keys_pct=float(parts[2]), text=text)


def generate_workload(spec, seed=None):
    """Materialize the sampling tables and prepopulation keys for a spec.

    Returns a dict with int64 arrays: hot, cold, cum (zipf cdf), wkeys
    (update set), prepop (keys to insert before timing), plus scalars.
    """
    seed = spec.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n = spec.n
    empty = np.zeros(0, dtype=np.int64)
    nothing = np.zeros(0, dtype=np.float64)
    hot = cold = wkeys = empty
    cum = nothing
    all_keys = np.arange(1, n + 1, dtype=np.int64)

    if spec.kind in ("skewed", "general"):
        hot_size = max(int(round(n * spec.hot_keys_pct / 100.0)), 1)
        perm = rng.permutation(all_keys)
        hot = np.sort(perm[:hot_size])
        cold = np.sort(perm[hot_size:])
        if cold.size == 0:
            cold = hot
    if spec.kind == "zipf":
        ranks = np.arange(1, n + 1, dtype=np.float64)
        weights = ranks ** (-spec.zipf_exponent)
        cum = np.cumsum(weights / weights.sum())
    if spec.kind == "general":
        w_size = max(int(round(n * spec.update_keys_pct / 100.0)), 1)
        wkeys = np.sort(rng.permutation(all_keys)[:w_size])
        keep = rng.random(n) < 0.5       # prepopulate each key with P=1/2
        prepop = rng.permutation(all_keys[keep])
    else:
        prepop = rng.permutation(all_keys)

    return {"hot": hot, "cold": cold, "cum": cum, "wkeys": wkeys,
            "prepop": prepop, "xfrac": spec.hot_ops_pct / 100.0,
            "rfrac": spec.read_pct / 100.0, "nkeys": n,
            "wl": _KIND_CODE[spec.kind]}


# ---------------------------------------------------------------------------
# single-threaded drivers (compiled kernels)
# ---------------------------------------------------------------------------

def _new_structure(spec, rep_seed):
    if spec.structure == "skiplist":
        return SkipList(capacity=spec.n + 64, seed=rep_seed)
    if spec.p >= 1.0:
        policy = RebalancePolicy.exact()
    else:
        policy = RebalancePolicy.relaxed(spec.p, seed=rep_seed)
    return SplayList(policy=policy, capacity=spec.n + 64)


def _prepopulate(sl, tables):
    keys = tables["prepop"]
    if isinstance(sl, SkipList):
        for key in keys:
            sl.insert(int(key))
        return
    # inserts are never gated so the starting structure is deterministic
    done = 0
    while done < keys.size:
        took = K.batch_insert(keys[done:], 1.0, sl.policy.state,
                              *sl._arrays(), sl._path, sl._lstart, sl._rec)
        done += int(took)
        if sl._rec[K.R_REBUILD]:
            sl._rebuild()
        if done < keys.size and int(sl.st[K.ST_ALLOC]) >= sl.keys.shape[0]:
            sl._grow()


def _run_single(spec, tables, rep_seed):
    sl = _new_structure(spec, rep_seed)
    _prepopulate(sl, tables)
    acc = np.zeros(K.A_LEN, dtype=np.int64)
    tally = np.zeros(spec.n + 2, dtype=np.int64)
    is_skip = isinstance(sl, SkipList)
    if not is_skip:
        sl.policy.state[0] = np.uint64(rep_seed) * np.uint64(2654435761) + \
            np.uint64(spec.seed)

    def chunk_call(nops):
        if is_skip:
            return K.skip_batch(
                nops, tables["wl"], tables["hot"], tables["cold"],
                tables["xfrac"], tables["cum"], tables["wkeys"],
                tables["nkeys"], tables["rfrac"], sl.max_level, sl._rng,
                sl.keys, sl.top, sl.nxt, sl.sstate, sl._preds, acc, tally)
        return K.batch_run(
            nops, tables["wl"], tables["hot"], tables["cold"],
            tables["xfrac"], tables["cum"], tables["wkeys"],
            tables["nkeys"], tables["rfrac"], sl.policy.p, sl.policy.state,
            *sl._arrays(), sl._path, sl._lstart, sl._rec, acc, tally)

    def handle_status():
        if acc[K.A_STATUS] == 1:
            sl._rebuild()
        elif acc[K.A_STATUS] == 2:
            sl._grow()

    # untimed warm-up: lets the structure adapt to the access distribution
    # before measurement, independently of how fast this machine runs
    left = spec.warmup_ops
    while left > 0:
        left -= int(chunk_call(min(left, 1 << 20)))
        handle_status()
    acc[K.A_OPS] = acc[K.A_PATH] = 0
    tally[:] = 0

    total_ops = 0
    chunk = 1 << 12
    start = time.perf_counter()
    if spec.ops > 0:
        while total_ops < spec.ops:
            total_ops += int(chunk_call(min(chunk, spec.ops - total_ops)))
            handle_status()
            chunk = 1 << 16
        elapsed = time.perf_counter() - start
    else:
        deadline = start + spec.duration
        now = start
        while now < deadline:
            took = int(chunk_call(chunk))
            handle_status()
            total_ops += took
            last = now
            now = time.perf_counter()
            # aim each chunk at ~50 ms without overshooting the deadline
            if now > last:
                rate = took / (now - last)
                chunk = int(min(max(rate * 0.05, 1024), 1 << 22))
        elapsed = now - start
    return sl, total_ops, int(acc[K.A_PATH]), elapsed, tally


# ---------------------------------------------------------------------------
# multi-threaded driver (lock-based structure, Python workers)
# ---------------------------------------------------------------------------

class _Worker(threading.Thread):
    def __init__(self, structure, spec, tables, seed, barrier, stop_flag,
                 op_budget):
        super().__init__()
        self.structure = structure
        self.spec = spec
        self.tables = tables
        self.rng = random.Random(seed)
        self.barrier = barrier
        self.stop_flag = stop_flag
        self.op_budget = op_budget
        self.ops = 0
        self.path = 0
        self.tally = {}

    def _sample(self):
        spec, t, rng = self.spec, self.tables, self.rng
        kind = "C"
        if spec.kind == "uniform":
            key = rng.randrange(1, spec.n + 1)
        elif spec.kind == "zipf":
            key = 1 + int(np.searchsorted(t["cum"], rng.random()))
            key = min(key, spec.n)
        elif spec.kind == "skewed":
            arr = t["hot"] if rng.random() < t["xfrac"] else t["cold"]
            key = int(arr[rng.randrange(arr.size)])
        else:
            if rng.random() < t["rfrac"]:
                arr = t["hot"] if rng.random() < t["xfrac"] else t["cold"]
                key = int(arr[rng.randrange(arr.size)])
            else:
                kind = "I" if rng.random() < 0.5 else "D"
                w = t["wkeys"]
                key = int(w[rng.randrange(w.size)])
        return kind, key

    def run(self):
        s = self.structure
        counted = hasattr(s, "contains_counted")
        self.barrier.wait()
        while not self.stop_flag["stop"] and self.ops < self.op_budget:
            kind, key = self._sample()
            if kind == "C":
                if counted:
                    _res, steps = s.contains_counted(key)
                    self.path += steps
                else:
                    s.contains(key)
            elif kind == "I":
                s.insert(key)
            else:
                s.delete(key)
            self.tally[key] = self.tally.get(key, 0) + 1
            self.ops += 1


class _LockedSkipList:
    """Coarse-locked baseline for multi-threaded comparison runs."""

    def __init__(self, **kw):
        self._inner = SkipList(**kw)
        self._lock = threading.Lock()

    def contains_counted(self, key):
        with self._lock:
            found, steps = K.skip_contains(
                int(key), self._inner.keys, self._inner.nxt,
                self._inner.sstate)
        return bool(found), int(steps)

    def contains(self, key):
        return self.contains_counted(key)[0]

    def insert(self, key):
        with self._lock:
            return self._inner.insert(key)

    def delete(self, key):
        with self._lock:
            return self._inner.delete(key)

    def keys_live(self):
        return self._inner.keys_live()


def _run_threaded(spec, tables, rep_seed):
    if spec.structure == "skiplist":
        structure = _LockedSkipList(capacity=spec.n + 64, seed=rep_seed)
        for key in tables["prepop"]:
            structure.insert(int(key))
    else:
        if spec.p >= 1.0:
            policy = RebalancePolicy.exact()
        else:
            policy = RebalancePolicy.relaxed(spec.p, seed=rep_seed)
        structure = ConcurrentSplayList(policy=policy)
        for key in tables["prepop"]:
            structure.insert(int(key))
    stop_flag = {"stop": False}
    barrier = threading.Barrier(spec.threads + 1)
    budget = spec.ops // spec.threads if spec.ops > 0 else (1 << 62)
    workers = [
        _Worker(structure, spec, tables, rep_seed * 1000 + i, barrier,
                stop_flag, budget)
        for i in range(spec.threads)]
    for w in workers:
        w.start()
    barrier.wait()
    start = time.perf_counter()
    if spec.ops > 0:
        for w in workers:
            w.join()
    else:
        time.sleep(spec.duration)
        stop_flag["stop"] = True
        for w in workers:
            w.join()
    elapsed = time.perf_counter() - start
    total_ops = sum(w.ops for w in workers)
    total_path = sum(w.path for w in workers)
    tally = np.zeros(spec.n + 2, dtype=np.int64)
    for w in workers:
        for key, cnt in w.tally.items():
            tally[key] += cnt
    return structure, total_ops, total_path, elapsed, tally


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class BenchResult:
    spec: WorkloadSpec
    reps: list = field(default_factory=list)   # per-rep dicts
    per_thread_ops: list = field(default_factory=list)
    height_popularity: list = field(default_factory=list)

    @property
    def ops_per_sec(self):
        vals = [r["ops_per_sec"] for r in self.reps]
        return sum(vals) / len(vals) if vals else 0.0

    @property
    def mean_path_len(self):
        vals = [r["mean_path_len"] for r in self.reps if r["ops"] > 0]
        return sum(vals) / len(vals) if vals else 0.0


def _height_popularity(structure, tally):
    out = []
    if isinstance(structure, _LockedSkipList):
        structure = structure._inner
    if isinstance(structure, SkipList):
        node = int(structure.nxt[K.HEAD, 0])
        while node != K.TAIL:
            key = int(structure.keys[node])
            out.append((int(tally[key]), int(structure.top[node])))
            node = int(structure.nxt[node, 0])
        return out
    if isinstance(structure, ConcurrentSplayList):
        zl = structure.zero_level
        for node in structure._iter_live():
            out.append((int(tally[node.key]), node.top - zl))
        return out
    zl = structure.zero_level
    for slot in structure._slots():
        if not structure.dele[slot]:
            key = int(structure.keys[slot])
            out.append((int(tally[key]), int(structure.top[slot]) - zl))
    return out


_warmed = False


def warm_kernels():
    """Trigger JIT compilation on throwaway structures so the first timed
    repetition is not charged for it."""
    global _warmed
    if _warmed:
        return
    for structure in ("splaylist", "skiplist"):
        spec = WorkloadSpec(kind="skewed", n=64, hot_ops_pct=90,
                            hot_keys_pct=10, structure=structure,
                            ops=256, reps=1, text="64-90-10")
        tables = generate_workload(spec, seed=0)
        _run_single(spec, tables, 0)
    _warmed = True


def run_benchmark(spec):
    """Run ``spec.reps`` repetitions and return a BenchResult."""
    if spec.threads == 1:
        warm_kernels()
    result = BenchResult(spec=spec)
    for rep in range(spec.reps):
        rep_seed = spec.seed + rep
        tables = generate_workload(spec, seed=rep_seed)
        if spec.ops == 0 and spec.duration <= 0:
            result.reps.append({"rep": rep, "seed": rep_seed, "ops": 0,
                                "ops_per_sec": 0.0, "mean_path_len": 0.0,
                                "elapsed": 0.0})
            continue
        if spec.threads == 1:
            structure, ops, path, elapsed, tally = _run_single(
                spec, tables, rep_seed)
        else:
            structure, ops, path, elapsed, tally = _run_threaded(
                spec, tables, rep_seed)
        result.reps.append({
            "rep": rep, "seed": rep_seed, "ops": ops,
            "ops_per_sec": ops / elapsed if elapsed > 0 else 0.0,
            "mean_path_len": path / ops if ops > 0 else 0.0,
            "elapsed": elapsed})
        if rep == spec.reps - 1:
            result.height_popularity = _height_popularity(structure, tally)
    return result


def _git_describe():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "v" + __version__


def emit_results(result, fmt="csv", path=None):
    """Serialize a BenchResult; returns the emitted text."""
    spec = result.spec
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in result.reps:
            lines.append("%s,%g,%d,%s,%d,%.3f,%.4f" % (
                spec.structure, spec.p, spec.threads, spec.text or spec.kind,
                r["seed"], r["ops_per_sec"], r["mean_path_len"]))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {
            "structure": spec.structure, "p": spec.p,
            "threads": spec.threads, "workload": spec.text or spec.kind,
            "seed": spec.seed, "reps": result.reps,
            "opsPerSec": result.ops_per_sec,
            "meanPathLength": result.mean_path_len,
            "heightPopularityDump": result.height_popularity,
            "metadata": {
                "spec": {k: getattr(spec, k) for k in (
                    "kind", "n", "hot_ops_pct", "hot_keys_pct", "read_pct",
                    "update_keys_pct", "zipf_exponent", "duration", "reps",
                    "ops", "warmup_ops")},
                "build": _git_describe(),
            },
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        raise ValueError("unknown format %r" % (fmt,))
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="splaylist-bench",
        description="Throughput/path-length benchmark for the adaptive "
                    "list vs a classic skip list.")
    parser.add_argument("--structure", choices=["splaylist", "skiplist"],
                        default="splaylist")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--p", type=float, default=1.0,
                       help="rebalance probability (1 = exact)")
    group.add_argument("--c", type=int,
                       help="rebalance period; sets p = 1/c")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--workload", default="100000-90-10",
                        help="n-x-y | general:n-r-x-y-s | zipf:n:exp | "
                             "uniform:n")
    parser.add_argument("--duration", type=float, default=10.0,
                        help="seconds per repetition")
    parser.add_argument("--ops", type=int, default=0,
                        help="run a fixed op count instead of a duration")
    parser.add_argument("--warmup", type=int, default=0,
                        help="untimed adaptation ops before measuring "
                             "(single-threaded runs)")
    parser.add_argument("--reps", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default=None,
                        help="output file (default: stdout summary only; "
                             "relative paths resolve against "
                             "$SPLAYLIST_BENCH_DIR)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    args = parser.parse_args(argv)

    p = 1.0 / args.c if args.c else args.p
    if not (0.0 < p <= 1.0):
        parser.error("p must be in (0, 1]")
    try:
        fields = parse_workload(args.workload)
        spec = WorkloadSpec(structure=args.structure, p=p,
                            threads=args.threads, duration=args.duration,
                            reps=args.reps, seed=args.seed, ops=args.ops,
                            warmup_ops=args.warmup, **fields)
    except ValueError as exc:
        parser.error(str(exc))

    result = run_benchmark(spec)

    out_path = args.out
    if out_path is not None and not os.path.isabs(out_path):
        base = os.environ.get("SPLAYLIST_BENCH_DIR", "")
        if base:
            os.makedirs(base, exist_ok=True)
            out_path = os.path.join(base, out_path)
    text = emit_results(result, fmt=args.format, path=out_path)

    print("structure=%s p=%g threads=%d workload=%s" % (
        spec.structure, spec.p, spec.threads, spec.text))
    print("  ops/sec (mean over %d reps): %.0f" % (
        len(result.reps), result.ops_per_sec))
    print("  mean path length:            %.3f" % (result.mean_path_len,))
    if out_path:
        print("  wrote %s (%s)" % (out_path, args.format))
    elif args.format == "csv":
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
