"""
Thread-safe variant
===================

ConcurrentSplayList supports any number of threads: searches are latch-free,
height adjustments take per-node locks in key order (no deadlocks), and the
periodic rebuild stops the world briefly behind a readers/writer gate.
"""

import random
import threading

from splaylist import ConcurrentSplayList, RebalancePolicy
from splaylist.verify import validate_structure

con = ConcurrentSplayList(policy=RebalancePolicy.relaxed_c(10, seed=1))
for key in range(1, 257):
    con.insert(key)


def worker(seed):
    rng = random.Random(seed)
    for _ in range(5000):
        key = rng.randrange(1, 257)
        r = rng.random()
        if r < 0.7:
            con.contains(key)
        elif r < 0.85:
            con.insert(key)
        else:
            con.delete(key)


threads = [threading.Thread(target=worker, args=(s,)) for s in range(4)]
for t in threads:
    t.start()
for t in threads:
    t.join()

print("stats after 4x5000 mixed ops:", con.stats)

# at quiescence every invariant must hold exactly: sorted keys, per-level
# links, subtree hit sums, the no-ascent condition, and counter accounting
violations = validate_structure(con, check_exact_accounting=True)
print("validator violations:", violations)
assert violations == []
