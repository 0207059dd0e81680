"""
Self-adjustment in action
=========================

Access paths shorten for keys that are hit frequently.  This script builds a
list over 10**4 keys, hammers a small hot set, and shows how the mean search
path drops as the structure adapts -- exactly the effect the `splaylist-bench`
command measures at scale.
"""

import random

from splaylist import RebalancePolicy, SplayList

random.seed(7)

N = 10_000
sl = SplayList()
for key in range(1, N + 1):
    sl.insert(key)

hot = random.sample(range(1, N + 1), N // 100)   # 1% of the keys


def mean_path(keys):
    total = 0
    for key in keys:
        sl.contains(key)
        total += sl.last_record()["pathLen"]
    return total / len(keys)


probe = hot[:200]
print("cold structure: mean path %.1f" % mean_path(probe))

# 99% of accesses to the hot 1%: the hot keys get promoted level by level
for _ in range(200_000):
    key = random.choice(hot) if random.random() < 0.99 else \
        random.randrange(1, N + 1)
    sl.contains(key)

print("after 2e5 skewed accesses: mean path %.1f" % mean_path(probe))
print("promotions=%(promotions)d demotions=%(demotions)d" % sl.stats)

# relaxed mode: only update counters/heights with probability p = 1/100.
# Lookups get cheaper on average (most are pure reads) at the cost of a
# slower adaptation -- the usual throughput/latency trade-off.
relaxed = SplayList(policy=RebalancePolicy.relaxed_c(100, seed=3))
for key in range(1, N + 1):
    relaxed.insert(key)
print("relaxed gate fires for ~1% of hits: p =", relaxed.policy.p)
