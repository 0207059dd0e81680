"""Sequential structure: semantics, counters, serialization, invariants."""

import math
import random

import pytest

from splaylist import SplayList, RebalancePolicy
from splaylist.verify import ReferenceModel, validate_structure


def test_basic_set_semantics():
    sl = SplayList()
    assert not sl.contains(5)
    assert sl.insert(5)
    assert sl.contains(5)
    assert not sl.insert(5)          # already present
    assert sl.delete(5)
    assert not sl.contains(5)
    assert not sl.delete(5)          # marked: second delete fails
    assert sl.insert(5)              # revive
    assert sl.contains(5)
    assert len(sl) == 1


def test_map_payload():
    sl = SplayList()
    sl.insert(1, "one")
    sl.insert(2)
    assert sl.get(1) == "one"
    assert sl.get(2) is None
    assert sl.get(3, "missing") == "missing"
    sl.insert(1, "uno")              # overwrite value on re-insert
    assert sl.get(1) == "uno"
    sl.delete(1)
    assert sl.get(1) is None


def test_key_range_rejected():
    sl = SplayList()
    with pytest.raises(ValueError):
        sl.insert(2 ** 63 - 1)
    with pytest.raises(ValueError):
        sl.insert(-(2 ** 63))


def test_miss_changes_nothing():
    sl = SplayList()
    for key in (10, 20, 30):
        sl.insert(key)
    before = sl.dump()
    assert not sl.contains(15)
    assert not sl.delete(15)
    assert sl.dump() == before


def test_hit_counting_rules():
    sl = SplayList()
    sl.insert(7)                      # fresh insert: m=1, sh=1
    assert (sl.m, sl.M) == (1, 1)
    sl.contains(7)                    # hit
    assert (sl.m, sl.M) == (2, 2)
    sl.insert(7)                      # unsuccessful insert on present key: hit
    assert (sl.m, sl.M) == (3, 3)
    sl.delete(7)                      # hit, then M drops by the full selfHits
    # M hit zero, so the rebuild trigger fired before delete returned
    assert sl.stats["rebuilds"] == 1
    assert (sl.m, sl.M, len(sl)) == (0, 0, 0)


def test_k_tracks_log2_m():
    sl = SplayList()
    sl.insert(1)
    seen = []
    for _ in range(40):
        sl.contains(1)
        seen.append((sl.m, sl.k))
    for m, k in seen:
        assert k == int(math.log2(m))
    assert (7, 2) in seen and (8, 3) in seen and (9, 3) in seen
    assert (10, 3) in seen


def test_golden_state_transition(state_a, state_b):
    sl = SplayList.load(state_a)
    assert sl.dump() == state_a                 # round trip
    assert sl.contains(5)
    assert sl.dump() == state_b


def test_dump_load_round_trip_random():
    rng = random.Random(42)
    sl = SplayList()
    for _ in range(2000):
        key = rng.randrange(1, 150)
        action = rng.random()
        if action < 0.5:
            sl.contains(key)
        elif action < 0.8:
            sl.insert(key)
        else:
            sl.delete(key)
    text = sl.dump()
    clone = SplayList.load(text)
    assert clone.dump() == text
    assert list(clone.keys_live()) == list(sl.keys_live())
    assert (clone.m, clone.M, clone.k) == (sl.m, sl.M, sl.k)
    assert validate_structure(clone, check_exact_accounting=True) == []


def test_deterministic_given_seed():
    def run(seed):
        sl = SplayList(policy=RebalancePolicy.relaxed(0.25, seed=seed))
        rng = random.Random(99)
        for _ in range(3000):
            key = rng.randrange(1, 100)
            a = rng.random()
            if a < 0.5:
                sl.contains(key)
            elif a < 0.8:
                sl.insert(key)
            else:
                sl.delete(key)
        return sl.dump()

    assert run(5) == run(5)
    assert run(5) != run(6)


def test_exact_mode_matches_reference_counters():
    sl = SplayList()
    ref = ReferenceModel()
    rng = random.Random(7)
    rebuilds = 0
    for _ in range(5000):
        key = rng.randrange(1, 120)
        a = rng.random()
        if a < 0.5:
            kind = "C"
            got = sl.contains(key)
        elif a < 0.8:
            kind = "I"
            got = sl.insert(key)
        else:
            kind = "D"
            got = sl.delete(key)
        assert got == ref.apply(kind, key, gated=True)
        if sl.stats["rebuilds"] != rebuilds:
            rebuilds = sl.stats["rebuilds"]
            ref.drop_marked()
        assert (sl.m, sl.M) == (ref.m, ref.M)
    assert set(sl.keys_live()) == ref.members()


def test_validator_clean_after_random_run():
    sl = SplayList()
    rng = random.Random(31)
    for i in range(4000):
        key = rng.randrange(1, 200)
        a = rng.random()
        if a < 0.5:
            sl.contains(key)
        elif a < 0.8:
            sl.insert(key)
        else:
            sl.delete(key)
        if i % 500 == 499:
            assert validate_structure(sl, check_exact_accounting=True) == []


def test_rebuild_trigger_boundary(state_a):
    # mark the hot key (selfHits 5) so M drops to exactly m/2
    lines = state_a.splitlines()
    lines[0] = "10 5 3 60"
    lines[6] = "6 2 5 0 0 0 1"
    sl = SplayList.load("\n".join(lines) + "\n")
    assert (sl.m, sl.M) == (10, 5)
    sl.contains(999)                  # a miss still reaches the trigger check
    assert sl.stats["rebuilds"] == 1
    assert sl.m == sl.M == 5
    assert list(sl.keys_live()) == [1, 2, 3, 4, 5]

    # one live selfHit more and the trigger must not fire
    lines = state_a.splitlines()
    lines[0] = "10 6 3 60"
    lines[6] = "6 2 5 0 0 0 1"
    sl = SplayList.load("\n".join(lines) + "\n")
    assert (sl.m, sl.M) == (10, 6)
    sl.contains(999)
    assert sl.stats["rebuilds"] == 0


def test_post_rebuild_state_is_clean():
    sl = SplayList()
    rng = random.Random(13)
    for _ in range(5000):
        key = rng.randrange(1, 60)
        a = rng.random()
        if a < 0.3:
            sl.contains(key)
        elif a < 0.55:
            sl.insert(key)
        else:
            sl.delete(key)
    assert sl.stats["rebuilds"] > 0
    # trigger condition never left standing after an op completes
    assert 2 * sl.M > sl.m
    slots = sl._slots()
    assert all(not sl.dele[s] or 2 * sl.M > sl.m for s in slots)
    assert validate_structure(sl, check_exact_accounting=True) == []


def test_promotions_dominate_demotions():
    sl = SplayList()
    rng = random.Random(3)
    for _ in range(500):
        key = rng.randrange(1, 50)
        if rng.random() < 0.5:
            sl.contains(key)
        else:
            sl.insert(key)
    s = sl.stats
    assert s["demotions"] <= s["promotions"]
