"""Height assignment for full rebuilds: both split implementations, the
demotion cleanup pass, and validator-clean installed results."""

import random

import numpy as np
import pytest

from splaylist.core import SplayList
from splaylist.rebuild import (assign_heights_linear, assign_heights_repeated,
                               choose_variant, cleanup_demotions)
from splaylist.verify import validate_structure


def test_three_key_example():
    # hits [1,1,2]: H=4 -> the key owning the middle hit (key 3) goes to
    # height floor(log2 4) = 2, then [1,1] splits at the second key
    counts = np.array([1, 1, 2], dtype=np.int64)
    for assign in (assign_heights_linear, assign_heights_repeated):
        assert list(assign(counts)) == [0, 1, 2]


def test_single_entry():
    for assign in (assign_heights_linear, assign_heights_repeated):
        assert list(assign(np.array([1], dtype=np.int64))) == [0]
    sl = SplayList()
    sl.rebuild_from([17], [1])
    assert validate_structure(sl, check_descent=True,
                              check_exact_accounting=True) == []
    assert list(sl.keys_live()) == [17]


def test_variants_agree_on_random_inputs():
    rng = random.Random(31)
    for trial in range(20):
        n = rng.randrange(1, 200)
        counts = np.array([rng.randrange(1, 101) for _ in range(n)],
                          dtype=np.int64)
        a = assign_heights_linear(counts)
        b = assign_heights_repeated(counts)
        assert list(a) == list(b)


def test_cleanup_fixes_descent_pairs():
    # raw split on hits [6,1,5] parks the light middle key too high; the
    # cleanup sweep must demote until no adjacent pair satisfies descent
    counts = np.array([6, 1, 5], dtype=np.int64)
    raw = assign_heights_linear(counts)
    cleaned = cleanup_demotions(counts, raw, int(counts.sum()))
    assert list(cleaned) != list(raw)
    assert (cleaned <= raw).all()
    sl = SplayList()
    sl.rebuild_from([1, 2, 3], counts, variant="linear")
    assert validate_structure(sl, check_descent=True,
                              check_exact_accounting=True) == []


def test_installed_structures_are_validator_clean():
    rng = random.Random(77)
    for trial in range(10):
        n = rng.randrange(1, 400)
        keys = sorted(rng.sample(range(1, 10 ** 6), n))
        counts = [rng.randrange(1, 101) for _ in range(n)]
        dumps = []
        for variant in ("linear", "repeated"):
            sl = SplayList()
            sl.rebuild_from(keys, counts, variant=variant)
            assert validate_structure(sl, check_descent=True,
                                      check_exact_accounting=True) == []
            assert sl.m == sl.M == sum(counts)
            dumps.append(sl.dump())
        assert dumps[0] == dumps[1]        # identical per-key heights


def test_choose_variant():
    # hit-heavy inputs favour the cumulative-array walk, flat ones the
    # repeated-keys array
    assert choose_variant(10, 10 ** 6) == "linear"
    assert choose_variant(1000, 1000) == "repeated"


def test_rebuild_from_input_validation():
    sl = SplayList()
    with pytest.raises(ValueError):
        sl.rebuild_from([3, 3], [1, 1])          # duplicate keys
    with pytest.raises(ValueError):
        sl.rebuild_from([5, 4], [1, 1])          # unsorted
    with pytest.raises(ValueError):
        sl.rebuild_from([1, 2], [1, 0])          # hit count < 1
    with pytest.raises(ValueError):
        sl.rebuild_from([1, 2], [1])             # length mismatch
    sl.rebuild_from([], [])                      # empty input is fine
    assert len(sl) == 0
