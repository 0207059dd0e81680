"""The checkers themselves: the structural validator must catch planted
corruption, the linearizability search must return correct verdicts, and the
op-stream files must round-trip."""

import random

import pytest

from splaylist.core import SplayList
from splaylist.verify import (ReferenceModel, binomial_log_moment_check,
                              check_cost_bounds, check_linearizable,
                              oracle_equivalence_run, random_op_stream,
                              read_op_stream, validate_structure,
                              write_op_stream)


def test_validator_accepts_known_good_state(state_b):
    sl = SplayList.load(state_b)
    assert validate_structure(sl, check_descent=True,
                              check_exact_accounting=True) == []


def test_validator_catches_corrupt_subtree_sum(state_b):
    sl = SplayList.load(state_b)
    slot = list(sl._slots())[0]
    lv = int(sl.top[slot])
    sl.hits[slot, lv] += 1
    bad = validate_structure(sl)
    assert len(bad) == 1 and "hits" in bad[0]


def test_validator_catches_corrupt_link(state_b):
    sl = SplayList.load(state_b)
    slots = list(sl._slots())
    zl = sl.zero_level
    sl.nxt[slots[0], zl] = sl.nxt[slots[1], zl]   # skip a bottom node
    assert any("links to" in v for v in validate_structure(sl))


def test_validator_catches_bad_counters(state_b):
    sl = SplayList.load(state_b)
    sl.st[1] = sl.m + 5                           # force M > m
    assert any("M > m" in v for v in validate_structure(sl))


def test_reference_model_counters():
    ref = ReferenceModel()
    assert ref.apply("I", 1, gated=True)          # fresh insert
    assert ref.apply("C", 1, gated=True)          # hit
    assert (ref.m, ref.M) == (2, 2)
    assert not ref.apply("I", 1, gated=True)      # duplicate: hit only
    assert ref.apply("D", 1, gated=True)          # mark: tally leaves M
    assert (ref.m, ref.M) == (4, 0)
    assert not ref.apply("C", 1, gated=True)      # hit on marked: m only
    assert (ref.m, ref.M) == (5, 0)
    assert ref.apply("I", 1, gated=True)          # revive: tally returns
    assert (ref.m, ref.M) == (6, 6)
    ref.apply("D", 1, gated=True)
    ref.drop_marked()
    assert ref.members() == set() and ref.m == ref.M


def test_linearizable_sequential_history():
    # non-overlapping ops in one thread: trivially linearizable
    hist = [(0, "I", 5, True, 0, 1), (0, "C", 5, True, 2, 3),
            (0, "D", 5, True, 4, 5), (0, "C", 5, False, 6, 7)]
    assert check_linearizable(hist) is True


def test_linearizable_requires_real_time_order():
    # contains(5) -> True finished before insert(5) even started
    hist = [(0, "C", 5, True, 0, 1), (1, "I", 5, True, 2, 3)]
    assert check_linearizable(hist) is False
    # overlap makes the same results legal
    hist = [(0, "C", 5, True, 0, 4), (1, "I", 5, True, 1, 2)]
    assert check_linearizable(hist) is True


def test_linearizable_concurrent_inserts():
    # two overlapping inserts of one key: exactly one may succeed
    base = [(0, "I", 9, True, 0, 10), (1, "I", 9, True, 1, 9)]
    assert check_linearizable(base) is False
    ok = [(0, "I", 9, True, 0, 10), (1, "I", 9, False, 1, 9)]
    assert check_linearizable(ok) is True


def test_linearizable_budget_exhaustion_is_inconclusive():
    hist = []
    for t in range(4):
        for i in range(6):
            hist.append((t, "I", t * 10 + i, True, 0, 100))
    assert check_linearizable(hist, budget=10) is None


def test_linearizable_respects_initial_members():
    hist = [(0, "C", 3, True, 0, 1)]
    assert check_linearizable(hist) is False
    assert check_linearizable(hist, initial=(3,)) is True


def test_binomial_log_moment():
    rep = binomial_log_moment_check(10 ** 6, 0.1, trials=20_000, seed=1)
    assert rep["applicable"] and rep["ok"] is True
    assert rep["estimate"] >= rep["reference"]
    # p = 1 degenerates to log2(n) exactly
    rep = binomial_log_moment_check(1024, 1.0, trials=100, seed=1)
    assert rep["ok"] is True and abs(rep["estimate"] - 10.0) < 0.01
    # below the np >= 3 n^(2/3) regime the bound is not asserted
    rep = binomial_log_moment_check(10 ** 6, 1e-5, trials=1000, seed=1)
    assert rep["applicable"] is False and rep["ok"] is None


def test_cost_bound_checker_flags_violations():
    good = {"gated": 1, "found": 1, "m": 8, "selfHits": 2, "demotions": 0,
            "promotions": 0, "levelsVisited": 2, "forwardLen": 3,
            "backwardLen": 0, "maxNonDescending": 2}
    assert check_cost_bounds([good]) == []
    bad = dict(good, maxNonDescending=9)
    assert any("non-descending" in v for v in check_cost_bounds([bad]))
    deep = dict(good, forwardLen=10 ** 6)
    assert any(check_cost_bounds([deep]))


def test_op_stream_round_trip(tmp_path):
    ops = random_op_stream(500, 64, seed=9)
    assert {k for k, _ in ops} <= {"C", "I", "D"}
    path = tmp_path / "stream.txt"
    write_op_stream(path, ops, seed=9)
    seed, back = read_op_stream(path)
    assert seed == 9 and back == ops


def test_oracle_equivalence_trivial_and_short():
    sl = SplayList()
    rep = oracle_equivalence_run(sl, [])
    assert rep["divergences"] == [] and rep["final_size"] == 0
    rep = oracle_equivalence_run(SplayList(), random_op_stream(300, 16, 3),
                                 compare_counters=True, validate_every=50)
    assert rep["divergences"] == []


def test_oracle_equivalence_catches_a_lying_structure():
    class Liar(SplayList):
        def contains(self, key):
            super().contains(key)
            return True
    rep = oracle_equivalence_run(Liar(), [("C", 1)])
    assert rep["divergences"]
