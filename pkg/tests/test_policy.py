"""Gate policy: exact/relaxed behaviour, determinism, and the statistical
properties the relaxed counters rely on."""

import numpy as np
import pytest
from scipy import stats

import splaylist._kernels as K
from splaylist.core import SplayList
from splaylist.policy import RebalancePolicy, splitmix64


def test_exact_mode_always_fires_and_uses_no_randomness():
    pol = RebalancePolicy.exact()
    before = int(pol.state[0])
    assert all(pol.should_rebalance() for _ in range(100))
    assert int(pol.state[0]) == before
    assert pol.mode == "exact"
    assert pol.p == 1.0


def test_relaxed_rate_one_percent():
    pol = RebalancePolicy.relaxed_c(100, seed=7)
    n = 10 ** 6
    fired = sum(pol.should_rebalance() for _ in range(n))
    assert 0.0097 <= fired / n <= 0.0103


def test_p_validation():
    with pytest.raises(ValueError):
        RebalancePolicy(0.0)
    with pytest.raises(ValueError):
        RebalancePolicy(1.5)
    with pytest.raises(ValueError):
        RebalancePolicy.relaxed_c(0)


def test_seed_determinism():
    a = RebalancePolicy.relaxed(0.3, seed=42)
    b = RebalancePolicy.relaxed(0.3, seed=42)
    c = RebalancePolicy.relaxed(0.3, seed=43)
    seq_a = [a.should_rebalance() for _ in range(2000)]
    seq_b = [b.should_rebalance() for _ in range(2000)]
    seq_c = [c.should_rebalance() for _ in range(2000)]
    assert seq_a == seq_b
    assert seq_a != seq_c
    assert a.clone().seed == a.seed


def test_worker_streams_are_independent():
    base = RebalancePolicy.relaxed(0.5, seed=9)
    streams = [base.stream(i) for i in range(8)]
    assert len({int(s.state[0]) for s in streams}) == 8
    seqs = [tuple(s.should_rebalance() for _ in range(64)) for s in streams]
    assert len(set(seqs)) == 8
    for s in streams:
        assert s.p == base.p


def test_splitmix_matches_kernel_stream():
    # the pure-Python generator and the jitted one must share one stream
    pol = RebalancePolicy.relaxed(0.5, seed=123)
    state = np.array([123], dtype=np.uint64)
    for _ in range(100):
        z = K.rng_next(state)
        s, want = splitmix64(int(pol.state[0]))
        pol.state[0] = s
        assert int(z) == want


def test_gate_off_operations_do_not_change_the_structure():
    # with a vanishingly small p, hits on present keys and unsuccessful
    # inserts never pass the gate: the dump must stay byte-identical
    sl = SplayList()
    for key in range(1, 21):
        sl.insert(key)
    sl.policy = RebalancePolicy.relaxed(1e-12, seed=5)
    frozen = sl.dump()
    for key in range(1, 21):
        assert sl.contains(key)
        assert not sl.insert(key)
        assert not sl.contains(1000 + key)
    assert sl.dump() == frozen


def test_relaxed_m_is_binomial():
    # m after 10^4 hit-ops at p = 1/10 ~ Binomial(10^4, 1/10):
    # chi-square goodness of fit over 200 independent runs at alpha = 0.001
    nops, p, reps = 10 ** 4, 0.1, 200
    hot = np.array([7], dtype=np.int64)
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0, dtype=np.float64)
    samples = []
    for rep in range(reps):
        sl = SplayList(policy=RebalancePolicy.relaxed(p, seed=1000 + rep))
        sl.insert(7)
        base = sl.m
        acc = np.zeros(K.A_LEN, dtype=np.int64)
        tally = np.zeros(16, dtype=np.int64)
        done = K.batch_run(nops, K.WL_SKEWED, hot, hot, 1.0, empty_f,
                           empty_i, 1, 1.0, p, sl.policy.state,
                           *sl._arrays(), sl._path, sl._lstart, sl._rec,
                           acc, tally)
        assert done == nops and acc[K.A_STATUS] == 0
        samples.append(sl.m - base)
    samples = np.array(samples)
    mean, sd = nops * p, np.sqrt(nops * p * (1 - p))
    edges = np.linspace(mean - 3 * sd, mean + 3 * sd, 9)
    obs, _ = np.histogram(samples, np.concatenate(([-1], edges, [nops + 1])))
    probs = stats.binom.cdf(np.concatenate((edges, [nops + 1])), nops, p)
    probs = np.diff(np.concatenate(([0.0], probs)))
    exp = probs * reps
    keep = exp >= 5
    obs = np.append(obs[keep], obs[~keep].sum())
    exp = np.append(exp[keep], exp[~keep].sum())
    res = stats.chisquare(obs, exp * obs.sum() / exp.sum())
    assert res.pvalue > 0.001
