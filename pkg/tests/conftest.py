"""Shared fixtures: frozen golden states for the worked example.

STATE_A is a 6-key structure with m=10 (key 6 is the hot key, selfHits 5,
height 2); STATE_B is the expected state after one contains(5) in exact
mode: m=11, key 4 promoted to height 1, key 3 demoted to height 0, and the
affected subtree counters redistributed.
"""

import pytest

STATE_A = (
    "10 10 3 60\n"
    "1 0 1 0 0\n"
    "2 1 1 0 0 0\n"
    "3 1 1 0 2 0\n"
    "4 0 1 0 0\n"
    "5 0 1 0 0\n"
    "6 2 5 0 0 0 0\n"
)

STATE_B = (
    "11 11 3 60\n"
    "1 0 1 0 0\n"
    "2 1 1 0 1 0\n"
    "3 0 1 0 0\n"
    "4 1 1 0 2 0\n"
    "5 0 2 0 0\n"
    "6 2 5 0 0 0 0\n"
)


@pytest.fixture
def state_a():
    return STATE_A


@pytest.fixture
def state_b():
    return STATE_B
